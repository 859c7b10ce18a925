//! Padding a partite packing instance up to a target dimension p.
//!
//! A q-partite instance with uniform edge size q becomes p-partite by
//! adding p−q dummy parts, each holding one fresh vertex per edge; edge i
//! gains the i-th vertex of every dummy part. Each dummy vertex lies in
//! exactly one edge, so dummy parts never create new conflicts and the
//! maximum matching size is preserved. `nearest_prime_multiple` finds the
//! prime R that brings a kR-dimensional instance within a (1−ε₂) factor of
//! the target dimension.

use crate::ff;
use crate::packing::SetPackingInstance;
use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadError {
    #[error("instance declares no partition or is not partite")]
    NotPartite,
    #[error("no prime R satisfies (1 - eps2)·p <= k·R <= p")]
    NoPrimeInWindow,
    #[error("target dimension {target} is below the current {parts} parts")]
    TargetTooSmall { parts: usize, target: usize },
}

/// The largest prime R with k·R ≤ p, provided it lands in the window
/// (1−eps2)·p ≤ k·R. For small p the window can be empty.
pub fn nearest_prime_multiple(p: u64, k: u64, eps2: Rational64) -> Result<u64, PadError> {
    assert!(k >= 1, "k must be positive");
    let r = (2..=p / k)
        .rev()
        .find(|&r| ff::is_prime(r))
        .ok_or(PadError::NoPrimeInWindow)?;
    let reach = Rational64::from_integer((k * r) as i64);
    let window = (Rational64::from_integer(1) - eps2) * Rational64::from_integer(p as i64);
    if reach < window {
        return Err(PadError::NoPrimeInWindow);
    }
    Ok(r)
}

/// Pad a partite instance to exactly `p` parts with dummy parts of |E|
/// vertices each. Identity when `p` equals the current part count.
pub fn pad_to_p(dm: &SetPackingInstance, p: usize) -> Result<SetPackingInstance, PadError> {
    let q = dm.is_partite().map_err(|_| PadError::NotPartite)?;
    if p < q {
        return Err(PadError::TargetTooSmall { parts: q, target: p });
    }
    if p == q {
        return Ok(dm.clone());
    }
    let n = dm.num_vertices();
    let ne = dm.num_edges();
    let edges: Vec<Vec<usize>> = dm
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut e = e.clone();
            e.extend((0..p - q).map(|j| n + j * ne + i));
            e
        })
        .collect();
    let mut partition: Vec<Vec<usize>> = dm.partition().unwrap().to_vec();
    for j in 0..p - q {
        partition.push((n + j * ne..n + (j + 1) * ne).collect());
    }
    Ok(
        SetPackingInstance::new(n + (p - q) * ne, edges, Some(partition))
            .expect("padding preserves well-formedness"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random q-partite instance with `per_part` vertices per part and
    /// `ne` edges, each picking one vertex per part.
    fn random_partite(q: usize, per_part: usize, ne: usize, seed: u64) -> SetPackingInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let partition: Vec<Vec<usize>> = (0..q)
            .map(|i| (i * per_part..(i + 1) * per_part).collect())
            .collect();
        let edges: Vec<Vec<usize>> = (0..ne)
            .map(|_| {
                (0..q)
                    .map(|i| i * per_part + rng.gen_range(0..per_part))
                    .collect()
            })
            .collect();
        SetPackingInstance::new(q * per_part, edges, Some(partition)).unwrap()
    }

    #[test]
    fn prime_window_examples() {
        assert_eq!(nearest_prime_multiple(35, 6, Rational64::new(1, 5)), Ok(5));
        assert_eq!(nearest_prime_multiple(12, 6, Rational64::new(1, 10)), Ok(2));
        assert_eq!(
            nearest_prime_multiple(11, 6, Rational64::new(1, 2)),
            Err(PadError::NoPrimeInWindow)
        );
        // p/k = 8 → largest prime is 7; 6·7 = 42 ≥ 0.9·48 = 43.2 fails
        assert_eq!(
            nearest_prime_multiple(48, 6, Rational64::new(1, 10)),
            Err(PadError::NoPrimeInWindow)
        );
        assert_eq!(nearest_prime_multiple(48, 6, Rational64::new(1, 4)), Ok(7));
    }

    #[test]
    fn identity_when_target_matches() {
        let dm = random_partite(4, 2, 3, 0);
        let padded = pad_to_p(&dm, 4).unwrap();
        assert_eq!(padded, dm);
    }

    #[test]
    fn pad_grows_edges_and_parts() {
        let dm = random_partite(4, 2, 2, 1);
        let before = dm.solve_exact(None).unwrap().len();
        let padded = pad_to_p(&dm, 6).unwrap();
        assert_eq!(padded.is_partite(), Ok(6));
        assert_eq!(padded.num_vertices(), 8 + 2 * 2);
        assert!(padded.edges().iter().all(|e| e.len() == 6));
        assert_eq!(padded.solve_exact(None).unwrap().len(), before);
    }

    #[test]
    fn dummy_vertices_used_exactly_once() {
        let dm = random_partite(3, 3, 4, 2);
        let padded = pad_to_p(&dm, 7).unwrap();
        let mut uses = vec![0usize; padded.num_vertices()];
        for e in padded.edges() {
            for &v in e {
                uses[v] += 1;
            }
        }
        assert!(uses[dm.num_vertices()..].iter().all(|&u| u == 1));
    }

    #[test]
    fn matching_size_preserved_randomly() {
        for seed in 0..25 {
            let dm = random_partite(3, 2, 5, seed);
            let before = dm.solve_exact(None).unwrap().len();
            for p in [3, 4, 8] {
                let padded = pad_to_p(&dm, p).unwrap();
                assert_eq!(padded.solve_exact(None).unwrap().len(), before);
                assert_eq!(padded.is_partite(), Ok(p));
            }
        }
    }

    #[test]
    fn pad_error_cases() {
        let no_partition = SetPackingInstance::new(2, vec![vec![0, 1]], None).unwrap();
        assert_eq!(pad_to_p(&no_partition, 3), Err(PadError::NotPartite));

        let dm = random_partite(4, 2, 2, 3);
        assert_eq!(
            pad_to_p(&dm, 2),
            Err(PadError::TargetTooSmall { parts: 4, target: 2 })
        );
    }

    #[test]
    fn edgeless_instance_pads_with_empty_dummy_parts() {
        let partition = Some(vec![vec![0], vec![1]]);
        let dm = SetPackingInstance::new(2, vec![], partition).unwrap();
        let padded = pad_to_p(&dm, 5).unwrap();
        assert_eq!(padded.num_vertices(), 2);
        assert_eq!(padded.is_partite(), Ok(5));
    }
}
