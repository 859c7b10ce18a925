//! Arithmetic over the prime field Z/RZ.
//!
//! Everything the variable gadget needs: primality testing, modular
//! inverses, affine-line evaluation `x ↦ ax + b mod R`, and intersection of
//! two such lines. Residues are plain `u64` values in `0..R`; the alphabet
//! convention is 0-indexed throughout the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
}

/// Deterministic trial division. Intended for desk-scale moduli (`n < 2^32`).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn mod_mul(a: u64, b: u64, r: u64) -> u64 {
    ((a as u128 * b as u128) % r as u128) as u64
}

fn mod_pow(mut base: u64, mut exp: u64, r: u64) -> u64 {
    let mut acc = 1 % r;
    base %= r;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, r);
        }
        base = mod_mul(base, base, r);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` in Z/RZ, via Fermat's little theorem. `R` must be prime.
pub fn mod_inverse(a: u64, r: u64) -> Result<u64, FfError> {
    if !is_prime(r) {
        return Err(FfError::NonPrimeModulus(r));
    }
    let a = a % r;
    if a == 0 {
        return Err(FfError::ZeroInverse);
    }
    Ok(mod_pow(a, r - 2, r))
}

/// `(a*x + b) mod R`.
pub fn affine_eval(a: u64, b: u64, x: u64, r: u64) -> u64 {
    ((a as u128 * x as u128 + b as u128) % r as u128) as u64
}

/// An affine line `y = ax + b mod R`, identified by slope and intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Line {
    pub slope: u64,
    pub intercept: u64,
}

impl Line {
    pub fn new(slope: u64, intercept: u64) -> Self {
        Line { slope, intercept }
    }
}

/// Outcome of intersecting two affine lines over Z/RZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineIntersection {
    /// Identical slope and intercept: the lines coincide everywhere.
    SameLine,
    /// Identical slope, different intercept: no common point.
    Parallel,
    /// Distinct slopes meet in exactly one point of the R×R grid.
    Point { x: u64, y: u64 },
}

/// Intersect two lines over Z/RZ with `R` prime.
///
/// Distinct slopes always yield a unique point: `x = (b' - b)(a - a')^{-1}`.
pub fn line_intersection(l1: Line, l2: Line, r: u64) -> Result<LineIntersection, FfError> {
    if !is_prime(r) {
        return Err(FfError::NonPrimeModulus(r));
    }
    let (a, b) = (l1.slope % r, l1.intercept % r);
    let (a2, b2) = (l2.slope % r, l2.intercept % r);
    if a == a2 {
        return Ok(if b == b2 {
            LineIntersection::SameLine
        } else {
            LineIntersection::Parallel
        });
    }
    let slope_diff = (a + r - a2) % r;
    let intercept_diff = (b2 + r - b) % r;
    let x = mod_mul(intercept_diff, mod_inverse(slope_diff, r)?, r);
    Ok(LineIntersection::Point {
        x,
        y: affine_eval(a, b, x, r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

    #[test]
    fn primality_small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(35)); // 5 * 7
        assert!(is_prime(101));
        assert!(is_prime(1283));
        assert!(!is_prime(1284));
    }

    #[test]
    fn inverse_identity_and_search() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        // exhaustive-search oracle for 2^{-1} mod 5
        let expected = (1..5).find(|u| (2 * u) % 5 == 1).unwrap();
        assert_eq!(mod_inverse(2, 5).unwrap(), expected);
        assert_eq!(expected, 3);
    }

    #[test]
    fn inverse_error_cases() {
        assert_eq!(mod_inverse(0, 5), Err(FfError::ZeroInverse));
        assert_eq!(mod_inverse(2, 6), Err(FfError::NonPrimeModulus(6)));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for &r in &SMALL_PRIMES {
            for a in 1..r {
                let u = mod_inverse(a, r).unwrap();
                assert_eq!((a * u) % r, 1, "a={a} r={r}");
            }
        }
    }

    #[test]
    fn affine_eval_examples() {
        for x in 0..5 {
            assert_eq!(affine_eval(0, 3, x, 5), 3);
        }
        assert_eq!(affine_eval(1, 0, 2, 5), 2);
        assert_eq!(affine_eval(2, 3, 2, 5), 2); // 2*2+3 = 7 ≡ 2 mod 5
    }

    #[test]
    fn intersection_examples() {
        let p = line_intersection(Line::new(1, 0), Line::new(2, 3), 5).unwrap();
        assert_eq!(p, LineIntersection::Point { x: 2, y: 2 });

        let p = line_intersection(Line::new(1, 0), Line::new(1, 4), 5).unwrap();
        assert_eq!(p, LineIntersection::Parallel);

        let p = line_intersection(Line::new(0, 1), Line::new(1, 0), 3).unwrap();
        assert_eq!(p, LineIntersection::Point { x: 1, y: 1 });

        let p = line_intersection(Line::new(2, 3), Line::new(2, 3), 5).unwrap();
        assert_eq!(p, LineIntersection::SameLine);

        assert_eq!(
            line_intersection(Line::new(1, 0), Line::new(2, 1), 4),
            Err(FfError::NonPrimeModulus(4))
        );
    }

    // Exhaustive over all primes <= 13: distinct slopes meet in exactly one
    // grid point lying on both lines; equal slopes with distinct intercepts
    // never meet.
    #[test]
    fn intersection_exhaustive_small_primes() {
        for &r in &SMALL_PRIMES {
            for a in 0..r {
                for b in 0..r {
                    for a2 in 0..r {
                        for b2 in 0..r {
                            if (a, b) == (a2, b2) {
                                continue;
                            }
                            let got =
                                line_intersection(Line::new(a, b), Line::new(a2, b2), r).unwrap();
                            if a == a2 {
                                assert_eq!(got, LineIntersection::Parallel);
                                continue;
                            }
                            // count solutions by scanning columns
                            let shared: Vec<u64> = (0..r)
                                .filter(|&x| affine_eval(a, b, x, r) == affine_eval(a2, b2, x, r))
                                .collect();
                            assert_eq!(shared.len(), 1, "r={r} ({a},{b}) vs ({a2},{b2})");
                            match got {
                                LineIntersection::Point { x, y } => {
                                    assert_eq!(x, shared[0]);
                                    assert_eq!(y, affine_eval(a, b, x, r));
                                    assert_eq!(y, affine_eval(a2, b2, x, r));
                                }
                                other => panic!("expected point, got {other:?}"),
                            }
                        }
                    }
                }
            }
        }
    }
}
