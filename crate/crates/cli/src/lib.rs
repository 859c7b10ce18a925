//! Batch front-end for the reduction pipeline. Every subcommand reads and
//! writes the plain-text instance formats, prints a short deterministic
//! report to stdout, and signals through the exit code:
//!
//! - 0: success (for `verify`/`pipeline`/`stats-check`: the check passed)
//! - 1: a verification or bound check failed
//! - 2: usage error, malformed input, or an unmet precondition
//! - 3: an enumeration or search budget was exceeded
//!
//! Randomized subcommands take an explicit `--seed`; given the same seed
//! and inputs, their outputs are byte-identical across runs.

use clap::{Parser, Subcommand, ValueEnum};
use kdm_core::csp::{gen_planted, gen_random_regular, Assignment, CspInstance};
use kdm_core::packing::SetPackingInstance;
use kdm_core::pad::pad_to_p;
use kdm_core::reduce::{parse_map, reduce_to_packing};
use kdm_core::sparsify::{check_events, sparsify, SparsifyConfig};
use kdm_core::stats::{cantelli_bound, chernoff_bound, clip_bound_check};
use num_rational::Rational64;
use num_traits::{One, ToPrimitive};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "kdm", version, about = "CSP sparsification, matching reduction, and bound checking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a d-regular k-partite CSP over alphabet R
    GenCsp {
        /// Number of parts (constraint arity)
        #[arg(long)]
        k: usize,
        /// Alphabet size
        #[arg(long = "R")]
        r: u32,
        /// Degree of every vertex
        #[arg(long)]
        d: usize,
        /// Vertices per part
        #[arg(long)]
        n: usize,
        /// Probability that a tuple satisfies a constraint (rational or decimal)
        #[arg(long, value_parser = parse_rational, conflicts_with = "planted", default_value = "1/2")]
        density: Rational64,
        /// RNG seed (required: outputs are reproducible by contract)
        #[arg(long)]
        seed: u64,
        /// Plant a uniformly random satisfying assignment instead
        #[arg(long)]
        planted: bool,
        /// Output instance file
        #[arg(short, long)]
        out: PathBuf,
        /// Where to write the planted witness
        #[arg(long, requires = "planted")]
        witness: Option<PathBuf>,
    },
    /// Sample and trim a regular CSP down to degree R
    Sparsify {
        /// Sampling slack λ in (0,1); keep probability is (1−λ)R/d
        #[arg(long, value_parser = parse_rational)]
        lambda: Rational64,
        #[arg(long)]
        seed: u64,
        /// Input instance file
        #[arg(short, long = "in")]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional provenance sidecar (retained/deleted constraint ids)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Reduce a CSP with prime alphabet to a kR-dimensional matching instance
    Reduce {
        #[arg(short, long = "in")]
        input: PathBuf,
        /// Output set-packing file
        #[arg(short, long)]
        out: PathBuf,
        /// Output map sidecar (edge and vertex provenance)
        #[arg(long)]
        map: PathBuf,
    },
    /// Pad a q-partite instance to p parts without changing the optimum
    Pad {
        #[arg(short, long = "in")]
        input: PathBuf,
        /// Target number of parts
        #[arg(long)]
        p: usize,
        /// Window slack: require q ≥ (1−ε₂)·p for the current q parts
        #[arg(long, value_parser = parse_rational)]
        eps2: Rational64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Exhaustively maximize satisfied constraints
    SolveCsp {
        #[arg(short, long = "in")]
        input: PathBuf,
        /// Assignment enumeration cap (default 10^7)
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Exhaustively maximize a matching (branch and bound)
    SolveMatching {
        #[arg(short, long = "in")]
        input: PathBuf,
        /// Search node budget (default 10^7)
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Re-derive the reduction and check both artifacts and optima
    Verify {
        /// Source CSP file
        #[arg(short, long = "in")]
        input: PathBuf,
        /// Set-packing file to verify
        #[arg(long)]
        sp: PathBuf,
        /// Map sidecar to verify
        #[arg(long)]
        map: PathBuf,
    },
    /// Evaluate a tail bound, optionally against a Monte-Carlo estimate
    StatsCheck {
        #[arg(long, value_enum)]
        bound: BoundKind,
        /// Variance σ² (cantelli)
        #[arg(long, value_parser = parse_rational)]
        sigma_sq: Option<Rational64>,
        /// Deviation α > 0 (cantelli)
        #[arg(long, value_parser = parse_rational)]
        alpha: Option<Rational64>,
        /// Mean: μ of the sum (chernoff) or per-trial probability (clip)
        #[arg(long, value_parser = parse_rational)]
        mu: Option<Rational64>,
        /// Relative deviation δ (chernoff)
        #[arg(long, value_parser = parse_rational)]
        delta: Option<Rational64>,
        /// Number of Bernoulli summands (clip)
        #[arg(long)]
        m: Option<u64>,
        /// Truncation threshold τ (clip)
        #[arg(long)]
        tau: Option<u64>,
        /// Monte-Carlo trials (clip)
        #[arg(long)]
        trials: Option<u64>,
        /// RNG seed (clip)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// gen → sparsify → reduce → pad → verify, with a key:value report
    Pipeline {
        #[arg(long)]
        k: usize,
        #[arg(long = "R")]
        r: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rational)]
        lambda: Rational64,
        /// Final number of parts (must be ≥ kR)
        #[arg(long)]
        p: usize,
        #[arg(long)]
        seed: u64,
        /// Also write the report to a file (byte-identical to stdout)
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    Cantelli,
    Chernoff,
    Clip,
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }

    fn budget(msg: impl Into<String>) -> Self {
        CliError { code: 3, msg: msg.into() }
    }
}

/// Errors that name a search budget map to exit 3; everything else is a
/// bad input or unmet precondition (exit 2). The `{:?}` form keeps the
/// variant name visible in diagnostics.
fn core_err(e: impl std::fmt::Debug + std::fmt::Display) -> CliError {
    let dbg = format!("{e:?}");
    let msg = format!("{dbg}: {e}");
    if dbg.starts_with("BudgetExceeded") || dbg.starts_with("TooLarge") {
        CliError::budget(msg)
    } else {
        CliError::usage(msg)
    }
}

/// Parse `a/b`, an integer, or an exact decimal such as `0.25`.
fn parse_rational(s: &str) -> Result<Rational64, String> {
    let s = s.trim();
    let (sign, mag) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, s),
    };
    let parse_int = |t: &str| -> Result<i64, String> {
        t.parse::<i64>().map_err(|_| format!("invalid number `{s}`"))
    };
    if let Some((a, b)) = mag.split_once('/') {
        let den = parse_int(b)?;
        if den == 0 {
            return Err("zero denominator".into());
        }
        Ok(Rational64::new(sign * parse_int(a)?, den))
    } else if let Some((int, frac)) = mag.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid decimal `{s}`"));
        }
        let whole = if int.is_empty() { 0 } else { parse_int(int)? };
        let num = parse_int(frac)?;
        let den = 10i64.pow(frac.len() as u32);
        Ok(Rational64::from_integer(sign * whole) + Rational64::new(sign * num, den))
    } else {
        Ok(Rational64::from_integer(sign * parse_int(mag)?))
    }
}

fn rat_str(q: Rational64) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn read_csp(path: &Path) -> Result<CspInstance, CliError> {
    CspInstance::from_text(&read(path)?).map_err(core_err)
}

fn read_sp(path: &Path) -> Result<SetPackingInstance, CliError> {
    SetPackingInstance::from_text(&read(path)?).map_err(core_err)
}

fn witness_text(psi: &Assignment) -> String {
    let mut out = String::new();
    for part in &psi.labels {
        let row: Vec<String> = part.iter().map(|l| l.to_string()).collect();
        writeln!(out, "labels {}", row.join(" ")).unwrap();
    }
    out
}

fn assignment_display(psi: &Assignment) -> String {
    psi.labels
        .iter()
        .map(|part| {
            part.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage problems
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::GenCsp { k, r, d, n, density, seed, planted, out, witness } => {
            let inst = if planted {
                let (inst, psi) = gen_planted(k, r, d, n, seed).map_err(core_err)?;
                if let Some(wpath) = witness {
                    write(&wpath, &witness_text(&psi))?;
                }
                inst
            } else {
                gen_random_regular(k, r, d, n, density, seed).map_err(core_err)?
            };
            write(&out, &inst.to_text())?;
            println!(
                "gen-csp: k={k} R={r} d={d} n={n} constraints={} -> {}",
                inst.num_constraints(),
                out.display()
            );
            Ok(0)
        }

        Cmd::Sparsify { lambda, seed, input, out, report } => {
            let inst = read_csp(&input)?;
            let cfg = SparsifyConfig::new(lambda, seed).map_err(core_err)?;
            let outcome = sparsify(&inst, &cfg).map_err(core_err)?;
            write(&out, &outcome.result.to_text())?;
            if let Some(rpath) = report {
                write(&rpath, &outcome.provenance_text())?;
            }
            println!(
                "sparsify: constraints={} retained={} deleted={} kept={} sample-p={} -> {}",
                outcome.original_m,
                outcome.retained_ids.len(),
                outcome.deleted_ids.len(),
                outcome.result.num_constraints(),
                rat_str(outcome.p_used),
                out.display()
            );
            Ok(0)
        }

        Cmd::Reduce { input, out, map } => {
            let inst = read_csp(&input)?;
            let red = reduce_to_packing(&inst).map_err(core_err)?;
            write(&out, &red.packing().to_text())?;
            write(&map, &red.map_to_text())?;
            let parts = match red.packing().partition() {
                Some(p) => p.len().to_string(),
                None => "none".into(),
            };
            println!(
                "reduce: edges={} vertices={} parts={parts} -> {} (map {})",
                red.packing().num_edges(),
                red.packing().num_vertices(),
                out.display(),
                map.display()
            );
            Ok(0)
        }

        Cmd::Pad { input, p, eps2, out } => {
            let sp = read_sp(&input)?;
            let q = sp.is_partite().map_err(core_err)?;
            let window =
                (Rational64::one() - eps2) * Rational64::from_integer(p as i64);
            if Rational64::from_integer(q as i64) < window {
                return Err(CliError::usage(format!(
                    "padding window violated: current parts {q} < (1-eps2)*p = {}",
                    rat_str(window)
                )));
            }
            let padded = pad_to_p(&sp, p).map_err(core_err)?;
            write(&out, &padded.to_text())?;
            println!(
                "pad: parts {q} -> {p}, edges={} -> {}",
                padded.num_edges(),
                out.display()
            );
            Ok(0)
        }

        Cmd::SolveCsp { input, cap } => {
            let inst = read_csp(&input)?;
            let sol = inst.solve_exact(cap).map_err(core_err)?;
            println!("satisfied: {}", sol.satisfied);
            println!("total: {}", inst.num_constraints());
            let value = if inst.num_constraints() == 0 {
                "undefined".into()
            } else {
                rat_str(Rational64::new(
                    sol.satisfied as i64,
                    inst.num_constraints() as i64,
                ))
            };
            println!("value: {value}");
            println!("assignment: {}", assignment_display(&sol.assignment));
            Ok(0)
        }

        Cmd::SolveMatching { input, budget } => {
            let sp = read_sp(&input)?;
            let matching = sp.solve_exact(budget).map_err(core_err)?;
            println!("matching: {}", matching.len());
            let ids: Vec<String> = matching.edge_ids.iter().map(|i| i.to_string()).collect();
            println!("edges: {}", ids.join(" "));
            Ok(0)
        }

        Cmd::Verify { input, sp, map } => {
            let inst = read_csp(&input)?;
            let sp_inst = read_sp(&sp)?;
            let map_parsed = parse_map(&read(&map)?).map_err(core_err)?;
            let red = reduce_to_packing(&inst).map_err(core_err)?;

            let mut mismatches = Vec::new();
            if red.packing().num_vertices() != sp_inst.num_vertices() {
                mismatches.push(format!(
                    "vertex count {} != expected {}",
                    sp_inst.num_vertices(),
                    red.packing().num_vertices()
                ));
            }
            if red.packing().edges() != sp_inst.edges() {
                mismatches.push("edge lists differ from the re-derived reduction".into());
            }
            if red.map_entries() != map_parsed {
                mismatches.push("map sidecar differs from the re-derived reduction".into());
            }
            if !mismatches.is_empty() {
                for m in &mismatches {
                    println!("structure: MISMATCH ({m})");
                }
                println!("FAIL");
                return Ok(1);
            }
            println!("structure: OK");

            let best_csp = inst.solve_exact(None).map_err(core_err)?.satisfied as usize;
            let best_matching = sp_inst.solve_exact(None).map_err(core_err)?.len();
            if best_matching == best_csp {
                println!("matching {best_matching} = csp {best_csp}, PASS");
                Ok(0)
            } else {
                println!("matching {best_matching} != csp {best_csp}, FAIL");
                Ok(1)
            }
        }

        Cmd::StatsCheck { bound, sigma_sq, alpha, mu, delta, m, tau, trials, seed } => {
            let need = |name: &str, ok: bool| -> Result<(), CliError> {
                if ok {
                    Ok(())
                } else {
                    Err(CliError::usage(format!("--bound {} requires --{name}", match bound {
                        BoundKind::Cantelli => "cantelli",
                        BoundKind::Chernoff => "chernoff",
                        BoundKind::Clip => "clip",
                    })))
                }
            };
            match bound {
                BoundKind::Cantelli => {
                    need("sigma-sq", sigma_sq.is_some())?;
                    need("alpha", alpha.is_some())?;
                    let b = cantelli_bound(sigma_sq.unwrap(), alpha.unwrap()).map_err(core_err)?;
                    println!("bound: {}", rat_str(b));
                    println!("bound-f64: {}", b.to_f64().unwrap());
                    Ok(0)
                }
                BoundKind::Chernoff => {
                    need("mu", mu.is_some())?;
                    need("delta", delta.is_some())?;
                    let b = chernoff_bound(
                        mu.unwrap().to_f64().unwrap(),
                        delta.unwrap().to_f64().unwrap(),
                    );
                    println!("bound: {b}");
                    Ok(0)
                }
                BoundKind::Clip => {
                    need("mu", mu.is_some())?;
                    need("m", m.is_some())?;
                    need("tau", tau.is_some())?;
                    need("trials", trials.is_some())?;
                    need("seed", seed.is_some())?;
                    let report = clip_bound_check(
                        mu.unwrap(),
                        m.unwrap(),
                        tau.unwrap(),
                        trials.unwrap(),
                        seed.unwrap(),
                    )
                    .map_err(core_err)?;
                    println!("analytic-bound: {}", report.analytic_bound);
                    println!("empirical-estimate: {}", report.empirical_estimate);
                    println!("trials: {}", report.trials);
                    println!("standard-error: {}", report.standard_error);
                    println!("holds: {}", report.holds(3.0));
                    Ok(if report.holds(3.0) { 0 } else { 1 })
                }
            }
        }

        Cmd::Pipeline { k, r, d, n, lambda, p, seed, report } => {
            let (inst, psi) = gen_planted(k, r, d, n, seed).map_err(core_err)?;
            let cfg = SparsifyConfig::new(lambda, seed.wrapping_add(1)).map_err(core_err)?;
            let outcome = sparsify(&inst, &cfg).map_err(core_err)?;
            let events = check_events(&inst, &outcome, &psi, lambda).map_err(core_err)?;
            let red = reduce_to_packing(&outcome.result).map_err(core_err)?;
            let q = red
                .packing()
                .partition()
                .map(|parts| parts.len())
                .unwrap_or(k * r as usize);
            let padded = pad_to_p(red.packing(), p).map_err(core_err)?;
            let best_csp = outcome.result.solve_exact(None).map_err(core_err)?.satisfied as usize;
            let best_matching = padded.solve_exact(None).map_err(core_err)?.len();

            let mut rep = String::new();
            writeln!(rep, "k: {k}").unwrap();
            writeln!(rep, "R: {r}").unwrap();
            writeln!(rep, "d: {d}").unwrap();
            writeln!(rep, "n: {n}").unwrap();
            writeln!(rep, "lambda: {}", rat_str(lambda)).unwrap();
            writeln!(rep, "p: {p}").unwrap();
            writeln!(rep, "seed: {seed}").unwrap();
            writeln!(rep, "constraints: {}", outcome.original_m).unwrap();
            writeln!(rep, "retained: {}", outcome.retained_ids.len()).unwrap();
            writeln!(rep, "deleted: {}", outcome.deleted_ids.len()).unwrap();
            writeln!(rep, "kept: {}", outcome.result.num_constraints()).unwrap();
            writeln!(rep, "sample-p: {}", rat_str(outcome.p_used)).unwrap();
            writeln!(rep, "mref: {}", rat_str(outcome.m_ref)).unwrap();
            writeln!(
                rep,
                "events: e1={} e2={} e3={}",
                events.e1, events.e2, events.e3
            )
            .unwrap();
            writeln!(rep, "reduced-edges: {}", red.packing().num_edges()).unwrap();
            writeln!(rep, "reduced-parts: {q}").unwrap();
            writeln!(rep, "padded-parts: {p}").unwrap();
            writeln!(rep, "csp-optimum: {best_csp}").unwrap();
            writeln!(rep, "matching-size: {best_matching}").unwrap();
            let verdict = if best_matching == best_csp { "PASS" } else { "FAIL" };
            writeln!(rep, "verify: matching {best_matching} {} csp {best_csp}, {verdict}",
                     if best_matching == best_csp { "=" } else { "!=" }).unwrap();

            print!("{rep}");
            if let Some(rpath) = report {
                write(&rpath, &rep)?;
            }
            Ok(if best_matching == best_csp { 0 } else { 1 })
        }
    }
}
