//! Overlap and key-rate sweeps.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::emit::ResultTable;
use super::spec::{RateMode, SweepSpec};
use crate::entropy::{sampled_relative_weight, sampling_key_length, KeyRateInput};
use crate::error::{Error, Result};
use crate::povm::{overlap_report_from, OverlapReport};
use crate::walk::{self, Coin};

pub const TOOL: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const OVERLAP_SCHEMA: &[&str] = &["P", "T", "delta0", "delta1", "overlap_c", "max_abs_disagreement"];

pub const KEYRATE_SCHEMA: &[&str] = &[
    "Q",
    "P",
    "D",
    "T",
    "N",
    "m",
    "w_q",
    "gamma",
    "delta",
    "ell_new",
    "rate_new",
    "ell_standard",
    "eps_closeness",
];

/// Tool name, optional timestamp, and the spec echo (without `out`).
///
/// The timestamp comes from `SOURCE_DATE_EPOCH` so that output stays
/// reproducible; without it no timestamp is written.
pub fn metadata(spec: &SweepSpec) -> Vec<(String, String)> {
    let mut meta = vec![("tool".to_string(), TOOL.to_string())];
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        meta.push(("timestamp".to_string(), epoch));
    }
    meta.extend(
        spec.entries()
            .into_iter()
            .filter(|(k, _)| *k != "out")
            .map(|(k, v)| (format!("spec.{k}"), v.trim_matches('"').to_string())),
    );
    meta
}

/// Evaluates `f` on every point in parallel and returns results in input
/// order; the first failing point (in input order) wins.
fn par_eval<P: Sync, T: Send>(points: &[P], f: impl Fn(&P) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn grid(spec: &SweepSpec) -> Vec<(usize, usize)> {
    let mut points: Vec<(usize, usize)> = spec
        .positions
        .iter()
        .flat_map(|&p| spec.time.steps_for(p).into_iter().map(move |t| (p, t)))
        .collect();
    points.sort_unstable();
    points
}

fn reports(spec: &SweepSpec, points: &[(usize, usize)]) -> Result<Vec<OverlapReport>> {
    let (coin, x0) = (spec.start_coin, spec.start_position);
    par_eval(points, |&(p, t)| overlap_report_from(coin, x0, p, t))
}

/// One row per `(P, T)`: `delta0, delta1, overlap_c` and the numeric-vs-analytic gap.
pub fn run_overlap_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    if !spec.kind.is_overlap() {
        return Err(Error::config("kind", "overlap sweep needs overlap-dim or overlap-time"));
    }
    let points = grid(spec);
    let mut table = ResultTable::new(OVERLAP_SCHEMA, metadata(spec));
    for r in reports(spec, &points)? {
        table.push(vec![
            r.positions as f64,
            r.steps as f64,
            r.delta0,
            r.delta1,
            r.overlap_c,
            r.max_abs_disagreement,
        ]);
    }
    Ok(table)
}

/// One row per `(Q, P, N)` (and `T`), sorted in that order.
///
/// gamma and the overlap are computed once per `(P, T)`. The standard key
/// length uses the closed-form overlap, which the report has already checked
/// against the numeric one.
pub fn run_keyrate_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    if spec.kind.is_overlap() {
        return Err(Error::config("kind", "key-rate sweep needs kind = keyrate"));
    }
    let points = grid(spec);
    let cache: BTreeMap<(usize, usize), OverlapReport> =
        points.iter().copied().zip(reports(spec, &points)?).collect();

    let mut noise = spec.noise.clone();
    noise.sort_by(f64::total_cmp);
    let ns = spec.n_values();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut table = ResultTable::new(KEYRATE_SCHEMA, metadata(spec));
    for &q in &noise {
        for &p in &{
            let mut ps = spec.positions.clone();
            ps.sort_unstable();
            ps.dedup();
            ps
        } {
            for &n in &ns {
                for t in {
                    let mut ts = spec.time.steps_for(p);
                    ts.sort_unstable();
                    ts
                } {
                    let report = &cache[&(p, t)];
                    let sample = (spec.sample_frac * n as f64).round() as u64;
                    let w_q = match spec.mode {
                        RateMode::Deterministic => q,
                        RateMode::MonteCarlo => sampled_relative_weight(&mut rng, sample, q)?,
                    };
                    let input = KeyRateInput::new(n, sample, w_q, spec.epsilon, p, report.gamma)?
                        .with_overlap(report.analytic_overlap_c)?;
                    let row = sampling_key_length(&input)?;
                    table.push(vec![
                        q,
                        p as f64,
                        input.dimension() as f64,
                        t as f64,
                        n as f64,
                        sample as f64,
                        w_q,
                        report.gamma,
                        row.delta,
                        row.ell_new,
                        row.rate_new,
                        row.ell_standard,
                        row.eps_closeness,
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// Position distribution of `W^T |coin, x0>` as a two-column table.
pub fn walk_dump(coin: Coin, x0: usize, positions: usize, steps: usize) -> Result<ResultTable> {
    let state = walk::evolve(coin, x0, positions, steps)?;
    let dist = walk::position_distribution(&state);
    let (argmax, gamma) = dist.max();
    let meta = vec![
        ("tool".to_string(), TOOL.to_string()),
        ("P".to_string(), positions.to_string()),
        ("T".to_string(), steps.to_string()),
        ("start".to_string(), format!("|{},{}>", coin.index(), x0)),
        ("gamma".to_string(), super::emit::format_value(gamma)),
        ("argmax".to_string(), argmax.to_string()),
    ];
    let mut table = ResultTable::new(&["z", "prob"], meta);
    for (z, &prob) in dist.probs.iter().enumerate() {
        table.push(vec![z as f64, prob]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::spec::parse_spec;

    #[test]
    fn single_point_basis_state() {
        let spec = parse_spec("kind = \"overlap-dim\"\np = 2\ntime = 0").unwrap();
        let table = run_overlap_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        assert_eq!(&row[..2], &[2.0, 0.0]);
        assert!((row[2] - 1.0).abs() < 1e-12 && (row[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_rows_complete_and_sorted() {
        let spec = parse_spec("kind = \"overlap-time\"\np = \"7,3\"\ntime = \"4,1,2\"").unwrap();
        let table = run_overlap_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 6);
        let keys: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[1])).collect();
        assert_eq!(
            keys,
            vec![(3.0, 1.0), (3.0, 2.0), (3.0, 4.0), (7.0, 1.0), (7.0, 2.0), (7.0, 4.0)]
        );
        assert!(table.rows.iter().all(|r| (r[4] - 1.0).abs() < 1e-9));
    }

    #[test]
    fn wrong_kind_is_a_config_error() {
        let spec = parse_spec("kind = \"keyrate\"").unwrap();
        assert_eq!(run_overlap_sweep(&spec).unwrap_err().exit_code(), 1);
        let spec = parse_spec("kind = \"overlap-dim\"\np = 2").unwrap();
        assert_eq!(run_keyrate_sweep(&spec).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn keyrate_rows_complete_sorted_and_standard_nonpositive() {
        let spec = parse_spec(
            "kind = \"keyrate\"\np = \"5,3\"\nnoise = \"0.2,0\"\nn_range = \"1000:100000:10\"",
        )
        .unwrap();
        let table = run_keyrate_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 2 * 2 * 3);
        let keys: Vec<(f64, f64, f64)> = table.rows.iter().map(|r| (r[0], r[1], r[4])).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
        assert!(table.column("ell_standard").unwrap().iter().all(|&x| x <= 0.0));
        let gamma = table.column("gamma").unwrap();
        assert!((gamma[0] - 0.625).abs() < 1e-12, "P = 3, T = 3");
    }

    #[test]
    fn keyrate_rate_grows_with_n() {
        let spec = parse_spec("kind = \"keyrate\"\np = 11\nnoise = 0").unwrap();
        let rates = run_keyrate_sweep(&spec).unwrap().column("rate_new").unwrap();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let src = "kind = \"keyrate\"\np = 3\nnoise = 0.15\nmode = \"montecarlo\"\nn_range = \"1000:100000:10\"";
        let a = run_keyrate_sweep(&parse_spec(&format!("{src}\nseed = 5")).unwrap()).unwrap();
        let b = run_keyrate_sweep(&parse_spec(&format!("{src}\nseed = 5")).unwrap()).unwrap();
        let c = run_keyrate_sweep(&parse_spec(&format!("{src}\nseed = 6")).unwrap()).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_ne!(a.column("w_q"), c.column("w_q"));
        assert!(a.column("w_q").unwrap().iter().any(|&w| w != 0.15));
    }

    #[test]
    fn metadata_echoes_spec_without_out() {
        let spec = parse_spec("kind = \"keyrate\"\nout = \"/tmp/x.csv\"").unwrap();
        let meta = metadata(&spec);
        assert!(meta.iter().any(|(k, v)| k == "spec.kind" && v == "keyrate"));
        assert!(!meta.iter().any(|(k, _)| k == "spec.out"));
    }

    #[test]
    fn walk_dump_distribution() {
        let table = walk_dump(Coin::Zero, 0, 2, 1).unwrap();
        assert_eq!(table.column("prob").unwrap().len(), 2);
        assert!((table.column("prob").unwrap()[1] - 1.0).abs() < 1e-15);
        assert!(walk_dump(Coin::Zero, 5, 3, 1).is_err());
    }
}
