//! End to end: walk state, POVMs, overlap, key rate, emitted table.

use qwalk_eur::entropy::{sampling_key_length, KeyRateInput};
use qwalk_eur::povm::{build_w_povm, build_z_povm, overlap_report, pair_overlap, povm_validate};
use qwalk_eur::sweep::emit::{to_csv, to_json};
use qwalk_eur::sweep::{parse_spec, run_keyrate_sweep, SweepSpec};
use qwalk_eur::walk::{gamma, honest_state};

#[test]
fn generic_overlap_matches_walk_report() {
    for (p, t) in [(3, 3), (4, 2), (6, 6)] {
        let state = honest_state(p, t).unwrap();
        let w = build_w_povm(&state).unwrap();
        let z = build_z_povm(p).unwrap();
        assert!(povm_validate(&w).is_valid() && povm_validate(&z).is_valid());
        let generic = pair_overlap(&w, &z).unwrap();
        let report = overlap_report(p, t).unwrap();
        assert!((generic - report.overlap_c).abs() < 1e-12);
        assert!((report.delta0 - gamma(&state)).abs() < 1e-12);
    }
}

#[test]
fn sweep_rows_match_direct_key_length() {
    let spec = parse_spec("kind = \"keyrate\"\np = 5\nnoise = 0.15\nn_range = \"10000:1000000:10\"").unwrap();
    let table = run_keyrate_sweep(&spec).unwrap();
    let g = gamma(&honest_state(5, 5).unwrap());
    for row in &table.rows {
        let input = KeyRateInput::new(row[4] as u64, row[5] as u64, 0.15, 1e-7, 5, g).unwrap();
        let direct = sampling_key_length(&input).unwrap();
        assert_eq!(row[9], direct.ell_new);
        assert_eq!(row[10], direct.rate_new);
    }
}

#[test]
fn spec_round_trip_then_identical_output() {
    let spec = SweepSpec::defaults(qwalk_eur::sweep::SweepKind::Keyrate);
    let reparsed = parse_spec(&spec.to_toml()).unwrap();
    assert_eq!(spec, reparsed);
    let (a, b) = (run_keyrate_sweep(&spec).unwrap(), run_keyrate_sweep(&reparsed).unwrap());
    assert_eq!(to_csv(&a), to_csv(&b));
    assert_eq!(to_json(&a), to_json(&b));
}
