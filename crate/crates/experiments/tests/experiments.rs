//! Behaviour of the named experiments and the command-line front end.

use std::path::PathBuf;
use std::process::Command;

use netsteer_core::network::bilocal_assemblage;
use netsteer_core::povm::bell_swap_povm;
use netsteer_core::states::{dew, psi_minus, DewParams};
use netsteer_core::{Dims, Error};
use netsteer_experiments::{
    boundary_eta, cmd_activation_sweep, cmd_claims_demo, cmd_nlhs, cmd_verify_swap, with_threads, AxesPreset, EtaSpec,
    ExperimentError, Fixture, NlhsOptions, Range, SweepSpec,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netsteer"))
}

#[test]
fn swap_element_at_full_visibility_is_quarter_singlet() {
    let s = dew(DewParams::new(1.0, 1.0).unwrap()).unwrap();
    let asm = bilocal_assemblage(&s, &s, &bell_swap_povm()).unwrap();
    let want = psi_minus().embed(&Dims::new(vec![3, 3]).unwrap()).unwrap().scale(0.25);
    assert!(asm.get(&[0]).unwrap().max_abs_diff(&want).unwrap() <= 1e-12);
}

#[test]
fn swap_element_vanishes_without_survival() {
    for omega in [0.0, 0.4, 1.0] {
        let s = dew(DewParams::new(0.0, omega).unwrap()).unwrap();
        let asm = bilocal_assemblage(&s, &s, &bell_swap_povm()).unwrap();
        assert!(asm.get(&[0]).unwrap().max_abs() < 1e-15);
    }
}

#[test]
fn verify_swap_grid_passes() {
    let spec = SweepSpec::new(EtaSpec::Grid(Range::unit(11).unwrap()), Range::unit(11).unwrap(), 3).unwrap();
    let r = cmd_verify_swap(&spec).unwrap();
    assert_eq!(r.records.len(), 121);
    assert!(r.passed());
    assert!(r.max_deviation.unwrap() <= 1e-10);
}

#[test]
fn activation_point_inside_region() {
    // η = (2/3)(1 − 0.9) ≈ 0.0667, on the unsteerability boundary.
    let eta = boundary_eta(0.9);
    let spec =
        SweepSpec::new(EtaSpec::Grid(Range::new(eta, eta, 1).unwrap()), Range::new(0.9, 0.9, 1).unwrap(), 3).unwrap();
    let r = cmd_activation_sweep(&spec).unwrap();
    assert!(r.passed());
    let row = &r.records[0];
    let get = |c: &str| &row[r.column(c).unwrap()];
    assert!(get("source_negativity").as_f64().unwrap() > 0.0);
    assert_eq!(get("source_unsteerable").as_bool(), Some(true));
    assert_eq!(get("network_steering").as_bool(), Some(true));
    assert!((get("swap_visibility").as_f64().unwrap() - 0.81).abs() < 1e-15);
    assert!((get("success_prob").as_f64().unwrap() - eta * eta / 4.0).abs() < 1e-15);
    assert_eq!(r.details["activation_points"], 1);
}

#[test]
fn separable_visibilities_are_never_certified() {
    for n in [3, 4] {
        let spec =
            SweepSpec::new(EtaSpec::Grid(Range::unit(6).unwrap()), Range::new(0.0, 1.0 / 3.0, 12).unwrap(), n).unwrap();
        let r = cmd_activation_sweep(&spec).unwrap();
        assert!(r.passed());
        assert!(r.values("network_steering").iter().all(|c| c.as_bool() == Some(false)));
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let spec = SweepSpec::new(EtaSpec::Boundary, Range::unit(201).unwrap(), 4).unwrap();
    let one = with_threads(Some(1), || cmd_activation_sweep(&spec)).unwrap().unwrap().to_csv();
    let four = with_threads(Some(4), || cmd_activation_sweep(&spec)).unwrap().unwrap().to_csv();
    assert_eq!(one, four);
    let header = one.lines().next().unwrap();
    assert_eq!(
        header,
        "n,eta,omega,source_negativity,source_unsteerable,swap_visibility,success_prob,sigma0_negativity,network_steering"
    );
}

#[test]
fn json_mirrors_csv() {
    let spec = SweepSpec::new(EtaSpec::Boundary, Range::unit(5).unwrap(), 3).unwrap();
    let r = cmd_activation_sweep(&spec).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    let csv = r.to_csv();
    let csv_rows: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    for (rec, cell) in records.iter().zip(csv_rows) {
        assert_eq!(rec["omega"].as_f64().unwrap(), cell.parse::<f64>().unwrap());
    }
    assert_eq!(doc["experiment"], "activation");
    assert!(doc["wall_time_s"].as_f64().is_some());
}

#[test]
fn claims_demo_thresholds() {
    let strong = cmd_claims_demo(0.9, AxesPreset::Zx).unwrap();
    assert!(strong.passed());
    assert!(strong.max_deviation.unwrap() <= 1e-12);
    let full = cmd_claims_demo(1.0, AxesPreset::Zx).unwrap();
    assert!((full.details["transcript"]["witness_after"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(matches!(
        cmd_claims_demo(0.5, AxesPreset::Zx),
        Err(ExperimentError::Core(Error::PreconditionUnmet(_)))
    ));
    // Three axes lower the bound to 1/√3.
    assert!(cmd_claims_demo(0.6, AxesPreset::Zxy).unwrap().passed());
}

#[test]
fn bundled_fixtures_build() {
    for name in ["sep-loc-sep.json", "uns-sep-uns.json", "sep-uns-uns.json", "uns-uns-sep.json", "star-n6.json"] {
        let f = Fixture::load(&fixture(name)).unwrap();
        let r = cmd_nlhs(&f, NlhsOptions { realize: true, fuzz: 0, seed: 0 }).unwrap();
        assert!(r.passed(), "{name}: {}", r.summary());
        assert!(r.max_deviation.unwrap() <= 1e-10);
        assert!(r.details["model"]["hidden"].is_array());
    }
}

#[test]
fn malformed_fixture_is_a_parse_error() {
    assert!(matches!(Fixture::load(&fixture("malformed.json")), Err(ExperimentError::Parse(_))));
}

#[test]
fn provider_failure_names_the_slot() {
    let text = r#"{
        "pattern": "uns-sep-uns",
        "sources": [
            {"kind": "uns-left", "state": {"kind": "werner", "omega": 0.9},
             "provider": {"kind": "separable", "decomposition": {"kind": "werner", "omega": 0.2}}},
            {"kind": "sep", "decomposition": {"kind": "classical", "d": 2}},
            {"kind": "uns-right", "state": {"kind": "werner", "omega": 0.3}, "provider": {"kind": "brute-force"}}
        ],
        "measurements": [{"kind": "singlet-test"}, {"kind": "singlet-test"}]
    }"#;
    let err = cmd_nlhs(&Fixture::parse(text).unwrap(), NlhsOptions::default()).unwrap_err();
    assert!(matches!(err, ExperimentError::Core(Error::ModelNotFound { slot: 0, .. })), "{err}");
}

#[test]
fn cli_exit_status() {
    let ok = bin().args(["claims-demo", "--omega", "0.9"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("quantity,value\n"));
    let weak = bin().args(["claims-demo", "--omega", "0.5"]).output().unwrap();
    assert_eq!(weak.status.code(), Some(2));
    let bad = bin().arg("nlhs").arg(fixture("malformed.json")).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("parse error"));
    let good = bin().arg("nlhs").arg(fixture("sep-loc-sep.json")).args(["--format", "json"]).output().unwrap();
    assert!(good.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&good.stdout).unwrap();
    assert_eq!(doc["passed"], true);
}

#[test]
fn cli_writes_identical_csv_for_any_thread_count() {
    let dir = std::env::temp_dir().join(format!("netsteer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.join(format!("swap-{threads}.csv"));
        let st = bin()
            .args(["verify-swap", "--omega-steps", "7", "--eta-steps", "7", "--out"])
            .arg(&path)
            .env("NETSTEER_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    std::fs::remove_dir_all(&dir).unwrap();
}
