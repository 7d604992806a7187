//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use netsteer_core::certify::{bloch_data, dew_unsteerable_both_ways, erased_unsteerable};
use netsteer_core::network::line_assemblage;
use netsteer_core::nlhs::{nlhs_to_separable_realization, reconstruct, separabilize_endpoint};
use netsteer_core::operator::negativity;
use netsteer_core::povm::Povm;
use netsteer_core::random::{random_density, random_network, random_nlhs_model, random_povm, seeded};
use netsteer_core::states::{werner, DewParams};
use netsteer_core::{tol, Dims, QOperator};
use netsteer_experiments::{
    boundary_eta, cmd_activation_sweep, cmd_claims_demo, cmd_nlhs, cmd_verify_swap, fuzz_soundness, AxesPreset,
    EtaSpec, Fixture, NlhsOptions, Range, SweepSpec,
};
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn swap_identity() -> Outcome {
    let start = Instant::now();
    let spec = SweepSpec::new(EtaSpec::Grid(Range::unit(21).unwrap()), Range::unit(21).unwrap(), 3).unwrap();
    let r = match cmd_verify_swap(&spec) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let dt = start.elapsed();
    let dev = r.max_deviation.unwrap_or(f64::INFINITY);
    outcome(
        r.records.len() == 441 && dev <= 1e-10 && within(dt, 5.0),
        format!("441 points, max deviation {dev:.3e} (tol 1e-10), {:.3} s (limit 5 s)", dt.as_secs_f64()),
    )
}

fn unsteerability_boundary() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(0);
    let (mut mismatches, mut ambiguous) = (0, 0);
    for _ in 0..1000 {
        let eta: f64 = rng.random();
        let omega: f64 = rng.random();
        let closed = eta <= boundary_eta(omega);
        // Points within the optimisation slack of the boundary may go either way.
        let margin = (1.5 * eta + omega - 1.0).abs();
        let b = bloch_data(&werner(omega).unwrap()).unwrap();
        let (werner_says, _) = erased_unsteerable(&b, eta);
        let dew_says = dew_unsteerable_both_ways(DewParams::new(eta, omega).unwrap()).unwrap();
        if margin <= tol::OPT {
            ambiguous += 1;
        } else if werner_says != closed || dew_says != closed {
            mismatches += 1;
        }
    }
    let dt = start.elapsed();
    outcome(
        mismatches == 0 && within(dt, 2.0),
        format!(
            "1000 random pairs, {mismatches} mismatches, {ambiguous} within tol 1e-6 of the boundary, {:.3} s (limit 2 s)",
            dt.as_secs_f64()
        ),
    )
}

fn activation_region() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in [3usize, 4, 5] {
        let start = Instant::now();
        let spec = SweepSpec::new(EtaSpec::Boundary, Range::unit(1001).unwrap(), n).unwrap();
        let r = match cmd_activation_sweep(&spec) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("n = {n}: {e}")),
        };
        let dt = start.elapsed();
        let step = spec.omega.step();
        let threshold = (1.0f64 / 3.0).powf(1.0 / (n as f64 - 1.0));
        let flip = r.details["flip_omega"].as_f64();
        let flip_ok = flip.is_some_and(|f| (f - threshold).abs() <= step + 1e-12);
        // Every certified point must also have entangled, unsteerable sources.
        let idx = |c: &str| r.column(c).unwrap();
        let (neg, uns, cert) = (idx("source_negativity"), idx("source_unsteerable"), idx("network_steering"));
        let region_ok = r.records.iter().all(|row| {
            row[cert].as_bool() != Some(true)
                || (row[neg].as_f64().unwrap() > tol::NEGATIVITY_CUTOFF && row[uns].as_bool() == Some(true))
        });
        // Certified exactly above the flip wherever the all-zero outcome is
        // heavy enough to be judged; near ω = 1 the boundary η vanishes.
        let (omega_i, prob_i) = (idx("omega"), idx("success_prob"));
        let judged = r.records.iter().filter(|row| row[prob_i].as_f64().unwrap() > tol::EQ);
        let monotone = judged.clone().all(|row| {
            let o = row[omega_i].as_f64().unwrap();
            row[cert].as_bool() == Some(flip.is_some_and(|f| o >= f))
        });
        let top = judged.filter(|row| row[cert].as_bool() == Some(true)).filter_map(|row| row[omega_i].as_f64()).fold(0.0, f64::max);
        let ok = flip_ok && region_ok && monotone && r.passed() && (n != 5 || within(dt, 60.0));
        passed &= ok;
        parts.push(format!(
            "n={n}: flip {} vs {threshold:.6} (step {step}), certified up to {top:.3}, region ok {}, {:.2} s",
            flip.map_or("none".to_string(), |f| format!("{f:.3}")),
            region_ok && monotone,
            dt.as_secs_f64()
        ));
    }
    outcome(passed, parts.join("; "))
}

fn claims_pipeline() -> Outcome {
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for omega in [0.72, 0.8, 0.9, 1.0] {
        match cmd_claims_demo(omega, AxesPreset::Zx) {
            Ok(r) => {
                worst = worst.max(r.max_deviation.unwrap_or(f64::INFINITY));
                passed &= r.passed();
            }
            Err(_) => passed = false,
        }
    }
    let rejected = [0.5, 0.7].iter().all(|&w| cmd_claims_demo(w, AxesPreset::Zx).is_err());
    outcome(
        passed && rejected && worst <= 1e-12,
        format!("certified at 0.72, 0.8, 0.9, 1.0; rejected 0.5, 0.7: {rejected}; max deviation {worst:.3e} (tol 1e-12)"),
    )
}

fn nlhs_constructors() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for name in ["sep-loc-sep", "uns-sep-uns", "sep-uns-uns", "uns-uns-sep", "star-n6"] {
        let result = Fixture::load(&dir.join(format!("{name}.json")))
            .and_then(|f| cmd_nlhs(&f, NlhsOptions { realize: false, fuzz: 0, seed: 0 }));
        match result {
            Ok(r) => {
                worst = worst.max(r.max_deviation.unwrap_or(f64::INFINITY));
                passed &= r.passed();
            }
            Err(e) => {
                eprintln!("  {name}: {e}");
                passed = false;
            }
        }
    }
    let bad = fuzz_soundness(100, 0).unwrap_or(usize::MAX);
    outcome(
        passed && worst <= 1e-10 && bad == 0,
        format!("4 patterns + star, max deviation {worst:.3e} (tol 1e-10); 100 fuzzed models, {bad} certified"),
    )
}

/// `Tr_{AB}[(M_a ⊗ N_c ⊗ 𝟙)(ρ_AB ⊗ ρ_BC)]` from the full tensor product.
fn continuation(rho_ab: &QOperator, m_a: &Povm, joint: &Povm, rho_bc: &QOperator) -> Vec<QOperator> {
    let state = rho_ab.tensor(rho_bc);
    let dc = Dims::new(vec![rho_bc.dims().as_slice()[1]]).unwrap();
    let mut out = Vec::new();
    for a in m_a.effects() {
        for n in joint.effects() {
            let op = a.tensor(n).tensor(&QOperator::identity(&dc));
            let op = QOperator::new(op.matrix().clone(), state.dims().clone()).unwrap();
            out.push(op.mul(&state).unwrap().partial_trace(&[3]).unwrap());
        }
    }
    out
}

fn separable_round_trips() -> Outcome {
    let mut rng = seeded(0);
    let mut cont_dev: f64 = 0.0;
    let mut flag_neg: f64 = 0.0;
    for i in 0..100 {
        let (da, db) = (2 + i % 2, 2 + (i / 2) % 2);
        let rho_ab = random_density(&Dims::new(vec![da, db]).unwrap(), &mut rng);
        let m_a = random_povm(&Dims::new(vec![da]).unwrap(), 2 + i % 3, &mut rng);
        let rho_bc = random_density(&Dims::new(vec![db, 2]).unwrap(), &mut rng);
        let joint = random_povm(&Dims::new(vec![db, db]).unwrap(), 3, &mut rng);
        let out = separabilize_endpoint(&rho_ab, &m_a).unwrap();
        flag_neg = flag_neg.max(negativity(&out.state, &[1]).unwrap());
        let a = continuation(&rho_ab, &m_a, &joint, &rho_bc);
        let b = continuation(&out.state, &out.measurement, &joint, &rho_bc);
        for (x, y) in a.iter().zip(&b) {
            cont_dev = cont_dev.max(x.max_abs_diff(y).unwrap());
        }
    }
    let mut model_dev: f64 = 0.0;
    let mut source_neg: f64 = 0.0;
    for i in 0..100 {
        let model = random_nlhs_model(3 + i % 3, 3, &mut rng);
        let real = nlhs_to_separable_realization(&model).unwrap();
        let quantum = line_assemblage(&real.network).unwrap();
        model_dev = model_dev.max(quantum.max_abs_diff(&reconstruct(&model).unwrap()).unwrap());
        for s in real.network.sources() {
            source_neg = source_neg.max(negativity(s, &[1]).unwrap());
        }
    }
    outcome(
        cont_dev <= 1e-12 && model_dev <= 1e-10 && source_neg == 0.0 && flag_neg == 0.0,
        format!(
            "continuations {cont_dev:.3e} (tol 1e-12); realizations {model_dev:.3e} (tol 1e-10); max source negativity {source_neg:e}"
        ),
    )
}

fn product_marginals() -> Outcome {
    let mut rng = seeded(0);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = 3 + i % 3;
        let asm = line_assemblage(&random_network(n, 3, &mut rng)).unwrap();
        worst = worst.max(asm.product_marginal_defect().unwrap());
    }
    outcome(worst <= 1e-10, format!("200 random networks, max defect {worst:.3e} (tol 1e-10)"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 swap identity", swap_identity),
        ("2 unsteerability boundary", unsteerability_boundary),
        ("3 activation region", activation_region),
        ("4 claims pipeline", claims_pipeline),
        ("5 NLHS constructors", nlhs_constructors),
        ("6 separable round trips", separable_round_trips),
        ("7 product marginals", product_marginals),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
