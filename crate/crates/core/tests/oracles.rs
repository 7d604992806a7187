//! Cross-checks of the fast routines against slow, independent computations.

use netsteer_core::assemblage::standard_assemblage;
use netsteer_core::certify::{fibonacci_sphere, lhs_bound, linear_steering_witness};
use netsteer_core::network::{
    bilocal_assemblage, line_assemblage, line_assemblage_ordered, ContractionOrder, LinearNetwork, TrustedRing,
};
use netsteer_core::operator::{negativity, tensor_all};
use netsteer_core::povm::{pauli_projective, Povm};
use netsteer_core::random::{random_network, seeded};
use netsteer_core::states::{psi_minus, werner};
use netsteer_core::{Dims, QOperator, Side};
use num_complex::Complex64;

/// Materialises the full product of all sources and applies every central
/// effect on its adjacent factors before tracing them out.
fn naive_element(net: &LinearNetwork, effects: &[&QOperator]) -> QOperator {
    let state = tensor_all(&net.sources().iter().collect::<Vec<_>>()).unwrap();
    let dims = state.dims().as_slice().to_vec();
    let first = Dims::new(vec![dims[0]]).unwrap();
    let last = Dims::new(vec![dims[dims.len() - 1]]).unwrap();
    let mut ops: Vec<QOperator> = vec![QOperator::identity(&first)];
    ops.extend(effects.iter().map(|e| (*e).clone()));
    ops.push(QOperator::identity(&last));
    let full = tensor_all(&ops.iter().collect::<Vec<_>>()).unwrap();
    let full = QOperator::new(full.matrix().clone(), state.dims().clone()).unwrap();
    full.mul(&state).unwrap().partial_trace(&[0, dims.len() - 1]).unwrap()
}

#[test]
fn contraction_matches_full_tensor_product() {
    let mut rng = seeded(100);
    for n in 3..=5 {
        for _ in 0..4 {
            let net = random_network(n, if n == 5 { 2 } else { 3 }, &mut rng);
            let asm = line_assemblage(&net).unwrap();
            for (tuple, e) in asm.elements() {
                let effects: Vec<&QOperator> = tuple
                    .iter()
                    .zip(net.measurements())
                    .map(|(b, m)| &m.effects()[m.labels().iter().position(|l| l == b).unwrap()])
                    .collect();
                let want = naive_element(&net, &effects);
                assert!(e.max_abs_diff(&want).unwrap() < 1e-12, "n = {n}, tuple {tuple:?}");
            }
            let rl = line_assemblage_ordered(&net, ContractionOrder::RightToLeft).unwrap();
            assert!(rl.max_abs_diff(&asm).unwrap() <= 1e-10);
        }
    }
}

fn bell_basis() -> Povm {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
    let dims = Dims::new(vec![2, 2]).unwrap();
    let effects = kets
        .iter()
        .map(|k| {
            let v = nalgebra::DVector::from_iterator(4, k.iter().map(|&a| Complex64::new(a, 0.0)));
            QOperator::projector(&v, &dims).unwrap()
        })
        .collect();
    Povm::new(effects).unwrap()
}

#[test]
fn singlet_swapping_with_full_bell_basis() {
    let asm = bilocal_assemblage(&psi_minus(), &psi_minus(), &bell_basis()).unwrap();
    assert_eq!(asm.elements().len(), 4);
    for e in asm.elements().values() {
        assert!((e.trace_re() - 0.25).abs() < 1e-14);
        assert!((negativity(e, &[1]).unwrap() - 0.125).abs() < 1e-14);
    }
}

#[test]
fn werner_witness_value_from_steered_bloch_vectors() {
    // σ_{a|z} has Bloch vector −(−1)^a ω ẑ with weight 1/2, so each term of
    // the functional contributes −ω.
    let axes = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
    let ms: Vec<Povm> = axes.iter().map(|a| pauli_projective(*a).unwrap()).collect();
    for omega in [0.1, 0.5, 0.8] {
        let asm = standard_assemblage(&werner(omega).unwrap(), &ms, Side::Left).unwrap();
        let r = linear_steering_witness(&asm, &axes).unwrap();
        assert!((r.value - omega).abs() < 1e-14);
    }
}

/// LHS maximum of the witness functional by brute force: hidden states on a
/// fine sphere grid and every deterministic response function.
fn brute_force_lhs_bound(axes: &[[f64; 3]], points: usize) -> f64 {
    let m = axes.len();
    let mut best: f64 = 0.0;
    for r in fibonacci_sphere(points) {
        let proj: Vec<f64> = axes.iter().map(|v| v[0] * r[0] + v[1] * r[1] + v[2] * r[2]).collect();
        for bits in 0u32..1 << m {
            let total: f64 = proj.iter().enumerate().map(|(k, p)| if bits >> k & 1 == 1 { -p } else { *p }).sum();
            best = best.max(total.abs() / m as f64);
        }
    }
    best
}

#[test]
fn lhs_bound_matches_brute_force() {
    let s = 0.5f64.sqrt();
    let sets: Vec<Vec<[f64; 3]>> = vec![
        vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
        vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[0.0, 0.0, 1.0], [s, 0.0, s]],
        vec![[0.6, 0.0, 0.8], [0.0, 0.6, -0.8], [1.0, 0.0, 0.0]],
    ];
    for axes in sets {
        let exact = lhs_bound(&axes);
        let brute = brute_force_lhs_bound(&axes, 10_000);
        assert!((exact - brute).abs() <= 1e-3, "{axes:?}: {exact} vs {brute}");
        assert!(brute <= exact + 1e-12);
    }
}

#[test]
fn ring_reshape_matches_line() {
    let mut rng = seeded(101);
    let line = random_network(4, 3, &mut rng);
    let ring = TrustedRing::new(line.sources().to_vec(), line.measurements().to_vec()).unwrap();
    let straight = line_assemblage(&line).unwrap();
    assert_eq!(ring.assemblage([Side::Left, Side::Right]).unwrap(), straight);
    let swapped = ring.assemblage([Side::Right, Side::Left]).unwrap();
    for (k, e) in swapped.elements() {
        // A trusted party holding (last, first) factors sees the swap of
        // the two-endpoint operator.
        let orig = straight.get(k).unwrap();
        let (da, dz) = (orig.dims().as_slice()[0], orig.dims().as_slice()[1]);
        for i in 0..da {
            for j in 0..dz {
                for i2 in 0..da {
                    for j2 in 0..dz {
                        let a = orig.matrix()[(i * dz + j, i2 * dz + j2)];
                        let b = e.matrix()[(j * da + i, j2 * da + i2)];
                        assert!((a - b).norm() < 1e-15);
                    }
                }
            }
        }
    }
}
