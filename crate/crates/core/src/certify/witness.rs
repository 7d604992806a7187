//! A linear steering inequality for dichotomic qubit measurements.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::assemblage::Assemblage;
use crate::operator::QOperator;
use crate::povm::bloch_operator;
use crate::{tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub value: f64,
    pub lhs_bound: f64,
    pub violated: bool,
}

/// Largest value of the functional over LHS assemblages:
/// `max_s ‖Σ_k s_k v_k‖ / m` over sign patterns `s`.
pub fn lhs_bound(axes: &[[f64; 3]]) -> f64 {
    let m = axes.len();
    if m == 0 {
        return 0.0;
    }
    assert!(m < 30, "too many axes for sign enumeration");
    (0u32..1 << m)
        .map(|bits| {
            axes.iter()
                .enumerate()
                .map(|(k, v)| {
                    let s = if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
                    Vector3::from(*v) * s
                })
                .sum::<Vector3<f64>>()
                .norm()
        })
        .fold(0.0, f64::max)
        / m as f64
}

/// `(1/m)|Σ_k tr((σ_{0|k} − σ_{1|k}) v_k·σ⃗)|`, where input `k` of the
/// assemblage was measured along `axes[k]`.
pub fn linear_steering_witness(asm: &Assemblage, axes: &[[f64; 3]]) -> Result<WitnessReport> {
    if asm.dims().as_slice() != [2] {
        return Err(Error::UnsupportedInput(format!("witness needs a qubit assemblage, got dims {}", asm.dims())));
    }
    let inputs = asm.inputs();
    if inputs != (0..axes.len()).collect::<Vec<_>>() {
        return Err(Error::UnsupportedInput(format!("inputs {inputs:?} do not match {} axes", axes.len())));
    }
    let mut total = 0.0;
    for (k, v) in axes.iter().enumerate() {
        let outcomes: Vec<&Vec<usize>> = asm.elements().keys().filter(|(_, x)| *x == k).map(|(a, _)| a).collect();
        if outcomes.len() != 2 || outcomes[0] != &vec![0] || outcomes[1] != &vec![1] {
            return Err(Error::UnsupportedInput(format!("input {k} is not dichotomic")));
        }
        let obs = QOperator::with_dims(bloch_operator(*v), &[2])?;
        let diff = asm.get(&[0], k).expect("checked").sub(asm.get(&[1], k).expect("checked"))?;
        total += diff.overlap(&obs)?;
    }
    let value = total.abs() / axes.len() as f64;
    let bound = lhs_bound(axes);
    Ok(WitnessReport { value, lhs_bound: bound, violated: value > bound + tol::OPT })
}
