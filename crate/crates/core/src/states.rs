//! State families: singlet, Werner, classically correlated and
//! doubly-erased Werner (DEW) states.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, erasure_channel};
use crate::operator::{c, Dims, QOperator};
use crate::{Error, Result};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn qubit_pair() -> Dims {
    Dims::new(vec![2, 2]).expect("static dims")
}

/// `|ψ⁻⟩⟨ψ⁻|` with `|ψ⁻⟩ = (|01⟩ − |10⟩)/√2`.
pub fn psi_minus() -> QOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = DVector::from_vec(vec![c(0.0), c(s), c(-s), c(0.0)]);
    QOperator::projector(&ket, &qubit_pair()).expect("static dims")
}

/// Maximally mixed state on `dims`.
pub fn maximally_mixed(dims: &Dims) -> QOperator {
    QOperator::identity(dims).scale(1.0 / dims.total() as f64)
}

/// `ω|ψ⁻⟩⟨ψ⁻| + (1 − ω) 𝟙/4`.
pub fn werner(omega: f64) -> Result<QOperator> {
    check_unit("omega", omega)?;
    let mut w = maximally_mixed(&qubit_pair()).scale(1.0 - omega);
    w.add_scaled(&psi_minus(), omega)?;
    Ok(w)
}

/// `Σ_x (1/d) |x⟩⟨x| ⊗ |x⟩⟨x|`.
pub fn classical_correlated(d: usize) -> Result<QOperator> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("classical correlated state needs d >= 2, got {d}")));
    }
    let dims = Dims::new(vec![d, d])?;
    let mut diag = vec![0.0; d * d];
    for x in 0..d {
        diag[x * d + x] = 1.0 / d as f64;
    }
    QOperator::diagonal(&diag, &dims)
}

/// Parameters of a doubly-erased Werner state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DewParams {
    eta: f64,
    omega: f64,
}

impl DewParams {
    pub fn new(eta: f64, omega: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        check_unit("omega", omega)?;
        Ok(DewParams { eta, omega })
    }

    /// Erasure survival probability.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Werner visibility.
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// `(Λ_η ⊗ Λ_η)(ρ_W(ω))` on dims `[3, 3]`, flag state `|2⟩`.
pub fn dew(p: DewParams) -> Result<QOperator> {
    let erase = erasure_channel(p.eta, 2)?;
    let once = apply_channel(&erase, &werner(p.omega)?, 0)?;
    apply_channel(&erase, &once, 1)
}
