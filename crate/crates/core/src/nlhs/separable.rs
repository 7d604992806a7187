use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, Channel};
use crate::operator::{Dims, QOperator};
use crate::povm::bloch_operator;
use crate::operator::c;
use crate::{tol, Error, Result};

/// `ρ = Σ_γ p(γ) σ_γ ⊗ τ_γ` with explicit terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeparableDoc")]
pub struct SeparableDecomposition {
    weights: Vec<f64>,
    lefts: Vec<QOperator>,
    rights: Vec<QOperator>,
}

#[derive(Deserialize)]
struct SeparableDoc {
    weights: Vec<f64>,
    lefts: Vec<QOperator>,
    rights: Vec<QOperator>,
}

impl TryFrom<SeparableDoc> for SeparableDecomposition {
    type Error = Error;
    fn try_from(d: SeparableDoc) -> Result<Self> {
        SeparableDecomposition::new(d.weights, d.lefts, d.rights)
    }
}

fn check_side(states: &[QOperator], what: &str) -> Result<()> {
    let dims = states[0].dims();
    for (i, s) in states.iter().enumerate() {
        if s.dims().len() != 1 || s.dims() != dims || !s.is_density() {
            return Err(Error::InvalidParameter(format!("{what} state {i} is not a density matrix on {dims}")));
        }
    }
    Ok(())
}

impl SeparableDecomposition {
    pub fn new(weights: Vec<f64>, lefts: Vec<QOperator>, rights: Vec<QOperator>) -> Result<Self> {
        if weights.is_empty() || weights.len() != lefts.len() || weights.len() != rights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights, {} left and {} right states",
                weights.len(),
                lefts.len(),
                rights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < -tol::EQ) {
            return Err(Error::InvalidParameter(format!("negative weights {weights:?}")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > tol::EQ {
            return Err(Error::InvalidParameter(format!("weights sum to {s}")));
        }
        check_side(&lefts, "left")?;
        check_side(&rights, "right")?;
        Ok(SeparableDecomposition { weights, lefts, rights })
    }

    /// A single product term.
    pub fn product(left: QOperator, right: QOperator) -> Result<Self> {
        SeparableDecomposition::new(vec![1.0], vec![left], vec![right])
    }

    /// `Σ_x (1/d)|x⟩⟨x| ⊗ |x⟩⟨x|`.
    pub fn classical(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("classical correlations need d >= 2, got {d}")));
        }
        let dims = Dims::new(vec![d])?;
        let proj = (0..d).map(|x| QOperator::basis_projector(x, &dims)).collect::<Result<Vec<_>>>()?;
        SeparableDecomposition::new(vec![1.0 / d as f64; d], proj.clone(), proj)
    }

    /// Werner state in its separable regime `ω ≤ 1/3`:
    /// `3ω · avg_{n = ±e_i} |n⟩⟨n| ⊗ |−n⟩⟨−n| + (1 − 3ω) 𝟙/4`. The octahedral
    /// average equals the Werner state at `ω = 1/3`.
    pub fn werner(omega: f64) -> Result<Self> {
        if !(0.0..=1.0 / 3.0 + tol::EQ).contains(&omega) {
            return Err(Error::PreconditionUnmet(format!("Werner state with ω = {omega} is entangled")));
        }
        let omega = omega.min(1.0 / 3.0);
        let dims = Dims::new(vec![2])?;
        let state = |v: [f64; 3]| {
            let m = (nalgebra::DMatrix::identity(2, 2) + bloch_operator(v)) * c(0.5);
            QOperator::new(m, dims.clone())
        };
        let (mut w, mut l, mut r) = (Vec::new(), Vec::new(), Vec::new());
        if omega > 0.0 {
            for axis in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut v = [0.0; 3];
                    v[axis] = sign;
                    w.push(omega / 2.0);
                    l.push(state(v)?);
                    r.push(state(v.map(|x| -x))?);
                }
            }
        }
        let rest = 1.0 - 3.0 * omega;
        if rest > 0.0 {
            w.push(rest);
            l.push(QOperator::identity(&dims).scale(0.5));
            r.push(QOperator::identity(&dims).scale(0.5));
        }
        SeparableDecomposition::new(w, l, r)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lefts(&self) -> &[QOperator] {
        &self.lefts
    }

    pub fn rights(&self) -> &[QOperator] {
        &self.rights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.lefts[0].dims().concat(self.rights[0].dims())
    }

    pub fn to_operator(&self) -> QOperator {
        let mut out = QOperator::zeros(&self.dims());
        for ((w, l), r) in self.weights.iter().zip(&self.lefts).zip(&self.rights) {
            out.add_scaled(&l.tensor(r), *w).expect("validated dims");
        }
        out
    }

    /// Largest entry deviation from `rho`.
    pub fn deviation(&self, rho: &QOperator) -> Result<f64> {
        self.to_operator().max_abs_diff(rho)
    }

    /// Every term embedded into larger local dimensions (top-left block).
    pub fn embed(&self, left: usize, right: usize) -> Result<Self> {
        let (ld, rd) = (Dims::new(vec![left])?, Dims::new(vec![right])?);
        let lefts = self.lefts.iter().map(|s| s.embed(&ld)).collect::<Result<_>>()?;
        let rights = self.rights.iter().map(|s| s.embed(&rd)).collect::<Result<_>>()?;
        SeparableDecomposition::new(self.weights.clone(), lefts, rights)
    }

    /// Local channels applied term by term.
    pub fn map_local(&self, left: &Channel, right: &Channel) -> Result<Self> {
        let lefts = self.lefts.iter().map(|s| apply_channel(left, s, 0)).collect::<Result<_>>()?;
        let rights = self.rights.iter().map(|s| apply_channel(right, s, 0)).collect::<Result<_>>()?;
        SeparableDecomposition::new(self.weights.clone(), lefts, rights)
    }
}
