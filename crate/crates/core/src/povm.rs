//! POVMs: validation, the Bell-swap measurement, input-encoded and induced
//! measurements, and separable-measurement certificates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operator::{c, CMatrix, Dims, QOperator};
use crate::states::psi_minus;
use crate::{tol, Error, Result, Side};

/// An ordered list of effects with explicit outcome labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmDoc", into = "PovmDoc")]
pub struct Povm {
    effects: Vec<QOperator>,
    labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PovmDoc {
    labels: Vec<usize>,
    effects: Vec<QOperator>,
}

impl TryFrom<PovmDoc> for Povm {
    type Error = Error;
    fn try_from(d: PovmDoc) -> Result<Self> {
        Povm::with_labels(d.effects, d.labels)
    }
}

impl From<Povm> for PovmDoc {
    fn from(p: Povm) -> Self {
        PovmDoc { labels: p.labels, effects: p.effects }
    }
}

impl Povm {
    /// Effects labelled `0..k`.
    pub fn new(effects: Vec<QOperator>) -> Result<Self> {
        let labels = (0..effects.len()).collect();
        Povm::with_labels(effects, labels)
    }

    pub fn with_labels(effects: Vec<QOperator>, labels: Vec<usize>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        if labels.len() != effects.len() {
            return Err(Error::InvalidPovm(format!("{} labels for {} effects", labels.len(), effects.len())));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::InvalidPovm(format!("duplicate outcome labels {labels:?}")));
        }
        let dims = first.dims().clone();
        let mut sum = QOperator::zeros(&dims);
        for (i, e) in effects.iter().enumerate() {
            if e.dims() != &dims {
                return Err(Error::InvalidPovm(format!("effect {i} has dims {} not {dims}", e.dims())));
            }
            let min = e
                .min_eigenvalue()
                .map_err(|err| Error::InvalidPovm(format!("effect {i}: {err}")))?;
            if min < -tol::PSD {
                return Err(Error::InvalidPovm(format!("effect {i} has eigenvalue {min:e}")));
            }
            sum.add_scaled(e, 1.0)?;
        }
        let defect = sum.max_abs_diff(&QOperator::identity(&dims))?;
        if defect > tol::EQ {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect:e}")));
        }
        Ok(Povm { effects, labels })
    }

    pub fn effects(&self) -> &[QOperator] {
        &self.effects
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dims(&self) -> &Dims {
        self.effects[0].dims()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &QOperator)> {
        self.labels.iter().copied().zip(self.effects.iter())
    }

    /// Outcome probabilities `Tr(M_b ρ)` in effect order.
    pub fn probabilities(&self, state: &QOperator) -> Result<Vec<f64>> {
        self.effects.iter().map(|e| e.overlap(state)).collect()
    }

    /// The single-outcome measurement `{𝟙}`.
    pub fn trivial(dims: &Dims) -> Povm {
        Povm { effects: vec![QOperator::identity(dims)], labels: vec![0] }
    }
}

/// Projective measurement in the computational basis of a `d`-level system.
pub fn computational_basis(d: usize) -> Result<Povm> {
    let dims = Dims::new(vec![d])?;
    let effects = (0..d).map(|x| QOperator::basis_projector(x, &dims)).collect::<Result<_>>()?;
    Povm::new(effects)
}

/// `{|ψ⁻⟩⟨ψ⁻|, 𝟙 − |ψ⁻⟩⟨ψ⁻|}` on two qutrits, with the singlet supported on
/// the `{|0⟩, |1⟩}` subspace of each factor.
pub fn bell_swap_povm() -> Povm {
    let dims = Dims::new(vec![3, 3]).expect("static dims");
    let m0 = psi_minus().embed(&dims).expect("embedding into larger dims");
    let m1 = QOperator::identity(&dims).sub(&m0).expect("same dims");
    Povm::new(vec![m0, m1]).expect("valid by construction")
}

/// `M_b = Σ_x |x⟩⟨x| ⊗ M_{b|x}` on dims `[d, d_target]`.
pub fn input_encoded_measurement(sub_povms: &[Povm], d: usize) -> Result<Povm> {
    if d == 0 || sub_povms.len() != d {
        return Err(Error::InvalidPovm(format!("{} sub-measurements for d = {d}", sub_povms.len())));
    }
    let first = &sub_povms[0];
    if sub_povms.iter().any(|p| p.labels != first.labels || p.dims() != first.dims()) {
        return Err(Error::InvalidPovm("sub-measurements differ in outcomes or dimensions".into()));
    }
    let flag = Dims::new(vec![d])?;
    let out_dims = flag.concat(first.dims());
    let effects = (0..first.len())
        .map(|b| {
            let mut e = QOperator::zeros(&out_dims);
            for (x, p) in sub_povms.iter().enumerate() {
                let proj = QOperator::basis_projector(x, &flag)?;
                e.add_scaled(&proj.tensor(&p.effects[b]), 1.0)?;
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::with_labels(effects, first.labels.clone())
}

/// Pauli matrices `[σx, σy, σz]`.
pub fn pauli_matrices() -> [CMatrix; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

/// `v · σ⃗`.
pub fn bloch_operator(v: [f64; 3]) -> CMatrix {
    let p = pauli_matrices();
    &p[0] * c(v[0]) + &p[1] * c(v[1]) + &p[2] * c(v[2])
}

/// `{(𝟙 + n·σ⃗)/2, (𝟙 − n·σ⃗)/2}` for a unit axis `n`.
pub fn pauli_projective(axis: [f64; 3]) -> Result<Povm> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("axis {axis:?} has norm {norm}")));
    }
    let dims = Dims::new(vec![2])?;
    let id = CMatrix::identity(2, 2);
    let n = bloch_operator(axis);
    let plus = QOperator::new((&id + &n) * c(0.5), dims.clone())?;
    let minus = QOperator::new((&id - &n) * c(0.5), dims)?;
    Povm::new(vec![plus, minus])
}

/// Measurement induced on one factor of a bipartite POVM when the other
/// factor is fed `hidden_state`: `M_{b|γ} = Tr_side(M_b [σ_γ ⊗ 𝟙])` for
/// `side = Left` (and mirrored for `Right`). The result acts on the
/// opposite factor.
pub fn induced_measurement(m: &Povm, hidden_state: &QOperator, side: Side) -> Result<Povm> {
    let md = m.dims().as_slice();
    if md.len() != 2 {
        return Err(Error::DimensionMismatch(format!("induced measurement needs a bipartite POVM, got {}", m.dims())));
    }
    if hidden_state.dims().as_slice() != [md[side.index()]] {
        return Err(Error::DimensionMismatch(format!(
            "hidden state dims {} for factor of dimension {}",
            hidden_state.dims(),
            md[side.index()]
        )));
    }
    hidden_state.require_density()?;
    let other = Dims::new(vec![md[side.opposite().index()]])?;
    let padded = match side {
        Side::Left => hidden_state.tensor(&QOperator::identity(&other)),
        Side::Right => QOperator::identity(&other).tensor(hidden_state),
    };
    let effects = m
        .effects
        .iter()
        .map(|e| {
            let reduced = e.mul(&padded)?.partial_trace(&[side.opposite().index()])?;
            let h = (reduced.matrix() + reduced.matrix().adjoint()) * c(0.5);
            QOperator::new(h, other.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::with_labels(effects, m.labels.clone())
}

/// A bipartite measurement given together with an explicit decomposition of
/// every effect into sums of tensor products of positive operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableMeasurement {
    labels: Vec<usize>,
    terms: Vec<Vec<(QOperator, QOperator)>>,
}

impl SeparableMeasurement {
    pub fn new(labels: Vec<usize>, terms: Vec<Vec<(QOperator, QOperator)>>) -> Result<Self> {
        for (b, effect_terms) in terms.iter().enumerate() {
            for (i, (l, r)) in effect_terms.iter().enumerate() {
                if l.dims().len() != 1 || r.dims().len() != 1 || !l.is_psd() || !r.is_psd() {
                    return Err(Error::InvalidPovm(format!("term {i} of effect {b} is not a PSD product")));
                }
            }
        }
        let sm = SeparableMeasurement { labels, terms };
        sm.to_povm()?;
        Ok(sm)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn terms(&self) -> &[Vec<(QOperator, QOperator)>] {
        &self.terms
    }

    /// Reassembles the effects and validates them as a POVM.
    pub fn to_povm(&self) -> Result<Povm> {
        let effects = self
            .terms
            .iter()
            .map(|effect_terms| {
                let (l0, r0) = effect_terms
                    .first()
                    .ok_or_else(|| Error::InvalidPovm("effect without terms".into()))?;
                let mut e = QOperator::zeros(&l0.dims().concat(r0.dims()));
                for (l, r) in effect_terms {
                    e.add_scaled(&l.tensor(r), 1.0)?;
                }
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::with_labels(effects, self.labels.clone())
    }
}
