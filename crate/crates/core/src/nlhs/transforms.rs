//! Reformulations with separable resources: an input-less untrusted
//! endpoint can be replaced by a classical flag, and any NLHS model on a
//! line is realised by separable sources and separable measurements.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{NlhsModel, ResponseTable};
use super::separable::SeparableDecomposition;
use crate::network::LinearNetwork;
use crate::operator::{c, Dims, QOperator};
use crate::povm::{computational_basis, Povm, SeparableMeasurement};
use crate::{tol, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilizedEndpoint {
    /// `Σ_a |a⟩⟨a| ⊗ Tr_A(M_a ρ)`.
    pub state: QOperator,
    /// Computational basis measurement on the flag, with the original labels.
    pub measurement: Povm,
    pub decomposition: SeparableDecomposition,
}

/// Replaces an untrusted endpoint measuring `m_a` on the left factor of
/// `rho_ab` by a classical flag holding its outcome. The statistics of any
/// continuation on the right factor are unchanged.
pub fn separabilize_endpoint(rho_ab: &QOperator, m_a: &Povm) -> Result<SeparabilizedEndpoint> {
    let rd = rho_ab.dims().as_slice();
    if rd.len() != 2 || m_a.dims().as_slice() != [rd[0]] {
        return Err(Error::DimensionMismatch(format!(
            "measurement dims {} for the left factor of {}",
            m_a.dims(),
            rho_ab.dims()
        )));
    }
    let k = m_a.len();
    let (flag, right) = (Dims::new(vec![k])?, Dims::new(vec![rd[1]])?);
    let mut state = QOperator::zeros(&flag.concat(&right));
    let (mut w, mut l, mut r) = (Vec::new(), Vec::new(), Vec::new());
    for (i, effect) in m_a.effects().iter().enumerate() {
        let steered = effect.tensor(&QOperator::identity(&right)).mul(rho_ab)?.partial_trace(&[1])?;
        let steered = QOperator::new((steered.matrix() + steered.matrix().adjoint()) * c(0.5), right.clone())?;
        let proj = QOperator::basis_projector(i, &flag)?;
        state.add_scaled(&proj.tensor(&steered), 1.0)?;
        let p = steered.trace_re();
        if p > 1e-15 {
            w.push(p);
            l.push(proj);
            r.push(steered.scale(1.0 / p));
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let basis = computational_basis(k)?;
    let measurement = Povm::with_labels(basis.effects().to_vec(), m_a.labels().to_vec())?;
    Ok(SeparabilizedEndpoint { state, measurement, decomposition: SeparableDecomposition::new(w, l, r)? })
}

/// A line network built from an NLHS model with certificates of its
/// separability.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableRealization {
    pub network: LinearNetwork,
    pub source_decompositions: Vec<SeparableDecomposition>,
    pub measurement_certificates: Vec<SeparableMeasurement>,
    /// Commuting measurements `N_{b|λ_2} = Σ_{λ_1} p(b|λ_1,λ_2)|λ_1⟩⟨λ_1|`
    /// on the flag of the first source, one per hidden value of the second.
    pub left_commuting: Vec<Povm>,
    /// Mirror of `left_commuting` for the flag of the last source.
    pub right_commuting: Vec<Povm>,
}

fn flags(k: usize) -> Result<Vec<QOperator>> {
    let dims = Dims::new(vec![k])?;
    (0..k).map(|i| QOperator::basis_projector(i, &dims)).collect()
}

/// Realises `model` with classical flags: the first source is
/// `Σ p(λ) σ_λ ⊗ |λ⟩⟨λ|`, interior sources `Σ p(λ)|λλ⟩⟨λλ|`, the last
/// `Σ p(λ)|λ⟩⟨λ| ⊗ σ_λ`, and each untrusted party reads both flags and
/// outputs `b` with probability `p(b | λ, λ′)`.
pub fn nlhs_to_separable_realization(model: &NlhsModel) -> Result<SeparableRealization> {
    let hidden = model.hidden();
    let k = hidden.len();
    let fl: Vec<Vec<QOperator>> = hidden.iter().map(|p| flags(p.len())).collect::<Result<_>>()?;
    let mut decomps = Vec::with_capacity(k);
    for (i, p) in hidden.iter().enumerate() {
        let (lefts, rights) = if i == 0 {
            (model.left_states().to_vec(), fl[0].clone())
        } else if i + 1 == k {
            (fl[i].clone(), model.right_states().to_vec())
        } else {
            (fl[i].clone(), fl[i].clone())
        };
        decomps.push(SeparableDecomposition::new(p.clone(), lefts, rights)?);
    }
    let mut certs = Vec::with_capacity(k - 1);
    for (j, r) in model.responses().iter().enumerate() {
        let terms = (0..r.labels().len())
            .map(|b| {
                let mut t = Vec::new();
                for (l, fl_l) in fl[j].iter().enumerate() {
                    for (rr, fl_r) in fl[j + 1].iter().enumerate() {
                        t.push((fl_l.scale(r.probs()[l][rr][b]), fl_r.clone()));
                    }
                }
                t
            })
            .collect();
        certs.push(SeparableMeasurement::new(r.labels().to_vec(), terms)?);
    }
    let sources = decomps.iter().map(SeparableDecomposition::to_operator).collect();
    let measurements = certs.iter().map(SeparableMeasurement::to_povm).collect::<Result<Vec<_>>>()?;
    let network = LinearNetwork::new(sources, measurements)?;

    let commuting = |r: &ResponseTable, by_right: bool| -> Result<Vec<Povm>> {
        let (outer, inner) = if by_right { (r.right_values(), r.left_values()) } else { (r.left_values(), r.right_values()) };
        let dims = Dims::new(vec![inner])?;
        (0..outer)
            .map(|o| {
                let effects = (0..r.labels().len())
                    .map(|b| {
                        let diag: Vec<f64> = (0..inner)
                            .map(|i| if by_right { r.probs()[i][o][b] } else { r.probs()[o][i][b] })
                            .collect();
                        QOperator::diagonal(&diag, &dims)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Povm::with_labels(effects, r.labels().to_vec())
            })
            .collect()
    };
    let responses = model.responses();
    Ok(SeparableRealization {
        network,
        source_decompositions: decomps,
        measurement_certificates: certs,
        left_commuting: commuting(&responses[0], true)?,
        right_commuting: commuting(&responses[responses.len() - 1], false)?,
    })
}

/// Reads an NLHS model back off a network in the classical-flag form
/// produced by [`nlhs_to_separable_realization`].
pub fn extract_model(net: &LinearNetwork) -> Result<NlhsModel> {
    let sources = net.sources();
    let k = sources.len();
    let mut hidden = Vec::with_capacity(k);
    let mut left_states = Vec::new();
    let mut right_states = Vec::new();
    for (i, s) in sources.iter().enumerate() {
        let sd = s.dims().as_slice();
        // Flag factor of endpoint sources; interior sources carry the flag twice.
        let flag_factor = if i == 0 { 1 } else { 0 };
        let n = sd[flag_factor];
        let flag_dims = Dims::new(vec![n])?;
        let mut p = Vec::with_capacity(n);
        let mut rebuilt = QOperator::zeros(s.dims());
        for l in 0..n {
            let proj = QOperator::basis_projector(l, &flag_dims)?;
            let other = Dims::new(vec![sd[1 - flag_factor]])?;
            let pad = if flag_factor == 1 {
                QOperator::identity(&other).tensor(&proj)
            } else {
                proj.tensor(&QOperator::identity(&other))
            };
            let cond = pad.mul(s)?.mul(&pad)?.partial_trace(&[1 - flag_factor])?;
            let pl = cond.trace_re();
            p.push(pl.max(0.0));
            let state = if pl > 1e-15 { cond.scale(1.0 / pl) } else { QOperator::identity(&other).scale(1.0 / other.total() as f64) };
            let term = if flag_factor == 1 { state.tensor(&proj) } else { proj.tensor(&state) };
            rebuilt.add_scaled(&term, pl)?;
            if i == 0 {
                left_states.push(state);
            } else if i + 1 == k {
                right_states.push(state);
            } else if state.max_abs_diff(&proj)? > tol::EQ && pl > 1e-15 {
                return Err(Error::InvalidModel(format!("source {i} is not perfectly correlated classically")));
            }
        }
        if rebuilt.max_abs_diff(s)? > tol::EQ {
            return Err(Error::InvalidModel(format!("source {i} is not in classical-flag form")));
        }
        hidden.push(p);
    }
    let mut responses = Vec::with_capacity(k - 1);
    for (j, m) in net.measurements().iter().enumerate() {
        let md = m.dims().as_slice();
        let (nl, nr) = (md[0], md[1]);
        let mut probs = vec![vec![vec![0.0; m.len()]; nr]; nl];
        for (b, e) in m.effects().iter().enumerate() {
            let mat = e.matrix();
            let off = DMatrix::from_fn(mat.nrows(), mat.ncols(), |r, s| if r == s { c(0.0) } else { mat[(r, s)] });
            if off.iter().any(|z| z.norm() > tol::EQ) {
                return Err(Error::InvalidModel(format!("measurement {j} is not diagonal in the flag basis")));
            }
            for l in 0..nl {
                for r in 0..nr {
                    probs[l][r][b] = mat[(l * nr + r, l * nr + r)].re;
                }
            }
        }
        responses.push(ResponseTable::new(m.labels().to_vec(), probs)?);
    }
    NlhsModel::new(hidden, responses, left_states, right_states)
}
