use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::network::{NetworkAssemblage, OutcomeTuple};
use crate::operator::QOperator;
use crate::{tol, Error, Result};

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidModel(format!("{what} is empty")));
    }
    if p.iter().any(|&x| !x.is_finite() || x < -tol::EQ) {
        return Err(Error::InvalidModel(format!("{what} has a negative entry: {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol::EQ {
        return Err(Error::InvalidModel(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// Response function `p(b | λ_left, λ_right)` of an untrusted party,
/// stored as `probs[λ_left][λ_right][k]` for outcome `labels[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResponseTableDoc")]
pub struct ResponseTable {
    labels: Vec<usize>,
    probs: Vec<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct ResponseTableDoc {
    labels: Vec<usize>,
    probs: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<ResponseTableDoc> for ResponseTable {
    type Error = Error;
    fn try_from(d: ResponseTableDoc) -> Result<Self> {
        ResponseTable::new(d.labels, d.probs)
    }
}

impl ResponseTable {
    pub fn new(labels: Vec<usize>, probs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if labels.is_empty() || sorted.len() != labels.len() {
            return Err(Error::InvalidModel(format!("bad outcome labels {labels:?}")));
        }
        let cols = probs.first().map_or(0, Vec::len);
        if probs.is_empty() || cols == 0 || probs.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidModel("response table is not rectangular".into()));
        }
        for (l, row) in probs.iter().enumerate() {
            for (r, p) in row.iter().enumerate() {
                if p.len() != labels.len() {
                    return Err(Error::InvalidModel(format!("response ({l}, {r}) has {} outcomes", p.len())));
                }
                check_distribution(p, &format!("response ({l}, {r})"))?;
            }
        }
        Ok(ResponseTable { labels, probs })
    }

    /// Response that ignores the hidden variables except through `f`, which
    /// returns the outcome index for `(λ_left, λ_right)`.
    pub fn deterministic(labels: Vec<usize>, left: usize, right: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let k = labels.len();
        let probs = (0..left)
            .map(|l| {
                (0..right)
                    .map(|r| {
                        let mut p = vec![0.0; k];
                        p[f(l, r)] = 1.0;
                        p
                    })
                    .collect()
            })
            .collect();
        ResponseTable::new(labels, probs)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn probs(&self) -> &[Vec<Vec<f64>>] {
        &self.probs
    }

    pub fn left_values(&self) -> usize {
        self.probs.len()
    }

    pub fn right_values(&self) -> usize {
        self.probs[0].len()
    }

    /// Matrix `R[λ_left, λ_right] = p(labels[k] | λ_left, λ_right)`.
    pub fn matrix(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.left_values(), self.right_values(), |l, r| self.probs[l][r][k])
    }
}

/// Network local hidden state model on a line: one finite hidden variable
/// per source, a response function per untrusted party and hidden states
/// for the two trusted endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NlhsModelDoc")]
pub struct NlhsModel {
    hidden: Vec<Vec<f64>>,
    responses: Vec<ResponseTable>,
    left_states: Vec<QOperator>,
    right_states: Vec<QOperator>,
}

#[derive(Deserialize)]
struct NlhsModelDoc {
    hidden: Vec<Vec<f64>>,
    responses: Vec<ResponseTable>,
    left_states: Vec<QOperator>,
    right_states: Vec<QOperator>,
}

impl TryFrom<NlhsModelDoc> for NlhsModel {
    type Error = Error;
    fn try_from(d: NlhsModelDoc) -> Result<Self> {
        NlhsModel::new(d.hidden, d.responses, d.left_states, d.right_states)
    }
}

fn check_states(states: &[QOperator], expected: usize, what: &str) -> Result<()> {
    if states.len() != expected {
        return Err(Error::InvalidModel(format!("{} {what} states for {expected} hidden values", states.len())));
    }
    let dims = states[0].dims();
    for (i, s) in states.iter().enumerate() {
        if s.dims().len() != 1 || s.dims() != dims {
            return Err(Error::InvalidModel(format!("{what} state {i} has dims {}", s.dims())));
        }
        if !s.is_density() {
            return Err(Error::InvalidModel(format!("{what} state {i} is not a density matrix")));
        }
    }
    Ok(())
}

impl NlhsModel {
    /// `hidden[i]` is `p(λ_i)` for source `i`; `responses[j]` is the
    /// response of the untrusted party between sources `j` and `j + 1`.
    pub fn new(
        hidden: Vec<Vec<f64>>,
        responses: Vec<ResponseTable>,
        left_states: Vec<QOperator>,
        right_states: Vec<QOperator>,
    ) -> Result<Self> {
        if hidden.len() < 2 {
            return Err(Error::InvalidModel("a line needs at least two sources".into()));
        }
        if responses.len() + 1 != hidden.len() {
            return Err(Error::InvalidModel(format!(
                "{} responses for {} sources",
                responses.len(),
                hidden.len()
            )));
        }
        for (i, p) in hidden.iter().enumerate() {
            check_distribution(p, &format!("hidden distribution {i}"))?;
        }
        for (j, r) in responses.iter().enumerate() {
            if r.left_values() != hidden[j].len() || r.right_values() != hidden[j + 1].len() {
                return Err(Error::InvalidModel(format!(
                    "response {j} is {}x{} but sources have {} and {} hidden values",
                    r.left_values(),
                    r.right_values(),
                    hidden[j].len(),
                    hidden[j + 1].len()
                )));
            }
        }
        check_states(&left_states, hidden[0].len(), "left")?;
        check_states(&right_states, hidden[hidden.len() - 1].len(), "right")?;
        Ok(NlhsModel { hidden, responses, left_states, right_states })
    }

    pub fn hidden(&self) -> &[Vec<f64>] {
        &self.hidden
    }

    pub fn responses(&self) -> &[ResponseTable] {
        &self.responses
    }

    pub fn left_states(&self) -> &[QOperator] {
        &self.left_states
    }

    pub fn right_states(&self) -> &[QOperator] {
        &self.right_states
    }

    pub fn parties(&self) -> usize {
        self.hidden.len() + 1
    }

    /// All outcome tuples in lexicographic order of label indices.
    pub fn outcome_tuples(&self) -> Vec<OutcomeTuple> {
        let mut out: Vec<OutcomeTuple> = vec![Vec::new()];
        for r in &self.responses {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    r.labels().iter().map(move |&b| {
                        let mut t = prefix.clone();
                        t.push(b);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// `W[λ_first, λ_last] = Σ_{interior λ} Π p(λ_i) Π_j p(b_j | λ_j, λ_{j+1})`
    /// with the first and last hidden distributions left out.
    fn weight_matrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut w = self.responses[0].matrix(indices[0]);
        for ((resp, hidden), &b) in self.responses.iter().zip(&self.hidden).zip(indices).skip(1) {
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(hidden));
            w = w * d * resp.matrix(b);
        }
        w
    }
}

/// The network assemblage
/// `σ_b⃗ = Σ_λ⃗ Π p(λ_i) Π p(b_j | λ_j, λ_{j+1}) σ_{λ_first} ⊗ σ_{λ_last}`.
pub fn reconstruct(model: &NlhsModel) -> Result<NetworkAssemblage> {
    let first = &model.hidden[0];
    let last = &model.hidden[model.hidden.len() - 1];
    let products: Vec<Vec<QOperator>> = model
        .left_states
        .iter()
        .map(|l| model.right_states.iter().map(|r| l.tensor(r)).collect())
        .collect();
    let dims = products[0][0].dims().clone();
    let mut elements = BTreeMap::new();
    for tuple in model.outcome_tuples() {
        let indices: Vec<usize> = tuple
            .iter()
            .zip(&model.responses)
            .map(|(b, r)| r.labels().iter().position(|l| l == b).expect("label from table"))
            .collect();
        let w = model.weight_matrix(&indices);
        let mut e = QOperator::zeros(&dims);
        for (i, pi) in first.iter().enumerate() {
            for (k, pk) in last.iter().enumerate() {
                let coeff = pi * pk * w[(i, k)];
                if coeff != 0.0 {
                    e.add_scaled(&products[i][k], coeff)?;
                }
            }
        }
        elements.insert(tuple, e);
    }
    NetworkAssemblage::new(elements, model.parties())
}
