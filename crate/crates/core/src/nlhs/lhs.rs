//! Local hidden state and local hidden variable models for single sources,
//! and providers that search for them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::separable::SeparableDecomposition;
use crate::assemblage::{standard_assemblage, Assemblage};
use crate::certify::fibonacci_sphere;
use crate::nnls::nnls;
use crate::operator::{c, CMatrix, QOperator};
use crate::povm::{bloch_operator, Povm};
use crate::{tol, Error, Result, Side};

/// `σ_{a|x} = Σ_λ p(λ) p(a|x,λ) σ_λ`, with `responses[x][λ][k]` the
/// probability of outcome `labels[x][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhsModel {
    hidden: Vec<f64>,
    labels: Vec<Vec<usize>>,
    responses: Vec<Vec<Vec<f64>>>,
    states: Vec<QOperator>,
}

fn check_response_block(block: &[Vec<f64>], hidden: usize, outcomes: usize, what: &str) -> Result<()> {
    if block.len() != hidden {
        return Err(Error::InvalidModel(format!("{what}: {} rows for {hidden} hidden values", block.len())));
    }
    for (l, p) in block.iter().enumerate() {
        let s: f64 = p.iter().sum();
        if p.len() != outcomes || p.iter().any(|&v| v < -tol::EQ) || (s - 1.0).abs() > tol::EQ {
            return Err(Error::InvalidModel(format!("{what}: response for λ = {l} is not a distribution")));
        }
    }
    Ok(())
}

fn check_hidden(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&v| v < -tol::EQ) || (s - 1.0).abs() > tol::EQ {
        return Err(Error::InvalidModel(format!("hidden distribution {p:?} is not normalised")));
    }
    Ok(())
}

impl LhsModel {
    pub fn new(hidden: Vec<f64>, labels: Vec<Vec<usize>>, responses: Vec<Vec<Vec<f64>>>, states: Vec<QOperator>) -> Result<Self> {
        check_hidden(&hidden)?;
        if labels.len() != responses.len() || labels.is_empty() {
            return Err(Error::InvalidModel("labels and responses disagree on the number of inputs".into()));
        }
        for (x, (l, r)) in labels.iter().zip(&responses).enumerate() {
            check_response_block(r, hidden.len(), l.len(), &format!("input {x}"))?;
        }
        if states.len() != hidden.len() || states.iter().any(|s| s.dims() != states[0].dims() || !s.is_density()) {
            return Err(Error::InvalidModel("hidden states must be density matrices on a common system".into()));
        }
        Ok(LhsModel { hidden, labels, responses, states })
    }

    pub fn hidden(&self) -> &[f64] {
        &self.hidden
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    /// `responses()[x][λ][k]`.
    pub fn responses(&self) -> &[Vec<Vec<f64>>] {
        &self.responses
    }

    pub fn states(&self) -> &[QOperator] {
        &self.states
    }

    /// The assemblage keyed `(vec![a], x)`.
    pub fn assemblage(&self) -> Result<Assemblage> {
        let dims = self.states[0].dims().clone();
        let mut elements = BTreeMap::new();
        for (x, labels) in self.labels.iter().enumerate() {
            for (k, &a) in labels.iter().enumerate() {
                let mut e = QOperator::zeros(&dims);
                for (l, s) in self.states.iter().enumerate() {
                    e.add_scaled(s, self.hidden[l] * self.responses[x][l][k])?;
                }
                elements.insert((vec![a], x), e);
            }
        }
        Assemblage::new(elements)
    }
}

/// `p(a, b | x, y) = Σ_μ p(μ) p(a|x,μ) p(b|y,μ)`, with response blocks
/// indexed `[setting][μ][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvModel {
    hidden: Vec<f64>,
    left_labels: Vec<Vec<usize>>,
    left: Vec<Vec<Vec<f64>>>,
    right_labels: Vec<Vec<usize>>,
    right: Vec<Vec<Vec<f64>>>,
}

/// Joint outcome probabilities `[x][y][k_a][k_b]`.
pub type Behavior = Vec<Vec<Vec<Vec<f64>>>>;

impl LhvModel {
    pub fn new(
        hidden: Vec<f64>,
        left_labels: Vec<Vec<usize>>,
        left: Vec<Vec<Vec<f64>>>,
        right_labels: Vec<Vec<usize>>,
        right: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_hidden(&hidden)?;
        for (labels, blocks, side) in [(&left_labels, &left, "left"), (&right_labels, &right, "right")] {
            if labels.len() != blocks.len() || labels.is_empty() {
                return Err(Error::InvalidModel(format!("{side} labels and responses disagree")));
            }
            for (x, (l, b)) in labels.iter().zip(blocks).enumerate() {
                check_response_block(b, hidden.len(), l.len(), &format!("{side} setting {x}"))?;
            }
        }
        Ok(LhvModel { hidden, left_labels, left, right_labels, right })
    }

    pub fn hidden(&self) -> &[f64] {
        &self.hidden
    }

    /// `left()[x][μ][k]`.
    pub fn left(&self) -> &[Vec<Vec<f64>>] {
        &self.left
    }

    /// `right()[y][μ][k]`.
    pub fn right(&self) -> &[Vec<Vec<f64>>] {
        &self.right
    }

    pub fn left_labels(&self) -> &[Vec<usize>] {
        &self.left_labels
    }

    pub fn right_labels(&self) -> &[Vec<usize>] {
        &self.right_labels
    }

    pub fn behavior(&self) -> Behavior {
        self.left
            .iter()
            .map(|lx| {
                self.right
                    .iter()
                    .map(|ry| {
                        (0..lx[0].len())
                            .map(|ka| {
                                (0..ry[0].len())
                                    .map(|kb| (0..self.hidden.len()).map(|m| self.hidden[m] * lx[m][ka] * ry[m][kb]).sum())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// `p(a, b | x, y) = Tr((M_{a|x} ⊗ N_{b|y}) ρ)`.
pub fn quantum_behavior(rho: &QOperator, left: &[Povm], right: &[Povm]) -> Result<Behavior> {
    left.iter()
        .map(|m| {
            right
                .iter()
                .map(|n| {
                    m.effects()
                        .iter()
                        .map(|ma| n.effects().iter().map(|nb| ma.tensor(nb).overlap(rho)).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub fn behavior_deviation(a: &Behavior, b: &Behavior) -> f64 {
    let mut worst: f64 = 0.0;
    for (ax, bx) in a.iter().zip(b) {
        for (axy, bxy) in ax.iter().zip(bx) {
            for (ra, rb) in axy.iter().zip(bxy) {
                for (va, vb) in ra.iter().zip(rb) {
                    worst = worst.max((va - vb).abs());
                }
            }
        }
    }
    worst
}

/// Searches for an LHS model of the assemblage obtained by measuring the
/// `toward.opposite()` factor of `state` with `measurements`; hidden states
/// live on the `toward` factor.
pub trait LhsProvider: Send + Sync {
    fn name(&self) -> &str;

    /// `Ok(None)` means no model was found, which says nothing about
    /// steerability.
    fn find_lhs(&self, state: &QOperator, measurements: &[Povm], toward: Side) -> Result<Option<LhsModel>>;
}

/// Searches for a local model of the behaviour of `state` under
/// `left` measurements on its first factor and `right` ones on its second.
pub trait LhvProvider: Send + Sync {
    fn name(&self) -> &str;

    fn find_lhv(&self, state: &QOperator, left: &[Povm], right: &[Povm]) -> Result<Option<LhvModel>>;
}

/// Models read off a separable decomposition of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableProvider {
    decomposition: SeparableDecomposition,
}

impl SeparableProvider {
    pub fn new(decomposition: SeparableDecomposition) -> Self {
        SeparableProvider { decomposition }
    }

    pub fn decomposition(&self) -> &SeparableDecomposition {
        &self.decomposition
    }

    fn matches(&self, state: &QOperator) -> Result<bool> {
        if state.dims() != &self.decomposition.dims() {
            return Ok(false);
        }
        Ok(self.decomposition.deviation(state)? <= tol::EQ)
    }
}

fn response_probs(m: &Povm, states: &[QOperator]) -> Result<Vec<Vec<f64>>> {
    states.iter().map(|s| m.probabilities(s)).collect()
}

impl LhsProvider for SeparableProvider {
    fn name(&self) -> &str {
        "separable"
    }

    fn find_lhs(&self, state: &QOperator, measurements: &[Povm], toward: Side) -> Result<Option<LhsModel>> {
        if !self.matches(state)? {
            return Ok(None);
        }
        let (measured, hidden) = match toward {
            Side::Right => (self.decomposition.lefts(), self.decomposition.rights()),
            Side::Left => (self.decomposition.rights(), self.decomposition.lefts()),
        };
        let responses = measurements.iter().map(|m| response_probs(m, measured)).collect::<Result<Vec<_>>>()?;
        let labels = measurements.iter().map(|m| m.labels().to_vec()).collect();
        Ok(Some(LhsModel::new(self.decomposition.weights().to_vec(), labels, responses, hidden.to_vec())?))
    }
}

impl LhvProvider for SeparableProvider {
    fn name(&self) -> &str {
        "separable"
    }

    fn find_lhv(&self, state: &QOperator, left: &[Povm], right: &[Povm]) -> Result<Option<LhvModel>> {
        if !self.matches(state)? {
            return Ok(None);
        }
        let l = left.iter().map(|m| response_probs(m, self.decomposition.lefts())).collect::<Result<Vec<_>>>()?;
        let r = right.iter().map(|m| response_probs(m, self.decomposition.rights())).collect::<Result<Vec<_>>>()?;
        Ok(Some(LhvModel::new(
            self.decomposition.weights().to_vec(),
            left.iter().map(|m| m.labels().to_vec()).collect(),
            l,
            right.iter().map(|m| m.labels().to_vec()).collect(),
            r,
        )?))
    }
}

/// Deterministic strategies: one outcome index per setting, enumerated in
/// lexicographic order with the first setting most significant.
fn strategies(outcomes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in outcomes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |a| {
                    let mut s = prefix.clone();
                    s.push(a);
                    s
                })
            })
            .collect();
    }
    out
}

/// Real coordinates of a Hermitian matrix: diagonal, then real and
/// imaginary parts of the strict upper triangle (off-diagonals doubled so
/// the map is an isometry up to scale).
fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            v.push(2.0 * m[(i, j)].re);
            v.push(2.0 * m[(i, j)].im);
        }
    }
    v
}

/// Brute-force LHS search over deterministic response functions and a
/// finite pool of candidate hidden states: normalised steered states, the
/// reduced state, computational basis states and, for qubits, a Bloch
/// sphere grid. The weights are found by non-negative least squares and a
/// model is returned only if it reproduces the assemblage within `tol::EQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceLhsProvider {
    pub bloch_grid: usize,
    /// Upper bound on strategy × candidate columns.
    pub max_columns: usize,
}

impl Default for BruteForceLhsProvider {
    fn default() -> Self {
        BruteForceLhsProvider { bloch_grid: 60, max_columns: 200_000 }
    }
}

impl BruteForceLhsProvider {
    fn candidates(&self, target: &Assemblage, measurements: &[Povm], strats: &[Vec<usize>]) -> Result<Vec<QOperator>> {
        let dims = target.dims().clone();
        let reduced = target.marginal(target.inputs()[0]);
        let d = dims.total();
        let mut out: Vec<QOperator> = Vec::new();
        let mut push = |s: QOperator| {
            if out.iter().all(|o| o.max_abs_diff(&s).map_or(true, |x| x > 1e-12)) {
                out.push(s);
            }
        };
        for e in target.elements().values() {
            let t = e.trace_re();
            if t > 1e-12 {
                push(e.scale(1.0 / t));
            }
        }
        push(reduced.clone());
        // For each strategy, the reduced state shifted by every steered
        // state it selects; this contains the standard hidden states of
        // symmetric models such as Werner states under Pauli measurements.
        if strats.len() <= 64 {
            for s in strats {
                let mut cand = reduced.clone();
                let mut ok = true;
                for (x, &k) in s.iter().enumerate() {
                    let e = target.get(&[measurements[x].labels()[k]], x).expect("built from measurements");
                    let t = e.trace_re();
                    if t <= 1e-12 {
                        ok = false;
                        break;
                    }
                    cand.add_scaled(&e.scale(1.0 / t).sub(&reduced)?, 1.0)?;
                }
                if ok && cand.min_eigenvalue()? >= -1e-12 {
                    push(cand);
                }
            }
        }
        for i in 0..d {
            push(QOperator::basis_projector(i, &dims)?);
        }
        if d == 2 {
            let mut pts = fibonacci_sphere(self.bloch_grid);
            for axis in 0..3 {
                for s in [1.0, -1.0] {
                    let mut v = [0.0; 3];
                    v[axis] = s;
                    pts.push(v);
                }
            }
            for p in pts {
                let m = (CMatrix::identity(2, 2) + bloch_operator(p)) * c(0.5);
                push(QOperator::new(m, dims.clone())?);
            }
        }
        Ok(out)
    }
}

impl LhsProvider for BruteForceLhsProvider {
    fn name(&self) -> &str {
        "brute-force"
    }

    fn find_lhs(&self, state: &QOperator, measurements: &[Povm], toward: Side) -> Result<Option<LhsModel>> {
        let target = standard_assemblage(state, measurements, toward.opposite())?;
        let outcomes: Vec<usize> = measurements.iter().map(Povm::len).collect();
        let strats = strategies(&outcomes);
        let cands = self.candidates(&target, measurements, &strats)?;
        if strats.len().saturating_mul(cands.len()) > self.max_columns {
            return Ok(None);
        }
        let coords: Vec<Vec<f64>> = cands.iter().map(|s| hermitian_coords(s.matrix())).collect();
        let block = coords[0].len();
        let offsets: Vec<usize> = outcomes
            .iter()
            .scan(0, |acc, &k| {
                let o = *acc;
                *acc += k;
                Some(o)
            })
            .collect();
        let rows = outcomes.iter().sum::<usize>() * block + 1;
        let cols = strats.len() * cands.len();
        let mut a = DMatrix::zeros(rows, cols);
        for (si, s) in strats.iter().enumerate() {
            for (ci, v) in coords.iter().enumerate() {
                let col = si * cands.len() + ci;
                for (x, &k) in s.iter().enumerate() {
                    let r0 = (offsets[x] + k) * block;
                    for (t, val) in v.iter().enumerate() {
                        a[(r0 + t, col)] = *val;
                    }
                }
                a[(rows - 1, col)] = 1.0;
            }
        }
        let mut b = DVector::zeros(rows);
        for (x, m) in measurements.iter().enumerate() {
            for (k, &label) in m.labels().iter().enumerate() {
                let v = hermitian_coords(target.get(&[label], x).expect("built from measurements").matrix());
                let r0 = (offsets[x] + k) * block;
                for (t, val) in v.iter().enumerate() {
                    b[r0 + t] = *val;
                }
            }
        }
        b[rows - 1] = 1.0;
        let (w, residual) = nnls(&a, &b);
        if residual > 1e-9 {
            return Ok(None);
        }
        let kept: Vec<usize> = (0..cols).filter(|&j| w[j] > 0.0).collect();
        let total: f64 = kept.iter().map(|&j| w[j]).sum();
        let hidden: Vec<f64> = kept.iter().map(|&j| w[j] / total).collect();
        let responses = outcomes
            .iter()
            .enumerate()
            .map(|(x, &k)| {
                kept.iter()
                    .map(|&j| {
                        let mut p = vec![0.0; k];
                        p[strats[j / cands.len()][x]] = 1.0;
                        p
                    })
                    .collect()
            })
            .collect();
        let states = kept.iter().map(|&j| cands[j % cands.len()].clone()).collect();
        let labels = measurements.iter().map(|m| m.labels().to_vec()).collect();
        let model = LhsModel::new(hidden, labels, responses, states)?;
        if model.assemblage()?.max_abs_diff(&target)? > tol::EQ {
            return Ok(None);
        }
        Ok(Some(model))
    }
}

/// Local model search for a finite behaviour: non-negative weights over
/// pairs of deterministic strategies, accepted within `tol::EQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicLhvProvider {
    pub max_columns: usize,
}

impl Default for DeterministicLhvProvider {
    fn default() -> Self {
        DeterministicLhvProvider { max_columns: 100_000 }
    }
}

impl LhvProvider for DeterministicLhvProvider {
    fn name(&self) -> &str {
        "deterministic-lhv"
    }

    fn find_lhv(&self, state: &QOperator, left: &[Povm], right: &[Povm]) -> Result<Option<LhvModel>> {
        let target = quantum_behavior(state, left, right)?;
        let lo: Vec<usize> = left.iter().map(Povm::len).collect();
        let ro: Vec<usize> = right.iter().map(Povm::len).collect();
        let (ls, rs) = (strategies(&lo), strategies(&ro));
        let cols = ls.len().saturating_mul(rs.len());
        if cols > self.max_columns {
            return Ok(None);
        }
        let mut index = Vec::new();
        for (x, &ka) in lo.iter().enumerate() {
            for (y, &kb) in ro.iter().enumerate() {
                for a in 0..ka {
                    for b in 0..kb {
                        index.push((x, y, a, b));
                    }
                }
            }
        }
        let rows = index.len() + 1;
        let mut mat = DMatrix::zeros(rows, cols);
        for (i, s) in ls.iter().enumerate() {
            for (j, t) in rs.iter().enumerate() {
                let col = i * rs.len() + j;
                for (r, &(x, y, a, b)) in index.iter().enumerate() {
                    if s[x] == a && t[y] == b {
                        mat[(r, col)] = 1.0;
                    }
                }
                mat[(rows - 1, col)] = 1.0;
            }
        }
        let mut rhs = DVector::zeros(rows);
        for (r, &(x, y, a, b)) in index.iter().enumerate() {
            rhs[r] = target[x][y][a][b];
        }
        rhs[rows - 1] = 1.0;
        let (w, residual) = nnls(&mat, &rhs);
        if residual > 1e-9 {
            return Ok(None);
        }
        let kept: Vec<usize> = (0..cols).filter(|&j| w[j] > 0.0).collect();
        let total: f64 = kept.iter().map(|&j| w[j]).sum();
        let hidden = kept.iter().map(|&j| w[j] / total).collect();
        let block = |outcomes: &[usize], pick: &dyn Fn(usize) -> usize, strat: &[Vec<usize>]| -> Vec<Vec<Vec<f64>>> {
            outcomes
                .iter()
                .enumerate()
                .map(|(x, &k)| {
                    kept.iter()
                        .map(|&j| {
                            let mut p = vec![0.0; k];
                            p[strat[pick(j)][x]] = 1.0;
                            p
                        })
                        .collect()
                })
                .collect()
        };
        let nr = rs.len();
        let lb = block(&lo, &|j| j / nr, &ls);
        let rb = block(&ro, &|j| j % nr, &rs);
        let model = LhvModel::new(
            hidden,
            left.iter().map(|m| m.labels().to_vec()).collect(),
            lb,
            right.iter().map(|m| m.labels().to_vec()).collect(),
            rb,
        )?;
        if behavior_deviation(&model.behavior(), &target) > tol::EQ {
            return Ok(None);
        }
        Ok(Some(model))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Dims;
    use crate::povm::pauli_projective;
    use crate::random::{random_density, random_povm, random_separable, seeded};
    use crate::states::{psi_minus, werner};

    fn zx() -> Vec<Povm> {
        vec![pauli_projective([0.0, 0.0, 1.0]).unwrap(), pauli_projective([1.0, 0.0, 0.0]).unwrap()]
    }

    #[test]
    fn separable_provider_reproduces_assemblage() {
        let mut rng = seeded(21);
        let sep = random_separable(2, 3, 4, &mut rng);
        let rho = sep.to_operator();
        let ms = vec![random_povm(&Dims::new(vec![2]).unwrap(), 3, &mut rng), random_povm(&Dims::new(vec![2]).unwrap(), 2, &mut rng)];
        let p = SeparableProvider::new(sep);
        let m = p.find_lhs(&rho, &ms, Side::Right).unwrap().unwrap();
        let want = standard_assemblage(&rho, &ms, Side::Left).unwrap();
        assert!(m.assemblage().unwrap().max_abs_diff(&want).unwrap() < 1e-14);
        assert!(p.find_lhs(&random_density(&Dims::new(vec![2, 3]).unwrap(), &mut rng), &ms, Side::Right).unwrap().is_none());
    }

    #[test]
    fn brute_force_finds_werner_model_for_two_axes() {
        // Werner states with ω ≤ 1/√2 admit LHS models for two Pauli axes.
        let model = BruteForceLhsProvider::default().find_lhs(&werner(0.5).unwrap(), &zx(), Side::Right).unwrap();
        let model = model.expect("model exists");
        let want = standard_assemblage(&werner(0.5).unwrap(), &zx(), Side::Left).unwrap();
        assert!(model.assemblage().unwrap().max_abs_diff(&want).unwrap() <= 1e-10);
    }

    #[test]
    fn brute_force_reports_no_model_for_singlet() {
        let found = BruteForceLhsProvider::default().find_lhs(&psi_minus(), &zx(), Side::Right).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn lhv_for_classical_and_not_for_singlet_chsh() {
        let p = DeterministicLhvProvider::default();
        let (z, x) = ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);
        let s = 0.5f64.sqrt();
        let left = vec![pauli_projective(z).unwrap(), pauli_projective(x).unwrap()];
        let right = vec![pauli_projective([s, 0.0, s]).unwrap(), pauli_projective([-s, 0.0, s]).unwrap()];
        assert!(p.find_lhv(&psi_minus(), &left, &right).unwrap().is_none());
        let m = p.find_lhv(&werner(0.5).unwrap(), &left, &right).unwrap().expect("local below CHSH threshold");
        let q = quantum_behavior(&werner(0.5).unwrap(), &left, &right).unwrap();
        assert!(behavior_deviation(&m.behavior(), &q) <= 1e-10);
    }
}
