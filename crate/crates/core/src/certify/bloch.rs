//! Bloch data of two-qubit states and the sufficient unsteerability
//! criterion for states with one erased side.

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::operator::{c, CMatrix, Dims, QOperator};
use crate::povm::pauli_matrices;
use crate::states::{dew, DewParams};
use crate::{tol, Error, Result};

pub const DEFAULT_LATTICE_POINTS: usize = 2000;

/// Local Bloch vector `a` of the first qubit and correlation matrix
/// `T_ij = Tr(ρ σ_i ⊗ σ_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochData {
    pub a: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochData {
    pub fn new(a: [f64; 3], t: [[f64; 3]; 3]) -> Result<Self> {
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + tol::EQ || t.iter().flatten().any(|x| x.abs() > 1.0 + tol::EQ) {
            return Err(Error::InvalidParameter(format!("Bloch data out of range: a = {a:?}, T = {t:?}")));
        }
        Ok(BlochData { a, t })
    }

    fn t_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.t[i][j])
    }

    fn a_vector(&self) -> Vector3<f64> {
        Vector3::from(self.a)
    }
}

/// The `{|0⟩,|1⟩}⊗{|0⟩,|1⟩}` block of a two-qutrit state, normalised, with
/// its weight.
pub fn erased_qubit_block(rho: &QOperator) -> Result<(QOperator, f64)> {
    if rho.dims().as_slice() != [3, 3] {
        return Err(Error::UnsupportedInput(format!("expected dims [3, 3], got {}", rho.dims())));
    }
    let idx = [0usize, 1, 3, 4];
    let block = CMatrix::from_fn(4, 4, |i, j| rho.matrix()[(idx[i], idx[j])]);
    let weight = block.trace().re;
    if weight <= 1e-14 {
        return Err(Error::UnsupportedInput("qubit block has zero weight".into()));
    }
    Ok((QOperator::new(block / c(weight), Dims::new(vec![2, 2])?)?, weight))
}

/// Bloch data of a two-qubit state, or of the normalised qubit block of a
/// two-qutrit erased state.
pub fn bloch_data(rho: &QOperator) -> Result<BlochData> {
    let qubits = match rho.dims().as_slice() {
        [2, 2] => rho.clone(),
        [3, 3] => erased_qubit_block(rho)?.0,
        other => return Err(Error::UnsupportedInput(format!("no Bloch data for dims {other:?}"))),
    };
    let p = pauli_matrices();
    let id = CMatrix::identity(2, 2);
    let expect = |op: CMatrix| (op * qubits.matrix()).trace().re;
    let a = [0, 1, 2].map(|i| expect(p[i].kronecker(&id)));
    let t = [0, 1, 2].map(|i| [0, 1, 2].map(|j| expect(p[i].kronecker(&p[j]))));
    BlochData::new(a, t)
}

/// Points of the Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn objective(a: &Vector3<f64>, t: &Matrix3<f64>, eta: f64, x: &Vector3<f64>) -> f64 {
    let ax = a.dot(x);
    (1.0 - 3.0 * eta) * ax.abs() + 1.5 * eta * (1.0 + ax * ax) + (t * x).norm()
}

fn tangent_basis(x: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if x.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = x.cross(&helper).normalize();
    let v = x.cross(&u);
    (u, v)
}

/// Compass search on the sphere starting from `x`.
fn refine(a: &Vector3<f64>, t: &Matrix3<f64>, eta: f64, mut x: Vector3<f64>, mut step: f64) -> f64 {
    let mut best = objective(a, t, eta, &x);
    while step > 1e-10 {
        let (u, v) = tangent_basis(&x);
        let mut improved = None;
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4;
            let cand = (x + (u * th.cos() + v * th.sin()) * step).normalize();
            let val = objective(a, t, eta, &cand);
            if val > best && improved.as_ref().is_none_or(|(_, bv)| val > *bv) {
                improved = Some((cand, val));
            }
        }
        match improved {
            Some((cand, val)) => {
                x = cand;
                best = val;
            }
            None => step *= 0.5,
        }
    }
    best
}

/// Maximum over unit `x` of
/// `(1 − 3η)|a·x| + (3η/2)(1 + (a·x)²) + ‖T x‖`.
///
/// Exact when `a = 0`. Otherwise the maximum of a Fibonacci lattice with
/// compass-search refinement of the best points, combined with the exact
/// maximum on the great circle `a·x = 0` where the objective has a kink.
pub fn erased_criterion_max(b: &BlochData, eta: f64, lattice_points: usize) -> f64 {
    let t = b.t_matrix();
    let a = b.a_vector();
    let sigma_max = t.singular_values().max();
    if a.norm() <= 1e-14 {
        return 1.5 * eta + sigma_max;
    }
    let pts = fibonacci_sphere(lattice_points.max(1));
    let mut scored: Vec<(usize, f64)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (i, objective(&a, &t, eta, &Vector3::from(*p))))
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let spacing = (4.0 * std::f64::consts::PI / lattice_points.max(1) as f64).sqrt();
    let mut best = scored[0].1;
    for &(i, _) in scored.iter().take(12) {
        best = best.max(refine(&a, &t, eta, Vector3::from(pts[i]), spacing));
    }
    // On the plane a·x = 0 the objective is 3η/2 + ‖T x‖, maximised in
    // closed form over the great circle spanned by u, v.
    let (u, v) = tangent_basis(&a.normalize());
    let (tu, tv) = (t * u, t * v);
    let g = Matrix2::new(tu.dot(&tu), tu.dot(&tv), tv.dot(&tu), tv.dot(&tv));
    let circle = g.symmetric_eigenvalues().max().max(0.0).sqrt();
    best.max(1.5 * eta + circle)
}

/// Sufficient condition for `(Λ_η ⊗ 𝟙)ρ` to be unsteerable from the erased
/// side: the criterion maximum is at most one (within `tol::OPT`).
pub fn erased_unsteerable(b: &BlochData, eta: f64) -> (bool, f64) {
    let max = erased_criterion_max(b, eta, DEFAULT_LATTICE_POINTS);
    (max <= 1.0 + tol::OPT, max)
}

/// Unsteerability of the DEW state in both directions. The criterion
/// certifies `(Λ_η ⊗ 𝟙)ρ_W` unsteerable from the erased side; erasing the
/// steered side as well is a local channel on the trusted party and cannot
/// create steering. The state is swap symmetric, so one direction covers
/// both.
pub fn dew_unsteerable_both_ways(p: DewParams) -> Result<bool> {
    if p.eta() == 0.0 {
        return Ok(true);
    }
    let data = bloch_data(&dew(p)?)?;
    Ok(erased_unsteerable(&data, p.eta()).0)
}
