//! Dense complex operators on finite tensor-product spaces.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{tol, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Local dimensions of the tensor factors of an operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("dims must not be empty".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("zero local dimension in {dims:?}")));
        }
        Ok(Dims(dims))
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, other: &Dims) -> Dims {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Dims(v)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.0[i + 1];
        }
        s
    }

    /// Flat offsets of every multi-index over `subset` (row-major in the
    /// subset order), with all other digits zero.
    fn offsets(&self, subset: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &f in subset {
            let mut next = Vec::with_capacity(out.len() * self.0[f]);
            for &base in &out {
                for digit in 0..self.0[f] {
                    next.push(base + digit * strides[f]);
                }
            }
            out = next;
        }
        out
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.0.len() {
            return Err(Error::IndexOutOfRange { index, len: self.0.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Dims::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.0
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A square complex matrix together with the tensor structure of its space.
///
/// Hermiticity, positivity and normalisation are predicates, not construction
/// invariants: assemblage elements are sub-normalised and intermediate
/// products need not be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    matrix: CMatrix,
    dims: Dims,
}

impl QOperator {
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {} (side {n})",
                matrix.nrows(),
                matrix.ncols(),
                dims
            )));
        }
        Ok(QOperator { matrix, dims })
    }

    /// Convenience constructor from a plain dims vector.
    pub fn with_dims(matrix: CMatrix, dims: &[usize]) -> Result<Self> {
        QOperator::new(matrix, Dims::new(dims.to_vec())?)
    }

    pub fn zeros(dims: &Dims) -> Self {
        let n = dims.total();
        QOperator { matrix: CMatrix::zeros(n, n), dims: dims.clone() }
    }

    pub fn identity(dims: &Dims) -> Self {
        let n = dims.total();
        QOperator { matrix: CMatrix::identity(n, n), dims: dims.clone() }
    }

    /// Real diagonal operator.
    pub fn diagonal(diag: &[f64], dims: &Dims) -> Result<Self> {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x))));
        QOperator::new(m, dims.clone())
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalised) vector.
    pub fn projector(ket: &DVector<Complex64>, dims: &Dims) -> Result<Self> {
        QOperator::new(ket * ket.adjoint(), dims.clone())
    }

    /// `|i⟩⟨i|` for a flat basis index.
    pub fn basis_projector(index: usize, dims: &Dims) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {n}")));
        }
        let mut m = CMatrix::zeros(n, n);
        m[(index, index)] = c(1.0);
        QOperator::new(m, dims.clone())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Real part of the trace.
    pub fn trace_re(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> QOperator {
        QOperator { matrix: &self.matrix * c(s), dims: self.dims.clone() }
    }

    pub fn adjoint(&self) -> QOperator {
        QOperator { matrix: self.matrix.adjoint(), dims: self.dims.clone() }
    }

    fn check_same_dims(&self, other: &QOperator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dims, other.dims)));
        }
        Ok(())
    }

    pub fn add(&self, other: &QOperator) -> Result<QOperator> {
        self.check_same_dims(other)?;
        Ok(QOperator { matrix: &self.matrix + &other.matrix, dims: self.dims.clone() })
    }

    pub fn sub(&self, other: &QOperator) -> Result<QOperator> {
        self.check_same_dims(other)?;
        Ok(QOperator { matrix: &self.matrix - &other.matrix, dims: self.dims.clone() })
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &QOperator, s: f64) -> Result<()> {
        self.check_same_dims(other)?;
        self.matrix += &other.matrix * c(s);
        Ok(())
    }

    /// Matrix product on the same space.
    pub fn mul(&self, other: &QOperator) -> Result<QOperator> {
        self.check_same_dims(other)?;
        Ok(QOperator { matrix: &self.matrix * &other.matrix, dims: self.dims.clone() })
    }

    /// Hilbert-Schmidt inner product `Tr(self · other)`, real part.
    pub fn overlap(&self, other: &QOperator) -> Result<f64> {
        self.check_same_dims(other)?;
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// Kronecker product; dims are concatenated.
    pub fn tensor(&self, other: &QOperator) -> QOperator {
        QOperator { matrix: self.matrix.kronecker(&other.matrix), dims: self.dims.concat(&other.dims) }
    }

    /// Traces out every factor not listed in `keep`. Kept factors stay in
    /// ascending index order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QOperator> {
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        for &k in &kept {
            self.dims.check_index(k)?;
        }
        if kept.is_empty() {
            return Err(Error::InvalidParameter("partial trace must keep at least one factor".into()));
        }
        let traced: Vec<usize> = (0..self.dims.len()).filter(|i| !kept.contains(i)).collect();
        let keep_off = self.dims.offsets(&kept);
        let trace_off = self.dims.offsets(&traced);
        let n = keep_off.len();
        let out = CMatrix::from_fn(n, n, |r, col| {
            trace_off
                .iter()
                .map(|&t| self.matrix[(keep_off[r] + t, keep_off[col] + t)])
                .sum()
        });
        let dims = Dims(kept.iter().map(|&k| self.dims.0[k]).collect());
        Ok(QOperator { matrix: out, dims })
    }

    /// Transposes the listed factors.
    pub fn partial_transpose(&self, factors: &[usize]) -> Result<QOperator> {
        let mut fs: Vec<usize> = factors.to_vec();
        fs.sort_unstable();
        fs.dedup();
        for &f in &fs {
            self.dims.check_index(f)?;
        }
        let rest: Vec<usize> = (0..self.dims.len()).filter(|i| !fs.contains(i)).collect();
        let f_off = self.dims.offsets(&fs);
        let r_off = self.dims.offsets(&rest);
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for &fi in &f_off {
            for &ri in &r_off {
                for &fk in &f_off {
                    for &rl in &r_off {
                        out[(fk + ri, fi + rl)] = self.matrix[(fi + ri, fk + rl)];
                    }
                }
            }
        }
        Ok(QOperator { matrix: out, dims: self.dims.clone() })
    }

    /// Reorders tensor factors: output factor `i` is input factor `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<QOperator> {
        let k = self.dims.len();
        let mut seen = vec![false; k];
        if perm.len() != k {
            return Err(Error::InvalidParameter(format!("permutation {perm:?} for {k} factors")));
        }
        for &p in perm {
            self.dims.check_index(p)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!("repeated index in permutation {perm:?}")));
            }
        }
        let map = self.dims.offsets(perm);
        let n = self.dim();
        let out = CMatrix::from_fn(n, n, |r, col| self.matrix[(map[r], map[col])]);
        let dims = Dims(perm.iter().map(|&p| self.dims.0[p]).collect());
        Ok(QOperator { matrix: out, dims })
    }

    /// Embeds each factor into a larger local space (top-left block).
    pub fn embed(&self, target: &Dims) -> Result<QOperator> {
        if target.len() != self.dims.len() || target.0.iter().zip(&self.dims.0).any(|(t, d)| t < d) {
            return Err(Error::DimensionMismatch(format!("cannot embed {} into {}", self.dims, target)));
        }
        let tstrides = target.strides();
        let map: Vec<usize> = self
            .dims
            .offsets(&(0..self.dims.len()).collect::<Vec<_>>())
            .iter()
            .map(|&flat| {
                let mut rem = flat;
                let mut idx = 0;
                for (f, s) in self.dims.strides().iter().enumerate() {
                    idx += (rem / s) * tstrides[f];
                    rem %= s;
                }
                idx
            })
            .collect();
        let n = target.total();
        let mut out = CMatrix::zeros(n, n);
        for (r, &mr) in map.iter().enumerate() {
            for (col, &mc) in map.iter().enumerate() {
                out[(mr, mc)] = self.matrix[(r, col)];
            }
        }
        Ok(QOperator { matrix: out, dims: target.clone() })
    }

    /// Max-entry distance to another operator on the same space.
    pub fn max_abs_diff(&self, other: &QOperator) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= tol::HERM
    }

    fn hermitized(&self) -> Result<CMatrix> {
        let defect = self.hermitian_defect();
        if defect > tol::HERM {
            return Err(Error::NotHermitian { defect });
        }
        Ok((&self.matrix + self.matrix.adjoint()) * c(0.5))
    }

    /// Real eigenvalues in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitized()?;
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?[0])
    }

    /// Applies a real function to the spectrum of a Hermitian operator.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<QOperator> {
        let h = self.hermitized()?;
        let eig = SymmetricEigen::new(h);
        let v = &eig.eigenvectors;
        let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| c(f(l))));
        let m = v * CMatrix::from_diagonal(&d) * v.adjoint();
        Ok(QOperator { matrix: m, dims: self.dims.clone() })
    }

    pub fn is_psd(&self) -> bool {
        matches!(self.min_eigenvalue(), Ok(l) if l >= -tol::PSD)
    }

    /// Hermitian, PSD, unit trace.
    pub fn is_density(&self) -> bool {
        self.is_psd() && (self.trace().re - 1.0).abs() <= tol::EQ && self.trace().im.abs() <= tol::EQ
    }

    pub(crate) fn require_psd(&self) -> Result<()> {
        let min_eigenvalue = self.min_eigenvalue()?;
        if min_eigenvalue < -tol::PSD {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(())
    }

    pub(crate) fn require_density(&self) -> Result<()> {
        self.require_psd()?;
        let t = self.trace();
        if (t.re - 1.0).abs() > tol::EQ || t.im.abs() > tol::EQ {
            return Err(Error::InvalidParameter(format!("density matrix has trace {t}")));
        }
        Ok(())
    }
}

/// Kronecker product of two operators.
pub fn tensor(a: &QOperator, b: &QOperator) -> QOperator {
    a.tensor(b)
}

/// Kronecker product of a non-empty list of operators.
pub fn tensor_all(ops: &[&QOperator]) -> Result<QOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty tensor product".into()))?;
    Ok(rest.iter().fold((*first).clone(), |acc, op| acc.tensor(op)))
}

/// Sum of the absolute values of the negative eigenvalues of the partial
/// transpose over `split`. Positive values certify entanglement.
pub fn negativity(op: &QOperator, split: &[usize]) -> Result<f64> {
    op.require_psd()?;
    negativity_of_pt(&op.partial_transpose(split)?)
}

pub(crate) fn negativity_of_pt(pt: &QOperator) -> Result<f64> {
    Ok(pt
        .hermitian_eigenvalues()?
        .into_iter()
        .filter(|&l| l < -tol::NEGATIVITY_CUTOFF)
        .fold(0.0, |acc, l| acc - l))
}

/// Max-entry distance `<= tau`.
pub fn op_equal(a: &QOperator, b: &QOperator, tau: f64) -> Result<bool> {
    Ok(a.max_abs_diff(b)? <= tau)
}

impl Serialize for QOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = MatrixDoc::deserialize(d)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

/// Text representation of an operator: dims plus real and imaginary parts
/// as nested row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl From<&QOperator> for MatrixDoc {
    fn from(op: &QOperator) -> Self {
        let n = op.dim();
        let rows = |f: fn(&Complex64) -> f64| {
            (0..n).map(|i| (0..n).map(|j| f(&op.matrix[(i, j)])).collect()).collect()
        };
        MatrixDoc { dims: op.dims.0.clone(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl TryFrom<MatrixDoc> for QOperator {
    type Error = Error;
    fn try_from(doc: MatrixDoc) -> Result<Self> {
        let dims = Dims::new(doc.dims)?;
        let n = dims.total();
        if doc.re.len() != n || doc.re.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("real part is not {n}x{n}")));
        }
        let has_im = !doc.im.is_empty();
        if has_im && (doc.im.len() != n || doc.im.iter().any(|r| r.len() != n)) {
            return Err(Error::DimensionMismatch(format!("imaginary part is not {n}x{n}")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(doc.re[i][j], if has_im { doc.im[i][j] } else { 0.0 })
        });
        QOperator::new(m, dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn psi_minus() -> QOperator {
        let s = 0.5f64.sqrt();
        let ket = DVector::from_vec(vec![c(0.0), c(s), c(-s), c(0.0)]);
        QOperator::projector(&ket, &dims(&[2, 2])).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = QOperator::identity(&dims(&[2]));
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.dims().as_slice(), &[2, 2]);
        assert_eq!(i4.max_abs_diff(&QOperator::identity(&dims(&[2, 2]))).unwrap(), 0.0);
    }

    #[test]
    fn basis_projector_tensor() {
        let p0 = QOperator::basis_projector(0, &dims(&[2])).unwrap();
        let p1 = QOperator::basis_projector(1, &dims(&[2])).unwrap();
        let p01 = QOperator::basis_projector(1, &dims(&[2, 2])).unwrap();
        assert_eq!(p0.tensor(&p1), p01);
        assert_eq!(p01.partial_trace(&[0]).unwrap(), p0);
        assert_eq!(p01.partial_trace(&[1]).unwrap(), p1);
    }

    #[test]
    fn trace_nothing_is_identity_map() {
        let x = psi_minus();
        assert_eq!(x.partial_trace(&[0, 1]).unwrap(), x);
        assert_eq!(x.partial_trace(&[1, 0]).unwrap(), x);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let x = psi_minus();
        assert_eq!(x.partial_trace(&[2]), Err(Error::IndexOutOfRange { index: 2, len: 2 }));
        assert!(x.partial_transpose(&[5]).is_err());
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        // PT of the singlet is (I - 2 SWAP... ) with spectrum {-1/2, 1/2, 1/2, 1/2}.
        let pt = psi_minus().partial_transpose(&[1]).unwrap();
        let ev = pt.hermitian_eigenvalues().unwrap();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        assert!(!pt.is_psd());
        assert!((negativity(&psi_minus(), &[1]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(pt.partial_transpose(&[1]).unwrap(), psi_minus());
    }

    #[test]
    fn eigenvalues_of_simple_operators() {
        assert_eq!(QOperator::identity(&dims(&[2])).hermitian_eigenvalues().unwrap(), vec![1.0, 1.0]);
        let ev = psi_minus().hermitian_eigenvalues().unwrap();
        assert!(ev[..3].iter().all(|l| l.abs() < 1e-12) && (ev[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        let op = QOperator::with_dims(m, &[2]).unwrap();
        assert!(matches!(op.hermitian_eigenvalues(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn negativity_rejects_non_psd() {
        let pt = psi_minus().partial_transpose(&[1]).unwrap();
        assert!(matches!(negativity(&pt, &[1]), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn predicates() {
        let half = QOperator::identity(&dims(&[2])).scale(0.5);
        assert!(half.is_density());
        assert!(!QOperator::identity(&dims(&[2])).is_density());
        assert!(op_equal(&half, &half, 0.0).unwrap());
        assert!(op_equal(&half, &psi_minus(), 1.0).is_err());
    }

    #[test]
    fn mismatched_matrix_is_rejected() {
        assert!(QOperator::with_dims(CMatrix::zeros(3, 3), &[2]).is_err());
        assert!(Dims::new(vec![2, 0]).is_err());
    }

    #[test]
    fn permute_swaps_factors() {
        let p0 = QOperator::basis_projector(0, &dims(&[2])).unwrap();
        let p2 = QOperator::basis_projector(2, &dims(&[3])).unwrap();
        let swapped = p0.tensor(&p2).permute(&[1, 0]).unwrap();
        assert_eq!(swapped, p2.tensor(&p0));
    }

    #[test]
    fn embed_places_block_top_left() {
        let e = psi_minus().embed(&dims(&[3, 3])).unwrap();
        assert_eq!(e.dims().as_slice(), &[3, 3]);
        assert!((e.trace_re() - 1.0).abs() < 1e-15);
        // |01> -> flat index 1, |10> -> flat index 3 in 3x3.
        assert!((e.matrix()[(1, 3)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn matrix_doc_round_trip() {
        let x = psi_minus().scale(0.3);
        let doc = MatrixDoc::from(&x);
        let back = QOperator::try_from(doc).unwrap();
        assert_eq!(back, x);
    }
}
