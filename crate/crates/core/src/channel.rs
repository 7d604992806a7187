//! Quantum channels in Kraus form.

use crate::operator::{c, CMatrix, Dims, QOperator};
use crate::{tol, Error, Result};

/// A trace-preserving map `ρ ↦ Σ K ρ K†` from `d_in` to `d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
}

impl Channel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::InvalidChannel("Kraus operators have differing shapes".into()));
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let defect = (sum - CMatrix::identity(d_in, d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > tol::EQ {
            return Err(Error::InvalidChannel(format!("not trace preserving (defect {defect:e})")));
        }
        Ok(Channel { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Channel { kraus: vec![CMatrix::identity(d, d)], d_in: d, d_out: d }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.d_out != next.d_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose channel with output {} into input {}",
                self.d_out, next.d_in
            )));
        }
        let kraus = next.kraus.iter().flat_map(|b| self.kraus.iter().map(move |a| b * a)).collect();
        Channel::new(kraus)
    }
}

/// `Λ_η(ρ) = ηρ + (1 − η) Tr(ρ) |d⟩⟨d|`, mapping dimension `d` to `d + 1`.
pub fn erasure_channel(eta: f64, d_in: usize) -> Result<Channel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta = {eta} outside [0, 1]")));
    }
    if d_in == 0 {
        return Err(Error::InvalidParameter("erasure input dimension must be positive".into()));
    }
    let d_out = d_in + 1;
    let mut keep = CMatrix::zeros(d_out, d_in);
    for i in 0..d_in {
        keep[(i, i)] = c(eta.sqrt());
    }
    let mut kraus = vec![keep];
    for i in 0..d_in {
        let mut lose = CMatrix::zeros(d_out, d_in);
        lose[(d_in, i)] = c((1.0 - eta).sqrt());
        kraus.push(lose);
    }
    Channel::new(kraus)
}

/// Applies `ch` to tensor factor `factor` of `op`.
pub fn apply_channel(ch: &Channel, op: &QOperator, factor: usize) -> Result<QOperator> {
    let dims = op.dims().as_slice();
    if factor >= dims.len() {
        return Err(Error::IndexOutOfRange { index: factor, len: dims.len() });
    }
    if dims[factor] != ch.d_in {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} applied to factor of dimension {}",
            ch.d_in, dims[factor]
        )));
    }
    let before: usize = dims[..factor].iter().product();
    let after: usize = dims[factor + 1..].iter().product();
    let id_before = CMatrix::identity(before, before);
    let id_after = CMatrix::identity(after, after);
    let mut new_dims = dims.to_vec();
    new_dims[factor] = ch.d_out;
    let new_dims = Dims::new(new_dims)?;
    let n = new_dims.total();
    let mut out = CMatrix::zeros(n, n);
    for k in &ch.kraus {
        let full = id_before.kronecker(k).kronecker(&id_after);
        out += &full * op.matrix() * full.adjoint();
    }
    QOperator::new(out, new_dims)
}
