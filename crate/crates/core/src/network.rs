//! Linear networks with trusted endpoints and their network assemblages.
//!
//! Sources are indexed left to right; source `i` links party `i` and party
//! `i + 1`. Central measurement `j` acts on the right factor of source `j`
//! and the left factor of source `j + 1`. Outcome tuples list the central
//! outcomes in party order: entry `j` is the outcome of measurement `j`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::operator::{c, negativity, CMatrix, Dims, QOperator};
use crate::povm::Povm;
use crate::{tol, Error, Result};

pub type OutcomeTuple = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearNetwork {
    sources: Vec<QOperator>,
    measurements: Vec<Povm>,
}

impl LinearNetwork {
    pub fn new(sources: Vec<QOperator>, measurements: Vec<Povm>) -> Result<Self> {
        if sources.len() < 2 {
            return Err(Error::InvalidNetwork(format!("need at least 2 sources, got {}", sources.len())));
        }
        if measurements.len() + 1 != sources.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} sources need {} central measurements, got {}",
                sources.len(),
                sources.len() - 1,
                measurements.len()
            )));
        }
        for (i, s) in sources.iter().enumerate() {
            if s.dims().len() != 2 {
                return Err(Error::InvalidNetwork(format!("source {i} has dims {}, expected two factors", s.dims())));
            }
            s.require_density()
                .map_err(|e| Error::InvalidNetwork(format!("source {i} is not a density matrix: {e}")))?;
        }
        for (j, m) in measurements.iter().enumerate() {
            let want = [sources[j].dims().as_slice()[1], sources[j + 1].dims().as_slice()[0]];
            if m.dims().as_slice() != want {
                return Err(Error::DimensionMismatch(format!(
                    "measurement {j} has dims {} but the adjacent factors are {want:?}",
                    m.dims()
                )));
            }
        }
        Ok(LinearNetwork { sources, measurements })
    }

    pub fn bilocal(rho_ab: QOperator, rho_bc: QOperator, m: Povm) -> Result<Self> {
        LinearNetwork::new(vec![rho_ab, rho_bc], vec![m])
    }

    pub fn sources(&self) -> &[QOperator] {
        &self.sources
    }

    pub fn measurements(&self) -> &[Povm] {
        &self.measurements
    }

    /// Number of parties, trusted endpoints included.
    pub fn parties(&self) -> usize {
        self.sources.len() + 1
    }

    /// Reduced states of the two trusted endpoints.
    pub fn endpoint_marginals(&self) -> Result<(QOperator, QOperator)> {
        let a = self.sources[0].partial_trace(&[0])?;
        let z = self.sources[self.sources.len() - 1].partial_trace(&[1])?;
        Ok((a, z))
    }
}

/// Map from central outcome tuple to the sub-normalised operator prepared on
/// the two trusted endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkAssemblage {
    elements: BTreeMap<OutcomeTuple, QOperator>,
    parties: usize,
}

impl NetworkAssemblage {
    /// Validates positivity of every element and total trace one.
    pub fn new(elements: BTreeMap<OutcomeTuple, QOperator>, parties: usize) -> Result<Self> {
        let asm = NetworkAssemblage { elements, parties };
        asm.validate()?;
        Ok(asm)
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .elements
            .values()
            .next()
            .ok_or_else(|| Error::InvalidAssemblage("no elements".into()))?;
        let dims = first.dims().clone();
        if dims.len() != 2 {
            return Err(Error::InvalidAssemblage(format!("elements must be bipartite, got {dims}")));
        }
        let mut total = 0.0;
        for (k, e) in &self.elements {
            if k.len() + 2 != self.parties {
                return Err(Error::InvalidAssemblage(format!(
                    "outcome tuple {k:?} for a {}-party line",
                    self.parties
                )));
            }
            if e.dims() != &dims {
                return Err(Error::InvalidAssemblage(format!("element {k:?} has dims {}", e.dims())));
            }
            let min = e
                .min_eigenvalue()
                .map_err(|err| Error::InvalidAssemblage(format!("element {k:?}: {err}")))?;
            if min < -tol::PSD {
                return Err(Error::InvalidAssemblage(format!("element {k:?} has eigenvalue {min:e}")));
            }
            total += e.trace_re();
        }
        if (total - 1.0).abs() > tol::EQ {
            return Err(Error::InvalidAssemblage(format!("traces sum to {total}")));
        }
        Ok(())
    }

    pub fn elements(&self) -> &BTreeMap<OutcomeTuple, QOperator> {
        &self.elements
    }

    pub fn get(&self, outcomes: &[usize]) -> Option<&QOperator> {
        self.elements.get(outcomes)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn endpoint_dims(&self) -> &Dims {
        self.elements.values().next().expect("non-empty").dims()
    }

    /// `Σ_b σ_b`.
    pub fn total(&self) -> QOperator {
        let mut sum = QOperator::zeros(self.endpoint_dims());
        for e in self.elements.values() {
            sum.add_scaled(e, 1.0).expect("validated dims");
        }
        sum
    }

    /// Distance of `Σ_b σ_b` from the product of its own marginals.
    pub fn product_marginal_defect(&self) -> Result<f64> {
        let total = self.total();
        let product = total.partial_trace(&[0])?.tensor(&total.partial_trace(&[1])?);
        total.max_abs_diff(&product)
    }

    /// Largest element-wise max-entry distance; outcome sets must agree.
    pub fn max_abs_diff(&self, other: &NetworkAssemblage) -> Result<f64> {
        if self.parties != other.parties || !self.elements.keys().eq(other.elements.keys()) {
            return Err(Error::DimensionMismatch("assemblages have different outcome sets".into()));
        }
        let mut worst: f64 = 0.0;
        for (k, e) in &self.elements {
            worst = worst.max(e.max_abs_diff(&other.elements[k])?);
        }
        Ok(worst)
    }

    /// Negativity of each element across the endpoint cut.
    pub fn negativities(&self) -> Result<BTreeMap<OutcomeTuple, f64>> {
        self.elements.iter().map(|(k, e)| Ok((k.clone(), negativity(e, &[1])?))).collect()
    }
}

/// Contracts `left ⊗ right` with a central effect on the inner factors:
/// `Tr_{pq}([𝟙 ⊗ M ⊗ 𝟙] left ⊗ right)`, without forming the full product.
///
/// `left` has dims `[a, p]`, `effect` `[p, q]`, `right` `[q, z]`; the result
/// has dims `[a, z]`.
pub fn contract(left: &QOperator, effect: &QOperator, right: &QOperator) -> Result<QOperator> {
    let l = left.dims().as_slice();
    let m = effect.dims().as_slice();
    let r = right.dims().as_slice();
    if l.len() != 2 || m.len() != 2 || r.len() != 2 || l[1] != m[0] || m[1] != r[0] {
        return Err(Error::DimensionMismatch(format!(
            "cannot contract {} - {} - {}",
            left.dims(),
            effect.dims(),
            right.dims()
        )));
    }
    let (da, dp, dq, dz) = (l[0], l[1], m[1], r[1]);
    let lm = left.matrix();
    let em = effect.matrix();
    let rm = right.matrix();
    // X[(a, a'), (q, q')] = Σ_{p, p'} M[(p, q), (p', q')] L[(a, p'), (a', p)]
    let mut x = vec![Complex64::new(0.0, 0.0); da * da * dq * dq];
    for p in 0..dp {
        for q in 0..dq {
            for pp in 0..dp {
                for qq in 0..dq {
                    let mv = em[(p * dq + q, pp * dq + qq)];
                    if mv.norm_sqr() == 0.0 {
                        continue;
                    }
                    for a in 0..da {
                        for aa in 0..da {
                            let lv = lm[(a * dp + pp, aa * dp + p)];
                            x[((a * da + aa) * dq + q) * dq + qq] += mv * lv;
                        }
                    }
                }
            }
        }
    }
    // out[(a, z), (a', z')] = Σ_{q, q'} X[(a, a'), (q, q')] R[(q', z), (q, z')]
    let n = da * dz;
    let mut out = CMatrix::zeros(n, n);
    for a in 0..da {
        for aa in 0..da {
            for q in 0..dq {
                for qq in 0..dq {
                    let xv = x[((a * da + aa) * dq + q) * dq + qq];
                    if xv.norm_sqr() == 0.0 {
                        continue;
                    }
                    for z in 0..dz {
                        for zz in 0..dz {
                            out[(a * dz + z, aa * dz + zz)] += xv * rm[(qq * dz + z, q * dz + zz)];
                        }
                    }
                }
            }
        }
    }
    QOperator::new(out, Dims::new(vec![da, dz])?)
}

/// Direction of the sequential contraction along the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionOrder {
    LeftToRight,
    RightToLeft,
}

/// `σ_b = Tr_{BB′}([𝟙 ⊗ M_b ⊗ 𝟙] ρ^{AB} ⊗ ρ^{B′C})`.
pub fn bilocal_assemblage(rho_ab: &QOperator, rho_bc: &QOperator, m: &Povm) -> Result<NetworkAssemblage> {
    line_assemblage(&LinearNetwork::bilocal(rho_ab.clone(), rho_bc.clone(), m.clone())?)
}

pub fn line_assemblage(net: &LinearNetwork) -> Result<NetworkAssemblage> {
    line_assemblage_ordered(net, ContractionOrder::LeftToRight)
}

/// Network assemblage by pairwise contraction in the given order. Peak
/// operator size is that of one source times one partial result.
pub fn line_assemblage_ordered(net: &LinearNetwork, order: ContractionOrder) -> Result<NetworkAssemblage> {
    let k = net.sources.len();
    let partial: Vec<(OutcomeTuple, QOperator)> = match order {
        ContractionOrder::LeftToRight => {
            let mut acc = vec![(Vec::new(), net.sources[0].clone())];
            for j in 0..k - 1 {
                let m = &net.measurements[j];
                let next = &net.sources[j + 1];
                let mut grown = Vec::with_capacity(acc.len() * m.len());
                for (prefix, w) in &acc {
                    for (label, effect) in m.iter() {
                        let mut key = prefix.clone();
                        key.push(label);
                        grown.push((key, contract(w, effect, next)?));
                    }
                }
                acc = grown;
            }
            acc
        }
        ContractionOrder::RightToLeft => {
            let mut acc = vec![(Vec::new(), net.sources[k - 1].clone())];
            for j in (0..k - 1).rev() {
                let m = &net.measurements[j];
                let prev = &net.sources[j];
                let mut grown = Vec::with_capacity(acc.len() * m.len());
                for (suffix, w) in &acc {
                    for (label, effect) in m.iter() {
                        let mut key = vec![label];
                        key.extend_from_slice(suffix);
                        grown.push((key, contract(prev, effect, w)?));
                    }
                }
                acc = grown;
            }
            acc
        }
    };
    let elements = partial
        .into_iter()
        .map(|(key, op)| {
            // Exact results are Hermitian; drop rounding in the anti-Hermitian part.
            let h = (op.matrix() + op.matrix().adjoint()) * c(0.5);
            Ok((key, QOperator::new(h, op.dims().clone())?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    NetworkAssemblage::new(elements, k + 1)
}

/// A ring of independent sources in which a single trusted party `T` holds
/// the left factor of the first source and the right factor of the last;
/// every other party is untrusted with a fixed measurement.
///
/// Since `T`'s statistics are locally tomographic, the ring is equivalent
/// to the line obtained by splitting `T` into two trusted endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustedRing {
    line: LinearNetwork,
}

impl TrustedRing {
    pub fn new(sources: Vec<QOperator>, measurements: Vec<Povm>) -> Result<Self> {
        Ok(TrustedRing { line: LinearNetwork::new(sources, measurements)? })
    }

    /// The equivalent line network with `T` split into two endpoints.
    pub fn unwrap_to_line(&self) -> &LinearNetwork {
        &self.line
    }

    /// Assemblage on `T`'s joint system with its two factors ordered as
    /// `trusted_order`: `[Left, Right]` keeps line order, `[Right, Left]`
    /// places the factor from the last source first.
    pub fn assemblage(&self, trusted_order: [crate::Side; 2]) -> Result<NetworkAssemblage> {
        let line = line_assemblage(&self.line)?;
        if trusted_order[0] == trusted_order[1] {
            return Err(Error::InvalidParameter("trusted factor order must name both sides".into()));
        }
        if trusted_order == [crate::Side::Left, crate::Side::Right] {
            return Ok(line);
        }
        let elements = line
            .elements
            .iter()
            .map(|(k, e)| Ok((k.clone(), e.permute(&[1, 0])?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        NetworkAssemblage::new(elements, line.parties)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{bell_swap_povm, Povm};
    use crate::random::{random_density, random_network, random_povm, seeded};
    use crate::states::{dew, maximally_mixed, werner, DewParams};

    fn d(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    #[test]
    fn product_sources_factorise() {
        let mut rng = seeded(4);
        let (sa, sb) = (random_density(&d(&[2]), &mut rng), random_density(&d(&[3]), &mut rng));
        let (sb2, sc) = (random_density(&d(&[2]), &mut rng), random_density(&d(&[3]), &mut rng));
        let m = random_povm(&d(&[3, 2]), 3, &mut rng);
        let asm = bilocal_assemblage(&sa.tensor(&sb), &sb2.tensor(&sc), &m).unwrap();
        let mid = sb.tensor(&sb2);
        for (label, effect) in m.iter() {
            let want = sa.tensor(&sc).scale(effect.overlap(&mid).unwrap());
            assert!(asm.get(&[label]).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
        }
    }

    #[test]
    fn dew_swap_identity() {
        for &(eta, omega) in &[(1.0, 1.0), (0.3, 0.7), (0.8, 0.2), (0.0, 0.5)] {
            let s = dew(DewParams::new(eta, omega).unwrap()).unwrap();
            let asm = bilocal_assemblage(&s, &s, &bell_swap_povm()).unwrap();
            let want = dew(DewParams::new(eta, omega * omega).unwrap()).unwrap().scale(eta * eta / 4.0);
            assert!(asm.get(&[0]).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
        }
    }

    #[test]
    fn dew_chain_of_three() {
        let (eta, omega) = (0.6, 0.9);
        let s = dew(DewParams::new(eta, omega).unwrap()).unwrap();
        let net = LinearNetwork::new(vec![s.clone(), s.clone(), s], vec![bell_swap_povm(), bell_swap_povm()]).unwrap();
        let asm = line_assemblage(&net).unwrap();
        let f = eta * eta / 4.0;
        let want = dew(DewParams::new(eta, omega.powi(3)).unwrap()).unwrap().scale(f * f);
        assert!(asm.get(&[0, 0]).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn maximally_mixed_sources() {
        let mut rng = seeded(8);
        let src = |dims: &[usize]| maximally_mixed(&d(dims));
        let m1 = random_povm(&d(&[3, 2]), 2, &mut rng);
        let m2 = random_povm(&d(&[2, 2]), 3, &mut rng);
        let net = LinearNetwork::new(vec![src(&[2, 3]), src(&[2, 2]), src(&[2, 3])], vec![m1, m2]).unwrap();
        let asm = line_assemblage(&net).unwrap();
        let product = maximally_mixed(&d(&[2, 3]));
        for e in asm.elements().values() {
            assert!(e.max_abs_diff(&product.scale(e.trace_re())).unwrap() < 1e-14);
        }
    }

    #[test]
    fn trivial_measurement_gives_product_of_marginals() {
        let mut rng = seeded(13);
        let a = random_density(&d(&[2, 3]), &mut rng);
        let b = random_density(&d(&[3, 2]), &mut rng);
        let asm = bilocal_assemblage(&a, &b, &Povm::trivial(&d(&[3, 3]))).unwrap();
        assert_eq!(asm.elements().len(), 1);
        let want = a.partial_trace(&[0]).unwrap().tensor(&b.partial_trace(&[1]).unwrap());
        assert!(asm.get(&[0]).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn contraction_orders_agree() {
        let mut rng = seeded(17);
        for n in 3..=5 {
            let net = random_network(n, 3, &mut rng);
            let lr = line_assemblage_ordered(&net, ContractionOrder::LeftToRight).unwrap();
            let rl = line_assemblage_ordered(&net, ContractionOrder::RightToLeft).unwrap();
            assert!(lr.max_abs_diff(&rl).unwrap() < 1e-13);
            assert!(lr.product_marginal_defect().unwrap() < 1e-13);
        }
    }

    #[test]
    fn network_validation() {
        let w = werner(0.5).unwrap();
        assert!(LinearNetwork::new(vec![w.clone()], vec![]).is_err());
        assert!(LinearNetwork::new(vec![w.clone(), w.clone()], vec![bell_swap_povm()]).is_err());
        assert!(LinearNetwork::new(vec![w.clone(), w.clone()], vec![]).is_err());
        assert!(LinearNetwork::new(vec![w.scale(2.0), w.clone()], vec![Povm::trivial(&d(&[2, 2]))]).is_err());
    }

    #[test]
    fn assemblage_validation() {
        let mut el = BTreeMap::new();
        el.insert(vec![0], werner(0.5).unwrap().scale(0.5));
        assert!(NetworkAssemblage::new(el.clone(), 3).is_err());
        el.insert(vec![1], werner(0.2).unwrap().scale(0.5));
        assert!(NetworkAssemblage::new(el.clone(), 3).is_ok());
        assert!(NetworkAssemblage::new(el, 4).is_err());
    }

    #[test]
    fn ring_reorders_trusted_factors() {
        let mut rng = seeded(2);
        let net = random_network(4, 2, &mut rng);
        let ring = TrustedRing::new(net.sources().to_vec(), net.measurements().to_vec()).unwrap();
        let same = ring.assemblage([crate::Side::Left, crate::Side::Right]).unwrap();
        assert_eq!(same, line_assemblage(&net).unwrap());
        let swapped = ring.assemblage([crate::Side::Right, crate::Side::Left]).unwrap();
        for (k, e) in swapped.elements() {
            assert_eq!(e.permute(&[1, 0]).unwrap().max_abs_diff(same.get(k).unwrap()).unwrap(), 0.0);
        }
    }
}
