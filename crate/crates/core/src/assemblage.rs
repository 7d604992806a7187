//! Standard (input-indexed) assemblages and the conversions between
//! network assemblages, input-less assemblages and conditional ones.

use std::collections::BTreeMap;

use crate::network::{LinearNetwork, NetworkAssemblage, OutcomeTuple};
use crate::operator::{Dims, QOperator};
use crate::povm::{input_encoded_measurement, Povm};
use crate::states::classical_correlated;
use crate::{tol, Error, Result, Side};

/// Operators on one trusted system keyed by `(outcomes, x)`.
///
/// Depending on context this is a conditional assemblage `σ_{a|x}` or an
/// input-less joint one `σ_{a,x}`, where `x` is itself an outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    elements: BTreeMap<(OutcomeTuple, usize), QOperator>,
}

impl Assemblage {
    pub fn new(elements: BTreeMap<(OutcomeTuple, usize), QOperator>) -> Result<Self> {
        let first = elements
            .values()
            .next()
            .ok_or_else(|| Error::InvalidAssemblage("no elements".into()))?;
        let dims = first.dims().clone();
        if let Some((k, _)) = elements.iter().find(|(_, e)| e.dims() != &dims) {
            return Err(Error::InvalidAssemblage(format!("element {k:?} has mismatched dims")));
        }
        Ok(Assemblage { elements })
    }

    pub fn elements(&self) -> &BTreeMap<(OutcomeTuple, usize), QOperator> {
        &self.elements
    }

    pub fn get(&self, outcomes: &[usize], x: usize) -> Option<&QOperator> {
        self.elements.get(&(outcomes.to_vec(), x))
    }

    pub fn dims(&self) -> &Dims {
        self.elements.values().next().expect("non-empty").dims()
    }

    /// Distinct `x` values in ascending order.
    pub fn inputs(&self) -> Vec<usize> {
        let mut xs: Vec<usize> = self.elements.keys().map(|(_, x)| *x).collect();
        xs.dedup();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// `Σ_a σ_{a|x}` for one `x`.
    pub fn marginal(&self, x: usize) -> QOperator {
        let mut sum = QOperator::zeros(self.dims());
        for ((_, xx), e) in &self.elements {
            if *xx == x {
                sum.add_scaled(e, 1.0).expect("validated dims");
            }
        }
        sum
    }

    pub fn total_trace(&self) -> f64 {
        self.elements.values().map(QOperator::trace_re).sum()
    }

    pub fn max_abs_diff(&self, other: &Assemblage) -> Result<f64> {
        if !self.elements.keys().eq(other.elements.keys()) {
            return Err(Error::DimensionMismatch("assemblages have different keys".into()));
        }
        let mut worst: f64 = 0.0;
        for (k, e) in &self.elements {
            worst = worst.max(e.max_abs_diff(&other.elements[k])?);
        }
        Ok(worst)
    }
}

/// `σ_{a|x} = Tr_side(M_{a|x} ⊗ 𝟙 ρ)`, where `side` is the measured factor.
pub fn standard_assemblage(rho: &QOperator, measurements: &[Povm], side: Side) -> Result<Assemblage> {
    let rd = rho.dims().as_slice();
    if rd.len() != 2 {
        return Err(Error::DimensionMismatch(format!("bipartite state expected, got {}", rho.dims())));
    }
    if measurements.is_empty() {
        return Err(Error::InvalidParameter("no measurements".into()));
    }
    let steered = Dims::new(vec![rd[side.opposite().index()]])?;
    let mut elements = BTreeMap::new();
    for (x, m) in measurements.iter().enumerate() {
        if m.dims().as_slice() != [rd[side.index()]] {
            return Err(Error::DimensionMismatch(format!(
                "measurement {x} has dims {} for a factor of dimension {}",
                m.dims(),
                rd[side.index()]
            )));
        }
        for (a, effect) in m.iter() {
            let full = match side {
                Side::Left => effect.tensor(&QOperator::identity(&steered)),
                Side::Right => QOperator::identity(&steered).tensor(effect),
            };
            let s = full.mul(rho)?.partial_trace(&[side.opposite().index()])?;
            elements.insert((vec![a], x), hermitize(&s)?);
        }
    }
    Assemblage::new(elements)
}

fn hermitize(op: &QOperator) -> Result<QOperator> {
    let m = (op.matrix() + op.matrix().adjoint()) * crate::operator::c(0.5);
    QOperator::new(m, op.dims().clone())
}

/// `σ_{b⃗,x} = Tr_endpoint([M_x ⊗ 𝟙] σ_{b⃗})`: a trusted endpoint measures
/// its system and the outcome `x` is kept as a label.
pub fn condition_on_trusted_measurement(asm: &NetworkAssemblage, m: &Povm, endpoint: Side) -> Result<Assemblage> {
    let ed = asm.endpoint_dims().as_slice();
    if m.dims().as_slice() != [ed[endpoint.index()]] {
        return Err(Error::DimensionMismatch(format!(
            "measurement dims {} for endpoint of dimension {}",
            m.dims(),
            ed[endpoint.index()]
        )));
    }
    let other = Dims::new(vec![ed[endpoint.opposite().index()]])?;
    let mut elements = BTreeMap::new();
    for (b, sigma) in asm.elements() {
        for (x, effect) in m.iter() {
            let full = match endpoint {
                Side::Left => effect.tensor(&QOperator::identity(&other)),
                Side::Right => QOperator::identity(&other).tensor(effect),
            };
            let s = full.mul(sigma)?.partial_trace(&[endpoint.opposite().index()])?;
            elements.insert((b.clone(), x), hermitize(&s)?);
        }
    }
    Assemblage::new(elements)
}

/// Input distribution and conditional assemblage of an input-less one:
/// `p(x) = Tr Σ_a σ_{a,x}` and `σ_{a|x} = σ_{a,x} / p(x)`.
pub fn lift_inputless_to_conditional(joint: &Assemblage) -> Result<(BTreeMap<usize, f64>, Assemblage)> {
    let total = joint.total_trace();
    if (total - 1.0).abs() > tol::EQ {
        return Err(Error::InvalidAssemblage(format!("input-less assemblage has total trace {total}")));
    }
    let mut p = BTreeMap::new();
    for x in joint.inputs() {
        let px = joint.marginal(x).trace_re();
        if px <= 1e-14 {
            return Err(Error::ZeroProbabilityInput { input: x });
        }
        p.insert(x, px);
    }
    let elements = joint
        .elements()
        .iter()
        .map(|(k, e)| (k.clone(), e.scale(1.0 / p[&k.1])))
        .collect();
    Ok((p, Assemblage::new(elements)?))
}

/// A source `ρ` whose untrusted end receives an input `x` selecting one of
/// `measurements`; the other end is trusted.
#[derive(Debug, Clone)]
pub struct InputScenario {
    pub source: QOperator,
    pub measurements: Vec<Povm>,
    /// Which factor of `source` the untrusted party holds.
    pub measured: Side,
}

/// Input-less network equivalent to an input scenario: the input is supplied
/// by an extra classically correlated source and the untrusted party
/// measures `Σ_x |x⟩⟨x| ⊗ M_{b|x}`. The new flag system sits at the
/// endpoint opposite the original trusted party.
#[derive(Debug, Clone)]
pub struct InputExtension {
    pub network: LinearNetwork,
    pub inputs: usize,
    /// Endpoint holding the classical input flag.
    pub flag_endpoint: Side,
}

/// Replaces an untrusted input by the outcome of an added untrusted party
/// sharing a classically correlated source.
pub fn untrusted_input_to_outcome(scenario: &InputScenario) -> Result<InputExtension> {
    let d = scenario.measurements.len();
    if d == 0 {
        return Err(Error::UnsupportedTopology("party without measurements".into()));
    }
    if scenario.source.dims().len() != 2 {
        return Err(Error::UnsupportedTopology(format!(
            "input party must hold one factor of a bipartite source, got dims {}",
            scenario.source.dims()
        )));
    }
    let flag_source = if d == 1 {
        QOperator::identity(&Dims::new(vec![1, 1])?)
    } else {
        classical_correlated(d)?
    };
    let encoded = input_encoded_measurement(&scenario.measurements, d)?;
    let (network, flag_endpoint) = match scenario.measured {
        Side::Left => (LinearNetwork::bilocal(flag_source, scenario.source.clone(), encoded)?, Side::Left),
        Side::Right => {
            let mirrored = encoded.effects().iter().map(|e| e.permute(&[1, 0])).collect::<Result<Vec<_>>>()?;
            let m = Povm::with_labels(mirrored, encoded.labels().to_vec())?;
            (LinearNetwork::bilocal(scenario.source.clone(), flag_source, m)?, Side::Right)
        }
    };
    Ok(InputExtension { network, inputs: d, flag_endpoint })
}
