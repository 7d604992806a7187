//! NLHS models built from structural assumptions on the sources.
//!
//! A separable source hands each adjacent untrusted party an effective
//! input: the hidden state `τ_γ` it sends to that party turns the fixed
//! bipartite measurement into a family of measurements `M_{b|γ}` on the
//! neighbouring source. An unsteerable neighbour then has an LHS model for
//! that family whose hidden states are in turn effective inputs for the
//! next party, and a neighbour receiving inputs on both sides only needs a
//! local model.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::lhs::{LhsProvider, LhvProvider};
use super::model::{reconstruct, NlhsModel, ResponseTable};
use super::separable::SeparableDecomposition;
use crate::assemblage::standard_assemblage;
use crate::network::{line_assemblage, LinearNetwork};
use crate::operator::QOperator;
use crate::povm::{induced_measurement, Povm};
use crate::{tol, Error, Result, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Sep,
    Loc,
    /// Unsteerable towards the left neighbour.
    UnsLeft,
    /// Unsteerable towards the right neighbour.
    UnsRight,
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotKind::Sep => "SEP",
            SlotKind::Loc => "LOC",
            SlotKind::UnsLeft => "UNS<-",
            SlotKind::UnsRight => "UNS->",
        })
    }
}

/// A source together with the structural property used to model it.
#[derive(Clone)]
pub enum Slot {
    Sep(SeparableDecomposition),
    /// Unsteerable towards `toward`: measurements on the other factor admit
    /// an LHS model with hidden states on the `toward` factor.
    Uns { state: QOperator, toward: Side, provider: Arc<dyn LhsProvider> },
    /// Local for the finite sets of measurements it ends up receiving.
    Loc { state: QOperator, provider: Arc<dyn LhvProvider> },
}

impl fmt::Debug for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Sep(d) => write!(f, "Sep({} terms)", d.len()),
            Slot::Uns { toward, provider, .. } => write!(f, "Uns({toward:?}, {})", provider.name()),
            Slot::Loc { provider, .. } => write!(f, "Loc({})", provider.name()),
        }
    }
}

impl Slot {
    pub fn kind(&self) -> SlotKind {
        match self {
            Slot::Sep(_) => SlotKind::Sep,
            Slot::Loc { .. } => SlotKind::Loc,
            Slot::Uns { toward: Side::Left, .. } => SlotKind::UnsLeft,
            Slot::Uns { toward: Side::Right, .. } => SlotKind::UnsRight,
        }
    }

    pub fn state(&self) -> QOperator {
        match self {
            Slot::Sep(d) => d.to_operator(),
            Slot::Uns { state, .. } | Slot::Loc { state, .. } => state.clone(),
        }
    }
}

/// The network whose sources are the slot states.
pub fn slots_network(slots: &[Slot], measurements: &[Povm]) -> Result<LinearNetwork> {
    LinearNetwork::new(slots.iter().map(Slot::state).collect(), measurements.to_vec())
}

/// Largest element deviation between the model and the quantum assemblage.
pub fn model_deviation(model: &NlhsModel, net: &LinearNetwork) -> Result<f64> {
    reconstruct(model)?.max_abs_diff(&line_assemblage(net)?)
}

/// `p(b | λ, κ) = Tr(M_b τ_λ ⊗ τ′_κ)`.
fn direct_response(m: &Povm, left: &[QOperator], right: &[QOperator]) -> Result<ResponseTable> {
    let probs = left
        .iter()
        .map(|l| right.iter().map(|r| m.probabilities(&l.tensor(r))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ResponseTable::new(m.labels().to_vec(), probs)
}

struct LhsStep {
    hidden: Vec<f64>,
    response: ResponseTable,
    states: Vec<QOperator>,
}

/// Source `slot` is unsteerable towards `toward`. The measurement on its
/// other side is fed the hidden states `inputs` of the neighbouring source,
/// and the LHS model of the induced family supplies that measurement's
/// response and this source's hidden states on the `toward` factor.
fn lhs_step(
    slot: usize,
    state: &QOperator,
    provider: &dyn LhsProvider,
    toward: Side,
    m: &Povm,
    inputs: &[QOperator],
) -> Result<LhsStep> {
    // The neighbour holds the factor of `m` facing away from `toward`.
    let fed = toward.opposite();
    let induced = inputs.iter().map(|s| induced_measurement(m, s, fed)).collect::<Result<Vec<_>>>()?;
    let not_found = |reason: String| Error::ModelNotFound { slot, reason };
    let model = provider
        .find_lhs(state, &induced, toward)?
        .ok_or_else(|| not_found(format!("{} provider found no LHS model for {} inputs", provider.name(), inputs.len())))?;
    let target = standard_assemblage(state, &induced, toward.opposite())?;
    let dev = model.assemblage()?.max_abs_diff(&target)?;
    if dev > tol::EQ {
        return Err(not_found(format!("{} provider returned a model off by {dev:e}", provider.name())));
    }
    let hidden = model.hidden().to_vec();
    let probs = match toward {
        // Rows indexed by the left neighbour's hidden value.
        Side::Right => model.responses().to_vec(),
        Side::Left => (0..hidden.len())
            .map(|mu| model.responses().iter().map(|by_mu| by_mu[mu].clone()).collect())
            .collect(),
    };
    Ok(LhsStep { hidden, response: ResponseTable::new(m.labels().to_vec(), probs)?, states: model.states().to_vec() })
}

struct LhvStep {
    hidden: Vec<f64>,
    left_response: ResponseTable,
    right_response: ResponseTable,
}

/// Source `slot` receives effective inputs on both sides and is modelled
/// locally; both adjacent measurements get their responses from the model.
#[allow(clippy::too_many_arguments)]
fn lhv_step(
    slot: usize,
    state: &QOperator,
    provider: &dyn LhvProvider,
    m_left: &Povm,
    left_inputs: &[QOperator],
    m_right: &Povm,
    right_inputs: &[QOperator],
) -> Result<LhvStep> {
    let lx = left_inputs.iter().map(|s| induced_measurement(m_left, s, Side::Left)).collect::<Result<Vec<_>>>()?;
    let ry = right_inputs.iter().map(|s| induced_measurement(m_right, s, Side::Right)).collect::<Result<Vec<_>>>()?;
    let model = provider.find_lhv(state, &lx, &ry)?.ok_or_else(|| Error::ModelNotFound {
        slot,
        reason: format!("{} provider found no local model for {}x{} settings", provider.name(), lx.len(), ry.len()),
    })?;
    let hidden = model.hidden().to_vec();
    let left_response = ResponseTable::new(m_left.labels().to_vec(), model.left().to_vec())?;
    let right_probs = (0..hidden.len())
        .map(|mu| model.right().iter().map(|by_mu| by_mu[mu].clone()).collect())
        .collect();
    let right_response = ResponseTable::new(m_right.labels().to_vec(), right_probs)?;
    Ok(LhvStep { hidden, left_response, right_response })
}

/// A separable source next to a source unsteerable towards its trusted
/// party: the separable hidden states feed the central measurement, whose
/// induced family has an LHS model on the unsteerable source.
pub fn build_sep_unsteer_bilocal(
    sep: &SeparableDecomposition,
    rho_bc: &QOperator,
    m: &Povm,
    lhs: &dyn LhsProvider,
) -> Result<NlhsModel> {
    LinearNetwork::bilocal(sep.to_operator(), rho_bc.clone(), m.clone())?;
    let step = lhs_step(1, rho_bc, lhs, Side::Right, m, sep.rights())?;
    NlhsModel::new(vec![sep.weights().to_vec(), step.hidden], vec![step.response], sep.lefts().to_vec(), step.states)
}

/// Four-party patterns with three sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrianglePattern {
    /// SEP, LOC, SEP.
    SepLocSep,
    /// UNS←, SEP, UNS→.
    UnsSepUns,
    /// SEP, UNS→, UNS→.
    SepUnsUns,
    /// UNS←, UNS←, SEP.
    UnsUnsSep,
}

impl TrianglePattern {
    pub fn kinds(self) -> [SlotKind; 3] {
        use SlotKind::*;
        match self {
            TrianglePattern::SepLocSep => [Sep, Loc, Sep],
            TrianglePattern::UnsSepUns => [UnsLeft, Sep, UnsRight],
            TrianglePattern::SepUnsUns => [Sep, UnsRight, UnsRight],
            TrianglePattern::UnsUnsSep => [UnsLeft, UnsLeft, Sep],
        }
    }
}

fn sep_of(slot: &Slot) -> &SeparableDecomposition {
    match slot {
        Slot::Sep(d) => d,
        _ => unreachable!("kinds checked"),
    }
}

fn uns_of(slot: &Slot) -> (&QOperator, &dyn LhsProvider) {
    match slot {
        Slot::Uns { state, provider, .. } => (state, provider.as_ref()),
        _ => unreachable!("kinds checked"),
    }
}

/// NLHS model for a four-party line following one of the fixed patterns.
pub fn build_triangle_patterns(pattern: TrianglePattern, slots: &[Slot], measurements: &[Povm]) -> Result<NlhsModel> {
    if slots.len() != 3 || measurements.len() != 2 {
        return Err(Error::InvalidNetwork(format!(
            "pattern needs 3 sources and 2 measurements, got {} and {}",
            slots.len(),
            measurements.len()
        )));
    }
    let got: Vec<SlotKind> = slots.iter().map(Slot::kind).collect();
    if got != pattern.kinds() {
        return Err(Error::InvalidParameter(format!("slots {got:?} do not form pattern {pattern:?}")));
    }
    slots_network(slots, measurements)?;
    let (m1, m2) = (&measurements[0], &measurements[1]);
    match pattern {
        TrianglePattern::SepLocSep => {
            let (d0, d2) = (sep_of(&slots[0]), sep_of(&slots[2]));
            let Slot::Loc { state, provider } = &slots[1] else { unreachable!("kinds checked") };
            let step = lhv_step(1, state, provider.as_ref(), m1, d0.rights(), m2, d2.lefts())?;
            NlhsModel::new(
                vec![d0.weights().to_vec(), step.hidden, d2.weights().to_vec()],
                vec![step.left_response, step.right_response],
                d0.lefts().to_vec(),
                d2.rights().to_vec(),
            )
        }
        TrianglePattern::UnsSepUns => {
            let d1 = sep_of(&slots[1]);
            let (s0, p0) = uns_of(&slots[0]);
            let (s2, p2) = uns_of(&slots[2]);
            let left = lhs_step(0, s0, p0, Side::Left, m1, d1.lefts())?;
            let right = lhs_step(2, s2, p2, Side::Right, m2, d1.rights())?;
            NlhsModel::new(
                vec![left.hidden, d1.weights().to_vec(), right.hidden],
                vec![left.response, right.response],
                left.states,
                right.states,
            )
        }
        TrianglePattern::SepUnsUns => {
            let d0 = sep_of(&slots[0]);
            let (s1, p1) = uns_of(&slots[1]);
            let (s2, p2) = uns_of(&slots[2]);
            let mid = lhs_step(1, s1, p1, Side::Right, m1, d0.rights())?;
            let last = lhs_step(2, s2, p2, Side::Right, m2, &mid.states)?;
            NlhsModel::new(
                vec![d0.weights().to_vec(), mid.hidden, last.hidden],
                vec![mid.response, last.response],
                d0.lefts().to_vec(),
                last.states,
            )
        }
        TrianglePattern::UnsUnsSep => {
            let d2 = sep_of(&slots[2]);
            let (s0, p0) = uns_of(&slots[0]);
            let (s1, p1) = uns_of(&slots[1]);
            let mid = lhs_step(1, s1, p1, Side::Left, m2, d2.lefts())?;
            let first = lhs_step(0, s0, p0, Side::Left, m1, &mid.states)?;
            NlhsModel::new(
                vec![first.hidden, mid.hidden, d2.weights().to_vec()],
                vec![first.response, mid.response],
                first.states,
                d2.rights().to_vec(),
            )
        }
    }
}

/// One step of the percolation schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum ResolutionStep {
    /// Source `index` was modelled, fixing the responses of the listed
    /// measurements.
    Source { index: usize, kind: SlotKind, measurements: Vec<usize> },
    /// Measurement `index` received explicit hidden states on both sides.
    Measurement { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationModel {
    pub model: NlhsModel,
    pub resolution_order: Vec<ResolutionStep>,
}

#[derive(Default)]
struct SourceState {
    hidden: Option<Vec<f64>>,
    left_port: Option<Vec<QOperator>>,
    right_port: Option<Vec<QOperator>>,
}

/// Builds an NLHS model on a line of any length by propagating effective
/// inputs outwards from separable sources. Sweeps the line until nothing
/// changes; a pattern in which some slot never receives the inputs it
/// needs is reported as unresolvable, distinct from provider failure.
pub fn build_percolation_line(slots: &[Slot], measurements: &[Povm]) -> Result<PercolationModel> {
    slots_network(slots, measurements)?;
    let k = slots.len();
    for (i, s) in slots.iter().enumerate() {
        let bad = match s.kind() {
            SlotKind::UnsRight => i == 0,
            SlotKind::UnsLeft => i + 1 == k,
            SlotKind::Loc => i == 0 || i + 1 == k,
            SlotKind::Sep => false,
        };
        if bad {
            return Err(Error::PatternUnresolvable(format!(
                "{} at position {i} has no untrusted neighbour to receive inputs from on the required side",
                s.kind()
            )));
        }
    }
    let mut src: Vec<SourceState> = (0..k).map(|_| SourceState::default()).collect();
    let mut responses: Vec<Option<ResponseTable>> = vec![None; k - 1];
    let mut order = Vec::new();
    loop {
        let mut progress = false;
        for i in 0..k {
            if src[i].hidden.is_some() {
                continue;
            }
            match &slots[i] {
                Slot::Sep(d) => {
                    src[i] = SourceState {
                        hidden: Some(d.weights().to_vec()),
                        left_port: Some(d.lefts().to_vec()),
                        right_port: Some(d.rights().to_vec()),
                    };
                    order.push(ResolutionStep::Source { index: i, kind: SlotKind::Sep, measurements: vec![] });
                    progress = true;
                }
                Slot::Uns { state, toward: Side::Right, provider } => {
                    let Some(inputs) = src[i - 1].right_port.clone() else { continue };
                    let step = lhs_step(i, state, provider.as_ref(), Side::Right, &measurements[i - 1], &inputs)?;
                    responses[i - 1] = Some(step.response);
                    src[i].hidden = Some(step.hidden);
                    src[i].right_port = Some(step.states);
                    order.push(ResolutionStep::Source { index: i, kind: SlotKind::UnsRight, measurements: vec![i - 1] });
                    progress = true;
                }
                Slot::Uns { state, toward: Side::Left, provider } => {
                    let Some(inputs) = src[i + 1].left_port.clone() else { continue };
                    let step = lhs_step(i, state, provider.as_ref(), Side::Left, &measurements[i], &inputs)?;
                    responses[i] = Some(step.response);
                    src[i].hidden = Some(step.hidden);
                    src[i].left_port = Some(step.states);
                    order.push(ResolutionStep::Source { index: i, kind: SlotKind::UnsLeft, measurements: vec![i] });
                    progress = true;
                }
                Slot::Loc { state, provider } => {
                    let (Some(li), Some(ri)) = (src[i - 1].right_port.clone(), src[i + 1].left_port.clone()) else {
                        continue;
                    };
                    let step =
                        lhv_step(i, state, provider.as_ref(), &measurements[i - 1], &li, &measurements[i], &ri)?;
                    responses[i - 1] = Some(step.left_response);
                    responses[i] = Some(step.right_response);
                    src[i].hidden = Some(step.hidden);
                    order.push(ResolutionStep::Source { index: i, kind: SlotKind::Loc, measurements: vec![i - 1, i] });
                    progress = true;
                }
            }
        }
        for j in 0..k - 1 {
            if responses[j].is_some() {
                continue;
            }
            if let (Some(l), Some(r)) = (&src[j].right_port, &src[j + 1].left_port) {
                responses[j] = Some(direct_response(&measurements[j], l, r)?);
                order.push(ResolutionStep::Measurement { index: j });
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let stuck: Vec<String> = (0..k)
        .filter(|&i| src[i].hidden.is_none())
        .map(|i| format!("source {i} ({})", slots[i].kind()))
        .chain((0..k - 1).filter(|&j| responses[j].is_none()).map(|j| format!("measurement {j}")))
        .collect();
    if !stuck.is_empty() {
        return Err(Error::PatternUnresolvable(format!("no effective inputs reach {}", stuck.join(", "))));
    }
    let left_states = src[0].left_port.take().expect("endpoint slots checked");
    let right_states = src[k - 1].right_port.take().expect("endpoint slots checked");
    let model = NlhsModel::new(
        src.into_iter().map(|s| s.hidden.expect("resolved")).collect(),
        responses.into_iter().map(|r| r.expect("resolved")).collect(),
        left_states,
        right_states,
    )?;
    Ok(PercolationModel { model, resolution_order: order })
}
