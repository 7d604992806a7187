//! JSON instantiation files for the NLHS constructors.
//!
//! A fixture names a pattern and lists the sources left to right, each
//! with the structural property used to model it, and the central
//! measurements. States, measurements, decompositions and providers are
//! objects tagged by `"kind"`. See `docs/fixtures.md` for the grammar.

use std::path::Path;
use std::sync::Arc;

use netsteer_core::nlhs::{
    BruteForceLhsProvider, DeterministicLhvProvider, LhsProvider, LhvProvider, SeparableDecomposition, SeparableProvider,
    Slot, SlotKind, TrianglePattern,
};
use netsteer_core::operator::MatrixDoc;
use netsteer_core::povm::{bell_swap_povm, computational_basis, input_encoded_measurement, pauli_projective, Povm};
use netsteer_core::states::{classical_correlated, dew, maximally_mixed, psi_minus, werner, DewParams};
use netsteer_core::{Dims, QOperator, Side};
use serde::{Deserialize, Serialize};

use crate::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    PsiMinus,
    Werner { omega: f64 },
    Dew { eta: f64, omega: f64 },
    Classical { d: usize },
    MaximallyMixed { dims: Vec<usize> },
    /// `|index⟩⟨index|` on a single system of dimension `d`.
    Basis { d: usize, index: usize },
    Product { left: Box<StateSpec>, right: Box<StateSpec> },
    /// Zero-padded into larger local dimensions.
    Embed { dims: Vec<usize>, state: Box<StateSpec> },
    Matrix(MatrixDoc),
}

impl StateSpec {
    pub fn build(&self) -> Result<QOperator> {
        let op = match self {
            StateSpec::PsiMinus => psi_minus(),
            StateSpec::Werner { omega } => werner(*omega)?,
            StateSpec::Dew { eta, omega } => dew(DewParams::new(*eta, *omega)?)?,
            StateSpec::Classical { d } => classical_correlated(*d)?,
            StateSpec::MaximallyMixed { dims } => maximally_mixed(&Dims::new(dims.clone())?),
            StateSpec::Basis { d, index } => QOperator::basis_projector(*index, &Dims::new(vec![*d])?)?,
            StateSpec::Product { left, right } => left.build()?.tensor(&right.build()?),
            StateSpec::Embed { dims, state } => state.build()?.embed(&Dims::new(dims.clone())?)?,
            StateSpec::Matrix(doc) => QOperator::try_from(doc.clone())?,
        };
        if !op.is_density() {
            return Err(ExperimentError::Fixture(format!("state {self:?} is not a density matrix")));
        }
        Ok(op)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PovmSpec {
    /// `{|ψ⁻⟩⟨ψ⁻|, 𝟙 − |ψ⁻⟩⟨ψ⁻|}` on two qutrits.
    BellSwap,
    /// `{|ψ⁻⟩⟨ψ⁻|, 𝟙 − |ψ⁻⟩⟨ψ⁻|}` on two qubits.
    SingletTest,
    Computational { d: usize },
    Pauli { axis: [f64; 3] },
    /// `Σ_x |x⟩⟨x| ⊗ M_{b|x}` with a classical input flag first.
    InputEncoded { measurements: Vec<PovmSpec> },
    Effects {
        effects: Vec<MatrixDoc>,
        #[serde(default)]
        labels: Option<Vec<usize>>,
    },
}

impl PovmSpec {
    pub fn build(&self) -> Result<Povm> {
        Ok(match self {
            PovmSpec::BellSwap => bell_swap_povm(),
            PovmSpec::SingletTest => {
                let m0 = psi_minus();
                let m1 = QOperator::identity(m0.dims()).sub(&m0)?;
                Povm::new(vec![m0, m1])?
            }
            PovmSpec::Computational { d } => computational_basis(*d)?,
            PovmSpec::Pauli { axis } => pauli_projective(*axis)?,
            PovmSpec::InputEncoded { measurements } => {
                let subs = measurements.iter().map(PovmSpec::build).collect::<Result<Vec<_>>>()?;
                input_encoded_measurement(&subs, subs.len())?
            }
            PovmSpec::Effects { effects, labels } => {
                let ops = effects.iter().map(|d| QOperator::try_from(d.clone())).collect::<std::result::Result<Vec<_>, _>>()?;
                match labels {
                    Some(l) => Povm::with_labels(ops, l.clone())?,
                    None => Povm::new(ops)?,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DecompositionSpec {
    /// Werner state with `ω ≤ 1/3` as an octahedral mixture.
    Werner { omega: f64 },
    Classical { d: usize },
    Product { left: StateSpec, right: StateSpec },
    Terms { weights: Vec<f64>, lefts: Vec<StateSpec>, rights: Vec<StateSpec> },
    Embed { left: usize, right: usize, of: Box<DecompositionSpec> },
}

impl DecompositionSpec {
    pub fn build(&self) -> Result<SeparableDecomposition> {
        Ok(match self {
            DecompositionSpec::Werner { omega } => SeparableDecomposition::werner(*omega)?,
            DecompositionSpec::Classical { d } => SeparableDecomposition::classical(*d)?,
            DecompositionSpec::Product { left, right } => SeparableDecomposition::product(left.build()?, right.build()?)?,
            DecompositionSpec::Terms { weights, lefts, rights } => SeparableDecomposition::new(
                weights.clone(),
                lefts.iter().map(StateSpec::build).collect::<Result<_>>()?,
                rights.iter().map(StateSpec::build).collect::<Result<_>>()?,
            )?,
            DecompositionSpec::Embed { left, right, of } => of.build()?.embed(*left, *right)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProviderSpec {
    /// Search over deterministic responses and a pool of hidden states.
    BruteForce {
        #[serde(default)]
        bloch_grid: Option<usize>,
    },
    /// Hidden states read off a known separable decomposition of the source.
    Separable { decomposition: DecompositionSpec },
    /// Local model over pairs of deterministic strategies.
    DeterministicLhv,
}

impl ProviderSpec {
    fn lhs(&self) -> Result<Arc<dyn LhsProvider>> {
        match self {
            ProviderSpec::BruteForce { bloch_grid } => {
                let mut p = BruteForceLhsProvider::default();
                if let Some(g) = bloch_grid {
                    p.bloch_grid = *g;
                }
                Ok(Arc::new(p))
            }
            ProviderSpec::Separable { decomposition } => Ok(Arc::new(SeparableProvider::new(decomposition.build()?))),
            ProviderSpec::DeterministicLhv => {
                Err(ExperimentError::Fixture("deterministic-lhv cannot model an unsteerable source".into()))
            }
        }
    }

    fn lhv(&self) -> Result<Arc<dyn LhvProvider>> {
        match self {
            ProviderSpec::DeterministicLhv => Ok(Arc::new(DeterministicLhvProvider::default())),
            ProviderSpec::Separable { decomposition } => Ok(Arc::new(SeparableProvider::new(decomposition.build()?))),
            ProviderSpec::BruteForce { .. } => {
                Err(ExperimentError::Fixture("brute-force searches LHS models, not local models".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SlotSpec {
    Sep { decomposition: DecompositionSpec },
    Loc { state: StateSpec, provider: ProviderSpec },
    UnsLeft { state: StateSpec, provider: ProviderSpec },
    UnsRight { state: StateSpec, provider: ProviderSpec },
}

impl SlotSpec {
    pub fn build(&self) -> Result<Slot> {
        Ok(match self {
            SlotSpec::Sep { decomposition } => Slot::Sep(decomposition.build()?),
            SlotSpec::Loc { state, provider } => Slot::Loc { state: state.build()?, provider: provider.lhv()? },
            SlotSpec::UnsLeft { state, provider } => {
                Slot::Uns { state: state.build()?, toward: Side::Left, provider: provider.lhs()? }
            }
            SlotSpec::UnsRight { state, provider } => {
                Slot::Uns { state: state.build()?, toward: Side::Right, provider: provider.lhs()? }
            }
        })
    }

    pub fn kind(&self) -> SlotKind {
        match self {
            SlotSpec::Sep { .. } => SlotKind::Sep,
            SlotSpec::Loc { .. } => SlotKind::Loc,
            SlotSpec::UnsLeft { .. } => SlotKind::UnsLeft,
            SlotSpec::UnsRight { .. } => SlotKind::UnsRight,
        }
    }
}

/// Which constructor a fixture is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PatternName {
    SepLocSep,
    UnsSepUns,
    SepUnsUns,
    UnsUnsSep,
    /// Any line resolved by percolating effective inputs.
    Percolation,
}

impl PatternName {
    pub fn triangle(self) -> Option<TrianglePattern> {
        match self {
            PatternName::SepLocSep => Some(TrianglePattern::SepLocSep),
            PatternName::UnsSepUns => Some(TrianglePattern::UnsSepUns),
            PatternName::SepUnsUns => Some(TrianglePattern::SepUnsUns),
            PatternName::UnsUnsSep => Some(TrianglePattern::UnsUnsSep),
            PatternName::Percolation => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternName::SepLocSep => "sep-loc-sep",
            PatternName::UnsSepUns => "uns-sep-uns",
            PatternName::SepUnsUns => "sep-uns-uns",
            PatternName::UnsUnsSep => "uns-uns-sep",
            PatternName::Percolation => "percolation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub pattern: PatternName,
    #[serde(default)]
    pub description: String,
    pub sources: Vec<SlotSpec>,
    pub measurements: Vec<PovmSpec>,
}

/// A fixture with every state, measurement and provider instantiated.
#[derive(Debug, Clone)]
pub struct Instantiated {
    pub pattern: PatternName,
    pub slots: Vec<Slot>,
    pub measurements: Vec<Povm>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        Fixture::parse(&text).map_err(|e| match e {
            ExperimentError::Parse(m) => ExperimentError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn kinds(&self) -> Vec<SlotKind> {
        self.sources.iter().map(SlotSpec::kind).collect()
    }

    /// Builds every object; failures name the offending source or measurement.
    pub fn instantiate(&self) -> Result<Instantiated> {
        if let Some(t) = self.pattern.triangle() {
            if self.kinds() != t.kinds() {
                return Err(ExperimentError::Fixture(format!(
                    "pattern {} expects sources {:?}, fixture has {:?}",
                    self.pattern.as_str(),
                    t.kinds(),
                    self.kinds()
                )));
            }
        }
        let slots = self
            .sources
            .iter()
            .enumerate()
            .map(|(i, s)| s.build().map_err(|e| ExperimentError::Fixture(format!("source {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let measurements = self
            .measurements
            .iter()
            .enumerate()
            .map(|(j, m)| m.build().map_err(|e| ExperimentError::Fixture(format!("measurement {j}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instantiated { pattern: self.pattern, slots, measurements })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_fixture() {
        let text = r#"{
            "pattern": "sep-loc-sep",
            "sources": [
                {"kind": "sep", "decomposition": {"kind": "classical", "d": 2}},
                {"kind": "loc", "state": {"kind": "werner", "omega": 0.5}, "provider": {"kind": "deterministic-lhv"}},
                {"kind": "sep", "decomposition": {"kind": "product",
                    "left": {"kind": "basis", "d": 2, "index": 0},
                    "right": {"kind": "maximally-mixed", "dims": [2]}}}
            ],
            "measurements": [{"kind": "singlet-test"}, {"kind": "singlet-test"}]
        }"#;
        let f = Fixture::parse(text).unwrap();
        assert_eq!(f.kinds(), vec![SlotKind::Sep, SlotKind::Loc, SlotKind::Sep]);
        let inst = f.instantiate().unwrap();
        assert_eq!(inst.measurements[0].dims().as_slice(), &[2, 2]);
    }

    #[test]
    fn round_trip_through_serde() {
        let spec = SlotSpec::UnsRight {
            state: StateSpec::Embed { dims: vec![3, 3], state: Box::new(StateSpec::Werner { omega: 0.3 }) },
            provider: ProviderSpec::Separable {
                decomposition: DecompositionSpec::Embed {
                    left: 3,
                    right: 3,
                    of: Box::new(DecompositionSpec::Werner { omega: 0.3 }),
                },
            },
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SlotSpec>(&text).unwrap(), spec);
    }

    #[test]
    fn rejections() {
        assert!(matches!(Fixture::parse("{\"pattern\": \"sep-loc-sep\""), Err(ExperimentError::Parse(_))));
        assert!(matches!(
            Fixture::parse(r#"{"pattern": "triangle", "sources": [], "measurements": []}"#),
            Err(ExperimentError::Parse(_))
        ));
        let wrong = r#"{"pattern": "sep-loc-sep",
            "sources": [{"kind": "sep", "decomposition": {"kind": "classical", "d": 2}}],
            "measurements": []}"#;
        assert!(matches!(Fixture::parse(wrong).unwrap().instantiate(), Err(ExperimentError::Fixture(_))));
        let bad_state = StateSpec::Matrix(MatrixDoc { dims: vec![2], re: vec![vec![1.0, 0.0], vec![0.0, 1.0]], im: vec![] });
        assert!(bad_state.build().is_err());
    }
}
