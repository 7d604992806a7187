//! Verdicts on network assemblages and the certificates behind them.

mod bloch;
mod claims;
mod witness;

pub use bloch::{
    bloch_data, dew_unsteerable_both_ways, erased_criterion_max, erased_qubit_block, erased_unsteerable,
    fibonacci_sphere, BlochData, DEFAULT_LATTICE_POINTS,
};
pub use claims::{claims_pipeline, ClaimsOutcome, ClaimsTranscript};
pub use witness::{linear_steering_witness, lhs_bound, WitnessReport};

use serde::{Deserialize, Serialize};

use crate::network::{NetworkAssemblage, OutcomeTuple};
use crate::nlhs::{reconstruct, NlhsModel};
use crate::operator::{negativity_of_pt, QOperator};
use crate::{tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    NetworkSteeringCertified,
    NlhsModelExhibited,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// An assemblage element whose normalised form has positive negativity.
    Negativity { outcomes: OutcomeTuple, value: f64 },
    /// A violated linear steering inequality on a derived standard assemblage.
    LinearWitness { value: f64, lhs_bound: f64 },
    /// An explicit model reproducing the assemblage.
    Model(Box<NlhsModel>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    status: VerdictStatus,
    certificate: Option<Certificate>,
}

impl Verdict {
    pub fn inconclusive() -> Self {
        Verdict { status: VerdictStatus::Inconclusive, certificate: None }
    }

    pub fn by_negativity(outcomes: OutcomeTuple, value: f64) -> Result<Self> {
        if value <= tol::NEGATIVITY_CUTOFF {
            return Err(Error::PreconditionUnmet(format!("negativity {value:e} does not certify entanglement")));
        }
        Ok(Verdict {
            status: VerdictStatus::NetworkSteeringCertified,
            certificate: Some(Certificate::Negativity { outcomes, value }),
        })
    }

    pub fn by_witness(value: f64, lhs_bound: f64) -> Result<Self> {
        if value <= lhs_bound + tol::OPT {
            return Err(Error::PreconditionUnmet(format!("witness value {value} does not exceed bound {lhs_bound}")));
        }
        Ok(Verdict {
            status: VerdictStatus::NetworkSteeringCertified,
            certificate: Some(Certificate::LinearWitness { value, lhs_bound }),
        })
    }

    /// Accepts `model` only if it reconstructs `asm` within tolerance.
    pub fn by_model(model: NlhsModel, asm: &NetworkAssemblage) -> Result<Self> {
        let dev = reconstruct(&model)?.max_abs_diff(asm)?;
        if dev > tol::EQ {
            return Err(Error::InvalidModel(format!("model reproduces the assemblage only within {dev:e}")));
        }
        Ok(Verdict { status: VerdictStatus::NlhsModelExhibited, certificate: Some(Certificate::Model(Box::new(model))) })
    }

    pub fn status(&self) -> VerdictStatus {
        self.status
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn is_certified(&self) -> bool {
        self.status == VerdictStatus::NetworkSteeringCertified
    }
}

/// Network steering from entanglement of a single element: every element
/// of an NLHS assemblage is separable, so positive negativity of any
/// element rules out an NLHS model. Elements are normalised before the
/// cutoff is applied, so rare outcomes are judged on the same scale as
/// likely ones; elements with weight below `tol::EQ` are skipped. The most
/// negative normalised element is reported.
pub fn certify_network_steering(asm: &NetworkAssemblage) -> Verdict {
    let mut best: Option<(OutcomeTuple, f64)> = None;
    for (k, e) in asm.elements() {
        if let Some(value) = normalized_negativity(e) {
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                best = Some((k.clone(), value));
            }
        }
    }
    match best {
        Some((k, v)) => Verdict::by_negativity(k, v).expect("checked against cutoff"),
        None => Verdict::inconclusive(),
    }
}

/// Negativity of `e / Tr e` across its two factors when it exceeds the
/// cutoff, `None` when the element is too light or shows no entanglement.
pub fn normalized_negativity(e: &QOperator) -> Option<f64> {
    let weight = e.trace_re();
    if weight <= tol::EQ {
        return None;
    }
    let value = e.scale(1.0 / weight).partial_transpose(&[1]).and_then(|pt| negativity_of_pt(&pt)).ok()?;
    (value > tol::NEGATIVITY_CUTOFF).then_some(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{bilocal_assemblage, line_assemblage, LinearNetwork};
    use crate::povm::bell_swap_povm;
    use crate::random::{random_network, seeded};
    use crate::states::{dew, werner, DewParams};

    #[test]
    fn dew_swap_is_certified_on_success_outcome() {
        let s = dew(DewParams::new(0.2, 0.8).unwrap()).unwrap();
        let asm = bilocal_assemblage(&s, &s, &bell_swap_povm()).unwrap();
        let v = certify_network_steering(&asm);
        assert!(v.is_certified());
        // σ₀ / Tr σ₀ is ρ_DEW(η, ω²), whose negativity is η²(3ω² − 1)/4.
        let want = 0.2f64.powi(2) * (3.0 * 0.64 - 1.0) / 4.0;
        match v.certificate() {
            Some(Certificate::Negativity { outcomes, value }) => {
                assert_eq!(outcomes, &vec![0]);
                assert!((value - want).abs() < 1e-14, "{value} vs {want}");
            }
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn weak_werner_swap_is_inconclusive() {
        let s = werner(0.2).unwrap().embed(&crate::Dims::new(vec![3, 3]).unwrap()).unwrap();
        let asm = bilocal_assemblage(&s, &s, &bell_swap_povm()).unwrap();
        assert_eq!(certify_network_steering(&asm).status(), VerdictStatus::Inconclusive);
    }

    #[test]
    fn product_sources_are_inconclusive() {
        let mut rng = seeded(12);
        let net = random_network(4, 3, &mut rng);
        let products: Vec<_> = net
            .sources()
            .iter()
            .map(|s| s.partial_trace(&[0]).unwrap().tensor(&s.partial_trace(&[1]).unwrap()))
            .collect();
        let asm = line_assemblage(&LinearNetwork::new(products, net.measurements().to_vec()).unwrap()).unwrap();
        assert_eq!(certify_network_steering(&asm), Verdict::inconclusive());
    }

    #[test]
    fn verdict_constructors_enforce_invariants() {
        assert!(Verdict::by_negativity(vec![0], 0.0).is_err());
        assert!(Verdict::by_witness(0.7, 0.71).is_err());
        assert!(Verdict::by_witness(0.9, 0.71).unwrap().is_certified());
    }
}
