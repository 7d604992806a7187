//! Network steering from any steerable state placed next to a classically
//! correlated source.
//!
//! The untrusted party between the two sources reads the classical flag `x`
//! and measures `M_{b|x}` on its half of the steerable state. Each network
//! element `σ_b = Σ_x (1/d)|x⟩⟨x| ⊗ σ_{b|x}` is separable, yet reading `x`
//! on the trusted flag endpoint and dividing by `p(x)` recovers the original
//! steering assemblage. An NLHS model for `σ_b` would give an LHS model for
//! `σ_{b|x}`, which the witness violation rules out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::witness::{linear_steering_witness, WitnessReport};
use super::Verdict;
use crate::assemblage::{condition_on_trusted_measurement, lift_inputless_to_conditional, standard_assemblage};
use crate::network::bilocal_assemblage;
use crate::operator::QOperator;
use crate::povm::{computational_basis, input_encoded_measurement, pauli_projective, Povm};
use crate::states::classical_correlated;
use crate::{Error, Result, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsTranscript {
    pub axes: Vec<[f64; 3]>,
    pub witness_before: WitnessReport,
    pub witness_after: WitnessReport,
    /// Max entry deviation of `σ_b` from `Σ_x (1/d)|x⟩⟨x| ⊗ σ_{b|x}`.
    pub block_identity_deviation: f64,
    /// Max entry deviation of the recovered conditional assemblage from the
    /// standard one.
    pub round_trip_deviation: f64,
    pub input_distribution: BTreeMap<usize, f64>,
    /// Largest negativity among the `σ_b`; zero since each is separable.
    pub max_network_negativity: f64,
    pub network_elements_separable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsOutcome {
    pub verdict: Verdict,
    pub transcript: ClaimsTranscript,
}

/// Runs the construction for a two-qubit `rho` steered from its first factor
/// by dichotomic Pauli measurements along `axes`.
pub fn claims_pipeline(rho: &QOperator, axes: &[[f64; 3]]) -> Result<ClaimsOutcome> {
    if rho.dims().as_slice() != [2, 2] {
        return Err(Error::UnsupportedInput(format!("two-qubit state expected, got dims {}", rho.dims())));
    }
    if axes.len() < 2 {
        return Err(Error::InvalidParameter("at least two measurement axes are needed".into()));
    }
    let d = axes.len();
    let measurements = axes.iter().map(|a| pauli_projective(*a)).collect::<Result<Vec<Povm>>>()?;
    let standard = standard_assemblage(rho, &measurements, Side::Left)?;
    let witness_before = linear_steering_witness(&standard, axes)?;
    if !witness_before.violated {
        return Err(Error::PreconditionUnmet(format!(
            "witness value {} does not exceed the LHS bound {}",
            witness_before.value, witness_before.lhs_bound
        )));
    }

    let encoded = input_encoded_measurement(&measurements, d)?;
    let network = bilocal_assemblage(&classical_correlated(d)?, rho, &encoded)?;

    let flag_dims = crate::Dims::new(vec![d])?;
    let mut block_identity_deviation: f64 = 0.0;
    for (b, sigma) in network.elements() {
        let mut want = QOperator::zeros(sigma.dims());
        for x in 0..d {
            let steered = standard.get(b, x).ok_or_else(|| Error::InvalidAssemblage(format!("missing ({b:?}, {x})")))?;
            want.add_scaled(&QOperator::basis_projector(x, &flag_dims)?.tensor(steered), 1.0 / d as f64)?;
        }
        block_identity_deviation = block_identity_deviation.max(sigma.max_abs_diff(&want)?);
    }
    let max_network_negativity = network.negativities()?.values().copied().fold(0.0, f64::max);

    let joint = condition_on_trusted_measurement(&network, &computational_basis(d)?, Side::Left)?;
    let (input_distribution, recovered) = lift_inputless_to_conditional(&joint)?;
    let round_trip_deviation = recovered.max_abs_diff(&standard)?;
    let witness_after = linear_steering_witness(&recovered, axes)?;
    let verdict = Verdict::by_witness(witness_after.value, witness_after.lhs_bound)?;

    Ok(ClaimsOutcome {
        verdict,
        transcript: ClaimsTranscript {
            axes: axes.to_vec(),
            witness_before,
            witness_after,
            block_identity_deviation,
            round_trip_deviation,
            input_distribution,
            max_network_negativity,
            // Each σ_b is block diagonal in the flag basis with PSD blocks.
            network_elements_separable: true,
        },
    })
}
