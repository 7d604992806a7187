//! Network local hidden state models: the model type, separable
//! decompositions, single-source hidden variable providers, constructors
//! from source properties and the separable-resource transforms.

mod constructors;
mod lhs;
mod model;
mod separable;
mod transforms;

pub use constructors::{
    build_percolation_line, build_sep_unsteer_bilocal, build_triangle_patterns, model_deviation, slots_network,
    PercolationModel, ResolutionStep, Slot, SlotKind, TrianglePattern,
};
pub use lhs::{
    behavior_deviation, quantum_behavior, Behavior, BruteForceLhsProvider, DeterministicLhvProvider, LhsModel,
    LhsProvider, LhvModel, LhvProvider, SeparableProvider,
};
pub use model::{reconstruct, NlhsModel, ResponseTable};
pub use separable::SeparableDecomposition;
pub use transforms::{
    extract_model, nlhs_to_separable_realization, separabilize_endpoint, SeparabilizedEndpoint, SeparableRealization,
};
