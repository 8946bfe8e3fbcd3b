//! Domain types and information primitives.

mod info;
mod types;
mod validate;

pub use info::{kl_divergence, tv_distance};
pub(crate) use info::tv_unchecked;
pub use types::{
    ActionSpaces, Belief, Distribution, GameInstance, HypothesisClass, PayoffMatrix, Strategy, CONSTRUCTION_TOL,
    RENORM_TOL,
};
pub(crate) use types::normalize;
pub use validate::{validate_instance, Diagnostic, DEFAULT_RATIO_CAP};
