//! Repeated platform/user games with Bayesian belief updating.
//!
//! The platform proposes items through a [`algorithms::ProposerAlgorithm`], observes the
//! user's behavior and updates a belief over a finite [`model::HypothesisClass`].
//! [`stability`] computes the sets of models that limiting beliefs concentrate on,
//! [`strategize`] searches for user strategies that steer those sets, and [`trust`]
//! audits the consequences for the platform.

pub mod algorithms;
pub mod cli;
pub mod error;
pub mod model;
pub mod scenarios;
pub mod serde_ext;
pub mod simulator;
pub mod stability;
pub mod strategize;
pub mod trust;

pub use error::{Error, Result};
