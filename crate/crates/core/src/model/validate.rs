use serde::{Deserialize, Serialize};

use super::types::{GameInstance, Strategy};

/// A finding from [`validate_instance`]. Diagnostics never block a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Models `i` and `j` disagree on (z, b) by more than the configured ratio.
    LikelihoodRatio { i: usize, j: usize, z: usize, b: usize, ratio: f64 },
    /// The user plays b at z with positive probability but model `model` rules it out.
    SupportViolation { model: usize, z: usize, b: usize },
}

/// Default cap for bounded likelihood ratio warnings.
pub const DEFAULT_RATIO_CAP: f64 = 1e6;

pub fn validate_instance(instance: &GameInstance, user: Option<&Strategy>, ratio_cap: f64) -> Vec<Diagnostic> {
    let class = &instance.class;
    let mut out = Vec::new();
    let (nz, nb) = (class.n_propositions(), class.n_behaviors());
    for i in 0..class.len() {
        for j in 0..class.len() {
            if i == j {
                continue;
            }
            for z in 0..nz {
                for b in 0..nb {
                    let (pi, pj) = (class.model(i).prob(b, z), class.model(j).prob(b, z));
                    // Zero likelihoods show up as support diagnostics instead.
                    if pi > 0.0 && pj > 0.0 && pi / pj > ratio_cap {
                        out.push(Diagnostic::LikelihoodRatio { i, j, z, b, ratio: pi / pj });
                    }
                }
            }
        }
    }
    if let Some(q) = user {
        if q.n_propositions() == nz && q.n_behaviors() == nb {
            for m in 0..class.len() {
                for z in 0..nz {
                    for b in 0..nb {
                        if q.prob(b, z) > 0.0 && class.model(m).prob(b, z) == 0.0 {
                            out.push(Diagnostic::SupportViolation { model: m, z, b });
                        }
                    }
                }
            }
        }
    }
    out
}
