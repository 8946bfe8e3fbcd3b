//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{ProposerAlgorithm, DEFAULT_GRID_K, DEFAULT_MAX_GRID_POINTS};
use crate::error::{Error, Result};
use crate::model::{ActionSpaces, Belief, GameInstance, HypothesisClass, PayoffMatrix, Strategy};
use crate::scenarios::{self, ReproduceConfig, StylizedParams};
use crate::simulator::{DEFAULT_CONVERGENCE_HOLD, DEFAULT_CONVERGENCE_THRESHOLD, DEFAULT_SNAPSHOT_EVERY};
use crate::stability::{DominanceParams, DEFAULT_TAU_DOM};
use crate::strategize::{CandidateSpec, UserModel, UserParams};
use crate::trust::{build_eps_net_class, DEFAULT_NET_GUARD};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Scenario {
        name: String,
    },
    Stylized {
        params: StylizedParams,
    },
    Custom {
        spaces: ActionSpaces,
        user_payoff: PayoffMatrix,
        platform_payoff: PayoffMatrix,
        algorithm: ProposerAlgorithm,
        class: HypothesisClass,
        #[serde(default)]
        initial_belief: Option<Belief>,
    },
    /// A class of every strategy with probabilities on a grid of step ≈ eps.
    EpsNet {
        spaces: ActionSpaces,
        user_payoff: PayoffMatrix,
        platform_payoff: PayoffMatrix,
        algorithm: ProposerAlgorithm,
        eps: f64,
        #[serde(default = "default_net_guard")]
        guard: usize,
    },
}

fn default_net_guard() -> usize {
    DEFAULT_NET_GUARD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserKind {
    #[default]
    Naive,
    Strategic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    #[serde(default)]
    pub kind: UserKind,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub opt_out_behavior: usize,
    #[serde(default)]
    pub candidates: CandidateSpec,
    /// Overrides the simulated and analysed strategy.
    #[serde(default)]
    pub strategy: Option<Strategy>,
}

fn default_grid_k() -> usize {
    DEFAULT_GRID_K
}
fn default_max_grid_points() -> usize {
    DEFAULT_MAX_GRID_POINTS
}
fn default_tau() -> f64 {
    DEFAULT_TAU_DOM
}
fn default_horizon() -> usize {
    5000
}
fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}
fn default_threshold() -> f64 {
    DEFAULT_CONVERGENCE_THRESHOLD
}
fn default_hold() -> usize {
    DEFAULT_CONVERGENCE_HOLD
}
fn default_random_instances() -> usize {
    100
}
fn default_random_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    #[serde(default = "default_grid_k")]
    pub grid_k: usize,
    #[serde(default = "default_max_grid_points")]
    pub max_grid_points: usize,
    #[serde(default = "default_tau")]
    pub tau_dom: f64,
    #[serde(default)]
    pub max_rounds: Option<usize>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub belief_floor: f64,
    #[serde(default = "default_threshold")]
    pub convergence_threshold: f64,
    #[serde(default = "default_hold")]
    pub convergence_hold: usize,
    #[serde(default = "default_random_instances")]
    pub random_instances: usize,
    #[serde(default = "default_random_seed")]
    pub random_seed: u64,
}

impl Default for EngineSpec {
    fn default() -> Self {
        toml::from_str("").expect("engine defaults")
    }
}

impl EngineSpec {
    pub fn dominance(&self) -> DominanceParams {
        DominanceParams {
            grid_k: self.grid_k,
            max_grid_points: self.max_grid_points,
            tau_dom: self.tau_dom,
            max_rounds: self.max_rounds,
        }
    }

    pub fn reproduce_config(&self) -> ReproduceConfig {
        let defaults = ReproduceConfig::default();
        ReproduceConfig {
            dominance: self.dominance(),
            seeds: if self.seeds.is_empty() { defaults.seeds } else { self.seeds.clone() },
            horizon: self.horizon,
            snapshot_every: self.snapshot_every,
            threshold: self.convergence_threshold,
            hold: self.convergence_hold,
            random_instances: self.random_instances,
            random_seed: self.random_seed,
            sensitivity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterfactualSpec {
    pub algorithm: ProposerAlgorithm,
    /// Lipschitz constant of the counterfactual algorithm; estimated when absent.
    #[serde(default)]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustSpec {
    #[serde(default)]
    pub kappa0: f64,
}

fn default_props() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceSpec {
    #[serde(default = "default_props")]
    pub props: Vec<u8>,
    #[serde(default)]
    pub sensitivity: bool,
}

impl Default for ReproduceSpec {
    fn default() -> Self {
        ReproduceSpec { props: default_props(), sensitivity: false }
    }
}

fn default_out_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_out_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Replaces the instance's proposition algorithm.
    #[serde(default)]
    pub algorithm: Option<ProposerAlgorithm>,
    #[serde(default)]
    pub user: UserSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub counterfactual: Option<CounterfactualSpec>,
    #[serde(default)]
    pub trust: TrustSpec,
    #[serde(default)]
    pub reproduce: ReproduceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Compact JSON of the effective configuration; the input to [`Self::hash`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// The scenario parameters, when the instance is stylized.
    pub fn stylized_params(&self) -> Result<Option<StylizedParams>> {
        match &self.instance {
            InstanceSpec::Scenario { name } => scenarios::scenario_params(name).map(Some),
            InstanceSpec::Stylized { params } => Ok(Some(params.clone())),
            _ => Ok(None),
        }
    }

    pub fn build_instance(&self) -> Result<GameInstance> {
        let inst = match &self.instance {
            InstanceSpec::Scenario { name } => scenarios::scenario_instance(name)?,
            InstanceSpec::Stylized { params } => scenarios::make_stylized(params)?,
            InstanceSpec::Custom { spaces, user_payoff, platform_payoff, algorithm, class, initial_belief } => {
                GameInstance::new(
                    spaces.clone(),
                    user_payoff.clone(),
                    platform_payoff.clone(),
                    algorithm.clone(),
                    class.clone(),
                    initial_belief.clone().unwrap_or_else(|| Belief::uniform(class.len())),
                )?
            }
            InstanceSpec::EpsNet { spaces, user_payoff, platform_payoff, algorithm, eps, guard } => {
                let class = build_eps_net_class(spaces, *eps, *guard)?;
                let m = class.len();
                GameInstance::new(
                    spaces.clone(),
                    user_payoff.clone(),
                    platform_payoff.clone(),
                    algorithm.clone(),
                    class,
                    Belief::uniform(m),
                )?
            }
        };
        match &self.algorithm {
            Some(alg) => inst.with_algorithm(alg.clone()),
            None => Ok(inst),
        }
    }

    /// λ from the user section, else the scenario's, else 0.
    pub fn lambda(&self) -> Result<f64> {
        if let Some(l) = self.user.lambda {
            return Ok(l);
        }
        Ok(self.stylized_params()?.map_or(0.0, |p| p.lambda))
    }

    pub fn user_params(&self) -> Result<UserParams> {
        Ok(UserParams {
            lambda: self.lambda()?,
            opt_out_behavior: self.user.opt_out_behavior,
            candidates: self.user.candidates.clone(),
        })
    }

    pub fn user_model(&self) -> Result<UserModel> {
        Ok(match self.user.kind {
            UserKind::Naive => UserModel::Naive,
            UserKind::Strategic => UserModel::Strategic(self.user_params()?),
        })
    }

    pub fn net_eps(&self) -> Option<f64> {
        match &self.instance {
            InstanceSpec::EpsNet { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.engine.dominance().validate()?;
        if self.engine.horizon < 1 {
            return Err(Error::Config("engine.horizon must be at least 1".into()));
        }
        if self.engine.snapshot_every < 1 {
            return Err(Error::Config("engine.snapshot_every must be at least 1".into()));
        }
        if !(self.engine.convergence_threshold > 0.0 && self.engine.convergence_threshold < 1.0) {
            return Err(Error::Config("engine.convergence_threshold must lie in (0,1)".into()));
        }
        if let Some(bad) = self.reproduce.props.iter().find(|p| !(1..=5).contains(*p)) {
            return Err(Error::Config(format!("reproduce.props contains {bad}; expected 1..=5")));
        }
        Ok(())
    }
}
