//! The repeated game loop with Bayesian belief updates.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Belief, GameInstance, HypothesisClass, Strategy};

/// Identity of the generator recorded in trajectory metadata.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha8Rng/seed_from_u64; stream 0 = propositions, stream 1 = behaviors";

const PROPOSITION_STREAM: u64 = 0;
const BEHAVIOR_STREAM: u64 = 1;

pub const DEFAULT_SNAPSHOT_EVERY: usize = 10;
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.99;
pub const DEFAULT_CONVERGENCE_HOLD: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub instance: GameInstance,
    pub horizon: usize,
    pub seed: u64,
    #[serde(default)]
    pub belief_floor: f64,
    pub snapshot_every: usize,
}

impl SimConfig {
    pub fn new(instance: GameInstance, horizon: usize, seed: u64) -> Self {
        SimConfig { instance, horizon, seed, belief_floor: 0.0, snapshot_every: DEFAULT_SNAPSHOT_EVERY.min(horizon.max(1)) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.snapshot_every < 1 || self.snapshot_every > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "snapshot_every = {} must lie in [1, horizon = {}]",
                self.snapshot_every, self.horizon
            )));
        }
        if !(self.belief_floor >= 0.0 && self.belief_floor < 1.0) {
            return Err(Error::InvalidParameter(format!("belief_floor = {} must lie in [0,1)", self.belief_floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub z: usize,
    pub b: usize,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub belief: Belief,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub belief_snapshots: Vec<Snapshot>,
    pub final_belief: Belief,
    pub seed: u64,
    pub generator: String,
    pub snapshot_every: usize,
}

impl Trajectory {
    pub fn mean_u(&self) -> f64 {
        self.steps.iter().map(|s| s.u).sum::<f64>() / self.steps.len() as f64
    }

    pub fn mean_v(&self) -> f64 {
        self.steps.iter().map(|s| s.v).sum::<f64>() / self.steps.len() as f64
    }
}

/// Log-space belief state. Dead models carry -inf.
#[derive(Debug, Clone)]
struct LogBelief {
    logw: Vec<f64>,
}

impl LogBelief {
    fn from_belief(b: &Belief) -> Self {
        LogBelief { logw: b.weights().iter().map(|w| if *w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect() }
    }

    fn observe(&mut self, class: &HypothesisClass, z: usize, b: usize, floor: f64) -> Result<()> {
        for (i, lw) in self.logw.iter_mut().enumerate() {
            let lik = class.model(i).prob(b, z);
            *lw = if lik > 0.0 && lw.is_finite() { *lw + lik.ln() } else { f64::NEG_INFINITY };
        }
        let max = self.logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::ImpossibleObservation { z, b });
        }
        for lw in self.logw.iter_mut() {
            *lw -= max;
        }
        if floor > 0.0 {
            let lo = floor.ln();
            for lw in self.logw.iter_mut().filter(|w| w.is_finite()) {
                *lw = lw.max(lo);
            }
        }
        Ok(())
    }

    fn to_belief(&self) -> Belief {
        let max = self.logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.logw.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        Belief::from_normalized(raw.iter().map(|w| w / total).collect())
    }
}

fn check_indices(class: &HypothesisClass, belief: &Belief, z: usize, b: usize) -> Result<()> {
    if belief.len() != class.len() {
        return Err(Error::Dimension(format!("belief has {} entries for {} models", belief.len(), class.len())));
    }
    if z >= class.n_propositions() || b >= class.n_behaviors() {
        return Err(Error::Dimension(format!("observation ({z},{b}) out of range")));
    }
    Ok(())
}

/// One step of Bayes' rule, computed in log space.
pub fn bayes_update(belief: &Belief, class: &HypothesisClass, z: usize, b: usize) -> Result<Belief> {
    check_indices(class, belief, z, b)?;
    let mut state = LogBelief::from_belief(belief);
    state.observe(class, z, b, 0.0)?;
    Ok(state.to_belief())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plays the repeated game for `config.horizon` steps against a user playing `user`.
pub fn run(config: &SimConfig, user: &Strategy) -> Result<Trajectory> {
    config.validate()?;
    let inst = &config.instance;
    inst.check_shapes()?;
    if user.n_propositions() != inst.spaces.n_propositions || user.n_behaviors() != inst.spaces.n_behaviors {
        return Err(Error::Dimension("user strategy shape does not match the instance".into()));
    }
    if !inst.initial_belief.is_full_support() {
        return Err(Error::Precondition("initial belief must have full support".into()));
    }
    let class = &inst.class;
    let mut prop_rng = stream_rng(config.seed, PROPOSITION_STREAM);
    let mut beh_rng = stream_rng(config.seed, BEHAVIOR_STREAM);
    let behavior_samplers = (0..user.n_propositions())
        .map(|z| WeightedIndex::new(user.row(z)).map_err(|e| Error::InvalidProbability(format!("user row {z}: {e}"))))
        .collect::<Result<Vec<_>>>()?;

    let mut state = LogBelief::from_belief(&inst.initial_belief);
    let mut belief = inst.initial_belief.clone();
    let mut steps = Vec::with_capacity(config.horizon);
    let mut snapshots = vec![Snapshot { t: 0, belief: belief.clone() }];
    for t in 0..config.horizon {
        let r = inst.algorithm.propose(&belief, class)?;
        let z = WeightedIndex::new(r.weights())
            .map_err(|e| Error::InvalidProbability(format!("proposition distribution at t={t}: {e}")))?
            .sample(&mut prop_rng);
        let b = behavior_samplers[z].sample(&mut beh_rng);
        steps.push(Step { t, z, b, u: inst.user_payoff.get(z, b), v: inst.platform_payoff.get(z, b) });
        state.observe(class, z, b, config.belief_floor)?;
        belief = state.to_belief();
        let done = t + 1;
        if done % config.snapshot_every == 0 || done == config.horizon {
            snapshots.push(Snapshot { t: done, belief: belief.clone() });
        }
    }
    Ok(Trajectory {
        steps,
        belief_snapshots: snapshots,
        final_belief: belief,
        seed: config.seed,
        generator: GENERATOR_NAME.to_string(),
        snapshot_every: config.snapshot_every,
    })
}

/// First snapshot time after which the target mass stays at or above `threshold`
/// for the next `hold` snapshots (or until the trajectory ends).
pub fn detect_convergence(traj: &Trajectory, target: &[usize], threshold: f64, hold: usize) -> Result<Option<usize>> {
    if target.is_empty() {
        return Err(Error::Precondition("convergence target is empty".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} must lie in (0,1)")));
    }
    if hold < 1 {
        return Err(Error::InvalidParameter("hold must be positive".into()));
    }
    let snaps = &traj.belief_snapshots;
    if let Some(bad) = target.iter().find(|&&i| snaps.first().is_some_and(|s| i >= s.belief.len())) {
        return Err(Error::Dimension(format!("target model {bad} out of range")));
    }
    // Slightly below threshold so that a full-mass target counts despite rounding.
    let ok: Vec<bool> = snaps.iter().map(|s| s.belief.mass(target) >= threshold - 1e-12).collect();
    // run_len[k] = consecutive satisfied snapshots starting at k.
    let mut run_len = vec![0usize; ok.len() + 1];
    for k in (0..ok.len()).rev() {
        run_len[k] = if ok[k] { run_len[k + 1] + 1 } else { 0 };
    }
    let last = ok.len() - 1;
    for k in 0..ok.len() {
        let end = (k + hold).min(last);
        if run_len[k] > end - k {
            return Ok(Some(snaps[k].t));
        }
    }
    Ok(None)
}

/// True when the target mass is at or above `threshold` at every snapshot from `t` on.
pub fn holds_from(traj: &Trajectory, target: &[usize], threshold: f64, t: usize) -> bool {
    traj.belief_snapshots.iter().filter(|s| s.t >= t).all(|s| s.belief.mass(target) >= threshold - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::ProposerAlgorithm;
    use crate::model::{ActionSpaces, PayoffMatrix};

    fn small_instance() -> GameInstance {
        let class = HypothesisClass::new(
            vec![Strategy::from_engagement(&[0.8, 0.0]).unwrap(), Strategy::from_engagement(&[0.8, 0.8]).unwrap()],
            None,
        )
        .unwrap();
        let u = PayoffMatrix::new(vec![vec![0.0, 1.0], vec![0.0, -1.0]], (-1.0, 1.0)).unwrap();
        let v = PayoffMatrix::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]], (0.0, 1.0)).unwrap();
        GameInstance::new(
            ActionSpaces::new(2, 2).unwrap(),
            u,
            v,
            ProposerAlgorithm::engagement_proportional(0.1).unwrap(),
            class,
            Belief::uniform(2),
        )
        .unwrap()
    }

    #[test]
    fn zero_likelihood_is_exact_zero() {
        let inst = small_instance();
        let b = bayes_update(&inst.initial_belief, &inst.class, 1, 1).unwrap();
        assert_eq!(b.weights(), &[0.0, 1.0]);
        let again = bayes_update(&b, &inst.class, 0, 1).unwrap();
        assert_eq!(again.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn impossible_observation() {
        let inst = small_instance();
        let b = Belief::vertex(2, 0);
        assert!(matches!(bayes_update(&b, &inst.class, 1, 1), Err(Error::ImpossibleObservation { z: 1, b: 1 })));
        assert!(bayes_update(&b, &inst.class, 5, 1).is_err());
    }

    #[test]
    fn single_step_run() {
        let inst = small_instance();
        let q = Strategy::from_engagement(&[1.0, 0.0]).unwrap();
        let cfg = SimConfig::new(inst, 1, 7);
        let traj = run(&cfg, &q).unwrap();
        assert_eq!(traj.steps.len(), 1);
        assert_eq!(traj.belief_snapshots.len(), 2);
    }

    #[test]
    fn non_full_support_prior_rejected() {
        let mut inst = small_instance();
        inst.initial_belief = Belief::vertex(2, 0);
        let q = Strategy::from_engagement(&[1.0, 0.0]).unwrap();
        assert!(matches!(run(&SimConfig::new(inst, 10, 1), &q), Err(Error::Precondition(_))));
    }

    #[test]
    fn snapshot_cadence_validated() {
        let inst = small_instance();
        let mut cfg = SimConfig::new(inst, 5, 1);
        cfg.snapshot_every = 6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn convergence_on_whole_class_is_immediate() {
        let inst = small_instance();
        let q = Strategy::from_engagement(&[1.0, 1.0]).unwrap();
        let traj = run(&SimConfig::new(inst, 200, 3), &q).unwrap();
        assert_eq!(detect_convergence(&traj, &[0, 1], 0.99, 100).unwrap(), Some(0));
        assert!(detect_convergence(&traj, &[], 0.99, 100).is_err());
        assert!(detect_convergence(&traj, &[0], 1.0, 100).is_err());
    }
}
