//! The stylized recommender and its appendix variants, with closed-form oracles.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{ProposerAlgorithm, ReweightScope};
use crate::error::{Error, Result};
use crate::model::{ActionSpaces, Belief, GameInstance, HypothesisClass, PayoffMatrix, Strategy};
use crate::simulator::{
    detect_convergence, holds_from, run, SimConfig, DEFAULT_CONVERGENCE_HOLD, DEFAULT_CONVERGENCE_THRESHOLD,
    DEFAULT_SNAPSHOT_EVERY,
};
use crate::stability::{stable_set, stylized_stable_set, DominanceParams};
use crate::strategize::{naive_outcome, naive_strategy, solve_strategic, UserParams};
use crate::trust::{counterfactual_audit, predicted_payoff};
use crate::strategize::UserModel;

pub const IGNORE: usize = 0;
pub const CLICK: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StylizedParams {
    pub partition_a: Vec<usize>,
    pub partition_b: Vec<usize>,
    /// +1 or −1 per proposition.
    pub affinity: Vec<i8>,
    pub gamma: f64,
    pub eps: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl StylizedParams {
    pub fn n_propositions(&self) -> usize {
        self.affinity.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_propositions();
        if self.partition_a.is_empty() || self.partition_b.is_empty() {
            return Err(Error::InvalidParameter("both halves of the partition must be non-empty".into()));
        }
        let mut seen = vec![0u8; n];
        for &z in self.partition_a.iter().chain(&self.partition_b) {
            if z >= n {
                return Err(Error::Dimension(format!("partition item {z} out of range")));
            }
            seen[z] += 1;
        }
        if seen.iter().any(|&c| c != 1) {
            return Err(Error::InvalidParameter("partition halves must be disjoint and cover every proposition".into()));
        }
        if self.affinity.iter().any(|&a| a != 1 && a != -1) {
            return Err(Error::InvalidParameter("affinity entries must be +1 or -1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma = {} must lie in (0,1)", self.gamma)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} must lie in (0,1)", self.eps)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {} must be non-negative", self.lambda)));
        }
        Ok(())
    }

    pub fn positive(&self) -> Vec<usize> {
        (0..self.n_propositions()).filter(|&z| self.affinity[z] == 1).collect()
    }

    /// (|𝒵⁺∩𝒵_A|, |𝒵_A∖𝒵⁺|, |𝒵⁺∩𝒵_B|, |𝒵_B∖𝒵⁺|).
    pub fn counts(&self) -> [usize; 4] {
        let pos = |z: &usize| self.affinity[*z] == 1;
        let a_pos = self.partition_a.iter().filter(|z| pos(z)).count();
        let b_pos = self.partition_b.iter().filter(|z| pos(z)).count();
        [a_pos, self.partition_a.len() - a_pos, b_pos, self.partition_b.len() - b_pos]
    }

    pub fn user_params(&self) -> UserParams {
        UserParams::with_lambda(self.lambda)
    }

    /// Best response restricted to clicks inside `set`.
    pub fn click_only(&self, set: &[usize]) -> Strategy {
        let rows = (0..self.n_propositions())
            .map(|z| if set.contains(&z) && self.affinity[z] == 1 { vec![0.0, 1.0] } else { vec![1.0, 0.0] })
            .collect();
        Strategy::new(rows).expect("deterministic rows")
    }
}

fn engagement_model(n: usize, clicks: impl Fn(usize) -> f64) -> Strategy {
    Strategy::from_engagement(&(0..n).map(clicks).collect::<Vec<_>>()).expect("engagement probabilities in [0,1]")
}

/// The three-model stylized class.
pub fn stylized_class(params: &StylizedParams) -> HypothesisClass {
    let n = params.n_propositions();
    let keep = 1.0 - params.gamma;
    let in_a = |z: usize| params.partition_a.contains(&z);
    HypothesisClass::new(
        vec![
            engagement_model(n, |z| if in_a(z) { keep } else { 0.0 }),
            engagement_model(n, |z| if in_a(z) { 0.0 } else { keep }),
            engagement_model(n, |_| keep),
        ],
        Some(vec!["q1".into(), "q2".into(), "q3".into()]),
    )
    .expect("well-formed class")
}

pub fn make_stylized(params: &StylizedParams) -> Result<GameInstance> {
    params.validate()?;
    let n = params.n_propositions();
    let spaces = ActionSpaces::new(n, 2)?.with_labels(
        Some((0..n).map(|z| format!("z{z}")).collect()),
        Some(vec!["ignore".into(), "click".into()]),
    )?;
    let u = PayoffMatrix::from_fn(n, 2, (-1.0, 1.0), |z, b| if b == CLICK { params.affinity[z] as f64 } else { 0.0 })?;
    let v = PayoffMatrix::from_fn(n, 2, (0.0, 1.0), |_, b| b as f64)?;
    let class = stylized_class(params);
    let m = class.len();
    GameInstance::new(spaces, u, v, ProposerAlgorithm::engagement_proportional(params.eps)?, class, Belief::uniform(m))
}

fn halves() -> (Vec<usize>, Vec<usize>) {
    (vec![0, 1, 2, 3], vec![4, 5, 6, 7])
}

fn affinity_on(positive: &[usize]) -> Vec<i8> {
    (0..8).map(|z| if positive.contains(&z) { 1 } else { -1 }).collect()
}

/// Eight items, four per half, engagement counts (3, 1, 2, 2).
pub fn s1_params() -> StylizedParams {
    let (a, b) = halves();
    StylizedParams { partition_a: a, partition_b: b, affinity: affinity_on(&[0, 1, 2, 4, 5]), gamma: 0.2, eps: 0.1, lambda: 0.0 }
}

/// S1 geometry with every positive item inside the first half.
pub fn s1_aligned_params() -> StylizedParams {
    StylizedParams { affinity: affinity_on(&[0, 1]), ..s1_params() }
}

pub const PROP4_GAMMA: f64 = 0.25;
pub const PROP4_ALPHA: f64 = 0.01;

pub fn prop4_params() -> StylizedParams {
    StylizedParams { gamma: PROP4_GAMMA, ..s1_params() }
}

/// α on positive first-half items and negative second-half items, 1 elsewhere.
pub fn toxicity_weights(params: &StylizedParams, alpha: f64) -> Vec<f64> {
    (0..params.n_propositions())
        .map(|z| {
            let pos = params.affinity[z] == 1;
            let in_a = params.partition_a.contains(&z);
            if (in_a && pos) || (!in_a && !pos) {
                alpha
            } else {
                1.0
            }
        })
        .collect()
}

pub fn toxicity_algorithm(params: &StylizedParams, alpha: f64, scope: ReweightScope) -> Result<ProposerAlgorithm> {
    ProposerAlgorithm::reweighted(
        ProposerAlgorithm::engagement_proportional(params.eps)?,
        toxicity_weights(params, alpha),
        scope,
    )
}

/// The calibrated instance and its toxicity-discounting counterfactual.
pub fn make_prop4_instance() -> Result<(GameInstance, ProposerAlgorithm)> {
    make_prop4_instance_with(PROP4_ALPHA, ReweightScope::Componentwise)
}

pub fn make_prop4_instance_with(alpha: f64, scope: ReweightScope) -> Result<(GameInstance, ProposerAlgorithm)> {
    let params = prop4_params();
    Ok((make_stylized(&params)?, toxicity_algorithm(&params, alpha, scope)?))
}

pub const PROP5_GAMMA: f64 = 0.95;
pub const PROP5_LAMBDA: f64 = 0.01;

pub fn prop5_params() -> StylizedParams {
    StylizedParams { affinity: affinity_on(&[0, 1, 4]), gamma: PROP5_GAMMA, lambda: PROP5_LAMBDA, ..s1_params() }
}

/// Adds q̂₄ with engagement 1 − η everywhere, η = γ/2.
pub fn make_prop5_instance_with(params: &StylizedParams) -> Result<(GameInstance, GameInstance)> {
    make_prop5_instance_eta(params, params.gamma / 2.0)
}

pub fn make_prop5_instance_eta(params: &StylizedParams, eta: f64) -> Result<(GameInstance, GameInstance)> {
    if !(eta > 0.0 && eta < params.gamma) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must lie in (0, gamma = {})", params.gamma)));
    }
    let before = make_stylized(params)?;
    let q4 = engagement_model(params.n_propositions(), |_| 1.0 - eta);
    let class = before.class.extended(q4, Some("q4".into()))?;
    let after = before.with_class(class)?;
    Ok((before, after))
}

pub fn make_prop5_instance() -> Result<(GameInstance, GameInstance)> {
    make_prop5_instance_with(&prop5_params())
}

/// Names accepted wherever a scenario is referenced by name.
pub const SCENARIO_NAMES: [&str; 5] = ["s1", "s1-aligned", "prop4", "prop5-before", "prop5-after"];

pub fn scenario_params(name: &str) -> Result<StylizedParams> {
    match name {
        "s1" => Ok(s1_params()),
        "s1-aligned" => Ok(s1_aligned_params()),
        "prop4" => Ok(prop4_params()),
        "prop5-before" | "prop5-after" => Ok(prop5_params()),
        other => Err(Error::Config(format!("unknown scenario {other:?}; expected one of {SCENARIO_NAMES:?}"))),
    }
}

pub fn scenario_instance(name: &str) -> Result<GameInstance> {
    match name {
        "prop5-after" => Ok(make_prop5_instance()?.1),
        other => make_stylized(&scenario_params(other)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stylized {
    /// Counts (n1, n2, n3, n4) as in [`StylizedParams::counts`].
    pub n: [f64; 4],
    pub eps: f64,
    pub gamma: f64,
}

/// Closed forms for the stylized game, as functions of the four counts.
impl Stylized {
    pub fn from_params(p: &StylizedParams) -> Self {
        let c = p.counts();
        Stylized { n: [c[0] as f64, c[1] as f64, c[2] as f64, c[3] as f64], eps: p.eps, gamma: p.gamma }
    }

    fn total(&self) -> f64 {
        self.n.iter().sum()
    }

    /// Payoff of engaging only with positive first-half items, feed at δ_q̂₁.
    pub fn strategic_first_half(&self) -> f64 {
        let [n1, n2, ..] = self.n;
        self.eps * n1 / self.total() + (1.0 - self.eps) * n1 / (n1 + n2)
    }

    pub fn strategic_second_half(&self) -> f64 {
        let [_, _, n3, n4] = self.n;
        self.eps * n3 / self.total() + (1.0 - self.eps) * n3 / (n3 + n4)
    }

    /// Best response against the uniform feed of δ_q̂₃.
    pub fn naive(&self) -> f64 {
        (self.n[0] + self.n[2]) / self.total()
    }

    /// Forecast V̂(p, δ_q̂₁).
    pub fn predicted_at_q1(&self) -> f64 {
        let [n1, n2, ..] = self.n;
        (1.0 - self.gamma) * (self.eps * (n1 + n2) / self.total() + (1.0 - self.eps))
    }

    /// Forecast at δ_q̂₁ under componentwise toxicity discounting.
    pub fn predicted_toxic_at_q1(&self, alpha: f64) -> f64 {
        let [n1, n2, n3, n4] = self.n;
        let a_mass = alpha * n1 + n2;
        (1.0 - self.gamma) * (self.eps * a_mass / (a_mass + n3 + alpha * n4) + (1.0 - self.eps))
    }

    /// Realized payoff under toxicity discounting once the user moves to the second half.
    pub fn true_toxic(&self, alpha: f64) -> f64 {
        let [n1, n2, n3, n4] = self.n;
        self.eps * n3 / (alpha * n1 + n2 + n3 + alpha * n4) + (1.0 - self.eps) * n3 / (n3 + alpha * n4)
    }
}

/// Engine settings used by [`reproduce`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    pub dominance: DominanceParams,
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub snapshot_every: usize,
    pub threshold: f64,
    pub hold: usize,
    pub random_instances: usize,
    pub random_seed: u64,
    /// Re-runs checks 4 and 5 with the small constants at [`SENSITIVITY_VALUES`].
    #[serde(default)]
    pub sensitivity: bool,
}

pub const SENSITIVITY_VALUES: [f64; 2] = [0.001, 0.05];

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            dominance: DominanceParams::default(),
            seeds: (0..20).collect(),
            horizon: 5000,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            threshold: DEFAULT_CONVERGENCE_THRESHOLD,
            hold: DEFAULT_CONVERGENCE_HOLD,
            random_instances: 100,
            random_seed: 7,
            sensitivity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub computed: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub prop_id: u8,
    pub checks: Vec<Check>,
    /// Boolean facts such as orderings or set equalities.
    pub conditions: BTreeMap<String, bool>,
    pub notes: Vec<String>,
    /// Outcomes of the optional constant sweep; informational, not part of `pass`.
    #[serde(default)]
    pub sensitivity: BTreeMap<String, bool>,
    pub error: Option<String>,
    pub pass: bool,
}

impl PropositionReport {
    fn new(prop_id: u8) -> Self {
        PropositionReport { prop_id, checks: vec![], conditions: BTreeMap::new(), notes: vec![], sensitivity: BTreeMap::new(), error: None, pass: false }
    }

    fn check(&mut self, name: &str, analytic: f64, computed: f64, tolerance: f64) {
        let delta = (analytic - computed).abs();
        self.checks.push(Check { name: name.into(), analytic, computed, delta, tolerance, pass: delta <= tolerance });
    }

    fn condition(&mut self, name: &str, value: bool) {
        self.conditions.insert(name.into(), value);
    }

    fn finish(mut self) -> Self {
        self.pass = self.error.is_none()
            && self.checks.iter().all(|c| c.pass)
            && self.conditions.values().all(|&v| v);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.computed)
    }
}

/// Runs the engines on the matching scenario and compares against the closed forms.
pub fn reproduce(prop_id: u8, cfg: &ReproduceConfig) -> PropositionReport {
    let mut report = PropositionReport::new(prop_id);
    let outcome = match prop_id {
        1 => reproduce_1(cfg, &mut report),
        2 => reproduce_2(cfg, &mut report),
        3 => reproduce_3(cfg, &mut report),
        4 => reproduce_4(cfg, &mut report),
        5 => reproduce_5(cfg, &mut report),
        other => Err(Error::InvalidParameter(format!("no proposition {other}; expected 1..=5"))),
    };
    if let Err(e) = outcome {
        report.error = Some(e.to_string());
    }
    report.finish()
}

/// Support cases of the closed-form stable-set map, as (name, clicked set).
pub fn prop1_cases(p: &StylizedParams) -> Vec<(&'static str, Strategy)> {
    vec![
        ("first_half_only", p.click_only(&p.partition_a)),
        ("second_half_only", p.click_only(&p.partition_b)),
        ("both_halves", naive_strategy(&make_stylized(p).expect("valid").user_payoff)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCase {
    pub case: String,
    pub survivors: Vec<usize>,
    pub oracle: usize,
    /// Per seed, the first step after which the survivors hold the threshold mass.
    pub convergence_steps: Vec<Option<usize>>,
    pub all_hold_to_end: bool,
}

pub fn prop1_convergence(p: &StylizedParams, cfg: &ReproduceConfig) -> Result<Vec<ConvergenceCase>> {
    let inst = make_stylized(p)?;
    prop1_cases(p)
        .into_iter()
        .map(|(name, q)| {
            let stable = stable_set(&q, &inst.algorithm, &inst.class, &cfg.dominance)?;
            let oracle = stylized_stable_set(&q, &p.partition_a, &p.partition_b, CLICK)?;
            let runs = cfg
                .seeds
                .par_iter()
                .map(|&seed| {
                    let mut sim = SimConfig::new(inst.clone(), cfg.horizon, seed);
                    sim.snapshot_every = cfg.snapshot_every.min(cfg.horizon);
                    let traj = run(&sim, &q)?;
                    let t = detect_convergence(&traj, &stable.survivors, cfg.threshold, cfg.hold)?;
                    let held = t.is_some_and(|t| holds_from(&traj, &stable.survivors, cfg.threshold, t));
                    Ok((t, held))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceCase {
                case: name.into(),
                survivors: stable.survivors,
                oracle,
                convergence_steps: runs.iter().map(|r| r.0).collect(),
                all_hold_to_end: runs.iter().all(|r| r.1),
            })
        })
        .collect()
}

fn reproduce_1(cfg: &ReproduceConfig, report: &mut PropositionReport) -> Result<()> {
    let p = s1_params();
    for case in prop1_convergence(&p, cfg)? {
        report.condition(&format!("{}: stable set equals closed form", case.case), case.survivors == vec![case.oracle]);
        let converged = case.convergence_steps.iter().filter(|t| t.is_some()).count();
        report.condition(
            &format!("{}: all {} seeds converge and hold", case.case, case.convergence_steps.len()),
            converged == case.convergence_steps.len() && case.all_hold_to_end && !cfg.seeds.is_empty(),
        );
        report.notes.push(format!(
            "{}: survivors {:?}, convergence steps {:?}",
            case.case, case.survivors, case.convergence_steps
        ));
    }
    Ok(())
}

fn reproduce_2(cfg: &ReproduceConfig, report: &mut PropositionReport) -> Result<()> {
    let p = s1_params();
    let inst = make_stylized(&p)?;
    let closed = Stylized::from_params(&p);
    let sol = solve_strategic(&inst, &p.user_params(), &cfg.dominance)?;
    let naive = naive_outcome(&inst, p.lambda, &cfg.dominance)?;
    report.check("strategic_user_payoff", closed.strategic_first_half(), sol.worst_case_user_payoff, 1e-12);
    report.check("naive_user_payoff", closed.naive(), naive.worst_case_user_payoff, 1e-12);
    report.condition(
        "strategic user engages only on positive first-half items",
        sol.strategy == p.click_only(&p.partition_a),
    );
    report.condition("strategic differs from best response", !sol.is_best_response());

    let aligned = s1_aligned_params();
    let inst2 = make_stylized(&aligned)?;
    let sol2 = solve_strategic(&inst2, &aligned.user_params(), &cfg.dominance)?;
    report.condition("aligned variant returns the best response", sol2.is_best_response());
    report.notes.push(format!("strategic candidate {:?}; aligned candidate {:?}", sol.label, sol2.label));
    Ok(())
}

/// Draws a random stylized instance of 2 to 6 items.
pub fn random_stylized(rng: &mut impl Rng) -> StylizedParams {
    let n = rng.gen_range(2..=6);
    let split = rng.gen_range(1..n);
    let mut items: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        items.swap(i, rng.gen_range(0..=i));
    }
    let mut a = items[..split].to_vec();
    let mut b = items[split..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    StylizedParams {
        partition_a: a,
        partition_b: b,
        affinity: (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect(),
        gamma: rng.gen_range(0.05..0.5),
        eps: rng.gen_range(0.001..0.3),
        lambda: 0.0,
    }
}

fn reproduce_3(cfg: &ReproduceConfig, report: &mut PropositionReport) -> Result<()> {
    let p = s1_params();
    let inst = make_stylized(&p)?;
    let sol = solve_strategic(&inst, &p.user_params(), &cfg.dominance)?;
    let naive = naive_outcome(&inst, 0.0, &cfg.dominance)?;
    let closed = Stylized::from_params(&p);
    report.check("strategic_platform_payoff", closed.strategic_first_half(), sol.worst_case_platform_payoff, 1e-12);
    report.check("naive_platform_payoff", closed.naive(), naive.worst_case_platform_payoff, 1e-12);
    report.condition("S1 strategic at least naive", sol.worst_case_platform_payoff >= naive.worst_case_platform_payoff - 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.random_seed);
    let draws: Vec<StylizedParams> = (0..cfg.random_instances).map(|_| random_stylized(&mut rng)).collect();
    let results = draws
        .par_iter()
        .map(|d| {
            let inst = make_stylized(d)?;
            let s = solve_strategic(&inst, &d.user_params(), &cfg.dominance)?;
            let n = naive_outcome(&inst, 0.0, &cfg.dominance)?;
            Ok(s.worst_case_platform_payoff - n.worst_case_platform_payoff)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = results.iter().copied().fold(f64::INFINITY, f64::min);
    report.condition(
        &format!("{} random instances: strategic at least naive", results.len()),
        results.len() >= cfg.random_instances && worst >= -1e-12,
    );
    report.notes.push(format!("smallest strategic-minus-naive platform payoff: {worst:.3e}"));
    Ok(())
}

fn reproduce_4(cfg: &ReproduceConfig, report: &mut PropositionReport) -> Result<()> {
    let (inst, p_cf) = make_prop4_instance()?;
    let params = prop4_params();
    let closed = Stylized::from_params(&params);
    let user = UserModel::Strategic(params.user_params());
    let cf = counterfactual_audit(&inst, &p_cf, &user, &cfg.dominance)?;
    let q1 = Belief::vertex(inst.class.len(), 0);
    let predicted_now = predicted_payoff(&inst.algorithm, &q1, &inst.class, &inst.platform_payoff)?;
    report.check("predicted_deployed", closed.predicted_at_q1(), predicted_now, 1e-9);
    report.check("true_deployed", closed.strategic_first_half(), cf.current, 1e-9);
    report.check("predicted_counterfactual", closed.predicted_toxic_at_q1(PROP4_ALPHA), cf.predicted, 1e-9);
    report.check("true_counterfactual", closed.true_toxic(PROP4_ALPHA), cf.true_strategic, 1e-9);
    report.condition("current stable set is the first-half model", cf.current_survivors == vec![0]);
    report.condition("predicted counterfactual below current", cf.predicted < cf.current);
    report.condition("true counterfactual above current", cf.true_strategic > cf.current);
    report.notes.push(format!("algorithm distance (grid lower bound): {:.6}", cf.d_p_between));
    if cfg.sensitivity {
        for alpha in SENSITIVITY_VALUES {
            let (inst, p_cf) = make_prop4_instance_with(alpha, ReweightScope::Componentwise)?;
            let cf = counterfactual_audit(&inst, &p_cf, &user, &cfg.dominance)?;
            let matches = (closed.predicted_toxic_at_q1(alpha) - cf.predicted).abs() <= 1e-9
                && (closed.true_toxic(alpha) - cf.true_strategic).abs() <= 1e-9;
            report.sensitivity.insert(format!("alpha={alpha}: engine matches closed forms"), matches);
            report.sensitivity.insert(format!("alpha={alpha}: predicted < current < true"), cf.predicted < cf.current && cf.current < cf.true_strategic);
            report.notes.push(format!("alpha = {alpha}: predicted {:.6}, true {:.6}", cf.predicted, cf.true_strategic));
        }
    }
    Ok(())
}

fn reproduce_5(cfg: &ReproduceConfig, report: &mut PropositionReport) -> Result<()> {
    let params = prop5_params();
    let (before, after) = make_prop5_instance()?;
    let closed = Stylized::from_params(&params);
    let user = params.user_params();
    let sb = solve_strategic(&before, &user, &cfg.dominance)?;
    let sa = solve_strategic(&after, &user, &cfg.dominance)?;
    report.check("platform_payoff_before", closed.strategic_first_half(), sb.worst_case_platform_payoff, 1e-12);
    report.check("platform_payoff_after", closed.naive(), sa.worst_case_platform_payoff, 1e-12);
    report.condition("before: engages on positive first-half items only", sb.strategy == params.click_only(&params.partition_a));
    report.condition("before: stable set is the first-half model", sb.stable_set.survivors == vec![0]);
    let first_half_row = sa
        .per_candidate_table
        .iter()
        .find(|c| c.survivors == vec![0]);
    report.condition("after: no candidate keeps the first-half model alone", first_half_row.is_none());
    let decrease = sb.worst_case_platform_payoff - sa.worst_case_platform_payoff;
    report.condition("platform payoff decreases by at least 0.01", decrease >= 0.01);
    report.notes.push(format!(
        "gamma = {}, eta = {}, lambda = {}; decrease {decrease:.6}",
        params.gamma,
        params.gamma / 2.0,
        params.lambda
    ));
    if cfg.sensitivity {
        for eta in SENSITIVITY_VALUES {
            let (_, after) = make_prop5_instance_eta(&params, eta)?;
            let sa = solve_strategic(&after, &user, &cfg.dominance)?;
            let decrease = sb.worst_case_platform_payoff - sa.worst_case_platform_payoff;
            report.notes.push(format!(
                "eta = {eta}: after-payoff {:.6}, survivors {:?}, decrease {decrease:.6}",
                sa.worst_case_platform_payoff, sa.stable_set.survivors
            ));
            report.sensitivity.insert(format!("eta={eta}: platform payoff decreases by at least 0.01"), decrease >= 0.01);
        }
    }
    Ok(())
}
