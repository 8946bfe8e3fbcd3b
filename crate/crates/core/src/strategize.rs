//! Naive and strategic users, penalized payoffs and the max-min strategy search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{BeliefGrid, ProposerAlgorithm};
use crate::error::{Error, Result};
use crate::model::{tv_unchecked, Belief, Distribution, GameInstance, HypothesisClass, PayoffMatrix, Strategy};
use crate::stability::{stable_set, DominanceParams, StableSetResult};

pub const DEFAULT_MASK_CAP: usize = 16;
pub const DEFAULT_MAX_CANDIDATES: usize = 100_000;
/// Values this close count as tied in the argmax.
pub const VALUE_TIE_TOL: f64 = 1e-12;

fn default_mask_cap() -> usize {
    DEFAULT_MASK_CAP
}

fn default_max_candidates() -> usize {
    DEFAULT_MAX_CANDIDATES
}

/// The finite strategy family searched by the strategic user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSpec {
    /// Every subset of propositions as a mask.
    AllSupportMasks {
        #[serde(default = "default_mask_cap")]
        cap: usize,
    },
    /// Only the listed proposition subsets as masks.
    PartitionMasks { sets: Vec<Vec<usize>> },
    Explicit { strategies: Vec<Strategy> },
    /// For each mask, every row inside it mixes the best-response row and the
    /// opt-out row with weights on a grid of step 1/resolution.
    GridRefine {
        #[serde(default)]
        masks: Option<Vec<Vec<usize>>>,
        resolution: usize,
        #[serde(default = "default_max_candidates")]
        max_candidates: usize,
    },
}

impl Default for CandidateSpec {
    fn default() -> Self {
        CandidateSpec::AllSupportMasks { cap: DEFAULT_MASK_CAP }
    }
}

impl CandidateSpec {
    pub fn describe(&self) -> String {
        match self {
            CandidateSpec::AllSupportMasks { cap } => format!("all support masks on the best response (cap {cap})"),
            CandidateSpec::PartitionMasks { sets } => format!("{} listed support masks on the best response", sets.len()),
            CandidateSpec::Explicit { strategies } => format!("{} explicit strategies", strategies.len()),
            CandidateSpec::GridRefine { masks, resolution, .. } => format!(
                "{} masks with per-row engagement grid of step 1/{resolution}",
                masks.as_ref().map_or("all".to_string(), |m| m.len().to_string())
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserParams {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub opt_out_behavior: usize,
    #[serde(default)]
    pub candidates: CandidateSpec,
}

impl Default for UserParams {
    fn default() -> Self {
        UserParams { lambda: 0.0, opt_out_behavior: 0, candidates: CandidateSpec::default() }
    }
}

impl UserParams {
    pub fn with_lambda(lambda: f64) -> Self {
        UserParams { lambda, ..Default::default() }
    }

    pub fn validate(&self, n_propositions: usize, n_behaviors: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {} must be non-negative", self.lambda)));
        }
        if self.opt_out_behavior >= n_behaviors {
            return Err(Error::InvalidParameter(format!("opt-out behavior {} out of range", self.opt_out_behavior)));
        }
        match &self.candidates {
            CandidateSpec::AllSupportMasks { cap } => {
                if n_propositions > *cap {
                    return Err(Error::SizeGuard(format!(
                        "{n_propositions} propositions exceed the support-mask cap {cap}"
                    )));
                }
            }
            CandidateSpec::PartitionMasks { sets } => {
                if let Some(z) = sets.iter().flatten().find(|&&z| z >= n_propositions) {
                    return Err(Error::Dimension(format!("mask proposition {z} out of range")));
                }
            }
            CandidateSpec::Explicit { strategies } => {
                if strategies.iter().any(|s| s.n_propositions() != n_propositions || s.n_behaviors() != n_behaviors) {
                    return Err(Error::Dimension("explicit candidate has the wrong shape".into()));
                }
            }
            CandidateSpec::GridRefine { masks, resolution, .. } => {
                if *resolution < 1 {
                    return Err(Error::InvalidParameter("grid refinement resolution must be positive".into()));
                }
                if masks.is_none() && n_propositions > DEFAULT_MASK_CAP {
                    return Err(Error::SizeGuard("grid refinement over all masks needs explicit masks".into()));
                }
                if let Some(z) = masks.iter().flatten().flatten().find(|&&z| z >= n_propositions) {
                    return Err(Error::Dimension(format!("mask proposition {z} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// How the user behaves in an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserModel {
    Naive,
    Strategic(UserParams),
}

/// Best response with uniform tie-breaking over each row's argmax set.
pub fn naive_strategy(u: &PayoffMatrix) -> Strategy {
    let rows = (0..u.n_propositions())
        .map(|z| {
            let row = u.row(z);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let count = row.iter().filter(|&&v| v == max).count();
            row.iter().map(|&v| if v == max { 1.0 / count as f64 } else { 0.0 }).collect()
        })
        .collect();
    Strategy::new(rows).expect("best-response rows are stochastic")
}

/// Propositions whose user payoff row has more than one maximizer.
pub fn tied_rows(u: &PayoffMatrix) -> Vec<usize> {
    (0..u.n_propositions())
        .filter(|&z| {
            let row = u.row(z);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter().filter(|&&v| v == max).count() > 1
        })
        .collect()
}

/// Σ_Z TV(q(·|Z), q_br(·|Z)).
pub fn total_deviation(q: &Strategy, q_br: &Strategy) -> f64 {
    (0..q.n_propositions()).map(|z| tv_unchecked(q.row(z), q_br.row(z))).sum()
}

fn check_payoff_shapes(r: &Distribution, q: &Strategy, m: &PayoffMatrix) -> Result<()> {
    if r.len() != q.n_propositions() || m.n_propositions() != q.n_propositions() || m.n_behaviors() != q.n_behaviors() {
        return Err(Error::Dimension("payoff evaluation shapes disagree".into()));
    }
    Ok(())
}

/// E_{Z∼r}[E_{B∼q(·|Z)} U(Z,B) − λ·TV(q(·|Z), q_br(·|Z))].
pub fn expected_user_payoff(r: &Distribution, q: &Strategy, q_br: &Strategy, u: &PayoffMatrix, lambda: f64) -> Result<f64> {
    check_payoff_shapes(r, q, u)?;
    if q_br.n_propositions() != q.n_propositions() || q_br.n_behaviors() != q.n_behaviors() {
        return Err(Error::Dimension("best response shape disagrees".into()));
    }
    let mut total = 0.0;
    for (z, &rz) in r.weights().iter().enumerate() {
        if rz == 0.0 {
            continue;
        }
        let gain: f64 = q.row(z).iter().zip(u.row(z)).map(|(p, v)| p * v).sum();
        let penalty = if lambda == 0.0 { 0.0 } else { lambda * tv_unchecked(q.row(z), q_br.row(z)) };
        total += rz * (gain - penalty);
    }
    Ok(total)
}

/// E_{Z∼r, B∼q(·|Z)} V(Z,B).
pub fn expected_platform_payoff(r: &Distribution, q: &Strategy, v: &PayoffMatrix) -> Result<f64> {
    check_payoff_shapes(r, q, v)?;
    Ok(r
        .weights()
        .iter()
        .enumerate()
        .map(|(z, rz)| rz * q.row(z).iter().zip(v.row(z)).map(|(p, x)| p * x).sum::<f64>())
        .sum())
}

#[derive(Debug, Clone, Copy)]
pub enum Payoff<'a> {
    User { u: &'a PayoffMatrix, q_br: &'a Strategy, lambda: f64 },
    Platform { v: &'a PayoffMatrix },
}

impl Payoff<'_> {
    pub fn eval(&self, r: &Distribution, q: &Strategy) -> Result<f64> {
        match *self {
            Payoff::User { u, q_br, lambda } => expected_user_payoff(r, q, q_br, u, lambda),
            Payoff::Platform { v } => expected_platform_payoff(r, q, v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub at: Belief,
    pub grid_resolution: usize,
    pub grid_points: usize,
}

/// Extremum of a payoff at p(·;μ) over the grid on Δ(models).
pub fn extremum_over(
    p: &ProposerAlgorithm,
    class: &HypothesisClass,
    models: &[usize],
    q: &Strategy,
    payoff: Payoff<'_>,
    params: &DominanceParams,
    sense: Sense,
) -> Result<Extremum> {
    let grid: BeliefGrid = params.grid_for(class.len(), models)?;
    let mut best: Option<(f64, usize)> = None;
    for (k, b) in grid.points().iter().enumerate() {
        let v = payoff.eval(&p.propose(b, class)?, q)?;
        let better = match (best, sense) {
            (None, _) => true,
            (Some((cur, _)), Sense::Min) => v < cur,
            (Some((cur, _)), Sense::Max) => v > cur,
        };
        if better {
            best = Some((v, k));
        }
    }
    let (value, k) = best.ok_or_else(|| Error::Precondition("empty belief grid".into()))?;
    Ok(Extremum { value, at: grid.points()[k].clone(), grid_resolution: grid.resolution(), grid_points: grid.len() })
}

/// Extremum of a payoff over Δ(survivors of `stable`).
pub fn worst_case_over_stable(
    p: &ProposerAlgorithm,
    class: &HypothesisClass,
    stable: &StableSetResult,
    q: &Strategy,
    payoff: Payoff<'_>,
    params: &DominanceParams,
    sense: Sense,
) -> Result<Extremum> {
    if stable.survivors.is_empty() {
        return Err(Error::Precondition("stable set is empty".into()));
    }
    extremum_over(p, class, &stable.survivors, q, payoff, params, sense)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    pub label: String,
    pub strategy: Strategy,
}

fn masked(q_br: &Strategy, mask: &[bool], opt_out: usize) -> Strategy {
    let nb = q_br.n_behaviors();
    let rows = (0..q_br.n_propositions())
        .map(|z| {
            if mask[z] {
                q_br.row(z).to_vec()
            } else {
                let mut row = vec![0.0; nb];
                row[opt_out] = 1.0;
                row
            }
        })
        .collect();
    Strategy::new(rows).expect("masked rows are stochastic")
}

/// Names a masked strategy by the propositions where it differs from opting out.
fn engaged_label(q: &Strategy, opt_out: usize) -> String {
    let items: Vec<String> =
        (0..q.n_propositions()).filter(|&z| q.prob(opt_out, z) < 1.0).map(|z| format!("z{z}")).collect();
    format!("engage{{{}}}", items.join(","))
}

fn all_masks(nz: usize) -> Vec<Vec<bool>> {
    (0..(1u64 << nz)).rev().map(|bits| (0..nz).map(|z| bits & (1 << z) != 0).collect()).collect()
}

fn set_to_mask(set: &[usize], nz: usize) -> Vec<bool> {
    let mut mask = vec![false; nz];
    for &z in set {
        mask[z] = true;
    }
    mask
}

/// The candidate family. Candidate 0 is always the best response; exact duplicates are dropped.
pub fn build_candidates(q_br: &Strategy, user: &UserParams) -> Result<Vec<Candidate>> {
    let (nz, nb) = (q_br.n_propositions(), q_br.n_behaviors());
    user.validate(nz, nb)?;
    let opt = user.opt_out_behavior;
    let mut raw: Vec<(String, Strategy)> = vec![("best_response".into(), q_br.clone())];
    match &user.candidates {
        CandidateSpec::AllSupportMasks { .. } => {
            for mask in all_masks(nz) {
                let q = masked(q_br, &mask, opt);
                raw.push((engaged_label(&q, opt), q));
            }
        }
        CandidateSpec::PartitionMasks { sets } => {
            for set in sets {
                let mask = set_to_mask(set, nz);
                let q = masked(q_br, &mask, opt);
                raw.push((engaged_label(&q, opt), q));
            }
        }
        CandidateSpec::Explicit { strategies } => {
            for (k, s) in strategies.iter().enumerate() {
                raw.push((format!("explicit{k}"), s.clone()));
            }
        }
        CandidateSpec::GridRefine { masks, resolution, max_candidates } => {
            let mask_list: Vec<Vec<bool>> = match masks {
                Some(sets) => sets.iter().map(|s| set_to_mask(s, nz)).collect(),
                None => all_masks(nz),
            };
            let k = *resolution;
            let mut total: u128 = 0;
            for mask in &mask_list {
                let inside = mask.iter().filter(|m| **m).count() as u32;
                total += ((k + 1) as u128).saturating_pow(inside);
            }
            if total > *max_candidates as u128 {
                return Err(Error::SizeGuard(format!("grid refinement would build {total} candidates (max {max_candidates})")));
            }
            let mut opt_row = vec![0.0; nb];
            opt_row[opt] = 1.0;
            for mask in &mask_list {
                let inside: Vec<usize> = (0..nz).filter(|&z| mask[z]).collect();
                let mut levels = vec![k; inside.len()];
                loop {
                    let mut rows: Vec<Vec<f64>> = (0..nz).map(|_| opt_row.clone()).collect();
                    for (slot, &z) in inside.iter().enumerate() {
                        let t = levels[slot] as f64 / k as f64;
                        rows[z] = q_br.row(z).iter().zip(&opt_row).map(|(a, o)| t * a + (1.0 - t) * o).collect();
                    }
                    let label = format!(
                        "{}@[{}]",
                        engaged_label(&masked(q_br, mask, opt), opt),
                        levels.iter().map(|l| format!("{l}/{k}")).collect::<Vec<_>>().join(",")
                    );
                    raw.push((label, Strategy::new(rows)?));
                    // Odometer over levels, counting down from k.
                    let mut pos = 0;
                    while pos < levels.len() && levels[pos] == 0 {
                        levels[pos] = k;
                        pos += 1;
                    }
                    if pos == levels.len() {
                        break;
                    }
                    levels[pos] -= 1;
                }
            }
        }
    }
    let mut out: Vec<Candidate> = Vec::with_capacity(raw.len());
    for (label, strategy) in raw {
        if out.iter().any(|c| c.strategy == strategy) {
            continue;
        }
        out.push(Candidate { id: out.len(), label, strategy });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub id: usize,
    pub label: String,
    pub survivors: Vec<usize>,
    pub user_payoff: f64,
    pub platform_payoff: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategicSolution {
    pub candidate_id: usize,
    pub label: String,
    pub strategy: Strategy,
    pub stable_set: StableSetResult,
    pub worst_case_user_payoff: f64,
    pub worst_case_platform_payoff: f64,
    pub per_candidate_table: Vec<CandidateEvaluation>,
    pub family: String,
    pub lambda: f64,
}

impl StrategicSolution {
    pub fn is_best_response(&self) -> bool {
        self.candidate_id == 0
    }

    pub fn naive_row(&self) -> &CandidateEvaluation {
        &self.per_candidate_table[0]
    }
}

struct Evaluated {
    row: CandidateEvaluation,
    stable: StableSetResult,
}

fn evaluate_candidate(
    inst: &GameInstance,
    q_br: &Strategy,
    cand: &Candidate,
    lambda: f64,
    params: &DominanceParams,
) -> Result<Evaluated> {
    let stable = stable_set(&cand.strategy, &inst.algorithm, &inst.class, params)?;
    let user = Payoff::User { u: &inst.user_payoff, q_br, lambda };
    let platform = Payoff::Platform { v: &inst.platform_payoff };
    let up = worst_case_over_stable(&inst.algorithm, &inst.class, &stable, &cand.strategy, user, params, Sense::Min)?;
    let vp = worst_case_over_stable(&inst.algorithm, &inst.class, &stable, &cand.strategy, platform, params, Sense::Min)?;
    Ok(Evaluated {
        row: CandidateEvaluation {
            id: cand.id,
            label: cand.label.clone(),
            survivors: stable.survivors.clone(),
            user_payoff: up.value,
            platform_payoff: vp.value,
            deviation: total_deviation(&cand.strategy, q_br),
        },
        stable,
    })
}

/// Index of the maximizer under the documented tie-break.
fn argmax_with_ties(values: &[(f64, f64)]) -> usize {
    let best = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let mut pick: Option<usize> = None;
    for (k, &(v, dev)) in values.iter().enumerate() {
        if v >= best - VALUE_TIE_TOL && pick.is_none_or(|p| dev < values[p].1) {
            pick = Some(k);
        }
    }
    pick.unwrap_or(0)
}

/// Max over the candidate family of the worst-case user payoff over each candidate's stable set.
pub fn solve_strategic(inst: &GameInstance, user: &UserParams, params: &DominanceParams) -> Result<StrategicSolution> {
    inst.check_shapes()?;
    params.validate()?;
    let q_br = naive_strategy(&inst.user_payoff);
    let candidates = build_candidates(&q_br, user)?;
    let evaluated: Vec<Evaluated> = candidates
        .par_iter()
        .map(|c| evaluate_candidate(inst, &q_br, c, user.lambda, params))
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<(f64, f64)> = evaluated.iter().map(|e| (e.row.user_payoff, e.row.deviation)).collect();
    let k = argmax_with_ties(&keys);
    let chosen = &evaluated[k];
    Ok(StrategicSolution {
        candidate_id: candidates[k].id,
        label: candidates[k].label.clone(),
        strategy: candidates[k].strategy.clone(),
        stable_set: chosen.stable.clone(),
        worst_case_user_payoff: chosen.row.user_payoff,
        worst_case_platform_payoff: chosen.row.platform_payoff,
        per_candidate_table: evaluated.iter().map(|e| e.row.clone()).collect(),
        family: user.candidates.describe(),
        lambda: user.lambda,
    })
}

/// The naive user's stable set and worst-case payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveOutcome {
    pub strategy: Strategy,
    pub stable_set: StableSetResult,
    pub worst_case_user_payoff: f64,
    pub worst_case_platform_payoff: f64,
}

pub fn naive_outcome(inst: &GameInstance, lambda: f64, params: &DominanceParams) -> Result<NaiveOutcome> {
    let q_br = naive_strategy(&inst.user_payoff);
    let cand = Candidate { id: 0, label: "best_response".into(), strategy: q_br.clone() };
    let e = evaluate_candidate(inst, &q_br, &cand, lambda, params)?;
    Ok(NaiveOutcome {
        strategy: q_br,
        stable_set: e.stable,
        worst_case_user_payoff: e.row.user_payoff,
        worst_case_platform_payoff: e.row.platform_payoff,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub lhs: f64,
    pub rhs: f64,
    pub strategization_helps: bool,
    pub strategic_candidate: usize,
    pub full_simplex_candidate: usize,
    /// The full-simplex argmax coincides with the best response.
    pub naive_side_is_best_response: bool,
}

/// Compares the platform's worst-case payoff at the strategic argmax with the one
/// at the argmax of the user's worst case over the whole belief simplex.
pub fn alignment_benefit_check(inst: &GameInstance, user: &UserParams, params: &DominanceParams) -> Result<AlignmentReport> {
    let ties = tied_rows(&inst.user_payoff);
    if !ties.is_empty() {
        return Err(Error::Precondition(format!("user payoff has tied maximizers at propositions {ties:?}")));
    }
    let sol = solve_strategic(inst, user, params)?;
    let q_br = naive_strategy(&inst.user_payoff);
    let candidates = build_candidates(&q_br, user)?;
    let all: Vec<usize> = (0..inst.class.len()).collect();
    let payoff = Payoff::User { u: &inst.user_payoff, q_br: &q_br, lambda: user.lambda };
    let keys = candidates
        .par_iter()
        .map(|c| {
            let e = extremum_over(&inst.algorithm, &inst.class, &all, &c.strategy, payoff, params, Sense::Min)?;
            Ok((e.value, total_deviation(&c.strategy, &q_br)))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = argmax_with_ties(&keys);
    let rhs = sol.per_candidate_table[k].platform_payoff;
    Ok(AlignmentReport {
        lhs: sol.worst_case_platform_payoff,
        rhs,
        strategization_helps: sol.worst_case_platform_payoff > rhs,
        strategic_candidate: sol.candidate_id,
        full_simplex_candidate: candidates[k].id,
        naive_side_is_best_response: k == 0,
    })
}
