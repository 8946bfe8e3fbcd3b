//! Strict KL dominance and iterated elimination of dominated user models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{propose_all, BeliefGrid, ProposerAlgorithm, DEFAULT_GRID_K, DEFAULT_MAX_GRID_POINTS};
use crate::error::{Error, Result};
use crate::model::{Belief, Distribution, HypothesisClass, Strategy};
use crate::serde_ext::ext_f64;

pub const DEFAULT_TAU_DOM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceParams {
    /// Finest resolution tried for each round's grid.
    pub grid_k: usize,
    /// Rounds with more active models coarsen the grid to stay under this many points.
    pub max_grid_points: usize,
    pub tau_dom: f64,
    /// Defaults to the class size.
    pub max_rounds: Option<usize>,
}

impl Default for DominanceParams {
    fn default() -> Self {
        DominanceParams {
            grid_k: DEFAULT_GRID_K,
            max_grid_points: DEFAULT_MAX_GRID_POINTS,
            tau_dom: DEFAULT_TAU_DOM,
            max_rounds: None,
        }
    }
}

impl DominanceParams {
    pub fn with_grid_k(mut self, k: usize) -> Self {
        self.grid_k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_k < 1 {
            return Err(Error::InvalidParameter("grid_k must be positive".into()));
        }
        if !(self.tau_dom > 0.0 && self.tau_dom.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_dom = {} must be positive", self.tau_dom)));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::InvalidParameter("max_rounds must be positive".into()));
        }
        Ok(())
    }

    pub fn grid_for(&self, n_models: usize, active: &[usize]) -> Result<BeliefGrid> {
        BeliefGrid::adaptive(n_models, active, self.grid_k, self.max_grid_points)
    }
}

/// Per-model expected log-likelihood terms for a fixed user strategy.
///
/// `ell[m][z]` is Σ_b q(b|z) ln q̂_m(b|z) over behaviors both assign positive
/// probability, and `violates[m][z]` flags a behavior the user plays at z that
/// model m rules out.
#[derive(Debug, Clone)]
struct LogLikTable {
    ell: Vec<Vec<f64>>,
    violates: Vec<Vec<bool>>,
}

impl LogLikTable {
    fn new(q: &Strategy, class: &HypothesisClass) -> Result<Self> {
        if q.n_propositions() != class.n_propositions() || q.n_behaviors() != class.n_behaviors() {
            return Err(Error::Dimension("user strategy shape does not match the class".into()));
        }
        let (nz, nb) = (class.n_propositions(), class.n_behaviors());
        let mut ell = vec![vec![0.0; nz]; class.len()];
        let mut violates = vec![vec![false; nz]; class.len()];
        for (m, model) in class.models().iter().enumerate() {
            for z in 0..nz {
                for b in 0..nb {
                    let qb = q.prob(b, z);
                    if qb <= 0.0 {
                        continue;
                    }
                    let p = model.prob(b, z);
                    if p > 0.0 {
                        ell[m][z] += qb * p.ln();
                    } else {
                        violates[m][z] = true;
                    }
                }
            }
        }
        Ok(LogLikTable { ell, violates })
    }

    fn violates_at(&self, m: usize, r: &[f64]) -> bool {
        r.iter().zip(&self.violates[m]).any(|(w, v)| *w > 0.0 && *v)
    }

    fn score(&self, m: usize, r: &[f64]) -> f64 {
        r.iter().zip(&self.ell[m]).map(|(w, l)| w * l).sum()
    }
}

/// Gap value at a single proposition distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PointGap {
    Value(f64),
    Indeterminate,
}

#[derive(Debug, Clone)]
struct PointScores {
    score: Vec<f64>,
    violates: Vec<bool>,
}

impl PointScores {
    fn new(table: &LogLikTable, r: &[f64], models: &[usize], n_models: usize) -> Self {
        let mut score = vec![0.0; n_models];
        let mut violates = vec![false; n_models];
        for &m in models {
            score[m] = table.score(m, r);
            violates[m] = table.violates_at(m, r);
        }
        PointScores { score, violates }
    }

    fn gap(&self, i: usize, j: usize) -> PointGap {
        if i == j {
            return PointGap::Value(0.0);
        }
        match (self.violates[i], self.violates[j]) {
            (true, true) => PointGap::Indeterminate,
            (false, true) => PointGap::Value(f64::INFINITY),
            (true, false) => PointGap::Value(f64::NEG_INFINITY),
            (false, false) => PointGap::Value(self.score[i] - self.score[j]),
        }
    }
}

/// KL_j − KL_i of the joint (proposition, behavior) law at `r`, in nats.
/// Positive values mean model `qi` explains the user's behavior better than `qj`.
pub fn joint_kl_gap(q: &Strategy, qi: usize, qj: usize, r: &Distribution, class: &HypothesisClass) -> Result<f64> {
    if qi >= class.len() || qj >= class.len() {
        return Err(Error::Dimension(format!("model index out of range for {} models", class.len())));
    }
    if r.len() != class.n_propositions() {
        return Err(Error::Dimension("proposition distribution has wrong length".into()));
    }
    let table = LogLikTable::new(q, class)?;
    let scores = PointScores::new(&table, r.weights(), &[qi, qj], class.len());
    match scores.gap(qi, qj) {
        PointGap::Value(v) => Ok(v),
        PointGap::Indeterminate => Err(Error::Indeterminate { i: qi, j: qj }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceStatus {
    Dominates,
    NotDominated,
    /// The minimum margin lies within ±τ_dom: refine the grid to decide.
    Inconclusive,
    /// Both models violate the user's support somewhere on the grid.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCertificate {
    pub dominator: usize,
    pub dominated: usize,
    pub status: DominanceStatus,
    #[serde(with = "ext_f64")]
    pub min_margin: f64,
    pub argmin: Option<Belief>,
}

impl DominanceCertificate {
    pub fn holds(&self) -> bool {
        self.status == DominanceStatus::Dominates
    }
}

fn certify(i: usize, j: usize, points: &[PointScores], grid: &BeliefGrid, tau: f64) -> DominanceCertificate {
    let mut min = f64::INFINITY;
    let mut argmin = None;
    let mut first_indeterminate = None;
    for (k, ps) in points.iter().enumerate() {
        match ps.gap(i, j) {
            PointGap::Indeterminate => {
                first_indeterminate.get_or_insert(k);
            }
            PointGap::Value(v) => {
                if argmin.is_none() || v < min {
                    min = v;
                    argmin = Some(k);
                }
            }
        }
    }
    let indeterminate = first_indeterminate.is_some();
    let argmin = first_indeterminate.or(argmin);
    let status = if indeterminate {
        DominanceStatus::Indeterminate
    } else if min > tau {
        DominanceStatus::Dominates
    } else if min >= -tau {
        DominanceStatus::Inconclusive
    } else {
        DominanceStatus::NotDominated
    };
    DominanceCertificate {
        dominator: i,
        dominated: j,
        status,
        min_margin: if indeterminate { f64::NAN } else { min },
        argmin: argmin.map(|k| grid.points()[k].clone()),
    }
}

fn point_scores(
    q: &Strategy,
    p: &ProposerAlgorithm,
    class: &HypothesisClass,
    grid: &BeliefGrid,
) -> Result<Vec<PointScores>> {
    let table = LogLikTable::new(q, class)?;
    let rs = propose_all(p, class, grid)?;
    Ok(rs.par_iter().map(|r| PointScores::new(&table, r.weights(), grid.active(), class.len())).collect())
}

/// Checks q̂ᵢ ≻ q̂ⱼ at every grid point of Δ(active).
pub fn dominates(
    q: &Strategy,
    qi: usize,
    qj: usize,
    p: &ProposerAlgorithm,
    active: &[usize],
    params: &DominanceParams,
    class: &HypothesisClass,
) -> Result<DominanceCertificate> {
    params.validate()?;
    if !active.contains(&qi) || !active.contains(&qj) {
        return Err(Error::Precondition(format!("models {qi} and {qj} must both be active")));
    }
    let grid = params.grid_for(class.len(), active)?;
    let points = point_scores(q, p, class, &grid)?;
    Ok(certify(qi, qj, &points, &grid, params.tau_dom))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub round: usize,
    pub eliminated: usize,
    pub dominator: usize,
    #[serde(with = "ext_f64")]
    pub min_margin: f64,
    pub argmin: Option<Belief>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub active: Vec<usize>,
    pub grid_resolution: usize,
    pub grid_points: usize,
    pub eliminated: Vec<usize>,
    /// Pairs whose margin fell inside ±τ_dom.
    pub inconclusive: Vec<(usize, usize)>,
    /// Pairs where both models violate the user's support.
    pub indeterminate: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSetResult {
    pub survivors: Vec<usize>,
    pub rounds: Vec<Elimination>,
    pub round_summaries: Vec<RoundSummary>,
    pub grid_used: BeliefGrid,
    pub dominance_reading: String,
}

impl StableSetResult {
    pub fn is_singleton(&self) -> bool {
        self.survivors.len() == 1
    }
}

pub const DOMINANCE_READING: &str =
    "a single dominator must beat the eliminated model at every grid point of the current simplex; eliminations within a round are simultaneous";

/// Iterated elimination of strictly KL-dominated models.
pub fn stable_set(
    q: &Strategy,
    p: &ProposerAlgorithm,
    class: &HypothesisClass,
    params: &DominanceParams,
) -> Result<StableSetResult> {
    params.validate()?;
    p.check(class)?;
    let table = LogLikTable::new(q, class)?;
    let m = class.len();
    let max_rounds = params.max_rounds.unwrap_or(m).max(1);
    let mut active: Vec<usize> = (0..m).collect();
    let first_grid = params.grid_for(m, &active)?;
    let mut rounds = Vec::new();
    let mut summaries = Vec::new();
    for round in 1..=max_rounds {
        if active.len() == 1 {
            break;
        }
        let grid = if round == 1 { first_grid.clone() } else { params.grid_for(m, &active)? };
        let rs = propose_all(p, class, &grid)?;
        let points: Vec<PointScores> =
            rs.par_iter().map(|r| PointScores::new(&table, r.weights(), &active, m)).collect();
        let per_target: Vec<(Option<DominanceCertificate>, Vec<(usize, usize)>, Vec<(usize, usize)>)> = active
            .par_iter()
            .map(|&j| {
                let mut best: Option<DominanceCertificate> = None;
                let (mut inconclusive, mut indeterminate) = (Vec::new(), Vec::new());
                for &i in active.iter().filter(|&&i| i != j) {
                    let cert = certify(i, j, &points, &grid, params.tau_dom);
                    match cert.status {
                        DominanceStatus::Dominates => {
                            if best.as_ref().is_none_or(|b| cert.min_margin > b.min_margin) {
                                best = Some(cert);
                            }
                        }
                        DominanceStatus::Inconclusive => inconclusive.push((i, j)),
                        DominanceStatus::Indeterminate => indeterminate.push((i, j)),
                        DominanceStatus::NotDominated => {}
                    }
                }
                (best, inconclusive, indeterminate)
            })
            .collect();
        let mut eliminated = Vec::new();
        let mut summary = RoundSummary {
            round,
            active: active.clone(),
            grid_resolution: grid.resolution(),
            grid_points: grid.len(),
            eliminated: Vec::new(),
            inconclusive: Vec::new(),
            indeterminate: Vec::new(),
        };
        for (best, inc, ind) in per_target {
            summary.inconclusive.extend(inc);
            summary.indeterminate.extend(ind);
            if let Some(c) = best {
                eliminated.push(c.dominated);
                rounds.push(Elimination {
                    round,
                    eliminated: c.dominated,
                    dominator: c.dominator,
                    min_margin: c.min_margin,
                    argmin: c.argmin,
                });
            }
        }
        summary.eliminated = eliminated.clone();
        summaries.push(summary);
        if eliminated.is_empty() {
            break;
        }
        active.retain(|i| !eliminated.contains(i));
        if active.is_empty() {
            // Unreachable: the model with the smallest KL at any grid point is never dominated.
            return Err(Error::Precondition("elimination removed every model".into()));
        }
    }
    Ok(StableSetResult {
        survivors: active,
        rounds,
        round_summaries: summaries,
        grid_used: first_grid,
        dominance_reading: DOMINANCE_READING.to_string(),
    })
}

/// Closed-form stable set of the three-model stylized class.
///
/// Returns the index into that class: 0 when the user engages only inside
/// `partition_a`, 1 when only inside `partition_b`, 2 otherwise.
pub fn stylized_stable_set(q: &Strategy, partition_a: &[usize], partition_b: &[usize], engage: usize) -> Result<usize> {
    let support: Vec<usize> = (0..q.n_propositions()).filter(|&z| q.prob(engage, z) > 0.0).collect();
    if support.is_empty() {
        return Err(Error::DegenerateStrategy("the user never engages".into()));
    }
    let hits_a = support.iter().any(|z| partition_a.contains(z));
    let hits_b = support.iter().any(|z| partition_b.contains(z));
    Ok(match (hits_a, hits_b) {
        (_, false) => 0,
        (false, true) => 1,
        (true, true) => 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class3() -> HypothesisClass {
        HypothesisClass::new(
            vec![
                Strategy::from_engagement(&[0.8, 0.0]).unwrap(),
                Strategy::from_engagement(&[0.0, 0.8]).unwrap(),
                Strategy::from_engagement(&[0.8, 0.8]).unwrap(),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn self_gap_is_zero() {
        let class = class3();
        let q = Strategy::from_engagement(&[1.0, 0.0]).unwrap();
        let r = Distribution::uniform(2);
        assert_eq!(joint_kl_gap(&q, 1, 1, &r, &class).unwrap(), 0.0);
    }

    #[test]
    fn indeterminate_when_both_violate() {
        let class = class3();
        let q = Strategy::from_engagement(&[1.0, 1.0]).unwrap();
        let r = Distribution::uniform(2);
        assert!(matches!(joint_kl_gap(&q, 0, 1, &r, &class), Err(Error::Indeterminate { .. })));
        assert_eq!(joint_kl_gap(&q, 2, 0, &r, &class).unwrap(), f64::INFINITY);
        assert_eq!(joint_kl_gap(&q, 0, 2, &r, &class).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn no_self_dominance() {
        let class = class3();
        let q = Strategy::from_engagement(&[1.0, 0.0]).unwrap();
        let p = ProposerAlgorithm::engagement_proportional(0.1).unwrap();
        let c = dominates(&q, 0, 0, &p, &[0, 1, 2], &DominanceParams::default(), &class).unwrap();
        assert!(!c.holds());
        assert!(dominates(&q, 0, 1, &p, &[0, 2], &DominanceParams::default(), &class).is_err());
    }

    #[test]
    fn singleton_class() {
        let class = HypothesisClass::new(vec![Strategy::from_engagement(&[0.5, 0.5]).unwrap()], None).unwrap();
        let q = Strategy::from_engagement(&[1.0, 0.0]).unwrap();
        let res = stable_set(&q, &ProposerAlgorithm::Uniform, &class, &DominanceParams::default()).unwrap();
        assert_eq!(res.survivors, vec![0]);
        assert!(res.rounds.is_empty());
    }

    #[test]
    fn closed_form_cases() {
        let q = |c: &[f64]| Strategy::from_engagement(c).unwrap();
        let (a, b) = ([0, 1], [2, 3]);
        assert_eq!(stylized_stable_set(&q(&[1.0, 0.0, 0.0, 0.0]), &a, &b, 1).unwrap(), 0);
        assert_eq!(stylized_stable_set(&q(&[0.0, 0.0, 1.0, 0.0]), &a, &b, 1).unwrap(), 1);
        assert_eq!(stylized_stable_set(&q(&[1.0, 0.0, 1.0, 0.0]), &a, &b, 1).unwrap(), 2);
        assert!(matches!(
            stylized_stable_set(&q(&[0.0; 4]), &a, &b, 1),
            Err(Error::DegenerateStrategy(_))
        ));
    }

    #[test]
    fn result_serializes_with_infinite_margins() {
        let class = class3();
        let q = Strategy::from_engagement(&[1.0, 1.0]).unwrap();
        let p = ProposerAlgorithm::engagement_proportional(0.1).unwrap();
        let res = stable_set(&q, &p, &class, &DominanceParams::default()).unwrap();
        assert_eq!(res.survivors, vec![2]);
        let json = serde_json::to_string(&res).unwrap();
        let back: StableSetResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.survivors, res.survivors);
    }
}
