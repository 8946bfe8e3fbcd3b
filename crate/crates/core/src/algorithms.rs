//! Proposition algorithms mapping beliefs to distributions over propositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{normalize, tv_unchecked, Belief, Distribution, HypothesisClass};

fn default_engage() -> usize {
    1
}

/// How a reweighting is applied to a base algorithm that is itself a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReweightScope {
    /// Multiply the whole base output by the weights, then renormalize once.
    #[default]
    Joint,
    /// Reweight and renormalize every mixture component of the base separately,
    /// keeping the base's mixing weights.
    Componentwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProposerAlgorithm {
    Uniform,
    /// ε-uniform exploration mixed with propositions proportional to the
    /// belief-averaged probability of the `engage` behavior.
    EngagementProportional {
        eps: f64,
        #[serde(default = "default_engage")]
        engage: usize,
    },
    Reweighted {
        base: Box<ProposerAlgorithm>,
        weights: Vec<f64>,
        #[serde(default)]
        scope: ReweightScope,
    },
    /// One distribution per vertex belief; interior beliefs mix them linearly.
    Tabular { vertices: Vec<Distribution> },
}

impl ProposerAlgorithm {
    pub fn engagement_proportional(eps: f64) -> Result<Self> {
        let alg = ProposerAlgorithm::EngagementProportional { eps, engage: 1 };
        alg.check_params()?;
        Ok(alg)
    }

    pub fn reweighted(base: ProposerAlgorithm, weights: Vec<f64>, scope: ReweightScope) -> Result<Self> {
        let alg = ProposerAlgorithm::Reweighted { base: Box::new(base), weights, scope };
        alg.check_params()?;
        Ok(alg)
    }

    fn check_params(&self) -> Result<()> {
        match self {
            ProposerAlgorithm::Uniform => Ok(()),
            ProposerAlgorithm::EngagementProportional { eps, .. } => {
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::InvalidParameter(format!("exploration eps = {eps} must lie in (0,1)")));
                }
                Ok(())
            }
            ProposerAlgorithm::Reweighted { base, weights, .. } => {
                if weights.is_empty() {
                    return Err(Error::InvalidParameter("reweighting vector is empty".into()));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::InvalidParameter(format!("reweighting weight {w} must be positive")));
                }
                base.check_params()
            }
            ProposerAlgorithm::Tabular { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::InvalidParameter("tabular algorithm has no vertices".into()));
                }
                Ok(())
            }
        }
    }

    /// Checks parameters and shapes against a hypothesis class.
    pub fn check(&self, class: &HypothesisClass) -> Result<()> {
        self.check_params()?;
        let nz = class.n_propositions();
        match self {
            ProposerAlgorithm::Uniform => Ok(()),
            ProposerAlgorithm::EngagementProportional { engage, .. } => {
                if *engage >= class.n_behaviors() {
                    return Err(Error::Dimension(format!("engage behavior {engage} out of range")));
                }
                Ok(())
            }
            ProposerAlgorithm::Reweighted { base, weights, .. } => {
                if weights.len() != nz {
                    return Err(Error::Dimension(format!("{} weights for {nz} propositions", weights.len())));
                }
                base.check(class)
            }
            ProposerAlgorithm::Tabular { vertices } => {
                if vertices.len() != class.len() {
                    return Err(Error::Dimension(format!(
                        "tabular algorithm has {} vertices for {} models",
                        vertices.len(),
                        class.len()
                    )));
                }
                if vertices.iter().any(|d| d.len() != nz) {
                    return Err(Error::Dimension("tabular vertex distribution has wrong length".into()));
                }
                Ok(())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProposerAlgorithm::Uniform => "uniform",
            ProposerAlgorithm::EngagementProportional { .. } => "engagement_proportional",
            ProposerAlgorithm::Reweighted { .. } => "reweighted",
            ProposerAlgorithm::Tabular { .. } => "tabular",
        }
    }

    /// The mixture decomposition of p(·;μ) into (weight, distribution) pairs.
    pub fn components(&self, belief: &Belief, class: &HypothesisClass) -> Result<Vec<(f64, Vec<f64>)>> {
        if belief.len() != class.len() {
            return Err(Error::Dimension(format!(
                "belief has {} entries for {} models",
                belief.len(),
                class.len()
            )));
        }
        let nz = class.n_propositions();
        let mu = belief.weights();
        match self {
            ProposerAlgorithm::Uniform => Ok(vec![(1.0, vec![1.0 / nz as f64; nz])]),
            ProposerAlgorithm::EngagementProportional { eps, engage } => {
                let mut mass = vec![0.0; nz];
                for (i, &w) in mu.iter().enumerate() {
                    if w > 0.0 {
                        let m = class.model(i);
                        for (z, slot) in mass.iter_mut().enumerate() {
                            *slot += w * m.prob(*engage, z);
                        }
                    }
                }
                let prop = normalize(&mass, "belief-weighted engagement mass")?;
                Ok(vec![(*eps, vec![1.0 / nz as f64; nz]), (1.0 - eps, prop)])
            }
            ProposerAlgorithm::Reweighted { base, weights, scope } => {
                if weights.len() != nz {
                    return Err(Error::Dimension(format!("{} weights for {nz} propositions", weights.len())));
                }
                let parts = base.components(belief, class)?;
                let reweight = |d: &[f64]| -> Result<Vec<f64>> {
                    let masses: Vec<f64> = d.iter().zip(weights).map(|(p, w)| p * w).collect();
                    normalize(&masses, "reweighted mass")
                };
                match scope {
                    ReweightScope::Joint => Ok(vec![(1.0, reweight(&mix(&parts, nz))?)]),
                    ReweightScope::Componentwise => parts
                        .into_iter()
                        .filter(|(w, _)| *w > 0.0)
                        .map(|(w, d)| Ok((w, reweight(&d)?)))
                        .collect(),
                }
            }
            ProposerAlgorithm::Tabular { vertices } => {
                if vertices.len() != class.len() {
                    return Err(Error::Dimension("tabular vertex count does not match class".into()));
                }
                Ok(mu
                    .iter()
                    .zip(vertices)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, d)| (*w, d.weights().to_vec()))
                    .collect())
            }
        }
    }

    /// Evaluates p(·;μ).
    pub fn propose(&self, belief: &Belief, class: &HypothesisClass) -> Result<Distribution> {
        let parts = self.components(belief, class)?;
        let out = mix(&parts, class.n_propositions());
        let sum: f64 = out.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Ok(Distribution::from_normalized(out.iter().map(|p| p / sum).collect()));
        }
        Ok(Distribution::from_normalized(out))
    }
}

fn mix(parts: &[(f64, Vec<f64>)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (w, d) in parts {
        for (o, p) in out.iter_mut().zip(d) {
            *o += w * p;
        }
    }
    out
}

/// Evaluates `alg` at every point of `grid`, in grid order.
pub fn propose_all(alg: &ProposerAlgorithm, class: &HypothesisClass, grid: &BeliefGrid) -> Result<Vec<Distribution>> {
    grid.points().iter().map(|b| alg.propose(b, class)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeliefGridRaw {
    resolution: usize,
    n_models: usize,
    active: Vec<usize>,
    #[serde(default)]
    n_points: usize,
}

/// Beliefs on Δ(active) whose weights are multiples of 1/k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeliefGridRaw", into = "BeliefGridRaw")]
pub struct BeliefGrid {
    resolution: usize,
    n_models: usize,
    active: Vec<usize>,
    points: Vec<Belief>,
}

impl TryFrom<BeliefGridRaw> for BeliefGrid {
    type Error = Error;
    fn try_from(raw: BeliefGridRaw) -> Result<Self> {
        BeliefGrid::on_subset(raw.n_models, &raw.active, raw.resolution)
    }
}

impl From<BeliefGrid> for BeliefGridRaw {
    fn from(g: BeliefGrid) -> Self {
        BeliefGridRaw {
            resolution: g.resolution,
            n_models: g.n_models,
            n_points: g.points.len(),
            active: g.active,
        }
    }
}

/// Default grid resolution.
pub const DEFAULT_GRID_K: usize = 8;
/// Default upper bound on points in an adaptively sized grid.
pub const DEFAULT_MAX_GRID_POINTS: usize = 5000;

/// C(k+m−1, m−1), saturating.
pub fn grid_point_count(m: usize, k: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let (n, r) = (k + m - 1, (m - 1).min(k));
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn compositions(k: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(k);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=k).rev() {
        prefix.push(first);
        compositions(k - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl BeliefGrid {
    /// Grid over the full simplex of `m` models.
    pub fn full(m: usize, k: usize) -> Result<Self> {
        let all: Vec<usize> = (0..m).collect();
        BeliefGrid::on_subset(m, &all, k)
    }

    /// Grid over Δ(active) embedded in beliefs of length `m`.
    pub fn on_subset(m: usize, active: &[usize], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        if active.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one active model".into()));
        }
        let mut active = active.to_vec();
        active.sort_unstable();
        active.dedup();
        if let Some(&bad) = active.iter().find(|&&i| i >= m) {
            return Err(Error::Dimension(format!("active model {bad} out of range for {m} models")));
        }
        let mut combos = Vec::with_capacity(grid_point_count(active.len(), k));
        compositions(k, active.len(), &mut Vec::new(), &mut combos);
        let points = combos
            .into_iter()
            .map(|c| {
                let mut w = vec![0.0; m];
                for (&idx, &count) in active.iter().zip(&c) {
                    w[idx] = count as f64 / k as f64;
                }
                Belief::from_normalized(w)
            })
            .collect();
        Ok(BeliefGrid { resolution: k, n_models: m, active, points })
    }

    /// The finest grid with resolution at most `k_max` and at most `max_points` points.
    /// Falls back to vertices only (k = 1) when nothing finer fits.
    pub fn adaptive(m: usize, active: &[usize], k_max: usize, max_points: usize) -> Result<Self> {
        let mut distinct = active.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let a = distinct.len();
        let mut k = k_max.max(1);
        while k > 1 && grid_point_count(a, k) > max_points {
            k -= 1;
        }
        BeliefGrid::on_subset(m, &distinct, k)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn n_models(&self) -> usize {
        self.n_models
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn points(&self) -> &[Belief] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid lower bound on sup_μ TV(p1(·;μ), p2(·;μ)).
pub fn algorithm_distance(
    p1: &ProposerAlgorithm,
    p2: &ProposerAlgorithm,
    class: &HypothesisClass,
    grid: &BeliefGrid,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for b in grid.points() {
        let (a, c) = (p1.propose(b, class)?, p2.propose(b, class)?);
        best = best.max(tv_unchecked(a.weights(), c.weights()));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub argmax_pair: (Belief, Belief),
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Largest grid ratio TV(p(μ₁),p(μ₂)) / E[max_Z TV(q̂₁(·|Z), q̂₂(·|Z))].
pub fn estimate_lipschitz(p: &ProposerAlgorithm, class: &HypothesisClass, grid: &BeliefGrid) -> Result<LipschitzEstimate> {
    if grid.len() < 2 {
        return Err(Error::UndefinedEstimate("need at least two grid points".into()));
    }
    let m = class.len();
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = (0..class.n_propositions())
                .map(|z| tv_unchecked(class.model(i).row(z), class.model(j).row(z)))
                .fold(0.0, f64::max);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let outputs = propose_all(p, class, grid)?;
    let pts = grid.points();
    let projected: Vec<Vec<f64>> = pts
        .iter()
        .map(|b| (0..m).map(|i| (0..m).map(|j| dist[i][j] * b.weights()[j]).sum()).collect())
        .collect();
    let mut best: Option<(f64, usize, usize)> = None;
    let (mut used, mut skipped) = (0, 0);
    for a in 0..pts.len() {
        for c in (a + 1)..pts.len() {
            let denom: f64 = pts[a].weights().iter().zip(&projected[c]).map(|(w, d)| w * d).sum();
            if denom <= 1e-15 {
                skipped += 1;
                continue;
            }
            used += 1;
            let ratio = tv_unchecked(outputs[a].weights(), outputs[c].weights()) / denom;
            if best.is_none_or(|(v, _, _)| ratio > v) {
                best = Some((ratio, a, c));
            }
        }
    }
    let (value, a, c) =
        best.ok_or_else(|| Error::UndefinedEstimate("every grid pair has a zero model distance".into()))?;
    Ok(LipschitzEstimate { value, argmax_pair: (pts[a].clone(), pts[c].clone()), pairs_used: used, pairs_skipped: skipped })
}
