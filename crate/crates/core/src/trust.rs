//! Trustworthiness audits, counterfactual payoff prediction and ε-net classes.

use serde::{Deserialize, Serialize};

use crate::algorithms::{algorithm_distance, estimate_lipschitz, grid_point_count, ProposerAlgorithm};
use crate::error::{Error, Result};
use crate::model::{ActionSpaces, Belief, GameInstance, HypothesisClass, PayoffMatrix, Strategy};
use crate::stability::{stable_set, DominanceParams, StableSetResult};
use crate::strategize::{
    expected_platform_payoff, extremum_over, naive_outcome, naive_strategy, solve_strategic, Payoff, Sense,
    UserModel, UserParams,
};

pub const DEFAULT_NET_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustReport {
    pub strategic_value: f64,
    pub naive_value: f64,
    pub strategization_gap: f64,
    pub kappa: f64,
    pub strategic_candidate: usize,
    pub strategic_label: String,
    pub strategic_survivors: Vec<usize>,
    pub naive_survivors: Vec<usize>,
}

impl TrustReport {
    pub fn trustworthy_at(&self, kappa0: f64) -> bool {
        self.strategization_gap <= 0.0 && self.kappa >= kappa0
    }
}

/// Strategic versus naive worst-case user payoffs.
pub fn trust_audit(inst: &GameInstance, user: &UserParams, params: &DominanceParams) -> Result<TrustReport> {
    let sol = solve_strategic(inst, user, params)?;
    let naive = naive_outcome(inst, user.lambda, params)?;
    let strategic_value = sol.worst_case_user_payoff;
    let naive_value = naive.worst_case_user_payoff;
    Ok(TrustReport {
        strategic_value,
        naive_value,
        strategization_gap: strategic_value - naive_value,
        kappa: naive_value,
        strategic_candidate: sol.candidate_id,
        strategic_label: sol.label,
        strategic_survivors: sol.stable_set.survivors,
        naive_survivors: naive.stable_set.survivors,
    })
}

/// Σᵢ μᵢ V̄(p_cf(·;μ), q̂ᵢ): the platform's payoff forecast under its current belief.
pub fn predicted_payoff(p_cf: &ProposerAlgorithm, mu: &Belief, class: &HypothesisClass, v: &PayoffMatrix) -> Result<f64> {
    let r = p_cf.propose(mu, class)?;
    let mut total = 0.0;
    for (i, &w) in mu.weights().iter().enumerate() {
        if w > 0.0 {
            total += w * expected_platform_payoff(&r, class.model(i), v)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruePayoff {
    pub value: f64,
    pub strategy: Strategy,
    pub stable_set: StableSetResult,
    pub worst_belief: Belief,
}

/// Worst-case platform payoff when the instance runs `p_cf` and the user reacts to it.
pub fn true_payoff(inst: &GameInstance, p_cf: &ProposerAlgorithm, user: &UserModel, params: &DominanceParams) -> Result<TruePayoff> {
    let cf = inst.with_algorithm(p_cf.clone())?;
    let (strategy, stable) = match user {
        UserModel::Naive => {
            let q = naive_strategy(&cf.user_payoff);
            let s = stable_set(&q, p_cf, &cf.class, params)?;
            (q, s)
        }
        UserModel::Strategic(up) => {
            let sol = solve_strategic(&cf, up, params)?;
            (sol.strategy, sol.stable_set)
        }
    };
    let ext = extremum_over(
        p_cf,
        &cf.class,
        &stable.survivors,
        &strategy,
        Payoff::Platform { v: &cf.platform_payoff },
        params,
        Sense::Min,
    )?;
    Ok(TruePayoff { value: ext.value, strategy, stable_set: stable, worst_belief: ext.at })
}

/// Worst-case platform payoff under `p_cf` against a strategic user.
pub fn true_strategic_payoff(inst: &GameInstance, p_cf: &ProposerAlgorithm, user: &UserParams, params: &DominanceParams) -> Result<f64> {
    Ok(true_payoff(inst, p_cf, &UserModel::Strategic(user.clone()), params)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionAtBelief {
    pub belief: Belief,
    pub predicted: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualReport {
    /// Forecast at the current-stable-set vertex with the smallest gap.
    pub predicted: f64,
    pub true_strategic: f64,
    pub gap: f64,
    /// Grid lower bound on the algorithm distance between p and p_cf.
    pub d_p_between: f64,
    /// Worst-case platform payoff under the deployed algorithm.
    pub current: f64,
    /// Forecast of the deployed algorithm's payoff at the chosen belief.
    pub predicted_current: f64,
    pub beliefs_used: String,
    pub candidates: Vec<PredictionAtBelief>,
    pub current_survivors: Vec<usize>,
    pub counterfactual_survivors: Vec<usize>,
}

/// Forecast versus realized payoff of switching the deployed algorithm to `p_cf`.
pub fn counterfactual_audit(
    inst: &GameInstance,
    p_cf: &ProposerAlgorithm,
    user: &UserModel,
    params: &DominanceParams,
) -> Result<CounterfactualReport> {
    p_cf.check(&inst.class)?;
    let now = true_payoff(inst, &inst.algorithm, user, params)?;
    let cf = true_payoff(inst, p_cf, user, params)?;
    let m = inst.class.len();
    let mut rows = Vec::new();
    for &s in &now.stable_set.survivors {
        let b = Belief::vertex(m, s);
        let predicted = predicted_payoff(p_cf, &b, &inst.class, &inst.platform_payoff)?;
        rows.push(PredictionAtBelief { gap: (predicted - cf.value).abs(), belief: b, predicted });
    }
    let best = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.gap.total_cmp(&b.1.gap).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Precondition("current stable set is empty".into()))?;
    let chosen = rows[best].clone();
    let predicted_current = predicted_payoff(&inst.algorithm, &chosen.belief, &inst.class, &inst.platform_payoff)?;
    let all: Vec<usize> = (0..m).collect();
    let grid = params.grid_for(m, &all)?;
    let d_p = algorithm_distance(&inst.algorithm, p_cf, &inst.class, &grid)?;
    Ok(CounterfactualReport {
        predicted: chosen.predicted,
        true_strategic: cf.value,
        gap: (chosen.predicted - cf.value).abs(),
        d_p_between: d_p,
        current: now.value,
        predicted_current,
        beliefs_used: format!(
            "vertices of the stable set {:?} induced under the deployed algorithm; smallest-gap vertex reported",
            now.stable_set.survivors
        ),
        candidates: rows,
        current_survivors: now.stable_set.survivors,
        counterfactual_survivors: cf.stable_set.survivors,
    })
}

fn net_steps(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("net resolution eps = {eps} must lie in (0,1]")));
    }
    let inv = 1.0 / eps;
    let rounded = inv.round();
    Ok(if (inv - rounded).abs() <= 1e-9 { rounded as usize } else { inv.ceil() as usize })
}

/// Probability vectors over `nb` outcomes with entries in multiples of 1/n, in
/// ascending lexicographic order.
pub fn simplex_net(nb: usize, eps: f64) -> Result<Vec<Vec<f64>>> {
    let n = net_steps(eps)?;
    fn rec(left: usize, parts: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / n as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(left - c, parts - 1, n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, nb, n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Every |𝒵|-tuple of net rows. Proposition 0 is the most significant digit.
pub fn build_eps_net_class(spaces: &ActionSpaces, eps: f64, guard: usize) -> Result<HypothesisClass> {
    spaces.validate()?;
    let n = net_steps(eps)?;
    let per_row = grid_point_count(spaces.n_behaviors, n);
    let total = (per_row as u128).saturating_pow(spaces.n_propositions as u32);
    if total > guard as u128 {
        return Err(Error::SizeGuard(format!("eps-net class would hold {total} models (guard {guard})")));
    }
    let rows = simplex_net(spaces.n_behaviors, eps)?;
    let nz = spaces.n_propositions;
    let mut models = Vec::with_capacity(total as usize);
    for idx in 0..total as usize {
        let mut digits = vec![0; nz];
        let mut rest = idx;
        for z in (0..nz).rev() {
            digits[z] = rest % per_row;
            rest /= per_row;
        }
        models.push(Strategy::new(digits.iter().map(|&d| rows[d].clone()).collect())?);
    }
    HypothesisClass::new(models, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum LipschitzSource {
    Supplied { value: f64 },
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityReport {
    pub bound: f64,
    pub empirical_gap: f64,
    pub holds: bool,
    pub l_p: f64,
    pub l_p_provenance: String,
    pub eps: f64,
    pub true_naive_payoff: f64,
    pub naive_survivors: Vec<usize>,
    pub worst_belief: Belief,
}

/// Compares the forecast spread over the naive user's stable set with (2L+1)·√(|ℬ|ε).
pub fn br_predictability_check(
    inst: &GameInstance,
    p_cf: &ProposerAlgorithm,
    lipschitz: LipschitzSource,
    eps: f64,
    params: &DominanceParams,
) -> Result<PredictabilityReport> {
    let (l_p, provenance) = match lipschitz {
        LipschitzSource::Supplied { value } => {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("Lipschitz constant {value} must be non-negative")));
            }
            (value, "supplied".to_string())
        }
        LipschitzSource::Estimated => {
            let all: Vec<usize> = (0..inst.class.len()).collect();
            let grid = params.grid_for(inst.class.len(), &all)?;
            let est = estimate_lipschitz(p_cf, &inst.class, &grid)?;
            (est.value, format!("grid estimate over {} pairs (lower bound)", est.pairs_used))
        }
    };
    let bound = (2.0 * l_p + 1.0) * (inst.spaces.n_behaviors as f64 * eps).sqrt();
    let naive = naive_outcome(inst, 0.0, params)?;
    let truth = true_payoff(inst, p_cf, &UserModel::Naive, params)?;
    let grid = params.grid_for(inst.class.len(), &naive.stable_set.survivors)?;
    let mut worst = (0.0f64, grid.points()[0].clone());
    for b in grid.points() {
        let gap = (predicted_payoff(p_cf, b, &inst.class, &inst.platform_payoff)? - truth.value).abs();
        if gap > worst.0 {
            worst = (gap, b.clone());
        }
    }
    Ok(PredictabilityReport {
        bound,
        empirical_gap: worst.0,
        holds: worst.0 <= bound,
        l_p,
        l_p_provenance: provenance,
        eps,
        true_naive_payoff: truth.value,
        naive_survivors: naive.stable_set.survivors,
        worst_belief: worst.1,
    })
}

/// U(Z,B) = (V(Z,B) − c)², declared on the tightest range implied by V's declared range.
pub fn quadratic_payoff(v: &PayoffMatrix, c: f64) -> Result<PayoffMatrix> {
    if !c.is_finite() {
        return Err(Error::InvalidParameter("quadratic centre must be finite".into()));
    }
    let (lo, hi) = v.declared_range();
    let top = (lo - c).powi(2).max((hi - c).powi(2));
    let bottom = if c >= lo && c <= hi { 0.0 } else { (lo - c).powi(2).min((hi - c).powi(2)) };
    let (bottom, top) = if top > bottom { (bottom, top) } else { (bottom, bottom + 1.0) };
    PayoffMatrix::from_fn(v.n_propositions(), v.n_behaviors(), (bottom, top), |z, b| (v.get(z, b) - c).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_rows_are_lexicographic() {
        let rows = simplex_net(2, 0.5).unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert_eq!(simplex_net(2, 1.0).unwrap(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(simplex_net(2, 0.25).unwrap().len(), 5);
        assert!(simplex_net(2, 0.0).is_err());
        assert!(simplex_net(2, 1.5).is_err());
    }

    #[test]
    fn net_class_sizes() {
        let s = |nz| ActionSpaces::new(nz, 2).unwrap();
        assert_eq!(build_eps_net_class(&s(2), 0.5, DEFAULT_NET_GUARD).unwrap().len(), 9);
        assert_eq!(build_eps_net_class(&s(1), 1.0, DEFAULT_NET_GUARD).unwrap().len(), 2);
        assert_eq!(build_eps_net_class(&s(3), 0.25, DEFAULT_NET_GUARD).unwrap().len(), 125);
        assert!(matches!(build_eps_net_class(&s(3), 0.25, 100), Err(Error::SizeGuard(_))));
        let c = build_eps_net_class(&s(2), 0.5, DEFAULT_NET_GUARD).unwrap();
        assert_eq!(c.model(1).rows(), &[vec![0.0, 1.0], vec![0.5, 0.5]]);
    }

    #[test]
    fn trust_monotone_in_kappa() {
        let r = TrustReport {
            strategic_value: 0.5,
            naive_value: 0.5,
            strategization_gap: 0.0,
            kappa: 0.5,
            strategic_candidate: 0,
            strategic_label: String::new(),
            strategic_survivors: vec![],
            naive_survivors: vec![],
        };
        assert!(r.trustworthy_at(0.4));
        assert!(r.trustworthy_at(0.5));
        assert!(!r.trustworthy_at(0.6));
    }

    #[test]
    fn quadratic_range_contains_values() {
        let v = PayoffMatrix::new(vec![vec![0.0, 1.0]], (0.0, 1.0)).unwrap();
        let u = quadratic_payoff(&v, 0.25).unwrap();
        assert_eq!(u.get(0, 1), 0.5625);
        assert_eq!(u.declared_range(), (0.0, 0.5625));
    }
}
