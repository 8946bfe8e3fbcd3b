use serde::{Deserialize, Serialize};

use crate::algorithms::ProposerAlgorithm;
use crate::error::{Error, Result};

/// Row-sum tolerance accepted when a probability object is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Allowed drift of a sum after arithmetic and renormalization.
pub const RENORM_TOL: f64 = 1e-12;

fn check_simplex(weights: &[f64], what: &str) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidProbability(format!("{what} is empty")));
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || !(0.0..=1.0 + CONSTRUCTION_TOL).contains(&w) {
            return Err(Error::InvalidProbability(format!("{what}[{i}] = {w} is not in [0,1]")));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::InvalidProbability(format!("{what} sums to {sum}")));
    }
    if (sum - 1.0).abs() <= RENORM_TOL {
        Ok(weights.iter().map(|w| w.min(1.0)).collect())
    } else {
        Ok(weights.iter().map(|w| (w / sum).min(1.0)).collect())
    }
}

/// Normalizes non-negative masses into a probability vector.
pub(crate) fn normalize(masses: &[f64], what: &str) -> Result<Vec<f64>> {
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDenominator(format!("{what}: total mass {total}")));
    }
    Ok(masses.iter().map(|m| m / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpaces {
    pub n_propositions: usize,
    pub n_behaviors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposition_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior_labels: Option<Vec<String>>,
    /// Ambient dimensions of the proposition and behavior spaces. Metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dims: Option<[usize; 2]>,
}

impl ActionSpaces {
    pub fn new(n_propositions: usize, n_behaviors: usize) -> Result<Self> {
        let spaces = ActionSpaces {
            n_propositions,
            n_behaviors,
            proposition_labels: None,
            behavior_labels: None,
            ambient_dims: None,
        };
        spaces.validate()?;
        Ok(spaces)
    }

    pub fn with_labels(
        mut self,
        propositions: Option<Vec<String>>,
        behaviors: Option<Vec<String>>,
    ) -> Result<Self> {
        self.proposition_labels = propositions;
        self.behavior_labels = behaviors;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_propositions < 1 {
            return Err(Error::InvalidParameter("need at least one proposition".into()));
        }
        if self.n_behaviors < 2 {
            return Err(Error::InvalidParameter("need at least two behaviors".into()));
        }
        for (labels, n, what) in [
            (&self.proposition_labels, self.n_propositions, "proposition"),
            (&self.behavior_labels, self.n_behaviors, "behavior"),
        ] {
            if let Some(labels) = labels {
                if labels.len() != n {
                    return Err(Error::Dimension(format!(
                        "{} {what} labels for {n} {what}s",
                        labels.len()
                    )));
                }
                let mut seen = std::collections::BTreeSet::new();
                for l in labels {
                    if !seen.insert(l) {
                        return Err(Error::InvalidParameter(format!("duplicate {what} label {l:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn proposition_label(&self, z: usize) -> String {
        match &self.proposition_labels {
            Some(l) => l[z].clone(),
            None => format!("z{z}"),
        }
    }

    pub fn behavior_label(&self, b: usize) -> String {
        match &self.behavior_labels {
            Some(l) => l[b].clone(),
            None => format!("b{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PayoffMatrixRaw {
    values: Vec<Vec<f64>>,
    range: [f64; 2],
}

/// A bounded payoff table indexed by (proposition, behavior).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PayoffMatrixRaw", into = "PayoffMatrixRaw")]
pub struct PayoffMatrix {
    values: Vec<Vec<f64>>,
    lo: f64,
    hi: f64,
}

impl TryFrom<PayoffMatrixRaw> for PayoffMatrix {
    type Error = Error;
    fn try_from(raw: PayoffMatrixRaw) -> Result<Self> {
        PayoffMatrix::new(raw.values, (raw.range[0], raw.range[1]))
    }
}

impl From<PayoffMatrix> for PayoffMatrixRaw {
    fn from(m: PayoffMatrix) -> Self {
        PayoffMatrixRaw { values: m.values, range: [m.lo, m.hi] }
    }
}

impl PayoffMatrix {
    pub fn new(values: Vec<Vec<f64>>, declared_range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = declared_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("payoff range [{lo}, {hi}] is not a proper interval")));
        }
        let cols = values.first().map(Vec::len).unwrap_or(0);
        if values.is_empty() || cols == 0 {
            return Err(Error::Dimension("payoff matrix is empty".into()));
        }
        for (z, row) in values.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!("payoff row {z} has {} entries, expected {cols}", row.len())));
            }
            for (b, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < lo || v > hi {
                    return Err(Error::InvalidParameter(format!(
                        "payoff ({z},{b}) = {v} outside declared range [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(PayoffMatrix { values, lo, hi })
    }

    /// Builds a matrix from a function of (proposition, behavior).
    pub fn from_fn(
        n_propositions: usize,
        n_behaviors: usize,
        declared_range: (f64, f64),
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let values = (0..n_propositions)
            .map(|z| (0..n_behaviors).map(|b| f(z, b)).collect())
            .collect();
        PayoffMatrix::new(values, declared_range)
    }

    pub fn n_propositions(&self) -> usize {
        self.values.len()
    }

    pub fn n_behaviors(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, z: usize, b: usize) -> f64 {
        self.values[z][b]
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.values[z]
    }

    pub fn declared_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyRaw {
    rows: Vec<Vec<f64>>,
}

/// A row-stochastic map from propositions to behavior distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRaw", into = "StrategyRaw")]
pub struct Strategy {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<StrategyRaw> for Strategy {
    type Error = Error;
    fn try_from(raw: StrategyRaw) -> Result<Self> {
        Strategy::new(raw.rows)
    }
}

impl From<Strategy> for StrategyRaw {
    fn from(s: Strategy) -> Self {
        StrategyRaw { rows: s.rows }
    }
}

impl Strategy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("strategy has no rows".into()));
        }
        let cols = rows[0].len();
        if cols < 2 {
            return Err(Error::Dimension("strategy rows need at least two behaviors".into()));
        }
        for (z, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!("strategy row {z} has {} entries, expected {cols}", row.len())));
            }
            for (b, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidProbability(format!("strategy entry ({z},{b}) = {p}")));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > CONSTRUCTION_TOL {
                return Err(Error::InvalidProbability(format!("strategy row {z} sums to {sum}")));
            }
        }
        Ok(Strategy { rows })
    }

    /// Every proposition answered by a fixed behavior.
    pub fn deterministic(choices: &[usize], n_behaviors: usize) -> Result<Self> {
        let rows = choices
            .iter()
            .map(|&b| {
                if b >= n_behaviors {
                    return Err(Error::Dimension(format!("behavior {b} out of range")));
                }
                let mut row = vec![0.0; n_behaviors];
                row[b] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Strategy::new(rows)
    }

    /// Binary-behavior strategy from per-proposition probabilities of behavior 1.
    pub fn from_engagement(p_engage: &[f64]) -> Result<Self> {
        Strategy::new(p_engage.iter().map(|&p| vec![1.0 - p, p]).collect())
    }

    pub fn n_propositions(&self) -> usize {
        self.rows.len()
    }

    pub fn n_behaviors(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.rows[z]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, b: usize, z: usize) -> f64 {
        self.rows[z][b]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesisClassRaw {
    models: Vec<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

/// The platform's finite set of user models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HypothesisClassRaw", into = "HypothesisClassRaw")]
pub struct HypothesisClass {
    models: Vec<Strategy>,
    names: Option<Vec<String>>,
}

impl TryFrom<HypothesisClassRaw> for HypothesisClass {
    type Error = Error;
    fn try_from(raw: HypothesisClassRaw) -> Result<Self> {
        HypothesisClass::new(raw.models, raw.names)
    }
}

impl From<HypothesisClass> for HypothesisClassRaw {
    fn from(c: HypothesisClass) -> Self {
        HypothesisClassRaw { models: c.models, names: c.names }
    }
}

impl HypothesisClass {
    pub fn new(models: Vec<Strategy>, names: Option<Vec<String>>) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::InvalidParameter("hypothesis class is empty".into()))?;
        let (nz, nb) = (first.n_propositions(), first.n_behaviors());
        for (i, m) in models.iter().enumerate() {
            if m.n_propositions() != nz || m.n_behaviors() != nb {
                return Err(Error::Dimension(format!("model {i} has a different shape")));
            }
        }
        if let Some(names) = &names {
            if names.len() != models.len() {
                return Err(Error::Dimension(format!("{} names for {} models", names.len(), models.len())));
            }
            let mut seen = std::collections::BTreeSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(Error::InvalidParameter(format!("duplicate model name {n:?}")));
                }
            }
        }
        Ok(HypothesisClass { models, names })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, i: usize) -> &Strategy {
        &self.models[i]
    }

    pub fn models(&self) -> &[Strategy] {
        &self.models
    }

    pub fn n_propositions(&self) -> usize {
        self.models[0].n_propositions()
    }

    pub fn n_behaviors(&self) -> usize {
        self.models[0].n_behaviors()
    }

    pub fn name(&self, i: usize) -> String {
        match &self.names {
            Some(n) => n[i].clone(),
            None => format!("q{}", i + 1),
        }
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.name(i)).collect()
    }

    /// Returns a new class with `model` appended.
    pub fn extended(&self, model: Strategy, name: Option<String>) -> Result<Self> {
        let mut models = self.models.clone();
        models.push(model);
        let names = match (&self.names, name) {
            (Some(n), Some(new)) => {
                let mut n = n.clone();
                n.push(new);
                Some(n)
            }
            (None, Some(new)) => {
                let mut n = self.names();
                n.push(new);
                Some(n)
            }
            (Some(n), None) => {
                let mut n = n.clone();
                n.push(format!("q{}", models.len()));
                Some(n)
            }
            (None, None) => None,
        };
        HypothesisClass::new(models, names)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Belief::new(w)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.weights
    }
}

impl Belief {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Ok(Belief { weights: check_simplex(&weights, "belief")? })
    }

    pub fn uniform(m: usize) -> Self {
        Belief { weights: vec![1.0 / m as f64; m] }
    }

    /// Point mass on model `i` of `m`.
    pub fn vertex(m: usize, i: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[i] = 1.0;
        Belief { weights }
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        Belief { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn is_full_support(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Distribution::new(w)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.weights
    }
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Ok(Distribution { weights: check_simplex(&weights, "distribution")? })
    }

    pub fn uniform(n: usize) -> Self {
        Distribution { weights: vec![1.0 / n as f64; n] }
    }

    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        Ok(Distribution { weights: normalize(masses, "distribution")? })
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        Distribution { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.weights[i]).sum()
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

impl AsRef<[f64]> for Belief {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

/// The tuple of action spaces, payoffs, platform strategy and prior that fixes a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameInstance {
    pub spaces: ActionSpaces,
    pub user_payoff: PayoffMatrix,
    pub platform_payoff: PayoffMatrix,
    pub algorithm: ProposerAlgorithm,
    pub class: HypothesisClass,
    pub initial_belief: Belief,
}

impl GameInstance {
    pub fn new(
        spaces: ActionSpaces,
        user_payoff: PayoffMatrix,
        platform_payoff: PayoffMatrix,
        algorithm: ProposerAlgorithm,
        class: HypothesisClass,
        initial_belief: Belief,
    ) -> Result<Self> {
        let inst = GameInstance { spaces, user_payoff, platform_payoff, algorithm, class, initial_belief };
        inst.check_shapes()?;
        Ok(inst)
    }

    pub fn check_shapes(&self) -> Result<()> {
        self.spaces.validate()?;
        let (nz, nb) = (self.spaces.n_propositions, self.spaces.n_behaviors);
        for (m, what) in [(&self.user_payoff, "user payoff"), (&self.platform_payoff, "platform payoff")] {
            if m.n_propositions() != nz || m.n_behaviors() != nb {
                return Err(Error::Dimension(format!(
                    "{what} is {}x{}, expected {nz}x{nb}",
                    m.n_propositions(),
                    m.n_behaviors()
                )));
            }
        }
        if self.class.n_propositions() != nz || self.class.n_behaviors() != nb {
            return Err(Error::Dimension("hypothesis class shape does not match action spaces".into()));
        }
        if self.initial_belief.len() != self.class.len() {
            return Err(Error::Dimension(format!(
                "initial belief has {} entries for {} models",
                self.initial_belief.len(),
                self.class.len()
            )));
        }
        self.algorithm.check(&self.class)?;
        Ok(())
    }

    /// Same instance under a different proposition algorithm.
    pub fn with_algorithm(&self, algorithm: ProposerAlgorithm) -> Result<Self> {
        let mut inst = self.clone();
        inst.algorithm = algorithm;
        inst.check_shapes()?;
        Ok(inst)
    }

    /// Same instance under a different hypothesis class with a uniform prior.
    pub fn with_class(&self, class: HypothesisClass) -> Result<Self> {
        let mut inst = self.clone();
        inst.initial_belief = Belief::uniform(class.len());
        inst.class = class;
        inst.check_shapes()?;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_rejects_bad_rows() {
        assert!(Strategy::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(Strategy::new(vec![vec![1.2, -0.2]]).is_err());
        assert!(Strategy::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Strategy::new(vec![vec![0.3, 0.7 + 5e-10]]).is_ok());
    }

    #[test]
    fn belief_renormalizes_within_construction_tolerance() {
        let b = Belief::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let s: f64 = b.weights().iter().sum();
        assert!((s - 1.0).abs() <= RENORM_TOL);
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![]).is_err());
    }

    #[test]
    fn payoff_range_is_enforced() {
        assert!(PayoffMatrix::new(vec![vec![0.0, 2.0]], (0.0, 1.0)).is_err());
        assert!(PayoffMatrix::new(vec![vec![0.0, 1.0]], (1.0, 1.0)).is_err());
        assert!(PayoffMatrix::new(vec![vec![0.0, f64::NAN]], (0.0, 1.0)).is_err());
        let m = PayoffMatrix::new(vec![vec![0.0, -1.0]], (-1.0, 1.0)).unwrap();
        assert_eq!(m.get(0, 1), -1.0);
    }

    #[test]
    fn labels_must_be_unique() {
        let s = ActionSpaces::new(2, 2).unwrap();
        assert!(s.clone().with_labels(Some(vec!["a".into(), "a".into()]), None).is_err());
        assert!(s.with_labels(Some(vec!["a".into(), "b".into()]), None).is_ok());
        assert!(ActionSpaces::new(1, 1).is_err());
        assert!(ActionSpaces::new(0, 2).is_err());
    }

    #[test]
    fn class_names_unique_and_shapes_agree() {
        let a = Strategy::from_engagement(&[0.5, 0.5]).unwrap();
        let b = Strategy::from_engagement(&[0.5]).unwrap();
        assert!(HypothesisClass::new(vec![a.clone(), b], None).is_err());
        assert!(HypothesisClass::new(vec![a.clone(), a.clone()], Some(vec!["x".into(), "x".into()])).is_err());
        assert!(HypothesisClass::new(vec![], None).is_err());
        let c = HypothesisClass::new(vec![a.clone()], None).unwrap();
        let c2 = c.extended(a, Some("q4".into())).unwrap();
        assert_eq!(c2.names(), vec!["q1".to_string(), "q4".to_string()]);
    }
}
