//! Subcommand implementations. Each returns the files it wrote and a console summary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{ExperimentConfig, InstanceSpec, UserKind};
use super::report::{join_ids, num, write_atomic, Csv, Report};
use crate::error::{Error, Result};
use crate::model::{validate_instance, Diagnostic, DEFAULT_RATIO_CAP};
use crate::model::{GameInstance, Strategy};
use crate::scenarios::{self, PropositionReport};
use crate::simulator::{self, detect_convergence, SimConfig, Trajectory};
use crate::stability::{stable_set, StableSetResult};
use crate::strategize::{alignment_benefit_check, naive_outcome, naive_strategy, solve_strategic, AlignmentReport, NaiveOutcome, StrategicSolution};
use crate::trust::{br_predictability_check, counterfactual_audit, trust_audit, CounterfactualReport, LipschitzSource, PredictabilityReport, TrustReport};

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when a `reproduce` proposition fails.
    pub success: bool,
}

impl Outcome {
    fn ok(files: Vec<PathBuf>, summary: String) -> Self {
        Outcome { files, summary, success: true }
    }
}

fn emit(files: &mut Vec<PathBuf>, path: PathBuf, contents: &[u8]) -> Result<()> {
    write_atomic(&path, contents)?;
    files.push(path);
    Ok(())
}

/// The strategy a command analyses: an explicit override, the best response or the strategic optimum.
pub fn played_strategy(cfg: &ExperimentConfig, inst: &GameInstance) -> Result<(Strategy, String)> {
    if let Some(q) = &cfg.user.strategy {
        return Ok((q.clone(), "config".into()));
    }
    match cfg.user.kind {
        UserKind::Naive => Ok((naive_strategy(&inst.user_payoff), "best_response".into())),
        UserKind::Strategic => {
            let sol = solve_strategic(inst, &cfg.user_params()?, &cfg.engine.dominance())?;
            Ok((sol.strategy, sol.label))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub convergence_step: Option<usize>,
    pub final_belief: Vec<f64>,
    pub mean_u: f64,
    pub mean_v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateResult {
    pub strategy_source: String,
    pub strategy: Strategy,
    pub stable_set: Vec<usize>,
    pub horizon: usize,
    pub seeds: Vec<SeedSummary>,
}

fn trajectory_jsonl(traj: &Trajectory, horizon: usize, hash: &str) -> String {
    let mut lines = Vec::with_capacity(traj.steps.len() + traj.belief_snapshots.len() + 1);
    lines.push(json!({
        "record": "header",
        "seed": traj.seed,
        "generator": traj.generator,
        "horizon": horizon,
        "snapshot_every": traj.snapshot_every,
        "n_models": traj.final_belief.len(),
        "config_hash": hash,
    }));
    let mut snaps = traj.belief_snapshots.iter().peekable();
    let mut push_snapshots = |upto: usize, lines: &mut Vec<serde_json::Value>| {
        while let Some(s) = snaps.next_if(|s| s.t <= upto) {
            lines.push(json!({"record": "snapshot", "t": s.t, "belief": s.belief}));
        }
    };
    push_snapshots(0, &mut lines);
    for s in &traj.steps {
        lines.push(json!({"record": "step", "t": s.t, "z": s.z, "b": s.b, "u": s.u, "v": s.v}));
        push_snapshots(s.t + 1, &mut lines);
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build_instance()?;
    if cfg.engine.seeds.is_empty() {
        return Err(Error::Config("engine.seeds is empty; simulate needs at least one seed".into()));
    }
    let (q, source) = played_strategy(cfg, &inst)?;
    let stable = stable_set(&q, &inst.algorithm, &inst.class, &cfg.engine.dominance())?;
    let horizon = cfg.engine.horizon;
    let trajectories = cfg
        .engine
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut sc = SimConfig::new(inst.clone(), horizon, seed);
            sc.snapshot_every = cfg.engine.snapshot_every.min(horizon);
            sc.belief_floor = cfg.engine.belief_floor;
            simulator::run(&sc, &q)
        })
        .collect::<Result<Vec<_>>>()?;

    let hash = cfg.hash();
    let m = inst.class.len();
    let mut files = Vec::new();
    let mut header = vec!["seed".to_string(), "convergence_step".to_string()];
    header.extend((0..m).map(|i| format!("final_belief_{}", inst.class.name(i))));
    header.extend(["mean_u".to_string(), "mean_v".to_string()]);
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let mut seeds = Vec::new();
    for traj in &trajectories {
        let path = out.join("trajectories").join(format!("seed_{}.jsonl", traj.seed));
        emit(&mut files, path, trajectory_jsonl(traj, horizon, &hash).as_bytes())?;
        let conv = detect_convergence(traj, &stable.survivors, cfg.engine.convergence_threshold, cfg.engine.convergence_hold)?;
        let mut row = vec![traj.seed.to_string(), conv.map(|c| c.to_string()).unwrap_or_default()];
        row.extend(traj.final_belief.weights().iter().map(|w| num(*w)));
        row.extend([num(traj.mean_u()), num(traj.mean_v())]);
        csv.row(row);
        seeds.push(SeedSummary {
            seed: traj.seed,
            convergence_step: conv,
            final_belief: traj.final_belief.weights().to_vec(),
            mean_u: traj.mean_u(),
            mean_v: traj.mean_v(),
        });
    }
    emit(&mut files, out.join("summary.csv"), &csv.into_bytes())?;
    let converged = seeds.iter().filter(|s| s.convergence_step.is_some()).count();
    let n = seeds.len();
    let result = SimulateResult { strategy_source: source, strategy: q, stable_set: stable.survivors.clone(), horizon, seeds };
    emit(&mut files, out.join("simulate_report.json"), Report::new("simulate", cfg, result).to_json().as_bytes())?;
    let summary = format!(
        "simulated {n} seed(s) for {horizon} steps; stable set {{{}}}; {converged}/{n} converged",
        stable.survivors.iter().map(|&i| inst.class.name(i)).collect::<Vec<_>>().join(", ")
    );
    Ok(Outcome::ok(files, summary))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StableSetCommandResult {
    pub strategy_source: String,
    pub strategy: Strategy,
    pub stable_set: StableSetResult,
    pub survivor_names: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn stable_set_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build_instance()?;
    let (q, source) = played_strategy(cfg, &inst)?;
    let result = stable_set(&q, &inst.algorithm, &inst.class, &cfg.engine.dominance())?;
    let diagnostics = validate_instance(&inst, Some(&q), DEFAULT_RATIO_CAP);
    let names: Vec<String> = result.survivors.iter().map(|&i| inst.class.name(i).to_string()).collect();
    let mut files = Vec::new();
    let mut csv = Csv::new(&["round", "eliminated", "dominator", "min_margin"]);
    for e in &result.rounds {
        csv.row([e.round.to_string(), inst.class.name(e.eliminated).to_string(), inst.class.name(e.dominator).to_string(), num(e.min_margin)]);
    }
    emit(&mut files, out.join("stable_set_rounds.csv"), &csv.into_bytes())?;
    let summary = format!("stable set {{{}}} after {} round(s)", names.join(", "), result.round_summaries.len());
    let body = StableSetCommandResult { strategy_source: source, strategy: q, stable_set: result, survivor_names: names, diagnostics };
    emit(&mut files, out.join("stable_set_report.json"), Report::new("stable-set", cfg, body).to_json().as_bytes())?;
    Ok(Outcome::ok(files, summary))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub solution: StrategicSolution,
    pub naive: NaiveOutcome,
}

pub fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build_instance()?;
    let user = cfg.user_params()?;
    let params = cfg.engine.dominance();
    let solution = solve_strategic(&inst, &user, &params)?;
    let naive = naive_outcome(&inst, user.lambda, &params)?;
    let mut files = Vec::new();
    let mut csv = Csv::new(&["id", "label", "survivors", "user_payoff", "platform_payoff", "deviation", "chosen"]);
    for row in &solution.per_candidate_table {
        csv.row([
            row.id.to_string(),
            row.label.clone(),
            join_ids(&row.survivors),
            num(row.user_payoff),
            num(row.platform_payoff),
            num(row.deviation),
            (row.id == solution.candidate_id).to_string(),
        ]);
    }
    emit(&mut files, out.join("solve_candidates.csv"), &csv.into_bytes())?;
    let summary = format!(
        "strategic choice {} (candidate {} of {}): worst-case U = {}, V = {}; best response gives U = {}",
        solution.label,
        solution.candidate_id,
        solution.per_candidate_table.len(),
        solution.worst_case_user_payoff,
        solution.worst_case_platform_payoff,
        naive.worst_case_user_payoff
    );
    emit(&mut files, out.join("solve_report.json"), Report::new("solve", cfg, SolveResult { solution, naive }).to_json().as_bytes())?;
    Ok(Outcome::ok(files, summary))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrustResult {
    pub audit: TrustReport,
    pub kappa0: f64,
    pub trustworthy: bool,
    pub alignment: Option<AlignmentReport>,
    pub alignment_error: Option<String>,
}

pub fn trust(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build_instance()?;
    let user = cfg.user_params()?;
    let params = cfg.engine.dominance();
    let audit = trust_audit(&inst, &user, &params)?;
    let (alignment, alignment_error) = match alignment_benefit_check(&inst, &user, &params) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let kappa0 = cfg.trust.kappa0;
    let trustworthy = audit.trustworthy_at(kappa0);
    let mut files = Vec::new();
    let mut csv = Csv::new(&["metric", "value"]);
    for (k, v) in [
        ("strategic_value", audit.strategic_value),
        ("naive_value", audit.naive_value),
        ("strategization_gap", audit.strategization_gap),
        ("kappa", audit.kappa),
    ] {
        csv.row([k.to_string(), num(v)]);
    }
    if let Some(a) = &alignment {
        csv.row(["alignment_lhs".to_string(), num(a.lhs)]);
        csv.row(["alignment_rhs".to_string(), num(a.rhs)]);
    }
    emit(&mut files, out.join("trust.csv"), &csv.into_bytes())?;
    let summary = format!(
        "strategization gap {} (strategic {}, naive {}); kappa {}; {} at kappa0 = {kappa0}",
        audit.strategization_gap,
        audit.strategic_value,
        audit.naive_value,
        audit.kappa,
        if trustworthy { "trustworthy" } else { "not trustworthy" }
    );
    let body = TrustResult { audit, kappa0, trustworthy, alignment, alignment_error };
    emit(&mut files, out.join("trust_report.json"), Report::new("trust", cfg, body).to_json().as_bytes())?;
    Ok(Outcome::ok(files, summary))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterfactualResult {
    pub audit: CounterfactualReport,
    /// Present for ε-net instances.
    pub predictability: Option<PredictabilityReport>,
}

pub fn counterfactual(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg
        .counterfactual
        .as_ref()
        .ok_or_else(|| Error::Config("counterfactual needs a [counterfactual] section with an algorithm".into()))?;
    let inst = cfg.build_instance()?;
    let params = cfg.engine.dominance();
    let audit = counterfactual_audit(&inst, &spec.algorithm, &cfg.user_model()?, &params)?;
    let predictability = match cfg.net_eps() {
        Some(eps) => {
            let source = match spec.lipschitz {
                Some(value) => LipschitzSource::Supplied { value },
                None => LipschitzSource::Estimated,
            };
            Some(br_predictability_check(&inst, &spec.algorithm, source, eps, &params)?)
        }
        None => None,
    };
    let mut files = Vec::new();
    let mut csv = Csv::new(&["metric", "value"]);
    for (k, v) in [
        ("predicted", audit.predicted),
        ("true", audit.true_strategic),
        ("gap", audit.gap),
        ("current", audit.current),
        ("d_p_between", audit.d_p_between),
    ] {
        csv.row([k.to_string(), num(v)]);
    }
    if let Some(p) = &predictability {
        csv.row(["predictability_bound".to_string(), num(p.bound)]);
        csv.row(["predictability_gap".to_string(), num(p.empirical_gap)]);
    }
    emit(&mut files, out.join("counterfactual.csv"), &csv.into_bytes())?;
    let mut summary = format!(
        "predicted {} vs true {} (gap {}); current {}",
        audit.predicted, audit.true_strategic, audit.gap, audit.current
    );
    if let Some(p) = &predictability {
        summary.push_str(&format!("; predictability gap {} <= bound {}: {}", p.empirical_gap, p.bound, p.holds));
    }
    let body = CounterfactualResult { audit, predictability };
    emit(&mut files, out.join("counterfactual_report.json"), Report::new("counterfactual", cfg, body).to_json().as_bytes())?;
    Ok(Outcome::ok(files, summary))
}

pub fn reproduce(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut rc = cfg.engine.reproduce_config();
    rc.sensitivity = cfg.reproduce.sensitivity;
    let reports: Vec<PropositionReport> = cfg.reproduce.props.par_iter().map(|&p| scenarios::reproduce(p, &rc)).collect();
    let mut files = Vec::new();
    let mut table = Csv::new(&["prop", "pass", "checks_passed", "checks_total", "conditions_held", "conditions_total", "error"]);
    let mut checks = Csv::new(&["prop", "check", "analytic", "computed", "delta", "tolerance", "pass"]);
    let mut lines = vec![format!("{:<6} {:<6} {}", "prop", "result", "detail")];
    for r in &reports {
        let passed = r.checks.iter().filter(|c| c.pass).count();
        let held = r.conditions.values().filter(|v| **v).count();
        table.row([
            r.prop_id.to_string(),
            r.pass.to_string(),
            passed.to_string(),
            r.checks.len().to_string(),
            held.to_string(),
            r.conditions.len().to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
        for c in &r.checks {
            checks.row([r.prop_id.to_string(), c.name.clone(), num(c.analytic), num(c.computed), num(c.delta), num(c.tolerance), c.pass.to_string()]);
        }
        let detail = match &r.error {
            Some(e) => e.clone(),
            None => format!("{passed}/{} checks, {held}/{} conditions", r.checks.len(), r.conditions.len()),
        };
        let detail = if r.sensitivity.is_empty() {
            detail
        } else {
            let ok = r.sensitivity.values().filter(|v| **v).count();
            format!("{detail}; sensitivity {ok}/{} (informational)", r.sensitivity.len())
        };
        lines.push(format!("{:<6} {:<6} {}", r.prop_id, if r.pass { "PASS" } else { "FAIL" }, detail));
    }
    emit(&mut files, out.join("reproduce_table.csv"), &table.into_bytes())?;
    emit(&mut files, out.join("reproduce_checks.csv"), &checks.into_bytes())?;
    let success = reports.iter().all(|r| r.pass);
    emit(&mut files, out.join("reproduce_report.json"), Report::new("reproduce", cfg, reports).to_json().as_bytes())?;
    Ok(Outcome { files, summary: lines.join("\n"), success })
}

/// Human-readable label of the instance source, used in console output.
pub fn describe_instance(cfg: &ExperimentConfig) -> String {
    match &cfg.instance {
        InstanceSpec::Scenario { name } => format!("scenario {name}"),
        InstanceSpec::Stylized { .. } => "stylized instance".into(),
        InstanceSpec::Custom { .. } => "custom instance".into(),
        InstanceSpec::EpsNet { eps, .. } => format!("eps-net instance (eps = {eps})"),
    }
}
