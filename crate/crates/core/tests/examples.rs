//! Hand-evaluated examples for each engine.

use stratsim::algorithms::{algorithm_distance, estimate_lipschitz, BeliefGrid, ProposerAlgorithm, ReweightScope};
use stratsim::model::{
    kl_divergence, tv_distance, validate_instance, ActionSpaces, Belief, Diagnostic, GameInstance, HypothesisClass, PayoffMatrix,
    Strategy, DEFAULT_RATIO_CAP,
};
use stratsim::scenarios::{
    make_prop4_instance, make_prop4_instance_with, make_prop5_instance, make_stylized, prop4_params, prop5_params, s1_aligned_params,
    s1_params, toxicity_weights, Stylized, CLICK, PROP4_ALPHA,
};
use stratsim::simulator::{bayes_update, detect_convergence, run, SimConfig};
use stratsim::stability::{dominates, joint_kl_gap, stable_set, stylized_stable_set, DominanceParams};
use stratsim::strategize::{
    alignment_benefit_check, expected_platform_payoff, expected_user_payoff, naive_strategy, solve_strategic, worst_case_over_stable,
    CandidateSpec, Payoff, Sense, UserModel, UserParams,
};
use stratsim::trust::{
    br_predictability_check, build_eps_net_class, counterfactual_audit, predicted_payoff, quadratic_payoff, simplex_net, trust_audit,
    true_strategic_payoff, LipschitzSource, DEFAULT_NET_GUARD,
};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

fn s1() -> GameInstance {
    make_stylized(&s1_params()).unwrap()
}

fn first_half_clicks() -> Strategy {
    let p = s1_params();
    p.click_only(&p.partition_a)
}

#[test]
fn distances() {
    close(tv_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0, 0.0);
    close(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0, 0.0);
    close(tv_distance(&[0.8, 0.2], &[0.2, 0.8]).unwrap(), 0.6, 1e-15);
    close(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0, 0.0);
    close(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 2f64.ln(), 1e-15);
    assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
}

#[test]
fn support_diagnostics() {
    let inst = s1();
    let diags = validate_instance(&inst, Some(&first_half_clicks()), DEFAULT_RATIO_CAP);
    let on_a: Vec<usize> = diags
        .iter()
        .filter_map(|d| match d {
            Diagnostic::SupportViolation { model: 1, z, b } if *b == CLICK => Some(*z),
            _ => None,
        })
        .collect();
    assert_eq!(on_a, vec![0, 1, 2]);

    let spaces = ActionSpaces::new(2, 2).unwrap();
    let u = PayoffMatrix::new(vec![vec![0.0, 1.0]; 2], (0.0, 1.0)).unwrap();
    let positive = HypothesisClass::new(vec![Strategy::new(vec![vec![0.3, 0.7]; 2]).unwrap(); 2], None).unwrap();
    let inst = GameInstance::new(spaces.clone(), u.clone(), u.clone(), ProposerAlgorithm::Uniform, positive, Belief::uniform(2)).unwrap();
    assert!(validate_instance(&inst, None, DEFAULT_RATIO_CAP).is_empty());

    let models = vec![Strategy::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap(), Strategy::new(vec![vec![0.5, 0.5]; 2]).unwrap()];
    let class = HypothesisClass::new(models, None).unwrap();
    let inst = GameInstance::new(spaces, u.clone(), u, ProposerAlgorithm::Uniform, class, Belief::uniform(2)).unwrap();
    let q = Strategy::new(vec![vec![0.5, 0.5]; 2]).unwrap();
    let violations: Vec<_> =
        validate_instance(&inst, Some(&q), DEFAULT_RATIO_CAP).into_iter().filter(|d| matches!(d, Diagnostic::SupportViolation { .. })).collect();
    assert_eq!(violations, vec![Diagnostic::SupportViolation { model: 0, z: 0, b: 1 }]);
}

#[test]
fn engagement_proportional_feed() {
    let inst = s1();
    let at_q3 = inst.algorithm.propose(&Belief::vertex(3, 2), &inst.class).unwrap();
    for &w in at_q3.weights() {
        close(w, 0.125, 1e-15);
    }
    let at_q1 = inst.algorithm.propose(&Belief::vertex(3, 0), &inst.class).unwrap();
    for z in 0..8 {
        close(at_q1.get(z), if z < 4 { 0.2375 } else { 0.0125 }, 1e-15);
    }
    let uniform = ProposerAlgorithm::Uniform.propose(&Belief::new(vec![0.2, 0.3, 0.5]).unwrap(), &inst.class).unwrap();
    assert!(uniform.weights().iter().all(|&w| w == 0.125));
}

#[test]
fn distances_between_algorithms() {
    let inst = s1();
    let grid = BeliefGrid::full(3, 4).unwrap();
    assert_eq!(algorithm_distance(&inst.algorithm, &inst.algorithm, &inst.class, &grid).unwrap(), 0.0);
    let identity = ProposerAlgorithm::reweighted(inst.algorithm.clone(), vec![1.0; 8], ReweightScope::Joint).unwrap();
    close(algorithm_distance(&inst.algorithm, &identity, &inst.class, &grid).unwrap(), 0.0, 1e-15);

    // Vertex-only grid against hand-evaluated feeds.
    let p = s1_params();
    let tox = ProposerAlgorithm::reweighted(inst.algorithm.clone(), toxicity_weights(&p, PROP4_ALPHA), ReweightScope::Componentwise).unwrap();
    let vertices = BeliefGrid::full(3, 1).unwrap();
    assert_eq!(vertices.len(), 3);
    let w = toxicity_weights(&p, PROP4_ALPHA);
    let expected = (0..3)
        .map(|i| {
            let base = inst.algorithm.propose(&Belief::vertex(3, i), &inst.class).unwrap();
            // Componentwise: the uniform and engagement parts are reweighted separately.
            let eng: Vec<f64> = (0..8).map(|z| inst.class.model(i).prob(CLICK, z)).collect();
            let part = |v: &[f64]| {
                let s: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                v.iter().zip(&w).map(|(a, b)| a * b / s).collect::<Vec<_>>()
            };
            let (uni, en) = (part(&[1.0; 8]), part(&eng));
            let cf: Vec<f64> = (0..8).map(|z| 0.1 * uni[z] + 0.9 * en[z]).collect();
            tv_distance(base.weights(), &cf).unwrap()
        })
        .fold(0.0, f64::max);
    close(algorithm_distance(&inst.algorithm, &tox, &inst.class, &vertices).unwrap(), expected, 1e-14);
}

#[test]
fn lipschitz_estimates() {
    let inst = s1();
    let vertices = BeliefGrid::full(3, 1).unwrap();
    assert_eq!(estimate_lipschitz(&ProposerAlgorithm::Uniform, &inst.class, &vertices).unwrap().value, 0.0);

    // Three vertex feeds, pairwise TV over max-row TV between the vertex models.
    let feeds: Vec<Vec<f64>> = (0..3).map(|i| inst.algorithm.propose(&Belief::vertex(3, i), &inst.class).unwrap().weights().to_vec()).collect();
    let model_dist = |i: usize, j: usize| {
        (0..8).map(|z| tv_distance(inst.class.model(i).row(z), inst.class.model(j).row(z)).unwrap()).fold(0.0, f64::max)
    };
    let mut expected: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            expected = expected.max(tv_distance(&feeds[i], &feeds[j]).unwrap() / model_dist(i, j));
        }
    }
    let est = estimate_lipschitz(&inst.algorithm, &inst.class, &vertices).unwrap();
    assert!(est.value > 0.0 && est.value.is_finite());
    close(est.value, expected, 1e-14);

    let m = Strategy::new(vec![vec![0.5, 0.5]]).unwrap();
    let other = Strategy::new(vec![vec![0.1, 0.9]]).unwrap();
    let class = HypothesisClass::new(vec![m.clone(), m, other], None).unwrap();
    let alg = ProposerAlgorithm::engagement_proportional(0.1).unwrap();
    let est = estimate_lipschitz(&alg, &class, &vertices).unwrap();
    assert_eq!(est.pairs_skipped, 1);
    assert_eq!(est.pairs_used, 2);
}

#[test]
fn bayes_examples() {
    let inst = s1();
    let post = bayes_update(&Belief::uniform(3), &inst.class, 0, CLICK).unwrap();
    close(post.weights()[0], 0.5, 1e-15);
    assert_eq!(post.weights()[1], 0.0);
    close(post.weights()[2], 0.5, 1e-15);

    let point = bayes_update(&Belief::vertex(3, 2), &inst.class, 5, CLICK).unwrap();
    assert_eq!(point.weights(), Belief::vertex(3, 2).weights());

    let prior = Belief::new(vec![0.3, 0.0, 0.7]).unwrap();
    let same = bayes_update(&prior, &inst.class, 1, CLICK).unwrap();
    for (a, b) in same.weights().iter().zip(prior.weights()) {
        close(*a, *b, 1e-15);
    }
}

#[test]
fn simulation_examples() {
    let inst = s1();
    let naive = naive_strategy(&inst.user_payoff);
    let traj = run(&SimConfig::new(inst.clone(), 5000, 42), &naive).unwrap();
    assert!(traj.final_belief.weights()[2] > 0.99);
    assert!(detect_convergence(&traj, &[2], 0.99, 100).unwrap().is_some());
    assert_eq!(detect_convergence(&traj, &[0, 1, 2], 0.99, 100).unwrap(), Some(0));
    assert_eq!(detect_convergence(&traj, &[1], 0.99, 100).unwrap(), None);

    let one = run(&SimConfig::new(inst.clone(), 1, 3), &naive).unwrap();
    assert_eq!(one.steps.len(), 1);
    let again = run(&SimConfig::new(inst, 5000, 42), &naive).unwrap();
    assert_eq!(traj, again);
}

#[test]
fn kl_gap_and_dominance() {
    let inst = s1();
    let q = first_half_clicks();
    let r = inst.algorithm.propose(&Belief::vertex(3, 0), &inst.class).unwrap();
    close(joint_kl_gap(&q, 0, 2, &r, &inst.class).unwrap(), 5f64.ln() * 0.05, 1e-12);
    assert_eq!(joint_kl_gap(&q, 1, 1, &r, &inst.class).unwrap(), 0.0);
    let naive = naive_strategy(&inst.user_payoff);
    assert_eq!(joint_kl_gap(&naive, 2, 0, &r, &inst.class).unwrap(), f64::INFINITY);

    let params = DominanceParams::default();
    let all = [0, 1, 2];
    let cert = dominates(&q, 0, 2, &inst.algorithm, &all, &params, &inst.class).unwrap();
    assert!(cert.holds());
    assert!(cert.min_margin >= 5f64.ln() * 0.1 * 4.0 / 8.0 - 1e-12, "margin {}", cert.min_margin);
    assert!(!dominates(&q, 0, 0, &inst.algorithm, &all, &params, &inst.class).unwrap().holds());
    assert!(!dominates(&naive, 0, 2, &inst.algorithm, &all, &params, &inst.class).unwrap().holds());
}

#[test]
fn stable_set_examples() {
    let inst = s1();
    let params = DominanceParams::default();
    let naive = naive_strategy(&inst.user_payoff);
    assert_eq!(stable_set(&naive, &inst.algorithm, &inst.class, &params).unwrap().survivors, vec![2]);
    assert_eq!(stable_set(&first_half_clicks(), &inst.algorithm, &inst.class, &params).unwrap().survivors, vec![0]);

    let single = HypothesisClass::new(vec![inst.class.model(1).clone()], None).unwrap();
    assert_eq!(stable_set(&naive, &inst.algorithm, &single, &params).unwrap().survivors, vec![0]);

    let p = s1_params();
    let (a, b) = (&p.partition_a, &p.partition_b);
    let support = |s: &[usize]| Strategy::from_engagement(&(0..8).map(|z| if s.contains(&z) { 1.0 } else { 0.0 }).collect::<Vec<_>>()).unwrap();
    assert_eq!(stylized_stable_set(&support(&[0]), a, b, CLICK).unwrap(), 0);
    assert_eq!(stylized_stable_set(&support(&[4]), a, b, CLICK).unwrap(), 1);
    assert_eq!(stylized_stable_set(&support(&[0, 4]), a, b, CLICK).unwrap(), 2);
}

#[test]
fn naive_rows_and_ties() {
    let inst = s1();
    let q = naive_strategy(&inst.user_payoff);
    assert_eq!(q.row(0), &[0.0, 1.0]);
    assert_eq!(q.row(3), &[1.0, 0.0]);
    let u = PayoffMatrix::new(vec![vec![2.0, 2.0], vec![1.0, 3.0]], (0.0, 3.0)).unwrap();
    assert_eq!(naive_strategy(&u).row(0), &[0.5, 0.5]);
    let u = PayoffMatrix::new(vec![vec![1.0, 1.0, 0.0]], (0.0, 1.0)).unwrap();
    assert_eq!(naive_strategy(&u).row(0), &[0.5, 0.5, 0.0]);
}

#[test]
fn payoff_examples() {
    let inst = s1();
    let naive = naive_strategy(&inst.user_payoff);
    let uniform = inst.algorithm.propose(&Belief::vertex(3, 2), &inst.class).unwrap();
    close(expected_user_payoff(&uniform, &naive, &naive, &inst.user_payoff, 0.0).unwrap(), 0.625, 1e-15);
    close(expected_user_payoff(&uniform, &naive, &naive, &inst.user_payoff, 5.0).unwrap(), 0.625, 1e-15);
    close(expected_platform_payoff(&uniform, &naive, &inst.platform_payoff).unwrap(), 0.625, 1e-15);

    let q = first_half_clicks();
    let feed = inst.algorithm.propose(&Belief::vertex(3, 0), &inst.class).unwrap();
    close(expected_user_payoff(&feed, &q, &naive, &inst.user_payoff, 0.0).unwrap(), 0.7125, 1e-15);
    close(expected_platform_payoff(&feed, &q, &inst.platform_payoff).unwrap(), 0.7125, 1e-15);

    let never = Strategy::deterministic(&[0; 8], 2).unwrap();
    assert_eq!(expected_platform_payoff(&feed, &never, &inst.platform_payoff).unwrap(), 0.0);

    let params = DominanceParams::default();
    let stable = stable_set(&q, &inst.algorithm, &inst.class, &params).unwrap();
    let worst = worst_case_over_stable(
        &inst.algorithm,
        &inst.class,
        &stable,
        &q,
        Payoff::User { u: &inst.user_payoff, q_br: &naive, lambda: 0.0 },
        &params,
        Sense::Min,
    )
    .unwrap();
    close(worst.value, 0.7125, 1e-15);
}

#[test]
fn strategic_solutions() {
    let p = s1_params();
    let inst = s1();
    let params = DominanceParams::default();
    let user = UserParams {
        candidates: CandidateSpec::PartitionMasks { sets: vec![p.positive(), vec![0, 1, 2], vec![4, 5]] },
        ..Default::default()
    };
    let sol = solve_strategic(&inst, &user, &params).unwrap();
    assert_eq!(sol.strategy, first_half_clicks());
    close(sol.worst_case_user_payoff, 0.7125, 1e-12);
    close(sol.naive_row().user_payoff, 0.625, 1e-12);

    let aligned = make_stylized(&s1_aligned_params()).unwrap();
    assert!(solve_strategic(&aligned, &UserParams::default(), &params).unwrap().is_best_response());

    let q_br = naive_strategy(&inst.user_payoff);
    let only = UserParams { candidates: CandidateSpec::Explicit { strategies: vec![] }, ..Default::default() };
    let sol = solve_strategic(&inst, &only, &params).unwrap();
    assert!(sol.is_best_response());
    assert_eq!(sol.strategy, q_br);
}

#[test]
fn alignment_examples() {
    let params = DominanceParams::default();
    let rep = alignment_benefit_check(&s1(), &UserParams::default(), &params).unwrap();
    close(rep.lhs, 0.7125, 1e-12);
    close(rep.rhs, 0.625, 1e-12);
    assert!(rep.strategization_helps);

    let aligned = make_stylized(&s1_aligned_params()).unwrap();
    let rep = alignment_benefit_check(&aligned, &UserParams::default(), &params).unwrap();
    close(rep.lhs, rep.rhs, 1e-12);
    assert!(!rep.strategization_helps);

    // U = V: the user only values engagement.
    let inst = s1();
    let same = GameInstance::new(
        inst.spaces.clone(),
        inst.platform_payoff.clone(),
        inst.platform_payoff.clone(),
        inst.algorithm.clone(),
        inst.class.clone(),
        Belief::uniform(3),
    )
    .unwrap();
    let rep = alignment_benefit_check(&same, &UserParams::default(), &params).unwrap();
    assert!(rep.lhs >= rep.rhs - 1e-12);
}

#[test]
fn counterfactual_examples() {
    let p = prop4_params();
    let (inst, p_cf) = make_prop4_instance().unwrap();
    let params = DominanceParams::default();
    let closed = Stylized::from_params(&p);
    let q1 = Belief::vertex(3, 0);
    close(predicted_payoff(&inst.algorithm, &q1, &inst.class, &inst.platform_payoff).unwrap(), 0.7125, 1e-12);
    close(predicted_payoff(&p_cf, &q1, &inst.class, &inst.platform_payoff).unwrap(), 0.75 * (0.1 * 1.03 / 3.05 + 0.9), 1e-12);
    close(closed.predicted_toxic_at_q1(PROP4_ALPHA), 0.75 * (0.1 * 1.03 / 3.05 + 0.9), 1e-12);

    let user = p.user_params();
    close(true_strategic_payoff(&inst, &p_cf, &user, &params).unwrap(), closed.true_toxic(PROP4_ALPHA), 1e-12);
    close(true_strategic_payoff(&s1(), &s1().algorithm, &user, &params).unwrap(), 0.7125, 1e-12);

    let rep = counterfactual_audit(&inst, &p_cf, &UserModel::Strategic(user.clone()), &params).unwrap();
    assert!(rep.predicted < rep.current && rep.current < rep.true_strategic);
    assert_eq!(rep.counterfactual_survivors, vec![1]);
    let same = counterfactual_audit(&inst, &inst.algorithm, &UserModel::Strategic(user.clone()), &params).unwrap();
    assert!(same.gap.abs() <= 1e-9, "gap {}", same.gap);

    // Joint scope keeps the ordering.
    let (inst_j, p_joint) = make_prop4_instance_with(PROP4_ALPHA, ReweightScope::Joint).unwrap();
    let rep = counterfactual_audit(&inst_j, &p_joint, &UserModel::Strategic(user), &params).unwrap();
    assert!(rep.predicted < rep.current && rep.current < rep.true_strategic);

    // Identical models: the forecast ignores the belief.
    let m = inst.class.model(2).clone();
    let flat = inst.with_class(HypothesisClass::new(vec![m.clone(), m.clone(), m], None).unwrap()).unwrap();
    let a = predicted_payoff(&p_cf, &Belief::vertex(3, 0), &flat.class, &flat.platform_payoff).unwrap();
    let b = predicted_payoff(&p_cf, &Belief::new(vec![0.2, 0.5, 0.3]).unwrap(), &flat.class, &flat.platform_payoff).unwrap();
    close(a, b, 1e-15);

    let never = Belief::new(vec![1.0]).unwrap();
    let idle = HypothesisClass::new(vec![Strategy::deterministic(&[0; 8], 2).unwrap()], None).unwrap();
    assert_eq!(predicted_payoff(&ProposerAlgorithm::Uniform, &never, &idle, &inst.platform_payoff).unwrap(), 0.0);
}

#[test]
fn constant_platform_payoff_is_its_own_truth() {
    let inst = s1();
    let v = PayoffMatrix::new(vec![vec![0.4, 0.4]; 8], (0.0, 1.0)).unwrap();
    let flat = GameInstance::new(inst.spaces.clone(), inst.user_payoff.clone(), v, inst.algorithm.clone(), inst.class.clone(), Belief::uniform(3))
        .unwrap();
    close(true_strategic_payoff(&flat, &flat.algorithm, &UserParams::default(), &DominanceParams::default()).unwrap(), 0.4, 1e-15);
}

#[test]
fn trust_examples() {
    let params = DominanceParams::default();
    let rep = trust_audit(&s1(), &UserParams::default(), &params).unwrap();
    close(rep.strategization_gap, 0.0875, 1e-12);
    assert!(!rep.trustworthy_at(0.0));

    let aligned = trust_audit(&make_stylized(&s1_aligned_params()).unwrap(), &UserParams::default(), &params).unwrap();
    assert!(aligned.strategization_gap <= 0.0);
    assert!(aligned.trustworthy_at(aligned.naive_value));

    // Engaging always costs 1, opting out is worth 0.
    let inst = s1();
    let u = PayoffMatrix::from_fn(8, 2, (-1.0, 0.0), |_, b| if b == CLICK { -1.0 } else { 0.0 }).unwrap();
    let grim = GameInstance::new(inst.spaces.clone(), u, inst.platform_payoff.clone(), inst.algorithm.clone(), inst.class.clone(), Belief::uniform(3))
        .unwrap();
    let rep = trust_audit(&grim, &UserParams::default(), &params).unwrap();
    assert_eq!(rep.strategization_gap, 0.0);
    assert_eq!(rep.kappa, 0.0);
    assert!(rep.trustworthy_at(0.0));
    assert!(!rep.trustworthy_at(0.1));
}

#[test]
fn eps_net_sizes() {
    assert_eq!(simplex_net(2, 0.5).unwrap(), vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    let size = |nz, eps| build_eps_net_class(&ActionSpaces::new(nz, 2).unwrap(), eps, DEFAULT_NET_GUARD).unwrap().len();
    assert_eq!(size(2, 0.5), 9);
    assert_eq!(size(1, 1.0), 2);
    assert_eq!(size(3, 0.25), 125);
    assert!(build_eps_net_class(&ActionSpaces::new(8, 2).unwrap(), 0.01, DEFAULT_NET_GUARD).is_err());
}

#[test]
fn predictability_examples() {
    let mut bounds = Vec::new();
    for eps in [0.25, 0.125] {
        let spaces = ActionSpaces::new(2, 2).unwrap();
        let class = build_eps_net_class(&spaces, eps, DEFAULT_NET_GUARD).unwrap();
        let u = PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], (0.0, 1.0)).unwrap();
        let v = PayoffMatrix::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]], (0.0, 1.0)).unwrap();
        let m = class.len();
        let inst = GameInstance::new(spaces, u, v, ProposerAlgorithm::Uniform, class, Belief::uniform(m)).unwrap();
        let rep = br_predictability_check(&inst, &ProposerAlgorithm::Uniform, LipschitzSource::Supplied { value: 0.0 }, eps, &DominanceParams::default())
            .unwrap();
        assert!(rep.holds);
        // The best response is itself a net point, so the forecast is exact.
        assert!(rep.empirical_gap <= 1e-12);
        bounds.push(rep.bound);
    }
    close(bounds[0], 0.5f64.sqrt(), 1e-15);
    close(bounds[0] / bounds[1], 2f64.sqrt(), 1e-15);
}

#[test]
fn scenario_examples() {
    let p = s1_params();
    assert_eq!(p.counts(), [3, 1, 2, 2]);
    let mut bad = p.clone();
    bad.gamma = 0.0;
    assert!(make_stylized(&bad).is_err());
    let aligned = s1_aligned_params();
    assert!(aligned.positive().iter().all(|z| aligned.partition_a.contains(z)));

    // Calibration: the forecast at the first-half vertex equals the current payoff.
    let c = Stylized::from_params(&prop4_params());
    close(c.predicted_at_q1(), c.strategic_first_half(), 1e-15);
    let w = toxicity_weights(&prop4_params(), PROP4_ALPHA);
    assert_eq!(w, vec![0.01, 0.01, 0.01, 1.0, 1.0, 1.0, 0.01, 0.01]);
    let (inst, identity) = make_prop4_instance_with(1.0, ReweightScope::Componentwise).unwrap();
    let b = Belief::new(vec![0.2, 0.3, 0.5]).unwrap();
    let (x, y) = (inst.algorithm.propose(&b, &inst.class).unwrap(), identity.propose(&b, &inst.class).unwrap());
    for (a, b) in x.weights().iter().zip(y.weights()) {
        close(*a, *b, 1e-15);
    }

    let (before, after) = make_prop5_instance().unwrap();
    let p5 = prop5_params();
    assert_eq!(before.class.len(), 3);
    let extra = after.class.model(3);
    let eta = p5.gamma / 2.0;
    assert!((0..8).all(|z| (extra.prob(CLICK, z) - (1.0 - eta)).abs() < 1e-15));
    let params = DominanceParams::default();
    let sol = solve_strategic(&before, &p5.user_params(), &params).unwrap();
    assert_eq!(sol.strategy, p5.click_only(&p5.partition_a));
    assert_eq!(sol.stable_set.survivors, vec![0]);
}

#[test]
fn quadratic_family() {
    let v = PayoffMatrix::new(vec![vec![0.0, 1.0], vec![0.25, 0.5]], (0.0, 1.0)).unwrap();
    let u = quadratic_payoff(&v, 0.5).unwrap();
    for z in 0..2 {
        for b in 0..2 {
            close(u.get(z, b), (v.get(z, b) - 0.5).powi(2), 1e-15);
        }
    }
    assert_eq!(u.declared_range(), (0.0, 0.25));
}
