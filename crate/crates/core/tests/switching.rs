mod common;

use std::sync::Arc;

use common::*;

use negswitch_core::classifier::*;
use negswitch_core::domain::*;
use negswitch_core::negotiators::*;
use negswitch_core::protocol::*;
use negswitch_core::switching::*;

fn ctx() -> SessionContext {
    SessionContext {
        deadline_rounds: 100,
        seed: 0,
    }
}

#[test]
fn pure_switching_follows_argmax() {
    let bundles = vec![
        fixed_bundle(0.9, NEVER),
        fixed_bundle(0.6, AcceptancePolicy::Next),
        fixed_bundle(0.3, NEVER),
    ];
    let spec = Arc::new(RlAgentSpec::new(bundles, Some(fixed_classifier(&[0.1, 0.7, 0.2])), SwitchConfig::default()).unwrap());
    let mut agent = RlAgent::new(spec.clone());
    let p = grid_party();
    agent.on_session_start(&p, &ctx()).unwrap();
    // Opening: padded window, legal offer from strategy index 1.
    let a = agent.act(0.0, None, None);
    assert_eq!(agent.active(), 1);
    let rec = &agent.decision_log()[0];
    assert!((rec.proposed_utility - 0.6).abs() < 1e-12);
    assert_eq!(rec.probabilities.len(), 3);
    assert!((rec.probabilities[1] - 0.7).abs() < 1e-9);
    assert_eq!(a, Action::Offer(Outcome(vec![60])));
    // Strategy 1's AC_next accepts 0.65 ≥ 0.6; strategies 0 and 2 never would.
    assert_eq!(agent.act(0.01, Some(&Outcome(vec![65])), None), Action::Accept);
    let mut agent = RlAgent::new(spec);
    agent.on_session_start(&p, &ctx()).unwrap();
    assert_eq!(agent.act(0.01, Some(&Outcome(vec![55])), None), Action::Offer(Outcome(vec![60])));
}

#[test]
fn beta_combination_targets_weighted_sum() {
    let bundles = vec![fixed_bundle(0.8, NEVER), fixed_bundle(0.6, NEVER), fixed_bundle(0.2, NEVER)];
    let config = SwitchConfig {
        mode: SwitchMode::Combine {
            weights: vec![0.5, 0.5, 0.0],
        },
        ..SwitchConfig::default()
    };
    let mut agent = RlAgent::new(Arc::new(
        RlAgentSpec::new(bundles, Some(fixed_classifier(&[0.2, 0.2, 0.6])), config).unwrap(),
    ));
    let p = grid_party();
    agent.on_session_start(&p, &ctx()).unwrap();
    assert_eq!(agent.act(0.0, None, None), Action::Offer(inverse_utility(&p, 0.7).unwrap()));
    assert!((agent.decision_log()[0].proposed_utility - 0.7).abs() < 1e-12);
    assert_eq!(agent.active(), 2);
}

#[test]
fn spec_validation() {
    let b = || fixed_bundle(0.5, NEVER);
    assert!(RlAgentSpec::new(vec![], None, SwitchConfig::default()).is_err());
    assert!(RlAgentSpec::new(vec![b(), b()], Some(fixed_classifier(&[0.5, 0.2, 0.3])), SwitchConfig::default()).is_err());
    let bad_weights = SwitchConfig {
        mode: SwitchMode::Combine { weights: vec![0.7, 0.7] },
        ..SwitchConfig::default()
    };
    assert!(RlAgentSpec::new(vec![b(), b()], None, bad_weights).is_err());
    let zero_period = SwitchConfig {
        decision_period: 0,
        ..SwitchConfig::default()
    };
    assert!(RlAgentSpec::new(vec![b()], None, zero_period).is_err());
    assert!(make_rl_agent("rl", vec![b(), b()], Some(fixed_classifier(&[0.5, 0.5])), SwitchConfig::default()).is_ok());
}

#[test]
fn missing_classifier_falls_back() {
    let bundles = vec![fixed_bundle(0.4, NEVER), fixed_bundle(0.9, NEVER)];
    let config = SwitchConfig {
        initial_strategy_index: 1,
        ..SwitchConfig::default()
    };
    let mut agent = RlAgent::new(Arc::new(RlAgentSpec::new(bundles, None, config).unwrap()));
    agent.on_session_start(&grid_party(), &ctx()).unwrap();
    assert_eq!(agent.act(0.0, None, None), Action::Offer(Outcome(vec![90])));
    assert!(agent.decision_log()[0].fallback);
}

#[test]
fn single_strategy_agent_equals_its_policy() {
    let s = generate_scenario(3, 300, 0.2).unwrap();
    let bundle = fixed_bundle(0.7, AcceptancePolicy::default());
    let rl = make_rl_agent("rl", vec![bundle.clone()], None, SwitchConfig::default()).unwrap();
    let single = negswitch_core::sac::bundle_factory("single", bundle);
    for opp in BASELINE_IDS {
        let o = baseline_factory(opp).unwrap();
        let spec = SessionSpec {
            scenario: &s,
            deadline_rounds: 50,
            master_seed: 2,
            count: 10,
            alternate_first: true,
        };
        let a: Vec<_> = run_many(rl.as_ref(), o.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
        let b: Vec<_> = run_many(single.as_ref(), o.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn switching_only_at_period_boundaries() {
    // A real (untrained) classifier varies with the window; with period 3 the
    // active index may only change on turns 0, 3, 6, ...
    let bundles = vec![fixed_bundle(0.9, NEVER), fixed_bundle(0.5, NEVER)];
    let clf = Arc::new(ClassifierModel {
        network: classifier_network(20, 2, 11).unwrap(),
        class_ids: vec!["a".into(), "b".into()],
        k: 20,
        validation_accuracy: 0.0,
    });
    let config = SwitchConfig {
        decision_period: 3,
        ..SwitchConfig::default()
    };
    let mut agent = RlAgent::new(Arc::new(RlAgentSpec::new(bundles, Some(clf), config).unwrap()));
    let p = grid_party();
    agent.on_session_start(&p, &ctx()).unwrap();
    for t in 0..60 {
        agent.act(t as f64 / 100.0, Some(&Outcome(vec![(t * 7) % 50])), None);
    }
    let log = agent.decision_log();
    for w in log.windows(2) {
        if w[1].turn % 3 != 0 {
            assert_eq!(w[0].active, w[1].active);
        }
    }
    for r in log {
        // One-hot β: emitted target is exactly the active strategy's utility.
        let expected = if r.active == 0 { 0.9 } else { 0.5 };
        assert!((r.proposed_utility - expected).abs() < 1e-12);
    }
}

#[test]
fn argmax_is_invariant_to_positive_logit_scaling() {
    let logits = [0.3, -1.2, 2.5, 2.4, 0.0];
    let softmax = |c: f64| {
        let e: Vec<f64> = logits.iter().map(|l| (c * l).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    for c in [0.01, 0.5, 1.0, 3.0, 40.0] {
        assert_eq!(argmax(&softmax(c)), 2);
    }
    assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
}

#[test]
fn rl_agent_sessions_are_deterministic_and_above_reservation() {
    let mut s = generate_scenario(5, 300, 0.2).unwrap().to_file();
    s.profile_a.reservation = 0.3;
    let s = Scenario::from_file(s).unwrap();
    let bundles = vec![fixed_bundle(0.95, AcceptancePolicy::default()), fixed_bundle(0.31, AcceptancePolicy::default())];
    let clf = Arc::new(ClassifierModel {
        network: classifier_network(20, 2, 5).unwrap(),
        class_ids: vec!["a".into(), "b".into()],
        k: 20,
        validation_accuracy: 0.0,
    });
    let rl = make_rl_agent("rl", bundles, Some(clf), SwitchConfig::default()).unwrap();
    let o = baseline_factory(RANDOM).unwrap();
    let spec = SessionSpec {
        scenario: &s,
        deadline_rounds: 30,
        master_seed: 9,
        count: 20,
        alternate_first: true,
    };
    let a: Vec<_> = run_many(rl.as_ref(), o.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
    let b: Vec<_> = run_many(rl.as_ref(), o.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
    assert_eq!(a, b);
    for (_, trace) in &a {
        for st in trace.steps.iter().filter(|st| st.actor == Side::A) {
            if let Action::Offer(o) = &st.action {
                assert!(s.party(Side::A).utility(o).unwrap() > 0.3);
            }
        }
    }
}

#[test]
fn decision_log_csv() {
    let mut agent = RlAgent::new(Arc::new(
        RlAgentSpec::new(vec![fixed_bundle(0.5, NEVER), fixed_bundle(0.6, NEVER)], Some(fixed_classifier(&[0.3, 0.7])), SwitchConfig::default()).unwrap(),
    ));
    agent.on_session_start(&grid_party(), &ctx()).unwrap();
    agent.act(0.0, None, None);
    let mut buf = Vec::new();
    write_decision_log_csv(&mut buf, agent.decision_log()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("round,probabilities,active,proposed_utility,action,fallback"));
    assert_eq!(text.lines().count(), 2);
}
