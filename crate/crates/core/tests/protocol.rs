use std::sync::Arc;

use negswitch_core::domain::*;
use negswitch_core::negotiators::*;
use negswitch_core::protocol::*;
use negswitch_core::Result;

/// Replays a fixed action list, then keeps offering its first outcome.
struct Scripted {
    script: Vec<Action>,
    turn: usize,
}

impl Scripted {
    fn new(script: Vec<Action>) -> Self {
        Self { script, turn: 0 }
    }
}

impl Negotiator for Scripted {
    fn on_session_start(&mut self, _party: &Party, _ctx: &SessionContext) -> Result<()> {
        Ok(())
    }

    fn act(&mut self, _t_r: f64, _standing: Option<&Outcome>, _own: Option<&Outcome>) -> Action {
        let a = self.script.get(self.turn).cloned().unwrap_or(Action::Offer(Outcome(vec![0, 0])));
        self.turn += 1;
        a
    }
}

fn scenario() -> Scenario {
    generate_scenario(4, 30, 0.3).unwrap()
}

fn check_trace(trace: &SessionTrace, outcome: &SessionOutcome, scenario: &Scenario) {
    assert!(outcome.rounds_used <= trace.deadline_rounds);
    for w in trace.steps.windows(2) {
        assert_ne!(w[0].actor, w[1].actor);
        assert!(w[1].round == w[0].round || w[1].round == w[0].round + 1);
    }
    for (i, s) in trace.steps.iter().enumerate() {
        assert_eq!(s.round, i / 2);
        assert_eq!(s.relative_time, s.round as f64 / trace.deadline_rounds as f64);
    }
    let last = trace.steps.last().unwrap();
    assert_eq!(outcome.agreement.is_some(), matches!(last.action, Action::Accept) && outcome.violation().is_none());
    match &outcome.agreement {
        Some(o) => {
            assert_eq!(outcome.utility_a, scenario.party(Side::A).utility(o).unwrap());
            assert_eq!(outcome.utility_b, scenario.party(Side::B).utility(o).unwrap());
        }
        None => {
            assert_eq!(outcome.utility_a, scenario.party(Side::A).reservation());
            assert_eq!(outcome.utility_b, scenario.party(Side::B).reservation());
        }
    }
    assert_eq!(&replay(trace, scenario).unwrap(), outcome);
}

#[test]
fn deadline_without_acceptance() {
    let s = scenario();
    let offer = Action::Offer(Outcome(vec![0, 0]));
    let mut a = Scripted::new(vec![offer.clone(); 100]);
    let mut b = Scripted::new(vec![offer; 100]);
    let (out, trace) = run_session(&mut a, &mut b, &s, &SessionConfig::new(10, 1).unwrap()).unwrap();
    assert_eq!(out.end, EndReason::Deadline);
    assert_eq!(out.agreement, None);
    assert_eq!((out.utility_a, out.utility_b, out.rounds_used), (0.0, 0.0, 10));
    assert_eq!(trace.steps.len(), 20);
    check_trace(&trace, &out, &s);
}

#[test]
fn immediate_acceptance() {
    let s = scenario();
    let w = s.party(Side::A).outcome(3);
    let mut a = Scripted::new(vec![Action::Offer(w.clone())]);
    let mut b = Scripted::new(vec![Action::Accept]);
    let (out, trace) = run_session(&mut a, &mut b, &s, &SessionConfig::default()).unwrap();
    assert_eq!(out.agreement.as_ref(), Some(&w));
    assert_eq!(out.utility_a, s.party(Side::A).utility(&w).unwrap());
    assert_eq!(out.utility_b, s.party(Side::B).utility(&w).unwrap());
    assert_eq!(out.rounds_used, 1);
    check_trace(&trace, &out, &s);
}

#[test]
fn accept_without_standing_offer_is_a_violation() {
    let s = scenario();
    let mut a = Scripted::new(vec![Action::Accept]);
    let mut b = Scripted::new(vec![]);
    let (out, trace) = run_session(&mut a, &mut b, &s, &SessionConfig::default()).unwrap();
    assert_eq!(out.end, EndReason::Violation(Side::A));
    assert_eq!(out.violation(), Some(Side::A));
    assert_eq!(out.agreement, None);
    check_trace(&trace, &out, &s);

    let bad = Action::Offer(Outcome(vec![99, 0]));
    let mut a = Scripted::new(vec![Action::Offer(Outcome(vec![0, 0]))]);
    let mut b = Scripted::new(vec![bad]);
    let (out, _) = run_session(&mut a, &mut b, &s, &SessionConfig::default()).unwrap();
    assert_eq!(out.end, EndReason::Violation(Side::B));
}

#[test]
fn walkaway_and_first_mover() {
    let s = scenario();
    let mut a = Scripted::new(vec![]);
    let mut b = Scripted::new(vec![Action::EndNegotiation]);
    let config = SessionConfig::default();
    let (out, trace) = run_session_with(&mut a, &mut b, &s, &config, Side::B).unwrap();
    assert_eq!(out.end, EndReason::Walkaway(Side::B));
    assert_eq!(out.first_mover, Side::B);
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.steps[0].actor, Side::B);
}

#[test]
fn config_rejects_zero_deadline() {
    assert!(SessionConfig::new(0, 1).is_err());
    assert_eq!(SessionConfig::default().deadline_rounds, DEFAULT_DEADLINE);
}

#[test]
fn baseline_sessions_satisfy_invariants() {
    // 10⁴ sessions across all ordered baseline pairs and several scenarios.
    let scenarios: Vec<Scenario> = (0..5).map(|i| generate_scenario(50 + i, 40 + 60 * i as usize, 0.1 * i as f64).unwrap()).collect();
    let mut count = 0;
    for (si, s) in scenarios.iter().enumerate() {
        for ia in BASELINE_IDS {
            for ib in BASELINE_IDS {
                let fa = baseline_factory(ia).unwrap();
                let fb = baseline_factory(ib).unwrap();
                let spec = SessionSpec {
                    scenario: s,
                    deadline_rounds: 20 + 10 * si,
                    master_seed: si as u64,
                    count: 223,
                    alternate_first: true,
                };
                for r in run_many(fa.as_ref(), fb.as_ref(), &spec) {
                    let (out, trace) = r.unwrap();
                    assert_eq!(out.violation(), None);
                    check_trace(&trace, &out, s);
                    for step in &trace.steps {
                        if let Action::Offer(o) = &step.action {
                            let party = s.party(step.actor);
                            assert!(party.utility(o).unwrap() >= party.reservation());
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    assert!(count >= 10_000);
}

#[test]
fn run_many_is_deterministic_and_matches_means() {
    let s = scenario();
    let fa = baseline_factory(RANDOM).unwrap();
    let fb = baseline_factory(BOULWARE).unwrap();
    let spec = SessionSpec {
        scenario: &s,
        deadline_rounds: 30,
        master_seed: 77,
        count: 50,
        alternate_first: true,
    };
    let first: Vec<_> = run_many(fa.as_ref(), fb.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
    let second: Vec<_> = run_many(fa.as_ref(), fb.as_ref(), &spec).into_iter().map(|r| r.unwrap()).collect();
    assert_eq!(first, second);
    for (i, (out, _)) in first.iter().enumerate() {
        assert_eq!(out.first_mover, if i % 2 == 0 { Side::A } else { Side::B });
    }
    let results: Vec<_> = first.iter().cloned().map(Ok).collect();
    let manual = first.iter().map(|(o, _)| o.utility_a).sum::<f64>() / first.len() as f64;
    assert!((mean_utility(&results, &s, Side::A) - manual).abs() < 1e-12);
}

#[test]
fn deterministic_pair_gives_identical_outcomes() {
    let s = scenario();
    let fa = baseline_factory(BOULWARE).unwrap();
    let fb = baseline_factory(BOULWARE).unwrap();
    let spec = SessionSpec {
        scenario: &s,
        deadline_rounds: 40,
        master_seed: 3,
        count: 100,
        alternate_first: false,
    };
    let out: Vec<_> = run_many(fa.as_ref(), fb.as_ref(), &spec).into_iter().map(|r| r.unwrap().0).collect();
    assert!(out.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn session_order_permutation_does_not_change_outcomes() {
    // Each session reuses one long-lived factory; outcomes are compared by
    // seed regardless of the order the sessions are run in.
    let s = scenario();
    let fa = baseline_factory(TIT_FOR_TAT).unwrap();
    let fb = baseline_factory(RANDOM).unwrap();
    let seeds: Vec<u64> = (0..30).collect();
    let run = |order: &[u64]| {
        let mut map = std::collections::BTreeMap::new();
        for &seed in order {
            let mut a = fa.create().unwrap();
            let mut b = fb.create().unwrap();
            let out = run_session(a.as_mut(), b.as_mut(), &s, &SessionConfig::new(25, seed).unwrap()).unwrap();
            map.insert(seed, out);
        }
        map
    };
    let mut reversed = seeds.clone();
    reversed.reverse();
    let mut shuffled = seeds.clone();
    shuffled.rotate_left(11);
    let base = run(&seeds);
    assert_eq!(base, run(&reversed));
    assert_eq!(base, run(&shuffled));

    // A single instance reused across sessions also carries no state.
    let mut a = fa.create().unwrap();
    let mut b = fb.create().unwrap();
    for &seed in &reversed {
        let out = run_session(a.as_mut(), b.as_mut(), &s, &SessionConfig::new(25, seed).unwrap()).unwrap();
        assert_eq!(out, base[&seed]);
    }
}

#[test]
fn trace_csv_columns() {
    let s = scenario();
    let mut a = baseline_factory(BOULWARE).unwrap().create().unwrap();
    let mut b = baseline_factory(RANDOM).unwrap().create().unwrap();
    let (_, trace) = run_session(a.as_mut(), b.as_mut(), &s, &SessionConfig::new(5, 2).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &trace, &s).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "round,actor,action,outcome_id,u_self_of_offer,u_other_of_offer");
    assert_eq!(lines.count(), trace.steps.len());
    let rows = TraceRow::from_trace(&trace, &s).unwrap();
    assert_eq!(rows[0].actor, "a");
    let id = rows[0].outcome_id.unwrap();
    assert_eq!(rows[0].u_self_of_offer, Some(s.party(Side::A).utility_at(id)));
    assert_eq!(rows[0].u_other_of_offer, Some(s.party(Side::B).utility_at(id)));
}

#[test]
fn fn_factory_builds_fresh_instances() {
    let f = FnFactory::shared("scripted", || Ok(Box::new(Scripted::new(vec![Action::EndNegotiation])) as Box<dyn Negotiator>));
    assert_eq!(f.id(), "scripted");
    let s = Arc::new(scenario());
    let spec = SessionSpec {
        scenario: &s,
        deadline_rounds: 5,
        master_seed: 0,
        count: 3,
        alternate_first: false,
    };
    for r in run_many(f.as_ref(), f.as_ref(), &spec) {
        assert_eq!(r.unwrap().0.end, EndReason::Walkaway(Side::A));
    }
}
