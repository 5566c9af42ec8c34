use super::{
    Action, EndReason, Negotiator, NegotiatorFactory, SessionConfig, SessionContext, SessionOutcome,
    SessionTrace, Side, Step,
};
use crate::domain::{Outcome, Scenario};
use crate::error::{Error, Result};
use crate::seed;

/// Per-negotiator seed stream ids.
const STREAM_A: u64 = 0xa;
const STREAM_B: u64 = 0xb;

fn finish(scenario: &Scenario, agreement: Option<Outcome>, rounds_used: usize, end: EndReason, first: Side) -> SessionOutcome {
    let (utility_a, utility_b) = match &agreement {
        Some(o) => (
            scenario.party(Side::A).utility(o).expect("validated offer"),
            scenario.party(Side::B).utility(o).expect("validated offer"),
        ),
        None => (
            scenario.party(Side::A).reservation(),
            scenario.party(Side::B).reservation(),
        ),
    };
    SessionOutcome {
        agreement,
        utility_a,
        utility_b,
        rounds_used,
        end,
        first_mover: first,
    }
}

/// One session with `neg_a` holding profile A and moving first.
pub fn run_session(
    neg_a: &mut dyn Negotiator,
    neg_b: &mut dyn Negotiator,
    scenario: &Scenario,
    config: &SessionConfig,
) -> Result<(SessionOutcome, SessionTrace)> {
    run_session_with(neg_a, neg_b, scenario, config, Side::A)
}

/// One session with an explicit first mover.
pub fn run_session_with(
    neg_a: &mut dyn Negotiator,
    neg_b: &mut dyn Negotiator,
    scenario: &Scenario,
    config: &SessionConfig,
    first: Side,
) -> Result<(SessionOutcome, SessionTrace)> {
    if config.deadline_rounds == 0 {
        return Err(Error::Config("deadline_rounds must be at least 1".into()));
    }
    let t_max = config.deadline_rounds;
    neg_a.on_session_start(
        scenario.party(Side::A),
        &SessionContext {
            deadline_rounds: t_max,
            seed: seed::derive(config.seed, &[STREAM_A]),
        },
    )?;
    neg_b.on_session_start(
        scenario.party(Side::B),
        &SessionContext {
            deadline_rounds: t_max,
            seed: seed::derive(config.seed, &[STREAM_B]),
        },
    )?;
    let space = scenario.space();
    let mut trace = SessionTrace {
        deadline_rounds: t_max,
        steps: Vec::with_capacity(2 * t_max),
    };
    let mut last: [Option<Outcome>; 2] = [None, None];
    let slot = |s: Side| match s {
        Side::A => 0,
        Side::B => 1,
    };
    for t in 0..t_max {
        let t_r = t as f64 / t_max as f64;
        for actor in [first, first.other()] {
            let neg: &mut dyn Negotiator = match actor {
                Side::A => &mut *neg_a,
                Side::B => &mut *neg_b,
            };
            let standing = last[slot(actor.other())].as_ref();
            let action = neg.act(t_r, standing, last[slot(actor)].as_ref());
            trace.steps.push(Step {
                round: t,
                relative_time: t_r,
                actor,
                action: action.clone(),
            });
            match action {
                Action::Accept => {
                    return Ok(match standing {
                        Some(o) => (finish(scenario, Some(o.clone()), t + 1, EndReason::Agreement, first), trace),
                        None => (finish(scenario, None, t + 1, EndReason::Violation(actor), first), trace),
                    });
                }
                Action::EndNegotiation => {
                    return Ok((finish(scenario, None, t + 1, EndReason::Walkaway(actor), first), trace));
                }
                Action::Offer(o) => {
                    if space.validate(&o).is_err() {
                        return Ok((finish(scenario, None, t + 1, EndReason::Violation(actor), first), trace));
                    }
                    last[slot(actor)] = Some(o);
                }
            }
        }
    }
    Ok((finish(scenario, None, t_max, EndReason::Deadline, first), trace))
}

/// Recomputes the outcome of a recorded trace without the negotiators.
pub fn replay(trace: &SessionTrace, scenario: &Scenario) -> Result<SessionOutcome> {
    let first = trace
        .steps
        .first()
        .map(|s| s.actor)
        .ok_or_else(|| Error::State("empty trace".into()))?;
    let mut standing: [Option<Outcome>; 2] = [None, None];
    for step in &trace.steps {
        let mine = match step.actor {
            Side::A => 0,
            Side::B => 1,
        };
        match &step.action {
            Action::Accept => {
                return Ok(match standing[1 - mine].clone() {
                    Some(o) => finish(scenario, Some(o), step.round + 1, EndReason::Agreement, first),
                    None => finish(scenario, None, step.round + 1, EndReason::Violation(step.actor), first),
                });
            }
            Action::EndNegotiation => {
                return Ok(finish(scenario, None, step.round + 1, EndReason::Walkaway(step.actor), first));
            }
            Action::Offer(o) => {
                if scenario.space().validate(o).is_err() {
                    return Ok(finish(scenario, None, step.round + 1, EndReason::Violation(step.actor), first));
                }
                standing[mine] = Some(o.clone());
            }
        }
    }
    Ok(finish(scenario, None, trace.deadline_rounds, EndReason::Deadline, first))
}

/// Describes a batch of repeated sessions between two factories.
pub struct SessionSpec<'a> {
    pub scenario: &'a Scenario,
    pub deadline_rounds: usize,
    pub master_seed: u64,
    pub count: usize,
    /// Alternate the first mover by session index (even: A starts).
    pub alternate_first: bool,
}

/// `count` independent sessions, each with fresh negotiator instances and a
/// derived seed. Session failures are returned in place, not raised.
pub fn run_many(
    factory_a: &dyn NegotiatorFactory,
    factory_b: &dyn NegotiatorFactory,
    spec: &SessionSpec<'_>,
) -> Vec<Result<(SessionOutcome, SessionTrace)>> {
    (0..spec.count)
        .map(|i| {
            let config = SessionConfig::new(spec.deadline_rounds, seed::derive(spec.master_seed, &[i as u64]))?;
            let first = if spec.alternate_first && i % 2 == 1 {
                Side::B
            } else {
                Side::A
            };
            let mut a = factory_a.create()?;
            let mut b = factory_b.create()?;
            run_session_with(a.as_mut(), b.as_mut(), spec.scenario, &config, first)
        })
        .collect()
}

/// Mean utility of `side` over successful sessions, with failures scored as
/// that side's reservation value.
pub fn mean_utility(results: &[Result<(SessionOutcome, SessionTrace)>], scenario: &Scenario, side: Side) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    let reservation = scenario.party(side).reservation();
    let total: f64 = results
        .iter()
        .map(|r| r.as_ref().map_or(reservation, |(o, _)| o.utility(side)))
        .sum();
    total / results.len() as f64
}
