use std::io::Write;

use serde::Serialize;

use super::{Action, SessionTrace, Side};
use crate::domain::Scenario;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub actor: &'static str,
    pub action: &'static str,
    pub outcome_id: Option<usize>,
    pub u_self_of_offer: Option<f64>,
    pub u_other_of_offer: Option<f64>,
}

impl TraceRow {
    /// Flattens a trace into analytics rows. `u_other_of_offer` uses the
    /// counterpart's profile and exists only for offline analysis.
    pub fn from_trace(trace: &SessionTrace, scenario: &Scenario) -> Result<Vec<TraceRow>> {
        trace
            .steps
            .iter()
            .map(|s| {
                let (action, offer) = match &s.action {
                    Action::Offer(o) => ("offer", Some(o)),
                    Action::Accept => ("accept", None),
                    Action::EndNegotiation => ("end", None),
                };
                let (outcome_id, u_self, u_other) = match offer {
                    Some(o) => (
                        Some(scenario.space().index_of(o)?),
                        Some(scenario.party(s.actor).utility(o)?),
                        Some(scenario.party(s.actor.other()).utility(o)?),
                    ),
                    None => (None, None, None),
                };
                Ok(TraceRow {
                    round: s.round,
                    actor: match s.actor {
                        Side::A => "a",
                        Side::B => "b",
                    },
                    action,
                    outcome_id,
                    u_self_of_offer: u_self,
                    u_other_of_offer: u_other,
                })
            })
            .collect()
    }
}

pub fn write_trace_csv<W: Write>(writer: W, trace: &SessionTrace, scenario: &Scenario) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in TraceRow::from_trace(trace, scenario)? {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
