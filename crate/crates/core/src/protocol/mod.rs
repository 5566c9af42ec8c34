//! Stacked alternating offers between two negotiators under a round deadline.

mod session;
mod trace;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{Outcome, Party};
use crate::error::Result;

pub use crate::domain::Side;
pub use session::{mean_utility, replay, run_many, run_session, run_session_with, SessionSpec};
pub use trace::{write_trace_csv, TraceRow};

pub const DEFAULT_DEADLINE: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Offer(Outcome),
    Accept,
    EndNegotiation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Total rounds `T`; one round is one turn by each side.
    pub deadline_rounds: usize,
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(deadline_rounds: usize, seed: u64) -> Result<Self> {
        if deadline_rounds == 0 {
            return Err(crate::Error::Config("deadline_rounds must be at least 1".into()));
        }
        Ok(Self {
            deadline_rounds,
            seed,
        })
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            deadline_rounds: DEFAULT_DEADLINE,
            seed: 0,
        }
    }
}

/// What a negotiator learns at session start. Only its own side of the scenario.
#[derive(Clone, Debug)]
pub struct SessionContext {
    pub deadline_rounds: usize,
    /// Seed private to this negotiator for this session.
    pub seed: u64,
}

pub trait Negotiator: Send {
    fn on_session_start(&mut self, party: &Party, ctx: &SessionContext) -> Result<()>;

    /// One turn. `t_r = t / T` for the current round `t`.
    fn act(&mut self, t_r: f64, standing: Option<&Outcome>, own_last: Option<&Outcome>) -> Action;
}

/// Builds fresh negotiator instances; one instance per session.
pub trait NegotiatorFactory: Send + Sync {
    fn id(&self) -> &str;
    fn create(&self) -> Result<Box<dyn Negotiator>>;
}

pub type SharedFactory = Arc<dyn NegotiatorFactory>;

/// Factory backed by a closure.
pub struct FnFactory<F> {
    id: String,
    make: F,
}

impl<F> FnFactory<F>
where
    F: Fn() -> Result<Box<dyn Negotiator>> + Send + Sync,
{
    pub fn new(id: impl Into<String>, make: F) -> Self {
        Self {
            id: id.into(),
            make,
        }
    }

    pub fn shared(id: impl Into<String>, make: F) -> SharedFactory
    where
        F: 'static,
    {
        Arc::new(Self::new(id, make))
    }
}

impl<F> NegotiatorFactory for FnFactory<F>
where
    F: Fn() -> Result<Box<dyn Negotiator>> + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn create(&self) -> Result<Box<dyn Negotiator>> {
        (self.make)()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub round: usize,
    pub relative_time: f64,
    pub actor: Side,
    pub action: Action,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub deadline_rounds: usize,
    pub steps: Vec<Step>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndReason {
    Agreement,
    Walkaway(Side),
    Deadline,
    /// Accept with no standing offer, or an offer outside the outcome space.
    Violation(Side),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub agreement: Option<Outcome>,
    pub utility_a: f64,
    pub utility_b: f64,
    pub rounds_used: usize,
    pub end: EndReason,
    pub first_mover: Side,
}

impl SessionOutcome {
    pub fn utility(&self, side: Side) -> f64 {
        match side {
            Side::A => self.utility_a,
            Side::B => self.utility_b,
        }
    }

    pub fn violation(&self) -> Option<Side> {
        match self.end {
            EndReason::Violation(s) => Some(s),
            _ => None,
        }
    }
}
