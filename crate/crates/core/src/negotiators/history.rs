use crate::domain::{Outcome, Party};

/// Self-utilities of both offer streams seen so far in a session.
#[derive(Clone, Debug, Default)]
pub struct OfferHistory {
    pub own: Vec<f64>,
    pub opponent: Vec<f64>,
}

impl OfferHistory {
    pub fn clear(&mut self) {
        self.own.clear();
        self.opponent.clear();
    }

    /// Records the standing opponent offer if it is new this turn and
    /// returns its utility.
    pub fn observe(&mut self, party: &Party, standing: Option<&Outcome>) -> Option<f64> {
        let u = party.utility(standing?).ok()?;
        self.opponent.push(u);
        Some(u)
    }

    /// The opponent history before the latest observation.
    pub fn earlier_opponent(&self) -> &[f64] {
        &self.opponent[..self.opponent.len().saturating_sub(1)]
    }
}
