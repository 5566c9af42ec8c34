use super::acceptance::{accept_decision, AcceptancePolicy};
use super::history::OfferHistory;
use crate::domain::{Floor, Outcome, Party};
use crate::error::Result;
use crate::protocol::{Action, Negotiator, SessionContext};

/// Next target after observing the opponent's offers in self-utility terms.
/// The opponent's concession is the gain in our utility between its last
/// two offers; a retraction counts as zero.
pub fn tit_for_tat_target(previous_target: f64, opponent_utilities: &[f64], reservation: f64) -> f64 {
    let n = opponent_utilities.len();
    if n < 2 {
        return previous_target.max(reservation);
    }
    let concession = (opponent_utilities[n - 1] - opponent_utilities[n - 2]).max(0.0);
    (previous_target - concession).max(reservation)
}

/// Naive tit-for-tat: reciprocates each opponent concession one for one.
pub struct TitForTat {
    acceptance: AcceptancePolicy,
    party: Option<Party>,
    history: OfferHistory,
    target: f64,
}

impl TitForTat {
    pub fn new(acceptance: AcceptancePolicy) -> Self {
        Self {
            acceptance,
            party: None,
            history: OfferHistory::default(),
            target: 1.0,
        }
    }
}

impl Default for TitForTat {
    fn default() -> Self {
        Self::new(AcceptancePolicy::default())
    }
}

impl Negotiator for TitForTat {
    fn on_session_start(&mut self, party: &Party, _ctx: &SessionContext) -> Result<()> {
        self.acceptance.validate()?;
        self.party = Some(party.clone());
        self.history.clear();
        self.target = 1.0;
        Ok(())
    }

    fn act(&mut self, t_r: f64, standing: Option<&Outcome>, _own_last: Option<&Outcome>) -> Action {
        let Some(party) = &self.party else {
            return Action::EndNegotiation;
        };
        let observed = self.history.observe(party, standing);
        self.target = tit_for_tat_target(self.target, &self.history.opponent, party.reservation());
        if let Some(u_in) = observed {
            if accept_decision(&self.acceptance, t_r, u_in, self.target, self.history.earlier_opponent()) {
                return Action::Accept;
            }
        }
        match party.nearest_index(self.target, Floor::AtLeast(party.reservation())) {
            Ok(idx) => {
                self.history.own.push(party.utility_at(idx));
                Action::Offer(party.outcome(idx))
            }
            Err(_) => Action::EndNegotiation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocation_rule() {
        assert_eq!(tit_for_tat_target(1.0, &[], 0.0), 1.0);
        assert!((tit_for_tat_target(0.9, &[0.2, 0.3], 0.0) - 0.8).abs() < 1e-12);
        assert_eq!(tit_for_tat_target(0.9, &[0.3, 0.2], 0.0), 0.9);
        assert_eq!(tit_for_tat_target(0.3, &[0.0, 0.5], 0.1), 0.1);
    }
}
