use serde::{Deserialize, Serialize};

use super::acceptance::{accept_decision, AcceptancePolicy};
use super::history::OfferHistory;
use crate::domain::{Floor, Outcome, Party};
use crate::error::{Error, Result};
use crate::protocol::{Action, Negotiator, SessionContext};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentParams {
    pub e: f64,
    pub k0: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl TimeDependentParams {
    pub const BOULWARE: TimeDependentParams = TimeDependentParams {
        e: 0.2,
        k0: 0.0,
        u_min: 0.0,
        u_max: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(0.0..1.0).contains(&self.k0) || !(self.u_min < self.u_max && self.u_max <= 1.0) {
            return Err(Error::Config(format!("invalid time-dependent parameters {self:?}")));
        }
        Ok(())
    }
}

impl Default for TimeDependentParams {
    fn default() -> Self {
        Self::BOULWARE
    }
}

/// `u_min + (u_max − u_min)(1 − F(t_r))` with `F(t) = k0 + (1 − k0) t^(1/e)`.
pub fn boulware_target(t_r: f64, params: &TimeDependentParams) -> f64 {
    let t = t_r.clamp(0.0, 1.0);
    let f = params.k0 + (1.0 - params.k0) * t.powf(1.0 / params.e);
    params.u_min + (params.u_max - params.u_min) * (1.0 - f)
}

/// Time-dependent concession; bids the outcome nearest the current target.
pub struct TimeDependent {
    params: TimeDependentParams,
    acceptance: AcceptancePolicy,
    party: Option<Party>,
    history: OfferHistory,
}

impl TimeDependent {
    pub fn new(params: TimeDependentParams, acceptance: AcceptancePolicy) -> Self {
        Self {
            params,
            acceptance,
            party: None,
            history: OfferHistory::default(),
        }
    }

    pub fn boulware() -> Self {
        Self::new(TimeDependentParams::BOULWARE, AcceptancePolicy::default())
    }
}

impl Negotiator for TimeDependent {
    fn on_session_start(&mut self, party: &Party, _ctx: &SessionContext) -> Result<()> {
        self.params.validate()?;
        self.acceptance.validate()?;
        self.party = Some(party.clone());
        self.history.clear();
        Ok(())
    }

    fn act(&mut self, t_r: f64, standing: Option<&Outcome>, _own_last: Option<&Outcome>) -> Action {
        let Some(party) = &self.party else {
            return Action::EndNegotiation;
        };
        let target = boulware_target(t_r, &self.params).max(party.reservation());
        if let Some(u_in) = self.history.observe(party, standing) {
            if accept_decision(&self.acceptance, t_r, u_in, target, self.history.earlier_opponent()) {
                return Action::Accept;
            }
        }
        match party.nearest_index(target, Floor::AtLeast(party.reservation())) {
            Ok(idx) => {
                self.history.own.push(party.utility_at(idx));
                Action::Offer(party.outcome(idx))
            }
            Err(_) => Action::EndNegotiation,
        }
    }
}
