use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{Floor, Outcome, Party};
use crate::error::{Error, Result};
use crate::protocol::{Action, Negotiator, SessionContext};
use crate::seed;

/// Uniform draw from offers at or above the reservation value.
pub fn random_action(rng: &mut ChaCha8Rng, party: &Party, admitted: &[usize]) -> Action {
    if admitted.is_empty() {
        return Action::EndNegotiation;
    }
    Action::Offer(party.outcome(admitted[rng.random_range(0..admitted.len())]))
}

/// Offers uniformly at random among acceptable outcomes and never accepts.
#[derive(Default)]
pub struct RandomNegotiator {
    state: Option<(Party, Vec<usize>, ChaCha8Rng)>,
}

impl RandomNegotiator {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Negotiator for RandomNegotiator {
    fn on_session_start(&mut self, party: &Party, ctx: &SessionContext) -> Result<()> {
        let admitted = party.admitted(Floor::AtLeast(party.reservation()));
        if admitted.is_empty() {
            return Err(Error::Degenerate("no outcome at or above the reservation value".into()));
        }
        self.state = Some((party.clone(), admitted, seed::rng(ctx.seed)));
        Ok(())
    }

    fn act(&mut self, _t_r: f64, _standing: Option<&Outcome>, _own_last: Option<&Outcome>) -> Action {
        match &mut self.state {
            Some((party, admitted, rng)) => random_action(rng, party, admitted),
            None => Action::EndNegotiation,
        }
    }
}
