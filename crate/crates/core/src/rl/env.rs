use std::sync::Arc;

use serde::Serialize;

use super::state::{rl_state, squash_action, RlState};
use crate::domain::{random_profile, Floor, Outcome, OutcomeSpace, Party, PreferenceProfile};
use crate::error::{Error, Result};
use crate::negotiators::{accept_decision, AcceptancePolicy, OfferHistory};
use crate::protocol::{Action, Negotiator, NegotiatorFactory, SessionContext};
use crate::seed;

pub const NO_AGREEMENT_REWARD: f64 = -1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub state: RlState,
    /// Raw policy output in `[−1, 1]`, before the affine squash.
    pub action: f64,
    pub reward: f64,
    pub next_state: RlState,
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRow {
    pub round: usize,
    pub actor: &'static str,
    pub action: &'static str,
    pub outcome_id: Option<usize>,
    pub u_self_of_offer: Option<f64>,
    pub u_other_of_offer: Option<f64>,
    pub reward: f64,
}

/// A session against one base opponent viewed as an episodic environment.
/// The learning agent moves first and holds the fixed own profile; the
/// opponent's profile is redrawn at every reset.
pub struct NegotiationEnv {
    space: Arc<OutcomeSpace>,
    own: Party,
    opponent_factory: Arc<dyn NegotiatorFactory>,
    acceptance: AcceptancePolicy,
    deadline: usize,
    master_seed: u64,
    episodes: u64,
    episode: Option<Episode>,
}

struct Episode {
    opponent: Box<dyn Negotiator>,
    opponent_party: Party,
    round: usize,
    history: OfferHistory,
    standing: Option<Outcome>,
    done: bool,
    log: Vec<EpisodeRow>,
}

impl NegotiationEnv {
    pub fn new(
        space: Arc<OutcomeSpace>,
        own_profile: PreferenceProfile,
        opponent_factory: Arc<dyn NegotiatorFactory>,
        deadline: usize,
        seed: u64,
    ) -> Result<Self> {
        if deadline == 0 {
            return Err(Error::Config("deadline must be at least 1".into()));
        }
        Ok(Self {
            own: Party::new(space.clone(), own_profile)?,
            space,
            opponent_factory,
            acceptance: AcceptancePolicy::default(),
            deadline,
            master_seed: seed,
            episodes: 0,
            episode: None,
        })
    }

    pub fn own(&self) -> &Party {
        &self.own
    }

    pub fn deadline(&self) -> usize {
        self.deadline
    }

    pub fn opponent_party(&self) -> Option<&Party> {
        self.episode.as_ref().map(|e| &e.opponent_party)
    }

    /// Starts the next episode, drawing the opponent profile from the
    /// episode counter.
    pub fn reset(&mut self) -> Result<RlState> {
        let n = self.episodes;
        self.episodes += 1;
        self.reset_with_seed(seed::derive(self.master_seed, &[n]))
    }

    /// Starts an episode whose opponent profile and opponent seed come from `seed`.
    pub fn reset_with_seed(&mut self, seed_value: u64) -> Result<RlState> {
        let profile = random_profile(seed::derive(seed_value, &[1]), &self.space)?;
        let opponent_party = Party::new(self.space.clone(), profile)?;
        let mut opponent = self.opponent_factory.create()?;
        opponent.on_session_start(
            &opponent_party,
            &SessionContext {
                deadline_rounds: self.deadline,
                seed: seed::derive(seed_value, &[2]),
            },
        )?;
        self.episode = Some(Episode {
            opponent,
            opponent_party,
            round: 0,
            history: OfferHistory::default(),
            standing: None,
            done: false,
            log: Vec::new(),
        });
        Ok([0.0; 7])
    }

    pub fn episode_log(&self) -> &[EpisodeRow] {
        self.episode.as_ref().map_or(&[], |e| &e.log)
    }

    pub fn step(&mut self, raw_action: f64) -> Result<Transition> {
        let space = self.space.clone();
        let own = &self.own;
        let deadline = self.deadline;
        let acceptance = self.acceptance;
        let ep = self
            .episode
            .as_mut()
            .filter(|e| !e.done)
            .ok_or_else(|| Error::State("step called without an active episode".into()))?;
        let state = rl_state(ep.round as f64 / deadline as f64, &ep.history);
        let t_r = ep.round as f64 / deadline as f64;
        let u_next = squash_action(raw_action, own.reservation());
        let row = |ep: &Episode, actor: &'static str, action: &'static str, o: Option<&Outcome>, reward: f64| {
            let (id, us, uo) = match o {
                Some(o) => {
                    let (me, other) = if actor == "agent" {
                        (own, &ep.opponent_party)
                    } else {
                        (&ep.opponent_party, own)
                    };
                    (
                        space.index_of(o).ok(),
                        me.utility(o).ok(),
                        other.utility(o).ok(),
                    )
                }
                None => (None, None, None),
            };
            EpisodeRow {
                round: ep.round,
                actor,
                action,
                outcome_id: id,
                u_self_of_offer: us,
                u_other_of_offer: uo,
                reward,
            }
        };

        let finish = |ep: &mut Episode, reward: f64| {
            ep.done = true;
            (reward, true)
        };

        let (reward, terminal) = 'turn: {
            if let Some(standing) = &ep.standing {
                let u_in = own.utility(standing)?;
                if accept_decision(&acceptance, t_r, u_in, u_next, ep.history.earlier_opponent()) {
                    let r = row(ep, "agent", "accept", None, u_in);
                    ep.log.push(r);
                    break 'turn finish(ep, u_in);
                }
            }
            let idx = own.nearest_index(u_next, Floor::Above(own.reservation()))?;
            let bid = own.outcome(idx);
            let u_bid = own.utility_at(idx);
            ep.history.own.push(u_bid);
            let r = row(ep, "agent", "offer", Some(&bid), 0.0);
            ep.log.push(r);
            let reply = ep.opponent.act(t_r, Some(&bid), ep.standing.as_ref());
            match reply {
                Action::Accept => {
                    let r = row(ep, "opponent", "accept", None, u_bid);
                    ep.log.push(r);
                    finish(ep, u_bid)
                }
                Action::EndNegotiation => {
                    let r = row(ep, "opponent", "end", None, NO_AGREEMENT_REWARD);
                    ep.log.push(r);
                    finish(ep, NO_AGREEMENT_REWARD)
                }
                Action::Offer(o) => {
                    if space.validate(&o).is_err() {
                        break 'turn finish(ep, NO_AGREEMENT_REWARD);
                    }
                    ep.history.observe(own, Some(&o));
                    ep.round += 1;
                    let terminal = ep.round >= deadline;
                    let reward = if terminal { NO_AGREEMENT_REWARD } else { 0.0 };
                    let r = row(ep, "opponent", "offer", Some(&o), reward);
                    ep.log.push(r);
                    ep.standing = Some(o);
                    if terminal {
                        finish(ep, reward)
                    } else {
                        (reward, false)
                    }
                }
            }
        };
        let next_state = rl_state(ep.round.min(deadline) as f64 / deadline as f64, &ep.history);
        Ok(Transition {
            state,
            action: raw_action,
            reward,
            next_state,
            terminal,
        })
    }
}
