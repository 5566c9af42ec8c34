use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::agent::{SacAgent, UpdateStats};
use super::bundle::{bundle_factory, StrategyBundle};
use super::config::SacConfig;
use super::replay::ReplayBuffer;
use crate::domain::{OutcomeSpace, PreferenceProfile};
use crate::error::Result;
use crate::negotiators::AcceptancePolicy;
use crate::protocol::SharedFactory;
use crate::rl::{summarize, versus_random_profiles, EvalSummary, NegotiationEnv};
use crate::seed;

const STREAM_AGENT: u64 = 1;
const STREAM_ENV: u64 = 2;
const STREAM_EVAL: u64 = 3;
const STREAM_EXPLORE: u64 = 4;

pub struct TrainingRequest {
    pub opponent: SharedFactory,
    pub space: Arc<OutcomeSpace>,
    pub own_profile: PreferenceProfile,
    pub scenario_id: String,
    pub config: SacConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub iteration: usize,
    pub mean_reward: f64,
    pub mean_utility: f64,
    pub agreement_rate: f64,
    pub alpha: f64,
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha_loss: f64,
}

pub struct TrainingOutput {
    pub bundle: StrategyBundle,
    pub curve: Vec<CurveRow>,
}

impl TrainingRequest {
    fn bundle(&self, agent: &SacAgent) -> StrategyBundle {
        StrategyBundle {
            actor: agent.actor.clone(),
            acceptance: AcceptancePolicy::default(),
            trained_vs: self.opponent.id().to_string(),
            scenario_id: self.scenario_id.clone(),
            config_hash: self.config.hash(),
            seed: self.seed,
        }
    }

    fn evaluate(&self, agent: &SacAgent) -> Result<EvalSummary> {
        let bundle = Arc::new(self.bundle(agent));
        let outcomes = versus_random_profiles(
            bundle_factory("policy", bundle).as_ref(),
            self.opponent.as_ref(),
            &self.space,
            &self.own_profile,
            self.config.eval_sessions,
            self.config.deadline_rounds,
            seed::derive(self.seed, &[STREAM_EVAL]),
        )?;
        Ok(summarize(&outcomes))
    }
}

fn curve_row(iteration: usize, eval: EvalSummary, stats: &[UpdateStats], alpha: f64) -> CurveRow {
    let n = stats.len().max(1) as f64;
    let mean = |f: fn(&UpdateStats) -> f64| stats.iter().map(f).sum::<f64>() / n;
    CurveRow {
        iteration,
        mean_reward: eval.mean_reward,
        mean_utility: eval.mean_utility,
        agreement_rate: eval.agreement_rate,
        alpha,
        critic_loss: mean(|s| s.critic_loss),
        actor_loss: mean(|s| s.actor_loss),
        alpha_loss: mean(|s| s.alpha_loss),
    }
}

/// Soft actor-critic against one base opponent. Uniform random actions fill
/// the replay buffer first; each later iteration takes one environment step
/// and one gradient update.
pub fn train(request: &TrainingRequest) -> Result<TrainingOutput> {
    let cfg = &request.config;
    cfg.validate()?;
    let mut agent = SacAgent::new(cfg.clone(), seed::derive(request.seed, &[STREAM_AGENT]))?;
    let mut env = NegotiationEnv::new(
        request.space.clone(),
        request.own_profile.clone(),
        request.opponent.clone(),
        cfg.deadline_rounds,
        seed::derive(request.seed, &[STREAM_ENV]),
    )?;
    let mut explore = seed::rng(seed::derive(request.seed, &[STREAM_EXPLORE]));
    let mut buffer = ReplayBuffer::new(cfg.replay_capacity);
    let mut state = env.reset()?;
    for _ in 0..cfg.initial_collect_steps {
        let raw = explore.random_range(-1.0..1.0);
        let t = env.step(raw)?;
        state = if t.terminal { env.reset()? } else { t.next_state };
        buffer.push(t);
    }

    let mut curve = vec![curve_row(0, request.evaluate(&agent)?, &[], agent.alpha())];
    let mut window = Vec::with_capacity(cfg.eval_interval);
    for iteration in 1..=cfg.epochs {
        let (raw, _) = agent.sample_action(&state, true)?;
        let t = env.step(raw)?;
        state = if t.terminal { env.reset()? } else { t.next_state };
        buffer.push(t);
        let idx = buffer.sample_indices(agent.rng_mut(), cfg.batch_size);
        let batch: Vec<_> = idx.iter().map(|&i| buffer.get(i).expect("sampled index")).collect();
        window.push(agent.train_step(&batch)?);
        if iteration % cfg.eval_interval == 0 || iteration == cfg.epochs {
            curve.push(curve_row(iteration, request.evaluate(&agent)?, &window, agent.alpha()));
            window.clear();
        }
    }
    Ok(TrainingOutput {
        bundle: request.bundle(&agent),
        curve,
    })
}

pub fn write_curve_csv<W: Write>(writer: W, curve: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in curve {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
