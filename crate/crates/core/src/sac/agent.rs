use negswitch_neural::{mse, Activation, Adam, Gradients, LayerSpec, Network, Tensor};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::config::SacConfig;
use crate::error::{Error, Result};
use crate::rl::{RlState, Transition, STATE_DIM};
use crate::seed;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
const CRITIC_INPUT: usize = STATE_DIM + 1;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 − tanh²(x))`, stable for large `|x|`.
pub fn log_one_minus_tanh_sq(x: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - x - softplus(-2.0 * x))
}

/// Log-density of `a = tanh(μ + σz)` given the pre-squash noise `z`.
pub fn squashed_log_prob(z: f64, log_std: f64, x: f64) -> f64 {
    -0.5 * z * z - HALF_LN_TWO_PI - log_std - log_one_minus_tanh_sq(x)
}

pub(crate) fn mlp(input: usize, hidden: &[usize], output: usize, seed: u64) -> Result<Network> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut width = input;
    for &h in hidden {
        specs.push(LayerSpec::Dense {
            inputs: width,
            outputs: h,
            activation: Activation::Relu,
        });
        width = h;
    }
    specs.push(LayerSpec::Dense {
        inputs: width,
        outputs: output,
        activation: Activation::Linear,
    });
    Ok(Network::new(vec![input], specs, seed)?)
}

/// Splits actor output rows into `(μ, log σ)`; `log σ` is clamped.
fn heads(out: &Tensor, i: usize) -> (f64, f64, bool) {
    let row = out.sample(i);
    let raw = row[1];
    let clamped = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
    (row[0], clamped, clamped == raw)
}

fn critic_input(states: &[RlState], actions: &[f64]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(states.len() * CRITIC_INPUT);
    for (s, a) in states.iter().zip(actions) {
        data.extend_from_slice(s);
        data.push(*a);
    }
    Ok(Tensor::new(vec![states.len(), CRITIC_INPUT], data)?)
}

fn state_tensor(states: &[RlState]) -> Result<Tensor> {
    Ok(Tensor::new(
        vec![states.len(), STATE_DIM],
        states.iter().flat_map(|s| s.iter().copied()).collect(),
    )?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha_loss: f64,
    pub alpha: f64,
    pub mean_log_prob: f64,
}

impl UpdateStats {
    pub fn is_finite(&self) -> bool {
        self.critic_loss.is_finite() && self.actor_loss.is_finite() && self.alpha_loss.is_finite()
    }
}

/// Actor, twin critics with soft-updated targets, and a trainable temperature.
pub struct SacAgent {
    pub config: SacConfig,
    pub actor: Network,
    pub critics: [Network; 2],
    pub targets: [Network; 2],
    pub log_alpha: f64,
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    alpha_opt: Adam,
    rng: ChaCha8Rng,
    updates: usize,
}

impl SacAgent {
    pub fn new(config: SacConfig, seed_value: u64) -> Result<Self> {
        config.validate()?;
        let actor = mlp(STATE_DIM, &config.actor_layers, 2, seed::derive(seed_value, &[1]))?;
        let c1 = mlp(CRITIC_INPUT, &config.critic_layers, 1, seed::derive(seed_value, &[2]))?;
        let c2 = mlp(CRITIC_INPUT, &config.critic_layers, 1, seed::derive(seed_value, &[3]))?;
        let actor_opt = Adam::for_params(&actor.params(), config.lr_actor);
        let critic_opts = [
            Adam::for_params(&c1.params(), config.lr_critic),
            Adam::for_params(&c2.params(), config.lr_critic),
        ];
        Ok(Self {
            log_alpha: config.initial_log_alpha,
            alpha_opt: Adam::new(&[1], config.lr_alpha),
            actor,
            targets: [c1.clone(), c2.clone()],
            critics: [c1, c2],
            actor_opt,
            critic_opts,
            rng: seed::rng(seed::derive(seed_value, &[4])),
            updates: 0,
            config,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Raw action in `(−1, 1)` and its log-probability. The deterministic
    /// mode returns `tanh(μ)` with the density evaluated at `z = 0`.
    pub fn sample_action(&mut self, state: &RlState, stochastic: bool) -> Result<(f64, f64)> {
        let out = self.actor.predict(state_tensor(std::slice::from_ref(state))?)?;
        let (mu, log_std, _) = heads(&out, 0);
        let z = if stochastic { self.normal() } else { 0.0 };
        let x = mu + log_std.exp() * z;
        Ok((x.tanh(), squashed_log_prob(z, log_std, x)))
    }

    /// Samples `(a, log π(a|s))` for a batch of states with the current actor.
    fn sample_batch(&mut self, states: &[RlState]) -> Result<(Vec<f64>, Vec<f64>)> {
        let out = self.actor.predict(state_tensor(states)?)?;
        let mut actions = Vec::with_capacity(states.len());
        let mut logp = Vec::with_capacity(states.len());
        for i in 0..states.len() {
            let (mu, log_std, _) = heads(&out, i);
            let z = self.normal();
            let x = mu + log_std.exp() * z;
            actions.push(x.tanh());
            logp.push(squashed_log_prob(z, log_std, x));
        }
        Ok((actions, logp))
    }

    /// Bellman targets `r + γ(1 − d)(min Q̄(s′, a′) − α log π(a′|s′))`.
    pub fn critic_targets(&mut self, batch: &[&Transition]) -> Result<Vec<f64>> {
        let next: Vec<RlState> = batch.iter().map(|t| t.next_state).collect();
        let (a_next, logp_next) = self.sample_batch(&next)?;
        let input = critic_input(&next, &a_next)?;
        let q1 = self.targets[0].predict(input.clone())?;
        let q2 = self.targets[1].predict(input)?;
        let alpha = self.alpha();
        Ok(batch
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let soft = q1.data()[i].min(q2.data()[i]) - alpha * logp_next[i];
                let mask = if t.terminal { 0.0 } else { 1.0 };
                self.config.reward_scale * t.reward + self.config.gamma * mask * soft
            })
            .collect())
    }

    /// Regresses both critics onto the shared targets; returns the weighted loss.
    pub fn critic_update(&mut self, batch: &[&Transition]) -> Result<f64> {
        let y = self.critic_targets(batch)?;
        let states: Vec<RlState> = batch.iter().map(|t| t.state).collect();
        let actions: Vec<f64> = batch.iter().map(|t| t.action).collect();
        let input = critic_input(&states, &actions)?;
        let target = Tensor::new(vec![batch.len(), 1], y)?;
        let w = self.config.critic_loss_weight;
        let mut total = 0.0;
        for k in 0..2 {
            let trace = self.critics[k].forward_trace(input.clone())?;
            let (loss, mut grad) = mse(trace.output(), &target)?;
            grad.data_mut().iter_mut().for_each(|g| *g *= w);
            let (grads, _) = self.critics[k].backward_trace(&trace, &grad)?;
            if !grads.is_finite() {
                return Err(Error::Divergence("non-finite critic gradient".into()));
            }
            self.critic_opts[k].step(self.critics[k].params_mut(), &grads.slices())?;
            total += w * loss;
        }
        Ok(total)
    }

    /// Weighted actor loss `mean(α log π(a|s) − min Q(s, a))` for fixed
    /// reparameterisation noise, its parameter gradients and the log-probs.
    pub fn actor_objective(&self, states: &[RlState], noise: &[f64]) -> Result<(f64, Gradients, Vec<f64>)> {
        if states.len() != noise.len() || states.is_empty() {
            return Err(Error::InvalidArgument("actor objective needs one noise draw per state".into()));
        }
        let n = states.len() as f64;
        let trace = self.actor.forward_trace(state_tensor(states)?)?;
        let out = trace.output();
        let mut actions = Vec::with_capacity(states.len());
        let mut logp = Vec::with_capacity(states.len());
        for (i, &z) in noise.iter().enumerate() {
            let (mu, log_std, _) = heads(out, i);
            let x = mu + log_std.exp() * z;
            actions.push(x.tanh());
            logp.push(squashed_log_prob(z, log_std, x));
        }
        let (q_min, dq_da) = self.min_q_and_action_grad(states, &actions)?;
        let alpha = self.alpha();
        let wa = self.config.actor_loss_weight;
        let mut loss = 0.0;
        let mut grad = vec![0.0; states.len() * 2];
        for i in 0..states.len() {
            let (_, log_std, free) = heads(out, i);
            let sigma = log_std.exp();
            let a = actions[i];
            let z = noise[i];
            let da_dx = 1.0 - a * a;
            loss += alpha * logp[i] - q_min[i];
            grad[2 * i] = wa * (2.0 * alpha * a - dq_da[i] * da_dx) / n;
            if free {
                grad[2 * i + 1] = wa * (alpha * (-1.0 + 2.0 * a * sigma * z) - dq_da[i] * da_dx * sigma * z) / n;
            }
        }
        let (grads, _) = self
            .actor
            .backward_trace(&trace, &Tensor::new(vec![states.len(), 2], grad)?)?;
        Ok((wa * loss / n, grads, logp))
    }

    /// Reparameterised actor step followed by the temperature step.
    pub fn actor_alpha_update(&mut self, batch: &[&Transition]) -> Result<(f64, f64, f64)> {
        let n = batch.len() as f64;
        let states: Vec<RlState> = batch.iter().map(|t| t.state).collect();
        let noise: Vec<f64> = (0..batch.len()).map(|_| self.normal()).collect();
        let (actor_loss, grads, logp) = self.actor_objective(&states, &noise)?;
        if !grads.is_finite() {
            return Err(Error::Divergence("non-finite actor gradient".into()));
        }
        self.actor_opt.step(self.actor.params_mut(), &grads.slices())?;

        let mean_term = logp.iter().map(|l| l + self.config.target_entropy).sum::<f64>() / n;
        let alpha_loss = -self.log_alpha * mean_term;
        let g_alpha = [-mean_term * self.config.alpha_loss_weight];
        let mut la = [self.log_alpha];
        self.alpha_opt.step(vec![&mut la[..]], &[&g_alpha[..]])?;
        self.log_alpha = la[0];
        Ok((actor_loss, self.config.alpha_loss_weight * alpha_loss, logp.iter().sum::<f64>() / n))
    }

    /// `min(Q1, Q2)(s, a)` and its derivative with respect to `a`, taken
    /// through whichever critic is smaller per sample.
    pub fn min_q_and_action_grad(&self, states: &[RlState], actions: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let input = critic_input(states, actions)?;
        let t1 = self.critics[0].forward_trace(input.clone())?;
        let t2 = self.critics[1].forward_trace(input)?;
        let b = states.len();
        let pick_first: Vec<bool> = (0..b).map(|i| t1.output().data()[i] <= t2.output().data()[i]).collect();
        let q: Vec<f64> = (0..b)
            .map(|i| t1.output().data()[i].min(t2.output().data()[i]))
            .collect();
        let mask = |first: bool| -> Result<Tensor> {
            Ok(Tensor::new(
                vec![b, 1],
                pick_first.iter().map(|&p| if p == first { 1.0 } else { 0.0 }).collect(),
            )?)
        };
        let (_, g1) = self.critics[0].backward_trace(&t1, &mask(true)?)?;
        let (_, g2) = self.critics[1].backward_trace(&t2, &mask(false)?)?;
        let dq: Vec<f64> = (0..b)
            .map(|i| g1.sample(i)[STATE_DIM] + g2.sample(i)[STATE_DIM])
            .collect();
        Ok((q, dq))
    }

    /// `target ← τ·critic + (1 − τ)·target`.
    pub fn soft_update(&mut self) -> Result<()> {
        let tau = self.config.tau;
        for k in 0..2 {
            self.targets[k].blend_from(&self.critics[k], tau)?;
        }
        Ok(())
    }

    /// One full gradient update on a sampled batch.
    pub fn train_step(&mut self, batch: &[&Transition]) -> Result<UpdateStats> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty training batch".into()));
        }
        let critic_loss = self.critic_update(batch)?;
        let (actor_loss, alpha_loss, mean_log_prob) = self.actor_alpha_update(batch)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_update_period) {
            self.soft_update()?;
        }
        let stats = UpdateStats {
            critic_loss,
            actor_loss,
            alpha_loss,
            alpha: self.alpha(),
            mean_log_prob,
        };
        if !stats.is_finite() || !self.log_alpha.is_finite() {
            return Err(Error::Divergence(format!("non-finite losses after {} updates: {stats:?}", self.updates)));
        }
        Ok(stats)
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
