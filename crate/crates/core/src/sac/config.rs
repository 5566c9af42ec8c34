use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::protocol::DEFAULT_DEADLINE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SacConfig {
    /// Training iterations; each is one environment step and one update.
    pub epochs: usize,
    pub initial_collect_steps: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub critic_layers: Vec<usize>,
    pub actor_layers: Vec<usize>,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_alpha: f64,
    pub tau: f64,
    pub target_update_period: usize,
    pub gamma: f64,
    pub reward_scale: f64,
    pub initial_log_alpha: f64,
    pub critic_loss_weight: f64,
    pub actor_loss_weight: f64,
    pub alpha_loss_weight: f64,
    pub target_entropy: f64,
    pub eval_interval: usize,
    pub eval_sessions: usize,
    pub deadline_rounds: usize,
}

impl SacConfig {
    /// Network sizes and rates of the reference setup.
    pub fn full() -> Self {
        Self {
            epochs: 20_000,
            initial_collect_steps: 500,
            replay_capacity: 1_000_000,
            batch_size: 128,
            critic_layers: vec![256, 512],
            actor_layers: vec![256, 512, 512],
            lr_actor: 3e-5,
            lr_critic: 3e-2,
            lr_alpha: 3e-3,
            tau: 0.005,
            target_update_period: 1,
            gamma: 0.99,
            reward_scale: 1.0,
            initial_log_alpha: 0.0,
            critic_loss_weight: 0.5,
            actor_loss_weight: 1.0,
            alpha_loss_weight: 1.0,
            target_entropy: -1.0,
            eval_interval: 500,
            eval_sessions: 20,
            deadline_rounds: DEFAULT_DEADLINE,
        }
    }

    /// Small networks and 2·10⁴ environment steps; trains in minutes on a CPU.
    pub fn desk() -> Self {
        Self {
            epochs: 19_500,
            critic_layers: vec![64, 64],
            actor_layers: vec![64, 64],
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            // Undiscounted returns equal the session utility; discounting
            // over ~100 rounds pushes the policy towards early, poorer deals.
            gamma: 1.0,
            ..Self::full()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            other => Err(Error::Config(format!("unknown preset {other:?} (expected desk or full)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.lr_actor > 0.0 && self.lr_critic > 0.0 && self.lr_alpha > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.batch_size == 0 || self.replay_capacity == 0 || self.target_update_period == 0 {
            return bad("batch size, replay capacity and target update period must be positive");
        }
        if self.eval_interval == 0 || self.eval_sessions == 0 || self.deadline_rounds == 0 {
            return bad("evaluation interval, evaluation sessions and deadline must be positive");
        }
        if self.actor_layers.contains(&0) || self.critic_layers.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    /// Short content hash identifying this configuration.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serialises");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }
}

impl Default for SacConfig {
    fn default() -> Self {
        Self::desk()
    }
}
