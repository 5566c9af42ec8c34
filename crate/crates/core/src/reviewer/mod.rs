//! Admission of new negotiators and strategies into the pool by threshold
//! comparison of evaluation scores.

mod pool;
mod trainer;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use trainer::{Resolver, SacPoolTrainer};
pub use pool::{ManifestEntry, PoolEntry, PoolManifest, StrategyPool, POOL_FORMAT, POOL_MANIFEST};

use crate::benchmark::{mean, std_dev};
use crate::classifier::ClassifierModel;
use crate::domain::{Scenario, Side};
use crate::error::{Error, Result};
use crate::protocol::{run_many, NegotiatorFactory, SessionSpec, DEFAULT_DEADLINE};
use crate::sac::{bundle_factory, StrategyBundle};
use crate::switching::SwitchConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewerConfig {
    pub alpha_threshold: f64,
    pub beta_threshold: f64,
    pub eval_sessions: usize,
    pub eval_scenario: String,
    pub deadline_rounds: usize,
    pub seed: u64,
}

impl Default for ReviewerConfig {
    fn default() -> Self {
        Self {
            alpha_threshold: 1.1,
            beta_threshold: 1.1,
            eval_sessions: 50,
            eval_scenario: "eval".into(),
            deadline_rounds: DEFAULT_DEADLINE,
            seed: 0,
        }
    }
}

impl ReviewerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_threshold > 0.0 && self.beta_threshold > 0.0) {
            return Err(Error::Config("reviewer thresholds must be positive".into()));
        }
        if self.eval_sessions == 0 {
            return Err(Error::Config("eval_sessions must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalScore {
    pub mean: f64,
    pub sessions: usize,
    pub std: f64,
}

/// Mean utility of `strategy` (profile A, first mover alternating) against
/// `opponent` over seeded sessions in the evaluation scenario. Failed
/// sessions score the reservation value.
pub fn eval(
    opponent: &dyn NegotiatorFactory,
    strategy: &dyn NegotiatorFactory,
    scenario: &Scenario,
    config: &ReviewerConfig,
) -> Result<EvalScore> {
    config.validate()?;
    let results = run_many(
        strategy,
        opponent,
        &SessionSpec {
            scenario,
            deadline_rounds: config.deadline_rounds,
            master_seed: config.seed,
            count: config.eval_sessions,
            alternate_first: true,
        },
    );
    let reservation = scenario.party(Side::A).reservation();
    let values: Vec<f64> = results
        .iter()
        .map(|r| r.as_ref().map_or(reservation, |(o, _)| o.utility_a))
        .collect();
    Ok(EvalScore {
        mean: mean(&values),
        sessions: values.len(),
        std: std_dev(&values),
    })
}

/// Supplies trained components to the reviewer.
pub trait PoolTrainer {
    /// Resolves a negotiator id to a factory.
    fn negotiator(&self, id: &str) -> Result<Arc<dyn NegotiatorFactory>>;
    fn train_strategy(&self, opponent_id: &str) -> Result<StrategyBundle>;
    fn train_classifier(&self, class_ids: &[String]) -> Result<ClassifierModel>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    NoOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossEval {
    pub index: usize,
    pub negotiator_id: String,
    /// Candidate strategy against this negotiator.
    pub candidate: EvalScore,
    /// Incumbent strategy against this negotiator.
    pub incumbent: EvalScore,
    pub replaced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewReport {
    pub candidate: String,
    pub verdict: Verdict,
    pub e_f: Option<EvalScore>,
    pub e_s: Option<EvalScore>,
    pub alpha_threshold: f64,
    pub beta_threshold: f64,
    pub cross_eval: Vec<CrossEval>,
    pub diagnostic: Option<String>,
    pub pool_after: PoolManifest,
}

impl ReviewReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub struct ReviewDecision {
    pub report: ReviewReport,
    pub pool: StrategyPool,
}

const RL_AGENT_ID: &str = "rl_agent";

/// Replaces `s_k` with `candidate` wherever it beats the incumbent by `β`.
fn cross_evaluate(
    pool: &mut StrategyPool,
    candidate: &Arc<StrategyBundle>,
    skip: Option<usize>,
    trainer: &dyn PoolTrainer,
    scenario: &Scenario,
    config: &ReviewerConfig,
) -> Result<Vec<CrossEval>> {
    let cand = bundle_factory("candidate", candidate.clone());
    let mut rows = Vec::new();
    for k in 0..pool.entries.len() {
        if Some(k) == skip {
            continue;
        }
        let id = pool.entries[k].negotiator_id.clone();
        let opponent = trainer.negotiator(&id)?;
        let incumbent = bundle_factory("incumbent", pool.entries[k].bundle.clone());
        let e_hat = eval(opponent.as_ref(), cand.as_ref(), scenario, config)?;
        let e_k = eval(opponent.as_ref(), incumbent.as_ref(), scenario, config)?;
        let replaced = e_hat.mean >= config.beta_threshold * e_k.mean;
        if replaced {
            pool.entries[k].bundle = candidate.clone();
        }
        rows.push(CrossEval {
            index: k,
            negotiator_id: id,
            candidate: e_hat,
            incumbent: e_k,
            replaced,
        });
    }
    Ok(rows)
}

/// Trains a strategy against the candidate and admits the pair when it
/// beats the current RL-agent by the factor `α`. An admitted strategy may
/// also replace incumbents it outperforms by `β`.
pub fn review_new_negotiator(
    candidate_id: &str,
    pool: &StrategyPool,
    trainer: &dyn PoolTrainer,
    scenario: &Scenario,
    config: &ReviewerConfig,
    switch: &SwitchConfig,
) -> Result<ReviewDecision> {
    config.validate()?;
    pool.validate()?;
    let reject = |diagnostic: String, e_f, e_s| ReviewDecision {
        report: ReviewReport {
            candidate: candidate_id.to_string(),
            verdict: Verdict::Reject,
            e_f,
            e_s,
            alpha_threshold: config.alpha_threshold,
            beta_threshold: config.beta_threshold,
            cross_eval: Vec::new(),
            diagnostic: Some(diagnostic),
            pool_after: pool.manifest(),
        },
        pool: pool.clone(),
    };
    if pool.position(candidate_id).is_some() {
        return Ok(reject(format!("{candidate_id} is already in the pool"), None, None));
    }
    let candidate = trainer.negotiator(candidate_id)?;
    let trained = match trainer.train_strategy(candidate_id) {
        Ok(b) => Arc::new(b),
        Err(e) => return Ok(reject(format!("training failed: {e}"), None, None)),
    };
    let e_s = eval(candidate.as_ref(), bundle_factory("s_train", trained.clone()).as_ref(), scenario, config)?;
    let e_f = if pool.is_empty() {
        // Nothing to beat: treat the incumbent score as the reservation value.
        EvalScore {
            mean: scenario.party(Side::A).reservation(),
            sessions: 0,
            std: 0.0,
        }
    } else {
        let agent = pool.rl_agent(RL_AGENT_ID, switch.clone())?;
        eval(candidate.as_ref(), agent.as_ref(), scenario, config)?
    };
    if e_s.mean < config.alpha_threshold * e_f.mean {
        return Ok(reject(
            format!("e_s {:.4} < α·e_f {:.4}", e_s.mean, config.alpha_threshold * e_f.mean),
            Some(e_f),
            Some(e_s),
        ));
    }
    let mut next = pool.clone();
    next.entries.push(PoolEntry {
        negotiator_id: candidate_id.to_string(),
        bundle: trained.clone(),
    });
    next.classifier = if next.entries.len() > 1 {
        match trainer.train_classifier(&next.ids()) {
            Ok(c) => Some(Arc::new(c)),
            Err(e) => return Ok(reject(format!("classifier retraining failed: {e}"), Some(e_f), Some(e_s))),
        }
    } else {
        None
    };
    let new_index = next.entries.len() - 1;
    let cross_eval = cross_evaluate(&mut next, &trained, Some(new_index), trainer, scenario, config)?;
    next.validate()?;
    Ok(ReviewDecision {
        report: ReviewReport {
            candidate: candidate_id.to_string(),
            verdict: Verdict::Accept,
            e_f: Some(e_f),
            e_s: Some(e_s),
            alpha_threshold: config.alpha_threshold,
            beta_threshold: config.beta_threshold,
            cross_eval,
            diagnostic: None,
            pool_after: next.manifest(),
        },
        pool: next,
    })
}

/// Offers an externally supplied strategy to every pool slot.
pub fn review_new_strategy(
    candidate_label: &str,
    candidate: Arc<StrategyBundle>,
    pool: &StrategyPool,
    trainer: &dyn PoolTrainer,
    scenario: &Scenario,
    config: &ReviewerConfig,
) -> Result<ReviewDecision> {
    config.validate()?;
    let mut next = pool.clone();
    let cross_eval = cross_evaluate(&mut next, &candidate, None, trainer, scenario, config)?;
    let verdict = if pool.is_empty() {
        Verdict::NoOp
    } else if cross_eval.iter().any(|c| c.replaced) {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok(ReviewDecision {
        report: ReviewReport {
            candidate: candidate_label.to_string(),
            verdict,
            e_f: None,
            e_s: None,
            alpha_threshold: config.alpha_threshold,
            beta_threshold: config.beta_threshold,
            cross_eval,
            diagnostic: None,
            pool_after: next.manifest(),
        },
        pool: next,
    })
}
