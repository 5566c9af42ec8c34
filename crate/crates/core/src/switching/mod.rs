//! The RL-agent: trained strategies, an opponent classifier and per-round
//! strategy switching or weighted combination.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierModel, WindowBuilder, DEFAULT_WINDOW};
use crate::domain::{Floor, Outcome, Party};
use crate::error::{Error, Result};
use crate::negotiators::{accept_decision, OfferHistory};
use crate::protocol::{Action, FnFactory, Negotiator, SessionContext, SharedFactory};
use crate::rl::proposed_utility;
use crate::sac::StrategyBundle;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchMode {
    /// One-hot weights at the classifier argmax.
    Pure,
    /// Fixed weights `β_k` over all strategies.
    Combine { weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchConfig {
    pub mode: SwitchMode,
    /// Turns between classifier refreshes.
    pub decision_period: usize,
    pub initial_strategy_index: usize,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            mode: SwitchMode::Pure,
            decision_period: 1,
            initial_strategy_index: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub turn: usize,
    pub probabilities: Vec<f64>,
    pub active: usize,
    pub proposed_utility: f64,
    pub action: &'static str,
    pub fallback: bool,
}

/// Index of the largest entry, ties to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Shared, read-only parts of an RL-agent.
pub struct RlAgentSpec {
    pub bundles: Vec<Arc<StrategyBundle>>,
    pub classifier: Option<Arc<ClassifierModel>>,
    pub config: SwitchConfig,
}

impl RlAgentSpec {
    pub fn new(
        bundles: Vec<Arc<StrategyBundle>>,
        classifier: Option<Arc<ClassifierModel>>,
        config: SwitchConfig,
    ) -> Result<Self> {
        let n = bundles.len();
        if n == 0 {
            return Err(Error::Config("an RL-agent needs at least one strategy".into()));
        }
        if let Some(c) = &classifier {
            if c.class_ids.len() != n {
                return Err(Error::Config(format!(
                    "classifier has {} classes but {} strategies were given",
                    c.class_ids.len(),
                    n
                )));
            }
        }
        if config.decision_period == 0 {
            return Err(Error::Config("decision_period must be at least 1".into()));
        }
        if config.initial_strategy_index >= n {
            return Err(Error::Config("initial_strategy_index out of range".into()));
        }
        if let SwitchMode::Combine { weights } = &config.mode {
            if weights.len() != n || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
                return Err(Error::Config("combination weights must be n non-negative values".into()));
            }
            if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Config("combination weights must sum to 1".into()));
            }
        }
        Ok(Self {
            bundles,
            classifier,
            config,
        })
    }

    pub fn window_len(&self) -> usize {
        self.classifier.as_ref().map_or(DEFAULT_WINDOW, |c| c.k)
    }
}

pub struct RlAgent {
    spec: Arc<RlAgentSpec>,
    party: Option<Party>,
    history: OfferHistory,
    window: WindowBuilder,
    probabilities: Vec<f64>,
    active: usize,
    turn: usize,
    log: Vec<DecisionRecord>,
}

impl RlAgent {
    pub fn new(spec: Arc<RlAgentSpec>) -> Self {
        let k = spec.window_len();
        let n = spec.bundles.len();
        let active = spec.config.initial_strategy_index;
        Self {
            spec,
            party: None,
            history: OfferHistory::default(),
            window: WindowBuilder::new(k),
            probabilities: vec![1.0 / n as f64; n],
            active,
            turn: 0,
            log: Vec::new(),
        }
    }

    pub fn decision_log(&self) -> &[DecisionRecord] {
        &self.log
    }

    pub fn active(&self) -> usize {
        self.active
    }

    /// Refreshes the classifier output and active index. Returns whether the
    /// fallback strategy was used.
    fn refresh(&mut self) -> bool {
        let n = self.spec.bundles.len();
        if n == 1 {
            self.active = 0;
            self.probabilities = vec![1.0];
            return false;
        }
        match self.spec.classifier.as_ref().map(|c| c.classify(&self.window.window())) {
            Some(Ok(p)) => {
                self.active = argmax(&p);
                self.probabilities = p;
                false
            }
            _ => {
                self.active = self.spec.config.initial_strategy_index;
                true
            }
        }
    }

    fn target(&self, t_r: f64, reservation: f64) -> (f64, f64) {
        let propose = |k: usize| proposed_utility(self.spec.bundles[k].as_ref(), t_r, &self.history, reservation);
        let own = propose(self.active);
        let combined = match &self.spec.config.mode {
            SwitchMode::Pure => own,
            SwitchMode::Combine { weights } => weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| w * if k == self.active { own } else { propose(k) })
                .sum(),
        };
        (own, combined)
    }
}

impl Negotiator for RlAgent {
    fn on_session_start(&mut self, party: &Party, _ctx: &SessionContext) -> Result<()> {
        for b in &self.spec.bundles {
            b.acceptance.validate()?;
        }
        self.party = Some(party.clone());
        self.history.clear();
        self.window.clear();
        self.turn = 0;
        self.active = self.spec.config.initial_strategy_index;
        self.log.clear();
        Ok(())
    }

    fn act(&mut self, t_r: f64, standing: Option<&Outcome>, _own_last: Option<&Outcome>) -> Action {
        let Some(party) = self.party.clone() else {
            return Action::EndNegotiation;
        };
        let observed = self.history.observe(&party, standing);
        if let Some(u) = observed {
            self.window.push(u);
        }
        let fallback = if self.turn.is_multiple_of(self.spec.config.decision_period) {
            self.refresh()
        } else {
            false
        };
        let (own, target) = self.target(t_r, party.reservation());
        let mut record = DecisionRecord {
            turn: self.turn,
            probabilities: self.probabilities.clone(),
            active: self.active,
            proposed_utility: target,
            action: "offer",
            fallback,
        };
        self.turn += 1;
        if let Some(u_in) = observed {
            let acceptance = &self.spec.bundles[self.active].acceptance;
            if accept_decision(acceptance, t_r, u_in, own, self.history.earlier_opponent()) {
                record.action = "accept";
                self.log.push(record);
                return Action::Accept;
            }
        }
        let action = match party.nearest_index(target, Floor::Above(party.reservation())) {
            Ok(idx) => {
                self.history.own.push(party.utility_at(idx));
                Action::Offer(party.outcome(idx))
            }
            Err(_) => {
                record.action = "end";
                Action::EndNegotiation
            }
        };
        self.log.push(record);
        action
    }
}

/// Protocol-conformant factory producing a fresh RL-agent per session.
pub fn make_rl_agent(
    id: impl Into<String>,
    bundles: Vec<Arc<StrategyBundle>>,
    classifier: Option<Arc<ClassifierModel>>,
    config: SwitchConfig,
) -> Result<SharedFactory> {
    let spec = Arc::new(RlAgentSpec::new(bundles, classifier, config)?);
    Ok(Arc::new(FnFactory::new(id, move || {
        Ok(Box::new(RlAgent::new(spec.clone())) as Box<dyn Negotiator>)
    })))
}

pub fn write_decision_log_csv<W: Write>(writer: W, log: &[DecisionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["round", "probabilities", "active", "proposed_utility", "action", "fallback"])?;
    for r in log {
        let probs = r
            .probabilities
            .iter()
            .map(|p| format!("{p}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.turn.to_string(),
            probs,
            r.active.to_string(),
            r.proposed_utility.to_string(),
            r.action.to_string(),
            r.fallback.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
