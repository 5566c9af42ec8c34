use std::path::Path;
use std::sync::Arc;

use negswitch_neural::{Network, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::negotiators::AcceptancePolicy;
use crate::protocol::{FnFactory, Negotiator, SharedFactory};
use crate::rl::{BiddingPolicy, PolicyNegotiator, RlState, STATE_DIM};

pub const BUNDLE_FORMAT: &str = "negswitch-strategy";
pub const BUNDLE_VERSION: u32 = 1;

/// A trained bidding policy, its acceptance condition and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyBundle {
    pub actor: Network,
    pub acceptance: AcceptancePolicy,
    pub trained_vs: String,
    pub scenario_id: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    format: String,
    version: u32,
    trained_vs: String,
    scenario_id: String,
    config_hash: String,
    seed: u64,
    acceptance: AcceptancePolicy,
    actor: serde_json::Value,
}

impl StrategyBundle {
    pub fn to_json(&self) -> Result<String> {
        let file = BundleFile {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            trained_vs: self.trained_vs.clone(),
            scenario_id: self.scenario_id.clone(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            acceptance: self.acceptance,
            actor: serde_json::from_str(&self.actor.to_json()?)?,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BundleFile = serde_json::from_str(text)?;
        if file.format != BUNDLE_FORMAT || file.version != BUNDLE_VERSION {
            return Err(Error::Config(format!(
                "unsupported strategy file {} v{}",
                file.format, file.version
            )));
        }
        let actor = Network::from_json(&file.actor.to_string())?;
        if actor.input_shape() != [STATE_DIM] || actor.output_shape() != [2] {
            return Err(Error::Structural("actor network has the wrong shape".into()));
        }
        Ok(Self {
            actor,
            acceptance: file.acceptance,
            trained_vs: file.trained_vs,
            scenario_id: file.scenario_id,
            config_hash: file.config_hash,
            seed: file.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl BiddingPolicy for StrategyBundle {
    /// Deterministic mean action `tanh(μ)`.
    fn raw_action(&self, state: &RlState) -> f64 {
        let input = Tensor::new(vec![1, STATE_DIM], state.to_vec()).expect("state shape");
        match self.actor.predict(input) {
            Ok(out) if out.data()[0].is_finite() => out.data()[0].tanh(),
            _ => 1.0,
        }
    }
}

/// Negotiator factory running `bundle` with its own acceptance condition.
pub fn bundle_factory(id: impl Into<String>, bundle: Arc<StrategyBundle>) -> SharedFactory {
    Arc::new(FnFactory::new(id, move || {
        let acceptance = bundle.acceptance;
        Ok(Box::new(PolicyNegotiator::new(bundle.clone(), acceptance)) as Box<dyn Negotiator>)
    }))
}
