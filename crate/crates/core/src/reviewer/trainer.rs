use std::sync::Arc;

use super::PoolTrainer;
use crate::classifier::{build_dataset, train_classifier, ClassifierConfig, ClassifierModel, DatasetSpec};
use crate::domain::{Scenario, Side};
use crate::error::Result;
use crate::negotiators::baseline_factory;
use crate::protocol::{NegotiatorFactory, SharedFactory};
use crate::sac::{train, SacConfig, StrategyBundle, TrainingRequest};
use crate::seed;

/// Maps a negotiator id to its factory.
pub type Resolver = Arc<dyn Fn(&str) -> Result<SharedFactory> + Send + Sync>;

/// Trains strategies with SAC and classifiers from freshly simulated data,
/// both on one training scenario. Negotiators resolve through the baseline
/// registry unless `resolver` is set.
pub struct SacPoolTrainer {
    pub scenario: Scenario,
    pub scenario_id: String,
    pub sac: SacConfig,
    pub classifier: ClassifierConfig,
    pub sessions_per_class: usize,
    pub window: usize,
    pub seed: u64,
    pub resolver: Option<Resolver>,
}

impl SacPoolTrainer {
    pub fn new(scenario: Scenario, scenario_id: impl Into<String>, sac: SacConfig, seed_value: u64) -> Self {
        Self {
            scenario,
            scenario_id: scenario_id.into(),
            sac,
            classifier: ClassifierConfig {
                seed: seed::derive(seed_value, &[seed::tag("classifier")]),
                ..ClassifierConfig::default()
            },
            sessions_per_class: 40,
            window: crate::classifier::DEFAULT_WINDOW,
            seed: seed_value,
            resolver: None,
        }
    }
}

impl PoolTrainer for SacPoolTrainer {
    fn negotiator(&self, id: &str) -> Result<Arc<dyn NegotiatorFactory>> {
        match &self.resolver {
            Some(r) => r(id),
            None => baseline_factory(id),
        }
    }

    fn train_strategy(&self, opponent_id: &str) -> Result<StrategyBundle> {
        let request = TrainingRequest {
            opponent: self.negotiator(opponent_id)?,
            space: self.scenario.space().clone(),
            own_profile: self.scenario.party(Side::A).profile().clone(),
            scenario_id: self.scenario_id.clone(),
            config: self.sac.clone(),
            seed: seed::derive(self.seed, &[seed::tag(opponent_id)]),
        };
        Ok(train(&request)?.bundle)
    }

    fn train_classifier(&self, class_ids: &[String]) -> Result<ClassifierModel> {
        let classes = class_ids
            .iter()
            .map(|id| self.negotiator(id))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = DatasetSpec::new(classes, self.sessions_per_class, seed::derive(self.seed, &[seed::tag("dataset")]))?;
        spec.k = self.window;
        spec.deadline_rounds = self.sac.deadline_rounds;
        let dataset = build_dataset(&spec, &self.scenario)?;
        Ok(train_classifier(&dataset, &self.classifier)?.0)
    }
}
