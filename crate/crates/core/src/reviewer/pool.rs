use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierModel;
use crate::error::{Error, Result};
use crate::protocol::SharedFactory;
use crate::sac::StrategyBundle;
use crate::switching::{make_rl_agent, SwitchConfig};

pub const POOL_MANIFEST: &str = "pool.json";
pub const POOL_FORMAT: &str = "negswitch-pool";

/// A base negotiator and the strategy answering it.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub negotiator_id: String,
    pub bundle: Arc<StrategyBundle>,
}

/// Negotiator-strategy pairs plus the classifier over them. Reviews never
/// mutate a pool; they return a new one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StrategyPool {
    pub entries: Vec<PoolEntry>,
    pub classifier: Option<Arc<ClassifierModel>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub negotiator_id: String,
    pub bundle_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolManifest {
    pub format: String,
    pub negotiators: Vec<ManifestEntry>,
    pub classifier_file: Option<String>,
    pub class_order: Vec<String>,
}

impl StrategyPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.negotiator_id.clone()).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.negotiator_id == id)
    }

    /// Checks that the classifier classes line up with the entries.
    pub fn validate(&self) -> Result<()> {
        match (&self.classifier, self.entries.len()) {
            (_, 0) => Ok(()),
            (None, 1) => Ok(()),
            (None, n) => Err(Error::Config(format!("pool of {n} strategies has no classifier"))),
            (Some(c), _) if c.class_ids != self.ids() => Err(Error::Config(format!(
                "classifier classes {:?} do not match pool {:?}",
                c.class_ids,
                self.ids()
            ))),
            _ => Ok(()),
        }
    }

    pub fn rl_agent(&self, id: &str, config: SwitchConfig) -> Result<SharedFactory> {
        if self.entries.is_empty() {
            return Err(Error::Config("empty pool has no RL-agent".into()));
        }
        let classifier = if self.entries.len() > 1 {
            self.classifier.clone()
        } else {
            None
        };
        make_rl_agent(id, self.entries.iter().map(|e| e.bundle.clone()).collect(), classifier, config)
    }

    pub fn manifest(&self) -> PoolManifest {
        PoolManifest {
            format: POOL_FORMAT.into(),
            negotiators: self
                .entries
                .iter()
                .map(|e| ManifestEntry {
                    negotiator_id: e.negotiator_id.clone(),
                    bundle_file: format!("strategy_{}.json", e.negotiator_id),
                })
                .collect(),
            classifier_file: self.classifier.as_ref().map(|_| "classifier.json".to_string()),
            class_order: self.classifier.as_ref().map_or_else(Vec::new, |c| c.class_ids.clone()),
        }
    }

    /// Writes the pool into a fresh sibling directory, then swaps it into place.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let staging = sibling(dir, "staging");
        let retired = sibling(dir, "old");
        if staging.exists() {
            std::fs::remove_dir_all(&staging)?;
        }
        std::fs::create_dir_all(&staging)?;
        let manifest = self.manifest();
        for (entry, m) in self.entries.iter().zip(&manifest.negotiators) {
            entry.bundle.save(&staging.join(&m.bundle_file))?;
        }
        if let (Some(c), Some(file)) = (&self.classifier, &manifest.classifier_file) {
            c.save(&staging.join(file))?;
        }
        std::fs::write(staging.join(POOL_MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
        if dir.exists() {
            if retired.exists() {
                std::fs::remove_dir_all(&retired)?;
            }
            std::fs::rename(dir, &retired)?;
        }
        std::fs::rename(&staging, dir)?;
        if retired.exists() {
            std::fs::remove_dir_all(&retired)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: PoolManifest = serde_json::from_str(&std::fs::read_to_string(dir.join(POOL_MANIFEST))?)?;
        if manifest.format != POOL_FORMAT {
            return Err(Error::Config(format!("unknown pool format {:?}", manifest.format)));
        }
        let entries = manifest
            .negotiators
            .iter()
            .map(|m| {
                Ok(PoolEntry {
                    negotiator_id: m.negotiator_id.clone(),
                    bundle: Arc::new(StrategyBundle::load(&dir.join(&m.bundle_file))?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let classifier = manifest
            .classifier_file
            .as_ref()
            .map(|f| ClassifierModel::load(&dir.join(f)).map(Arc::new))
            .transpose()?;
        let pool = Self { entries, classifier };
        pool.validate()?;
        Ok(pool)
    }
}

fn sibling(dir: &Path, suffix: &str) -> PathBuf {
    let name = dir.file_name().map_or_else(|| "pool".into(), |n| n.to_string_lossy().into_owned());
    dir.with_file_name(format!(".{name}.{suffix}"))
}
