use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::window::windows_of;
use crate::domain::{random_profile, Scenario, Side};
use crate::error::{Error, Result};
use crate::negotiators::{baseline_factory, BOULWARE};
use crate::protocol::{run_session_with, Action, SessionConfig, SharedFactory, DEFAULT_DEADLINE};
use crate::seed;

pub const DEFAULT_WINDOW: usize = 20;
pub const MAX_CLASSES: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub window: Vec<f64>,
    pub label: usize,
    /// Session the window came from, unique across classes.
    pub session: usize,
    /// All `k` slots hold real offers.
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub k: usize,
    pub class_ids: Vec<String>,
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
}

impl Dataset {
    pub fn class_count(&self) -> usize {
        self.class_ids.len()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub struct DatasetSpec {
    /// One factory per class, in class order.
    pub classes: Vec<SharedFactory>,
    /// Opponent the class negotiators face. It holds profile A of the scenario.
    pub probe: SharedFactory,
    pub sessions_per_class: usize,
    pub k: usize,
    pub deadline_rounds: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(classes: Vec<SharedFactory>, sessions_per_class: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            classes,
            probe: baseline_factory(BOULWARE)?,
            sessions_per_class,
            k: DEFAULT_WINDOW,
            deadline_rounds: DEFAULT_DEADLINE,
            validation_fraction: 0.2,
            seed,
        })
    }
}

/// Opponent-offer streams of one class negotiator, projected onto the probe's
/// utility. The class side draws a fresh random profile each session; the
/// first mover alternates.
pub fn offer_streams(
    class: &SharedFactory,
    probe: &SharedFactory,
    scenario: &Scenario,
    sessions: usize,
    deadline_rounds: usize,
    seed_value: u64,
) -> Result<Vec<Vec<f64>>> {
    let probe_profile = scenario.party(Side::A).profile().clone();
    (0..sessions as u64)
        .map(|i| {
            let class_profile = random_profile(seed::derive(seed_value, &[i, 1]), scenario.space())?;
            let s = Scenario::new((**scenario.space()).clone(), probe_profile.clone(), class_profile)?;
            let config = SessionConfig::new(deadline_rounds, seed::derive(seed_value, &[i, 2]))?;
            let first = if i % 2 == 0 { Side::A } else { Side::B };
            let mut p = probe.create()?;
            let mut c = class.create()?;
            let (_, trace) = run_session_with(p.as_mut(), c.as_mut(), &s, &config, first)?;
            let probe_party = s.party(Side::A);
            trace
                .steps
                .iter()
                .filter(|st| st.actor == Side::B)
                .filter_map(|st| match &st.action {
                    Action::Offer(o) => Some(probe_party.utility(o)),
                    _ => None,
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Labelled windows from simulated sessions of every class, split 80/20 by
/// session within each class.
pub fn build_dataset(spec: &DatasetSpec, scenario: &Scenario) -> Result<Dataset> {
    let n = spec.classes.len();
    if !(2..=MAX_CLASSES).contains(&n) {
        return Err(Error::Dataset(format!("need between 2 and {MAX_CLASSES} classes, got {n}")));
    }
    if spec.k < 2 {
        return Err(Error::Dataset("window length k must exceed 1".into()));
    }
    if spec.sessions_per_class == 0 {
        return Err(Error::Dataset("sessions_per_class must be positive".into()));
    }
    if !(0.0..1.0).contains(&spec.validation_fraction) {
        return Err(Error::Dataset("validation fraction must lie in [0, 1)".into()));
    }
    let mut split_rng = seed::rng(seed::derive(spec.seed, &[0]));
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (label, class) in spec.classes.iter().enumerate() {
        let streams = offer_streams(
            class,
            &spec.probe,
            scenario,
            spec.sessions_per_class,
            spec.deadline_rounds,
            seed::derive(spec.seed, &[1, label as u64]),
        )?;
        if streams.iter().all(|s| s.is_empty()) {
            return Err(Error::Dataset(format!("class {:?} produced no windows", class.id())));
        }
        let mut order: Vec<usize> = (0..streams.len()).collect();
        order.shuffle(&mut split_rng);
        let n_val = (streams.len() as f64 * spec.validation_fraction).round() as usize;
        for (rank, &i) in order.iter().enumerate() {
            let session = label * spec.sessions_per_class + i;
            let target = if rank < n_val { &mut validation } else { &mut train };
            for (j, window) in windows_of(&streams[i], spec.k).into_iter().enumerate() {
                target.push(Sample {
                    window,
                    label,
                    session,
                    full: j + 1 >= spec.k,
                });
            }
        }
    }
    Ok(Dataset {
        k: spec.k,
        class_ids: spec.classes.iter().map(|c| c.id().to_string()).collect(),
        train,
        validation,
    })
}
