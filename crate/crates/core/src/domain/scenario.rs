use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::party::Party;
use super::space::{Issue, OutcomeSpace};
use super::utility::{PreferenceProfile, RawUtility, UtilityFunction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Outcome space plus the two preference profiles negotiating over it.
#[derive(Clone, Debug)]
pub struct Scenario {
    space: Arc<OutcomeSpace>,
    a: Party,
    b: Party,
}

impl Scenario {
    pub fn new(space: OutcomeSpace, profile_a: PreferenceProfile, profile_b: PreferenceProfile) -> Result<Self> {
        let space = Arc::new(space);
        Ok(Self {
            a: Party::new(space.clone(), profile_a)?,
            b: Party::new(space.clone(), profile_b)?,
            space,
        })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn party(&self, side: Side) -> &Party {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// Same scenario with the two profiles exchanged.
    pub fn swapped(&self) -> Scenario {
        Scenario {
            space: self.space.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Minimum Euclidean distance from `(U_a(ω), U_b(ω))` to the ideal point `(1, 1)`.
    pub fn opposition(&self) -> f64 {
        opposition_of(self.a.utilities(), self.b.utilities())
    }

    pub fn to_file(&self) -> ScenarioFile {
        let profile = |p: &Party| ProfileFile {
            weights: p.profile().utility.weights().to_vec(),
            valuations: p.profile().utility.valuations().to_vec(),
            reservation: p.reservation(),
        };
        ScenarioFile {
            issues: self.space.issues().to_vec(),
            profile_a: profile(&self.a),
            profile_b: profile(&self.b),
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let space = OutcomeSpace::new(file.issues)?;
        let load = |p: ProfileFile| -> Result<PreferenceProfile> {
            let raw = RawUtility {
                weights: p.weights,
                valuations: p.valuations,
            };
            PreferenceProfile::new(UtilityFunction::normalize(&raw, &space)?, p.reservation)
        };
        let a = load(file.profile_a)?;
        let b = load(file.profile_b)?;
        Self::new(space, a, b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(serde_json::from_str(&text)?)
    }
}

pub(crate) fn opposition_of(ua: &[f64], ub: &[f64]) -> f64 {
    ua.iter()
        .zip(ub)
        .map(|(a, b)| ((1.0 - a).powi(2) + (1.0 - b).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub weights: Vec<f64>,
    pub valuations: Vec<Vec<f64>>,
    pub reservation: f64,
}

/// On-disk scenario document. Utilities are stored as given and normalised on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub issues: Vec<Issue>,
    pub profile_a: ProfileFile,
    pub profile_b: ProfileFile,
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<()> {
        if self.issues.is_empty() {
            return Err(Error::Structural("scenario has no issues".into()));
        }
        Ok(())
    }
}
