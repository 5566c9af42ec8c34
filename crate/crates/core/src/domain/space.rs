use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub name: String,
    pub values: Vec<String>,
}

impl Issue {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let issue = Self {
            name: name.into(),
            values,
        };
        issue.validate()?;
        Ok(issue)
    }

    /// Issue with value labels `v0..v{n-1}`.
    pub fn with_cardinality(name: impl Into<String>, n: usize) -> Result<Self> {
        Self::new(name, (0..n).map(|i| format!("v{i}")).collect())
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Structural(format!("issue {:?} has no values", self.name)));
        }
        let unique: HashSet<&String> = self.values.iter().collect();
        if unique.len() != self.values.len() {
            return Err(Error::Structural(format!(
                "issue {:?} has duplicate value labels",
                self.name
            )));
        }
        Ok(())
    }
}

/// One value index per issue.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome(pub Vec<usize>);

impl Outcome {
    pub fn choices(&self) -> &[usize] {
        &self.0
    }
}

/// Cartesian product of issues, enumerated lexicographically with issue 0
/// most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Issue>", into = "Vec<Issue>")]
pub struct OutcomeSpace {
    issues: Vec<Issue>,
    cardinality: usize,
}

impl TryFrom<Vec<Issue>> for OutcomeSpace {
    type Error = Error;
    fn try_from(issues: Vec<Issue>) -> Result<Self> {
        Self::new(issues)
    }
}

impl From<OutcomeSpace> for Vec<Issue> {
    fn from(space: OutcomeSpace) -> Self {
        space.issues
    }
}

impl OutcomeSpace {
    pub fn new(issues: Vec<Issue>) -> Result<Self> {
        if issues.is_empty() {
            return Err(Error::Structural("outcome space needs at least one issue".into()));
        }
        let mut cardinality = 1usize;
        for issue in &issues {
            issue.validate()?;
            cardinality = cardinality
                .checked_mul(issue.cardinality())
                .ok_or_else(|| Error::Structural("outcome space too large".into()))?;
        }
        Ok(Self {
            issues,
            cardinality,
        })
    }

    pub fn from_cardinalities(sizes: &[usize]) -> Result<Self> {
        let issues = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| Issue::with_cardinality(format!("issue{i}"), n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(issues)
    }

    pub fn issues(&self) -> &[Issue] {
        &self.issues
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn validate(&self, outcome: &Outcome) -> Result<()> {
        if outcome.0.len() != self.issues.len() {
            return Err(Error::Structural(format!(
                "outcome has {} choices for {} issues",
                outcome.0.len(),
                self.issues.len()
            )));
        }
        for (i, (&c, issue)) in outcome.0.iter().zip(&self.issues).enumerate() {
            if c >= issue.cardinality() {
                return Err(Error::Structural(format!(
                    "choice {c} out of range for issue {i} ({} values)",
                    issue.cardinality()
                )));
            }
        }
        Ok(())
    }

    /// Canonical enumeration index.
    pub fn index_of(&self, outcome: &Outcome) -> Result<usize> {
        self.validate(outcome)?;
        Ok(outcome
            .0
            .iter()
            .zip(&self.issues)
            .fold(0usize, |acc, (&c, issue)| acc * issue.cardinality() + c))
    }

    pub fn outcome(&self, mut index: usize) -> Result<Outcome> {
        if index >= self.cardinality {
            return Err(Error::Structural(format!(
                "outcome index {index} >= cardinality {}",
                self.cardinality
            )));
        }
        let mut choices = vec![0; self.issues.len()];
        for (slot, issue) in choices.iter_mut().zip(&self.issues).rev() {
            *slot = index % issue.cardinality();
            index /= issue.cardinality();
        }
        Ok(Outcome(choices))
    }

    pub fn iter(&self) -> impl Iterator<Item = Outcome> + '_ {
        (0..self.cardinality).map(move |i| self.outcome(i).expect("index in range"))
    }
}
