use std::sync::Arc;

use super::space::{Outcome, OutcomeSpace};
use super::utility::PreferenceProfile;
use crate::error::{Error, Result};

/// Lower bound applied when searching for a bid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Floor {
    None,
    /// `U(ω) ≥ value`
    AtLeast(f64),
    /// `U(ω) > value`
    Above(f64),
}

impl Floor {
    fn admits(self, u: f64) -> bool {
        match self {
            Floor::None => true,
            Floor::AtLeast(f) => u >= f,
            Floor::Above(f) => u > f,
        }
    }
}

/// Precomputed utilities of every outcome plus a sorted index for
/// nearest-utility lookup.
#[derive(Clone, Debug)]
struct UtilityTable {
    by_index: Vec<f64>,
    /// `(utility, outcome index)` sorted by utility, then index.
    sorted: Vec<(f64, usize)>,
}

impl UtilityTable {
    fn build(space: &OutcomeSpace, profile: &PreferenceProfile) -> Self {
        let by_index: Vec<f64> = space
            .iter()
            .map(|o| profile.utility.value_unchecked(&o))
            .collect();
        let mut sorted: Vec<(f64, usize)> = by_index.iter().cloned().zip(0..).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self { by_index, sorted }
    }

    /// `argmin_ω (U(ω) − target)²` over admitted outcomes, ties to the lowest
    /// canonical index. Equivalent to a full scan: candidates are visited
    /// outward from the insertion point while their squared error can still
    /// tie the best one found.
    fn nearest(&self, target: f64, floor: Floor) -> Option<usize> {
        let start = self.sorted.partition_point(|&(u, _)| !floor.admits(u));
        let slice = &self.sorted[start..];
        if slice.is_empty() {
            return None;
        }
        let pos = slice.partition_point(|&(u, _)| u < target);
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |u: f64, idx: usize| {
            let f = (u - target) * (u - target);
            match best {
                Some((bf, bi)) if f > bf || (f == bf && idx >= bi) => {}
                _ => best = Some((f, idx)),
            }
        };
        // Rightwards: utilities ≥ target, error non-decreasing.
        let mut bound = f64::INFINITY;
        for &(u, idx) in &slice[pos..] {
            let f = (u - target) * (u - target);
            if f > bound {
                break;
            }
            bound = bound.min(f);
            consider(u, idx);
        }
        // Leftwards: utilities < target, error non-decreasing.
        let mut bound = f64::INFINITY;
        for &(u, idx) in slice[..pos].iter().rev() {
            let f = (u - target) * (u - target);
            if f > bound {
                break;
            }
            bound = bound.min(f);
            consider(u, idx);
        }
        best.map(|(_, i)| i)
    }
}

/// A preference profile bound to its outcome space, with a utility index.
#[derive(Clone, Debug)]
pub struct Party {
    space: Arc<OutcomeSpace>,
    profile: PreferenceProfile,
    table: Arc<UtilityTable>,
}

impl Party {
    pub fn new(space: Arc<OutcomeSpace>, profile: PreferenceProfile) -> Result<Self> {
        if profile.utility.weights().len() != space.issues().len() {
            return Err(Error::Structural("profile defined over a different space".into()));
        }
        for (vals, issue) in profile.utility.valuations().iter().zip(space.issues()) {
            if vals.len() != issue.cardinality() {
                return Err(Error::Structural("profile valuations do not match issues".into()));
            }
        }
        let table = Arc::new(UtilityTable::build(&space, &profile));
        Ok(Self {
            space,
            profile,
            table,
        })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn profile(&self) -> &PreferenceProfile {
        &self.profile
    }

    pub fn reservation(&self) -> f64 {
        self.profile.reservation()
    }

    pub fn utility(&self, outcome: &Outcome) -> Result<f64> {
        let idx = self.space.index_of(outcome)?;
        Ok(self.table.by_index[idx])
    }

    pub fn utility_at(&self, index: usize) -> f64 {
        self.table.by_index[index]
    }

    pub fn utilities(&self) -> &[f64] {
        &self.table.by_index
    }

    pub fn outcome(&self, index: usize) -> Outcome {
        self.space.outcome(index).expect("index drawn from this space")
    }

    /// Canonical index of the outcome whose utility is nearest to `target`.
    pub fn nearest_index(&self, target: f64, floor: Floor) -> Result<usize> {
        if !target.is_finite() {
            return Err(Error::InvalidArgument(format!("target utility {target}")));
        }
        self.table
            .nearest(target, floor)
            .ok_or_else(|| Error::Structural("no outcome satisfies the bid floor".into()))
    }

    /// Indices of outcomes admitted by `floor`, in canonical order.
    pub fn admitted(&self, floor: Floor) -> Vec<usize> {
        (0..self.table.by_index.len())
            .filter(|&i| floor.admits(self.table.by_index[i]))
            .collect()
    }
}

/// Inverse utility map: `argmin_{ω∈Ω} (U(ω) − target)²`, ties broken by the
/// lowest canonical enumeration index.
pub fn inverse_utility(party: &Party, target: f64) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidArgument(format!(
            "target utility {target} outside [0, 1]"
        )));
    }
    Ok(party.outcome(party.nearest_index(target, Floor::None)?))
}
