use serde::{Deserialize, Serialize};

use super::space::{Outcome, OutcomeSpace};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// Linear-additive utility before min-max normalisation: any nonnegative
/// weights, any finite valuations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawUtility {
    pub weights: Vec<f64>,
    pub valuations: Vec<Vec<f64>>,
}

impl RawUtility {
    fn check(&self, space: &OutcomeSpace) -> Result<()> {
        if self.weights.len() != space.issues().len() || self.valuations.len() != space.issues().len()
        {
            return Err(Error::Structural(format!(
                "utility covers {} weights / {} valuation rows for {} issues",
                self.weights.len(),
                self.valuations.len(),
                space.issues().len()
            )));
        }
        for (i, (vals, issue)) in self.valuations.iter().zip(space.issues()).enumerate() {
            if vals.len() != issue.cardinality() {
                return Err(Error::Structural(format!(
                    "issue {i}: {} valuations for {} values",
                    vals.len(),
                    issue.cardinality()
                )));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Structural(format!("issue {i}: non-finite valuation")));
            }
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Structural("weights must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn value(&self, outcome: &Outcome) -> f64 {
        outcome
            .0
            .iter()
            .enumerate()
            .map(|(i, &c)| self.weights[i] * self.valuations[i][c])
            .sum()
    }
}

/// Normalised linear-additive utility: weights sum to 1, valuations lie in
/// `[0, 1]`, and the minimum / maximum over the outcome space are 0 / 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityFunction {
    weights: Vec<f64>,
    valuations: Vec<Vec<f64>>,
}

impl UtilityFunction {
    /// Min-max normalisation. Because the function is separable,
    /// `(U − min U) / (max U − min U)` is again linear-additive with weights
    /// `w_i·range_i / Σ_j w_j·range_j` and per-issue rescaled valuations.
    pub fn normalize(raw: &RawUtility, space: &OutcomeSpace) -> Result<Self> {
        raw.check(space)?;
        let ranges: Vec<(f64, f64)> = raw
            .valuations
            .iter()
            .map(|vals| {
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect();
        let spread: f64 = raw
            .weights
            .iter()
            .zip(&ranges)
            .map(|(w, (lo, hi))| w * (hi - lo))
            .sum();
        if !(spread > 0.0) {
            return Err(Error::Degenerate(
                "utility is constant over the outcome space".into(),
            ));
        }
        let mut weights = Vec::with_capacity(raw.weights.len());
        let mut valuations = Vec::with_capacity(raw.valuations.len());
        for ((w, vals), (lo, hi)) in raw.weights.iter().zip(&raw.valuations).zip(&ranges) {
            let range = hi - lo;
            if *w > 0.0 && range > 0.0 {
                weights.push(w * range / spread);
                valuations.push(vals.iter().map(|v| (v - lo) / range).collect());
            } else {
                weights.push(0.0);
                valuations.push(vals.iter().map(|v| (v - lo) / range.max(1.0)).collect());
            }
        }
        let f = Self {
            weights,
            valuations,
        };
        f.check_invariants()?;
        Ok(f)
    }

    fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Structural(format!("weights sum to {sum}")));
        }
        if self
            .valuations
            .iter()
            .flatten()
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::Structural("valuation outside [0, 1]".into()));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn valuations(&self) -> &[Vec<f64>] {
        &self.valuations
    }

    pub fn as_raw(&self) -> RawUtility {
        RawUtility {
            weights: self.weights.clone(),
            valuations: self.valuations.clone(),
        }
    }

    /// `Σ_i w_i · v_i(choice_i)`, clamped against rounding to `[0, 1]`.
    pub fn utility(&self, space: &OutcomeSpace, outcome: &Outcome) -> Result<f64> {
        space.validate(outcome)?;
        if self.weights.len() != space.issues().len() {
            return Err(Error::Structural("utility defined over a different space".into()));
        }
        Ok(self.value_unchecked(outcome))
    }

    pub(crate) fn value_unchecked(&self, outcome: &Outcome) -> f64 {
        let u: f64 = outcome
            .0
            .iter()
            .enumerate()
            .map(|(i, &c)| self.weights[i] * self.valuations[i][c])
            .sum();
        u.clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    pub utility: UtilityFunction,
    reservation: f64,
}

impl PreferenceProfile {
    pub fn new(utility: UtilityFunction, reservation: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&reservation) {
            return Err(Error::InvalidArgument(format!(
                "reservation value {reservation} outside [0, 1)"
            )));
        }
        Ok(Self {
            utility,
            reservation,
        })
    }

    pub fn reservation(&self) -> f64 {
        self.reservation
    }
}
