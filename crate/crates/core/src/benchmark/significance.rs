use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::sum::{mean, std_dev};
use crate::error::{Error, Result};

pub const FAMILY_ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided Welch unequal-variance t-test.
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<WelchResult> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InvalidArgument("each group needs at least two samples".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (vx, vy) = (std_dev(x).powi(2) / x.len() as f64, std_dev(y).powi(2) / y.len() as f64);
    let se2 = vx + vy;
    if se2 == 0.0 {
        let p_value = if mx == my { 1.0 } else { 0.0 };
        let t = if mx == my { 0.0 } else { (mx - my).signum() * f64::INFINITY };
        return Ok(WelchResult { t, df: f64::NAN, p_value });
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2
        / (vx * vx / (x.len() - 1) as f64 + vy * vy / (y.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p_value = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(WelchResult { t, df, p_value })
}

/// Per-comparison threshold under Bonferroni correction.
pub fn bonferroni_threshold(comparisons: usize) -> f64 {
    FAMILY_ALPHA / comparisons.max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    pub p_value: f64,
    pub threshold: f64,
    pub significant: bool,
}

/// Welch tests of each group against `focus`, judged at `0.05 / m`.
pub fn significance(focus: &[f64], others: &[(String, Vec<f64>)], comparisons: usize) -> Result<Vec<Comparison>> {
    let threshold = bonferroni_threshold(comparisons);
    others
        .iter()
        .map(|(label, sample)| {
            let r = welch_t_test(focus, sample)?;
            Ok(Comparison {
                label: label.clone(),
                p_value: r.p_value,
                threshold,
                significant: r.p_value < threshold,
            })
        })
        .collect()
}
