//! Seeded random profiles and synthetic scenarios with a target outcome-space
//! size and opposition.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{opposition_of, Scenario};
use super::space::OutcomeSpace;
use super::utility::{PreferenceProfile, RawUtility, UtilityFunction};
use crate::error::{Error, Result};
use crate::seed;

pub const OPPOSITION_TOLERANCE: f64 = 0.1;
const MAX_ATTEMPTS: u64 = 16;
const BISECTION_STEPS: usize = 40;

fn flat_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Normalised unit exponentials are uniform on the simplex.
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn raw_draw(rng: &mut ChaCha8Rng, space: &OutcomeSpace) -> RawUtility {
    RawUtility {
        weights: flat_simplex(rng, space.issues().len()),
        valuations: space
            .issues()
            .iter()
            .map(|i| (0..i.cardinality()).map(|_| rng.random::<f64>()).collect())
            .collect(),
    }
}

/// Flat-simplex weights, uniform valuations, min-max normalised, reservation 0.
pub fn random_profile(seed: u64, space: &OutcomeSpace) -> Result<PreferenceProfile> {
    let mut rng = seed::rng(seed);
    let raw = raw_draw(&mut rng, space);
    PreferenceProfile::new(UtilityFunction::normalize(&raw, space)?, 0.0)
}

fn issue_sizes(rng: &mut ChaCha8Rng, target: usize) -> Vec<usize> {
    let issues = ((target as f64).ln() / 6f64.ln()).round().max(1.0) as usize;
    let base = (target as f64).powf(1.0 / issues as f64);
    let mut sizes = Vec::with_capacity(issues);
    let mut product = 1.0;
    for _ in 0..issues - 1 {
        let lo = (base * 0.6).floor().max(2.0) as usize;
        let hi = (base * 1.4).ceil().max(lo as f64 + 1.0) as usize;
        let s = rng.random_range(lo..=hi);
        product *= s as f64;
        sizes.push(s);
    }
    sizes.push(((target as f64) / product).round().max(2.0) as usize);
    sizes
}

/// Opponent valuations blended with ours: `c = 1` copies our preferences,
/// `c = −1` mirrors them, `c = 0` is independent noise.
fn blended(ours: &RawUtility, noise: &RawUtility, c: f64) -> RawUtility {
    let m = c.abs();
    let weights = ours
        .weights
        .iter()
        .zip(&noise.weights)
        .map(|(a, n)| m * a + (1.0 - m) * n)
        .collect();
    let valuations = ours
        .valuations
        .iter()
        .zip(&noise.valuations)
        .map(|(va, vn)| {
            va.iter()
                .zip(vn)
                .map(|(a, n)| {
                    let mirrored = if c >= 0.0 { *a } else { 1.0 - a };
                    m * mirrored + (1.0 - m) * n
                })
                .collect()
        })
        .collect();
    RawUtility {
        weights,
        valuations,
    }
}

fn table(space: &OutcomeSpace, f: &UtilityFunction) -> Vec<f64> {
    space.iter().map(|o| f.value_unchecked(&o)).collect()
}

/// Deterministic synthetic scenario. Cardinality lands within a factor two
/// of the target; opposition within [`OPPOSITION_TOLERANCE`].
pub fn generate_scenario(seed: u64, target_cardinality: usize, target_opposition: f64) -> Result<Scenario> {
    if target_cardinality < 2 {
        return Err(Error::InvalidArgument("target cardinality must be at least 2".into()));
    }
    if !(0.0..std::f64::consts::SQRT_2).contains(&target_opposition) {
        return Err(Error::InvalidArgument(format!(
            "target opposition {target_opposition} outside [0, √2)"
        )));
    }
    let mut best: Option<(f64, Scenario)> = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed::rng(seed::derive(seed, &[attempt]));
        let sizes = issue_sizes(&mut rng, target_cardinality);
        let space = OutcomeSpace::from_cardinalities(&sizes)?;
        let n = space.cardinality();
        if n * 2 < target_cardinality || n > target_cardinality * 2 {
            continue;
        }
        let ours = raw_draw(&mut rng, &space);
        let noise = raw_draw(&mut rng, &space);
        let Ok(fa) = UtilityFunction::normalize(&ours, &space) else {
            continue;
        };
        let ua = table(&space, &fa);
        let eval = |c: f64| -> Option<(f64, UtilityFunction)> {
            let fb = UtilityFunction::normalize(&blended(&ours, &noise, c), &space).ok()?;
            Some((opposition_of(&ua, &table(&space, &fb)), fb))
        };
        // Opposition grows as c moves from +1 (identical) towards −1 (mirrored).
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut chosen: Option<(f64, UtilityFunction)> = None;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let Some((opp, fb)) = eval(mid) else { break };
            let better = chosen
                .as_ref()
                .is_none_or(|(o, _)| (opp - target_opposition).abs() < (o - target_opposition).abs());
            if opp > target_opposition {
                lo = mid;
            } else {
                hi = mid;
            }
            if better {
                chosen = Some((opp, fb));
            }
        }
        for c in [1.0, -1.0] {
            if let Some((opp, fb)) = eval(c) {
                if chosen
                    .as_ref()
                    .is_none_or(|(o, _)| (opp - target_opposition).abs() < (o - target_opposition).abs())
                {
                    chosen = Some((opp, fb));
                }
            }
        }
        let Some((opp, fb)) = chosen else { continue };
        let scenario = Scenario::new(
            space,
            PreferenceProfile::new(fa, 0.0)?,
            PreferenceProfile::new(fb, 0.0)?,
        )?;
        let gap = (opp - target_opposition).abs();
        if gap <= OPPOSITION_TOLERANCE * 0.5 {
            return Ok(scenario);
        }
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, scenario));
        }
    }
    match best {
        Some((gap, s)) if gap <= OPPOSITION_TOLERANCE => Ok(s),
        Some((_, s)) => Err(Error::Generation {
            target: target_opposition,
            best: s.opposition(),
        }),
        None => Err(Error::Generation {
            target: target_opposition,
            best: f64::NAN,
        }),
    }
}
