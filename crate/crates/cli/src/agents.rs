//! Agent and scenario references on the command line.
//!
//! An agent is a baseline id, a strategy bundle file, or a pool directory
//! (the switching RL-agent over that pool). Any reference may carry a
//! `name=` prefix to set its id.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use negswitch_core::domain::Scenario;
use negswitch_core::negotiators::{baseline_factory, is_baseline, BASELINE_IDS};
use negswitch_core::protocol::SharedFactory;
use negswitch_core::reviewer::{StrategyPool, POOL_MANIFEST};
use negswitch_core::sac::{bundle_factory, StrategyBundle};
use negswitch_core::switching::SwitchConfig;

fn split_name(spec: &str) -> (Option<&str>, &str) {
    match spec.split_once('=') {
        Some((name, rest)) if !name.is_empty() && !name.contains(['/', '\\']) => (Some(name), rest),
        _ => (None, spec),
    }
}

pub fn resolve_agent(spec: &str) -> Result<SharedFactory> {
    let (name, target) = split_name(spec);
    if is_baseline(target) {
        if name.is_some_and(|n| n != target) {
            bail!("baseline {target} cannot be renamed");
        }
        return Ok(baseline_factory(target)?);
    }
    let path = Path::new(target);
    if path.join(POOL_MANIFEST).is_file() {
        let pool = StrategyPool::load(path).with_context(|| format!("loading pool {target}"))?;
        return Ok(pool.rl_agent(name.unwrap_or("rl_agent"), SwitchConfig::default())?);
    }
    if path.is_file() {
        let bundle = StrategyBundle::load(path).with_context(|| format!("loading strategy {target}"))?;
        let id = name.map_or_else(|| format!("sac_vs_{}", bundle.trained_vs), str::to_string);
        return Ok(bundle_factory(id, Arc::new(bundle)));
    }
    bail!(
        "unknown agent {spec:?}: expected one of {BASELINE_IDS:?}, a strategy file, or a pool directory"
    )
}

/// A scenario file, or a directory holding `scenario.json`.
pub fn scenario_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("scenario.json")
    } else {
        path.to_path_buf()
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let file = scenario_file(path);
    Scenario::load(&file).with_context(|| format!("loading scenario {}", file.display()))
}

/// Id for a scenario reference: the `name=` prefix, the file stem, or the
/// directory name for `scenario.json`.
pub fn scenario_ref(spec: &str) -> Result<(String, Scenario)> {
    let (name, target) = split_name(spec);
    let path = Path::new(target);
    let file = scenario_file(path);
    let id = match name {
        Some(n) => n.to_string(),
        None if file.file_name().is_some_and(|f| f == "scenario.json") => file
            .parent()
            .and_then(|p| p.file_name())
            .map_or_else(|| "scenario".into(), |n| n.to_string_lossy().into_owned()),
        None => file.file_stem().map_or_else(|| "scenario".into(), |n| n.to_string_lossy().into_owned()),
    };
    Ok((id, load_scenario(path)?))
}
