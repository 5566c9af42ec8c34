use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use negswitch_core::benchmark::{run_tournament, BenchmarkReport, TournamentSpec};
use negswitch_core::classifier::{build_dataset, train_classifier, ClassifierConfig, DatasetSpec, EpochStats};
use negswitch_core::domain::{generate_scenario, Side};
use negswitch_core::negotiators::is_baseline;
use negswitch_core::protocol::{run_many, write_trace_csv, EndReason, SessionSpec, DEFAULT_DEADLINE};
use negswitch_core::reviewer::{review_new_negotiator, review_new_strategy, ReviewerConfig, SacPoolTrainer, StrategyPool, Verdict};
use negswitch_core::sac::{train, write_curve_csv, SacConfig, StrategyBundle, TrainingRequest};
use negswitch_core::switching::SwitchConfig;
use serde::{Deserialize, Serialize};

use crate::agents::{load_scenario, resolve_agent, scenario_ref};
use crate::output::{out_path, staged, write_csv, write_json};

const CONFIG_FILE: &str = "config.json";

fn scenario_id(path: &Path) -> String {
    scenario_ref(&path.to_string_lossy()).map_or_else(|_| "scenario".into(), |(id, _)| id)
}

fn sac_preset(preset: &str, epochs: Option<usize>) -> Result<SacConfig> {
    let mut config = SacConfig::preset(preset)?;
    if let Some(e) = epochs {
        config.epochs = e;
    }
    config.validate()?;
    Ok(config)
}

// ------------------------------------------------------------ gen-scenario

#[derive(Args, Debug, Serialize)]
pub struct GenScenario {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub cardinality: usize,
    #[arg(long)]
    pub opposition: f64,
    /// Output directory [default: $NEGSWITCH_OUT_ROOT/scenario].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn gen_scenario(args: &GenScenario) -> Result<()> {
    let dir = out_path(args.out.clone(), "scenario");
    let scenario = generate_scenario(args.seed, args.cardinality, args.opposition)?;
    staged(&dir, |d| {
        scenario.save(&d.join("scenario.json"))?;
        write_json(&d.join(CONFIG_FILE), args)
    })?;
    println!(
        "{}: {} outcomes, opposition {:.4}",
        dir.display(),
        scenario.space().cardinality(),
        scenario.opposition()
    );
    Ok(())
}

// ---------------------------------------------------------- train-strategy

#[derive(Args, Debug, Serialize)]
pub struct TrainStrategy {
    /// Opponent agent: a baseline id, strategy file or pool directory.
    #[arg(long)]
    pub opponent: String,
    /// Scenario file or directory; the strategy plays profile A.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "desk")]
    pub preset: String,
    #[arg(long)]
    pub seed: u64,
    /// Overrides the preset's training iterations.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn train_strategy(args: &TrainStrategy) -> Result<()> {
    let dir = out_path(args.out.clone(), &format!("strategy_{}", args.opponent));
    let scenario = load_scenario(&args.scenario)?;
    let config = sac_preset(&args.preset, args.epochs)?;
    let request = TrainingRequest {
        opponent: resolve_agent(&args.opponent)?,
        space: scenario.space().clone(),
        own_profile: scenario.party(Side::A).profile().clone(),
        scenario_id: scenario_id(&args.scenario),
        config: config.clone(),
        seed: args.seed,
    };
    let out = train(&request)?;
    staged(&dir, |d| {
        out.bundle.save(&d.join("strategy.json"))?;
        write_curve_csv(std::fs::File::create(d.join("curve.csv"))?, &out.curve)?;
        write_json(&d.join(CONFIG_FILE), &serde_json::json!({ "args": args, "sac": config }))
    })?;
    if let Some(last) = out.curve.last() {
        println!(
            "{}: iteration {} mean utility {:.4} agreement rate {:.2}",
            dir.display(),
            last.iteration,
            last.mean_utility,
            last.agreement_rate
        );
    }
    Ok(())
}

// -------------------------------------------------------- train-classifier

#[derive(Args, Debug, Serialize)]
pub struct TrainClassifier {
    /// Comma-separated negotiator ids, or a pool directory.
    #[arg(long)]
    pub pool: String,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = negswitch_core::classifier::DEFAULT_WINDOW)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub sessions_per_class: usize,
    #[arg(long, default_value_t = ClassifierConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DatasetManifest<'a> {
    class_ids: &'a [String],
    k: usize,
    sessions_per_class: usize,
    train_windows: Vec<usize>,
    validation_windows: Vec<usize>,
    full_windows: Vec<usize>,
    validation_accuracy: f64,
    epochs: &'a [EpochStats],
}

fn pool_ids(spec: &str) -> Result<Vec<String>> {
    let path = Path::new(spec);
    if path.is_dir() {
        return Ok(StrategyPool::load(path)?.ids());
    }
    let ids: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    ensure!(!ids.is_empty(), "empty pool");
    Ok(ids)
}

pub fn train_classifier_cmd(args: &TrainClassifier) -> Result<()> {
    let dir = out_path(args.out.clone(), "classifier");
    let scenario = load_scenario(&args.scenario)?;
    let ids = pool_ids(&args.pool)?;
    let classes = ids.iter().map(|id| resolve_agent(id)).collect::<Result<Vec<_>>>()?;
    let mut spec = DatasetSpec::new(classes, args.sessions_per_class, args.seed)?;
    spec.k = args.k;
    let dataset = build_dataset(&spec, &scenario)?;
    let config = ClassifierConfig {
        epochs: args.epochs,
        seed: args.seed,
        ..ClassifierConfig::default()
    };
    let (model, stats) = train_classifier(&dataset, &config)?;
    let per_class = |samples: &[negswitch_core::classifier::Sample], full_only: bool| {
        (0..ids.len())
            .map(|c| samples.iter().filter(|s| s.label == c && (s.full || !full_only)).count())
            .collect::<Vec<_>>()
    };
    let all: Vec<_> = dataset.train.iter().chain(&dataset.validation).cloned().collect();
    let manifest = DatasetManifest {
        class_ids: &dataset.class_ids,
        k: dataset.k,
        sessions_per_class: args.sessions_per_class,
        train_windows: per_class(&dataset.train, false),
        validation_windows: per_class(&dataset.validation, false),
        full_windows: per_class(&all, true),
        validation_accuracy: model.validation_accuracy,
        epochs: &stats,
    };
    staged(&dir, |d| {
        model.save(&d.join("classifier.json"))?;
        write_json(&d.join("dataset.json"), &manifest)?;
        write_json(&d.join(CONFIG_FILE), &serde_json::json!({ "args": args, "classifier": config }))
    })?;
    println!("{}: validation accuracy {:.4}", dir.display(), model.validation_accuracy);
    Ok(())
}

// ------------------------------------------------------------------ review

#[derive(Args, Debug, Serialize)]
pub struct Review {
    /// Negotiator id to review, or a label when --strategy is given.
    #[arg(long)]
    pub candidate: String,
    /// Pool directory; created on the first admission.
    #[arg(long)]
    pub pool_dir: PathBuf,
    /// Training and evaluation scenario.
    #[arg(long)]
    pub scenario: PathBuf,
    /// JSON file overriding reviewer and training settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Offer this strategy file to every pool slot instead of training one.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Directory for the review report [default: $NEGSWITCH_OUT_ROOT/review_<candidate>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReviewSettings {
    pub reviewer: ReviewerConfig,
    pub switch: SwitchConfig,
    pub preset: Option<String>,
    pub epochs: Option<usize>,
    pub sessions_per_class: Option<usize>,
    pub classifier: Option<ClassifierConfig>,
}

pub fn review(args: &Review) -> Result<()> {
    let settings: ReviewSettings = match &args.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => ReviewSettings::default(),
    };
    let dir = out_path(args.out.clone(), &format!("review_{}", args.candidate));
    let (id, scenario) = scenario_ref(&args.scenario.to_string_lossy())?;
    let pool = if args.pool_dir.exists() {
        StrategyPool::load(&args.pool_dir).with_context(|| format!("loading pool {}", args.pool_dir.display()))?
    } else {
        StrategyPool::default()
    };
    let sac = sac_preset(settings.preset.as_deref().unwrap_or("desk"), settings.epochs)?;
    let mut trainer = SacPoolTrainer::new(scenario.clone(), id, sac, args.seed);
    if let Some(n) = settings.sessions_per_class {
        trainer.sessions_per_class = n;
    }
    if let Some(c) = &settings.classifier {
        trainer.classifier = c.clone();
    }
    let decision = match &args.strategy {
        Some(path) => {
            let bundle = StrategyBundle::load(path).with_context(|| format!("loading strategy {}", path.display()))?;
            review_new_strategy(&args.candidate, Arc::new(bundle), &pool, &trainer, &scenario, &settings.reviewer)?
        }
        None => {
            if !is_baseline(&args.candidate) {
                bail!("unknown negotiator id {:?}; reviewed negotiators come from the baseline registry", args.candidate);
            }
            review_new_negotiator(&args.candidate, &pool, &trainer, &scenario, &settings.reviewer, &settings.switch)?
        }
    };
    staged(&dir, |d| {
        decision.report.save(&d.join("review.json"))?;
        write_json(&d.join(CONFIG_FILE), &serde_json::json!({ "args": args, "settings": settings }))
    })?;
    if decision.report.verdict == Verdict::Accept {
        decision.pool.save(&args.pool_dir)?;
    }
    let r = &decision.report;
    println!(
        "{}: {:?} (e_s {}, e_f {}); pool {:?}",
        args.candidate,
        r.verdict,
        r.e_s.map_or("-".into(), |e| format!("{:.4}", e.mean)),
        r.e_f.map_or("-".into(), |e| format!("{:.4}", e.mean)),
        decision.pool.ids()
    );
    if let Some(d) = &r.diagnostic {
        println!("  {d}");
    }
    Ok(())
}

// --------------------------------------------------------------- negotiate

#[derive(Args, Debug, Serialize)]
pub struct Negotiate {
    #[arg(long)]
    pub agent_a: String,
    #[arg(long)]
    pub agent_b: String,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_DEADLINE)]
    pub deadline: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OutcomeRow {
    session: usize,
    first_mover: Side,
    end: String,
    agreement: bool,
    rounds_used: usize,
    utility_a: f64,
    utility_b: f64,
}

fn end_label(end: EndReason) -> String {
    match end {
        EndReason::Agreement => "agreement".into(),
        EndReason::Deadline => "deadline".into(),
        EndReason::Walkaway(s) => format!("walkaway_{s:?}").to_lowercase(),
        EndReason::Violation(s) => format!("violation_{s:?}").to_lowercase(),
    }
}

pub fn negotiate(args: &Negotiate) -> Result<()> {
    ensure!(args.sessions > 0, "--sessions must be positive");
    let dir = out_path(args.out.clone(), "negotiation");
    let scenario = load_scenario(&args.scenario)?;
    let a = resolve_agent(&args.agent_a)?;
    let b = resolve_agent(&args.agent_b)?;
    let spec = SessionSpec {
        scenario: &scenario,
        deadline_rounds: args.deadline,
        master_seed: args.seed,
        count: args.sessions,
        alternate_first: true,
    };
    let results = run_many(a.as_ref(), b.as_ref(), &spec)
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("session {i}")))
        .collect::<Result<Vec<_>>>()?;
    staged(&dir, |d| {
        let traces = d.join("traces");
        std::fs::create_dir_all(&traces)?;
        let mut rows = Vec::with_capacity(results.len());
        for (i, (outcome, trace)) in results.iter().enumerate() {
            write_trace_csv(std::fs::File::create(traces.join(format!("session_{i:04}.csv")))?, trace, &scenario)?;
            rows.push(OutcomeRow {
                session: i,
                first_mover: outcome.first_mover,
                end: end_label(outcome.end),
                agreement: outcome.agreement.is_some(),
                rounds_used: outcome.rounds_used,
                utility_a: outcome.utility_a,
                utility_b: outcome.utility_b,
            });
        }
        write_csv(&d.join("outcomes.csv"), &rows)?;
        write_json(&d.join(CONFIG_FILE), args)
    })?;
    let n = results.len() as f64;
    let mean = |f: fn(&negswitch_core::protocol::SessionOutcome) -> f64| results.iter().map(|(o, _)| f(o)).sum::<f64>() / n;
    println!(
        "{}: {} sessions, mean utility A {:.4} B {:.4}, agreement rate {:.2}",
        dir.display(),
        results.len(),
        mean(|o| o.utility_a),
        mean(|o| o.utility_b),
        mean(|o| if o.agreement.is_some() { 1.0 } else { 0.0 })
    );
    Ok(())
}

// -------------------------------------------------------------- tournament

#[derive(Args, Debug, Serialize)]
pub struct Tournament {
    /// JSON tournament specification.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentFile {
    /// Agent references; relative paths are taken from the spec's directory.
    pub agents: Vec<String>,
    /// Scenario references, optionally `id=path`.
    pub scenarios: Vec<String>,
    pub sessions_per_pair: usize,
    #[serde(default = "default_deadline")]
    pub deadline_rounds: usize,
    pub seed: u64,
    #[serde(default = "yes")]
    pub include_self_play: bool,
}

fn default_deadline() -> usize {
    DEFAULT_DEADLINE
}

fn yes() -> bool {
    true
}

/// Rebases a relative path reference onto `base`, keeping any `name=` prefix.
fn rebase(spec: &str, base: &Path) -> String {
    let (prefix, target) = match spec.split_once('=') {
        Some((n, t)) if !n.contains(['/', '\\']) => (format!("{n}="), t),
        _ => (String::new(), spec),
    };
    if is_baseline(target) || Path::new(target).is_absolute() {
        return spec.to_string();
    }
    format!("{prefix}{}", base.join(target).display())
}

pub fn tournament(args: &Tournament) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let file: TournamentFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    let base = args.spec.parent().unwrap_or(Path::new(""));
    let dir = out_path(args.out.clone(), "tournament");
    let agents = file
        .agents
        .iter()
        .map(|a| resolve_agent(&rebase(a, base)))
        .collect::<Result<Vec<_>>>()?;
    let scenarios = file
        .scenarios
        .iter()
        .map(|s| scenario_ref(&rebase(s, base)))
        .collect::<Result<Vec<_>>>()?;
    let t = run_tournament(&TournamentSpec {
        agents,
        scenarios,
        sessions_per_pair: file.sessions_per_pair,
        deadline_rounds: file.deadline_rounds,
        seed: file.seed,
    })?;
    let report = BenchmarkReport::from_tournament(&t, file.include_self_play)?;
    staged(&dir, |d| {
        report.write(d, &t)?;
        write_json(&d.join(CONFIG_FILE), &file)
    })?;
    for f in &report.failures {
        eprintln!("warning: {f}");
    }
    println!("{}: {} sessions", dir.display(), t.records.len());
    Ok(())
}

// ------------------------------------------------------------------ report

#[derive(Args, Debug, Serialize)]
pub struct Report {
    #[arg(long)]
    pub tournament_dir: PathBuf,
}

#[derive(Deserialize)]
struct AgentRow {
    agent: String,
    score: f64,
    std_over_domains: f64,
}

#[derive(Deserialize)]
struct DomainRow {
    domain: String,
    score: f64,
}

#[derive(Deserialize)]
struct PRow {
    benchmark: String,
    focus: String,
    versus: String,
    p_value: f64,
    threshold: f64,
    significant: bool,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| row.with_context(|| format!("parsing {}", path.display()))).collect()
}

fn agent_table(out: &mut String, title: &str, mut rows: Vec<AgentRow>) -> Result<()> {
    rows.sort_by(|a, b| b.score.total_cmp(&a.score));
    writeln!(out, "## {title}\n\n| rank | agent | score | std over domains |\n|---:|---|---:|---:|")?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, "| {} | {} | {:.4} | {:.4} |", i + 1, r.agent, r.score, r.std_over_domains)?;
    }
    writeln!(out)?;
    Ok(())
}

/// Renders the ranked benchmark tables and the significance results.
pub fn render_report(dir: &Path) -> Result<String> {
    let mut out = String::from("# Tournament summary\n\n");
    agent_table(&mut out, "Self utility", read_rows(&dir.join("self_utility.csv"))?)?;
    agent_table(&mut out, "Opponent utility (lower is tougher)", read_rows(&dir.join("opponent_utility.csv"))?)?;
    let mut domains: Vec<DomainRow> = read_rows(&dir.join("domain_utility.csv"))?;
    domains.sort_by(|a, b| b.score.total_cmp(&a.score));
    writeln!(out, "## Domain utility\n\n| domain | score |\n|---|---:|")?;
    for d in &domains {
        writeln!(out, "| {} | {:.4} |", d.domain, d.score)?;
    }
    let p: Vec<PRow> = read_rows(&dir.join("p_values.csv"))?;
    writeln!(out, "\n## Welch tests (Bonferroni corrected)\n\n| benchmark | focus | versus | p | threshold | significant |\n|---|---|---|---:|---:|---|")?;
    for r in &p {
        writeln!(
            out,
            "| {} | {} | {} | {:.3e} | {:.3e} | {} |",
            r.benchmark,
            r.focus,
            r.versus,
            r.p_value,
            r.threshold,
            if r.significant { "yes" } else { "no" }
        )?;
    }
    Ok(out)
}

pub fn report(args: &Report) -> Result<()> {
    let text = render_report(&args.tournament_dir)?;
    let path = args.tournament_dir.join("report.md");
    let tmp = args.tournament_dir.join(".report.md.partial");
    std::fs::write(&tmp, &text)?;
    std::fs::rename(&tmp, &path)?;
    print!("{text}");
    Ok(())
}
