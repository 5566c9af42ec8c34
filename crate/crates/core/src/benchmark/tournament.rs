use serde::Serialize;

use super::sum::{compensated_sum, mean, std_dev};
use crate::domain::{Scenario, Side};
use crate::error::{Error, Result};
use crate::protocol::{run_session_with, SessionConfig, SharedFactory};
use crate::seed;

pub struct TournamentSpec {
    pub agents: Vec<SharedFactory>,
    pub scenarios: Vec<(String, Scenario)>,
    pub sessions_per_pair: usize,
    pub deadline_rounds: usize,
    pub seed: u64,
}

/// One session's result from the point of view of the pair `(a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionRecord {
    pub agent_a: usize,
    pub agent_b: usize,
    pub scenario: usize,
    pub session: usize,
    /// `a` held scenario profile B.
    pub swapped: bool,
    pub a_first: bool,
    pub utility_a: f64,
    pub utility_b: f64,
    pub agreement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tournament {
    pub agent_ids: Vec<String>,
    pub scenario_ids: Vec<String>,
    pub records: Vec<SessionRecord>,
    /// Pairs that failed, with the error text.
    pub failures: Vec<(usize, usize, usize, String)>,
}

impl Tournament {
    /// Session-level utilities obtained by `a` against `b` in scenario `d`.
    /// Self-play contributes both sides of each session.
    pub fn samples(&self, a: usize, b: usize, d: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for r in self.records.iter().filter(|r| r.scenario == d) {
            if r.agent_a == a && r.agent_b == b {
                out.push(r.utility_a);
            }
            if r.agent_b == a && r.agent_a == b {
                out.push(r.utility_b);
            }
        }
        out
    }

    /// `U[a][b][d]`; NaN where the pair failed.
    pub fn tensor(&self) -> UtilityTensor {
        let (na, nd) = (self.agent_ids.len(), self.scenario_ids.len());
        let mut mean_u = vec![vec![vec![f64::NAN; nd]; na]; na];
        let mut std_u = mean_u.clone();
        let mut count = vec![vec![vec![0usize; nd]; na]; na];
        for a in 0..na {
            for b in 0..na {
                for d in 0..nd {
                    let s = self.samples(a, b, d);
                    if !s.is_empty() {
                        mean_u[a][b][d] = mean(&s);
                        std_u[a][b][d] = std_dev(&s);
                    }
                    count[a][b][d] = s.len();
                }
            }
        }
        UtilityTensor {
            mean: mean_u,
            std: std_u,
            count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilityTensor {
    pub mean: Vec<Vec<Vec<f64>>>,
    pub std: Vec<Vec<Vec<f64>>>,
    pub count: Vec<Vec<Vec<usize>>>,
}

impl UtilityTensor {
    pub fn agents(&self) -> usize {
        self.mean.len()
    }

    pub fn domains(&self) -> usize {
        self.mean.first().and_then(|r| r.first()).map_or(0, |c| c.len())
    }

    pub fn from_means(mean: Vec<Vec<Vec<f64>>>) -> Self {
        let std = mean
            .iter()
            .map(|r| r.iter().map(|c| vec![0.0; c.len()]).collect())
            .collect();
        let count = mean.iter().map(|r| r.iter().map(|c| vec![1; c.len()]).collect()).collect();
        Self { mean, std, count }
    }

    /// `S_a = (1/(|A||D|)) Σ_d Σ_b U[a][b][d]`, optionally without self-play.
    pub fn self_utility(&self, a: usize, include_self_play: bool) -> Result<f64> {
        let (na, nd) = (self.agents(), self.domains());
        let opponents: Vec<usize> = (0..na).filter(|&b| include_self_play || b != a).collect();
        if opponents.is_empty() || nd == 0 {
            return Err(Error::UndefinedBenchmark("no opponents for the self-utility benchmark".into()));
        }
        let total = compensated_sum(
            (0..nd).flat_map(|d| opponents.iter().map(move |&b| (b, d))).map(|(b, d)| self.mean[a][b][d]),
        );
        Ok(total / (opponents.len() * nd) as f64)
    }

    /// `O_a = (1/((|A|−1)|D|)) Σ_d Σ_{b≠a} U[b][a][d]`.
    pub fn opponent_utility(&self, a: usize) -> Result<f64> {
        let (na, nd) = (self.agents(), self.domains());
        if na < 2 {
            return Err(Error::UndefinedBenchmark("opponent benchmark needs at least two agents".into()));
        }
        let total = compensated_sum(
            (0..nd)
                .flat_map(|d| (0..na).filter(move |&b| b != a).map(move |b| (b, d)))
                .map(|(b, d)| self.mean[b][a][d]),
        );
        Ok(total / ((na - 1) * nd) as f64)
    }

    /// `D_d = (1/|A|) Σ_a (1/|A|) Σ_b U[a][b][d]`.
    pub fn domain_utility(&self, d: usize) -> Result<f64> {
        let na = self.agents();
        if na == 0 {
            return Err(Error::UndefinedBenchmark("no agents".into()));
        }
        let per_agent: Vec<f64> = (0..na)
            .map(|a| compensated_sum((0..na).map(|b| self.mean[a][b][d])) / na as f64)
            .collect();
        Ok(compensated_sum(per_agent) / na as f64)
    }
}

/// Every unordered pair (self-play included) meets in every scenario.
/// Sessions cycle the four combinations of profile assignment and first mover.
pub fn run_tournament(spec: &TournamentSpec) -> Result<Tournament> {
    if spec.agents.len() < 2 {
        return Err(Error::Config("a tournament needs at least two agents".into()));
    }
    if spec.scenarios.is_empty() {
        return Err(Error::Config("a tournament needs at least one scenario".into()));
    }
    if spec.sessions_per_pair == 0 {
        return Err(Error::Config("sessions_per_pair must be positive".into()));
    }
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let swapped: Vec<Scenario> = spec.scenarios.iter().map(|(_, s)| s.swapped()).collect();
    for a in 0..spec.agents.len() {
        for b in a..spec.agents.len() {
            for (d, (_, scenario)) in spec.scenarios.iter().enumerate() {
                let mut cell = Vec::with_capacity(spec.sessions_per_pair);
                let result: Result<()> = (|| {
                    for i in 0..spec.sessions_per_pair {
                        let swap = (i / 2) % 2 == 1;
                        let a_first = i % 2 == 0;
                        let sc = if swap { &swapped[d] } else { scenario };
                        let config = SessionConfig::new(
                            spec.deadline_rounds,
                            seed::derive(spec.seed, &[a as u64, b as u64, d as u64, i as u64]),
                        )?;
                        let mut na = spec.agents[a].create()?;
                        let mut nb = spec.agents[b].create()?;
                        let first = if a_first { Side::A } else { Side::B };
                        let (o, _) = run_session_with(na.as_mut(), nb.as_mut(), sc, &config, first)?;
                        cell.push(SessionRecord {
                            agent_a: a,
                            agent_b: b,
                            scenario: d,
                            session: i,
                            swapped: swap,
                            a_first,
                            utility_a: o.utility_a,
                            utility_b: o.utility_b,
                            agreement: o.agreement.is_some(),
                        });
                    }
                    Ok(())
                })();
                match result {
                    Ok(()) => records.extend(cell),
                    Err(e) => failures.push((a, b, d, e.to_string())),
                }
            }
        }
    }
    Ok(Tournament {
        agent_ids: spec.agents.iter().map(|f| f.id().to_string()).collect(),
        scenario_ids: spec.scenarios.iter().map(|(id, _)| id.clone()).collect(),
        records,
        failures,
    })
}
