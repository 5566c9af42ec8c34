use std::path::Path;

use serde::Serialize;

use super::significance::{significance, Comparison};
use super::sum::std_dev;
use super::tournament::{Tournament, UtilityTensor};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgentScore {
    pub agent: String,
    pub score: f64,
    /// Standard deviation of the per-domain values.
    pub std_over_domains: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainScore {
    pub domain: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PValueRow {
    pub benchmark: &'static str,
    pub focus: String,
    pub versus: String,
    pub p_value: f64,
    pub threshold: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LongRow {
    pub agent: String,
    pub opponent: String,
    pub domain: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub include_self_play: bool,
    pub self_utility: Vec<AgentScore>,
    pub opponent_utility: Vec<AgentScore>,
    pub domain_utility: Vec<DomainScore>,
    pub p_values: Vec<PValueRow>,
    pub long: Vec<LongRow>,
    pub failures: Vec<String>,
}

fn per_domain(tensor: &UtilityTensor, f: impl Fn(&UtilityTensor) -> Result<f64>) -> Result<Vec<f64>> {
    (0..tensor.domains())
        .map(|d| {
            let single = UtilityTensor {
                mean: tensor.mean.iter().map(|r| r.iter().map(|c| vec![c[d]]).collect()).collect(),
                std: tensor.std.iter().map(|r| r.iter().map(|c| vec![c[d]]).collect()).collect(),
                count: tensor.count.iter().map(|r| r.iter().map(|c| vec![c[d]]).collect()).collect(),
            };
            f(&single)
        })
        .collect()
}

fn push_rows(rows: &mut Vec<PValueRow>, benchmark: &'static str, focus: &str, cmp: Vec<Comparison>) {
    rows.extend(cmp.into_iter().map(|c| PValueRow {
        benchmark,
        focus: focus.to_string(),
        versus: c.label,
        p_value: c.p_value,
        threshold: c.threshold,
        significant: c.significant,
    }));
}

impl BenchmarkReport {
    /// Pure function of the tournament records.
    pub fn from_tournament(t: &Tournament, include_self_play: bool) -> Result<Self> {
        let tensor = t.tensor();
        let (na, nd) = (t.agent_ids.len(), t.scenario_ids.len());
        let mut self_utility = Vec::with_capacity(na);
        let mut opponent_utility = Vec::with_capacity(na);
        for a in 0..na {
            let s_d = per_domain(&tensor, |u| u.self_utility(a, include_self_play))?;
            let o_d = per_domain(&tensor, |u| u.opponent_utility(a))?;
            self_utility.push(AgentScore {
                agent: t.agent_ids[a].clone(),
                score: tensor.self_utility(a, include_self_play)?,
                std_over_domains: std_dev(&s_d),
            });
            opponent_utility.push(AgentScore {
                agent: t.agent_ids[a].clone(),
                score: tensor.opponent_utility(a)?,
                std_over_domains: std_dev(&o_d),
            });
        }
        let domain_utility = (0..nd)
            .map(|d| {
                Ok(DomainScore {
                    domain: t.scenario_ids[d].clone(),
                    score: tensor.domain_utility(d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let own_samples = |a: usize, domains: &[usize]| -> Vec<f64> {
            (0..na)
                .filter(|&b| include_self_play || b != a)
                .flat_map(|b| domains.iter().flat_map(move |&d| t.samples(a, b, d)))
                .collect()
        };
        let against_samples = |a: usize| -> Vec<f64> {
            (0..na)
                .filter(|&b| b != a)
                .flat_map(|b| (0..nd).flat_map(move |d| t.samples(b, a, d)))
                .collect()
        };
        let all_d: Vec<usize> = (0..nd).collect();
        let mut p_values = Vec::new();
        for a in 0..na {
            let others: Vec<usize> = (0..na).filter(|&b| b != a).collect();
            let s_groups = others
                .iter()
                .map(|&b| (t.agent_ids[b].clone(), own_samples(b, &all_d)))
                .filter(|(_, s)| s.len() >= 2)
                .collect::<Vec<_>>();
            let focus = own_samples(a, &all_d);
            if focus.len() >= 2 {
                push_rows(&mut p_values, "S", &t.agent_ids[a], significance(&focus, &s_groups, na - 1)?);
            }
            let o_groups = others
                .iter()
                .map(|&b| (t.agent_ids[b].clone(), against_samples(b)))
                .filter(|(_, s)| s.len() >= 2)
                .collect::<Vec<_>>();
            let focus = against_samples(a);
            if focus.len() >= 2 {
                push_rows(&mut p_values, "O", &t.agent_ids[a], significance(&focus, &o_groups, na - 1)?);
            }
            for d in 0..nd {
                let focus = own_samples(a, &[d]);
                let rest: Vec<f64> = others.iter().flat_map(|&b| own_samples(b, &[d])).collect();
                if focus.len() >= 2 && rest.len() >= 2 {
                    push_rows(
                        &mut p_values,
                        "D",
                        &t.agent_ids[a],
                        significance(&focus, &[(t.scenario_ids[d].clone(), rest)], nd)?,
                    );
                }
            }
        }
        let mut long = Vec::new();
        for a in 0..na {
            for b in 0..na {
                for d in 0..nd {
                    long.push(LongRow {
                        agent: t.agent_ids[a].clone(),
                        opponent: t.agent_ids[b].clone(),
                        domain: t.scenario_ids[d].clone(),
                        mean: tensor.mean[a][b][d],
                        std: tensor.std[a][b][d],
                        n: tensor.count[a][b][d],
                    });
                }
            }
        }
        let failures = t
            .failures
            .iter()
            .map(|(a, b, d, e)| format!("{} vs {} in {}: {e}", t.agent_ids[*a], t.agent_ids[*b], t.scenario_ids[*d]))
            .collect();
        Ok(Self {
            include_self_play,
            self_utility,
            opponent_utility,
            domain_utility,
            p_values,
            long,
            failures,
        })
    }

    /// Writes the CSV matrices, the long-format table and a JSON summary.
    pub fn write(&self, dir: &Path, tournament: &Tournament) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        fn csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
            let mut w = csv::Writer::from_path(path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
        csv_file(&dir.join("self_utility.csv"), &self.self_utility)?;
        csv_file(&dir.join("opponent_utility.csv"), &self.opponent_utility)?;
        csv_file(&dir.join("domain_utility.csv"), &self.domain_utility)?;
        csv_file(&dir.join("p_values.csv"), &self.p_values)?;
        csv_file(&dir.join("long.csv"), &self.long)?;
        csv_file(&dir.join("sessions.csv"), &tournament.records)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
