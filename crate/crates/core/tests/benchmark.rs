use negswitch_core::benchmark::*;
use negswitch_core::domain::*;
use negswitch_core::negotiators::*;
use negswitch_core::protocol::*;
use negswitch_core::{Error, Result};

/// Opens with outcome 0 and accepts anything standing.
struct AcceptAll(Option<Party>);

impl Negotiator for AcceptAll {
    fn on_session_start(&mut self, party: &Party, _ctx: &SessionContext) -> Result<()> {
        self.0 = Some(party.clone());
        Ok(())
    }

    fn act(&mut self, _t_r: f64, standing: Option<&Outcome>, _own: Option<&Outcome>) -> Action {
        match standing {
            Some(_) => Action::Accept,
            None => Action::Offer(self.0.as_ref().unwrap().outcome(0)),
        }
    }
}

fn accept_all(id: &str) -> SharedFactory {
    FnFactory::shared(id.to_string(), || Ok(Box::new(AcceptAll(None)) as Box<dyn Negotiator>))
}

fn tensor(table: &[&[&[f64]]]) -> UtilityTensor {
    UtilityTensor::from_means(table.iter().map(|r| r.iter().map(|c| c.to_vec()).collect()).collect())
}

#[test]
fn self_utility_hand_table() {
    let u = tensor(&[&[&[0.5], &[0.7]], &[&[0.2], &[0.4]]]);
    assert!((u.self_utility(0, true).unwrap() - 0.6).abs() < 1e-15);
    assert!((u.self_utility(0, false).unwrap() - 0.7).abs() < 1e-15);
    let c = tensor(&[&[&[0.3, 0.3], &[0.3, 0.3]], &[&[0.3, 0.3], &[0.3, 0.3]]]);
    assert!((c.self_utility(1, true).unwrap() - 0.3).abs() < 1e-15);
    assert!((c.domain_utility(1).unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn opponent_utility_hand_table() {
    // U[a][b][d] for 3 agents, 2 domains.
    let u = tensor(&[
        &[&[0.5, 0.6], &[0.9, 0.8], &[0.7, 0.7]],
        &[&[0.2, 0.1], &[0.5, 0.5], &[0.4, 0.6]],
        &[&[0.3, 0.4], &[0.5, 0.3], &[0.5, 0.5]],
    ]);
    // O_0 = mean(U[1][0][·], U[2][0][·]) = (0.2+0.1+0.3+0.4)/4
    assert!((u.opponent_utility(0).unwrap() - 0.25).abs() < 1e-15);
    // O_1 = (0.9+0.8+0.5+0.3)/4
    assert!((u.opponent_utility(1).unwrap() - 0.625).abs() < 1e-15);
    // Lower O ranks as better exploitation: agent 0 concedes least.
    let o: Vec<f64> = (0..3).map(|a| u.opponent_utility(a).unwrap()).collect();
    assert!(o[0] < o[2] && o[2] < o[1]);
    let single = tensor(&[&[&[0.5], &[0.9]], &[&[0.2], &[0.5]]]);
    assert!((single.opponent_utility(0).unwrap() - 0.2).abs() < 1e-15);
    assert!(matches!(tensor(&[&[&[0.5]]]).opponent_utility(0), Err(Error::UndefinedBenchmark(_))));
}

#[test]
fn domain_utility_hand_table() {
    let u = tensor(&[&[&[0.5], &[0.9]], &[&[0.2], &[0.6]]]);
    // (1/2)·((0.5+0.9)/2 + (0.2+0.6)/2) = 0.55
    assert!((u.domain_utility(0).unwrap() - 0.55).abs() < 1e-15);
    let sym = tensor(&[&[&[0.1], &[0.4], &[0.8]], &[&[0.4], &[0.3], &[0.6]], &[&[0.8], &[0.6], &[0.2]]]);
    let mut transposed = sym.clone();
    for a in 0..3 {
        for b in 0..3 {
            transposed.mean[a][b][0] = sym.mean[b][a][0];
        }
    }
    assert!((sym.domain_utility(0).unwrap() - transposed.domain_utility(0).unwrap()).abs() < 1e-15);
}

#[test]
fn welch_matches_reference_values() {
    let x = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
    let y = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
    let r = welch_t_test(&x, &y).unwrap();
    assert!((r.t - -2.455356).abs() < 1e-4);
    assert!((r.df - 24.988529).abs() < 1e-4);
    assert!((r.p_value - 0.021378).abs() < 1e-4);
    let x = [17.2, 20.9, 22.6, 18.1, 21.7, 21.4, 23.5, 24.2, 14.7, 21.8];
    let y = [
        21.5, 22.8, 21.0, 23.0, 21.6, 23.6, 22.5, 20.7, 23.4, 21.8, 20.7, 21.7, 21.5, 22.5, 23.6, 21.5, 22.5, 23.5, 21.5, 21.8,
    ];
    let r = welch_t_test(&x, &y).unwrap();
    assert!((r.t - -1.565434).abs() < 1e-4);
    assert!((r.df - 9.904741).abs() < 1e-4);
    assert!((r.p_value - 0.148842).abs() < 1e-4);
}

#[test]
fn welch_degenerate_cases() {
    assert_eq!(welch_t_test(&[0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap().p_value, 1.0);
    assert_eq!(welch_t_test(&[0.5, 0.5], &[0.7, 0.7]).unwrap().p_value, 0.0);
    assert!(welch_t_test(&[0.5], &[0.5, 0.6]).is_err());
    let same = [0.1, 0.4, 0.3, 0.9];
    let cmp = significance(&same, &[("same".into(), same.to_vec())], 3).unwrap();
    assert!(!cmp[0].significant);
    assert_eq!(cmp[0].threshold, 0.05 / 3.0);
}

#[test]
fn bonferroni_thresholds() {
    let sig4 = |x: f64| format!("{:.3e}", x);
    assert_eq!(sig4(bonferroni_threshold(47)), sig4(0.001064));
    assert_eq!(sig4(bonferroni_threshold(18)), sig4(0.002778));
    assert!((bonferroni_threshold(47) - 0.0011).abs() < 0.00005);
    assert!((bonferroni_threshold(18) - 0.0028).abs() < 0.00005);
}

#[test]
fn compensated_sum_is_exact_on_cancellation() {
    let v = vec![1e16, 1.0, -1e16, 1.0];
    assert_eq!(compensated_sum(v), 2.0);
    let many: Vec<f64> = (0..10_000).map(|i| 0.1 + (i % 7) as f64 * 1e-3).collect();
    // Integer-valued offsets sum exactly in plain floating point.
    let offsets: f64 = (0..10_000).map(|i| (i % 7) as f64).sum::<f64>() / 10_000.0;
    assert!((mean(&many) - (0.1 + offsets * 1e-3)).abs() < 1e-12);
    assert!((std_dev(&[1.0, 2.0, 3.0, 4.0]) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

fn scenarios(n: usize) -> Vec<(String, Scenario)> {
    (0..n).map(|i| (format!("d{i}"), generate_scenario(60 + i as u64, 150 + 100 * i, 0.2).unwrap())).collect()
}

fn baseline_spec(sessions: usize, seed: u64) -> TournamentSpec {
    TournamentSpec {
        agents: BASELINE_IDS.iter().map(|id| baseline_factory(id).unwrap()).collect(),
        scenarios: scenarios(2),
        sessions_per_pair: sessions,
        deadline_rounds: 30,
        seed,
    }
}

#[test]
fn benchmarks_equal_raw_log_reaggregation() {
    let t = run_tournament(&baseline_spec(12, 1)).unwrap();
    assert!(t.failures.is_empty());
    let (na, nd) = (3, 2);
    // Brute force straight from the session records.
    let mut u = vec![vec![vec![(0.0, 0usize); nd]; na]; na];
    for r in &t.records {
        let cell = &mut u[r.agent_a][r.agent_b][r.scenario];
        cell.0 += r.utility_a;
        cell.1 += 1;
        let cell = &mut u[r.agent_b][r.agent_a][r.scenario];
        cell.0 += r.utility_b;
        cell.1 += 1;
    }
    let m = |a: usize, b: usize, d: usize| u[a][b][d].0 / u[a][b][d].1 as f64;
    let tensor = t.tensor();
    for a in 0..na {
        let s: f64 = (0..nd).flat_map(|d| (0..na).map(move |b| (b, d))).map(|(b, d)| m(a, b, d)).sum::<f64>() / (na * nd) as f64;
        assert!((tensor.self_utility(a, true).unwrap() - s).abs() <= 1e-12);
        let o: f64 = (0..nd)
            .flat_map(|d| (0..na).filter(move |&b| b != a).map(move |b| (b, d)))
            .map(|(b, d)| m(b, a, d))
            .sum::<f64>()
            / ((na - 1) * nd) as f64;
        assert!((tensor.opponent_utility(a).unwrap() - o).abs() <= 1e-12);
    }
    for d in 0..nd {
        let dd: f64 = (0..na).map(|a| (0..na).map(|b| m(a, b, d)).sum::<f64>() / na as f64).sum::<f64>() / na as f64;
        assert!((tensor.domain_utility(d).unwrap() - dd).abs() <= 1e-12);
    }
    // Self-play contributes both sides of each session.
    assert_eq!(tensor.count[0][0][0], 24);
    assert_eq!(tensor.count[0][1][0], 12);
}

#[test]
fn tournament_cycles_roles_and_is_deterministic() {
    let a = run_tournament(&baseline_spec(8, 3)).unwrap();
    let b = run_tournament(&baseline_spec(8, 3)).unwrap();
    assert_eq!(a.records, b.records);
    let cell: Vec<_> = a.records.iter().filter(|r| r.agent_a == 0 && r.agent_b == 1 && r.scenario == 0).collect();
    assert_eq!(cell.iter().filter(|r| r.swapped).count(), 4);
    assert_eq!(cell.iter().filter(|r| r.a_first).count(), 4);
    assert!(cell.iter().any(|r| r.swapped && r.a_first));
    for r in &a.records {
        assert!((0.0..=1.0).contains(&r.utility_a) && (0.0..=1.0).contains(&r.utility_b));
    }
}

#[test]
fn accept_all_agents_get_first_bid_utility() {
    let sc = scenarios(1);
    let spec = TournamentSpec {
        agents: vec![accept_all("x"), accept_all("y")],
        scenarios: sc.clone(),
        sessions_per_pair: 8,
        deadline_rounds: 10,
        seed: 0,
    };
    let t = run_tournament(&spec).unwrap();
    let s = &sc[0].1;
    let first = s.party(Side::A).outcome(0);
    for r in &t.records {
        assert!(r.agreement);
        let (ua, ub) = if r.swapped {
            (s.party(Side::B).utility(&first).unwrap(), s.party(Side::A).utility(&first).unwrap())
        } else {
            (s.party(Side::A).utility(&first).unwrap(), s.party(Side::B).utility(&first).unwrap())
        };
        assert_eq!((r.utility_a, r.utility_b), (ua, ub));
    }
    assert!(t.tensor().mean.iter().flatten().flatten().all(|x| x.is_finite()));
}

#[test]
fn identical_agents_are_symmetric() {
    let spec = TournamentSpec {
        agents: vec![baseline_factory(RANDOM).unwrap(), baseline_factory(BOULWARE).unwrap(), baseline_factory(BOULWARE).unwrap()],
        scenarios: scenarios(1),
        sessions_per_pair: 40,
        deadline_rounds: 30,
        seed: 8,
    };
    let t = run_tournament(&spec).unwrap();
    let u = t.tensor();
    for (a, b) in [(1, 2), (0, 0)] {
        let diff = (u.mean[a][b][0] - u.mean[b][a][0]).abs();
        let se = ((u.std[a][b][0].powi(2) + u.std[b][a][0].powi(2)) / u.count[a][b][0] as f64).sqrt();
        assert!(diff <= 3.0 * se + 1e-12, "{diff} vs {se}");
    }
}

#[test]
fn report_files_and_shapes() {
    let spec = TournamentSpec {
        agents: BASELINE_IDS.iter().map(|id| baseline_factory(id).unwrap()).collect(),
        scenarios: scenarios(5),
        sessions_per_pair: 4,
        deadline_rounds: 20,
        seed: 2,
    };
    let t = run_tournament(&spec).unwrap();
    let report = BenchmarkReport::from_tournament(&t, true).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path(), &t).unwrap();
    let rows = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap().lines().count() - 1;
    assert_eq!(rows("self_utility.csv"), 3);
    assert_eq!(rows("opponent_utility.csv"), 3);
    assert_eq!(rows("domain_utility.csv"), 5);
    assert_eq!(rows("long.csv"), 3 * 3 * 5);
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("p_values.csv").exists());
    for r in &report.p_values {
        let m = if r.benchmark == "D" { 5 } else { 2 };
        assert_eq!(r.threshold, 0.05 / m as f64);
        assert_eq!(r.significant, r.p_value < r.threshold);
    }
    assert_eq!(report, BenchmarkReport::from_tournament(&t, true).unwrap());
    assert!(run_tournament(&TournamentSpec { agents: vec![accept_all("solo")], ..spec }).is_err());
}
