use std::sync::Arc;

use negswitch_core::domain::*;
use negswitch_core::negotiators::*;
use negswitch_core::rl::*;
use negswitch_core::sac::*;
use negswitch_core::seed;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn tiny() -> SacConfig {
    SacConfig {
        epochs: 200,
        initial_collect_steps: 50,
        replay_capacity: 1000,
        batch_size: 8,
        critic_layers: vec![6],
        actor_layers: vec![5, 4],
        lr_actor: 1e-3,
        lr_critic: 1e-3,
        eval_interval: 100,
        eval_sessions: 3,
        deadline_rounds: 20,
        ..SacConfig::desk()
    }
}

/// Zeroes every parameter, then sets the output-layer bias.
fn constant(net: &mut negswitch_neural::Network, bias: &[f64]) {
    let mut params = net.params_mut();
    for p in params.iter_mut() {
        p.iter_mut().for_each(|x| *x = 0.0);
    }
    params.last_mut().unwrap().copy_from_slice(bias);
}

fn transition(rng: &mut impl Rng, terminal: bool) -> Transition {
    let mut s = [0.0; 7];
    let mut n = [0.0; 7];
    s.iter_mut().chain(n.iter_mut()).for_each(|x| *x = rng.random());
    Transition {
        state: s,
        action: rng.random_range(-1.0..1.0),
        reward: rng.random(),
        next_state: n,
        terminal,
    }
}

fn normals(seed_value: u64, n: usize) -> Vec<f64> {
    let mut rng = seed::rng(seed::derive(seed_value, &[4]));
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn log_prob_matches_monte_carlo_density() {
    let mut agent = SacAgent::new(tiny(), 3).unwrap();
    let (mu, log_std) = (0.3, -0.5);
    constant(&mut agent.actor, &[mu, log_std]);
    let state = [0.5; 7];
    let n = 100_000;
    let mut samples: Vec<f64> = (0..n).map(|_| agent.sample_action(&state, true).unwrap().0).collect();
    samples.sort_by(f64::total_cmp);

    // Numerical CDF from integrating exp(log π) over the action axis.
    let sigma = f64::exp(log_std);
    let grid: Vec<(f64, f64)> = (0..=40_000)
        .map(|i| {
            let x = mu + sigma * (-9.0 + 18.0 * i as f64 / 40_000.0);
            let z = (x - mu) / sigma;
            (x.tanh(), squashed_log_prob(z, log_std, x).exp())
        })
        .collect();
    let mut cdf = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (grid[i].1 + grid[i - 1].1) * (grid[i].0 - grid[i - 1].0);
    }
    assert!((cdf.last().unwrap() - 1.0).abs() < 1e-4, "density integrates to {}", cdf.last().unwrap());
    let mut j = 0;
    let mut d: f64 = 0.0;
    for (i, a) in samples.iter().enumerate() {
        while j + 1 < grid.len() && grid[j + 1].0 < *a {
            j += 1;
        }
        let f = cdf[j];
        d = d.max((f - i as f64 / n as f64).abs()).max((f - (i + 1) as f64 / n as f64).abs());
    }
    // Kolmogorov critical value at the 0.001 level.
    assert!(d < 1.95 / (n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn vanishing_sigma_makes_modes_coincide() {
    let mut agent = SacAgent::new(tiny(), 3).unwrap();
    constant(&mut agent.actor, &[0.4, LOG_STD_MIN]);
    let s = [0.2; 7];
    let (det, _) = agent.sample_action(&s, false).unwrap();
    for _ in 0..10 {
        let (sto, _) = agent.sample_action(&s, true).unwrap();
        assert!((sto - det).abs() < 1e-7);
        assert!(squash_action(sto, 0.25) > 0.25 && squash_action(sto, 0.25) <= 1.0);
    }
    assert_eq!(det, 0.4f64.tanh());
}

#[test]
fn log_std_is_clamped() {
    let mut agent = SacAgent::new(tiny(), 3).unwrap();
    constant(&mut agent.actor, &[0.0, 50.0]);
    let (_, lp_high) = agent.sample_action(&[0.0; 7], false).unwrap();
    constant(&mut agent.actor, &[0.0, LOG_STD_MAX]);
    let (_, lp_max) = agent.sample_action(&[0.0; 7], false).unwrap();
    assert_eq!(lp_high, lp_max);
}

#[test]
fn critic_target_hand_computation() {
    let cfg = SacConfig { gamma: 0.9, ..tiny() };
    let mut agent = SacAgent::new(cfg, 17).unwrap();
    let (mu, log_std) = (0.2, -1.0);
    constant(&mut agent.actor, &[mu, log_std]);
    constant(&mut agent.targets[0], &[0.4]);
    constant(&mut agent.targets[1], &[0.7]);
    agent.log_alpha = 0.5f64.ln();
    let t = Transition {
        state: [0.1; 7],
        action: 0.3,
        reward: 0.25,
        next_state: [0.2; 7],
        terminal: false,
    };
    let z = normals(17, 1)[0];
    let x = mu + log_std.exp() * z;
    let a = x.tanh();
    let logp = -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln() - log_std - (1.0 - a * a).ln();
    let expected = 0.25 + 0.9 * (0.4 - 0.5 * logp);
    let y = agent.critic_targets(&[&t]).unwrap();
    assert!((y[0] - expected).abs() < 1e-9, "{} vs {expected}", y[0]);

    let terminal = Transition { terminal: true, ..t.clone() };
    assert_eq!(agent.critic_targets(&[&terminal]).unwrap()[0], 0.25);
    agent.config.gamma = 0.0;
    assert_eq!(agent.critic_targets(&[&t]).unwrap()[0], 0.25);
}

#[test]
fn actor_gradient_matches_finite_differences() {
    let mut rng = seed::rng(5);
    for trial in 0..4u64 {
        let mut agent = SacAgent::new(tiny(), 40 + trial).unwrap();
        agent.log_alpha = 0.3f64.ln();
        // Zero biases can place a pre-activation exactly on the ReLU kink.
        for net in std::iter::once(&mut agent.actor).chain(agent.critics.iter_mut()) {
            for (k, p) in net.params_mut().into_iter().enumerate() {
                if k % 2 == 1 {
                    p.iter_mut().for_each(|b| *b = rng.random_range(-0.2..0.2));
                }
            }
        }
        let states: Vec<RlState> = (0..6).map(|_| transition(&mut rng, false).state).collect();
        let noise: Vec<f64> = (0..6).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (_, grads, _) = agent.actor_objective(&states, &noise).unwrap();
        let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();
        let h = 1e-6;
        let mut numeric = Vec::with_capacity(analytic.len());
        let sizes: Vec<usize> = agent.actor.params().iter().map(|p| p.len()).collect();
        for (b, &len) in sizes.iter().enumerate() {
            for i in 0..len {
                let orig = agent.actor.params()[b][i];
                agent.actor.params_mut()[b][i] = orig + h;
                let up = agent.actor_objective(&states, &noise).unwrap().0;
                agent.actor.params_mut()[b][i] = orig - h;
                let down = agent.actor_objective(&states, &noise).unwrap().0;
                agent.actor.params_mut()[b][i] = orig;
                numeric.push((up - down) / (2.0 * h));
            }
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        assert!(diff <= 1e-3 * norm.max(1e-8), "relative error {}", diff / norm);
    }
}

#[test]
fn alpha_gradient_vanishes_at_target_entropy() {
    let mut agent = SacAgent::new(tiny(), 8).unwrap();
    let mut rng = seed::rng(1);
    let batch: Vec<Transition> = (0..8).map(|_| transition(&mut rng, false)).collect();
    let refs: Vec<&Transition> = batch.iter().collect();
    let states: Vec<RlState> = batch.iter().map(|t| t.state).collect();
    // A fresh agent's first draws are exactly the actor-update noise.
    let (_, _, logp) = agent.actor_objective(&states, &normals(8, 8)).unwrap();
    agent.config.target_entropy = -logp.iter().sum::<f64>() / 8.0;
    let before = agent.log_alpha;
    agent.actor_alpha_update(&refs).unwrap();
    assert!((agent.log_alpha - before).abs() < 1e-9);
}

#[test]
fn alpha_adapts_and_stays_positive() {
    let mut agent = SacAgent::new(SacConfig { target_entropy: 5.0, ..tiny() }, 2).unwrap();
    let mut rng = seed::rng(2);
    let batch: Vec<Transition> = (0..64).map(|i| transition(&mut rng, i % 7 == 0)).collect();
    let mut buffer = ReplayBuffer::new(64);
    batch.into_iter().for_each(|t| buffer.push(t));
    let start = agent.alpha();
    for _ in 0..10_000 {
        let mut r = seed::rng(rng.random());
        let b = buffer.sample(&mut r, 8);
        let stats = agent.train_step(&b).unwrap();
        assert!(stats.alpha > 0.0 && stats.is_finite());
    }
    assert!(agent.alpha() > 0.0);
    assert!((agent.alpha() - start).abs() > 1e-3);
}

#[test]
fn soft_update_arithmetic() {
    let mut agent = SacAgent::new(tiny(), 1).unwrap();
    for k in 0..2 {
        agent.critics[k].params_mut().into_iter().for_each(|p| p.iter_mut().for_each(|x| *x = 1.0));
        agent.targets[k].params_mut().into_iter().for_each(|p| p.iter_mut().for_each(|x| *x = 0.0));
    }
    agent.soft_update().unwrap();
    for p in agent.targets[0].params() {
        assert!(p.iter().all(|x| (x - 0.005).abs() < 1e-15));
    }
    for _ in 1..100 {
        agent.soft_update().unwrap();
    }
    let expected = 1.0 - 0.995f64.powi(100);
    for p in agent.targets[1].params() {
        assert!(p.iter().all(|x| (x - expected).abs() < 1e-12));
    }
    agent.config.tau = 1.0;
    agent.soft_update().unwrap();
    assert_eq!(agent.targets[0], agent.critics[0]);
}

#[test]
fn replay_buffer_ring_and_uniformity() {
    let mut rng = seed::rng(3);
    let mut buffer = ReplayBuffer::new(10);
    assert!(buffer.is_empty() && buffer.sample_indices(&mut rng, 3).is_empty());
    let items: Vec<Transition> = (0..25).map(|_| transition(&mut rng, false)).collect();
    for t in &items {
        buffer.push(t.clone());
        assert!(buffer.len() <= buffer.capacity());
    }
    assert_eq!(buffer.len(), 10);
    let kept: Vec<&Transition> = (0..10).map(|i| buffer.get(i).unwrap()).collect();
    for t in &items[15..] {
        assert!(kept.contains(&t));
    }
    let mut counts = [0usize; 10];
    let n = 100_000;
    for i in buffer.sample_indices(&mut rng, n) {
        counts[i] += 1;
    }
    let e = n as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(1.0 - ChiSquared::new(9.0).unwrap().cdf(chi2) > 0.001, "chi2 {chi2}");
}

fn request(config: SacConfig, seed_value: u64) -> TrainingRequest {
    let s = generate_scenario(9, 200, 0.2).unwrap();
    TrainingRequest {
        opponent: baseline_factory(BOULWARE).unwrap(),
        space: s.space().clone(),
        own_profile: s.party(Side::A).profile().clone(),
        scenario_id: "tiny".into(),
        config,
        seed: seed_value,
    }
}

#[test]
fn zero_epochs_returns_initial_policy() {
    let cfg = SacConfig { epochs: 0, ..tiny() };
    let out = train(&request(cfg.clone(), 6)).unwrap();
    let fresh = SacAgent::new(cfg.clone(), seed::derive(6, &[1])).unwrap();
    assert_eq!(out.bundle.actor, fresh.actor);
    assert_eq!(out.curve.len(), 1);
    assert_eq!(out.bundle.trained_vs, BOULWARE);
    assert_eq!(out.bundle.config_hash, cfg.hash());
    assert_eq!(out.bundle.acceptance, AcceptancePolicy::default());
}

#[test]
fn training_is_deterministic_and_logs_curve() {
    let a = train(&request(tiny(), 9)).unwrap();
    let b = train(&request(tiny(), 9)).unwrap();
    assert_eq!(a.bundle.actor, b.bundle.actor);
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.curve.iter().map(|r| r.iteration).collect::<Vec<_>>(), vec![0, 100, 200]);
    assert!(a.curve.iter().all(|r| r.critic_loss.is_finite() && r.alpha > 0.0));
    let c = train(&request(tiny(), 10)).unwrap();
    assert_ne!(a.bundle.actor, c.bundle.actor);
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &a.curve).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iteration,mean_reward,mean_utility,agreement_rate,alpha,critic_loss,actor_loss,alpha_loss"));
}

#[test]
fn bundle_round_trip_and_policy() {
    let out = train(&request(SacConfig { epochs: 0, ..tiny() }, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    out.bundle.save(&path).unwrap();
    let back = StrategyBundle::load(&path).unwrap();
    assert_eq!(back.to_json().unwrap(), out.bundle.to_json().unwrap());
    let s = [0.3; 7];
    let raw = back.raw_action(&s);
    let mut agent = SacAgent::new(SacConfig { epochs: 0, ..tiny() }, seed::derive(1, &[1])).unwrap();
    assert_eq!(raw, agent.sample_action(&s, false).unwrap().0);
    assert!(StrategyBundle::from_json("{\"format\":\"other\"}").is_err());
    let f = bundle_factory("x", Arc::new(back));
    assert_eq!(f.id(), "x");
}

#[test]
fn config_presets_and_validation() {
    let full = SacConfig::full();
    assert_eq!((full.batch_size, full.replay_capacity, full.initial_collect_steps), (128, 1_000_000, 500));
    assert_eq!((full.lr_actor, full.lr_critic, full.lr_alpha, full.tau, full.gamma), (3e-5, 3e-2, 3e-3, 0.005, 0.99));
    assert_eq!(full.critic_layers, vec![256, 512]);
    assert_eq!(full.actor_layers, vec![256, 512, 512]);
    assert_eq!(full.target_entropy, -1.0);
    let desk = SacConfig::preset("desk").unwrap();
    assert_eq!(desk.epochs + desk.initial_collect_steps, 20_000);
    assert_eq!(desk.critic_layers, vec![64, 64]);
    assert!(SacConfig::preset("huge").is_err());
    assert!(SacConfig { tau: 0.0, ..desk.clone() }.validate().is_err());
    assert!(SacConfig { gamma: 1.5, ..desk.clone() }.validate().is_err());
    assert_ne!(desk.hash(), full.hash());
}
