//! Hand-built strategies and classifiers with known outputs.
#![allow(dead_code)]

use std::sync::Arc;

use negswitch_core::classifier::{classifier_network, ClassifierModel};
use negswitch_core::domain::*;
use negswitch_core::negotiators::{AcceptancePolicy, Window};
use negswitch_core::sac::StrategyBundle;
use negswitch_neural::{Activation, LayerSpec, Network};

pub const NEVER: AcceptancePolicy = AcceptancePolicy::Time {
    t_acc: 1.0,
    window: Window::All,
};

/// A bundle whose deterministic policy always proposes utility `u` when
/// the reservation value is 0.
pub fn fixed_bundle(u: f64, acceptance: AcceptancePolicy) -> Arc<StrategyBundle> {
    let mut actor = Network::new(
        vec![7],
        vec![LayerSpec::Dense {
            inputs: 7,
            outputs: 2,
            activation: Activation::Linear,
        }],
        0,
    )
    .unwrap();
    let mut p = actor.params_mut();
    p[0].iter_mut().for_each(|w| *w = 0.0);
    p[1].copy_from_slice(&[(2.0 * u - 1.0).atanh(), 0.0]);
    Arc::new(StrategyBundle {
        actor,
        acceptance,
        trained_vs: format!("u{u}"),
        scenario_id: "test".into(),
        config_hash: String::new(),
        seed: 0,
    })
}

/// A classifier whose output is `probs` for every window.
pub fn fixed_classifier_with(probs: &[f64], class_ids: Vec<String>) -> ClassifierModel {
    let mut network = classifier_network(20, probs.len(), 0).unwrap();
    let mut params = network.params_mut();
    params.iter_mut().for_each(|p| p.iter_mut().for_each(|x| *x = 0.0));
    params.last_mut().unwrap().iter_mut().zip(probs).for_each(|(b, p)| *b = p.ln());
    ClassifierModel {
        network,
        class_ids,
        k: 20,
        validation_accuracy: 1.0,
    }
}

pub fn fixed_classifier(probs: &[f64]) -> Arc<ClassifierModel> {
    Arc::new(fixed_classifier_with(probs, (0..probs.len()).map(|i| format!("c{i}")).collect()))
}

/// Single issue with 101 values at utilities 0, 0.01, ..., 1.
pub fn grid_party() -> Party {
    let space = OutcomeSpace::from_cardinalities(&[101]).unwrap();
    let f = UtilityFunction::normalize(
        &RawUtility {
            weights: vec![1.0],
            valuations: vec![(0..=100).map(|i| i as f64 / 100.0).collect()],
        },
        &space,
    )
    .unwrap();
    Party::new(Arc::new(space), PreferenceProfile::new(f, 0.0).unwrap()).unwrap()
}

/// Grid profile for A against the mirrored grid for B.
pub fn grid_scenario() -> Scenario {
    let a = grid_party();
    let mut b = a.profile().utility.as_raw();
    b.valuations[0].reverse();
    let space = (**a.space()).clone();
    let fb = UtilityFunction::normalize(&b, &space).unwrap();
    Scenario::new(space, a.profile().clone(), PreferenceProfile::new(fb, 0.0).unwrap()).unwrap()
}
