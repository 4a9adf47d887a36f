//! Shared fixtures for the criterion benchmarks.

use deepssm_core::data::gen_sinusoid_chain;
use deepssm_core::numeric::{rng_for, unit_f64, Array};
use deepssm_core::repr::MotionSequence;
use deepssm_core::{DeepSsm, ModelConfig};

pub fn random_array(shape: &[usize], seed: u64, label: &str) -> Array {
    let mut rng = rng_for(seed, label);
    let len = shape.iter().product();
    Array::new(
        shape.to_vec(),
        (0..len).map(|_| unit_f64(&mut rng) * 2.0 - 1.0).collect(),
    )
    .unwrap()
}

/// A mid-sized model and matching data window for end-to-end benchmarks.
pub fn bench_model() -> (DeepSsm, MotionSequence, MotionSequence) {
    let config = ModelConfig {
        input_frames: 10,
        max_horizon: 10,
        channels: 16,
        ..ModelConfig::new(4)
    };
    let model = DeepSsm::new(config, 42).unwrap();
    let seq = gen_sinusoid_chain(4, 20, &[0.5; 4], &[100.0; 4], 7).unwrap();
    (model, seq.window(0, 10), seq.window(10, 10))
}
