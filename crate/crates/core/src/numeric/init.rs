use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use super::{Array, NumericError, ParamStore};

/// Declares one parameter to create: its path, shape, and the fan-in used to
/// size the uniform initialization interval.
#[derive(Clone, Debug)]
pub struct ParamSpec {
    pub path: String,
    pub shape: Vec<usize>,
    pub fan_in: usize,
}

impl ParamSpec {
    pub fn new(path: impl Into<String>, shape: Vec<usize>, fan_in: usize) -> Self {
        ParamSpec {
            path: path.into(),
            shape,
            fan_in,
        }
    }
}

/// Deterministic RNG keyed by a seed and a label.
///
/// Each (seed, label) pair gets an independent stream, so parameter values do
/// not depend on creation order and stay stable when unrelated parameters are
/// added or removed.
pub fn rng_for(seed: u64, label: &str) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Uniform draw in [0, 1) from the top 53 bits of the next u64.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Build a store with every parameter drawn uniformly from
/// [−√(1/fan_in), +√(1/fan_in)].
pub fn build_store(specs: &[ParamSpec], seed: u64) -> Result<ParamStore, NumericError> {
    let mut store = ParamStore::new();
    for spec in specs {
        if spec.fan_in == 0 {
            return Err(NumericError::contract(
                "build_store",
                format!("fan_in must be positive for {:?}", spec.path),
            ));
        }
        let bound = (1.0 / spec.fan_in as f64).sqrt();
        let mut rng = rng_for(seed, &spec.path);
        let len: usize = spec.shape.iter().product();
        let data: Vec<f64> = (0..len)
            .map(|_| (unit_f64(&mut rng) * 2.0 - 1.0) * bound)
            .collect();
        store.insert(&spec.path, Array::new(spec.shape.clone(), data)?)?;
    }
    Ok(store)
}

/// Build a store with every parameter set to zero. Used by tests that need a
/// model whose outputs are exactly its biases.
pub fn build_zero_store(specs: &[ParamSpec]) -> Result<ParamStore, NumericError> {
    let mut store = ParamStore::new();
    for spec in specs {
        store.insert(&spec.path, Array::zeros(&spec.shape))?;
    }
    Ok(store)
}
