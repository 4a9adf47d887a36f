use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Array, Gradients, NumericError};

/// Adam hyperparameters with the usual defaults; the learning rate default
/// matches the training setup used everywhere in this project.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ParamEntry {
    value: Array,
    first_moment: Array,
    second_moment: Array,
    step: u64,
}

/// Named parameters with per-parameter Adam state.
///
/// Paths are unique; iteration order is the sorted path order, so walks over
/// the store are deterministic.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ParamStore {
    entries: BTreeMap<String, ParamEntry>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn insert(&mut self, path: &str, value: Array) -> Result<(), NumericError> {
        if self.entries.contains_key(path) {
            return Err(NumericError::DuplicateParam(path.to_string()));
        }
        let zeros = Array::zeros(value.shape());
        self.entries.insert(
            path.to_string(),
            ParamEntry {
                value,
                first_moment: zeros.clone(),
                second_moment: zeros,
                step: 0,
            },
        );
        Ok(())
    }

    pub fn get(&self, path: &str) -> Result<&Array, NumericError> {
        self.entries
            .get(path)
            .map(|e| &e.value)
            .ok_or_else(|| NumericError::UnknownParam(path.to_string()))
    }

    /// Replace a parameter value, keeping optimizer state. The new value must
    /// match the stored shape.
    pub fn set(&mut self, path: &str, value: Array) -> Result<(), NumericError> {
        let entry = self
            .entries
            .get_mut(path)
            .ok_or_else(|| NumericError::UnknownParam(path.to_string()))?;
        if entry.value.shape() != value.shape() {
            return Err(NumericError::ShapeMismatch {
                op: "ParamStore::set",
                lhs: entry.value.shape().to_vec(),
                rhs: value.shape().to_vec(),
            });
        }
        entry.value = value;
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of stored scalar values.
    pub fn value_count(&self) -> usize {
        self.entries.values().map(|e| e.value.len()).sum()
    }

    /// One bias-corrected Adam update. Parameters without a gradient entry
    /// (nodes absent from the step's graph) are left untouched and their step
    /// counters do not advance.
    pub fn adam_step(&mut self, grads: &Gradients, cfg: &AdamConfig) -> Result<(), NumericError> {
        for (path, grad) in grads.by_param() {
            let entry = self
                .entries
                .get_mut(path)
                .ok_or_else(|| NumericError::UnknownParam(path.clone()))?;
            if entry.value.shape() != grad.shape() {
                return Err(NumericError::ShapeMismatch {
                    op: "adam_step",
                    lhs: entry.value.shape().to_vec(),
                    rhs: grad.shape().to_vec(),
                });
            }
            entry.step += 1;
            let t = entry.step as i32;
            let bias1 = 1.0 - cfg.beta1.powi(t);
            let bias2 = 1.0 - cfg.beta2.powi(t);
            let m = entry.first_moment.data_mut();
            let v = entry.second_moment.data_mut();
            let p = entry.value.data_mut();
            for ((pv, mv), (vv, &g)) in p
                .iter_mut()
                .zip(m.iter_mut())
                .zip(v.iter_mut().zip(grad.data()))
            {
                *mv = cfg.beta1 * *mv + (1.0 - cfg.beta1) * g;
                *vv = cfg.beta2 * *vv + (1.0 - cfg.beta2) * g * g;
                let m_hat = *mv / bias1;
                let v_hat = *vv / bias2;
                *pv -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
        Ok(())
    }
}
