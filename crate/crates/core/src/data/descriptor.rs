//! Dataset descriptor files.
//!
//! A descriptor is a JSON file next to the sequence files. It fixes the joint
//! count, frame rate, unit, train/validation/test split lists (sequence ids,
//! one `<id>.txt` file each), and the joint ordering used when laying joints
//! out as tensor rows. Orderings should keep each limb chain contiguous
//! (trunk first, then each limb): for a full-body skeleton that is pelvis,
//! spine, head, right leg, left leg, right arm, left arm. Synthetic chains
//! use the identity order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::repr::JointOrdering;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLists {
    #[serde(default)]
    pub train: Vec<String>,
    #[serde(default)]
    pub validation: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub joints: usize,
    pub frame_rate: f64,
    pub unit: String,
    /// Row order for the skeletal tensors; `ordering[row]` is the source
    /// joint index.
    pub ordering: Vec<usize>,
    pub splits: SplitLists,
}

impl DatasetDescriptor {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.joints == 0 {
            return Err(DataError::Descriptor("joint count must be positive".into()));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(DataError::Descriptor("frame rate must be positive".into()));
        }
        if self.ordering.len() != self.joints {
            return Err(DataError::Descriptor(format!(
                "ordering length {} does not match {} joints",
                self.ordering.len(),
                self.joints
            )));
        }
        JointOrdering::new(self.ordering.clone())
            .map_err(|e| DataError::Descriptor(e.to_string()))?;
        Ok(())
    }

    pub fn joint_ordering(&self) -> JointOrdering {
        JointOrdering::new(self.ordering.clone()).expect("validated ordering")
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path)?;
        let descriptor: DatasetDescriptor = serde_json::from_str(&text)?;
        descriptor.validate()?;
        Ok(descriptor)
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}
