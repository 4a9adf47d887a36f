//! A descriptor plus its loaded sequences, resolved either from files or a
//! generator spec.

use std::collections::BTreeMap;
use std::path::Path;

use super::{
    descriptor::{DatasetDescriptor, SplitLists},
    synth::{generate, GeneratorSpec},
    textio::load_sequence,
    DataError,
};
use crate::repr::MotionSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

pub struct Dataset {
    pub descriptor: DatasetDescriptor,
    sequences: BTreeMap<String, MotionSequence>,
}

impl Dataset {
    /// Load every sequence named in the descriptor's splits from
    /// `<descriptor dir>/<id>.txt`, validating joint count and frame rate.
    pub fn load(descriptor_path: &Path) -> Result<Self, DataError> {
        let descriptor = DatasetDescriptor::load(descriptor_path)?;
        let dir = descriptor_path.parent().unwrap_or_else(|| Path::new("."));
        let mut sequences = BTreeMap::new();
        let ids = descriptor
            .splits
            .train
            .iter()
            .chain(&descriptor.splits.validation)
            .chain(&descriptor.splits.test);
        for id in ids {
            if sequences.contains_key(id) {
                continue;
            }
            let seq = load_sequence(&dir.join(format!("{id}.txt")))?;
            validate_against(&descriptor, id, &seq)?;
            sequences.insert(id.clone(), seq);
        }
        Ok(Dataset {
            descriptor,
            sequences,
        })
    }

    /// Materialize a generated dataset in memory. The last `test_count`
    /// sequences form the test split, the rest train.
    pub fn from_generator(spec: &GeneratorSpec, seed: u64) -> Result<Self, DataError> {
        let generated = generate(spec, seed)?;
        let split_at = spec.sequences - spec.test_count;
        let splits = SplitLists {
            train: generated[..split_at].iter().map(|(id, _)| id.clone()).collect(),
            validation: vec![],
            test: generated[split_at..].iter().map(|(id, _)| id.clone()).collect(),
        };
        let descriptor = DatasetDescriptor {
            name: format!("gen-{}", spec.kind_name()),
            joints: spec.joints,
            frame_rate: 25.0,
            unit: "mm".into(),
            ordering: (0..spec.joints).collect(),
            splits,
        };
        Dataset::from_parts(descriptor, generated)
    }

    pub fn from_parts(
        descriptor: DatasetDescriptor,
        sequences: Vec<(String, MotionSequence)>,
    ) -> Result<Self, DataError> {
        descriptor.validate()?;
        let mut map = BTreeMap::new();
        for (id, seq) in sequences {
            validate_against(&descriptor, &id, &seq)?;
            map.insert(id, seq);
        }
        for id in descriptor
            .splits
            .train
            .iter()
            .chain(&descriptor.splits.validation)
            .chain(&descriptor.splits.test)
        {
            if !map.contains_key(id) {
                return Err(DataError::Descriptor(format!(
                    "split names sequence {id:?} but no such sequence was provided"
                )));
            }
        }
        Ok(Dataset {
            descriptor,
            sequences: map,
        })
    }

    pub fn sequence(&self, id: &str) -> Option<&MotionSequence> {
        self.sequences.get(id)
    }

    /// Sequences of a split, in the descriptor's listed order.
    pub fn split(&self, which: Split) -> Vec<(&str, &MotionSequence)> {
        let ids = match which {
            Split::Train => &self.descriptor.splits.train,
            Split::Validation => &self.descriptor.splits.validation,
            Split::Test => &self.descriptor.splits.test,
        };
        ids.iter()
            .map(|id| {
                (
                    id.as_str(),
                    self.sequences.get(id).expect("validated at construction"),
                )
            })
            .collect()
    }
}

fn validate_against(
    descriptor: &DatasetDescriptor,
    id: &str,
    seq: &MotionSequence,
) -> Result<(), DataError> {
    if seq.joints() != descriptor.joints {
        return Err(DataError::Descriptor(format!(
            "sequence {id:?} has {} joints, descriptor declares {}",
            seq.joints(),
            descriptor.joints
        )));
    }
    if seq.frame_rate() != descriptor.frame_rate {
        return Err(DataError::Descriptor(format!(
            "sequence {id:?} has frame rate {}, descriptor declares {}",
            seq.frame_rate(),
            descriptor.frame_rate
        )));
    }
    Ok(())
}
