//! Synthetic motion generators: desk-scale stand-ins for motion-capture
//! data, fully deterministic per seed.

use super::DataError;
use crate::numeric::{rng_for, unit_f64};
use crate::repr::MotionSequence;

const FRAME_RATE: f64 = 25.0;

/// Linear motion: each joint starts at a random integer-grid position and
/// moves by its fixed per-frame velocity, `p(t) = p(0) + t·c`. Integer start
/// positions keep the trajectory (and its first differences) exactly
/// representable when the velocity components are small integers.
pub fn gen_constant_velocity(
    joints: usize,
    frames: usize,
    velocity: &[[f64; 3]],
    seed: u64,
) -> Result<MotionSequence, DataError> {
    if velocity.len() != joints {
        return Err(DataError::GeneratorSpec(format!(
            "{} velocities for {joints} joints",
            velocity.len()
        )));
    }
    if frames < 2 {
        return Err(DataError::GeneratorSpec("frames must be ≥ 2".into()));
    }
    let mut rng = rng_for(seed, "gen.const-vel");
    let base: Vec<f64> = (0..joints * 3)
        .map(|_| (unit_f64(&mut rng) * 1001.0).floor() - 500.0)
        .collect();
    let mut positions = Vec::with_capacity(frames * joints * 3);
    for t in 0..frames {
        for j in 0..joints {
            for a in 0..3 {
                positions.push(base[j * 3 + a] + t as f64 * velocity[j][a]);
            }
        }
    }
    MotionSequence::new(joints, FRAME_RATE, "mm", positions).map_err(DataError::from)
}

/// Oscillating kinematic chain: joint `j` rests at `(100·j, 0, 0)` and
/// circles in the y–z plane with its own amplitude, frequency (Hz), and a
/// seeded phase, so the chain sways smoothly.
pub fn gen_sinusoid_chain(
    joints: usize,
    frames: usize,
    frequencies: &[f64],
    amplitudes: &[f64],
    seed: u64,
) -> Result<MotionSequence, DataError> {
    if frequencies.len() != joints || amplitudes.len() != joints {
        return Err(DataError::GeneratorSpec(format!(
            "{} frequencies / {} amplitudes for {joints} joints",
            frequencies.len(),
            amplitudes.len()
        )));
    }
    if frames < 2 {
        return Err(DataError::GeneratorSpec("frames must be ≥ 2".into()));
    }
    let mut rng = rng_for(seed, "gen.sinusoid");
    let phases: Vec<f64> = (0..joints)
        .map(|_| unit_f64(&mut rng) * std::f64::consts::TAU)
        .collect();
    let mut positions = Vec::with_capacity(frames * joints * 3);
    for t in 0..frames {
        let time = t as f64 / FRAME_RATE;
        for j in 0..joints {
            let angle = std::f64::consts::TAU * frequencies[j] * time + phases[j];
            positions.push(100.0 * j as f64);
            positions.push(amplitudes[j] * angle.sin());
            positions.push(amplitudes[j] * angle.cos());
        }
    }
    MotionSequence::new(joints, FRAME_RATE, "mm", positions).map_err(DataError::from)
}

/// Parsed form of a `gen:` dataset argument, e.g.
/// `gen:const-vel,joints=4,frames=120,sequences=8,vel=3;4;0,test=2` or
/// `gen:sinusoid,joints=5,frames=200,sequences=6,freq=0.5,amp=100`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub joints: usize,
    pub frames: usize,
    pub sequences: usize,
    pub test_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    ConstVel { velocity: [f64; 3] },
    Sinusoid { frequency: f64, amplitude: f64 },
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let body = text
            .strip_prefix("gen:")
            .ok_or_else(|| DataError::GeneratorSpec("missing gen: prefix".into()))?;
        let mut parts = body.split(',');
        let kind_name = parts
            .next()
            .ok_or_else(|| DataError::GeneratorSpec("missing generator kind".into()))?;

        let mut joints = 4usize;
        let mut frames = 120usize;
        let mut sequences = 8usize;
        let mut test_count = 2usize;
        let mut velocity = [3.0, 4.0, 0.0];
        let mut frequency = 0.5;
        let mut amplitude = 100.0;

        for field in parts {
            let (key, value) = field.split_once('=').ok_or_else(|| {
                DataError::GeneratorSpec(format!("malformed field {field:?}"))
            })?;
            let bad = |e: &dyn std::fmt::Display| {
                DataError::GeneratorSpec(format!("field {key}: {e}"))
            };
            match key {
                "joints" => joints = value.parse().map_err(|e| bad(&e))?,
                "frames" => frames = value.parse().map_err(|e| bad(&e))?,
                "sequences" => sequences = value.parse().map_err(|e| bad(&e))?,
                "test" => test_count = value.parse().map_err(|e| bad(&e))?,
                "vel" => {
                    let comps: Vec<f64> = value
                        .split(';')
                        .map(|v| v.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| bad(&e))?;
                    if comps.len() != 3 {
                        return Err(DataError::GeneratorSpec(
                            "vel needs three ;-separated components".into(),
                        ));
                    }
                    velocity = [comps[0], comps[1], comps[2]];
                }
                "freq" => frequency = value.parse().map_err(|e| bad(&e))?,
                "amp" => amplitude = value.parse().map_err(|e| bad(&e))?,
                other => {
                    return Err(DataError::GeneratorSpec(format!("unknown field {other:?}")))
                }
            }
        }

        let kind = match kind_name {
            "const-vel" => GeneratorKind::ConstVel { velocity },
            "sinusoid" => GeneratorKind::Sinusoid {
                frequency,
                amplitude,
            },
            other => {
                return Err(DataError::GeneratorSpec(format!(
                    "unknown generator {other:?} (expected const-vel or sinusoid)"
                )))
            }
        };
        if sequences == 0 || test_count >= sequences {
            return Err(DataError::GeneratorSpec(
                "need sequences ≥ 1 and test < sequences".into(),
            ));
        }
        Ok(GeneratorSpec {
            kind,
            joints,
            frames,
            sequences,
            test_count,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GeneratorKind::ConstVel { .. } => "const-vel",
            GeneratorKind::Sinusoid { .. } => "sinusoid",
        }
    }
}

/// Generate the spec's sequences, ids `seq_000`, `seq_001`, … Each sequence
/// derives its own seed from the base seed and its index.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Vec<(String, MotionSequence)>, DataError> {
    let mut out = Vec::with_capacity(spec.sequences);
    for i in 0..spec.sequences {
        let seq_seed = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let seq = match &spec.kind {
            GeneratorKind::ConstVel { velocity } => {
                let per_joint = vec![*velocity; spec.joints];
                gen_constant_velocity(spec.joints, spec.frames, &per_joint, seq_seed)?
            }
            GeneratorKind::Sinusoid {
                frequency,
                amplitude,
            } => {
                let freqs = vec![*frequency; spec.joints];
                let amps = vec![*amplitude; spec.joints];
                gen_sinusoid_chain(spec.joints, spec.frames, &freqs, &amps, seq_seed)?
            }
        };
        out.push((format!("seq_{i:03}"), seq));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::compute_velocities;

    #[test]
    fn constant_velocity_has_constant_differences() {
        let c = [[1.0, -2.0, 0.5]; 3];
        let seq = gen_constant_velocity(3, 10, &c, 7).unwrap();
        let v = compute_velocities(&seq);
        for t in 1..10 {
            for j in 0..3 {
                assert_eq!(v.at(&[t, j, 0]), 1.0);
                assert_eq!(v.at(&[t, j, 1]), -2.0);
                assert_eq!(v.at(&[t, j, 2]), 0.5);
            }
        }
    }

    #[test]
    fn zero_velocity_gives_constant_sequence() {
        let seq = gen_constant_velocity(2, 5, &[[0.0; 3]; 2], 3).unwrap();
        for t in 1..5 {
            assert_eq!(seq.pose(t), seq.pose(0));
        }
    }

    #[test]
    fn zero_amplitude_gives_constant_chain() {
        let seq = gen_sinusoid_chain(3, 6, &[0.5; 3], &[0.0; 3], 11).unwrap();
        for t in 1..6 {
            assert_eq!(seq.pose(t), seq.pose(0));
        }
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        let a = gen_sinusoid_chain(2, 8, &[0.5; 2], &[50.0; 2], 5).unwrap();
        let b = gen_sinusoid_chain(2, 8, &[0.5; 2], &[50.0; 2], 5).unwrap();
        let c = gen_sinusoid_chain(2, 8, &[0.5; 2], &[50.0; 2], 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn spec_parsing_round_trip() {
        let spec =
            GeneratorSpec::parse("gen:const-vel,joints=3,frames=60,sequences=4,vel=1;0;0,test=1")
                .unwrap();
        assert_eq!(spec.joints, 3);
        assert_eq!(spec.frames, 60);
        assert_eq!(spec.sequences, 4);
        assert_eq!(spec.test_count, 1);
        assert_eq!(
            spec.kind,
            GeneratorKind::ConstVel {
                velocity: [1.0, 0.0, 0.0]
            }
        );
        assert!(GeneratorSpec::parse("gen:nope").is_err());
        assert!(GeneratorSpec::parse("const-vel").is_err());
    }
}
