//! Trivial prediction baselines used as evaluation floors.

use log::warn;

use crate::numeric::Array;
use crate::repr::MotionSequence;

/// Repeat the last observed pose for the whole horizon. Returns a
/// (horizon, J, 3) stack.
pub fn baseline_zero_velocity(input: &MotionSequence, horizon: usize) -> Array {
    let joints = input.joints();
    let last = input.pose(input.frames() - 1);
    let mut data = Vec::with_capacity(horizon * joints * 3);
    for _ in 0..horizon {
        data.extend_from_slice(last);
    }
    Array::new(vec![horizon, joints, 3], data).expect("stack sized as T×J×3")
}

/// Extrapolate with the last observed frame difference:
/// `p(t) = p(0) + t·d`. A single-frame input has no difference to use and
/// falls back to the zero-velocity baseline.
pub fn baseline_constant_velocity(input: &MotionSequence, horizon: usize) -> Array {
    if input.frames() < 2 {
        warn!("constant-velocity baseline on a single-frame input; falling back to zero-velocity");
        return baseline_zero_velocity(input, horizon);
    }
    let joints = input.joints();
    let last = input.frames() - 1;
    let mut data = Vec::with_capacity(horizon * joints * 3);
    for t in 1..=horizon {
        for j in 0..joints {
            for a in 0..3 {
                let p = input.at(last, j, a);
                let d = p - input.at(last - 1, j, a);
                data.push(p + t as f64 * d);
            }
        }
    }
    Array::new(vec![horizon, joints, 3], data).expect("stack sized as T×J×3")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_constant_velocity, mpjpe};

    #[test]
    fn both_baselines_exact_on_constant_sequence() {
        let seq = gen_constant_velocity(2, 8, &[[0.0; 3]; 2], 3).unwrap();
        let input = seq.window(0, 5);
        let gt = seq.window(5, 3).as_array();
        for pred in [
            baseline_zero_velocity(&input, 3),
            baseline_constant_velocity(&input, 3),
        ] {
            let errs = mpjpe(&pred, &gt, &[1, 2, 3]).unwrap();
            assert_eq!(errs, vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn zero_velocity_error_grows_linearly_on_linear_motion() {
        // speed ‖(3,4,0)‖ = 5 per frame, so the error at horizon t is 5t
        let seq = gen_constant_velocity(2, 20, &[[3.0, 4.0, 0.0]; 2], 9).unwrap();
        let input = seq.window(0, 10);
        let gt = seq.window(10, 6).as_array();
        let pred = baseline_zero_velocity(&input, 6);
        let errs = mpjpe(&pred, &gt, &[1, 2, 3, 4, 5, 6]).unwrap();
        for (i, err) in errs.iter().enumerate() {
            assert_eq!(*err, 5.0 * (i + 1) as f64);
        }
    }

    #[test]
    fn constant_velocity_baseline_exact_on_linear_motion() {
        let seq = gen_constant_velocity(3, 20, &[[1.0, -2.0, 2.0]; 3], 4).unwrap();
        let input = seq.window(0, 10);
        let gt = seq.window(10, 5).as_array();
        let pred = baseline_constant_velocity(&input, 5);
        let errs = mpjpe(&pred, &gt, &[1, 3, 5]).unwrap();
        assert_eq!(errs, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_frame_input_falls_back_to_zero_velocity() {
        let seq = gen_constant_velocity(1, 4, &[[1.0, 0.0, 0.0]], 2).unwrap();
        let input = seq.window(0, 1);
        let pred = baseline_constant_velocity(&input, 2);
        assert_eq!(pred, baseline_zero_velocity(&input, 2));
    }
}
