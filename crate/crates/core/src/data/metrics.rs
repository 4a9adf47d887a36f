//! Mean per-joint position error.

use super::DataError;
use crate::numeric::Array;

/// MPJPE at each requested horizon: the mean over joints of the Euclidean
/// distance between predicted and true positions at step `t` (1-based), in
/// the data's unit. Inputs are (T, J, 3) stacks.
pub fn mpjpe(pred: &Array, gt: &Array, horizons: &[usize]) -> Result<Vec<f64>, DataError> {
    if pred.shape() != gt.shape() || pred.shape().len() != 3 || pred.shape()[2] != 3 {
        return Err(DataError::ShapeMismatch {
            pred: pred.shape().to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let (steps, joints) = (pred.shape()[0], pred.shape()[1]);
    let mut out = Vec::with_capacity(horizons.len());
    for &h in horizons {
        if h == 0 || h > steps {
            return Err(DataError::HorizonOutOfRange {
                horizon: h,
                max: steps,
            });
        }
        let t = h - 1;
        let mut acc = 0.0;
        for j in 0..joints {
            let mut sq = 0.0;
            for a in 0..3 {
                let d = pred.at(&[t, j, a]) - gt.at(&[t, j, a]);
                sq += d * d;
            }
            acc += sq.sqrt();
        }
        out.push(acc / joints as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_for_perfect_prediction() {
        let a = Array::new(vec![2, 2, 3], (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(mpjpe(&a, &a, &[1, 2]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_two_joints() {
        // joint errors (3,4,0) → 5 and (0,0,0) → 0: mean 2.5
        let pred = Array::new(vec![1, 2, 3], vec![3.0, 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let gt = Array::zeros(&[1, 2, 3]);
        assert_eq!(mpjpe(&pred, &gt, &[1]).unwrap(), vec![2.5]);
    }

    #[test]
    fn rejects_out_of_range_horizon() {
        let a = Array::zeros(&[2, 1, 3]);
        assert!(matches!(
            mpjpe(&a, &a, &[3]),
            Err(DataError::HorizonOutOfRange { horizon: 3, max: 2 })
        ));
        assert!(mpjpe(&a, &a, &[0]).is_err());
    }

    #[test]
    fn translation_invariant_under_common_shift() {
        let pred = Array::new(vec![1, 1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        let gt = Array::new(vec![1, 1, 3], vec![0.5, 1.0, 2.0]).unwrap();
        let shift = |a: &Array| {
            let mut b = a.clone();
            for (i, v) in b.data_mut().iter_mut().enumerate() {
                *v += [10.0, -3.0, 0.25][i % 3];
            }
            b
        };
        let base = mpjpe(&pred, &gt, &[1]).unwrap();
        let shifted = mpjpe(&shift(&pred), &shift(&gt), &[1]).unwrap();
        assert!((base[0] - shifted[0]).abs() <= 1e-12);
    }
}
