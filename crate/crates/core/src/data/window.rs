//! Sliding input/target windows over a sequence.

use crate::repr::MotionSequence;

/// Start frames of every window of `t1` input + `t2` target frames that fits
/// in a sequence of the given length, at the given stride. Windows never
/// cross the sequence end.
pub fn window_starts(frames: usize, t1: usize, t2: usize, stride: usize) -> Vec<usize> {
    let need = t1 + t2;
    if stride == 0 || frames < need {
        return Vec::new();
    }
    (0..=frames - need).step_by(stride).collect()
}

/// Slice one window into its adjacent, non-overlapping input and target
/// parts.
pub fn split_window(
    seq: &MotionSequence,
    start: usize,
    t1: usize,
    t2: usize,
) -> (MotionSequence, MotionSequence) {
    (seq.window(start, t1), seq.window(start + t1, t2))
}
