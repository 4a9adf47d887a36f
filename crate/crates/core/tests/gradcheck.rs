//! Finite-difference verification of every differentiable operation and of
//! the whole network, plus scalar-loop oracle agreement for the forward
//! kernels.

mod common;

use common::{fd_check_inputs, oracle_conv2d, oracle_fully_connected, random_array, toy_config,
    toy_fd_check, toy_problem};
use deepssm_core::numeric::{rng_for, unit_f64, Array};

#[test]
fn conv2d_gradients_match_finite_differences() {
    for seed in 0..3 {
        let x = random_array(&[2, 3, 4], seed, "fd.conv.x");
        let k = random_array(&[3, 2, 3, 3], seed, "fd.conv.k");
        let b = random_array(&[3], seed, "fd.conv.b");
        fd_check_inputs(
            &[x, k, b],
            |tape, ids| {
                let c = tape.conv2d(ids[0], ids[1], ids[2]).unwrap();
                tape.sum_squares(c)
            },
            "conv2d",
        );
    }
}

#[test]
fn leaky_relu_gradient_matches_finite_differences() {
    // keep inputs away from the kink so the finite difference is valid
    let mut rng = rng_for(4, "fd.leaky");
    let data: Vec<f64> = (0..24)
        .map(|_| {
            let v = unit_f64(&mut rng) * 2.0 - 1.0;
            v.signum() * (v.abs() + 1e-3)
        })
        .collect();
    let x = Array::new(vec![24], data).unwrap();
    fd_check_inputs(
        &[x],
        |tape, ids| {
            let y = tape.leaky_relu(ids[0], 0.2).unwrap();
            tape.sum_squares(y)
        },
        "leaky_relu",
    );
}

#[test]
fn leaky_relu_negative_side_slope() {
    // analytic gradient of sum(leaky(x)) at x = −3 is the slope itself
    let x = Array::new(vec![1], vec![-3.0]).unwrap();
    let mut tape = deepssm_core::Tape::new();
    let id = tape.constant(x);
    let y = tape.leaky_relu(id, 0.2).unwrap();
    // square-root-free scalar read-out: sum of squares of a 1-element array
    // would double the slope, so scale instead
    let out = tape.scale(y, 1.0);
    let grads = tape.backward(out).unwrap();
    assert!((grads.wrt(id).unwrap().data()[0] - 0.2).abs() <= 1e-12);
}

#[test]
fn concat_gradient_splits_back_exactly() {
    let a = random_array(&[2, 2, 3], 7, "fd.cat.a");
    let b = random_array(&[1, 2, 3], 7, "fd.cat.b");
    fd_check_inputs(
        &[a, b],
        |tape, ids| {
            let c = tape.concat_channels(ids).unwrap();
            tape.sum_squares(c)
        },
        "concat_channels",
    );
}

#[test]
fn add_sub_scale_gradients_match_finite_differences() {
    let a = random_array(&[5], 9, "fd.lin.a");
    let b = random_array(&[5], 9, "fd.lin.b");
    fd_check_inputs(
        &[a, b],
        |tape, ids| {
            let s = tape.add(ids[0], ids[1]).unwrap();
            let d = tape.sub(s, ids[1]).unwrap();
            let scaled = tape.scale(d, -1.75);
            tape.sum_squares(scaled)
        },
        "add/sub/scale",
    );
}

#[test]
fn fully_connected_gradients_match_finite_differences() {
    let x = random_array(&[2, 3], 11, "fd.fc.x");
    let w = random_array(&[4, 6], 11, "fd.fc.w");
    let b = random_array(&[4], 11, "fd.fc.b");
    fd_check_inputs(
        &[x, w, b],
        |tape, ids| {
            let y = tape.fully_connected(ids[0], ids[1], ids[2]).unwrap();
            tape.sum_squares(y)
        },
        "fully_connected",
    );
}

#[test]
fn tile_and_reshape_gradients_match_finite_differences() {
    let v = random_array(&[2, 3], 13, "fd.tile.v");
    fd_check_inputs(
        &[v],
        |tape, ids| {
            let m = tape.tile_frames(ids[0], 7).unwrap();
            let r = tape.reshape(m, vec![14]).unwrap();
            tape.sum_squares(r)
        },
        "tile_frames/reshape",
    );
}

#[test]
fn end_to_end_toy_model_gradients_match_finite_differences() {
    let problem = toy_problem(toy_config(), 2024);
    let checked = toy_fd_check(&problem);
    // every parameter element of the toy model was verified
    assert_eq!(checked, problem.model.params.value_count());
}

#[test]
fn conv2d_matches_loop_oracle() {
    for seed in 0..20 {
        let x = random_array(&[2, 3, 4], seed, "oracle.conv.x");
        let k = random_array(&[3, 2, 3, 3], seed, "oracle.conv.k");
        let b = random_array(&[3], seed, "oracle.conv.b");
        let fast = deepssm_core::numeric::ops::conv2d(&x, &k, &b).unwrap();
        let slow = oracle_conv2d(&x, &k, &b);
        for (f, s) in fast.data().iter().zip(slow.data()) {
            assert!((f - s).abs() <= 1e-12);
        }
    }
}

#[test]
fn fully_connected_matches_loop_oracle() {
    for seed in 0..20 {
        let x = random_array(&[3, 4], seed, "oracle.fc.x");
        let w = random_array(&[5, 12], seed, "oracle.fc.w");
        let b = random_array(&[5], seed, "oracle.fc.b");
        let fast = deepssm_core::numeric::ops::fully_connected(&x, &w, &b).unwrap();
        let slow = oracle_fully_connected(&x, &w, &b);
        for (f, s) in fast.data().iter().zip(slow.data()) {
            assert!((f - s).abs() <= 1e-12);
        }
    }
}
