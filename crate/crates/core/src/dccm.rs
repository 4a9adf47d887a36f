//! Densely connected convolutional module, the backbone block of the
//! encoder.
//!
//! The block stacks five 3×3 convolution layers. Layer 1 is a plain
//! convolution of the input. Every later layer `l` fuses the 1×1-projected
//! outputs of layers 0..l−2 together with the raw output of layer l−1:
//! the inputs are concatenated on channels, mixed by a 1×1 fusion
//! convolution, then passed through the layer's 3×3 convolution and a leaky
//! rectifier. Projections are per source layer and reused by every later
//! layer, so layer `l` receives exactly l−1 projected paths.

use crate::numeric::{BoundParams, NodeId, NumericError, ParamSpec, Tape};

/// Number of convolution layers in the block.
pub const LAYERS: usize = 5;

/// Shape of one block: uniform internal channel width and the rectifier
/// slope shared with the rest of the network.
#[derive(Clone, Copy, Debug)]
pub struct DccmConfig {
    pub channels: usize,
    pub slope: f64,
}

/// Parameters for one block under `prefix`, for an input with `in_channels`.
pub fn param_specs(prefix: &str, in_channels: usize, cfg: &DccmConfig) -> Vec<ParamSpec> {
    let n = cfg.channels;
    let mut specs = Vec::new();
    let mut conv = |name: String, out_c: usize, in_c: usize, k: usize| {
        let fan_in = in_c * k * k;
        specs.push(ParamSpec::new(
            format!("{prefix}.{name}.kernel"),
            vec![out_c, in_c, k, k],
            fan_in,
        ));
        specs.push(ParamSpec::new(
            format!("{prefix}.{name}.bias"),
            vec![out_c],
            fan_in,
        ));
    };
    conv("main1".to_string(), n, in_channels, 3);
    for l in 2..=LAYERS {
        conv(format!("fuse{l}"), n, l * n, 1);
        conv(format!("main{l}"), n, n, 3);
    }
    // projections g_i for source layers 0..=3; layer 0 sees the raw input
    conv("proj0".to_string(), n, in_channels, 1);
    for i in 1..LAYERS - 1 {
        conv(format!("proj{i}"), n, n, 1);
    }
    specs
}

fn conv(
    tape: &mut Tape,
    bp: &BoundParams,
    prefix: &str,
    name: &str,
    input: NodeId,
) -> Result<NodeId, NumericError> {
    let kernel = bp.get(&format!("{prefix}.{name}.kernel"))?;
    let bias = bp.get(&format!("{prefix}.{name}.bias"))?;
    tape.conv2d(input, kernel, bias)
}

/// Run one block on a channels × joints × frames map. Output has
/// `cfg.channels` channels and the input's spatial extents.
pub fn forward(
    tape: &mut Tape,
    bp: &BoundParams,
    prefix: &str,
    input: NodeId,
    cfg: &DccmConfig,
) -> Result<NodeId, NumericError> {
    let mut layers = Vec::with_capacity(LAYERS + 1);
    layers.push(input);
    let mut projected: Vec<NodeId> = Vec::with_capacity(LAYERS - 1);

    let c1 = conv(tape, bp, prefix, "main1", input)?;
    layers.push(tape.leaky_relu(c1, cfg.slope)?);

    for l in 2..=LAYERS {
        // layer l consumes g_0..g_{l−2}; g_{l−2} is first needed here
        let src = l - 2;
        if projected.len() == src {
            let pi = conv(tape, bp, prefix, &format!("proj{src}"), layers[src])?;
            projected.push(tape.leaky_relu(pi, cfg.slope)?);
        }

        let prev = layers[l - 1];
        let mut parts: Vec<NodeId> = projected[..l - 1].to_vec();
        parts.push(prev);
        let cat = tape.concat_channels(&parts)?;
        let fused = conv(tape, bp, prefix, &format!("fuse{l}"), cat)?;
        let main = conv(tape, bp, prefix, &format!("main{l}"), fused)?;
        layers.push(tape.leaky_relu(main, cfg.slope)?);
    }
    Ok(layers[LAYERS])
}
