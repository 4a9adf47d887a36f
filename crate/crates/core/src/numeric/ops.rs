//! Forward kernels and their vector-Jacobian products.
//!
//! Every function here is a plain eager operation on [`Array`] values; the
//! tape records which one produced each node and calls the matching
//! `*_backward` routine during the reverse sweep. Convolutions use stride 1
//! and zero "same" padding so spatial extents are preserved.

use super::{Array, NumericError};

fn require_same_shape(op: &'static str, a: &Array, b: &Array) -> Result<(), NumericError> {
    if a.shape() != b.shape() {
        return Err(NumericError::ShapeMismatch {
            op,
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    Ok(())
}

/// 2-D convolution of a `inC × H × W` map with an `outC × inC × kH × kW`
/// kernel and an `outC` bias. Odd kernel extents only; output is `outC × H × W`.
pub fn conv2d(input: &Array, kernel: &Array, bias: &Array) -> Result<Array, NumericError> {
    let (in_c, h, w) = input.dims3()?;
    let kshape = kernel.shape();
    if kshape.len() != 4 {
        return Err(NumericError::contract(
            "conv2d",
            format!("kernel must be 4-dimensional, got {kshape:?}"),
        ));
    }
    let (out_c, k_in, kh, kw) = (kshape[0], kshape[1], kshape[2], kshape[3]);
    if k_in != in_c {
        return Err(NumericError::ShapeMismatch {
            op: "conv2d",
            lhs: input.shape().to_vec(),
            rhs: kernel.shape().to_vec(),
        });
    }
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(NumericError::contract(
            "conv2d",
            format!("kernel extents must be odd, got {kh}x{kw}"),
        ));
    }
    if bias.shape() != [out_c] {
        return Err(NumericError::ShapeMismatch {
            op: "conv2d",
            lhs: bias.shape().to_vec(),
            rhs: vec![out_c],
        });
    }

    let (ph, pw) = (kh / 2, kw / 2);
    let mut out = Array::zeros(&[out_c, h, w]);
    let x = input.data();
    let k = kernel.data();
    let o = out.data_mut();
    if kh == 1 && kw == 1 {
        // pointwise kernels touch whole planes at once
        let plane = h * w;
        for co in 0..out_c {
            let orow = &mut o[co * plane..(co + 1) * plane];
            orow.fill(bias.data()[co]);
            for ci in 0..in_c {
                let weight = k[co * in_c + ci];
                let irow = &x[ci * plane..(ci + 1) * plane];
                for (ov, iv) in orow.iter_mut().zip(irow) {
                    *ov += weight * iv;
                }
            }
        }
        return Ok(out);
    }
    for co in 0..out_c {
        let b = bias.data()[co];
        o[co * h * w..(co + 1) * h * w].fill(b);
        for ci in 0..in_c {
            for ky in 0..kh {
                for kx in 0..kw {
                    let weight = k[((co * in_c + ci) * kh + ky) * kw + kx];
                    // Valid output rows/cols for this kernel offset.
                    let y0 = ph.saturating_sub(ky);
                    let y1 = (h + ph - ky).min(h);
                    let x0 = pw.saturating_sub(kx);
                    let x1 = (w + pw - kx).min(w);
                    for y in y0..y1 {
                        let iy = y + ky - ph;
                        let orow = (co * h + y) * w;
                        // x0 + kx ≥ pw on the valid range, so this stays in bounds
                        let istart = (ci * h + iy) * w + x0 + kx - pw;
                        let out_row = &mut o[orow + x0..orow + x1];
                        let in_row = &x[istart..istart + (x1 - x0)];
                        for (ov, iv) in out_row.iter_mut().zip(in_row) {
                            *ov += weight * iv;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// VJP of [`conv2d`]: gradients for (input, kernel, bias).
pub(crate) fn conv2d_backward(
    grad_out: &Array,
    input: &Array,
    kernel: &Array,
) -> (Array, Array, Array) {
    let (in_c, h, w) = input.dims3().expect("conv2d input recorded as 3-d");
    let kshape = kernel.shape();
    let (out_c, kh, kw) = (kshape[0], kshape[2], kshape[3]);
    let (ph, pw) = (kh / 2, kw / 2);

    let g = grad_out.data();
    let x = input.data();
    let k = kernel.data();

    let mut gx = Array::zeros(input.shape());
    let mut gk = Array::zeros(kernel.shape());
    let mut gb = Array::zeros(&[out_c]);

    for co in 0..out_c {
        let mut sum = 0.0;
        for v in &g[co * h * w..(co + 1) * h * w] {
            sum += v;
        }
        gb.data_mut()[co] = sum;
    }

    if kh == 1 && kw == 1 {
        let plane = h * w;
        let gxd = gx.data_mut();
        let gkd = gk.data_mut();
        for co in 0..out_c {
            let grow = &g[co * plane..(co + 1) * plane];
            for ci in 0..in_c {
                let weight = k[co * in_c + ci];
                let gx_row = &mut gxd[ci * plane..(ci + 1) * plane];
                let x_row = &x[ci * plane..(ci + 1) * plane];
                let mut acc = 0.0;
                for ((gv, go), xv) in gx_row.iter_mut().zip(grow).zip(x_row) {
                    *gv += weight * go;
                    acc += go * xv;
                }
                gkd[co * in_c + ci] = acc;
            }
        }
        return (gx, gk, gb);
    }

    {
        let gxd = gx.data_mut();
        for co in 0..out_c {
            for ci in 0..in_c {
                for ky in 0..kh {
                    for kx in 0..kw {
                        let weight = k[((co * in_c + ci) * kh + ky) * kw + kx];
                        let y0 = ph.saturating_sub(ky);
                        let y1 = (h + ph - ky).min(h);
                        let x0 = pw.saturating_sub(kx);
                        let x1 = (w + pw - kx).min(w);
                        for y in y0..y1 {
                            let iy = y + ky - ph;
                            let grow = (co * h + y) * w;
                            let istart = (ci * h + iy) * w + x0 + kx - pw;
                            let g_row = &g[grow + x0..grow + x1];
                            let gx_row = &mut gxd[istart..istart + (x1 - x0)];
                            for (gv, go) in gx_row.iter_mut().zip(g_row) {
                                *gv += weight * go;
                            }
                        }
                    }
                }
            }
        }
    }

    {
        let gkd = gk.data_mut();
        for co in 0..out_c {
            for ci in 0..in_c {
                for ky in 0..kh {
                    for kx in 0..kw {
                        let y0 = ph.saturating_sub(ky);
                        let y1 = (h + ph - ky).min(h);
                        let x0 = pw.saturating_sub(kx);
                        let x1 = (w + pw - kx).min(w);
                        let mut acc = 0.0;
                        for y in y0..y1 {
                            let iy = y + ky - ph;
                            let grow = (co * h + y) * w;
                            let istart = (ci * h + iy) * w + x0 + kx - pw;
                            let g_row = &g[grow + x0..grow + x1];
                            let x_row = &x[istart..istart + (x1 - x0)];
                            for (go, xv) in g_row.iter().zip(x_row) {
                                acc += go * xv;
                            }
                        }
                        gkd[((co * in_c + ci) * kh + ky) * kw + kx] = acc;
                    }
                }
            }
        }
    }

    (gx, gk, gb)
}

/// Elementwise `max(x, slope·x)` for a slope in (0, 1).
pub fn leaky_relu(x: &Array, slope: f64) -> Result<Array, NumericError> {
    if !(slope > 0.0 && slope < 1.0) {
        return Err(NumericError::contract(
            "leaky_relu",
            format!("slope must lie in (0, 1), got {slope}"),
        ));
    }
    let mut out = x.clone();
    for v in out.data_mut() {
        if *v < 0.0 {
            *v *= slope;
        }
    }
    Ok(out)
}

pub(crate) fn leaky_relu_backward(grad_out: &Array, x: &Array, slope: f64) -> Array {
    let mut gx = grad_out.clone();
    for (g, &v) in gx.data_mut().iter_mut().zip(x.data()) {
        if v < 0.0 {
            *g *= slope;
        }
    }
    gx
}

/// Concatenate `C × H × W` maps along the channel axis. All inputs must share
/// spatial extents; channel blocks keep their input order.
pub fn concat_channels(inputs: &[&Array]) -> Result<Array, NumericError> {
    if inputs.is_empty() {
        return Err(NumericError::contract(
            "concat_channels",
            "at least one input required",
        ));
    }
    let (_, h, w) = inputs[0].dims3()?;
    let mut total_c = 0;
    for a in inputs {
        let (c, ah, aw) = a.dims3()?;
        if (ah, aw) != (h, w) {
            return Err(NumericError::ShapeMismatch {
                op: "concat_channels",
                lhs: inputs[0].shape().to_vec(),
                rhs: a.shape().to_vec(),
            });
        }
        total_c += c;
    }
    let mut data = Vec::with_capacity(total_c * h * w);
    for a in inputs {
        data.extend_from_slice(a.data());
    }
    Array::new(vec![total_c, h, w], data)
}

pub(crate) fn concat_channels_backward(grad_out: &Array, inputs: &[&Array]) -> Vec<Array> {
    let mut grads = Vec::with_capacity(inputs.len());
    let mut offset = 0;
    for a in inputs {
        let len = a.len();
        let slice = grad_out.data()[offset..offset + len].to_vec();
        grads.push(Array::new(a.shape().to_vec(), slice).expect("split preserves shape"));
        offset += len;
    }
    grads
}

/// Elementwise sum of two equal-shaped arrays.
pub fn add(a: &Array, b: &Array) -> Result<Array, NumericError> {
    require_same_shape("add", a, b)?;
    let mut out = a.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(b.data()) {
        *o += v;
    }
    Ok(out)
}

/// Elementwise difference `a − b`.
pub fn sub(a: &Array, b: &Array) -> Result<Array, NumericError> {
    require_same_shape("sub", a, b)?;
    let mut out = a.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(b.data()) {
        *o -= v;
    }
    Ok(out)
}

/// Multiply every element by a constant.
pub fn scale(x: &Array, factor: f64) -> Array {
    let mut out = x.clone();
    for v in out.data_mut() {
        *v *= factor;
    }
    out
}

/// Affine map over the flattened input: `weight · flatten(x) + bias` with
/// `weight: out × in`, `bias: out`.
pub fn fully_connected(x: &Array, weight: &Array, bias: &Array) -> Result<Array, NumericError> {
    let (rows, cols) = weight.dims2()?;
    if cols != x.len() {
        return Err(NumericError::ShapeMismatch {
            op: "fully_connected",
            lhs: weight.shape().to_vec(),
            rhs: x.shape().to_vec(),
        });
    }
    if bias.shape() != [rows] {
        return Err(NumericError::ShapeMismatch {
            op: "fully_connected",
            lhs: bias.shape().to_vec(),
            rhs: vec![rows],
        });
    }
    let xd = x.data();
    let wd = weight.data();
    let mut out = bias.clone();
    let od = out.data_mut();
    for r in 0..rows {
        let row = &wd[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (wv, xv) in row.iter().zip(xd) {
            acc += wv * xv;
        }
        od[r] += acc;
    }
    Ok(out)
}

pub(crate) fn fully_connected_backward(
    grad_out: &Array,
    x: &Array,
    weight: &Array,
) -> (Array, Array, Array) {
    let (rows, cols) = weight.dims2().expect("weight recorded as 2-d");
    let g = grad_out.data();
    let xd = x.data();
    let wd = weight.data();

    let mut gx = Array::zeros(x.shape());
    {
        let gxd = gx.data_mut();
        for r in 0..rows {
            let gr = g[r];
            if gr == 0.0 {
                continue;
            }
            let row = &wd[r * cols..(r + 1) * cols];
            for (gv, wv) in gxd.iter_mut().zip(row) {
                *gv += gr * wv;
            }
        }
    }

    let mut gw = Array::zeros(weight.shape());
    {
        let gwd = gw.data_mut();
        for r in 0..rows {
            let gr = g[r];
            let row = &mut gwd[r * cols..(r + 1) * cols];
            for (gv, xv) in row.iter_mut().zip(xd) {
                *gv = gr * xv;
            }
        }
    }

    (gx, gw, grad_out.clone())
}

/// Tile a `J × C` array across the frame axis into a single-channel
/// `1 × J × frames` map: `out[0, j, t] = x[j, t mod C]`.
pub fn tile_frames(x: &Array, frames: usize) -> Result<Array, NumericError> {
    let (j, c) = x.dims2()?;
    if frames == 0 {
        return Err(NumericError::contract("tile_frames", "frames must be ≥ 1"));
    }
    let mut out = Array::zeros(&[1, j, frames]);
    {
        let od = out.data_mut();
        let xd = x.data();
        for row in 0..j {
            for t in 0..frames {
                od[row * frames + t] = xd[row * c + t % c];
            }
        }
    }
    Ok(out)
}

pub(crate) fn tile_frames_backward(grad_out: &Array, x: &Array) -> Array {
    let (j, c) = x.dims2().expect("tile input recorded as 2-d");
    let frames = grad_out.shape()[2];
    let mut gx = Array::zeros(x.shape());
    {
        let gd = gx.data_mut();
        let g = grad_out.data();
        for row in 0..j {
            for t in 0..frames {
                gd[row * c + t % c] += g[row * frames + t];
            }
        }
    }
    gx
}

/// Sum of squared elements, as a one-element array.
pub fn sum_squares(x: &Array) -> Array {
    let mut acc = 0.0;
    for &v in x.data() {
        acc += v * v;
    }
    Array::scalar(acc)
}

pub(crate) fn sum_squares_backward(grad_out: &Array, x: &Array) -> Array {
    let g = grad_out.scalar_value();
    let mut gx = x.clone();
    for v in gx.data_mut() {
        *v *= 2.0 * g;
    }
    gx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr(shape: &[usize], data: &[f64]) -> Array {
        Array::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn conv2d_identity_kernel_passes_input_through() {
        // 1×1 kernel holding the identity over 2 channels, zero bias.
        let input = arr(&[2, 2, 3], &(0..12).map(f64::from).collect::<Vec<_>>());
        let kernel = arr(&[2, 2, 1, 1], &[1.0, 0.0, 0.0, 1.0]);
        let bias = Array::zeros(&[2]);
        let out = conv2d(&input, &kernel, &bias).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn conv2d_zero_kernel_emits_bias() {
        let input = arr(&[1, 2, 2], &[5.0, -1.0, 2.0, 0.5]);
        let kernel = Array::zeros(&[3, 1, 3, 3]);
        let bias = arr(&[3], &[0.25, -2.0, 7.0]);
        let out = conv2d(&input, &kernel, &bias).unwrap();
        for c in 0..3 {
            for y in 0..2 {
                for x in 0..2 {
                    assert_eq!(out.at(&[c, y, x]), bias.data()[c]);
                }
            }
        }
    }

    #[test]
    fn conv2d_rejects_even_kernel() {
        let input = Array::zeros(&[1, 4, 4]);
        let kernel = Array::zeros(&[1, 1, 2, 2]);
        let bias = Array::zeros(&[1]);
        assert!(conv2d(&input, &kernel, &bias).is_err());
    }

    #[test]
    fn conv2d_rejects_channel_mismatch() {
        let input = Array::zeros(&[2, 4, 4]);
        let kernel = Array::zeros(&[1, 3, 3, 3]);
        let bias = Array::zeros(&[1]);
        let err = conv2d(&input, &kernel, &bias).unwrap_err();
        assert!(matches!(err, NumericError::ShapeMismatch { .. }));
    }

    #[test]
    fn leaky_relu_definition() {
        let x = arr(&[2], &[2.0, -1.0]);
        let out = leaky_relu(&x, 0.2).unwrap();
        assert_eq!(out.data(), &[2.0, -0.2]);
    }

    #[test]
    fn leaky_relu_rejects_bad_slope() {
        let x = Array::zeros(&[1]);
        assert!(leaky_relu(&x, 0.0).is_err());
        assert!(leaky_relu(&x, 1.0).is_err());
    }

    #[test]
    fn concat_orders_blocks() {
        let a = Array::filled(&[2, 1, 2], 1.0);
        let b = Array::filled(&[3, 1, 2], 2.0);
        let out = concat_channels(&[&a, &b]).unwrap();
        assert_eq!(out.shape(), &[5, 1, 2]);
        assert!(out.data()[..4].iter().all(|&v| v == 1.0));
        assert!(out.data()[4..].iter().all(|&v| v == 2.0));
    }

    #[test]
    fn concat_single_input_is_identity() {
        let a = arr(&[1, 2, 2], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(concat_channels(&[&a]).unwrap(), a);
    }

    #[test]
    fn concat_rejects_spatial_mismatch() {
        let a = Array::zeros(&[1, 2, 2]);
        let b = Array::zeros(&[1, 3, 2]);
        assert!(concat_channels(&[&a, &b]).is_err());
    }

    #[test]
    fn add_zeros_is_identity() {
        let a = arr(&[3], &[1.0, -2.0, 0.5]);
        assert_eq!(add(&a, &Array::zeros(&[3])).unwrap(), a);
    }

    #[test]
    fn fully_connected_identity_weight_flattens() {
        let x = arr(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let mut w = Array::zeros(&[4, 4]);
        for i in 0..4 {
            let idx = i * 4 + i;
            w.data_mut()[idx] = 1.0;
        }
        let out = fully_connected(&x, &w, &Array::zeros(&[4])).unwrap();
        assert_eq!(out.data(), x.data());
    }

    #[test]
    fn tile_frames_cycles_columns() {
        let v = arr(&[2, 3], &[1.0, 2.0, 3.0, 10.0, 20.0, 30.0]);
        let out = tile_frames(&v, 5).unwrap();
        assert_eq!(out.shape(), &[1, 2, 5]);
        assert_eq!(out.at(&[0, 0, 0]), 1.0);
        assert_eq!(out.at(&[0, 0, 3]), 1.0);
        assert_eq!(out.at(&[0, 1, 4]), 20.0);
    }
}
