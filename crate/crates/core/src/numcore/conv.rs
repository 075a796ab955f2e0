//! Spatial operations on `C×H×W` tensors.

use crate::error::{Error, Result};

use super::dense::{axpy, dot};
use super::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conv2dConfig {
    pub stride: usize,
    pub padding: usize,
}

impl Default for Conv2dConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            padding: 0,
        }
    }
}

struct ConvGeometry {
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    out_h: usize,
    out_w: usize,
}

impl ConvGeometry {
    fn new(input: &Tensor, kernels: &Tensor, bias: &Tensor, cfg: Conv2dConfig) -> Result<Self> {
        let (c_in, h, w) = input.dims3("conv2d input")?;
        kernels.expect_rank(4, "conv2d kernels")?;
        let k = kernels.shape();
        let (c_out, kc, kh, kw) = (k[0], k[1], k[2], k[3]);
        if kc != c_in {
            return Err(Error::Shape(format!(
                "conv2d kernels {k:?} expect {kc} input channels, input is {:?}",
                input.shape()
            )));
        }
        if bias.len() != c_out {
            return Err(Error::Shape(format!(
                "conv2d bias has {} entries for {c_out} output channels",
                bias.len()
            )));
        }
        if cfg.stride == 0 {
            return Err(Error::Shape("conv2d stride must be positive".into()));
        }
        let (ph, pw) = (h + 2 * cfg.padding, w + 2 * cfg.padding);
        if ph < kh || pw < kw {
            return Err(Error::Shape(format!(
                "conv2d kernel {kh}×{kw} larger than padded input {ph}×{pw}"
            )));
        }
        Ok(Self {
            c_in,
            h,
            w,
            c_out,
            kh,
            kw,
            out_h: (ph - kh) / cfg.stride + 1,
            out_w: (pw - kw) / cfg.stride + 1,
        })
    }

    /// Output columns `ox` whose input column `ox*stride + kx - padding`
    /// lands inside the image, as a half-open range.
    fn valid_cols(&self, kx: usize, cfg: Conv2dConfig) -> (usize, usize) {
        valid_range(self.w, self.out_w, kx, cfg)
    }

    fn valid_rows(&self, ky: usize, cfg: Conv2dConfig) -> (usize, usize) {
        valid_range(self.h, self.out_h, ky, cfg)
    }
}

fn valid_range(size: usize, out: usize, k: usize, cfg: Conv2dConfig) -> (usize, usize) {
    let (s, p) = (cfg.stride, cfg.padding);
    // smallest o with o*s + k >= p
    let lo = if k >= p { 0 } else { (p - k).div_ceil(s) };
    // largest o with o*s + k - p <= size - 1
    let hi = if size + p < k + 1 {
        0
    } else {
        ((size - 1 + p - k) / s + 1).min(out)
    };
    (lo.min(hi), hi)
}

/// Cross-correlation (no kernel flip) of `input[C_in×H×W]` with
/// `kernels[C_out×C_in×kh×kw]`, plus a per-channel bias.
pub fn conv2d(
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
    cfg: Conv2dConfig,
) -> Result<Tensor> {
    let g = ConvGeometry::new(input, kernels, bias, cfg)?;
    let (iv, kv) = (input.values(), kernels.values());
    let plane = g.out_h * g.out_w;
    let mut out = vec![0.0; g.c_out * plane];
    for co in 0..g.c_out {
        let oplane = &mut out[co * plane..(co + 1) * plane];
        oplane.iter_mut().for_each(|o| *o = bias.values()[co]);
        for ci in 0..g.c_in {
            let iplane = &iv[ci * g.h * g.w..(ci + 1) * g.h * g.w];
            for ky in 0..g.kh {
                let (oy0, oy1) = g.valid_rows(ky, cfg);
                for kx in 0..g.kw {
                    let wgt = kv[((co * g.c_in + ci) * g.kh + ky) * g.kw + kx];
                    if wgt == 0.0 {
                        continue;
                    }
                    let (ox0, ox1) = g.valid_cols(kx, cfg);
                    if ox0 >= ox1 {
                        continue;
                    }
                    for oy in oy0..oy1 {
                        let iy = oy * cfg.stride + ky - cfg.padding;
                        let irow = &iplane[iy * g.w..(iy + 1) * g.w];
                        let orow = &mut oplane[oy * g.out_w..(oy + 1) * g.out_w];
                        let ix0 = ox0 * cfg.stride + kx - cfg.padding;
                        if cfg.stride == 1 {
                            axpy(wgt, &irow[ix0..ix0 + (ox1 - ox0)], &mut orow[ox0..ox1]);
                        } else {
                            for (j, o) in orow[ox0..ox1].iter_mut().enumerate() {
                                *o += wgt * irow[ix0 + j * cfg.stride];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[g.c_out, g.out_h, g.out_w], out)
}

/// Accumulates gradients for `input`, `kernels` and `bias` from `out.grad()`.
pub fn conv2d_backward(
    input: &mut Tensor,
    kernels: &mut Tensor,
    bias: &mut Tensor,
    cfg: Conv2dConfig,
    out: &Tensor,
) -> Result<()> {
    let g = ConvGeometry::new(input, kernels, bias, cfg)?;
    let (iv, di) = input.split_mut();
    conv2d_backward_impl(&g, iv, Some(di), kernels, bias, cfg, out)
}

/// [`conv2d_backward`] without the input gradient.
pub fn conv2d_backward_params(
    input: &Tensor,
    kernels: &mut Tensor,
    bias: &mut Tensor,
    cfg: Conv2dConfig,
    out: &Tensor,
) -> Result<()> {
    let g = ConvGeometry::new(input, kernels, bias, cfg)?;
    conv2d_backward_impl(&g, input.values(), None, kernels, bias, cfg, out)
}

fn conv2d_backward_impl(
    g: &ConvGeometry,
    iv: &[f64],
    mut di: Option<&mut [f64]>,
    kernels: &mut Tensor,
    bias: &mut Tensor,
    cfg: Conv2dConfig,
    out: &Tensor,
) -> Result<()> {
    if out.shape() != [g.c_out, g.out_h, g.out_w] {
        return Err(Error::Shape(format!(
            "conv2d output gradient has shape {:?}, expected [{}, {}, {}]",
            out.shape(),
            g.c_out,
            g.out_h,
            g.out_w
        )));
    }
    let dout = out.grad();
    let plane = g.out_h * g.out_w;
    let iplane_len = g.h * g.w;

    for (co, db) in bias.grad_mut().iter_mut().enumerate() {
        *db += dout[co * plane..(co + 1) * plane].iter().sum::<f64>();
    }

    let (kv, dk) = kernels.split_mut();
    for co in 0..g.c_out {
        let dplane = &dout[co * plane..(co + 1) * plane];
        for ci in 0..g.c_in {
            let iplane = &iv[ci * iplane_len..(ci + 1) * iplane_len];
            let mut diplane = di
                .as_deref_mut()
                .map(|d| &mut d[ci * iplane_len..(ci + 1) * iplane_len]);
            for ky in 0..g.kh {
                let (oy0, oy1) = g.valid_rows(ky, cfg);
                for kx in 0..g.kw {
                    let kidx = ((co * g.c_in + ci) * g.kh + ky) * g.kw + kx;
                    let wgt = kv[kidx];
                    let (ox0, ox1) = g.valid_cols(kx, cfg);
                    if ox0 >= ox1 {
                        continue;
                    }
                    let mut acc = 0.0;
                    for oy in oy0..oy1 {
                        let iy = oy * cfg.stride + ky - cfg.padding;
                        let drow = &dplane[oy * g.out_w + ox0..oy * g.out_w + ox1];
                        let ix0 = ox0 * cfg.stride + kx - cfg.padding;
                        let row_base = iy * g.w;
                        if cfg.stride == 1 {
                            let span = row_base + ix0..row_base + ix0 + (ox1 - ox0);
                            acc += dot(&iplane[span.clone()], drow);
                            if let Some(dip) = diplane.as_deref_mut() {
                                if wgt != 0.0 {
                                    axpy(wgt, drow, &mut dip[span]);
                                }
                            }
                        } else {
                            for (j, &d) in drow.iter().enumerate() {
                                let ix = row_base + ix0 + j * cfg.stride;
                                acc += iplane[ix] * d;
                                if let Some(dip) = diplane.as_deref_mut() {
                                    dip[ix] += wgt * d;
                                }
                            }
                        }
                    }
                    dk[kidx] += acc;
                }
            }
        }
    }
    Ok(())
}

fn pool_dims(
    input: &Tensor,
    window: (usize, usize),
) -> Result<(usize, usize, usize, usize, usize)> {
    let (c, h, w) = input.dims3("max_pool2d input")?;
    let (ph, pw) = window;
    if ph == 0 || pw == 0 || ph > h || pw > w {
        return Err(Error::Shape(format!(
            "pool window {ph}×{pw} does not fit input {h}×{w}"
        )));
    }
    Ok((c, h, w, h / ph, w / pw))
}

/// Flat input index of the maximum in each window (first occurrence on ties).
fn pool_argmax(input: &Tensor, window: (usize, usize)) -> Result<(Vec<usize>, [usize; 3])> {
    let (c, h, w, oh, ow) = pool_dims(input, window)?;
    let iv = input.values();
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = ch * h * w + oy * window.0 * w + ox * window.1;
                for dy in 0..window.0 {
                    for dx in 0..window.1 {
                        let i = ch * h * w + (oy * window.0 + dy) * w + ox * window.1 + dx;
                        if iv[i] > iv[best] {
                            best = i;
                        }
                    }
                }
                idx.push(best);
            }
        }
    }
    Ok((idx, [c, oh, ow]))
}

/// Non-overlapping max pooling; trailing rows/columns that do not fill a
/// window are dropped.
pub fn max_pool2d(input: &Tensor, window: (usize, usize)) -> Result<Tensor> {
    let (idx, shape) = pool_argmax(input, window)?;
    let iv = input.values();
    Tensor::from_vec(&shape, idx.into_iter().map(|i| iv[i]).collect())
}

/// Routes each output gradient to the argmax of its window.
pub fn max_pool2d_backward(input: &mut Tensor, window: (usize, usize), out: &Tensor) -> Result<()> {
    let (idx, shape) = pool_argmax(input, window)?;
    if out.shape() != shape {
        return Err(Error::Shape(format!(
            "max_pool2d output gradient has shape {:?}, expected {shape:?}",
            out.shape()
        )));
    }
    let di = input.grad_mut();
    for (&i, &d) in idx.iter().zip(out.grad()) {
        di[i] += d;
    }
    Ok(())
}

/// Per-channel mean over all spatial positions.
pub fn global_avg_pool(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = input.dims3("global_avg_pool input")?;
    let hw = h * w;
    let means = input
        .values()
        .chunks(hw)
        .map(|ch| ch.iter().sum::<f64>() / hw as f64)
        .collect();
    Tensor::from_vec(&[c], means)
}

pub fn global_avg_pool_backward(input: &mut Tensor, out: &Tensor) -> Result<()> {
    let (c, h, w) = input.dims3("global_avg_pool input")?;
    if out.len() != c {
        return Err(Error::Shape(format!(
            "global_avg_pool output gradient has {} entries for {c} channels",
            out.len()
        )));
    }
    let hw = h * w;
    for (ch, &d) in input.grad_mut().chunks_mut(hw).zip(out.grad()) {
        let share = d / hw as f64;
        ch.iter_mut().for_each(|g| *g += share);
    }
    Ok(())
}

fn nearest_src(dst: usize, src_len: usize, dst_len: usize) -> usize {
    dst * src_len / dst_len
}

/// Nearest-neighbour resize of each channel to `target = (H, W)`.
pub fn upsample_nearest(input: &Tensor, target: (usize, usize)) -> Result<Tensor> {
    let (c, h, w) = input.dims3("upsample input")?;
    let (th, tw) = target;
    if th == 0 || tw == 0 {
        return Err(Error::Shape("upsample target must be positive".into()));
    }
    let iv = input.values();
    let mut out = Vec::with_capacity(c * th * tw);
    for ch in 0..c {
        for y in 0..th {
            let row = &iv[ch * h * w + nearest_src(y, h, th) * w..][..w];
            out.extend((0..tw).map(|x| row[nearest_src(x, w, tw)]));
        }
    }
    Tensor::from_vec(&[c, th, tw], out)
}

pub fn upsample_nearest_backward(input: &mut Tensor, out: &Tensor) -> Result<()> {
    let (c, h, w) = input.dims3("upsample input")?;
    let (oc, th, tw) = out.dims3("upsample output")?;
    if oc != c {
        return Err(Error::Shape(format!(
            "upsample output has {oc} channels, input has {c}"
        )));
    }
    let dout = out.grad();
    let di = input.grad_mut();
    for ch in 0..c {
        for y in 0..th {
            let sy = nearest_src(y, h, th);
            for x in 0..tw {
                di[ch * h * w + sy * w + nearest_src(x, w, tw)] += dout[(ch * th + y) * tw + x];
            }
        }
    }
    Ok(())
}
