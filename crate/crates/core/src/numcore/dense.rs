//! Matrix product and the fully connected (affine) layer.

use crate::error::{Error, Result};

use super::Tensor;

fn matrix_dims(t: &Tensor, what: &str) -> Result<(usize, usize)> {
    t.expect_rank(2, what)?;
    Ok((t.shape()[0], t.shape()[1]))
}

/// `a[M×K] · b[K×N]`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = matrix_dims(a, "matmul lhs")?;
    let (k2, n) = matrix_dims(b, "matmul rhs")?;
    if k != k2 {
        return Err(Error::Shape(format!(
            "matmul inner dimensions differ: {:?} · {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (av, bv) = (a.values(), b.values());
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = av[i * k + p];
            if x == 0.0 {
                continue;
            }
            for (o, &y) in row.iter_mut().zip(&bv[p * n..(p + 1) * n]) {
                *o += x * y;
            }
        }
    }
    Tensor::from_vec(&[m, n], out)
}

/// Accumulates `dL/da = dout·bᵀ` and `dL/db = aᵀ·dout`, reading `dout` from
/// `out.grad()`.
pub fn matmul_backward(a: &mut Tensor, b: &mut Tensor, out: &Tensor) -> Result<()> {
    let (m, k) = matrix_dims(a, "matmul lhs")?;
    let (_, n) = matrix_dims(b, "matmul rhs")?;
    if out.shape() != [m, n] {
        return Err(Error::Shape(format!(
            "matmul output gradient has shape {:?}, expected [{m}, {n}]",
            out.shape()
        )));
    }
    let dout = out.grad();
    {
        let bv = b.values();
        let da = a.grad_mut();
        for i in 0..m {
            let drow = &dout[i * n..(i + 1) * n];
            for p in 0..k {
                da[i * k + p] += dot(drow, &bv[p * n..(p + 1) * n]);
            }
        }
    }
    let av = a.values();
    let db = b.grad_mut();
    for i in 0..m {
        let drow = &dout[i * n..(i + 1) * n];
        for p in 0..k {
            axpy(av[i * k + p], drow, &mut db[p * n..(p + 1) * n]);
        }
    }
    Ok(())
}

/// Affine map `weight[O×I] · x[I] + bias[O]` on a single sample.
pub fn linear(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (o, i) = matrix_dims(weight, "linear weight")?;
    if x.len() != i || bias.len() != o {
        return Err(Error::Shape(format!(
            "linear: input {:?}, weight {:?}, bias {:?}",
            x.shape(),
            weight.shape(),
            bias.shape()
        )));
    }
    let (xv, wv) = (x.values(), weight.values());
    let out = bias
        .values()
        .iter()
        .enumerate()
        .map(|(r, &b)| b + dot(&wv[r * i..(r + 1) * i], xv))
        .collect();
    Tensor::from_vec(&[o], out)
}

pub fn linear_backward(
    x: &mut Tensor,
    weight: &mut Tensor,
    bias: &mut Tensor,
    out: &Tensor,
) -> Result<()> {
    linear_backward_params(x, weight, bias, out)?;
    let i = x.len();
    let wv = weight.values();
    let dx = x.grad_mut();
    for (r, &d) in out.grad().iter().enumerate() {
        if d != 0.0 {
            axpy(d, &wv[r * i..(r + 1) * i], dx);
        }
    }
    Ok(())
}

/// [`linear_backward`] without the input gradient.
pub fn linear_backward_params(
    x: &Tensor,
    weight: &mut Tensor,
    bias: &mut Tensor,
    out: &Tensor,
) -> Result<()> {
    let (o, i) = matrix_dims(weight, "linear weight")?;
    if x.len() != i || out.len() != o || bias.len() != o {
        return Err(Error::Shape(format!(
            "linear backward: input {:?}, weight {:?}, output {:?}",
            x.shape(),
            weight.shape(),
            out.shape()
        )));
    }
    let dout = out.grad();
    for (db, &d) in bias.grad_mut().iter_mut().zip(dout) {
        *db += d;
    }
    let xv = x.values();
    let dw = weight.grad_mut();
    for (r, &d) in dout.iter().enumerate() {
        if d != 0.0 {
            axpy(d, xv, &mut dw[r * i..(r + 1) * i]);
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four partial sums let the compiler vectorise; the order is fixed, so
    // results stay bit-reproducible.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let j = c * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
