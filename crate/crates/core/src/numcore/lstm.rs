//! Single LSTM cell with gate order `[input, forget, candidate, output]`.

use crate::error::{Error, Result};

use super::activation::sigmoid;
use super::dense::{axpy, dot};
use super::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            hidden: vec![0.0; hidden_size],
            cell: vec![0.0; hidden_size],
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden.len()
    }
}

/// `input: [4H×I]`, `recurrent: [4H×H]`, `bias: [4H]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmWeights {
    pub input: Tensor,
    pub recurrent: Tensor,
    pub bias: Tensor,
}

impl LstmWeights {
    pub fn new(input: Tensor, recurrent: Tensor, bias: Tensor) -> Result<Self> {
        input.expect_rank(2, "lstm input weights")?;
        recurrent.expect_rank(2, "lstm recurrent weights")?;
        let four_h = input.shape()[0];
        let h = recurrent.shape()[1];
        if four_h != 4 * h || recurrent.shape()[0] != four_h || bias.len() != four_h {
            return Err(Error::Shape(format!(
                "lstm weights inconsistent: input {:?}, recurrent {:?}, bias {:?}",
                input.shape(),
                recurrent.shape(),
                bias.shape()
            )));
        }
        Ok(Self {
            input,
            recurrent,
            bias,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent.shape()[1]
    }

    pub fn input_size(&self) -> usize {
        self.input.shape()[1]
    }

    pub fn zero_grad(&mut self) {
        self.input.zero_grad();
        self.recurrent.zero_grad();
        self.bias.zero_grad();
    }
}

/// Everything one step needs for its backward pass.
#[derive(Clone, Debug)]
pub struct LstmStep {
    pub x: Vec<f64>,
    pub prev: LstmState,
    pub next: LstmState,
    gates: Vec<f64>,
    tanh_cell: Vec<f64>,
}

pub struct LstmStepGrad {
    pub x: Vec<f64>,
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

pub fn lstm_cell(x: &[f64], state: &LstmState, weights: &LstmWeights) -> Result<LstmStep> {
    let (h, i) = (weights.hidden_size(), weights.input_size());
    if x.len() != i || state.hidden.len() != h || state.cell.len() != h {
        return Err(Error::Shape(format!(
            "lstm_cell: input {} / state {}+{} vs weights (input {i}, hidden {h})",
            x.len(),
            state.hidden.len(),
            state.cell.len()
        )));
    }
    let (wi, wh, b) = (
        weights.input.values(),
        weights.recurrent.values(),
        weights.bias.values(),
    );
    let mut gates: Vec<f64> = (0..4 * h)
        .map(|r| {
            b[r] + dot(&wi[r * i..(r + 1) * i], x) + dot(&wh[r * h..(r + 1) * h], &state.hidden)
        })
        .collect();
    for (r, z) in gates.iter_mut().enumerate() {
        *z = if (2 * h..3 * h).contains(&r) {
            z.tanh()
        } else {
            sigmoid(*z)
        };
    }
    let mut cell = vec![0.0; h];
    let mut hidden = vec![0.0; h];
    let mut tanh_cell = vec![0.0; h];
    for k in 0..h {
        let (ig, fg, gg, og) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
        cell[k] = fg * state.cell[k] + ig * gg;
        tanh_cell[k] = cell[k].tanh();
        hidden[k] = og * tanh_cell[k];
    }
    Ok(LstmStep {
        x: x.to_vec(),
        prev: state.clone(),
        next: LstmState { hidden, cell },
        gates,
        tanh_cell,
    })
}

/// Backpropagates `d_hidden`/`d_cell` (gradients w.r.t. `step.next`) through
/// one step, accumulating weight gradients and returning gradients for the
/// step's input and previous state.
pub fn lstm_cell_backward(
    step: &LstmStep,
    weights: &mut LstmWeights,
    d_hidden: &[f64],
    d_cell: &[f64],
) -> Result<LstmStepGrad> {
    lstm_cell_backward_impl(step, weights, d_hidden, d_cell, true)
}

/// Like [`lstm_cell_backward`] but leaves `LstmStepGrad::x` empty.
pub fn lstm_cell_backward_no_input(
    step: &LstmStep,
    weights: &mut LstmWeights,
    d_hidden: &[f64],
    d_cell: &[f64],
) -> Result<LstmStepGrad> {
    lstm_cell_backward_impl(step, weights, d_hidden, d_cell, false)
}

fn lstm_cell_backward_impl(
    step: &LstmStep,
    weights: &mut LstmWeights,
    d_hidden: &[f64],
    d_cell: &[f64],
    input_grad: bool,
) -> Result<LstmStepGrad> {
    let (h, i) = (weights.hidden_size(), weights.input_size());
    if d_hidden.len() != h || d_cell.len() != h {
        return Err(Error::Shape(format!(
            "lstm_cell_backward: gradients of length {}/{} for hidden size {h}",
            d_hidden.len(),
            d_cell.len()
        )));
    }
    let g = &step.gates;
    let mut d_pre = vec![0.0; 4 * h];
    let mut d_cell_prev = vec![0.0; h];
    for k in 0..h {
        let (ig, fg, gg, og) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
        let tc = step.tanh_cell[k];
        let dc = d_cell[k] + d_hidden[k] * og * (1.0 - tc * tc);
        d_pre[k] = dc * gg * ig * (1.0 - ig);
        d_pre[h + k] = dc * step.prev.cell[k] * fg * (1.0 - fg);
        d_pre[2 * h + k] = dc * ig * (1.0 - gg * gg);
        d_pre[3 * h + k] = d_hidden[k] * tc * og * (1.0 - og);
        d_cell_prev[k] = dc * fg;
    }

    for (db, &d) in weights.bias.grad_mut().iter_mut().zip(&d_pre) {
        *db += d;
    }
    let mut d_x = vec![0.0; if input_grad { i } else { 0 }];
    {
        let (wv, dw) = weights.input.split_mut();
        for (r, &d) in d_pre.iter().enumerate() {
            if d != 0.0 {
                axpy(d, &step.x, &mut dw[r * i..(r + 1) * i]);
                if input_grad {
                    axpy(d, &wv[r * i..(r + 1) * i], &mut d_x);
                }
            }
        }
    }
    let mut d_hidden_prev = vec![0.0; h];
    {
        let (wv, dw) = weights.recurrent.split_mut();
        for (r, &d) in d_pre.iter().enumerate() {
            if d != 0.0 {
                axpy(d, &step.prev.hidden, &mut dw[r * h..(r + 1) * h]);
                axpy(d, &wv[r * h..(r + 1) * h], &mut d_hidden_prev);
            }
        }
    }
    Ok(LstmStepGrad {
        x: d_x,
        hidden: d_hidden_prev,
        cell: d_cell_prev,
    })
}
