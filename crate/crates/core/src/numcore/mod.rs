//! Differentiable numeric building blocks with hand-written backward passes.
//!
//! Every forward function is pure. Backward functions take the forward
//! inputs mutably, read the upstream gradient from the output tensor's
//! `grad`, and *accumulate* into the inputs' `grad` buffers.

mod activation;
mod conv;
mod dense;
mod gradcheck;
mod loss;
mod lstm;
mod tensor;

pub use activation::{relu, relu_backward, sigmoid};
pub use conv::{
    conv2d, conv2d_backward, conv2d_backward_params, global_avg_pool, global_avg_pool_backward,
    max_pool2d, max_pool2d_backward, upsample_nearest, upsample_nearest_backward, Conv2dConfig,
};
pub use dense::{linear, linear_backward, linear_backward_params, matmul, matmul_backward};
pub use gradcheck::grad_check;
pub use loss::{mse_backward, mse_loss, softmax, softmax_cross_entropy, CrossEntropy};
pub use lstm::{
    lstm_cell, lstm_cell_backward, lstm_cell_backward_no_input, LstmState, LstmStep, LstmStepGrad,
    LstmWeights,
};
pub use tensor::Tensor;
