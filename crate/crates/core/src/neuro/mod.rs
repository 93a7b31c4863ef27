//! Numeric substrate: reverse-mode autodiff over dense matrices, neural
//! layers, Adam, gradient checking and checkpoints.

pub mod check;
pub mod checkpoint;
pub mod layers;
mod loss;
mod optim;
mod params;
mod tape;
mod tensor;

pub use check::{finite_diff_check, finite_diff_check_sampled, DEFAULT_STEP};
pub use layers::{
    bilstm_final, bilstm_final_batch, causal_mask, feed_forward, gat_layer, kg_cross_attention, layer_norm,
    linear, multi_head_attention, scaled_dot_product, Attention,
};
pub use loss::cross_entropy;
pub use optim::{adam_step, OptimizerState};
pub use params::ParameterStore;
pub use tape::{softmax_rows, Gradients, ParamGrads, Tape, Var};
pub use tensor::{precision, set_precision, with_precision, Precision, Tensor};
