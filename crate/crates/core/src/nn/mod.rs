//! Dense-network substrate: fully connected layers, Glorot init, Adam and a
//! central-difference gradient checker.

mod adam;
mod gradcheck;
mod layer;
mod params;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{finite_diff_check, relative_error, GradCheckReport};
pub use layer::{backward_chain, forward_chain, glorot_init, Activation, DenseLayer};
pub use params::{ParamSet, TensorMut, TensorRef};
