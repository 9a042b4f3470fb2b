//! Small feed-forward networks: dense, 1-D convolution, average pooling and
//! softmax layers with hand-written backpropagation.

mod array;
mod checkpoint;
mod gradcheck;
mod layer;
mod loss;
mod network;
mod optim;

pub use array::Array;
pub use checkpoint::{Checkpoint, EXTENSION as CHECKPOINT_EXTENSION, FORMAT_VERSION};
pub use gradcheck::{
    grad_check, relative_error, GradCheckReport, GradMismatch, ParamKind, FD_STEP,
};
pub use layer::{validate_stack, Activation, LayerSpec, Padding};
pub use loss::{
    cross_entropy, cross_entropy_grad, one_hot, squared_error, squared_error_grad, PROB_FLOOR,
};
pub use network::{
    backward, forward, softmax, ForwardCache, Gradients, LayerParams, Network, NetworkParams,
};
pub use optim::{rmsprop_step, sgd_step, Optimizer, RmsPropState, RMSPROP_DECAY, RMSPROP_EPS};
