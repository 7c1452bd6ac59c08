//! Concrete objective families with hand-coded `F`/`G` decompositions.

mod artificial;
mod ffn;
mod fixed_net;

pub use artificial::ArtificialProblem;
pub use ffn::{ffn_forward_backward, xavier_init, Activation, FeedForwardNet, LayerSpec, LossKind};
pub use fixed_net::FixedInputNet;
