//! Silent self-stabilizing approximate minimum spanning trees.
//!
//! The crate contains a state-model simulator, weight quantization, a
//! proof-labeling scheme for spanning trees, and a protocol stack that
//! builds, certifies and resets.

pub mod bits;
pub mod cert;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod quant;
pub mod sim;
pub mod proto;
