//! Scalar automatic differentiation for the cavity problem.
//!
//! Two cooperating pieces:
//!
//! * [`Jet2`] — forward mode. A scalar bundled with its first and pure
//!   second spatial derivatives, propagated exactly through every primitive
//!   by the chain rule. Evaluating the network on coordinate-seeded jets
//!   yields `u, u_x, u_y, u_xx, u_yy` (and likewise `v`, `p`) in one pass.
//! * [`Tape`] — reverse mode over the recorded forward pass. Derivative
//!   slots of jets are ordinary forward outputs on the tape, so the reverse
//!   sweep differentiates through them, giving exact parameter gradients of
//!   losses that consume spatial derivatives (forward-over-reverse).

mod jet;
mod tape;

pub use jet::{seed_inputs, Jet2};
pub use tape::{Lane, NodeId, Tape, TapeError, Width};
