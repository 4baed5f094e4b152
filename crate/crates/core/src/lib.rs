//! Bit commitment in the noisy-storage model.
//!
//! The crate covers the whole chain: estimating protocol probabilities from
//! detector rates, detector symmetrization, weak string erasure with errors,
//! commit and open with random linear codes and Toeplitz hashing, the
//! finite-size security calculus, and a framed wire protocol for running the
//! two parties over a socket.

pub mod bits;
pub mod codes;
pub mod config;
pub mod error;
pub mod estimate;
pub mod hashing;
pub mod net;
pub mod photon;
pub mod protocol;
pub mod security;
pub mod symmetrize;
pub mod transcript;
pub mod wire;

pub use bits::BitString;
pub use error::Error;
