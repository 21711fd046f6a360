//! Continuous-time quantum walks, coupled harmonic oscillator networks, and
//! the two reductions between them, all over black-box sparse matrix oracles.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod harmonic_oscillator;
pub mod ho_to_qw;
pub mod oracle;
pub mod quantum_walk;
pub mod qw_to_ho;
pub mod sign_split;
pub mod transition;
pub mod variants;

pub use error::{Error, Result};
