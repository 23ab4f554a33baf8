//! Singular flat 3-webs given as implicit cubic ODEs, their Chern connection
//! and classification invariants, the WDVV systems, and the Frobenius 3-fold
//! germs built over them.

pub mod chern;
pub mod cli;
pub mod error;
pub mod field;
pub mod frobenius;
pub mod invariant;
pub mod io;
pub mod wdvv;
pub mod web;
pub mod jet;
pub mod ode;
pub mod plot;
pub mod poly;
pub mod reduce;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
