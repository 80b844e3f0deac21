// Negated float comparisons below are deliberate: they reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogolubov;
pub mod error;
pub mod fock;
pub mod gupta_bleuler;
pub mod modes;
pub mod ode;
mod parallel;
pub mod profiles;
pub mod radiation;
pub mod spectrum;

pub use error::{Error, Result};
