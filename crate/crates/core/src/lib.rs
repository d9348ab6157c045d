//! Time-dependent weak values and weak dwell times for a dissipative
//! spin-1/2.
//!
//! * [`qcore`]: two-level states, operators, precession and weak-value kernels
//! * [`pointer`]: Gaussian-pointer simulation of the weak measurement itself
//! * [`bath`]: reference atom decaying into a finite equispaced bath
//! * [`weakvalue`]: weak survival probabilities and the weak dwell integral
//! * [`retarded`]: retarded Schrödinger evolution and its effective (ω', γ)
//! * [`dwell`]: end-to-end dwell-time reports from (ω, ω', T)
//!
//! Units: ħ = 1 throughout.

// `!(x > y)` is the NaN-rejecting form of every domain check here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod dwell;
pub mod error;
pub mod pointer;
pub mod qcore;
pub mod quad;
pub mod retarded;
pub mod weakvalue;

pub use error::{Error, Result};
pub use num_complex::Complex64;
