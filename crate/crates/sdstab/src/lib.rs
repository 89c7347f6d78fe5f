//! Certificates and experiments for strong stability of sampled-data control
//! of Riesz-spectral systems.
//!
//! The plant is a diagonalizable (Riesz-spectral) generator with simple
//! eigenvalues clustering at the origin, a rank-one input, and a rank-one
//! state feedback sampled by a zero-order hold. The library materializes the
//! modal series to a finite truncation and provides:
//!
//! - exact coefficient-wise application of the semigroup, hold, feedback,
//!   and one-step closed-loop operators, with rank-one-updated resolvents
//!   ([`spectral`]);
//! - machine-checkable verdicts for the standing assumptions and explicit
//!   constants bounding the dropped series tails ([`assumptions`]);
//! - continuous/discrete transfer functions, uniform lower-bound scans, and
//!   the search for an admissible sampling period ([`transfer`]);
//! - the discrete stability certificate: unit-circle spectrum test,
//!   power-boundedness probe by resolvent integrals, decay experiments, and
//!   trajectory simulation ([`stability`]);
//! - spectral splitting and rank-one pole placement for the unstable head
//!   ([`synthesis`]);
//! - a file-driven pipeline emitting a structured report plus CSV series
//!   ([`harness`]).
//!
//! Grid scans and quadratures are data-parallel; the `parallel` feature
//! (default) runs them on rayon, and disabling it yields a sequential build
//! with bit-identical results.

// `!(x > 0.0)` rejects NaN parameters; the suggested `x <= 0.0` would let
// NaN through validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assumptions;
mod dense;
pub mod error;
pub mod harness;
mod par;
pub mod spectral;
pub mod stability;
pub mod synthesis;
pub mod transfer;

pub use error::{Error, Result};
pub use spectral::{CoeffVector, DeltaOperator, RieszSystem, SpectrumSpec, TailLaw};
