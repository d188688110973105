//! Numerical machinery for weighted Besov spaces of holomorphic functions on
//! the unit polydisc, together with the little Hankel and Berezin-type
//! operators acting on them.
//!
//! The crate is organized around seven building blocks:
//!
//! * [`weights`] — regular-variation weight families on (0,1), their
//!   regularity indices, and kernel-weighted integral growth profiles.
//! * [`holocalc`] — truncated power series on the polydisc, fractional
//!   coefficient differentiation, and the extremal test family.
//! * [`quadrature`] — deterministic tensor-product cubature on the polydisc
//!   with boundary-weight absorption, kernel-adapted angular grading, and a
//!   Monte Carlo cross-check integrator.
//! * [`spaces`] — weighted Lebesgue and Besov norms plus pointwise-bound
//!   diagnostics.
//! * [`operators`] — little Hankel and Berezin-type operators, their finite
//!   sections, and norm-ratio probes.
//! * [`partition`] — the dyadic decomposition of the disc into annular
//!   sectors with comparability and covering diagnostics.
//! * [`verify`] — the experiment harness: sufficiency and necessity runs for
//!   the boundedness dichotomies, lemma profiles, and report emission.
//!
//! Everything downstream of a seed is deterministic: cubature nodes are
//! enumerated in a fixed order, reductions are pairwise in that order, and
//! Monte Carlo sampling uses one counter-derived stream per sample index, so
//! results are independent of thread count.

pub mod config;
pub mod error;
pub mod holocalc;
pub mod operators;
pub mod partition;
pub mod quadrature;
pub mod report;
pub mod spaces;
pub mod special;
mod stats;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
