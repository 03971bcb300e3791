//! Hausdorff dimension of digit-frequency sets in β-expansions.
//!
//! For β > 1 the greedy algorithm writes every `x ∈ [0,1)` as
//! `x = Σ ε_n β^{-n}` with digits produced by the β-transformation
//! `T_β(x) = βx − ⌊βx⌋`. The frequency set `F_a` collects the points whose
//! expansion has asymptotic frequency `a` of the digit 0.
//!
//! The crate computes `dim_H F_a` for pseudo-golden β (the root of
//! `β^m = β^{m−1} + … + β + 1`, where `ε(1,β) = 1^m 0^∞`), the golden ratio and
//! β = 2, and checks every value through independent routes:
//!
//! - [`dimension`]: maximization of the concave entropy objective over its
//!   polytope, the `m = 3` closed form, and a transfer-matrix pressure oracle.
//! - [`markov`]: k-step Markov measures, Markovization of cylinder measures and
//!   the explicit entropy-maximizing measure.
//! - [`language`]: the follower graph of the β-shift and exact big-integer
//!   word counts by number of zeros.
//! - [`expansion`]: greedy expansions, Parry admissibility, projections and
//!   cylinder geometry.
//!
//! ```
//! use betafreq::{dimension::{freq_dim, FreqQuery}, BetaSystem};
//!
//! let sys = BetaSystem::pseudo_golden(3).unwrap();
//! let res = freq_dim(&FreqQuery::new(sys, 0.5).unwrap()).unwrap();
//! assert!((res.dim - 0.901_421_231_872).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod expansion;
pub mod language;
pub mod markov;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use expansion::{BetaKind, BetaSystem, CylinderInterval, DigitWord};
