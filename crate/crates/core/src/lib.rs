//! Sums of functions over primes in an arithmetic progression.
//!
//! The crate computes exact sums `Σ f(p)` over primes `p ≤ x` with
//! `p ≡ l (mod k)`, compares them against the integral main terms and
//! remainder envelopes of the classical prime-number-theorem family of
//! asymptotics, and numerically probes the conditions under which
//! `Σ a_m f(m) / Σ b_m f(m) → 1`.
//!
//! Modules, bottom up:
//!
//! - [`apsieve`]: progressions, totients and a segmented sieve.
//! - [`exprdsl`]: the weight-function language `f(t)` with symbolic derivatives.
//! - [`quad`]: adaptive Simpson quadrature, main terms and envelopes.
//! - [`asymp`]: exact sums, the Abel-summation cross-check and convergence tables.
//! - [`conds`]: sufficient and necessary condition reports.
//! - [`cli`]: the `apsums` command-line surface.

pub mod apsieve;
pub mod asymp;
pub mod cli;
pub mod conds;
mod error;
pub mod exprdsl;
pub mod quad;
mod sum;

pub use apsieve::{make_ap, prime_count_ap, sieve_range, ApSpec, PrimeList};
pub use error::{Error, EvalError, ParseError, Result};
pub use exprdsl::{parse, Expr, FuncProfile, Monotonicity};
pub use quad::{integrate, Integral, ModelTag};
