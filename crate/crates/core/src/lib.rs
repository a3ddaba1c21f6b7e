//! Numerical integration by the generalized method of exhaustion.
//!
//! The integral of `f` over `[a, b]` is expanded as a sum of alternating
//! dyadic level terms,
//!
//! ```text
//! int_a^b f = (b - a) sum_{n>=1} sum_{m=1}^{2^n - 1} (-1)^(m+1) 2^-n f(a + m (b - a) / 2^n)
//! ```
//!
//! Modules:
//!
//! - [`quadrature`]: the incremental engine, stopping rule and convergence tables.
//! - [`improper`]: `[0, inf)` integrals by block decomposition.
//! - [`series`]: series for sin, cos, exp, ln, the sine integral, the Gaussian
//!   integral and the factorial that fall out of the expansion.
//! - [`diffraction`]: aperture fields as sums of plane waves, with an
//!   independent angular-spectrum oracle and a Helmholtz residual check.
//! - [`expr`]: a small expression language for integrands given as text.
//! - [`oracle`], [`bench`], [`report`]: reference rules, benchmark tables and
//!   JSON/CSV output.

pub mod bench;
pub mod diffraction;
pub mod expr;
pub mod improper;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod summation;

pub use quadrature::{
    convergence_report, dyadic_node, integrate, integrate_bounds, integrate_from_zero, integrate_symmetric,
    level_term_naive, ConvergenceRow, Integrand, Interval, LevelTerm, QuadError, QuadOptions, QuadratureResult,
    RefinementState, Termination,
};

/// Environment variable holding the worker-thread cap (`0` = serial).
pub const THREADS_ENV: &str = "EXH_THREADS";

/// Reads [`THREADS_ENV`]; unset or unparsable values mean serial.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}
