//! Definite integrals by alternating dyadic sums.
//!
//! Level `n` adds the signed term
//!
//! ```text
//! A_n = 2^-n * sum_{m=1}^{2^n - 1} (-1)^(m+1) f(a + m (b-a) / 2^n)
//! ```
//!
//! and the integral is `(b - a) * sum_n A_n`. The partial sum through level
//! `N` telescopes to the interior Riemann sum `(b - a) 2^-N U_N` with
//! `U_N = sum_{m=1}^{2^N - 1} f(a + m (b-a) / 2^N)`, so refining from `N` to
//! `N + 1` only needs the `2^N` new odd-numbered nodes. [`RefinementState`]
//! implements that incremental path; [`level_term_naive`] keeps the literal
//! alternating form for cross-checking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{sig17, sig17_opt};
use crate::summation::{build_pool, odd_node_sum, Neumaier};

/// Highest level supported. Dyadic numerators stay exactly representable.
pub const MAX_LEVEL: u32 = 52;

/// Default refinement cap (about 16.7M nodes).
pub const DEFAULT_MAX_LEVEL: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite sample f({x}) = {value} at level {level}")]
    NonFiniteSample { x: f64, value: f64, level: u32 },
    #[error("interval [{a}, {b}] lies outside the integrand domain [{lo}, {hi}]")]
    OutsideDomain { a: f64, b: f64, lo: f64, hi: f64 },
}

#[inline]
pub(crate) fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// A real integrand. Evaluation must be deterministic and free of shared
/// mutation; nodes of one level may be evaluated concurrently.
pub struct Integrand<'f> {
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync + 'f>,
    label: String,
    known_domain: Option<(f64, f64)>,
}

impl<'f> Integrand<'f> {
    pub fn new(label: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'f) -> Self {
        Self {
            eval: Box::new(eval),
            label: label.into(),
            known_domain: None,
        }
    }

    /// Declares the closed interval on which `eval` is defined.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.known_domain = Some((lo, hi));
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn known_domain(&self) -> Option<(f64, f64)> {
        self.known_domain
    }

    fn check_domain(&self, interval: Interval) -> Result<(), QuadError> {
        match self.known_domain {
            Some((lo, hi)) if interval.a < lo || interval.b > hi => Err(QuadError::OutsideDomain {
                a: interval.a,
                b: interval.b,
                lo,
                hi,
            }),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Debug for Integrand<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrand")
            .field("label", &self.label)
            .field("known_domain", &self.known_domain)
            .finish()
    }
}

/// A finite interval `[a, b]` with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, QuadError> {
        if !a.is_finite() || !b.is_finite() || a > b || !(b - a).is_finite() {
            return Err(QuadError::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// `a + m (b - a) / 2^n` without range checks.
    #[inline]
    pub(crate) fn node_unchecked(&self, n: u32, m: u64) -> f64 {
        self.a + (m as f64) * (self.width() * pow2(-(n as i32)))
    }
}

/// The dyadic node `a + m (b - a) / 2^n` for `1 <= m <= 2^n - 1`.
pub fn dyadic_node(interval: Interval, n: u32, m: u64) -> Result<f64, QuadError> {
    check_level(n)?;
    if m == 0 || m >= (1u64 << n) {
        return Err(QuadError::InvalidArgument(format!(
            "node index m = {m} outside [1, 2^{n} - 1]"
        )));
    }
    Ok(interval.node_unchecked(n, m))
}

fn check_level(n: u32) -> Result<(), QuadError> {
    if n == 0 || n > MAX_LEVEL {
        return Err(QuadError::InvalidArgument(format!(
            "level {n} outside [1, {MAX_LEVEL}]"
        )));
    }
    Ok(())
}

/// Signed area added at one refinement level, without the `(b - a)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelTerm {
    pub n: u32,
    pub value: f64,
    /// Odd-indexed nodes first sampled at this level, `2^(n-1)`.
    pub new_node_count: u64,
}

/// Evaluates level `n` literally, as the alternating sum over all `2^n - 1` nodes.
pub fn level_term_naive(f: &Integrand, interval: Interval, n: u32) -> Result<LevelTerm, QuadError> {
    check_level(n)?;
    let mut acc = Neumaier::new();
    for m in 1..(1u64 << n) {
        let x = interval.node_unchecked(n, m);
        let v = f.eval(x);
        if !v.is_finite() {
            return Err(QuadError::NonFiniteSample { x, value: v, level: n });
        }
        acc.add(if m % 2 == 1 { v } else { -v });
    }
    Ok(LevelTerm {
        n,
        value: acc.value() * pow2(-(n as i32)),
        new_node_count: 1u64 << (n - 1),
    })
}

/// `(b - a) * sum_{n=1}^{levels} A_n` with every level evaluated literally.
pub fn literal_partial_sum(f: &Integrand, interval: Interval, levels: u32) -> Result<f64, QuadError> {
    let mut acc = Neumaier::new();
    for n in 1..=levels {
        acc.add(level_term_naive(f, interval, n)?.value);
    }
    Ok(interval.width() * acc.value())
}

/// Running state of the incremental refinement.
#[derive(Debug, Clone)]
pub struct RefinementState {
    interval: Interval,
    level: u32,
    node_sum: Neumaier,
    partial: f64,
    history: Vec<LevelTerm>,
    eval_count: u64,
}

impl RefinementState {
    pub fn new(interval: Interval) -> Self {
        Self {
            interval,
            level: 0,
            node_sum: Neumaier::new(),
            partial: 0.0,
            history: Vec::new(),
            eval_count: 0,
        }
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `U_N`, the plain sum of `f` over the current interior nodes.
    pub fn node_sum(&self) -> f64 {
        self.node_sum.value()
    }

    /// `S_N = (b - a) sum_{n <= N} A_n`.
    pub fn partial(&self) -> f64 {
        self.partial
    }

    pub fn history(&self) -> &[LevelTerm] {
        &self.history
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Advances to the next level. On error the state is left unchanged.
    pub fn refine(&mut self, f: &Integrand) -> Result<&LevelTerm, QuadError> {
        self.refine_in(f, None)
    }

    pub(crate) fn refine_in(
        &mut self,
        f: &Integrand,
        pool: Option<&rayon::ThreadPool>,
    ) -> Result<&LevelTerm, QuadError> {
        let n = self.level + 1;
        check_level(n)?;
        let interval = self.interval;
        let odd = odd_node_sum(n, |m| f.eval(interval.node_unchecked(n, m)), pool).map_err(|bad| {
            QuadError::NonFiniteSample {
                x: interval.node_unchecked(n, bad.m),
                value: bad.value,
                level: n,
            }
        })?;

        let scale = pow2(-(n as i32));
        // A_{N+1} = 2^-(N+1) U_{N+1} - 2^-N U_N = 2^-(N+1) (odd - U_N)
        let term = (odd.value() - self.node_sum.value()) * scale;
        self.node_sum.merge(odd);
        self.partial = interval.width() * (self.node_sum.value() * scale);
        self.level = n;
        self.eval_count += 1u64 << (n - 1);
        self.history.push(LevelTerm {
            n,
            value: term,
            new_node_count: 1u64 << (n - 1),
        });
        Ok(self.history.last().expect("just pushed"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ToleranceMet,
    LevelCap,
    NonFiniteSample,
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    /// `A_n (b - a)`.
    #[serde(rename = "A_n", serialize_with = "sig17")]
    pub a_n: f64,
    #[serde(serialize_with = "sig17")]
    pub partial: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub error_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    #[serde(serialize_with = "sig17")]
    pub value: f64,
    #[serde(serialize_with = "sig17")]
    pub error_estimate: f64,
    pub levels_used: u32,
    pub eval_count: u64,
    pub converged: bool,
    pub termination: Termination,
    /// Per-level trace; `error_ratio` is `|A_{n+1} / A_n|`, absent on the last row.
    pub per_level: Vec<ConvergenceRow>,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
            levels_used: 0,
            eval_count: 0,
            converged: true,
            termination: Termination::ToleranceMet,
            per_level: Vec::new(),
        }
    }

    fn negated(mut self) -> Self {
        self.value = -self.value;
        for row in &mut self.per_level {
            row.a_n = -row.a_n;
            row.partial = -row.partial;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub min_level: u32,
    pub max_level: u32,
    /// Worker threads for node evaluation; `0` is serial.
    pub threads: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_level: 1,
            max_level: DEFAULT_MAX_LEVEL,
            threads: 0,
        }
    }
}

impl QuadOptions {
    /// Runs exactly `level` levels.
    pub fn forced(level: u32) -> Self {
        Self {
            min_level: level,
            max_level: level,
            ..Self::default()
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.tol > 0.0) {
            return Err(QuadError::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.min_level < 1 || self.min_level > self.max_level || self.max_level > MAX_LEVEL {
            return Err(QuadError::InvalidArgument(format!(
                "need 1 <= min_level ({}) <= max_level ({}) <= {MAX_LEVEL}",
                self.min_level, self.max_level
            )));
        }
        Ok(())
    }
}

fn trace_rows(state: &RefinementState) -> Vec<ConvergenceRow> {
    let width = state.interval.width();
    let terms = state.history();
    let mut partial = Neumaier::new();
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            partial.add(t.value);
            let error_ratio = terms
                .get(i + 1)
                .and_then(|next| ratio(next.value, t.value));
            ConvergenceRow {
                n: t.n,
                a_n: t.value * width,
                partial: partial.value() * width,
                error_ratio,
            }
        })
        .collect()
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| (num / den).abs())
}

/// Integrates `f` over `interval` by incremental exhaustion.
///
/// Stops once `(b - a)|A_N| <= tol * max(1, |S_N|)` holds at two consecutive
/// levels (and `N >= min_level`), or at `max_level`.
pub fn integrate(f: &Integrand, interval: Interval, opts: &QuadOptions) -> Result<QuadratureResult, QuadError> {
    opts.validate()?;
    let pool = build_pool(opts.threads);
    integrate_in(f, interval, opts, pool.as_ref())
}

pub(crate) fn integrate_in(
    f: &Integrand,
    interval: Interval,
    opts: &QuadOptions,
    pool: Option<&rayon::ThreadPool>,
) -> Result<QuadratureResult, QuadError> {
    if interval.is_degenerate() {
        return Ok(QuadratureResult::zero());
    }
    f.check_domain(interval)?;

    let width = interval.width();
    let mut state = RefinementState::new(interval);
    let mut hits = 0;
    let (converged, last_term) = loop {
        let term = state.refine_in(f, pool)?.value;
        let estimate = width * term.abs();
        if estimate <= opts.tol * state.partial().abs().max(1.0) {
            hits += 1;
        } else {
            hits = 0;
        }
        if state.level() >= opts.min_level && hits >= 2 {
            break (true, term);
        }
        if state.level() >= opts.max_level {
            break (false, term);
        }
    };

    Ok(QuadratureResult {
        value: state.partial(),
        error_estimate: width * last_term.abs(),
        levels_used: state.level(),
        eval_count: state.eval_count(),
        converged,
        termination: if converged {
            Termination::ToleranceMet
        } else {
            Termination::LevelCap
        },
        per_level: trace_rows(&state),
    })
}

/// Integrates from `a` to `b` in either orientation; `a > b` gives the
/// negative of the integral over `[b, a]`.
pub fn integrate_bounds(f: &Integrand, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadratureResult, QuadError> {
    if a <= b {
        integrate(f, Interval::new(a, b)?, opts)
    } else {
        integrate(f, Interval::new(b, a)?, opts).map(QuadratureResult::negated)
    }
}

/// `int_0^b f`, with `b < 0` handled by orientation reversal.
pub fn integrate_from_zero(f: &Integrand, b: f64, opts: &QuadOptions) -> Result<QuadratureResult, QuadError> {
    integrate_bounds(f, 0.0, b, opts)
}

/// `int_{-b}^{b} h` using the folded sum over `h(x) + h(-x)` on `[0, b]`.
///
/// Odd integrands cancel node by node, so the result is exactly zero at every
/// level for them.
pub fn integrate_symmetric(h: &Integrand, b: f64, opts: &QuadOptions) -> Result<QuadratureResult, QuadError> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(QuadError::InvalidArgument(format!("half-width must be >= 0, got {b}")));
    }
    if let Some((lo, hi)) = h.known_domain() {
        if -b < lo || b > hi {
            return Err(QuadError::OutsideDomain { a: -b, b, lo, hi });
        }
    }
    let folded = Integrand::new(format!("{} (folded)", h.label()), |x| h.eval(x) + h.eval(-x));
    integrate(&folded, Interval::new(0.0, b)?, opts)
}

/// Level-by-level convergence table for levels `1..=levels`.
///
/// With `exact`, `error_ratio` on row `n` is `|I - S_{n+1}| / |I - S_n|`;
/// otherwise `|A_{n+1} / A_n|`. One extra level is evaluated to fill the last row.
pub fn convergence_report(
    f: &Integrand,
    interval: Interval,
    levels: u32,
    exact: Option<f64>,
) -> Result<Vec<ConvergenceRow>, QuadError> {
    if levels < 2 || levels >= MAX_LEVEL {
        return Err(QuadError::InvalidArgument(format!(
            "levels must be in [2, {}], got {levels}",
            MAX_LEVEL - 1
        )));
    }
    let width = interval.width();
    let mut state = RefinementState::new(interval);
    let mut partials = Vec::with_capacity(levels as usize + 1);
    for _ in 0..=levels {
        state.refine(f)?;
        partials.push(state.partial());
    }
    let terms = state.history();
    Ok((0..levels as usize)
        .map(|i| {
            let error_ratio = match exact {
                Some(exact) => ratio(exact - partials[i + 1], exact - partials[i]),
                None => ratio(terms[i + 1].value, terms[i].value),
            };
            ConvergenceRow {
                n: terms[i].n,
                a_n: terms[i].value * width,
                partial: partials[i],
                error_ratio,
            }
        })
        .collect())
}
