//! Series for elementary and special functions obtained by applying the
//! alternating dyadic sum to a known integral.
//!
//! Each double-sum series has the shape
//!
//! ```text
//! offset + prefactor * sum_{n=1}^{N} sum_{m=1}^{2^n - 1} (-1)^(m+1) t(m, n)
//! ```
//!
//! where `t(m, n) = 2^-n h(m / 2^n)`. The inner sums telescope, so the
//! truncation through level `N` is evaluated as `2^-N sum_m h(m / 2^N)` with
//! only the odd numerators sampled at each new level. [`Series::eval_literal`]
//! evaluates the printed double sum term by term for cross-checking.
//!
//! | series          | value                         | `t(m, n)`                               |
//! |-----------------|-------------------------------|-----------------------------------------|
//! | `SincSum(a, b)` | `sin(b a) / a`                | `b 2^-n cos(m b a / 2^n)`               |
//! | `Sin(x)`        | `sin x`                       | `x 2^-n cos(m x / 2^n)`                 |
//! | `Cos(x)`        | `cos x`                       | `1 - x 2^-n sin(m x / 2^n)`             |
//! | `SineIntegral`  | `int_0^b sin(a x) / x dx`     | `sin(m b a / 2^n) / m`                  |
//! | `Exp(x)`        | `e^x`                         | `1 + x 2^-n e^(m x / 2^n)`              |
//! | `Gaussian(a,b)` | `int_0^b e^(-a x^2) dx`       | `b 2^-n e^(-a (m b)^2 / 4^n)`           |
//! | `Ln(x)`         | `ln x`, `x > 0`               | `(x - 1) / (2^n + m (x - 1))`           |
//! | `Factorial(p)`  | `Gamma(p + 1)`, `p >= 0`      | `2^-n [ln(2^n / m)]^p`                  |
//!
//! `Factorial` converges slowly: its integrand `[ln(1/x)]^p` is unbounded at
//! `x = 0`, and the missing endpoint contribution decays like
//! `2^-N (N ln 2)^p`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::quadrature::pow2;
use crate::summation::{odd_node_sum, Neumaier};

/// Deepest truncation level accepted by the evaluators.
pub const MAX_SERIES_LEVEL: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid truncation: {0}")]
    Levels(String),
    #[error("missing parameter '{param}' for series {id}")]
    MissingParam { id: SeriesId, param: &'static str },
    #[error("unknown series '{0}'")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesId {
    SincProduct,
    SincSum,
    Sin,
    Cos,
    SineIntegral,
    Exp,
    Gaussian,
    Ln,
    Factorial,
}

impl SeriesId {
    pub const ALL: [SeriesId; 9] = [
        SeriesId::SincProduct,
        SeriesId::SincSum,
        SeriesId::Sin,
        SeriesId::Cos,
        SeriesId::SineIntegral,
        SeriesId::Exp,
        SeriesId::Gaussian,
        SeriesId::Ln,
        SeriesId::Factorial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesId::SincProduct => "sinc_product",
            SeriesId::SincSum => "sinc_sum",
            SeriesId::Sin => "sin",
            SeriesId::Cos => "cos",
            SeriesId::SineIntegral => "sine_integral",
            SeriesId::Exp => "exp",
            SeriesId::Gaussian => "gaussian",
            SeriesId::Ln => "ln",
            SeriesId::Factorial => "factorial",
        }
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesId {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let id = match key.as_str() {
            "si" => SeriesId::SineIntegral,
            "gamma" => SeriesId::Factorial,
            _ => *SeriesId::ALL
                .iter()
                .find(|id| id.name() == key)
                .ok_or_else(|| SeriesError::UnknownId(s.to_string()))?,
        };
        Ok(id)
    }
}

/// Loose parameter bag, as collected from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeriesArgs {
    pub x: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub p: Option<f64>,
}

/// A series together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Series {
    /// `cos^2(a/2) + sum_n sin^2(a/2^(n+1)) prod_{m<=n} cos(a/2^m)`, tends to `sin(a)/a`.
    SincProduct { a: f64 },
    SincSum { a: f64, b: f64 },
    Sin { x: f64 },
    Cos { x: f64 },
    SineIntegral { a: f64, b: f64 },
    Exp { x: f64 },
    Gaussian { a: f64, b: f64 },
    Ln { x: f64 },
    Factorial { p: f64 },
}

impl Series {
    /// Builds a series from an id and loose arguments. `SincSum` defaults `b` to 1.
    pub fn from_args(id: SeriesId, args: SeriesArgs) -> Result<Self, SeriesError> {
        let need = |v: Option<f64>, param: &'static str| v.ok_or(SeriesError::MissingParam { id, param });
        let s = match id {
            SeriesId::SincProduct => Series::SincProduct { a: need(args.a.or(args.x), "a")? },
            SeriesId::SincSum => Series::SincSum {
                a: need(args.a.or(args.x), "a")?,
                b: args.b.unwrap_or(1.0),
            },
            SeriesId::Sin => Series::Sin { x: need(args.x, "x")? },
            SeriesId::Cos => Series::Cos { x: need(args.x, "x")? },
            SeriesId::SineIntegral => Series::SineIntegral {
                a: need(args.a, "a")?,
                b: need(args.b, "b")?,
            },
            SeriesId::Exp => Series::Exp { x: need(args.x, "x")? },
            SeriesId::Gaussian => Series::Gaussian {
                a: need(args.a, "a")?,
                b: need(args.b, "b")?,
            },
            SeriesId::Ln => Series::Ln { x: need(args.x, "x")? },
            SeriesId::Factorial => Series::Factorial { p: need(args.p.or(args.x), "p")? },
        };
        s.check_domain()?;
        Ok(s)
    }

    pub fn id(&self) -> SeriesId {
        match self {
            Series::SincProduct { .. } => SeriesId::SincProduct,
            Series::SincSum { .. } => SeriesId::SincSum,
            Series::Sin { .. } => SeriesId::Sin,
            Series::Cos { .. } => SeriesId::Cos,
            Series::SineIntegral { .. } => SeriesId::SineIntegral,
            Series::Exp { .. } => SeriesId::Exp,
            Series::Gaussian { .. } => SeriesId::Gaussian,
            Series::Ln { .. } => SeriesId::Ln,
            Series::Factorial { .. } => SeriesId::Factorial,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Series::SincProduct { a } => vec![a],
            Series::Sin { x } | Series::Cos { x } | Series::Exp { x } | Series::Ln { x } => vec![x],
            Series::SincSum { a, b } | Series::SineIntegral { a, b } | Series::Gaussian { a, b } => vec![a, b],
            Series::Factorial { p } => vec![p],
        }
    }

    pub fn check_domain(&self) -> Result<(), SeriesError> {
        if self.params().iter().any(|v| !v.is_finite()) {
            return Err(SeriesError::Domain(format!("{}: parameters must be finite", self.id())));
        }
        match *self {
            Series::Ln { x } if x <= 0.0 => Err(SeriesError::Domain(format!("ln needs x > 0, got {x}"))),
            Series::Factorial { p } if p < 0.0 => {
                Err(SeriesError::Domain(format!("factorial needs p >= 0, got {p}")))
            }
            _ => Ok(()),
        }
    }

    /// `(offset, prefactor)` around the double sum.
    fn frame(&self) -> (f64, f64) {
        match *self {
            Series::SincProduct { .. } => (0.0, 1.0),
            Series::SincSum { b, .. } | Series::Gaussian { b, .. } => (0.0, b),
            Series::Sin { x } => (0.0, x),
            Series::Cos { x } => (1.0, -x),
            Series::Exp { x } => (1.0, x),
            Series::SineIntegral { .. } | Series::Ln { .. } | Series::Factorial { .. } => (0.0, 1.0),
        }
    }

    /// `2^n t(m, n)`, which depends on `m / 2^n` only.
    #[inline]
    fn scaled_term(&self, m: u64, n: u32) -> f64 {
        let mf = m as f64;
        let h = pow2(-(n as i32));
        match *self {
            Series::SincProduct { .. } => unreachable!("product form has no double sum"),
            Series::SincSum { a, b } => (mf * (b * a * h)).cos(),
            Series::Sin { x } => (mf * (x * h)).cos(),
            Series::Cos { x } => (mf * (x * h)).sin(),
            Series::SineIntegral { a, b } => (mf * (b * a * h)).sin() / (mf * h),
            Series::Exp { x } => (mf * (x * h)).exp(),
            Series::Gaussian { a, b } => {
                let t = mf * (b * h);
                (-a * t * t).exp()
            }
            Series::Ln { x } => (x - 1.0) / (1.0 + mf * ((x - 1.0) * h)),
            Series::Factorial { p } => (1.0 / (mf * h)).ln().powf(p),
        }
    }

    /// `t(m, n)` exactly as printed, without sign.
    fn printed_term(&self, m: u64, n: u32) -> f64 {
        let mf = m as f64;
        let two_n = pow2(n as i32);
        match *self {
            Series::SincProduct { .. } => unreachable!("product form has no double sum"),
            Series::SincSum { a, b } => (mf * b * a / two_n).cos() / two_n,
            Series::Sin { x } => (mf * x / two_n).cos() / two_n,
            Series::Cos { x } => (mf * x / two_n).sin() / two_n,
            Series::SineIntegral { a, b } => (mf * b * a / two_n).sin() / mf,
            Series::Exp { x } => (mf * x / two_n).exp() / two_n,
            Series::Gaussian { a, b } => (-a * (mf * b).powi(2) / (two_n * two_n)).exp() / two_n,
            Series::Ln { x } => (x - 1.0) / (two_n + mf * (x - 1.0)),
            Series::Factorial { p } => (two_n / mf).ln().powf(p) / two_n,
        }
    }

    /// Truncation through level `levels` (number of product terms for
    /// `SincProduct`), using the telescoped incremental sum.
    pub fn eval(&self, levels: u32) -> Result<f64, SeriesError> {
        self.check_domain()?;
        if let Series::SincProduct { a } = *self {
            return Ok(sinc_product(a, levels));
        }
        check_levels(levels)?;
        let mut acc = Neumaier::new();
        for n in 1..=levels {
            let odd = odd_node_sum(n, |m| self.scaled_term(m, n), None).map_err(|bad| {
                SeriesError::Domain(format!("{}: non-finite term {} at m = {}, n = {n}", self.id(), bad.value, bad.m))
            })?;
            acc.merge(odd);
        }
        let (offset, prefactor) = self.frame();
        Ok(offset + prefactor * (acc.value() * pow2(-(levels as i32))))
    }

    /// The printed double sum evaluated term by term, through level `levels`.
    pub fn eval_literal(&self, levels: u32) -> Result<f64, SeriesError> {
        self.check_domain()?;
        if let Series::SincProduct { a } = *self {
            return Ok(sinc_product(a, levels));
        }
        check_levels(levels)?;
        let mut acc = Neumaier::new();
        for n in 1..=levels {
            for m in 1..(1u64 << n) {
                let t = self.printed_term(m, n);
                acc.add(if m % 2 == 1 { t } else { -t });
            }
        }
        let (offset, prefactor) = self.frame();
        Ok(offset + prefactor * acc.value())
    }
}

fn check_levels(levels: u32) -> Result<(), SeriesError> {
    if levels == 0 || levels > MAX_SERIES_LEVEL {
        return Err(SeriesError::Levels(format!(
            "levels must be in [1, {MAX_SERIES_LEVEL}], got {levels}"
        )));
    }
    Ok(())
}

/// Evaluates a series; see [`Series::eval`].
pub fn eval_series(series: &Series, levels: u32) -> Result<f64, SeriesError> {
    series.eval(levels)
}

/// Product form of `sin(a)/a` truncated after `terms` correction terms.
pub fn sinc_product(a: f64, terms: u32) -> f64 {
    let mut acc = Neumaier::new();
    acc.add((a / 2.0).cos().powi(2));
    let mut product = 1.0;
    for n in 1..=terms {
        product *= (a * pow2(-(n as i32))).cos();
        acc.add((a * pow2(-(n as i32 + 1))).sin().powi(2) * product);
    }
    acc.value()
}

/// Double-sum form of `sin(a)/a` through level `levels`.
pub fn sinc_sum(a: f64, levels: u32) -> Result<f64, SeriesError> {
    Series::SincSum { a, b: 1.0 }.eval(levels)
}
