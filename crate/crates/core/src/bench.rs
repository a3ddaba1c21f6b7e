//! Error versus evaluation count for exhaustion and classical composite rules
//! at matched budgets of `2^N - 1` evaluations.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::oracle::{composite_midpoint, composite_simpson, composite_trapezoid};
use crate::quadrature::{Integrand, Interval, QuadError, RefinementState};
use crate::report::{csv_field, sig17};

pub const BENCH_CSV_HEADER: &str = "function,method,level,eval_count,abs_error";

/// Budgets run from `2^4 - 1` to `2^18 - 1` evaluations.
pub const BENCH_LEVELS: std::ops::RangeInclusive<u32> = 4..=18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustion,
    Midpoint,
    Trapezoid,
    Simpson,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Exhaustion, Method::Midpoint, Method::Trapezoid, Method::Simpson];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exhaustion => "exhaustion",
            Method::Midpoint => "midpoint",
            Method::Trapezoid => "trapezoid",
            Method::Simpson => "simpson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub function: String,
    pub method: Method,
    pub level: u32,
    pub eval_count: u64,
    #[serde(serialize_with = "sig17")]
    pub abs_error: f64,
}

/// An integrand with a known exact integral.
pub struct BenchCase<'f> {
    pub f: Integrand<'f>,
    pub interval: Interval,
    pub exact: f64,
}

/// Smooth corpus with `f(a) + f(b) != 0`, where exhaustion decays at ratio 1/2.
pub fn default_suite() -> Vec<BenchCase<'static>> {
    let unit = Interval::new(0.0, 1.0).expect("valid");
    vec![
        BenchCase {
            f: Integrand::new("exp(x)", f64::exp),
            interval: unit,
            exact: std::f64::consts::E - 1.0,
        },
        BenchCase {
            f: Integrand::new("cos(x)", f64::cos),
            interval: unit,
            exact: 1f64.sin(),
        },
        BenchCase {
            f: Integrand::new("1/(1+x)", |x| 1.0 / (1.0 + x)),
            interval: unit,
            exact: std::f64::consts::LN_2,
        },
        BenchCase {
            f: Integrand::new("x^2", |x| x * x),
            interval: unit,
            exact: 1.0 / 3.0,
        },
        BenchCase {
            f: Integrand::new("sqrt(1+x)", |x: f64| (1.0 + x).sqrt()),
            interval: Interval::new(0.0, 3.0).expect("valid"),
            exact: 14.0 / 3.0,
        },
    ]
}

/// Runs every method at each budget `2^N - 1`, `N` in [`BENCH_LEVELS`].
pub fn bench_matched_evals(case: &BenchCase, methods: &[Method]) -> Result<Vec<BenchRow>, QuadError> {
    let (a, b) = (case.interval.a(), case.interval.b());
    let f = |x: f64| case.f.eval(x);
    let mut rows = Vec::new();
    let mut push = |method, level, eval_count, estimate: f64| {
        rows.push(BenchRow {
            function: case.f.label().to_string(),
            method,
            level,
            eval_count,
            abs_error: (estimate - case.exact).abs(),
        });
    };
    for &method in methods {
        match method {
            Method::Exhaustion => {
                let mut state = RefinementState::new(case.interval);
                for level in 1..=*BENCH_LEVELS.end() {
                    state.refine(&case.f)?;
                    if BENCH_LEVELS.contains(&level) {
                        push(method, level, state.eval_count(), state.partial());
                    }
                }
            }
            Method::Midpoint => {
                for level in BENCH_LEVELS {
                    let panels = (1usize << level) - 1;
                    push(method, level, panels as u64, composite_midpoint(f, a, b, panels));
                }
            }
            Method::Trapezoid => {
                for level in BENCH_LEVELS {
                    let panels = (1usize << level) - 2;
                    push(method, level, panels as u64 + 1, composite_trapezoid(f, a, b, panels));
                }
            }
            Method::Simpson => {
                for level in BENCH_LEVELS {
                    let panels = (1usize << level) - 2;
                    push(method, level, panels as u64 + 1, composite_simpson(f, a, b, panels));
                }
            }
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.function,
            r.method,
            r.level,
            r.eval_count,
            csv_field(r.abs_error)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_case(label: &str, f: fn(f64) -> f64, exact: f64) -> BenchCase<'static> {
        BenchCase {
            f: Integrand::new(label, f),
            interval: Interval::new(0.0, 1.0).unwrap(),
            exact,
        }
    }

    #[test]
    fn budgets_are_matched() {
        let case = unit_case("1", |_| 1.0, 1.0);
        let rows = bench_matched_evals(&case, &Method::ALL).unwrap();
        for method in Method::ALL {
            let counts: Vec<u64> = rows.iter().filter(|r| r.method == method).map(|r| r.eval_count).collect();
            let expect: Vec<u64> = BENCH_LEVELS.map(|n| (1u64 << n) - 1).collect();
            assert_eq!(counts, expect, "{method}");
        }
        let at10 = rows.iter().find(|r| r.method == Method::Exhaustion && r.level == 10).unwrap();
        assert_eq!(at10.abs_error, 2f64.powi(-10));
    }

    #[test]
    fn midpoint_beats_exhaustion_on_parabola() {
        let case = unit_case("x^2", |x| x * x, 1.0 / 3.0);
        let rows = bench_matched_evals(&case, &[Method::Exhaustion, Method::Midpoint]).unwrap();
        for level in BENCH_LEVELS {
            let get = |m| rows.iter().find(|r| r.method == m && r.level == level).unwrap().abs_error;
            let panels = ((1u64 << level) - 1) as f64;
            let mid = get(Method::Midpoint);
            if level <= 12 {
                assert!((mid - 1.0 / (12.0 * panels * panels)).abs() <= 1e-6 * mid, "{level}");
            }
            assert!(mid < get(Method::Exhaustion));
        }
    }

    #[test]
    fn csv_layout() {
        let case = unit_case("x", |x| x, 0.5);
        let rows = bench_matched_evals(&case, &[Method::Exhaustion]).unwrap();
        let csv = bench_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("x,exhaustion,4,15,"));
        assert_eq!(csv.lines().count(), 1 + BENCH_LEVELS.count());
    }
}
