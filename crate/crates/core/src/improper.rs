//! Integrals over `[0, inf)` as a sum of block integrals over `[p b, (p+1) b]`.
//!
//! Completed blocks are summed in order and summation stops once
//! `consecutive_small` successive blocks are each below `tail_tol` in
//! magnitude. Conditionally convergent oscillatory integrands are outside the
//! supported class and usually end with `converged = false`.

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_in, Integrand, Interval, QuadError, QuadOptions, QuadratureResult, Termination};
use crate::report::sig17;
use crate::summation::{build_pool, Neumaier};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPolicy {
    pub block_width: f64,
    pub tail_tol: f64,
    pub max_blocks: usize,
    pub consecutive_small: usize,
}

impl Default for TailPolicy {
    fn default() -> Self {
        Self {
            block_width: 1.0,
            tail_tol: 1e-10,
            max_blocks: 10_000,
            consecutive_small: 2,
        }
    }
}

impl TailPolicy {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.block_width > 0.0) || !self.block_width.is_finite() {
            return Err(QuadError::InvalidArgument(format!(
                "block width must be finite and > 0, got {}",
                self.block_width
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(QuadError::InvalidArgument(format!(
                "tail tolerance must be > 0, got {}",
                self.tail_tol
            )));
        }
        if self.max_blocks < 1 {
            return Err(QuadError::InvalidArgument("max_blocks must be >= 1".into()));
        }
        if self.consecutive_small < 2 {
            return Err(QuadError::InvalidArgument("consecutive_small must be >= 2".into()));
        }
        Ok(())
    }

    /// Interval of block `p`.
    pub fn block(&self, p: usize) -> Result<Interval, QuadError> {
        let lo = p as f64 * self.block_width;
        Interval::new(lo, lo + self.block_width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub p: usize,
    #[serde(serialize_with = "sig17")]
    pub lo: f64,
    #[serde(serialize_with = "sig17")]
    pub hi: f64,
    #[serde(serialize_with = "sig17")]
    pub value: f64,
    #[serde(serialize_with = "sig17")]
    pub error_estimate: f64,
    pub levels_used: u32,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImproperResult {
    /// Aggregate over all blocks. `levels_used` is the deepest block level and
    /// `per_level` is empty.
    #[serde(flatten)]
    pub summary: QuadratureResult,
    /// Whether the tail criterion was met before `max_blocks`.
    pub tail_met: bool,
    pub blocks: Vec<BlockRecord>,
}

/// Integrates `f` over `[0, inf)` block by block.
///
/// `error_estimate` is the magnitude of the last block plus the summed
/// per-block estimates. `converged` requires the tail criterion and every
/// block to converge; exhausting `max_blocks` reports `level_cap`.
pub fn integrate_semi_infinite(
    f: &Integrand,
    policy: &TailPolicy,
    opts: &QuadOptions,
) -> Result<ImproperResult, QuadError> {
    policy.validate()?;
    opts.validate()?;
    let pool = build_pool(opts.threads);

    let mut total = Neumaier::new();
    let mut inner_error = Neumaier::new();
    let mut blocks = Vec::new();
    let mut small_run = 0;
    let mut all_converged = true;
    let mut eval_count = 0u64;
    let mut max_level = 0;
    let mut tail_met = false;

    for p in 0..policy.max_blocks {
        let interval = policy.block(p)?;
        let r = integrate_in(f, interval, opts, pool.as_ref())?;
        total.add(r.value);
        inner_error.add(r.error_estimate);
        eval_count += r.eval_count;
        max_level = max_level.max(r.levels_used);
        all_converged &= r.converged;
        blocks.push(BlockRecord {
            p,
            lo: interval.a(),
            hi: interval.b(),
            value: r.value,
            error_estimate: r.error_estimate,
            levels_used: r.levels_used,
            converged: r.converged,
        });
        if r.value.abs() <= policy.tail_tol {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= policy.consecutive_small {
            tail_met = true;
            break;
        }
    }

    let last = blocks.last().map_or(0.0, |b| b.value.abs());
    let converged = tail_met && all_converged;
    Ok(ImproperResult {
        summary: QuadratureResult {
            value: total.value(),
            error_estimate: last + inner_error.value(),
            levels_used: max_level,
            eval_count,
            converged,
            termination: if converged {
                Termination::ToleranceMet
            } else {
                Termination::LevelCap
            },
            per_level: Vec::new(),
        },
        tail_met,
        blocks,
    })
}
