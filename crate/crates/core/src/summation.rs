//! Compensated accumulation and the fixed-shape level reduction shared by the
//! quadrature engine and the series evaluators.
//!
//! Every level sum is split into chunks of [`CHUNK`] consecutive odd nodes.
//! Each chunk is reduced serially in ascending order, and chunk results are
//! merged in chunk order. The reduction tree therefore does not depend on the
//! number of worker threads, so serial and parallel runs are bit-identical.

use rayon::prelude::*;

/// Number of odd nodes per reduction chunk.
pub const CHUNK: u64 = 1 << 12;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator into this one.
    #[inline]
    pub fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    /// Multiplies by a power of two. Exact unless the result under/overflows.
    #[inline]
    pub fn scale_pow2(self, factor: f64) -> Self {
        Self {
            sum: self.sum * factor,
            comp: self.comp * factor,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for Neumaier {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a slice in ascending order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().sum::<Neumaier>().value()
}

/// A non-finite sample encountered while reducing a level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadSample {
    /// Dyadic numerator `m` of the offending node.
    pub m: u64,
    pub value: f64,
}

/// Sums `sample(m)` over the `2^(level-1)` odd numerators `m = 1, 3, ..., 2^level - 1`.
///
/// The first non-finite sample in ascending `m` order aborts the reduction.
/// With a pool the chunks are evaluated concurrently; the result is identical
/// to the serial path.
pub fn odd_node_sum<F>(
    level: u32,
    sample: F,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Neumaier, BadSample>
where
    F: Fn(u64) -> f64 + Sync,
{
    debug_assert!(level >= 1);
    let count = 1u64 << (level - 1);
    let chunks = count.div_ceil(CHUNK);

    let reduce_chunk = |c: u64| -> Result<Neumaier, BadSample> {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(count);
        let mut acc = Neumaier::new();
        for j in start..end {
            let m = 2 * j + 1;
            let v = sample(m);
            if !v.is_finite() {
                return Err(BadSample { m, value: v });
            }
            acc.add(v);
        }
        Ok(acc)
    };

    match pool {
        Some(pool) if chunks > 1 => {
            let parts: Vec<Result<Neumaier, BadSample>> =
                pool.install(|| (0..chunks).into_par_iter().map(reduce_chunk).collect());
            let mut total = Neumaier::new();
            for part in parts {
                total.merge(part?);
            }
            Ok(total)
        }
        _ => {
            let mut total = Neumaier::new();
            for c in 0..chunks {
                total.merge(reduce_chunk(c)?);
            }
            Ok(total)
        }
    }
}

/// Builds a worker pool for `threads > 0`; `0` means serial evaluation.
pub fn build_pool(threads: usize) -> Option<rayon::ThreadPool> {
    if threads == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut acc = Neumaier::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn odd_nodes_visited_in_order() {
        let s = odd_node_sum(3, |m| m as f64, None).unwrap();
        assert_eq!(s.value(), 1.0 + 3.0 + 5.0 + 7.0);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let pool = build_pool(4);
        let f = |m: u64| ((m as f64) * 1e-3).sin() * 1.0e3 + 1.0 / (m as f64);
        let serial = odd_node_sum(18, f, None).unwrap();
        let parallel = odd_node_sum(18, f, pool.as_ref()).unwrap();
        assert_eq!(serial.value().to_bits(), parallel.value().to_bits());
    }

    #[test]
    fn first_bad_sample_reported() {
        let pool = build_pool(3);
        let f = |m: u64| if m >= 9001 { f64::NAN } else { 1.0 };
        let serial = odd_node_sum(16, f, None).unwrap_err();
        let parallel = odd_node_sum(16, f, pool.as_ref()).unwrap_err();
        assert_eq!(serial.m, 9001);
        assert_eq!(parallel.m, 9001);
    }
}
