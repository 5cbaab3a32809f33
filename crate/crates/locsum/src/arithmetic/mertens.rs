//! Prefix sums Σ_{p≤t} 1/p and Σ_{p≤t} (1/p − 1/p²) at prime thresholds.
//!
//! The second sum is the cumulative variance of the prime model, and by
//! Mertens' estimate it tracks loglog t with a bounded gap.

use serde::Serialize;

use crate::arithmetic::sieve::for_each_prime;
use crate::variance::CompensatedSum;

/// Per-prime-threshold tables, compensated summation throughout.
#[derive(Debug, Clone)]
pub struct MertensTables {
    thresholds: Vec<u64>,
    recip_sum: Vec<f64>,
    var_sum: Vec<f64>,
}

impl MertensTables {
    pub fn build(primes: &[u64]) -> Self {
        let mut recip = CompensatedSum::new();
        let mut var = CompensatedSum::new();
        let mut recip_sum = Vec::with_capacity(primes.len());
        let mut var_sum = Vec::with_capacity(primes.len());
        for &p in primes {
            let fp = p as f64;
            recip.add(1.0 / fp);
            var.add(1.0 / fp - 1.0 / (fp * fp));
            recip_sum.push(recip.value());
            var_sum.push(var.value());
        }
        MertensTables { thresholds: primes.to_vec(), recip_sum, var_sum }
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    /// (Σ_{p≤t} 1/p, Σ_{p≤t} (1/p − 1/p²)); both 0 when t < 2.
    pub fn at(&self, t: u64) -> (f64, f64) {
        let idx = self.thresholds.partition_point(|&p| p <= t);
        if idx == 0 {
            (0.0, 0.0)
        } else {
            (self.recip_sum[idx - 1], self.var_sum[idx - 1])
        }
    }

    pub fn recip_at(&self, t: u64) -> f64 {
        self.at(t).0
    }

    pub fn variance_at(&self, t: u64) -> f64 {
        self.at(t).1
    }
}

/// Streaming scan of the gap Σ_{p≤n}(1/p − 1/p²) − loglog n over primes
/// n ∈ [lo, limit]. Scales to 10^8 without building tables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MertensGapScan {
    pub lo: u64,
    pub limit: u64,
    /// Max |gap| over scanned primes.
    pub max_abs_gap: f64,
    /// Prime where the max is attained.
    pub argmax: u64,
    /// Gap at the largest prime ≤ limit.
    pub final_gap: f64,
    pub primes_scanned: u64,
}

pub fn mertens_gap_scan(lo: u64, limit: u64) -> MertensGapScan {
    let mut var = CompensatedSum::new();
    let mut scan = MertensGapScan {
        lo,
        limit,
        max_abs_gap: 0.0,
        argmax: 0,
        final_gap: f64::NAN,
        primes_scanned: 0,
    };
    for_each_prime(limit, |p| {
        let fp = p as f64;
        var.add(1.0 / fp - 1.0 / (fp * fp));
        if p >= lo {
            let gap = var.value() - fp.ln().ln();
            if gap.abs() > scan.max_abs_gap {
                scan.max_abs_gap = gap.abs();
                scan.argmax = p;
            }
            scan.final_gap = gap;
            scan.primes_scanned += 1;
        }
    });
    scan
}
