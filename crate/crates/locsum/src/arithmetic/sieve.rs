//! Segmented smallest-prime-factor sieve and prime enumeration.

use crate::error::{Error, Result};

/// Hard cap on the spf table horizon (u32 entries, ~4 bytes per integer).
pub const DEFAULT_CAPACITY: u64 = 100_000_000;

/// Default segment length for the segmented passes.
pub const DEFAULT_SEGMENT: usize = 1 << 16;

/// Smallest-prime-factor table for 2..=x with the prime list as by-product.
#[derive(Debug, Clone)]
pub struct SieveTable {
    x: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
    segment_size: usize,
}

impl SieveTable {
    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    /// Smallest prime factor of m, 2 ≤ m ≤ x.
    pub fn spf(&self, m: u64) -> Result<u64> {
        if m < 2 || m > self.x {
            return Err(Error::IndexOutOfRange { index: m as usize, len: self.x as usize });
        }
        Ok(self.spf[m as usize] as u64)
    }

    pub fn is_prime(&self, m: u64) -> Result<bool> {
        Ok(self.spf(m)? == m)
    }

    /// Distinct prime factors of m in increasing order (multiplicity ignored).
    pub fn distinct_prime_factors(&self, m: u64) -> Result<Vec<u64>> {
        if m < 2 || m > self.x {
            return Err(Error::IndexOutOfRange { index: m as usize, len: self.x as usize });
        }
        let mut out = Vec::new();
        let mut rest = m;
        while rest > 1 {
            let p = self.spf[rest as usize] as u64;
            out.push(p);
            while rest % p == 0 {
                rest /= p;
            }
        }
        Ok(out)
    }

    /// ω(m, x): number of distinct prime factors of m.
    pub fn omega(&self, m: u64) -> Result<u32> {
        Ok(self.distinct_prime_factors(m)?.len() as u32)
    }
}

/// Build the spf table for 2..=x with the default segment size.
pub fn build_sieve(x: u64) -> Result<SieveTable> {
    build_sieve_with_segment(x, DEFAULT_SEGMENT)
}

/// Build with an explicit segment size (segment boundaries must not alter
/// values; the tests compare different sizes entry-wise).
pub fn build_sieve_with_segment(x: u64, segment_size: usize) -> Result<SieveTable> {
    if x < 2 {
        return Err(Error::Domain(format!("sieve horizon must be >= 2, got {x}")));
    }
    if x > DEFAULT_CAPACITY {
        return Err(Error::Capacity(format!(
            "sieve horizon {x} exceeds the configured memory bound {DEFAULT_CAPACITY}"
        )));
    }
    if segment_size < 2 {
        return Err(Error::Domain("segment size must be >= 2".into()));
    }
    let n = x as usize;
    let mut spf = vec![0u32; n + 1];
    let root = (x as f64).sqrt() as u64 + 1;
    let base = simple_primes(root);

    let mut lo = 2usize;
    while lo <= n {
        let hi = (lo + segment_size - 1).min(n); // inclusive
        for &p in &base {
            let p = p as usize;
            if p > hi {
                break;
            }
            let start = ((lo + p - 1) / p) * p;
            let mut m = start.max(p);
            while m <= hi {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
        // Anything untouched has no prime factor <= sqrt(x): it is prime.
        for m in lo..=hi {
            if spf[m] == 0 {
                spf[m] = m as u32;
            }
        }
        lo = hi + 1;
    }

    let primes: Vec<u64> =
        (2..=n).filter(|&m| spf[m] as usize == m).map(|m| m as u64).collect();
    Ok(SieveTable { x, spf, primes, segment_size })
}

/// Plain monolithic sieve of Eratosthenes. Kept simple on purpose: it is the
/// independent cross-check for the segmented table.
pub fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for m in 2..=n {
        if !composite[m] {
            primes.push(m as u64);
            let mut k = m * m;
            while k <= n {
                composite[k] = true;
                k += m;
            }
        }
    }
    primes
}

/// Stream every prime ≤ limit through `f`, in increasing order, using a
/// segmented odd-only bitset. Nothing proportional to `limit` is stored, so
/// this reaches 10^8 in seconds.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    f(2);
    if limit < 3 {
        return;
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base: Vec<u64> = simple_primes(root).into_iter().skip(1).collect(); // odd base primes

    const SEG: u64 = 1 << 18; // odds per segment
    let mut lo = 3u64; // segment covers odds in [lo, lo + 2*SEG)
    let mut mask = vec![false; SEG as usize];
    while lo <= limit {
        let hi = (lo + 2 * SEG - 1).min(limit + 1) | 1; // last odd candidate
        mask.iter_mut().for_each(|b| *b = false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut start = ((lo + p - 1) / p) * p;
            if start < p * p {
                start = p * p;
            }
            if start % 2 == 0 {
                start += p;
            }
            let mut m = start;
            while m <= hi {
                mask[((m - lo) / 2) as usize] = true;
                m += 2 * p;
            }
        }
        let mut m = lo;
        while m <= hi && m <= limit {
            if !mask[((m - lo) / 2) as usize] {
                f(m);
            }
            m += 2;
        }
        lo = hi + 2;
    }
}
