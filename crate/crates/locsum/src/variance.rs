//! Variance profiles: per-term variances σ_j², prefix sums s_n², the ratio
//! bound D, and the variance-to-index map h(n).
//!
//! A [`VarianceProfile`] is immutable after construction and is the backbone
//! every statistic indexes against: windows over variance levels are resolved
//! to index ranges through `h(n) = max{k : s_k² ≤ n}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::WindowFamily;

/// Per-term variances with explicitly stored prefix sums.
///
/// Prefix sums are built once with compensated (Neumaier) summation and kept,
/// so window resolution is reproducible bit-for-bit across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    sigma_sq: Vec<f64>,
    prefix: Vec<f64>,
    label: String,
}

/// The empirical ratio bound D = max s_{j+1}/s_j together with the index
/// where the maximum is attained, so early-index dominance is visible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBound {
    pub value: f64,
    pub argmax: usize,
}

/// An index window (h(N), h(N·f_N)] at variance level N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexWindow {
    /// Exclusive lower index bound h(N).
    pub lo: usize,
    /// Inclusive upper index bound h(N·f_N).
    pub hi: usize,
    /// The variance level N.
    pub level: f64,
    /// The evaluated width f_N.
    pub width: f64,
}

impl IndexWindow {
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    /// The indices n with lo < n ≤ hi.
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.lo + 1..=self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }
}

/// Compensated running sum (Neumaier variant of Kahan).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl VarianceProfile {
    /// Build a profile from per-term variances σ_j² (j = 1..).
    ///
    /// Leading zeros are allowed (they encode the s_1 = 0 convention); a
    /// profile that never becomes positive is rejected.
    pub fn new(label: impl Into<String>, sigma_sq: Vec<f64>) -> Result<Self> {
        if sigma_sq.is_empty() {
            return Err(Error::DegenerateProfile("profile has no terms".into()));
        }
        for (i, &v) in sigma_sq.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::DegenerateProfile(format!(
                    "sigma_sq[{}] = {v} is not a finite non-negative variance",
                    i + 1
                )));
            }
        }
        let mut prefix = Vec::with_capacity(sigma_sq.len());
        let mut acc = CompensatedSum::new();
        let mut last = 0.0f64;
        for &v in &sigma_sq {
            acc.add(v);
            // Summing non-negatives: pin any sub-ulp wobble from the
            // compensation so the stored prefix is monotone by construction.
            let s = acc.value().max(last);
            prefix.push(s);
            last = s;
        }
        if *prefix.last().unwrap() <= prefix[0] && prefix[0] == 0.0 {
            return Err(Error::DegenerateProfile(
                "total variance is zero over the whole range".into(),
            ));
        }
        Ok(VarianceProfile { sigma_sq, prefix, label: label.into() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.sigma_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_sq.is_empty()
    }

    /// σ_n² for 1 ≤ n ≤ len.
    pub fn term(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.sigma_sq[n - 1])
    }

    /// s_n² = σ_1² + … + σ_n² for 1 ≤ n ≤ len.
    pub fn cumulative_variance(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.prefix[n - 1])
    }

    /// s_n = √(s_n²).
    pub fn std_dev(&self, n: usize) -> Result<f64> {
        Ok(self.cumulative_variance(n)?.sqrt())
    }

    /// The largest representable variance level, s_len².
    pub fn horizon(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// First cumulative variance s_1².
    pub fn first_level(&self) -> f64 {
        self.prefix[0]
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.sigma_sq.len() {
            return Err(Error::IndexOutOfRange { index: n, len: self.sigma_sq.len() });
        }
        Ok(())
    }

    /// D = max over {j : s_j > 0, j+1 ≤ len} of s_{j+1}/s_j. Indices with
    /// s_j = 0 are skipped (the s_1 = 0 convention).
    pub fn ratio_bound(&self) -> Result<RatioBound> {
        let mut best: Option<RatioBound> = None;
        for j in 0..self.prefix.len().saturating_sub(1) {
            if self.prefix[j] > 0.0 {
                let r = (self.prefix[j + 1] / self.prefix[j]).sqrt();
                if best.map_or(true, |b| r > b.value) {
                    best = Some(RatioBound { value: r, argmax: j + 1 });
                }
            }
        }
        best.ok_or_else(|| {
            Error::DegenerateProfile(
                "no index j with s_j > 0 and j+1 in range; ratio bound undefined".into(),
            )
        })
    }

    /// h(n) = max{k : s_k² ≤ n}, by binary search over the monotone prefix.
    ///
    /// Levels below s_1² are an error (|S_n|/s_n is undefined before the
    /// first positive variance); levels beyond the horizon report the
    /// largest representable level.
    pub fn index_of_variance(&self, level: f64) -> Result<usize> {
        if !level.is_finite() {
            return Err(Error::Domain(format!("variance level must be finite, got {level}")));
        }
        if level < self.first_level() {
            return Err(Error::BelowFirstLevel { level, first: self.first_level() });
        }
        if level > self.horizon() {
            return Err(Error::HorizonExceeded { level, max_level: self.horizon() });
        }
        Ok(self.prefix.partition_point(|&s| s <= level))
    }

    /// Resolve the window N < s_n² ≤ N·f_N to the index range
    /// (h(N), h(N·f_N)]. The window may be empty (lo = hi), which is legal.
    pub fn window(&self, level: f64, family: &WindowFamily) -> Result<IndexWindow> {
        let width = family.width(level)?;
        let top = level * width;
        let lo = self.index_of_variance(level)?;
        let hi = self.index_of_variance(top)?;
        debug_assert!(lo <= hi);
        Ok(IndexWindow { lo, hi, level, width })
    }
}

/// Unit profile σ_j² ≡ 1 (s_n² = n), the simplest ladder.
pub fn unit_profile(n_max: usize) -> VarianceProfile {
    VarianceProfile::new("unit", vec![1.0; n_max]).expect("unit profile is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime_model_profile(n_max: usize) -> VarianceProfile {
        // Independent small-scale construction: trial-division primality.
        let is_prime = |m: usize| m >= 2 && (2..m).take_while(|d| d * d <= m).all(|d| m % d != 0);
        let sig: Vec<f64> = (1..=n_max)
            .map(|j| if is_prime(j) { let p = j as f64; (1.0 - 1.0 / p) / p } else { 0.0 })
            .collect();
        VarianceProfile::new("prime-model", sig).unwrap()
    }

    #[test]
    fn cumulative_variance_unit_profile() {
        let p = unit_profile(32);
        assert_eq!(p.cumulative_variance(7).unwrap(), 7.0);
        assert_eq!(p.cumulative_variance(1).unwrap(), 1.0);
    }

    #[test]
    fn cumulative_variance_prime_model_first_ten() {
        let p = prime_model_profile(10);
        // Direct sum of (1/p - 1/p^2) over p in {2, 3, 5, 7}.
        let expected: f64 = [2.0, 3.0, 5.0, 7.0f64]
            .iter()
            .map(|p| 1.0 / p - 1.0 / (p * p))
            .sum();
        let got = p.cumulative_variance(10).unwrap();
        assert!((got - expected).abs() < 1e-15, "got {got}, expected {expected}");
        assert!((got - 0.754671).abs() < 1e-6);
    }

    #[test]
    fn index_out_of_range_is_error() {
        let p = unit_profile(4);
        assert!(matches!(
            p.cumulative_variance(5),
            Err(Error::IndexOutOfRange { index: 5, len: 4 })
        ));
        assert!(p.cumulative_variance(0).is_err());
    }

    #[test]
    fn ratio_bound_unit_profile_is_sqrt_two() {
        let p = unit_profile(100);
        let rb = p.ratio_bound().unwrap();
        assert!((rb.value - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(rb.argmax, 1);
    }

    #[test]
    fn ratio_bound_is_scale_invariant() {
        for c in [0.25, 3.0, 117.0] {
            let p = VarianceProfile::new("const", vec![c; 50]).unwrap();
            assert!((p.ratio_bound().unwrap().value - 2.0f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_bound_prime_model() {
        let p = prime_model_profile(1_000);
        let rb = p.ratio_bound().unwrap();
        // Exhaustive scan oracle.
        let mut best = 0.0f64;
        let mut arg = 0usize;
        for j in 1..p.len() {
            let sj = p.cumulative_variance(j).unwrap();
            if sj > 0.0 {
                let r = (p.cumulative_variance(j + 1).unwrap() / sj).sqrt();
                if r > best {
                    best = r;
                    arg = j;
                }
            }
        }
        assert_eq!(rb.value, best);
        assert_eq!(rb.argmax, arg);
        // The maximum sits at the first nonzero step: s_2^2 = 1/4 -> s_3^2 = 17/36.
        assert_eq!(rb.argmax, 2);
        assert!((rb.value - (17.0f64 / 9.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ratio_bound_degenerate_profiles() {
        assert!(VarianceProfile::new("zeros", vec![0.0; 8]).is_err());
        // Only the last term positive: no j with s_j > 0 and j+1 in range.
        let p = VarianceProfile::new("late", vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(p.ratio_bound(), Err(Error::DegenerateProfile(_))));
    }

    #[test]
    fn index_of_variance_unit() {
        let p = unit_profile(64);
        assert_eq!(p.index_of_variance(7.5).unwrap(), 7);
        assert_eq!(p.index_of_variance(7.0).unwrap(), 7);
        assert_eq!(p.index_of_variance(64.0).unwrap(), 64);
    }

    #[test]
    fn index_of_variance_prime_model() {
        let p = prime_model_profile(100);
        // Linear-scan oracle for h(1).
        let mut k = 0;
        for n in 1..=p.len() {
            if p.cumulative_variance(n).unwrap() <= 1.0 {
                k = n;
            }
        }
        assert_eq!(p.index_of_variance(1.0).unwrap(), k);
        assert_eq!(k, 18);
        assert!(p.cumulative_variance(18).unwrap() <= 1.0);
        assert!(p.cumulative_variance(19).unwrap() > 1.0);
    }

    #[test]
    fn index_of_variance_errors() {
        let p = unit_profile(8);
        match p.index_of_variance(9.0) {
            Err(Error::HorizonExceeded { max_level, .. }) => assert_eq!(max_level, 8.0),
            other => panic!("expected horizon error, got {other:?}"),
        }
        assert!(matches!(p.index_of_variance(0.5), Err(Error::BelowFirstLevel { .. })));
    }

    #[test]
    fn window_unit_profile_power_log() {
        let p = unit_profile(64);
        let f = WindowFamily::power_log(1.0);
        let w = p.window(10.0, &f).unwrap();
        assert_eq!(w.lo, 10);
        assert_eq!(w.hi, 23); // h(10 * ln 10) = h(23.025...)
        assert!(!w.is_empty());
        for n in w.indices() {
            let s = p.cumulative_variance(n).unwrap();
            assert!(s > 10.0 && s <= 10.0 * w.width);
        }
    }

    #[test]
    fn window_at_floor_is_narrow_but_nonempty() {
        // f_N evaluating to exactly 1 + 1/N at N = s_k^2: the window holds the
        // indices with s_n^2 in (N, N+1].
        let p = unit_profile(32);
        let f = WindowFamily::fixed(1e-9); // floor 1 + 1/N binds
        let w = p.window(9.0, &f).unwrap();
        assert_eq!(w.width, 1.0 + 1.0 / 9.0);
        assert_eq!(w.indices().collect::<Vec<_>>(), vec![10]);
    }

    #[test]
    fn window_rejects_degenerate_log_width() {
        let p = prime_model_profile(100);
        let f = WindowFamily::power_log(2.0);
        assert!(matches!(p.window(1.0, &f), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_window_is_representable() {
        // Zero-variance stretch: s_n^2 flat on (4, 4+1/4] above level 4.
        let mut sig = vec![1.0; 4];
        sig.extend(vec![0.0; 10]);
        sig.push(5.0);
        let p = VarianceProfile::new("flat", sig).unwrap();
        let f = WindowFamily::fixed(1e-9);
        let w = p.window(4.0, &f).unwrap();
        assert!(w.is_empty());
        assert_eq!(w.indices().count(), 0);
    }

    #[test]
    fn compensated_prefix_matches_naive_within_1e12_relative() {
        // Pseudo-random positive terms; naive accumulation as oracle.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 + 1e-9
        };
        let sig: Vec<f64> = (0..10_000).map(|_| next()).collect();
        let p = VarianceProfile::new("random", sig.clone()).unwrap();
        let mut naive = 0.0f64;
        for (i, &v) in sig.iter().enumerate() {
            naive += v;
            let stored = p.cumulative_variance(i + 1).unwrap();
            assert!(
                (stored - naive).abs() <= 1e-12 * naive.abs().max(1.0),
                "prefix diverged at {}: {stored} vs {naive}",
                i + 1
            );
        }
    }

    #[test]
    fn prefix_is_monotone() {
        let p = prime_model_profile(500);
        for n in 2..=p.len() {
            assert!(p.cumulative_variance(n).unwrap() >= p.cumulative_variance(n - 1).unwrap());
        }
        assert!(p.horizon() > p.first_level());
    }
}
