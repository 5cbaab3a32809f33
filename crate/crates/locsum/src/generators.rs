//! Seeded sample-path generators: Rademacher and Gaussian families with a σ
//! schedule, the prime Bernoulli (Kubilius-model) family, and the lacunary
//! fractional-part family.
//!
//! Reproducibility discipline: every path is drawn from its own counter-based
//! stream keyed by (seed, path index), so ensembles are order-independent and
//! can be distributed across workers without coordination.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arithmetic::mertens::MertensTables;
use crate::arithmetic::sieve::simple_primes;
use crate::error::{Error, Result};
use crate::variance::VarianceProfile;

/// Per-term σ schedule for the Rademacher and Gaussian families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum SigmaSchedule {
    /// σ_j ≡ sigma.
    Constant { sigma: f64 },
    /// σ_j = j^exponent.
    Power { exponent: f64 },
    /// σ_j = 0 for j ≤ zeros, then σ_j ≡ sigma (declared zero-prefix).
    ZeroPrefix { zeros: usize, sigma: f64 },
}

impl SigmaSchedule {
    pub fn sigma(&self, j: usize) -> f64 {
        match *self {
            SigmaSchedule::Constant { sigma } => sigma,
            SigmaSchedule::Power { exponent } => (j as f64).powf(exponent),
            SigmaSchedule::ZeroPrefix { zeros, sigma } => {
                if j <= zeros {
                    0.0
                } else {
                    sigma
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SigmaSchedule::Constant { sigma } => sigma > 0.0 && sigma.is_finite(),
            SigmaSchedule::Power { exponent } => exponent.is_finite(),
            SigmaSchedule::ZeroPrefix { sigma, .. } => sigma > 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid sigma schedule {self:?}")))
        }
    }
}

/// Which family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// X_j = ±σ_j with equal probability.
    Rademacher { sigma: SigmaSchedule },
    /// X_j ~ Normal(0, σ_j²).
    Gaussian { sigma: SigmaSchedule },
    /// X_p = Y_p − 1/p at primes p with P(Y_p = 1) = 1/p; X_j = 0 at
    /// non-prime j (materialized as explicit zeros).
    PrimeBernoulli,
    /// X_j = {n_j ω} − 1/2 with n_1 = ⌈ratio⌉, n_{j+1} = ⌈ratio·n_j⌉ and a
    /// single ω ~ Uniform[0,1) per path. Increments are dependent.
    LacunaryFractional { ratio: f64 },
}

/// A generator plus its master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
}

/// One realization S_1..S_n aligned to its variance profile.
#[derive(Debug, Clone)]
pub struct PartialSumPath {
    sums: Vec<f64>,
    profile: Arc<VarianceProfile>,
    seed: u64,
    stream: u64,
}

impl PartialSumPath {
    /// Inject a deterministic path (testing hook; also used by oracles).
    pub fn from_sums(sums: Vec<f64>, profile: Arc<VarianceProfile>) -> Result<Self> {
        if sums.len() != profile.len() {
            return Err(Error::InvalidSpec(format!(
                "path length {} does not match profile length {}",
                sums.len(),
                profile.len()
            )));
        }
        Ok(PartialSumPath { sums, profile, seed: 0, stream: 0 })
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// S_n, 1-based.
    pub fn sum(&self, n: usize) -> f64 {
        self.sums[n - 1]
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn profile(&self) -> &Arc<VarianceProfile> {
        &self.profile
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// |S_n|/s_n; error when s_n = 0.
    pub fn normalized_abs(&self, n: usize) -> Result<f64> {
        let s = self.profile.std_dev(n)?;
        if s <= 0.0 {
            return Err(Error::DegenerateProfile(format!("s_{n} = 0; |S_n|/s_n undefined")));
        }
        Ok(self.sum(n).abs() / s)
    }
}

/// Recover the raw prime-divisor count T_n = S_n + Σ_{p≤n} 1/p from a
/// prime-model path.
pub fn recover_prime_count(path: &PartialSumPath, mertens: &MertensTables, n: usize) -> f64 {
    path.sum(n) + mertens.recip_at(n as u64)
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maximum supported lacunary ratio (the dyadic encoding q·2^52 must stay
/// exact in u64).
const MAX_LACUNARY_RATIO: f64 = 1024.0;
/// Cap on the fixed-point working width for the non-integer-ratio path.
const MAX_LACUNARY_BITS: u64 = 1 << 20;

enum Prepared {
    Rademacher { sigma: Vec<f64> },
    Gaussian { sigma: Vec<f64> },
    Prime { primes: Vec<u32>, inv_p: Vec<f64> },
    LacunaryInt { q: u64, window: usize },
    LacunaryCeil { qm: u64, bits: u64 },
}

/// A generator prepared for a fixed horizon: shared tables are built once,
/// then any number of paths can be drawn concurrently by stream index.
pub struct PathSampler {
    spec: GeneratorSpec,
    n_max: usize,
    profile: Arc<VarianceProfile>,
    prepared: Prepared,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GeneratorKind::Rademacher { sigma } | GeneratorKind::Gaussian { sigma } => {
                sigma.validate()
            }
            GeneratorKind::PrimeBernoulli => Ok(()),
            GeneratorKind::LacunaryFractional { ratio } => {
                if !(ratio > 1.0) || !ratio.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "lacunary ratio must be > 1, got {ratio}"
                    )));
                }
                if ratio > MAX_LACUNARY_RATIO {
                    return Err(Error::Capacity(format!(
                        "lacunary ratio {ratio} exceeds the supported bound {MAX_LACUNARY_RATIO}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Exact per-term variance profile for this generator at horizon n_max.
    pub fn variance_profile(&self, n_max: usize) -> Result<VarianceProfile> {
        self.validate()?;
        if n_max == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        match self.kind {
            GeneratorKind::Rademacher { sigma } => {
                let v: Vec<f64> = (1..=n_max).map(|j| sigma.sigma(j).powi(2)).collect();
                VarianceProfile::new(format!("rademacher({sigma:?})"), v)
            }
            GeneratorKind::Gaussian { sigma } => {
                let v: Vec<f64> = (1..=n_max).map(|j| sigma.sigma(j).powi(2)).collect();
                VarianceProfile::new(format!("gaussian({sigma:?})"), v)
            }
            GeneratorKind::PrimeBernoulli => {
                let primes = simple_primes(n_max as u64);
                let mut v = vec![0.0; n_max];
                for &p in &primes {
                    let fp = p as f64;
                    v[(p - 1) as usize] = (1.0 - 1.0 / fp) / fp;
                }
                VarianceProfile::new("prime-bernoulli", v)
            }
            GeneratorKind::LacunaryFractional { ratio } => {
                // Uniform marginals force variance 1/12 per term; this is a
                // normalization ladder, not a claim of independence.
                VarianceProfile::new(format!("lacunary(ratio={ratio})"), vec![1.0 / 12.0; n_max])
            }
        }
    }

    /// Prepare shared tables for sampling paths of length n_max.
    pub fn sampler(&self, n_max: usize) -> Result<PathSampler> {
        self.validate()?;
        if n_max == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        let profile = Arc::new(self.variance_profile(n_max)?);
        let prepared = match self.kind {
            GeneratorKind::Rademacher { sigma } => {
                Prepared::Rademacher { sigma: (1..=n_max).map(|j| sigma.sigma(j)).collect() }
            }
            GeneratorKind::Gaussian { sigma } => {
                Prepared::Gaussian { sigma: (1..=n_max).map(|j| sigma.sigma(j)).collect() }
            }
            GeneratorKind::PrimeBernoulli => {
                let primes: Vec<u32> =
                    simple_primes(n_max as u64).into_iter().map(|p| p as u32).collect();
                let inv_p: Vec<f64> = primes.iter().map(|&p| 1.0 / p as f64).collect();
                Prepared::Prime { primes, inv_p }
            }
            GeneratorKind::LacunaryFractional { ratio } => {
                if ratio.fract() == 0.0 {
                    let q = ratio as u64;
                    let window = (64.0 / (ratio).log2()).ceil() as usize;
                    Prepared::LacunaryInt { q, window }
                } else {
                    let qm = (ratio * (1u64 << 52) as f64) as u64;
                    let bits = ((n_max as f64 + 1.0) * ratio.log2()).ceil() as u64 + 80;
                    if bits > MAX_LACUNARY_BITS {
                        return Err(Error::Capacity(format!(
                            "lacunary horizon {n_max} at ratio {ratio} needs {bits} bits of \
                             fractional state, above the {MAX_LACUNARY_BITS}-bit cap"
                        )));
                    }
                    Prepared::LacunaryCeil { qm, bits }
                }
            }
        };
        Ok(PathSampler { spec: *self, n_max, profile, prepared })
    }
}

/// Draw one path per the spec's stream discipline. `stream` is the path
/// index within the (seeded) ensemble.
pub fn sample_path(spec: &GeneratorSpec, n_max: usize, stream: u64) -> Result<PartialSumPath> {
    Ok(spec.sampler(n_max)?.sample(stream))
}

impl PathSampler {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn profile(&self) -> &Arc<VarianceProfile> {
        &self.profile
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    /// Sample the increments X_1..X_n into `buf`.
    pub fn increments_into(&self, stream: u64, buf: &mut Vec<f64>) {
        buf.clear();
        buf.reserve(self.n_max);
        let mut rng = path_rng(self.spec.seed, stream);
        match &self.prepared {
            Prepared::Rademacher { sigma } => {
                let mut bits = 0u64;
                let mut left = 0u32;
                for &s in sigma {
                    if left == 0 {
                        bits = rng.gen();
                        left = 64;
                    }
                    let sign = if bits & 1 == 1 { 1.0 } else { -1.0 };
                    bits >>= 1;
                    left -= 1;
                    buf.push(sign * s);
                }
            }
            Prepared::Gaussian { sigma } => {
                for &s in sigma {
                    let z: f64 = rng.sample(StandardNormal);
                    buf.push(z * s);
                }
            }
            Prepared::Prime { primes, inv_p } => {
                buf.resize(self.n_max, 0.0);
                for (i, &p) in primes.iter().enumerate() {
                    let y = if rng.gen::<f64>() < inv_p[i] { 1.0 } else { 0.0 };
                    buf[(p - 1) as usize] = y - inv_p[i];
                }
            }
            Prepared::LacunaryInt { q, window } => {
                // ω is drawn as its base-q digit string; {q^j ω} is the tail
                // of that string starting at digit j+1, recovered by a
                // contractive backward pass.
                let total = self.n_max + window + 1;
                let digits: Vec<u32> =
                    (0..total).map(|_| rng.gen_range(0..*q) as u32).collect();
                let mut frac = vec![0.0f64; self.n_max + 1];
                let mut tail = 0.0f64;
                let qf = *q as f64;
                for t in (1..total).rev() {
                    tail = (digits[t] as f64 + tail) / qf;
                    if t <= self.n_max {
                        frac[t] = tail;
                    }
                }
                for j in 1..=self.n_max {
                    buf.push(frac[j] - 0.5);
                }
            }
            Prepared::LacunaryCeil { qm, bits } => {
                let b = *bits;
                let mask = (BigUint::from(1u8) << b) - 1u8;
                let mut omega_bytes = vec![0u8; (b as usize + 7) / 8];
                rng.fill(omega_bytes.as_mut_slice());
                let omega = BigUint::from_bytes_le(&omega_bytes) & &mask;
                let half = (1u64 << 52) - 1;
                let mut n = BigUint::from((qm + half) >> 52); // ceil(q)
                for _ in 1..=self.n_max {
                    let prod = ((&n & &mask) * &omega) & &mask;
                    let top = &prod >> (b - 53);
                    let t64 = top.iter_u64_digits().next().unwrap_or(0);
                    buf.push(t64 as f64 / (1u64 << 53) as f64 - 0.5);
                    n = (n * qm + half) >> 52u32; // ceil(ratio * n)
                }
            }
        }
    }

    /// Sample a full path: S_n accumulated from the exact increments.
    pub fn sample(&self, stream: u64) -> PartialSumPath {
        let mut increments = Vec::new();
        self.increments_into(stream, &mut increments);
        let mut acc = 0.0f64;
        let sums: Vec<f64> = increments
            .into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        PartialSumPath { sums, profile: Arc::clone(&self.profile), seed: self.spec.seed, stream }
    }

    /// max_{1≤j≤k} |S_j| without materializing the path (streaming, used by
    /// the Kolmogorov-inequality ensembles).
    pub fn max_abs_prefix(&self, k: usize, stream: u64) -> f64 {
        assert!(k >= 1 && k <= self.n_max);
        let mut rng = path_rng(self.spec.seed, stream);
        let mut acc = 0.0f64;
        let mut best = 0.0f64;
        match &self.prepared {
            Prepared::Rademacher { sigma } => {
                let mut bits = 0u64;
                let mut left = 0u32;
                for &s in &sigma[..k] {
                    if left == 0 {
                        bits = rng.gen();
                        left = 64;
                    }
                    let sign = if bits & 1 == 1 { 1.0 } else { -1.0 };
                    bits >>= 1;
                    left -= 1;
                    acc += sign * s;
                    best = best.max(acc.abs());
                }
                best
            }
            Prepared::Gaussian { sigma } => {
                for &s in &sigma[..k] {
                    let z: f64 = rng.sample(StandardNormal);
                    acc += z * s;
                    best = best.max(acc.abs());
                }
                best
            }
            Prepared::Prime { primes, inv_p } => {
                // S_j only moves at primes; the running max over all j ≤ k is
                // the max over prime steps.
                for (i, &p) in primes.iter().enumerate() {
                    if p as usize > k {
                        break;
                    }
                    let y = if rng.gen::<f64>() < inv_p[i] { 1.0 } else { 0.0 };
                    acc += y - inv_p[i];
                    best = best.max(acc.abs());
                }
                best
            }
            Prepared::LacunaryInt { .. } | Prepared::LacunaryCeil { .. } => {
                let mut buf = Vec::new();
                self.increments_into(stream, &mut buf);
                for &x in &buf[..k] {
                    acc += x;
                    best = best.max(acc.abs());
                }
                best
            }
        }
    }

    /// Map every stream in 0..trials through `f` in parallel; the output is
    /// indexed by stream, so results do not depend on worker scheduling.
    pub fn ensemble_map<T: Send>(
        &self,
        trials: u64,
        f: impl Fn(u64, &PartialSumPath) -> T + Sync,
    ) -> Vec<T>
    where
        Self: Sync,
    {
        (0..trials)
            .into_par_iter()
            .map(|stream| {
                let path = self.sample(stream);
                f(stream, &path)
            })
            .collect()
    }
}

fn normal_tail_second_moment(c: f64) -> f64 {
    // E[Z²; |Z| > c] = 2(c·φ(c) + 1 − Φ(c)) for standard normal Z.
    let phi = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    2.0 * (c * phi + (1.0 - std_normal.cdf(c)))
}

/// The Lindeberg sum Σ_{j≤n} E(X_j²/s_n² ; |X_j| > ε·s_n), evaluated in
/// closed form per family (every family here is bounded or Gaussian).
pub fn lindeberg_diagnostic(spec: &GeneratorSpec, n: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("lindeberg eps must be > 0, got {eps}")));
    }
    let profile = spec.variance_profile(n)?;
    let s_n_sq = profile.cumulative_variance(n)?;
    if s_n_sq <= 0.0 {
        return Err(Error::DegenerateProfile("s_n = 0; Lindeberg sum undefined".into()));
    }
    let threshold = eps * s_n_sq.sqrt();
    let mut sum = 0.0f64;
    match spec.kind {
        GeneratorKind::Rademacher { sigma } => {
            for j in 1..=n {
                let s = sigma.sigma(j);
                if s > threshold {
                    sum += s * s;
                }
            }
        }
        GeneratorKind::Gaussian { sigma } => {
            for j in 1..=n {
                let s = sigma.sigma(j);
                if s > 0.0 {
                    sum += s * s * normal_tail_second_moment(threshold / s);
                }
            }
        }
        GeneratorKind::PrimeBernoulli => {
            for p in simple_primes(n as u64) {
                let inv = 1.0 / p as f64;
                let hi = 1.0 - inv; // |X_p| on {Y_p = 1}
                if hi > threshold {
                    sum += hi * hi * inv;
                }
                if inv > threshold {
                    sum += inv * inv * (1.0 - inv);
                }
            }
        }
        GeneratorKind::LacunaryFractional { .. } => {
            // X_j = U − 1/2 with U uniform: E[X²; |X| > a] = 1/12 − (2/3)a³.
            if threshold < 0.5 {
                sum += n as f64 * (1.0 / 12.0 - 2.0 / 3.0 * threshold.powi(3));
            }
        }
    }
    Ok(sum / s_n_sq)
}

/// E|X_p|³ for the prime model at prime p (closed form).
pub fn prime_third_absolute_moment(p: u64) -> f64 {
    let inv = 1.0 / p as f64;
    (1.0 - inv).powi(3) * inv + inv.powi(3) * (1.0 - inv)
}
