//! Discrete distributions, distances, sampling, and test-pair families.
//!
//! Everything downstream builds on these types: validated pmfs over a domain
//! of `k >= 2` symbols (0-indexed `0..k`), tagged sample sets for the two
//! user groups, histograms, and the accept/reject verdict.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one slack accepted by [`Distribution::new`]. Inputs further off
/// than this are rejected, never renormalized.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Outcome of a single closeness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestVerdict {
    /// Consistent with `p = q`.
    Accept,
    /// Evidence that `TV(p, q) > alpha`.
    Reject,
}

/// Which user group a sample set belongs to: group 1 reports draws from `p`,
/// group 2 draws from `q`. The groups may have different privacy budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    One,
    Two,
}

/// A probability distribution over `{0, .., k-1}`.
///
/// The constructor is eager and strict: non-negative entries, `k >= 2`, and
/// mass summing to 1 within [`PMF_SUM_TOL`]. Invalid input is an error, not
/// something to be silently fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pmf: Vec<f64>,
}

impl Distribution {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "domain size must be at least 2, got {}",
                pmf.len()
            )));
        }
        for (i, &v) in pmf.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidPmf(format!("entry {i} is {v}")));
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!(
                "mass sums to {sum}, off by {:e}",
                sum - 1.0
            )));
        }
        Ok(Distribution { pmf })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidPmf(format!(
                "domain size must be at least 2, got {k}"
            )));
        }
        Ok(Distribution {
            pmf: vec![1.0 / k as f64; k],
        })
    }

    pub fn k(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Mass of symbol `x`.
    pub fn mass(&self, x: u32) -> f64 {
        self.pmf[x as usize]
    }

    /// Draw `n` i.i.d. symbols. Inverse-CDF with binary search; for a fixed
    /// generator state the output is bit-reproducible.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<u32> {
        let cdf = self.cdf();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            out.push(invert_cdf(&cdf, u));
        }
        out
    }

    fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(self.pmf.len());
        for &v in &self.pmf {
            acc += v;
            cdf.push(acc);
        }
        // Guard the top end against rounding so every u in [0,1) lands.
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        cdf
    }
}

fn invert_cdf(cdf: &[f64], u: f64) -> u32 {
    let mut lo = 0usize;
    let mut hi = cdf.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if u < cdf[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo as u32
}

/// Samples from one group, tagged with their origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<u32>,
    pub group: Group,
}

impl SampleSet {
    /// Validate that every value is a symbol of `[k]`.
    pub fn new(values: Vec<u32>, group: Group, k: usize) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| (v as usize) >= k) {
            return Err(Error::SymbolOutOfRange { symbol: bad, k });
        }
        Ok(SampleSet { values, group })
    }

    /// Draw `n` i.i.d. samples from `dist` on behalf of `group`.
    pub fn draw<R: Rng>(dist: &Distribution, n: usize, group: Group, rng: &mut R) -> Self {
        SampleSet {
            values: dist.sample(n, rng),
            group,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-symbol counts over `[k]`. Total is always the sum of the counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Histogram { counts }
    }

    pub fn from_samples(k: usize, values: &[u32]) -> Result<Self> {
        let mut counts = vec![0u64; k];
        for &v in values {
            if (v as usize) >= k {
                return Err(Error::SymbolOutOfRange { symbol: v, k });
            }
            counts[v as usize] += 1;
        }
        Ok(Histogram { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Poisson(`mean`) draw. Exact inversion would be preferred for small means
/// and rejection for large ones; the backing sampler implements exactly that
/// split, switching methods around mean 12.
pub fn poisson_draw<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    assert!(mean.is_finite() && mean >= 0.0, "Poisson mean must be >= 0");
    if mean == 0.0 {
        return 0;
    }
    let d = rand_distr::Poisson::new(mean).expect("positive finite mean");
    rand_distr::Distribution::sample(&d, rng) as u64
}

/// Poissonized user count: the number of participants when `n` are expected.
pub fn poisson_sample_count<R: Rng>(n: usize, rng: &mut R) -> usize {
    poisson_draw(n as f64, rng) as usize
}

/// Total variation distance, `max_S |p(S) - q(S)| = 0.5 * ||p - q||_1`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.k() != q.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            got: q.k(),
        });
    }
    let sum: f64 = p
        .pmf()
        .iter()
        .zip(q.pmf())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * sum)
}

/// Squared Euclidean distance between pmf vectors.
pub fn l2_distance_sq(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.k() != q.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            got: q.k(),
        });
    }
    Ok(p.pmf()
        .iter()
        .zip(q.pmf())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Named test-pair families for experiments. Each `far` pair is built so that
/// `TV(p, q)` equals the requested `alpha` exactly (up to f64 rounding).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `(U_k, U_k)`; distance 0, used for null-rate estimation.
    Uniform,
    /// `p = U_k`, `q_i = (1 +/- 2 alpha) / k` alternating. Needs `k` even
    /// and `alpha <= 1/2`. The hardest near-uniform direction.
    PaninskiFar,
    /// Power-law `p_i ~ 1/(i+1)`, with `alpha` mass moved from the heaviest
    /// symbol to the lightest. Needs `p_max >= alpha`.
    Zipf,
    /// Near-uniform base with `alpha` mass swapped between two symbols:
    /// `p = (c + alpha, c, c, ..)`, `q = (c, c + alpha, c, ..)`.
    TwoSpike,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Uniform => "uniform",
            FamilyKind::PaninskiFar => "paninski-far",
            FamilyKind::Zipf => "zipf",
            FamilyKind::TwoSpike => "two-spike",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(FamilyKind::Uniform),
            "paninski-far" => Ok(FamilyKind::PaninskiFar),
            "zipf" => Ok(FamilyKind::Zipf),
            "two-spike" => Ok(FamilyKind::TwoSpike),
            other => Err(Error::param("family", format!("unknown family {other:?}"))),
        }
    }
}

/// Build the `(p, q)` pair of `kind` at distance `alpha` on `[k]`.
pub fn make_family(kind: FamilyKind, k: usize, alpha: f64) -> Result<(Distribution, Distribution)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must be in (0, 1], got {alpha}")));
    }
    match kind {
        FamilyKind::Uniform => {
            let u = Distribution::uniform(k)?;
            Ok((u.clone(), u))
        }
        FamilyKind::PaninskiFar => {
            if !k.is_multiple_of(2) {
                return Err(Error::param("k", format!("paninski-far needs even k, got {k}")));
            }
            if alpha > 0.5 {
                return Err(Error::param(
                    "alpha",
                    format!("paninski-far needs alpha <= 0.5, got {alpha}"),
                ));
            }
            let base = 1.0 / k as f64;
            let q: Vec<f64> = (0..k)
                .map(|i| {
                    if i % 2 == 0 {
                        base * (1.0 + 2.0 * alpha)
                    } else {
                        base * (1.0 - 2.0 * alpha)
                    }
                })
                .collect();
            Ok((Distribution::uniform(k)?, Distribution::new(q)?))
        }
        FamilyKind::Zipf => {
            let h: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
            let p: Vec<f64> = (1..=k).map(|i| 1.0 / (i as f64 * h)).collect();
            if p[0] < alpha {
                return Err(Error::param(
                    "alpha",
                    format!(
                        "zipf far pair needs alpha <= heaviest mass {:.4}, got {alpha}",
                        p[0]
                    ),
                ));
            }
            let mut q = p.clone();
            q[0] -= alpha;
            q[k - 1] += alpha;
            Ok((Distribution::new(p)?, Distribution::new(q)?))
        }
        FamilyKind::TwoSpike => {
            let c = (1.0 - alpha) / k as f64;
            let mut p = vec![c; k];
            let mut q = vec![c; k];
            p[0] = c + alpha;
            q[1] = c + alpha;
            Ok((Distribution::new(p)?, Distribution::new(q)?))
        }
    }
}

/// Run `test` an odd number of times on fresh randomness and return the
/// majority verdict. Boosts a 2/3-correct tester exponentially in `t`.
pub fn majority_repeat<R, F>(mut test: F, t: usize, rng: &mut R) -> Result<TestVerdict>
where
    R: Rng,
    F: FnMut(&mut R) -> Result<TestVerdict>,
{
    if t == 0 || t.is_multiple_of(2) {
        return Err(Error::param("t", format!("repetition count must be odd, got {t}")));
    }
    let mut rejects = 0usize;
    for _ in 0..t {
        if test(rng)? == TestVerdict::Reject {
            rejects += 1;
        }
    }
    Ok(if rejects > t / 2 {
        TestVerdict::Reject
    } else {
        TestVerdict::Accept
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    const TOL: f64 = 1e-12;

    #[test]
    fn rejects_bad_pmfs() {
        assert!(Distribution::new(vec![1.0]).is_err());
        assert!(Distribution::new(vec![0.6, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![0.5, f64::NAN]).is_err());
        // 1e-13 off is inside the tolerance.
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn sampling_point_mass() {
        // All mass on symbol 2 modulo the validator: use a near-point mass.
        let d = Distribution::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let mut rng = substream(1, 0);
        assert!(d.sample(5, &mut rng).iter().all(|&x| x == 2));
        assert!(d.sample(0, &mut rng).is_empty());
    }

    #[test]
    fn sampling_matches_uniform_frequencies() {
        let d = Distribution::uniform(2).unwrap();
        let mut rng = substream(2, 0);
        let xs = d.sample(1_000_000, &mut rng);
        let ones = xs.iter().filter(|&&x| x == 1).count() as f64 / 1e6;
        assert!((0.498..=0.502).contains(&ones), "fraction of 1s = {ones}");
    }

    #[test]
    fn sampling_is_bit_reproducible() {
        let d = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = d.sample(256, &mut substream(42, 9));
        let b = d.sample(256, &mut substream(42, 9));
        assert_eq!(a, b);
        let c = d.sample(256, &mut substream(42, 10));
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_moments() {
        let mut rng = substream(3, 0);
        assert_eq!(poisson_draw(0.0, &mut rng), 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| poisson_draw(1000.0, &mut rng) as f64).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((990.0..=1010.0).contains(&mean), "mean = {mean}");
        assert!((950.0..=1050.0).contains(&var), "var = {var}");
    }

    #[test]
    fn tv_hand_values() {
        let p = Distribution::new(vec![0.5, 0.5]).unwrap();
        let q = Distribution::new(vec![0.8, 0.2]).unwrap();
        assert!((tv_distance(&p, &q).unwrap() - 0.3).abs() < TOL);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        let r = Distribution::uniform(3).unwrap();
        assert!(matches!(
            tv_distance(&p, &r),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn l2_hand_values() {
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        let q = Distribution::new(vec![0.1, 0.9]).unwrap();
        assert!((l2_distance_sq(&p, &q).unwrap() - 0.08).abs() < TOL);
    }

    #[test]
    fn tv_metric_properties() {
        // Symmetry, range, triangle inequality on seeded random triples.
        let mut rng = substream(4, 0);
        for _ in 0..200 {
            let k = rng.gen_range(2..=16);
            let mk = |rng: &mut crate::rng::TrialRng| {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                Distribution::new(raw.iter().map(|v| v / s).collect()).unwrap()
            };
            let (p, q, r) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            let (pq, qr, pr) = (
                tv_distance(&p, &q).unwrap(),
                tv_distance(&q, &r).unwrap(),
                tv_distance(&p, &r).unwrap(),
            );
            assert!((0.0..=1.0).contains(&pq));
            assert!((pq - tv_distance(&q, &p).unwrap()).abs() < TOL);
            assert!(pr <= pq + qr + TOL);
            // Cauchy-Schwarz link to the l2 metric.
            let l2 = l2_distance_sq(&p, &q).unwrap().sqrt();
            assert!((k as f64).sqrt() * l2 >= 2.0 * pq - TOL);
        }
    }

    #[test]
    fn families_hit_requested_distance() {
        for (kind, k) in [
            (FamilyKind::PaninskiFar, 8),
            (FamilyKind::TwoSpike, 7),
            (FamilyKind::TwoSpike, 20),
            (FamilyKind::Zipf, 10),
        ] {
            let alpha = 0.3;
            let (p, q) = make_family(kind, k, alpha).unwrap();
            let tv = tv_distance(&p, &q).unwrap();
            assert!(
                (tv - alpha).abs() < TOL,
                "{kind:?}: tv = {tv}, wanted {alpha}"
            );
        }
        let (p, q) = make_family(FamilyKind::Uniform, 5, 0.3).unwrap();
        assert_eq!(tv_distance(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn paninski_hand_value() {
        let (_, q) = make_family(FamilyKind::PaninskiFar, 4, 0.5).unwrap();
        assert_eq!(q.pmf(), &[0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn family_errors() {
        assert!(make_family(FamilyKind::PaninskiFar, 5, 0.3).is_err()); // odd k
        assert!(make_family(FamilyKind::PaninskiFar, 4, 0.6).is_err()); // mass would go negative
        assert!(make_family(FamilyKind::Zipf, 10, 0.5).is_err()); // heaviest mass is ~0.34
        assert!(make_family(FamilyKind::TwoSpike, 4, 0.0).is_err());
        assert!(make_family(FamilyKind::TwoSpike, 4, 1.5).is_err());
    }

    #[test]
    fn majority_repeat_basics() {
        let mut rng = substream(5, 0);
        // t = 1 is the single verdict.
        let v = majority_repeat(|_| Ok(TestVerdict::Reject), 1, &mut rng).unwrap();
        assert_eq!(v, TestVerdict::Reject);
        let v = majority_repeat(|_| Ok(TestVerdict::Accept), 31, &mut rng).unwrap();
        assert_eq!(v, TestVerdict::Accept);
        assert!(majority_repeat(|_| Ok(TestVerdict::Accept), 4, &mut rng).is_err());
        assert!(majority_repeat(|_| Ok(TestVerdict::Accept), 0, &mut rng).is_err());
    }

    /// Exact tail P(Bin(n, p) >= m), used as the oracle for the boost test.
    fn binom_tail(n: u64, p: f64, m: u64) -> f64 {
        let mut total = 0.0;
        let mut log_c = 0.0; // log C(n, 0)
        for i in 0..=n {
            if i >= m {
                total += (log_c + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp();
            }
            if i < n {
                log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            }
        }
        total
    }

    #[test]
    fn majority_boosts_two_thirds_tester() {
        // Per-run error 1/3; majority of 31 errs only if >= 16 runs err.
        let expected = binom_tail(31, 1.0 / 3.0, 16);
        assert!(expected < 0.05, "oracle tail = {expected}");
        let mut rng = substream(6, 0);
        let meta = 10_000;
        let mut errs = 0;
        for _ in 0..meta {
            let v = majority_repeat(
                |r| {
                    Ok(if r.gen::<f64>() < 1.0 / 3.0 {
                        TestVerdict::Reject // the erroneous verdict
                    } else {
                        TestVerdict::Accept
                    })
                },
                31,
                &mut rng,
            )
            .unwrap();
            if v == TestVerdict::Reject {
                errs += 1;
            }
        }
        let rate = errs as f64 / meta as f64;
        assert!(rate <= 0.05, "empirical majority error = {rate}");
        // And the empirical rate agrees with the oracle within 4 sigma.
        let se = (expected * (1.0 - expected) / meta as f64).sqrt();
        assert!((rate - expected).abs() < 4.0 * se + 1e-9);
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::new(vec![0, 1, 2], Group::One, 3).is_ok());
        assert!(SampleSet::new(vec![0, 3], Group::Two, 3).is_err());
    }

    #[test]
    fn histogram_total() {
        let h = Histogram::from_samples(4, &[0, 1, 1, 3]).unwrap();
        assert_eq!(h.counts(), &[1, 2, 0, 1]);
        assert_eq!(h.total(), 4);
        assert!(Histogram::from_samples(2, &[5]).is_err());
    }
}
