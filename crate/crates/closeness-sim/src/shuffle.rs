//! Shuffle-model closeness testing with per-group Poisson decoy noise.
//!
//! Each group's users submit their sample to a shuffler, which releases an
//! anonymized histogram after `mu` decoy messages per symbol have been
//! injected (`mu` chosen so the shuffled output is `(eps, delta)`-DP). With
//! a Poissonized user count the released histogram is exactly a vector of
//! independent Poisson bins, so the analyzer faces plain closeness testing
//! between the noisy mixtures `p' = (1-gamma) p + gamma U_k` and
//! `q' = (1-gamma) q + gamma U_k`, with uneven totals between the groups.
//! Coupling the group sizes as `n1 * mu2 = n2 * mu1` makes the two mixing
//! weights equal as exact rationals, so `TV(p', q') = (1-gamma) TV(p, q)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compression::random_partition;
use crate::dist::{
    majority_repeat, poisson_draw, Distribution, Group, Histogram, TestVerdict,
};
use crate::error::{Error, Result};

// --- Poisson mechanism ----------------------------------------------------

/// Decoy-rate lower bound for `(eps, delta)`-privacy of a histogram with
/// per-user sensitivity `sensitivity`:
/// `16 ln(10/delta) / (1 - e^(-eps/sensitivity))^2
///  + 2 sensitivity / (1 - e^(-eps/sensitivity))`.
pub fn poisson_mu_bound(eps: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must be in (0, 1), got {delta}")));
    }
    if !(sensitivity >= 1.0 && sensitivity.is_finite()) {
        return Err(Error::param(
            "sensitivity",
            format!("must be at least 1, got {sensitivity}"),
        ));
    }
    let d = 1.0 - (-eps / sensitivity).exp();
    Ok(16.0 * (10.0 / delta).ln() / (d * d) + 2.0 * sensitivity / d)
}

/// Smallest integer decoy rate satisfying [`poisson_mu_bound`].
pub fn poisson_mu(eps: f64, delta: f64, sensitivity: f64) -> Result<u64> {
    Ok(poisson_mu_bound(eps, delta, sensitivity)?.ceil() as u64)
}

/// A fully specified Poisson mechanism: the decoy rate `mu` together with
/// the privacy pair it certifies. Construction re-checks the bound, so a
/// value of `mu` below it cannot be represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonMechanismParams {
    pub eps: f64,
    pub delta: f64,
    pub sensitivity: f64,
    pub mu: u64,
}

impl PoissonMechanismParams {
    pub fn new(eps: f64, delta: f64, sensitivity: f64) -> Result<Self> {
        let mu = poisson_mu(eps, delta, sensitivity)?;
        Ok(PoissonMechanismParams {
            eps,
            delta,
            sensitivity,
            mu,
        })
    }

    /// Use an explicit (possibly larger) decoy rate; rejected if below the
    /// privacy bound.
    pub fn with_mu(eps: f64, delta: f64, sensitivity: f64, mu: u64) -> Result<Self> {
        let bound = poisson_mu_bound(eps, delta, sensitivity)?;
        if (mu as f64) < bound {
            return Err(Error::AuditFailed(format!(
                "decoy rate {mu} below the required bound {bound:.3}"
            )));
        }
        Ok(PoissonMechanismParams {
            eps,
            delta,
            sensitivity,
            mu,
        })
    }
}

// --- shuffler output ------------------------------------------------------

/// Anonymized histogram released by one group's shuffler. This is the only
/// group data the analyzer sees; it serializes as a bare JSON integer array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffledHistogram {
    pub counts: Vec<u64>,
    pub group: Group,
}

impl ShuffledHistogram {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The analyzer-facing wire form: just the counts.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.counts).expect("count vector serializes")
    }

    pub fn from_json(json: &str, group: Group) -> Result<Self> {
        let counts: Vec<u64> = serde_json::from_str(json)?;
        if counts.len() < 2 {
            return Err(Error::param("counts", "need at least 2 bins"));
        }
        Ok(ShuffledHistogram { counts, group })
    }
}

/// Shuffler output law for `n` expected users reporting samples of `dist`
/// plus `mu` expected decoys per symbol: independent `Poisson(n*p_j + mu)`
/// bins. This equals the histogram of a Poissonized user count where every
/// participant sends one real message and `Poisson(mu)` decoys per symbol
/// are injected in aggregate.
pub fn simulate_shuffler<R: Rng>(
    dist: &Distribution,
    n: u64,
    mu: u64,
    group: Group,
    rng: &mut R,
) -> ShuffledHistogram {
    let counts = dist
        .pmf()
        .iter()
        .map(|&p| poisson_draw(n as f64 * p + mu as f64, rng))
        .collect();
    ShuffledHistogram { counts, group }
}

/// Message-level shuffler: materializes the anonymized multiset a shuffler
/// would release (`Poisson(n)` real reports plus `Poisson(mu)` decoys per
/// symbol, in shuffled order). Its histogram has the same law as
/// [`simulate_shuffler`]; the demonstration path for examples and tests.
pub fn shuffler_messages<R: Rng>(
    dist: &Distribution,
    n: u64,
    mu: u64,
    rng: &mut R,
) -> Vec<u32> {
    let participants = poisson_draw(n as f64, rng) as usize;
    let mut messages = dist.sample(participants, rng);
    for symbol in 0..dist.k() as u32 {
        let decoys = poisson_draw(mu as f64, rng);
        messages.extend(std::iter::repeat_n(symbol, decoys as usize));
    }
    use rand::seq::SliceRandom;
    messages.shuffle(rng);
    messages
}

/// Fixed-participation variant: exactly `n` real users (multinomial counts)
/// plus Poisson decoys. Close to, but not exactly, the Poissonized law;
/// exposed for comparison experiments.
pub fn simulate_shuffler_fixed_n<R: Rng>(
    dist: &Distribution,
    n: u64,
    mu: u64,
    group: Group,
    rng: &mut R,
) -> ShuffledHistogram {
    let samples = dist.sample(n as usize, rng);
    let mut counts = vec![0u64; dist.k()];
    for x in samples {
        counts[x as usize] += 1;
    }
    for c in counts.iter_mut() {
        *c += poisson_draw(mu as f64, rng);
    }
    ShuffledHistogram { counts, group }
}

// --- the mixture reduction ------------------------------------------------

/// Exact coupling of the two groups' sizes and decoy rates.
///
/// `total_i = n_i + k * mu_i` is the expected released count of group i and
/// `gamma = k * mu_i / total_i` its decoy fraction. Group sizes satisfy
/// `n1 * mu2 = n2 * mu1` exactly over the integers, so the two gammas are
/// equal as rationals and the mixtures keep `(1-gamma)` of the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub k: usize,
    pub n1: u64,
    pub n2: u64,
    pub mu1: u64,
    pub mu2: u64,
    pub total1: u64,
    pub total2: u64,
}

impl MixtureParams {
    /// Couple the groups from explicit decoy rates. `n1_requested` is
    /// rounded up (by the least amount possible) so that `n2 = n1 * mu2/mu1`
    /// is an integer.
    pub fn from_mus(k: usize, n1_requested: u64, mu1: u64, mu2: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", format!("need at least 2, got {k}")));
        }
        if mu1 == 0 || mu2 == 0 {
            return Err(Error::param("mu", "decoy rates must be positive"));
        }
        if n1_requested == 0 {
            return Err(Error::param("n1", "group size must be positive"));
        }
        if n1_requested < mu1 {
            return Err(Error::InfeasibleCoupling(format!(
                "n1 = {n1_requested} is below mu1 = {mu1}; the exact ratio cannot be realized \
                 without changing n1 by more than one rounding step"
            )));
        }
        let unit = mu1 / gcd(mu1, mu2);
        let n1 = n1_requested.div_ceil(unit) * unit;
        let n2 = n1 / mu1 * mu2 + (n1 % mu1) * mu2 / mu1;
        debug_assert_eq!(n1 % unit, 0);
        // The invariant everything else rests on.
        if (n1 as u128) * (mu2 as u128) != (n2 as u128) * (mu1 as u128) {
            return Err(Error::InfeasibleCoupling(format!(
                "rounded coupling is inexact: {n1} * {mu2} != {n2} * {mu1}"
            )));
        }
        let total1 = n1 + k as u64 * mu1;
        let total2 = n2 + k as u64 * mu2;
        Ok(MixtureParams {
            k,
            n1,
            n2,
            mu1,
            mu2,
            total1,
            total2,
        })
    }

    /// Decoy fraction `gamma = k*mu1/total1 = k*mu2/total2`.
    pub fn gamma(&self) -> f64 {
        (self.k as u64 * self.mu1) as f64 / self.total1 as f64
    }

    /// The released mixture for a group: `(1-gamma) p + gamma U_k`.
    pub fn mixture(&self, p: &Distribution) -> Result<Distribution> {
        if p.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: p.k(),
            });
        }
        let gamma = self.gamma();
        let u = 1.0 / self.k as f64;
        Distribution::new(p.pmf().iter().map(|&m| (1.0 - gamma) * m + gamma * u).collect())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Derive the coupled mixture from privacy targets: each group's decoy rate
/// is the smallest passing its own `(eps_i, delta)` audit at sensitivity 1.
pub fn mixture_params(
    k: usize,
    n1_requested: u64,
    eps1: f64,
    eps2: f64,
    delta: f64,
) -> Result<MixtureParams> {
    let mu1 = poisson_mu(eps1, delta, 1.0)?;
    let mu2 = poisson_mu(eps2, delta, 1.0)?;
    MixtureParams::from_mus(k, n1_requested, mu1, mu2)
}

// --- the uneven-sample statistic ------------------------------------------

/// Chi-squared style closeness statistic for histograms with different
/// expected totals `n1_total`, `n2_total`:
/// `Z = sum_i [ (n2 X_i - n1 Y_i)^2 - n2^2 X_i - n1^2 Y_i ] / (X_i + Y_i)`,
/// empty bins contributing 0. Under per-bin Poisson sampling each numerator
/// has mean `n1^2 n2^2 (p_i - q_i)^2`, so `Z` is centered under `p = q` and
/// grows with the squared distance.
pub fn uneven_closeness_statistic(
    x: &ShuffledHistogram,
    y: &ShuffledHistogram,
    n1_total: u64,
    n2_total: u64,
) -> Result<f64> {
    if x.k() != y.k() {
        return Err(Error::DimensionMismatch {
            expected: x.k(),
            got: y.k(),
        });
    }
    if n1_total == 0 || n2_total == 0 {
        return Err(Error::param("totals", "expected totals must be positive"));
    }
    let (a, b) = (n1_total as f64, n2_total as f64);
    let mut z = 0.0;
    for (&xi, &yi) in x.counts.iter().zip(&y.counts) {
        let s = xi + yi;
        if s == 0 {
            continue;
        }
        let (xi, yi) = (xi as f64, yi as f64);
        let num = (b * xi - a * yi).powi(2) - b * b * xi - a * a * yi;
        z += num / s as f64;
    }
    Ok(z)
}

// --- protocol configuration and runners -----------------------------------

/// Parameters of a shuffle-model run. The threshold is a calibrated null
/// quantile of the statistic at exactly these parameters; there is no
/// universal default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleConfig {
    pub k: usize,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta1: f64,
    /// Group 2 may carry its own delta; decoy rates are computed per group.
    pub delta2: f64,
    /// Requested group-1 size before coupling adjustment.
    pub n1: u64,
    /// Calibrated accept/reject cut on the statistic.
    pub threshold: f64,
    /// Poissonized participation (the default analysis model). When false,
    /// exactly `n` users participate per group.
    pub poissonized: bool,
    /// Route trials through the message-level shuffler.
    pub materialize_messages: bool,
    /// Public-coin compressed domain size `L`.
    pub compressed_size: usize,
    /// Public-coin majority repetitions (odd); fresh users per repetition.
    pub repetitions: usize,
}

impl ShuffleConfig {
    pub fn new(
        k: usize,
        alpha: f64,
        eps1: f64,
        eps2: f64,
        delta: f64,
        n1: u64,
        threshold: f64,
    ) -> Self {
        ShuffleConfig {
            k,
            alpha,
            eps1,
            eps2,
            delta1: delta,
            delta2: delta,
            n1,
            threshold,
            poissonized: true,
            materialize_messages: false,
            compressed_size: 2,
            repetitions: 9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param("k", format!("need at least 2, got {}", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must be in (0, 1], got {}", self.alpha)));
        }
        for (name, eps) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::param(name, format!("must be in (0, 1], got {eps}")));
            }
        }
        if self.eps2 > self.eps1 {
            return Err(Error::param(
                "eps2",
                format!("need eps2 <= eps1, got {} > {}", self.eps2, self.eps1),
            ));
        }
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::param(name, format!("must be in (0, 1), got {d}")));
            }
        }
        if self.n1 == 0 {
            return Err(Error::param("n1", "group size must be positive"));
        }
        if !self.threshold.is_finite() {
            return Err(Error::param("threshold", "must be finite; run calibration first"));
        }
        Ok(())
    }

    fn validate_public(&self) -> Result<()> {
        self.validate()?;
        if self.compressed_size < 2 || self.compressed_size > self.k {
            return Err(Error::param(
                "compressed_size",
                format!("need 2 <= L <= k = {}, got {}", self.k, self.compressed_size),
            ));
        }
        if self.repetitions == 0 || self.repetitions.is_multiple_of(2) {
            return Err(Error::param(
                "repetitions",
                format!("must be odd, got {}", self.repetitions),
            ));
        }
        Ok(())
    }

    /// The exact group coupling implied by this configuration.
    pub fn mixture(&self) -> Result<MixtureParams> {
        let mu1 = poisson_mu(self.eps1, self.delta1, 1.0)?;
        let mu2 = poisson_mu(self.eps2, self.delta2, 1.0)?;
        MixtureParams::from_mus(self.k, self.n1, mu1, mu2)
    }
}

fn group_histogram<R: Rng>(
    dist: &Distribution,
    n: u64,
    mu: u64,
    group: Group,
    config: &ShuffleConfig,
    rng: &mut R,
) -> Result<ShuffledHistogram> {
    if config.materialize_messages {
        let messages = shuffler_messages(dist, n, mu, rng);
        let hist = Histogram::from_samples(dist.k(), &messages)?;
        return Ok(ShuffledHistogram {
            counts: hist.counts().to_vec(),
            group,
        });
    }
    if config.poissonized {
        Ok(simulate_shuffler(dist, n, mu, group, rng))
    } else {
        Ok(simulate_shuffler_fixed_n(dist, n, mu, group, rng))
    }
}

/// One private-coin trial: both shuffler outputs and the resulting
/// uneven-sample statistic.
pub fn shuffle_trial_statistic<R: Rng>(
    config: &ShuffleConfig,
    p: &Distribution,
    q: &Distribution,
    rng: &mut R,
) -> Result<f64> {
    if p.k() != config.k || q.k() != config.k {
        return Err(Error::DimensionMismatch {
            expected: config.k,
            got: if p.k() != config.k { p.k() } else { q.k() },
        });
    }
    let m = config.mixture()?;
    let x = group_histogram(p, m.n1, m.mu1, Group::One, config, rng)?;
    let y = group_histogram(q, m.n2, m.mu2, Group::Two, config, rng)?;
    uneven_closeness_statistic(&x, &y, m.total1, m.total2)
}

/// Private-coin shuffle protocol: accept iff the statistic stays at or
/// below the calibrated threshold.
pub fn run_shuffle_private_coin<R: Rng>(
    config: &ShuffleConfig,
    p: &Distribution,
    q: &Distribution,
    rng: &mut R,
) -> Result<TestVerdict> {
    config.validate()?;
    let z = shuffle_trial_statistic(config, p, q, rng)?;
    Ok(if z <= config.threshold {
        TestVerdict::Accept
    } else {
        TestVerdict::Reject
    })
}

/// Compressed domain size from the closed form
/// `L = min(k, max(2, floor(k^(2/3) / (alpha^(4/3) mu1^(2/3)))))`.
pub fn compressed_domain_size(k: usize, alpha: f64, mu1: u64) -> usize {
    let raw = (k as f64).powf(2.0 / 3.0)
        / (alpha.powf(4.0 / 3.0) * (mu1 as f64).powf(2.0 / 3.0));
    (raw.floor() as usize).clamp(2, k)
}

/// One compressed trial on an explicit partition: users relabel through the
/// shared partition, shufflers run on the `L`-symbol domain.
pub fn shuffle_compressed_trial_statistic<R: Rng>(
    config: &ShuffleConfig,
    p: &Distribution,
    q: &Distribution,
    partition: &crate::compression::Partition,
    rng: &mut R,
) -> Result<f64> {
    let inner = ShuffleConfig {
        k: config.compressed_size,
        ..config.clone()
    };
    let pc = crate::compression::induce(p, partition)?;
    let qc = crate::compression::induce(q, partition)?;
    shuffle_trial_statistic(&inner, &pc, &qc, rng)
}

/// Public-coin shuffle protocol: per repetition draw a fresh shared
/// partition into `compressed_size` parts, run the compressed private-coin
/// test with fresh users, and take the majority verdict.
pub fn run_shuffle_public_coin<R: Rng>(
    config: &ShuffleConfig,
    p: &Distribution,
    q: &Distribution,
    rng: &mut R,
) -> Result<TestVerdict> {
    config.validate_public()?;
    if p.k() != config.k || q.k() != config.k {
        return Err(Error::DimensionMismatch {
            expected: config.k,
            got: if p.k() != config.k { p.k() } else { q.k() },
        });
    }
    majority_repeat(
        |r| {
            let partition = random_partition(config.k, config.compressed_size, r)?;
            let z = shuffle_compressed_trial_statistic(config, p, q, &partition, r)?;
            Ok(if z <= config.threshold {
                TestVerdict::Accept
            } else {
                TestVerdict::Reject
            })
        },
        config.repetitions,
        rng,
    )
}
