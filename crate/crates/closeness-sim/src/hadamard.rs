//! Local-model closeness testing via Hadamard response.
//!
//! Each user holds one sample of `[k]` and may only release a single
//! randomized bit. A Sylvester Hadamard matrix of order `K` (the smallest
//! power of two above `k`) turns the domain into `K` column sets `C_j`; a
//! user assigned to set `j` reports the bit `1{x in C_j}` through an
//! `eps`-randomized-response channel. Column sets are never materialized:
//! membership is a popcount parity of the row/column indices.
//!
//! The analyzer sees two bit matrices per group, debiases the column means,
//! and decides via an inner-product statistic whose expectation is exactly
//! `sum_j (p(C_j) - q(C_j))^2 = (K/4) * ||p - q||_2^2`, so equal
//! distributions give 0 and distant ones give at least `alpha^2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compression::{compress_samples, random_partition, Partition};
use crate::dist::{majority_repeat, Distribution, Group, SampleSet, TestVerdict};
use crate::error::{Error, Result};

/// Largest supported Hadamard order; beyond this the popcount trick would
/// still work but domains that large are out of scope.
pub const MAX_ORDER: usize = 1 << 16;

// --- design ---------------------------------------------------------------

/// Sylvester Hadamard design for a domain of `k` symbols: order
/// `K = 2^ceil(log2(k+1))`, with symbol `x` embedded at matrix row `x + 1`
/// so that row 0 (the all-ones row) carries no mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HadamardDesign {
    k: usize,
    order: usize,
}

impl HadamardDesign {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", format!("need at least 2 symbols, got {k}")));
        }
        let order = (k + 1).next_power_of_two();
        if order > MAX_ORDER {
            return Err(Error::param(
                "k",
                format!("order {order} exceeds the supported maximum {MAX_ORDER}"),
            ));
        }
        Ok(HadamardDesign { k, order })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The Hadamard order `K`, also the number of column sets and the
    /// product-test dimension.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry sign of the Sylvester matrix: `H[row][col] = +1` iff
    /// `popcount(row & col)` is even (0-indexed).
    pub fn row_in_set(&self, row: usize, set: usize) -> bool {
        debug_assert!(row < self.order && set < self.order);
        (row & set).count_ones().is_multiple_of(2)
    }

    /// Membership of a domain symbol in column set `set` under the row
    /// embedding `x -> x + 1`.
    pub fn symbol_in_set(&self, symbol: u32, set: usize) -> bool {
        debug_assert!((symbol as usize) < self.k);
        self.row_in_set(symbol as usize + 1, set)
    }

    /// Rows of column set `set` (0-indexed). Set 0 is all `K` rows; every
    /// other set has exactly `K/2`. Intended for tests and small orders.
    pub fn column_set(&self, set: usize) -> Vec<usize> {
        (0..self.order).filter(|&r| self.row_in_set(r, set)).collect()
    }

    /// Probability mass `p(C_set)` of the embedded distribution.
    pub fn set_mass(&self, p: &Distribution, set: usize) -> Result<f64> {
        if p.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: p.k(),
            });
        }
        Ok(p.pmf()
            .iter()
            .enumerate()
            .filter(|&(x, _)| self.symbol_in_set(x as u32, set))
            .map(|(_, &m)| m)
            .sum())
    }
}

/// `sum_j (p(C_j) - q(C_j))^2` over all `K` column sets, computed directly
/// from set masses. Equals `(K/4) * ||p - q||_2^2` exactly.
pub fn parseval_gap(design: &HadamardDesign, p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.k() != q.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            got: q.k(),
        });
    }
    let mut total = 0.0;
    for set in 0..design.order() {
        let d = design.set_mass(p, set)? - design.set_mass(q, set)?;
        total += d * d;
    }
    Ok(total)
}

// --- randomized response --------------------------------------------------

/// Probability that the binary channel flips its input: `1/(e^eps + 1)`.
pub fn flip_prob(eps: f64) -> f64 {
    assert!(eps > 0.0 && eps.is_finite());
    1.0 / (eps.exp() + 1.0)
}

/// Worst-case likelihood ratio of the channel. By construction this is
/// exactly `e^eps`, which is what the privacy audit certifies.
pub fn likelihood_ratio(eps: f64) -> f64 {
    assert!(eps > 0.0 && eps.is_finite());
    eps.exp()
}

/// Pass `bit` through the `eps`-randomized-response channel.
pub fn rr_flip<R: Rng>(bit: bool, eps: f64, rng: &mut R) -> bool {
    if rng.gen_bool(flip_prob(eps)) {
        !bit
    } else {
        bit
    }
}

/// Expected randomized-bit mean for a column set of mass `m`:
/// `(e^eps - 1)/(e^eps + 1) * m + 1/(e^eps + 1)`.
pub fn channel_mean(eps: f64, set_mass: f64) -> f64 {
    let f = flip_prob(eps);
    (1.0 - 2.0 * f) * set_mass + f
}

/// Invert [`channel_mean`]: unbiased estimate of the set mass from an
/// observed bit mean.
pub fn debias(eps: f64, observed_mean: f64) -> f64 {
    let f = flip_prob(eps);
    (observed_mean - f) / (1.0 - 2.0 * f)
}

// --- bit matrices ---------------------------------------------------------

/// Dense 0/1 matrix; rows are independent product-Bernoulli observations,
/// columns index the `K` column sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::param("rows", "need at least one row"));
        }
        let c = rows[0].len();
        let mut bits = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            for &b in row {
                if b > 1 {
                    return Err(Error::param("rows", format!("entry {b} is not a bit")));
                }
                bits.push(b);
            }
        }
        Ok(BitMatrix { rows: r, cols: c, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col] == 1
    }

    /// Per-column empirical means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0u64; self.cols];
        for row in self.bits.chunks_exact(self.cols) {
            for (s, &b) in sums.iter_mut().zip(row) {
                *s += b as u64;
            }
        }
        sums.iter().map(|&s| s as f64 / self.rows as f64).collect()
    }

    /// Split into two halves by rows (an odd trailing row is dropped).
    pub fn split_rows(&self) -> Result<(BitMatrix, BitMatrix)> {
        let half = self.rows / 2;
        if half == 0 {
            return Err(Error::InsufficientUsers {
                needed: 2 * self.cols,
                got: self.rows * self.cols,
            });
        }
        let take = |from: usize| BitMatrix {
            rows: half,
            cols: self.cols,
            bits: self.bits[from * self.cols..(from + half) * self.cols].to_vec(),
        };
        Ok((take(0), take(half)))
    }

    /// Reorder rows; the column means, and so every statistic here, are
    /// invariant under this.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<BitMatrix> {
        if perm.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: perm.len(),
            });
        }
        let mut bits = Vec::with_capacity(self.bits.len());
        for &r in perm {
            bits.extend_from_slice(&self.bits[r * self.cols..(r + 1) * self.cols]);
        }
        Ok(BitMatrix {
            rows: self.rows,
            cols: self.cols,
            bits,
        })
    }
}

/// Mean vector of a product-Bernoulli distribution; the clean (pre-channel)
/// or noisy (post-channel) law of one bit-matrix row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliMeanVector {
    mu: Vec<f64>,
}

impl BernoulliMeanVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::param("mu", "need at least one coordinate"));
        }
        if let Some(&bad) = mu.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::param("mu", format!("mean {bad} outside [0, 1]")));
        }
        Ok(BernoulliMeanVector { mu })
    }

    /// Noisy means of the Hadamard column-set bits for samples from `p`
    /// randomized at `eps`.
    pub fn from_design(design: &HadamardDesign, p: &Distribution, eps: f64) -> Result<Self> {
        let mu = (0..design.order())
            .map(|set| Ok(channel_mean(eps, design.set_mass(p, set)?)))
            .collect::<Result<Vec<f64>>>()?;
        BernoulliMeanVector::new(mu)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    /// Draw `rows` independent product-Bernoulli rows.
    pub fn sample_matrix<R: Rng>(&self, rows: usize, rng: &mut R) -> Result<BitMatrix> {
        if rows == 0 {
            return Err(Error::param("rows", "need at least one row"));
        }
        let cols = self.mu.len();
        let mut bits = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            for &m in &self.mu {
                bits.push(u8::from(rng.gen_bool(m)));
            }
        }
        Ok(BitMatrix { rows, cols, bits })
    }
}

/// Turn raw samples into one randomized bit per user. Users are split into
/// `K` equal blocks (block `j` answers for column set `j`, excess users are
/// discarded); the i-th user of each block fills row i.
pub fn encode_users<R: Rng>(
    samples: &SampleSet,
    design: &HadamardDesign,
    eps: f64,
    rng: &mut R,
) -> Result<BitMatrix> {
    let order = design.order();
    let m = samples.len() / order;
    if m == 0 {
        return Err(Error::InsufficientUsers {
            needed: order,
            got: samples.len(),
        });
    }
    let f = flip_prob(eps);
    let mut bits = vec![0u8; m * order];
    for set in 0..order {
        let block = &samples.values[set * m..(set + 1) * m];
        for (i, &x) in block.iter().enumerate() {
            if x as usize >= design.k() {
                return Err(Error::SymbolOutOfRange {
                    symbol: x,
                    k: design.k(),
                });
            }
            let mut bit = design.symbol_in_set(x, set);
            if rng.gen_bool(f) {
                bit = !bit;
            }
            bits[i * order + set] = u8::from(bit);
        }
    }
    Ok(BitMatrix {
        rows: m,
        cols: order,
        bits,
    })
}

// --- statistics -----------------------------------------------------------

fn check_cols(mats: [&BitMatrix; 4]) -> Result<usize> {
    let d = mats[0].cols();
    for m in &mats[1..] {
        if m.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.cols(),
            });
        }
    }
    Ok(d)
}

/// Homogeneous product-closeness statistic
/// `Z1 = <Xbar - Ybar, Xbar' - Ybar'>`; mean 0 when the product laws agree,
/// `||mu_P - mu_Q||_2^2` otherwise.
pub fn z1_statistic(x: &BitMatrix, x2: &BitMatrix, y: &BitMatrix, y2: &BitMatrix) -> Result<f64> {
    let d = check_cols([x, x2, y, y2])?;
    let (mx, mx2, my, my2) = (
        x.column_means(),
        x2.column_means(),
        y.column_means(),
        y2.column_means(),
    );
    Ok((0..d).map(|c| (mx[c] - my[c]) * (mx2[c] - my2[c])).sum())
}

/// Heterogeneous debiased statistic. With `g_i = (e^eps_i + 1)/(e^eps_i - 1)`,
/// `g_i * (mean - 1/2)` recenters group i's noisy means so that
/// `Z2 = <g1(Xbar - 1/2) - g2(Ybar - 1/2), g1(Xbar' - 1/2) - g2(Ybar' - 1/2)>`
/// has mean `sum_j (p(C_j) - q(C_j))^2` regardless of the two noise levels.
pub fn z2_statistic(
    x: &BitMatrix,
    x2: &BitMatrix,
    y: &BitMatrix,
    y2: &BitMatrix,
    eps1: f64,
    eps2: f64,
) -> Result<f64> {
    let d = check_cols([x, x2, y, y2])?;
    let g1 = gamma(eps1);
    let g2 = gamma(eps2);
    let (mx, mx2, my, my2) = (
        x.column_means(),
        x2.column_means(),
        y.column_means(),
        y2.column_means(),
    );
    Ok((0..d)
        .map(|c| {
            let a = g1 * (mx[c] - 0.5) - g2 * (my[c] - 0.5);
            let b = g1 * (mx2[c] - 0.5) - g2 * (my2[c] - 0.5);
            a * b
        })
        .sum())
}

fn gamma(eps: f64) -> f64 {
    assert!(eps > 0.0 && eps.is_finite());
    (eps.exp() + 1.0) / (eps.exp() - 1.0)
}

/// Homogeneous product test: each input holds `2n` rows from one product
/// law; split into halves, accept iff `Z1 <= alpha^2 / 2`.
pub fn z1_test(p_rows: &BitMatrix, q_rows: &BitMatrix, alpha: f64) -> Result<TestVerdict> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must be in (0, 1], got {alpha}")));
    }
    let (x, x2) = p_rows.split_rows()?;
    let (y, y2) = q_rows.split_rows()?;
    let z = z1_statistic(&x, &x2, &y, &y2)?;
    Ok(if z <= alpha * alpha / 2.0 {
        TestVerdict::Accept
    } else {
        TestVerdict::Reject
    })
}

// --- protocol configuration and runners -----------------------------------

/// Parameters of a local-model run. `threshold = None` means the fixed
/// default `alpha^2 / 2`. The last three fields only matter for the
/// public-coin runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    pub k: usize,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Users in group 1 (samples from `p`).
    pub n1: usize,
    /// Users in group 2 (samples from `q`).
    pub n2: usize,
    pub threshold: Option<f64>,
    /// Public-coin compressed domain size `L`.
    pub compressed_size: usize,
    /// Public-coin distance retention constant `c1` in
    /// `alpha' = c1 * sqrt(L/k) * alpha`; an empirically calibrated value.
    pub compression_scale: f64,
    /// Public-coin majority repetitions (odd). Each repetition uses fresh
    /// users and a fresh partition.
    pub repetitions: usize,
}

impl LocalConfig {
    pub fn new(k: usize, alpha: f64, eps1: f64, eps2: f64, n1: usize, n2: usize) -> Self {
        LocalConfig {
            k,
            alpha,
            eps1,
            eps2,
            n1,
            n2,
            threshold: None,
            compressed_size: 2,
            compression_scale: 1.0,
            repetitions: 15,
        }
    }

    pub fn threshold_value(&self) -> f64 {
        self.threshold.unwrap_or(self.alpha * self.alpha / 2.0)
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
                format!("group 2 is the more private one: need eps2 <= eps1, got {} > {}", self.eps2, self.eps1),
            ));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::param("threshold", format!("must be positive, got {t}")));
            }
        }
        let order = HadamardDesign::new(self.k)?.order();
        for (name, n) in [("n1", self.n1), ("n2", self.n2)] {
            if n < 2 * order {
                return Err(Error::param(
                    name,
                    format!("need at least 2K = {} users, got {n}", 2 * order),
                ));
            }
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
        if self.compression_scale <= 0.0 || !self.compression_scale.is_finite() {
            return Err(Error::param(
                "compression_scale",
                format!("must be positive, got {}", self.compression_scale),
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
}

/// One private-coin trial: returns the debiased statistic `Z2` computed from
/// freshly drawn, freshly randomized users.
pub fn local_trial_statistic<R: Rng>(
    config: &LocalConfig,
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
    let design = HadamardDesign::new(config.k)?;
    let s1 = SampleSet::draw(p, config.n1, Group::One, rng);
    let s2 = SampleSet::draw(q, config.n2, Group::Two, rng);
    let m1 = encode_users(&s1, &design, config.eps1, rng)?;
    let m2 = encode_users(&s2, &design, config.eps2, rng)?;
    let (x, x2) = m1.split_rows()?;
    let (y, y2) = m2.split_rows()?;
    z2_statistic(&x, &x2, &y, &y2, config.eps1, config.eps2)
}

/// Private-coin local protocol: accept iff `Z2 <= threshold`.
pub fn run_local_private_coin<R: Rng>(
    config: &LocalConfig,
    p: &Distribution,
    q: &Distribution,
    rng: &mut R,
) -> Result<TestVerdict> {
    config.validate()?;
    let z = local_trial_statistic(config, p, q, rng)?;
    Ok(if z <= config.threshold_value() {
        TestVerdict::Accept
    } else {
        TestVerdict::Reject
    })
}

/// Effective distance parameter after compressing `[k]` to `L` parts.
pub fn compressed_alpha(config: &LocalConfig) -> f64 {
    let ratio = config.compressed_size as f64 / config.k as f64;
    (config.compression_scale * ratio.sqrt() * config.alpha).min(1.0)
}

/// Statistic of one compressed run under an explicit shared partition:
/// users relabel their samples through the partition, then the private-coin
/// pipeline runs on the small domain.
pub fn local_compressed_trial_statistic<R: Rng>(
    config: &LocalConfig,
    p: &Distribution,
    q: &Distribution,
    partition: &Partition,
    rng: &mut R,
) -> Result<f64> {
    if partition.k() != config.k {
        return Err(Error::DimensionMismatch {
            expected: config.k,
            got: partition.k(),
        });
    }
    let inner_k = partition.parts();
    let design = HadamardDesign::new(inner_k)?;
    let raw1 = SampleSet::draw(p, config.n1, Group::One, rng);
    let raw2 = SampleSet::draw(q, config.n2, Group::Two, rng);
    let s1 = SampleSet::new(compress_samples(&raw1.values, partition)?, Group::One, inner_k)?;
    let s2 = SampleSet::new(compress_samples(&raw2.values, partition)?, Group::Two, inner_k)?;
    let m1 = encode_users(&s1, &design, config.eps1, rng)?;
    let m2 = encode_users(&s2, &design, config.eps2, rng)?;
    let (x, x2) = m1.split_rows()?;
    let (y, y2) = m2.split_rows()?;
    z2_statistic(&x, &x2, &y, &y2, config.eps1, config.eps2)
}

/// One compressed verdict at the reduced distance. With the identity
/// partition this is exactly the private-coin protocol.
pub fn run_local_compressed_once<R: Rng>(
    config: &LocalConfig,
    p: &Distribution,
    q: &Distribution,
    partition: &Partition,
    rng: &mut R,
) -> Result<TestVerdict> {
    let alpha = compressed_alpha(config);
    let threshold = config.threshold.unwrap_or(alpha * alpha / 2.0);
    let z = local_compressed_trial_statistic(config, p, q, partition, rng)?;
    Ok(if z <= threshold {
        TestVerdict::Accept
    } else {
        TestVerdict::Reject
    })
}

/// Public-coin local protocol: per repetition, draw a shared uniformly
/// random partition into `compressed_size` parts, run the compressed
/// private-coin test, and take the majority over all repetitions.
pub fn run_local_public_coin<R: Rng>(
    config: &LocalConfig,
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
            run_local_compressed_once(config, p, q, &partition, r)
        },
        config.repetitions,
        rng,
    )
}
