//! Closed-form sample sizes per model.
//!
//! Each model's group-1 size is an explicit function of `(k, alpha, eps1)`
//! (and `delta` for the shuffle models) scaled by a constant multiplier;
//! group 2 follows from the model's coupling. All counts round up.

use super::Model;
use crate::central::min_group2_count;
use crate::error::{Error, Result};
use crate::shuffle::poisson_mu;

pub(crate) fn validate_common(k: usize, alpha: f64, eps1: f64, eps2: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2, got {k}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must be in (0, 1], got {alpha}")));
    }
    for (name, eps) in [("eps1", eps1), ("eps2", eps2)] {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::param(name, format!("must be in (0, 1], got {eps}")));
        }
    }
    if eps2 > eps1 {
        return Err(Error::param(
            "eps2",
            format!("need eps2 <= eps1, got {eps2} > {eps1}"),
        ));
    }
    Ok(())
}

fn ceil_count(raw: f64) -> Result<u64> {
    if !raw.is_finite() || raw <= 0.0 {
        return Err(Error::param("multiplier", format!("sample formula gave {raw}")));
    }
    if raw >= 1e15 {
        return Err(Error::param(
            "k",
            format!("sample formula gave an impractical count {raw:.3e}"),
        ));
    }
    Ok(raw.ceil() as u64)
}

/// `ceil(n1 * mu2 / mu1)`: the ideal group-2 size implied by the decoy-rate
/// coupling, before any rounding the running protocol applies.
fn coupled_n2(n1: u64, mu1: u64, mu2: u64) -> u64 {
    ((n1 as u128 * mu2 as u128).div_ceil(mu1 as u128)) as u64
}

/// Evaluate the model's sample-size formulas at a constant multiplier.
///
/// Group-1 sizes:
/// local-private  `m * k^(3/2) / (alpha^2 eps1^2)`
/// local-public   `m * k / (alpha^2 eps1^2)` per repetition
/// shuffle-private
///   `m * (sqrt(k)/alpha^2 + k^(3/4) sqrt(ln(1/delta))/(alpha eps1)
///      + min(eps1^2 eps2^2/(alpha^4 ln^2(1/delta)),
///            (k/alpha^2)^(2/3) (eps2/eps1)^(2/3)))`
/// shuffle-public
///   `m * (sqrt(k)/alpha^2 + k^(2/3) ln^(1/3)(1/delta)/(alpha^(4/3) eps1^(2/3))
///      + sqrt(k) sqrt(ln(1/delta))/(alpha eps1))`
/// central        `m * max(sqrt(k)/alpha^2, sqrt(k)/(sqrt(eps1) alpha),
///                         k^(2/3)/alpha^(4/3), k^(1/3)/(eps1^(2/3) alpha^(4/3)),
///                         1/(eps1 alpha))`, rounded up to even
///
/// Group-2 couplings: the local models repeat their formula at `eps2`; the
/// shuffle models scale by the decoy-rate ratio `mu2/mu1`; the central model
/// inverts the subsampling amplification.
pub fn required_samples(
    model: Model,
    k: usize,
    alpha: f64,
    eps1: f64,
    eps2: f64,
    delta: f64,
    multiplier: f64,
) -> Result<(u64, u64)> {
    validate_common(k, alpha, eps1, eps2)?;
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::param(
            "multiplier",
            format!("must be positive, got {multiplier}"),
        ));
    }
    if model.needs_delta() && !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must be in (0, 1), got {delta}")));
    }
    let kf = k as f64;
    let a2 = alpha * alpha;
    match model {
        Model::LocalPrivate => {
            let base = kf.powf(1.5) / a2;
            Ok((
                ceil_count(multiplier * base / (eps1 * eps1))?,
                ceil_count(multiplier * base / (eps2 * eps2))?,
            ))
        }
        Model::LocalPublic => {
            let base = kf / a2;
            Ok((
                ceil_count(multiplier * base / (eps1 * eps1))?,
                ceil_count(multiplier * base / (eps2 * eps2))?,
            ))
        }
        Model::ShufflePrivate => {
            let l = (1.0 / delta).ln();
            let t1 = kf.sqrt() / a2;
            let t2 = kf.powf(0.75) * l.sqrt() / (alpha * eps1);
            let t3 = (eps1 * eps1 * eps2 * eps2 / (a2 * a2 * l * l))
                .min(kf.powf(2.0 / 3.0) / alpha.powf(4.0 / 3.0) * (eps2 / eps1).powf(2.0 / 3.0));
            let n1 = ceil_count(multiplier * (t1 + t2 + t3))?;
            let mu1 = poisson_mu(eps1, delta, 1.0)?;
            let mu2 = poisson_mu(eps2, delta, 1.0)?;
            Ok((n1, coupled_n2(n1, mu1, mu2)))
        }
        Model::ShufflePublic => {
            let l = (1.0 / delta).ln();
            let t1 = kf.sqrt() / a2;
            let t2 = kf.powf(2.0 / 3.0) * l.powf(1.0 / 3.0)
                / (alpha.powf(4.0 / 3.0) * eps1.powf(2.0 / 3.0));
            let t3 = kf.sqrt() * l.sqrt() / (alpha * eps1);
            let n1 = ceil_count(multiplier * (t1 + t2 + t3))?;
            let mu1 = poisson_mu(eps1, delta, 1.0)?;
            let mu2 = poisson_mu(eps2, delta, 1.0)?;
            Ok((n1, coupled_n2(n1, mu1, mu2)))
        }
        Model::Central => {
            let terms = [
                kf.sqrt() / a2,
                kf.sqrt() / (eps1.sqrt() * alpha),
                kf.powf(2.0 / 3.0) / alpha.powf(4.0 / 3.0),
                kf.powf(1.0 / 3.0) / (eps1.powf(2.0 / 3.0) * alpha.powf(4.0 / 3.0)),
                1.0 / (eps1 * alpha),
            ];
            let raw = multiplier * terms.into_iter().fold(f64::MIN, f64::max);
            // The tester splits each group in half, so n1 must be even.
            let mut n1 = ceil_count(raw)?.max(4);
            n1 += n1 % 2;
            let n2 = min_group2_count(eps1, eps2, n1)?;
            Ok((n1, n2))
        }
    }
}
