//! Heterogeneous budgets in the shuffle model force the two groups onto
//! different decoy rates. The cross-coupling `n1 mu2 = n2 mu1` equalizes
//! the decoy fraction gamma in both groups, so the effective pair is a
//! mixture with the uniform distribution that contracts distances by
//! exactly `1 - gamma`.

use closeness_sim::dist::{make_family, tv_distance, FamilyKind};
use closeness_sim::shuffle::{poisson_mu, MixtureParams};

fn main() -> closeness_sim::Result<()> {
    let k = 10;
    let (eps1, eps2, delta) = (1.0, 0.5, 1e-6);
    let mu1 = poisson_mu(eps1, delta, 1.0)?;
    let mu2 = poisson_mu(eps2, delta, 1.0)?;
    println!("mu1={mu1} mu2={mu2} (ratio {:.4})", mu2 as f64 / mu1 as f64);

    let m = MixtureParams::from_mus(k, 1000, mu1, mu2)?;
    println!(
        "requested n1=1000, coupled sizes n1={} n2={} (n1 mu2 = {} = n2 mu1 = {})",
        m.n1,
        m.n2,
        m.n1 as u128 * m.mu2 as u128,
        m.n2 as u128 * m.mu1 as u128
    );
    println!("decoy fraction gamma = {:.6}", m.gamma());

    let (p, q) = make_family(FamilyKind::TwoSpike, k, 0.5)?;
    let tv = tv_distance(&p, &q)?;
    let mixed = tv_distance(&m.mixture(&p)?, &m.mixture(&q)?)?;
    println!("TV before {tv:.6}, after mixing {mixed:.6}, contraction {:.6}", mixed / tv);
    assert!((mixed - (1.0 - m.gamma()) * tv).abs() < 1e-12);
    Ok(())
}
