//! The Poisson decoy mechanism behind the shuffle model: how many decoy
//! messages per symbol buy a given `(eps, delta)` guarantee, and what the
//! shuffled histogram looks like.

use closeness_sim::dist::{make_family, FamilyKind, Group};
use closeness_sim::rng::substream;
use closeness_sim::shuffle::{poisson_mu, poisson_mu_bound, simulate_shuffler};

fn main() -> closeness_sim::Result<()> {
    println!("decoy rate mu per symbol (sensitivity 1):");
    println!("eps     delta=1e-1  delta=1e-4  delta=1e-6");
    for eps in [1.0, 0.5, 0.25, 0.125] {
        let row: Vec<u64> = [1e-1, 1e-4, 1e-6]
            .iter()
            .map(|&d| poisson_mu(eps, d, 1.0))
            .collect::<closeness_sim::Result<_>>()?;
        println!("{eps:<6}  {:<10}  {:<10}  {}", row[0], row[1], row[2]);
    }
    println!(
        "\nexact bound before rounding at (1, 0.1): {:.4}",
        poisson_mu_bound(1.0, 0.1, 1.0)?
    );

    // Each histogram bin is Poisson(n p_j + mu): decoys drown the signal
    // at small n, which is exactly why group sizes must grow with mu.
    let k = 5;
    let n = 100u64;
    let mu = poisson_mu(1.0, 0.1, 1.0)?;
    let (p, _) = make_family(FamilyKind::Zipf, k, 0.3)?;
    let mut rng = substream(9, 0);
    let hist = simulate_shuffler(&p, n, mu, Group::One, &mut rng);
    println!("\none shuffled histogram at n={n}, mu={mu}:");
    for (j, c) in hist.counts.iter().enumerate() {
        println!(
            "  bin {j}: count {c:>4}  expected {:.1}",
            n as f64 * p.pmf()[j] + mu as f64
        );
    }
    Ok(())
}
