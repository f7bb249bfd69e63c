//! The one-bit randomized response channel: flip probability, worst-case
//! likelihood ratio, and how the debiasing step recovers a set mass from
//! noisy bits.

use closeness_sim::hadamard::{channel_mean, debias, flip_prob, likelihood_ratio, rr_flip};
use closeness_sim::rng::substream;

fn main() {
    println!("eps    flip prob   likelihood ratio   exp(eps)");
    for eps in [0.1, 0.25, 0.5, 1.0] {
        println!(
            "{eps:<5}  {:<10.6}  {:<17.6}  {:.6}",
            flip_prob(eps),
            likelihood_ratio(eps),
            eps.exp()
        );
    }

    // Debiasing demo: a set with true mass 0.3, observed through the
    // channel a million times.
    let eps = 0.5;
    let mass = 0.3;
    let mut rng = substream(42, 0);
    let n = 1_000_000;
    let mut ones = 0u64;
    for i in 0..n {
        // the i-th user holds a symbol inside the set w.p. `mass`
        let inside = (i as f64 / n as f64) < mass;
        if rr_flip(inside, eps, &mut rng) {
            ones += 1;
        }
    }
    let observed = ones as f64 / n as f64;
    println!("\ntrue mass {mass}, channel mean {:.6}", channel_mean(eps, mass));
    println!("observed mean {observed:.6}, debiased {:.6}", debias(eps, observed));
}
