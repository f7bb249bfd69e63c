//! Group sizes across the five models at one parameter point. The local
//! models pay k^(3/2) (private coin) or k per repetition (public coin);
//! the shuffle and central models get away with sublinear dependence.

use closeness_sim::harness::{required_samples, Model};

fn main() -> closeness_sim::Result<()> {
    let (alpha, eps1, eps2, delta) = (0.5, 1.0, 0.5, 1e-6);
    println!("alpha={alpha} eps=({eps1}, {eps2}) delta={delta} multiplier=1\n");
    println!("{:<16} {:>10} {:>10} {:>10} {:>10}", "model", "k=20", "", "k=200", "");
    println!("{:<16} {:>10} {:>10} {:>10} {:>10}", "", "n1", "n2", "n1", "n2");
    for model in Model::ALL {
        let (a1, a2) = required_samples(model, 20, alpha, eps1, eps2, delta, 1.0)?;
        let (b1, b2) = required_samples(model, 200, alpha, eps1, eps2, delta, 1.0)?;
        println!("{:<16} {a1:>10} {a2:>10} {b1:>10} {b2:>10}", model.name());
    }

    println!("\nhalving eps2 at k=100 (n2 growth factor):");
    for model in Model::ALL {
        let (_, base) = required_samples(model, 100, alpha, eps1, 0.25, delta, 1.0)?;
        let (_, half) = required_samples(model, 100, alpha, eps1, 0.125, delta, 1.0)?;
        println!("  {:<16} {:.3}", model.name(), half as f64 / base as f64);
    }
    Ok(())
}
