//! The identity that makes one-bit closeness testing work: summing the
//! squared set-mass gaps over every Hadamard column set recovers the
//! squared L2 distance, scaled by a quarter of the matrix order.
//!
//! Run with `cargo run --example hadamard_identity`.

use closeness_sim::dist::{l2_distance_sq, make_family, FamilyKind};
use closeness_sim::hadamard::{parseval_gap, HadamardDesign};

fn main() -> closeness_sim::Result<()> {
    for k in [3usize, 8, 20, 50] {
        let design = HadamardDesign::new(k)?;
        let (p, q) = make_family(FamilyKind::TwoSpike, k, 0.4)?;
        let direct = parseval_gap(&design, &p, &q)?;
        let closed = design.order() as f64 / 4.0 * l2_distance_sq(&p, &q)?;
        println!(
            "k={k:>2}  order K={:>3}  sum_j (p(C_j)-q(C_j))^2 = {direct:.9}  (K/4)||p-q||^2 = {closed:.9}",
            design.order()
        );
        assert!((direct - closed).abs() < 1e-12);
    }

    // A couple of individual set masses, to show what the sets look like.
    let design = HadamardDesign::new(3)?;
    let (p, _) = make_family(FamilyKind::Zipf, 3, 0.4)?;
    println!("\nzipf p over k=3, order {}:", design.order());
    for set in 0..design.order() {
        println!("  mass of column set {set}: {:.6}", design.set_mass(&p, set)?);
    }
    Ok(())
}
