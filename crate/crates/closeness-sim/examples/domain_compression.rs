//! Random domain compression: hash `[k]` down to a handful of parts and
//! look at how much of the L1 distance between two distributions a random
//! partition keeps. A single partition can be unlucky; across many draws
//! a constant fraction of the distance survives, which is what the
//! public-coin protocols rely on.

use closeness_sim::compression::{compress_samples, induce, random_partition, Partition};
use closeness_sim::dist::{make_family, tv_distance, FamilyKind};
use closeness_sim::rng::substream;
use closeness_sim::SampleSet;

fn main() -> closeness_sim::Result<()> {
    let k = 50;
    let (p, q) = make_family(FamilyKind::TwoSpike, k, 0.5)?;
    let full = tv_distance(&p, &q)?;
    println!("TV(p, q) over k={k}: {full:.4}");

    let mut rng = substream(3, 0);
    for parts in [2usize, 4, 8] {
        let draws = 2000;
        let mut kept = 0.0;
        let mut best: f64 = 0.0;
        for _ in 0..draws {
            let partition = random_partition(k, parts, &mut rng)?;
            let d = tv_distance(&induce(&p, &partition)?, &induce(&q, &partition)?)?;
            kept += d / full;
            best = best.max(d / full);
        }
        println!(
            "{parts} parts: mean retained fraction {:.4}, best of {draws} draws {best:.4}",
            kept / draws as f64
        );
    }

    // Compressing samples commutes with compressing the distribution.
    let partition = Partition::new(2, (0..k as u32).map(|s| s % 2).collect())?;
    let samples = SampleSet::draw(&p, 10, closeness_sim::Group::One, &mut rng);
    println!(
        "\nsamples {:?}\nmapped  {:?}",
        samples.values, compress_samples(&samples.values, &partition)?
    );
    Ok(())
}
