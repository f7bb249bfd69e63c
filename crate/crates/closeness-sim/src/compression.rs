//! Domain compression: project a testing problem on `[k]` down to `[parts]`
//! through a uniformly random partition shared as public randomness.
//!
//! Equal distributions stay equal under any partition, and a random partition
//! preserves a constant fraction `c1 * sqrt(parts / k)` of the distance with
//! constant probability `c2`, which is what makes public-coin protocols
//! cheaper than private-coin ones. The constants are estimated empirically by
//! the harness calibration, not assumed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};

/// Assignment of each symbol of `[k]` to one of `parts` cells. Cells may be
/// empty; the assignment is exactly what two parties must share to compress
/// consistently, and it serializes as a plain JSON array of part indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    parts: usize,
    assignment: Vec<u32>,
}

impl Partition {
    /// Explicit assignment; every index must be below `parts`.
    pub fn new(parts: usize, assignment: Vec<u32>) -> Result<Self> {
        if parts < 2 {
            return Err(Error::param("parts", format!("need at least 2, got {parts}")));
        }
        if assignment.len() < 2 {
            return Err(Error::param(
                "assignment",
                format!("domain size must be at least 2, got {}", assignment.len()),
            ));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| (a as usize) >= parts) {
            return Err(Error::param(
                "assignment",
                format!("part index {bad} out of range for {parts} parts"),
            ));
        }
        Ok(Partition { parts, assignment })
    }

    /// Symbol `i` maps to part `i` (requires `parts == k`).
    pub fn identity(k: usize) -> Result<Self> {
        Partition::new(k, (0..k as u32).collect())
    }

    pub fn k(&self) -> usize {
        self.assignment.len()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    /// The shared-randomness payload: part index per symbol.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn part_of(&self, symbol: u32) -> u32 {
        self.assignment[symbol as usize]
    }
}

/// Uniformly random partition: each symbol's part is i.i.d. uniform over
/// `0..parts`. Requires `2 <= parts <= k`.
pub fn random_partition<R: Rng>(k: usize, parts: usize, rng: &mut R) -> Result<Partition> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2, got {k}")));
    }
    if parts < 2 || parts > k {
        return Err(Error::param(
            "parts",
            format!("need 2 <= parts <= k = {k}, got {parts}"),
        ));
    }
    let assignment = (0..k).map(|_| rng.gen_range(0..parts as u32)).collect();
    Partition::new(parts, assignment)
}

/// Pushforward of `p` under the partition: induced mass of part `j` is the
/// total mass of symbols assigned to `j`.
pub fn induce(p: &Distribution, partition: &Partition) -> Result<Distribution> {
    if p.k() != partition.k() {
        return Err(Error::DimensionMismatch {
            expected: partition.k(),
            got: p.k(),
        });
    }
    let mut folded = vec![0.0; partition.parts()];
    for (i, &mass) in p.pmf().iter().enumerate() {
        folded[partition.part_of(i as u32) as usize] += mass;
    }
    Distribution::new(folded)
}

/// Relabel samples through the partition. The histogram of the output is the
/// histogram of the input pushed through [`induce`]'s map.
pub fn compress_samples(samples: &[u32], partition: &Partition) -> Result<Vec<u32>> {
    let k = partition.k();
    samples
        .iter()
        .map(|&v| {
            if (v as usize) >= k {
                Err(Error::SymbolOutOfRange { symbol: v, k })
            } else {
                Ok(partition.part_of(v))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{l2_distance_sq, make_family, tv_distance, FamilyKind};
    use crate::rng::substream;
    use rand::Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn induce_hand_value() {
        // k = 4 -> 2 parts; masses fold additively.
        let p = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let part = Partition::new(2, vec![0, 1, 0, 1]).unwrap();
        let folded = induce(&p, &part).unwrap();
        assert!((folded.pmf()[0] - 0.4).abs() < TOL);
        assert!((folded.pmf()[1] - 0.6).abs() < TOL);
    }

    #[test]
    fn equality_is_preserved() {
        let mut rng = substream(11, 0);
        for _ in 0..100 {
            let k = rng.gen_range(4..=32);
            let parts = rng.gen_range(2..=k);
            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            let p = Distribution::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let part = random_partition(k, parts, &mut rng).unwrap();
            let a = induce(&p, &part).unwrap();
            let b = induce(&p.clone(), &part).unwrap();
            assert_eq!(tv_distance(&a, &b).unwrap(), 0.0);
        }
    }

    #[test]
    fn pushforward_is_linear() {
        // induce(mix) == mix(induce) exactly.
        let mut rng = substream(12, 0);
        let k = 12;
        let mk = |rng: &mut crate::rng::TrialRng| {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            Distribution::new(raw.iter().map(|v| v / s).collect()).unwrap()
        };
        for _ in 0..50 {
            let (p, q) = (mk(&mut rng), mk(&mut rng));
            let lambda: f64 = rng.gen();
            let mix = Distribution::new(
                p.pmf()
                    .iter()
                    .zip(q.pmf())
                    .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                    .collect(),
            )
            .unwrap();
            let part = random_partition(k, 3, &mut rng).unwrap();
            let lhs = induce(&mix, &part).unwrap();
            let (ip, iq) = (induce(&p, &part).unwrap(), induce(&q, &part).unwrap());
            for j in 0..3 {
                let rhs = lambda * ip.pmf()[j] + (1.0 - lambda) * iq.pmf()[j];
                assert!((lhs.pmf()[j] - rhs).abs() < TOL);
            }
        }
    }

    #[test]
    fn compress_samples_matches_induced_histogram() {
        let (p, _) = make_family(FamilyKind::Zipf, 16, 0.2).unwrap();
        let mut rng = substream(13, 0);
        let part = random_partition(16, 4, &mut rng).unwrap();
        let xs = p.sample(20_000, &mut rng);
        let ys = compress_samples(&xs, &part).unwrap();
        let mut direct = vec![0u64; 4];
        for (&x, &y) in xs.iter().zip(&ys) {
            assert_eq!(part.part_of(x), y);
            direct[y as usize] += 1;
        }
        let hist = crate::dist::Histogram::from_samples(4, &ys).unwrap();
        assert_eq!(hist.counts(), direct.as_slice());
    }

    #[test]
    fn identity_partition_relabels_bijectively() {
        let part = Partition::identity(6).unwrap();
        let xs = vec![0u32, 5, 3, 3, 1];
        assert_eq!(compress_samples(&xs, &part).unwrap(), xs);
        let p = Distribution::uniform(6).unwrap();
        assert_eq!(induce(&p, &part).unwrap().pmf(), p.pmf());
    }

    #[test]
    fn distance_shrinkage_holds_often_enough() {
        // With TV = 0.5 the compressed distance clears 0.05*sqrt(parts/k)*TV
        // in well over 10% of random partitions.
        let mut rng = substream(14, 0);
        for kind in [FamilyKind::TwoSpike, FamilyKind::PaninskiFar] {
            let k = 32;
            let parts = 2;
            let (p, q) = make_family(kind, k, 0.5).unwrap();
            let threshold = 0.05 * (parts as f64 / k as f64).sqrt() * 0.5;
            let mut hits = 0;
            let trials = 1000;
            for _ in 0..trials {
                let part = random_partition(k, parts, &mut rng).unwrap();
                let tv = tv_distance(&induce(&p, &part).unwrap(), &induce(&q, &part).unwrap())
                    .unwrap();
                if tv >= threshold {
                    hits += 1;
                }
            }
            let frac = hits as f64 / trials as f64;
            assert!(frac >= 0.1, "{kind:?}: shrinkage hit rate {frac}");
        }
    }

    #[test]
    fn occupancy_at_full_parts() {
        // With parts == k, expect k*(1-1/k)^(k-1) singleton cells on average.
        let k = 16;
        let expected = k as f64 * (1.0 - 1.0 / k as f64).powi(k as i32 - 1);
        let mut rng = substream(15, 0);
        let trials = 2000;
        let mut counts = Vec::with_capacity(trials);
        for _ in 0..trials {
            let part = random_partition(k, k, &mut rng).unwrap();
            let mut occupancy = vec![0u32; k];
            for &a in part.assignment() {
                occupancy[a as usize] += 1;
            }
            counts.push(occupancy.iter().filter(|&&c| c == 1).count() as f64);
        }
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se + 1e-9,
            "singletons: mean {mean}, expected {expected}, se {se}"
        );
    }

    #[test]
    fn tv_never_grows() {
        // Data processing: a deterministic relabeling cannot increase TV,
        // and squared l2 grows at most by the largest part size.
        let mut rng = substream(16, 0);
        for _ in 0..100 {
            let (p, q) = make_family(FamilyKind::PaninskiFar, 16, 0.4).unwrap();
            let part = random_partition(16, rng.gen_range(2..=8), &mut rng).unwrap();
            let (ip, iq) = (induce(&p, &part).unwrap(), induce(&q, &part).unwrap());
            assert!(tv_distance(&ip, &iq).unwrap() <= tv_distance(&p, &q).unwrap() + TOL);
            let mut occupancy = vec![0usize; part.parts()];
            for &a in part.assignment() {
                occupancy[a as usize] += 1;
            }
            let max_cell = *occupancy.iter().max().unwrap() as f64;
            assert!(
                l2_distance_sq(&ip, &iq).unwrap()
                    <= max_cell * l2_distance_sq(&p, &q).unwrap() + TOL
            );
        }
    }

    #[test]
    fn serializes_as_index_array() {
        let part = Partition::new(3, vec![0, 2, 1, 0]).unwrap();
        let json = serde_json::to_string(part.assignment()).unwrap();
        assert_eq!(json, "[0,2,1,0]");
        let back: Vec<u32> = serde_json::from_str(&json).unwrap();
        let rebuilt = Partition::new(3, back).unwrap();
        assert_eq!(rebuilt, part);
    }

    #[test]
    fn input_validation() {
        let mut rng = substream(17, 0);
        assert!(random_partition(8, 1, &mut rng).is_err());
        assert!(random_partition(8, 9, &mut rng).is_err());
        assert!(Partition::new(2, vec![0, 2]).is_err());
        let part = Partition::new(2, vec![0, 1, 1]).unwrap();
        let p = Distribution::uniform(4).unwrap();
        assert!(induce(&p, &part).is_err());
        assert!(compress_samples(&[3], &part).is_err());
    }
}
