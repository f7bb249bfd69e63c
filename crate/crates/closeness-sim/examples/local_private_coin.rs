//! A full local-model private-coin closeness test, pieced together from
//! the building blocks: size the groups from the closed form, run many
//! independent trials against a null pair and a far pair, and report the
//! empirical accept and reject rates.

use closeness_sim::dist::{make_family, FamilyKind};
use closeness_sim::hadamard::{run_local_private_coin, LocalConfig};
use closeness_sim::harness::{required_samples, Model};
use closeness_sim::rng::substream;
use closeness_sim::TestVerdict;

fn main() -> closeness_sim::Result<()> {
    let (k, alpha, eps1, eps2) = (8usize, 0.5, 1.0, 0.5);
    let (n1, n2) = required_samples(Model::LocalPrivate, k, alpha, eps1, eps2, 0.0, 10.0)?;
    println!("group sizes n1={n1} n2={n2}");

    let config = LocalConfig::new(k, alpha, eps1, eps2, n1 as usize, n2 as usize);
    let (p, far_q) = make_family(FamilyKind::TwoSpike, k, alpha)?;

    let trials = 200;
    let mut accepted_null = 0;
    let mut rejected_far = 0;
    for t in 0..trials {
        // Separate substreams keep the two cases independent.
        if run_local_private_coin(&config, &p, &p, &mut substream(7, 2 * t))? == TestVerdict::Accept
        {
            accepted_null += 1;
        }
        if run_local_private_coin(&config, &p, &far_q, &mut substream(7, 2 * t + 1))?
            == TestVerdict::Reject
        {
            rejected_far += 1;
        }
    }
    println!("null pair accepted {accepted_null}/{trials}");
    println!("far pair rejected  {rejected_far}/{trials}");
    println!("target: at least 2/3 for both");
    Ok(())
}
