//! The Motzkin polynomial is nonnegative but not a sum of squares. The SOS
//! check returns a moment vector y with <y, f> < 0 and M(y) PSD; sampling
//! confirms f >= 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensoralt::sos::{sos_check_detailed, SosSettings, SosVerdict};
use tensoralt::Polynomial;

fn main() -> tensoralt::Result<()> {
    let f = Polynomial::from_terms(
        3,
        [(vec![0, 0, 6], 1.0), (vec![4, 2, 0], 1.0), (vec![2, 4, 0], 1.0), (vec![2, 2, 2], -3.0)],
    )?;
    let check = sos_check_detailed(&f, 6, &SosSettings::default())?;
    match &check.verdict {
        SosVerdict::NotSos { witness, gamma } => {
            println!("NOT_SOS");
            println!("  <y, f>           = {gamma:.6e}");
            println!("  min eig of M(y)  = {:.3e}", witness.min_eigenvalue(&check.basis));
        }
        other => println!("unexpected verdict: {other:?}"),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lowest = f64::INFINITY;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        lowest = lowest.min(f.evaluate(&x)?);
    }
    println!("lowest sampled value {lowest:.3e}");
    Ok(())
}
