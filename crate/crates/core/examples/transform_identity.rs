//! <A, (P^T x)^m> = <P^m A, x^m> on random data.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensoralt::{enumerate_monomials, MonomialMode, SymmetricTensor};

fn main() -> tensoralt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let n = 1 + trial % 3;
        let m = 2 * (1 + trial % 3);
        let entries = enumerate_monomials(n, m as u32, MonomialMode::Exact)
            .into_iter()
            .map(|a| (a, rng.random_range(-1.0..1.0)));
        let a = SymmetricTensor::from_entries(m, n, entries)?;
        let p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

        let ptx: Vec<f64> = (p.transpose() * nalgebra::DVector::from_column_slice(&x)).iter().copied().collect();
        let lhs = a.evaluate(&ptx)?;
        let rhs = a.transform(&p)?.evaluate(&x)?;
        worst = worst.max((lhs - rhs).abs());
    }
    println!("largest discrepancy over 20 trials: {worst:.3e}");
    Ok(())
}
