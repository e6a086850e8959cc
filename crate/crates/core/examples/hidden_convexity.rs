//! For essentially nonpositive F and X = sum_k w_k x_k^m, the diagonal root
//! vector x of X satisfies F x^m <= <F, X>. So every convex combination of
//! points in the image {(F_1 x^m, F_2 x^m)} is dominated by an image point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensoralt::{enumerate_monomials, MonomialMode, SymmetricTensor};

fn random_enp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> tensoralt::Result<SymmetricTensor> {
    let entries = enumerate_monomials(n, m as u32, MonomialMode::Exact).into_iter().map(|a| {
        let v = if a.pure_power_index(m as u32).is_some() {
            rng.random_range(-1.0..1.0)
        } else {
            -rng.random_range(0.0..1.0)
        };
        (a, v)
    });
    SymmetricTensor::from_entries(m, n, entries)
}

fn main() -> tensoralt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, m) = (3, 4);
    let f1 = random_enp(&mut rng, n, m)?;
    let f2 = random_enp(&mut rng, n, m)?;

    let pts: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let w = [0.2, 0.3, 0.5];
    let mut x_mix = SymmetricTensor::zeros(m, n)?;
    for (p, &wk) in pts.iter().zip(&w) {
        x_mix = x_mix.add(&SymmetricTensor::rank_one(p, m)?.scale(wk))?;
    }
    let xbar = x_mix.diagonal_root_vector()?;

    for (name, f) in [("F_1", &f1), ("F_2", &f2)] {
        let mixed = f.inner(&x_mix)?;
        let at_root = f.evaluate(&xbar)?;
        println!("{name}: <F, X> = {mixed:.6}, F xbar^m = {at_root:.6}");
    }
    Ok(())
}
