//! The interior-point solver on random problems with a planted optimum, and
//! the plain-text dump format.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tensoralt::sdp::{kkt_residual, random_instance_with_optimum, solve, SdpSettings};

fn main() -> tensoralt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sizes in [vec![3], vec![4, 2], vec![5, 3, 1]] {
        let (problem, optimum) = random_instance_with_optimum(&mut rng, &sizes, 4);
        let sol = solve(&problem, &SdpSettings::default())?;
        println!(
            "blocks {sizes:?}: {:?} in {} iterations, objective {:.9} (planted {:.9}), KKT {:.1e}",
            sol.status,
            sol.iterations,
            sol.primal_objective,
            optimum,
            kkt_residual(&problem, &sol)
        );
    }

    let (small, _) = random_instance_with_optimum(&mut rng, &[2], 1);
    print!("{}", small.dump());
    Ok(())
}
