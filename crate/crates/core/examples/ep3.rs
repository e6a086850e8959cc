//! Exact SOS relaxation of EP3: the minimum over the unit l6 ball is -1,
//! attained at (3^{-1/6}, 3^{-1/6}, 3^{-1/6}).
//!
//! cargo run --release --example ep3

use tensoralt::popt::{solve_exact_sos, PopInstance, PopSettings};
use tensoralt::Polynomial;

fn main() -> tensoralt::Result<()> {
    let f0 = Polynomial::from_terms(
        3,
        [
            (vec![6, 0, 0], 1.0),
            (vec![0, 6, 0], 1.0),
            (vec![0, 0, 6], 1.0),
            (vec![4, 2, 0], -1.0),
            (vec![2, 4, 0], -1.0),
            (vec![4, 0, 2], -1.0),
            (vec![2, 0, 4], -1.0),
            (vec![0, 4, 2], -1.0),
            (vec![0, 2, 4], -1.0),
        ],
    )?;
    let f1 = Polynomial::pure_powers(&[1.0, 1.0, 1.0], 6).add(&Polynomial::constant(3, -1.0));
    let inst = PopInstance::new(f0, vec![f1], 6)?;

    let report = solve_exact_sos(&inst, &PopSettings::default())?;
    println!("bound      {:.9}", report.bound);
    println!("validation {}", report.validation.label());
    if let Some(x) = &report.recovered {
        println!("minimizer  {x:.6?}");
        println!("f0(x)      {:.9}", inst.objective().evaluate(x)?);
    }
    println!("expected   -1 at |x_i| = {:.6}", 3f64.powf(-1.0 / 6.0));
    Ok(())
}
