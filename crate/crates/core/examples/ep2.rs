//! EP2: min x1^4 + x2^4 + x3^4 - 4 x1 x3^3 subject to
//! x1^4 - x2^4/2 + x3^4 <= 1. The optimum is 1 - 27^{1/4}, attained with
//! x2 = 0 and x3 = 3^{1/4} x1.
//!
//! cargo run --release --example ep2

use tensoralt::popt::{solve_exact_sos, PopInstance, PopSettings};
use tensoralt::Polynomial;

fn main() -> tensoralt::Result<()> {
    let f0 = Polynomial::from_terms(
        3,
        [(vec![4, 0, 0], 1.0), (vec![0, 4, 0], 1.0), (vec![0, 0, 4], 1.0), (vec![1, 0, 3], -4.0)],
    )?;
    let f1 = Polynomial::from_terms(
        3,
        [(vec![4, 0, 0], 1.0), (vec![0, 4, 0], -0.5), (vec![0, 0, 4], 1.0), (vec![0, 0, 0], -1.0)],
    )?;
    let inst = PopInstance::new(f0, vec![f1], 4)?;
    let report = solve_exact_sos(&inst, &PopSettings::default())?;

    println!("bound      {:.6}", report.bound);
    println!("expected   {:.6}", 1.0 - 27f64.powf(0.25));
    println!("multiplier {:.6}", report.multipliers[0]);
    println!("validation {}", report.validation.label());
    if let Some(x) = &report.recovered {
        println!("minimizer  {x:.6?}");
        println!("x3 / x1    {:.6}  (3^(1/4) = {:.6})", x[2] / x[0], 3f64.powf(0.25));
    }
    Ok(())
}
