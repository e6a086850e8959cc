//! EP1: the Motzkin polynomial over the unit l6 ball. Its coefficients are
//! not essentially nonpositive, the SOS relaxation gives a strictly negative
//! bound and the true minimum is 0.
//!
//! cargo run --release --example ep1

use tensoralt::popt::{solve_exact_sos, PopInstance, PopSettings};
use tensoralt::Polynomial;

fn main() -> tensoralt::Result<()> {
    let motzkin = Polynomial::from_terms(
        3,
        [(vec![0, 0, 6], 1.0), (vec![4, 2, 0], 1.0), (vec![2, 4, 0], 1.0), (vec![2, 2, 2], -3.0)],
    )?;
    let ball = Polynomial::pure_powers(&[1.0, 1.0, 1.0], 6).add(&Polynomial::constant(3, -1.0));

    let inst = PopInstance::new_unchecked(motzkin, vec![ball], 6)?;
    for (l, bad) in inst.enp_violations() {
        let list: Vec<String> = bad.iter().map(|e| e.to_string()).collect();
        println!("f_{l} offending exponents: {}", list.join(" "));
    }

    let report = solve_exact_sos(&inst, &PopSettings::default())?;
    println!("SOS bound    {:.6}", report.bound);
    match report.oracle_value() {
        Some(v) => println!("oracle value {v:.3e}"),
        None => println!("oracle value NO_FEASIBLE_POINT"),
    }
    println!("gap flagged  {}", report.gap);
    Ok(())
}
