//! Theorem of the alternative for essentially nonpositive forms: either
//! some x makes every F_l x^m negative, or a convex combination of the F_l
//! is a sum of squares.

use tensoralt::alternative::{yuan_alternative, AltSettings};
use tensoralt::{Polynomial, SymmetricTensor};

fn report(name: &str, forms: &[Polynomial], m: usize) -> tensoralt::Result<()> {
    let tensors: Vec<SymmetricTensor> = forms.iter().map(|f| f.to_tensor(m)).collect::<Result<_, _>>()?;
    let cert = yuan_alternative(&tensors, None, &AltSettings::default())?;
    println!("{name}: {}", cert.outcome.label());
    if let Some(l) = &cert.lambda {
        println!("  lambda  {l:.6?}");
    }
    if let Some(sos) = &cert.sos {
        for g in &sos.squares {
            println!("  ({})^2", g.pruned(1e-9));
        }
    }
    if let Some(x) = &cert.witness {
        let vals: Vec<f64> = tensors.iter().map(|t| t.evaluate(x).unwrap()).collect();
        println!("  witness {x:.6?} values {vals:.6?}");
    }
    for (i, v) in cert.violations.iter().enumerate() {
        if i == 0 {
            print!("  offending:");
        }
        print!(" F_{v}");
    }
    if !cert.violations.is_empty() {
        println!();
    }
    println!("  certificate valid: {}", cert.validate(&tensors));
    Ok(())
}

fn main() -> tensoralt::Result<()> {
    // x1^4 + x2^4 - 3 x1^2 x2^2 and x1^4 + x2^4 - x1 x2^3 - 2 x1^3 x2
    let f1 = Polynomial::from_terms(2, [(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![2, 2], -3.0)])?;
    let f2 = Polynomial::from_terms(
        2,
        [(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![1, 3], -1.0), (vec![3, 1], -2.0)],
    )?;
    report("both negative near the diagonal", &[f1, f2], 4)?;

    let g1 = Polynomial::from_terms(2, [(vec![4, 0], 2.0), (vec![0, 4], -1.0), (vec![2, 2], -0.5)])?;
    let g2 = Polynomial::from_terms(2, [(vec![4, 0], -1.0), (vec![0, 4], 2.0), (vec![2, 2], -0.5)])?;
    report("opposing pure powers", &[g1, g2], 4)?;

    let motzkin = Polynomial::from_terms(
        4,
        [(vec![0, 0, 6, 0], 1.0), (vec![4, 2, 0, 0], 1.0), (vec![2, 4, 0, 0], 1.0), (vec![2, 2, 2, 0], -3.0)],
    )?;
    let cone = Polynomial::pure_powers(&[1.0, 1.0, 1.0, -1.0], 6);
    report("Motzkin with x4", &[motzkin, cone], 6)
}
