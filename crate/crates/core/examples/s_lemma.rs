//! Homogeneous S-lemma for quartic forms: F_1 x^4 <= 0 implies
//! F_0 x^4 >= 0 exactly when F_0 + lambda F_1 is SOS for some lambda >= 0.

use tensoralt::alternative::{s_lemma, AltSettings, SLemmaOutcome};
use tensoralt::Polynomial;

fn main() -> tensoralt::Result<()> {
    // F_1 = x1^4 - x2^4 <= 0 forces |x1| <= |x2|.
    let f1 = Polynomial::pure_powers(&[1.0, -1.0], 4).to_tensor(4)?;
    let slater = [0.0, 1.0];

    let cases = [
        ("2 x2^4 - x1^4 - x1^2 x2^2 / 2", [-1.0, 2.0, -0.5]),
        ("x2^4 - 2 x1^4 - x1^2 x2^2", [-2.0, 1.0, -1.0]),
    ];
    for (name, [a, b, c]) in cases {
        let f0 = Polynomial::from_terms(2, [(vec![4, 0], a), (vec![0, 4], b), (vec![2, 2], c)])?.to_tensor(4)?;
        let res = s_lemma(&f0, std::slice::from_ref(&f1), &slater, None, &AltSettings::default())?;
        println!("F_0 = {name}");
        match res.outcome {
            SLemmaOutcome::Holds => {
                println!("  holds, lambda = {:.6?}", res.lambda.unwrap());
                let cert = res.certificate.unwrap();
                println!("  certificate residual {:.2e}", cert.residual);
            }
            SLemmaOutcome::Violated => {
                let x = res.violator.unwrap();
                println!(
                    "  violated at {x:.6?}: F_1 = {:.4}, F_0 = {:.4}",
                    f1.evaluate(&x)?,
                    f0.evaluate(&x)?
                );
            }
            other => println!("  {other:?}"),
        }
    }
    Ok(())
}
