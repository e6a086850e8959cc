//! Matrix case: for Z-matrices A_1, A_2 either some x has x^T A_l x < 0
//! for both, or a convex combination is positive semidefinite.

use nalgebra::DMatrix;
use tensoralt::alternative::{matrix_alternative, AltSettings};

fn main() -> tensoralt::Result<()> {
    let pairs = [
        (
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]),
        ),
        (
            DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, -3.0, -3.0, 1.0]),
        ),
    ];
    for (a1, a2) in pairs {
        let cert = matrix_alternative(&[a1.clone(), a2.clone()], None, &AltSettings::default())?;
        println!("{}", cert.outcome.label());
        if let Some(l) = &cert.lambda {
            let combo = &a1 * l[0] + &a2 * l[1];
            println!("  lambda {l:.4?}, min eigenvalue {:.2e}", combo.symmetric_eigenvalues().min());
        }
        if let Some(x) = &cert.witness {
            let v = nalgebra::DVector::from_column_slice(x);
            println!("  x = {x:.4?}: {:.4} {:.4}", v.dot(&(&a1 * &v)), v.dot(&(&a2 * &v)));
        }
    }

    // With a congruence Q the matrices Q^T A Q must be Z-matrices instead.
    let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    let a2 = DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 3.0, 1.0]);
    let cert = matrix_alternative(&[a1, a2], Some(&q), &AltSettings::default())?;
    println!("with Q = diag(1,-1): {}", cert.outcome.label());
    Ok(())
}
