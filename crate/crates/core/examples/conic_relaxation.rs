//! The homogenized conic data behind the exact relaxation, for EP2.

use tensoralt::popt::{build_conic_relaxation, PopInstance};
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
    let conic = build_conic_relaxation(&inst)?;
    for (l, t) in conic.tensors.iter().enumerate() {
        println!(
            "F_{l}: order {} dim {}, {:?}, homogenized {}",
            t.order(),
            t.dim(),
            t.classify_essential_sign(),
            Polynomial::from_tensor(t)?
        );
    }
    println!("normalization exponent: {}", conic.normalization);
    println!("{}", conic.note);
    Ok(())
}
