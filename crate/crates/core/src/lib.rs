//! Theorems of the alternative for essentially nonpositive symmetric tensors,
//! and exact sum-of-squares relaxations for polynomial optimization problems
//! whose coefficients carry the same sign structure.
//!
//! The crate is organized bottom-up:
//!
//! * [`multiindex`] – exponents, grlex enumeration and multinomial counts.
//! * [`tensor`] – sparse symmetric tensors stored by exponent.
//! * [`poly`] – sparse polynomials, support sets, homogenization.
//! * [`sdp`] – a dense block-diagonal primal–dual interior-point solver.
//! * [`sos`] – Gram-matrix SOS programs, certificates and moment witnesses.
//! * [`alternative`] – the tensor Yuan alternative, the homogeneous S-lemma
//!   and the matrix corollary.
//! * [`popt`] – polynomial optimization with essentially nonpositive
//!   coefficients: exact SOS bound, minimizer recovery and a multi-start oracle.
//! * [`cli`] – problem files, the `tensoralt` subcommands and report formatting.

pub mod alternative;
pub mod cli;
mod error;
pub mod multiindex;
mod optim;
pub mod poly;
pub mod popt;
pub mod sdp;
pub mod sos;
pub mod tensor;

pub use error::{Error, Result};
pub use multiindex::{enumerate_monomials, multiplicity, Exponent, MonomialMode};
pub use poly::Polynomial;
pub use tensor::{EssentialSign, SymmetricTensor};
