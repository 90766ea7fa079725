//! Labeled composite Hilbert spaces: kets, dense operators, tensor products,
//! matrix exponentials and the centered q <-> p transform.

mod dft;
mod expm;
mod ket;
mod operator;
mod signature;

pub use dft::{dft_p_to_q, dft_q_to_p, momentum, momentum_grid};
pub(crate) use expm::exp_hermitian;
pub use expm::{mat_exp, mat_exp_general};
pub use ket::Ket;
pub use operator::{Operator, STRUCTURE_TOL};
pub use signature::{labels, Factor, SpaceSignature};

use num_complex::Complex64;

/// Shorthand for building complex literals.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
