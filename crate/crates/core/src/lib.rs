//! Weak values, pre/post-selection and quantum Cheshire cat interferometry,
//! simulated both from the weak-value formula and from the full system-meter
//! dynamics.
//!
//! Layers, bottom-up:
//!
//! - [`hilbert`]: labeled tensor-product spaces, kets, operators, `exp`, and the q/p transform
//! - [`optics`]: optical element unitaries and the pre/post-selected states they prepare
//! - [`weakvalue`]: the observable catalog and weak-value tables
//! - [`meter`]: discrete Gaussian pointers and their moments
//! - [`dynamics`]: coupling Hamiltonians, exact and truncated evolution, effective weak-value fits
//! - [`scenario`]: declarative scenario files, sweeps and result records
//! - [`verify`]: the acceptance checks shared by the test suite and the CLI

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod meter;
pub mod optics;
pub mod scenario;
pub mod verify;
pub mod weakvalue;

pub use error::{Error, Result};
pub use hilbert::{c64, Ket, Operator, SpaceSignature};
pub use num_complex::Complex64;
