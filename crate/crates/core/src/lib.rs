//! Dual-number linear algebra and dual Drazin inverses.
//!
//! The crate is `no_std` (with `alloc`). Matrices are dense `nalgebra`
//! complex matrices; dual matrices pair a standard part with an
//! infinitesimal part under `ε² = 0`.

#![no_std]

extern crate alloc;

pub mod dualmat;
pub mod blocks;
pub mod digraphs;
pub mod drazin;
pub mod dualnum;
pub mod error;
pub mod linalg;
pub mod schur;
pub mod tol;

pub use dualmat::{DualMatrix, IndexReport};
pub use dualnum::DualScalar;
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use tol::Tolerances;
pub use num_complex::Complex64;
