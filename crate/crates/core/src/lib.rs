//! Exact computations with Drinfeld `F_q[t]`-modules over global and finite
//! fields of characteristic `p`: torsion, Frobenius action, mod-`a` Galois
//! images, Kummer maps and divisibility hulls of finitely generated
//! submodules.

pub mod algebra;
pub mod drinfeld;
pub mod error;
pub mod funcfield;
pub mod galois;
pub mod kummer;
pub mod ore;
pub mod parse;
pub mod torsion;

pub use error::{Error, Result};
