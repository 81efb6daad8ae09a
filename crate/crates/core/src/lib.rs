//! Numerical kernels for mapping target Hamiltonians onto noisy simulators.
//!
//! The crate is organised by mapping: [`product_formula`] for Trotter-Suzuki
//! circuits, [`floquet`] for Floquet-Magnus drives and [`sw`] for the
//! perturbative (Schrieffer-Wolff-type) expansion. Free-fermion dynamics run on
//! Majorana second-moment matrices in [`gaussian`], and [`dense`] holds the
//! exact density-matrix reference used to validate everything at small sizes.
//!
//! Majorana convention used throughout: mode `i` (0-based) owns Majoranas
//! `2i = a + a†` and `2i+1 = -i(a - a†)`, and site 0 is the leftmost tensor
//! factor with Jordan-Wigner strings running over lower indices.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dense;
pub mod error;
pub mod floquet;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod ode;
pub mod product_formula;
pub mod quadrature;
pub mod sw;

pub use error::{Error, Result};
