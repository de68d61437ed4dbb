//! Compressible Euler finite-volume solver with measure-valued solution
//! diagnostics: empirical Young measures built from multi-resolution
//! ensembles, dissipation and concentration defects, and relative-energy
//! distances to smooth classical solutions.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod defects;
pub mod io;
pub mod numerics;
pub mod solver;
pub mod thermo;
pub mod weak_strong;
pub mod young;
