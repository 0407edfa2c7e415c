//! Perturbative evaluation of finite-dimensional oscillatory integrals by Feynman graphs,
//! with Faddeev-Popov ghosts, BRST and BV machinery, all in exact arithmetic.

pub mod bv;
pub mod exact;
pub mod gauge;
pub mod gaussian;
pub mod graph;
pub mod lie;
pub mod stationary;
pub mod superalgebra;
pub mod wick;
