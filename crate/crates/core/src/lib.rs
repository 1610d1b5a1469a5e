//! Exact-geometry toolkit for two-dimensional bootstrap percolation and
//! kinetically constrained models.
//!
//! Everything that decides a geometric predicate (half-plane membership,
//! circular order, droplet intersection) runs in exact rational arithmetic.
//! Floating point only appears in Monte Carlo estimators, spectral solves
//! and report output.

pub mod rational;
pub mod geom;
pub mod family;
pub mod bootstrap;
pub mod droplets;
pub mod east;
pub mod kcm;
pub mod renorm;
pub mod seeds;
pub mod scenario;

pub use rational::Q;
