//! Multi-ended solutions of the planar Allen–Cahn equation `Δu = W′(u)`,
//! their Jacobi-operator Morse index, and the nodal graphs of directional
//! derivatives.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live
//! in the companion `acmorse-lab` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ansatz;
pub mod coloring;
pub mod eigen;
pub mod field;
pub mod geometry;
pub mod math;
pub mod nodal;
pub mod operator;
pub mod potential;
pub mod quadrature;
pub mod solver;
pub mod spectrum;
pub mod sparse;
