//! Simulation and analysis of reflected and repelled Brownian motion in
//! convex polyhedra.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod integrator;
mod linalg;
pub mod models;
pub mod montecarlo;
pub mod potentials;
pub mod rootsys;

pub use error::{Error, Result};
