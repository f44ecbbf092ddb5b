//! Simulation and verification toolkit for the reversible reaction
//! `A + B <-> C` with Neumann diffusion, one of whose diffusivities may
//! vanish.
//!
//! The [`solver`] advances cell averages on a box grid by Strang splitting,
//! [`functionals`] evaluates entropy, dissipation and the inequalities that
//! relate them, and [`analysis`] fits decay envelopes and growth rates to a
//! recorded run.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Grid, SpeciesFields};
pub use model::{equilibrium_state, DomainSpec, EquilibriumState, ModelParams, Mode};
