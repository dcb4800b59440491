//! Numerical laboratory for the anisotropic Ginzburg-Landau energy on 2D
//! domains with S^1 boundary data of negative degree: div/curl split
//! energies, descent solvers with continuation in the core size, vortex
//! detection and classification, Pohozaev residual checks, and three
//! independent estimators of the renormalized-energy slope.

pub mod cdelta;
mod descent;
pub mod energy;
pub mod error;
pub mod fields;
pub mod minimize;
pub mod pohozaev;
pub mod vortices;

pub use descent::StepRule;
pub use energy::{energy_report, el_gradient, EnergyReport, EpsParam};
pub use error::{Error, Result};
pub use fields::{
    boundary_datum, make_grid, winding_number, AnisotropyParams, BoundaryDatum, ComplexField,
    Grid, GridSpec, Winding,
};
pub use minimize::{
    continuation, default_competitor, harmonic_extension, init_competitor, minimize,
    ring_centers, SolveOptions, SolveResult,
};
