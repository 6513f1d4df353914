//! Distance functionals between prescribed finite-dimensional trajectories
//! and exact quantum evolution.
//!
//! Two functionals are provided: the density-matrix distance
//! D = ∫‖iρ̇(t) − [H, ρ(t)]‖dt, defined for pure and impure states, and the
//! gauge-minimized pure-state distance 𝒟 = min_α ∫‖iψ̇(t) − (α̇ + H)ψ(t)‖dt.
//! Trajectories are declarative specs whose entries are parsed expressions in
//! `t`, differentiated exactly with dual numbers; the outer integral is
//! adaptive Simpson. A built-in catalog of two-level families and a CLI for
//! computing distances, emitting integrand curves as CSV, comparing the two
//! functionals, and sweeping parameters sit on top.
//!
//! Grid evaluations (curves, comparisons, sweeps) run in parallel with the
//! default `parallel` feature and fall back to sequential iteration without
//! it; both paths produce bit-identical results.

pub mod cli;
pub mod cmatrix;
pub mod distance;
pub mod error;
pub mod expr;
mod par;
pub mod trajectory;

pub use cmatrix::{ComplexMatrix, ComplexVector, C64};
pub use distance::{
    compare, distance_density, distance_pure, integrate, Comparison, DistanceReport, GaugeChoice,
    QuadratureConfig,
};
pub use error::{Error, Result};
pub use trajectory::{
    catalog, catalog_entry, CatalogEntry, HamiltonianSpec, SampledPoint, TrajectorySpec, Validation,
};
