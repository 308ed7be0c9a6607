//! Classical trajectories whose time-occupation density reproduces a quantum
//! position density.
//!
//! A trajectory `x(t)` sampled uniformly in time over one pass of period `T`
//! has position density `p(x)` exactly when `|dx/dt| = 1 / (T p(x))`.
//! Integrating gives `u(x) = (t - t0) / T` with `u` the cumulative
//! distribution of `p`, so the trajectory is `x(t) = u^{-1}((t - t0) / T)`,
//! unique up to the offset `t0`.
//!
//! The crate is organised around that construction:
//!
//! - [`wavefunctions`]: box eigenstates, plane waves, tabulated states and
//!   eigenstate superpositions.
//! - [`trajectory`]: the cumulative map, its inversion, sampled trajectories
//!   and ensembles, and the speed-cap diagnostics.
//! - [`nonstationary`]: time-marginal densities of time-dependent states.
//! - [`observables`]: momentum amplitude, uncertainty product, the velocity
//!   density pathology, and the effective potential.
//! - [`bohm`]: probability current and Bohmian trajectories for comparison.
//! - [`verify`]: histograms and goodness-of-fit.
//! - [`export`]: CSV writers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohm;
pub mod error;
pub mod export;
pub mod grid;
pub mod interp;
pub mod nonstationary;
pub mod observables;
pub mod params;
pub mod trajectory;
pub mod verify;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use grid::GridDomain;
pub use params::PhysicalParams;
pub use trajectory::{
    CumulativeMap, Direction, Mode, SampleOptions, Sampling, Trajectory, TrajectoryEngine,
};
pub use wavefunctions::{BoxConvention, DensityProfile, TimeDependentWaveFunction, WaveFunction};

pub use num_complex::Complex64;
