//! Geometry of numbers on spaces of unimodular lattices.
//!
//! The crate covers primitive Siegel transforms on `SL_n(R)/SL_n(Z)`, rational
//! points of bounded height on projective spaces and on `Gr(2,4)`, the
//! counting of rational approximations at the critical exponent
//! `n / (l (n - l))`, and the Dynkin/Weyl combinatorics that decide when a
//! Siegel transform lands in `L^1`, `L^2` or `L^inf`.
//!
//! Module map:
//!
//! * [`rootsys`]: root systems, Weyl groups and the integrability tests.
//! * [`lattice`]: unimodular lattices, reduction, enumeration, Haar sampling on `SL_2`.
//! * [`flag`]: Plücker coordinates, heights, distances, the diagonal flow and regions.
//! * [`siegel`]: evaluation and Monte Carlo averaging of Siegel transforms.
//! * [`count`]: counting rational approximations and fitting the `ln T` growth.
//! * [`equidist`]: translated `SO(2)`-orbit averages on the modular surface.
//! * [`acceptance`]: the end-to-end checks shared by the test suite and the CLI.

pub mod acceptance;
pub mod count;
pub mod equidist;
pub mod flag;
pub mod intmat;
pub mod lattice;
pub mod numeric;
pub mod rng;
pub mod rootsys;
pub mod siegel;

mod error;

pub use error::{Error, Result};

/// Version string embedded in experiment records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
