//! Simulation and numerical verification of empty-ball statistics for
//! critical and subcritical branching random walks started from a Poisson
//! random field.
//!
//! The toolkit has three layers:
//!
//! * exact numerics — survival sequences and their limit constants
//!   ([`gw`]), closed-form limit values and bands ([`limits`]), and an exact
//!   lattice oracle for small instances ([`oracle`]);
//! * simulation — offspring and step laws ([`offspring`], [`steps`]) and a
//!   memory-bounded generation simulator with Poisson initial fields
//!   ([`engine`]);
//! * estimation — certified truncation windows, a direct field estimator
//!   and a factorized (stratified hit-integral) estimator, orchestrated per
//!   experiment config with CSV/JSON reporting ([`pipeline`]).
//!
//! All Monte Carlo loops are data-parallel over independent random streams
//! ([`rng`], [`exec`]); enable the default `parallel` feature for rayon.

pub mod engine;
pub mod error;
pub mod exec;
pub mod gw;
pub mod limits;
pub mod offspring;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod steps;

pub use error::{Error, Result};
pub use exec::Exec;
pub use offspring::{OffspringLaw, Regime};
pub use steps::{StepLaw, TruncationWindow};
