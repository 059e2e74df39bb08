//! Rearrangement kernels on uniform grids and what they buy for
//! mass-constrained variational problems.
//!
//! The library discretizes functions as cell-centered samples and implements
//! the classical rearrangements (decreasing, symmetric, per-line, radial)
//! together with a *coupled* rearrangement of two fields: per line, the
//! symmetric-decreasing profile whose super-level measure at every height is
//! the exact sum of the two inputs' measures. Because the kernels permute
//! value multisets, equimeasurability and p-integral additivity hold to
//! machine precision, while gradient seminorms contract — strictly so for
//! positive unimodal profiles. Gluing two constrained minimizers with the
//! coupled rearrangement therefore exhibits strict subadditivity of the
//! ground-state energy, for the scalar functional and for two-component
//! systems.
//!
//! Modules:
//!
//! * [`grid`] — fields, quadrature, norms, difference seminorms, level-set
//!   measures.
//! * [`rearrange`] — the rearrangement kernels and the level-multiplicity
//!   count.
//! * [`energy`] — scalar and coupled functionals, stationarity residuals,
//!   coercivity constant.
//! * [`minimize`] — normalized gradient flow for constrained ground states,
//!   energy-curve sweeps.
//! * [`verify`] — the seeded inequality harness with machine-readable
//!   reports.
//! * [`io`] — CSV field files, flat configs, atomic writes.
//! * [`cli`] — the `rkit` binary's argument handling and dispatch.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability.

pub mod cli;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod minimize;
pub mod rearrange;
pub mod verify;

pub use error::{Error, Result};
