//! Functional determinants of Dirichlet Schrödinger operators `-d²/dt² + V`
//! on `[0, 1]`, and the potentials that maximise them under an `L^q` budget.
//!
//! * [`gy`] evaluates `det = 2 y(1)` from the initial value problem.
//! * [`spectrum`] recomputes it from eigenvalues as an independent check.
//! * [`extremal_l1`], [`extremal_lq`] and [`elliptic`] construct maximisers
//!   for `q = 1`, general `q > 1` and `q = 2` respectively.

pub mod elliptic;
pub mod error;
pub mod extremal_l1;
pub mod extremal_lq;
pub mod gy;
pub mod ode;
pub mod optim;
pub mod potential;
pub mod spectrum;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
pub use extremal_lq::ExtremalSolution;
pub use gy::{propagate, propagate_with, DetMethod, DetResult};
pub use potential::{Interp, PotentialSpec};
pub use spectrum::SpectrumResult;
