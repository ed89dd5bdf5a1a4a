//! Calculus on matrix upper half-planes: complex-Hermitian primitives, block
//! difference-differential operators for level-graded matrix functions,
//! Schwarz-Pick contraction margins, hyperbolic-ball geometry and numerical
//! boundary (Julia-Wolff-Caratheodory) analysis.
//!
//! Everything runs at desk scale (matrix levels up to about eight) with
//! seeded, reproducible sampling so the verification suites are replayable
//! bit for bit.

pub mod boundary;
pub mod error;
pub mod hermitian;
pub mod hyperbolic;
pub mod ncfunc;
pub mod report;
pub mod sampling;
pub mod schwarz_pick;
pub mod verify;

pub use error::{Error, Result};
