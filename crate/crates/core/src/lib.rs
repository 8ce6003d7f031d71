//! Discrete moving frames, difference invariants, invariant Euler-Lagrange
//! systems and Noether conservation laws for three group actions on lattice
//! paths: SL(2) acting linearly on the plane, the special affine group SA(2)
//! on the plane, and SL(2) acting by Möbius maps on the line.

pub mod actions;
pub mod conservation;
pub mod error;
pub mod frames;
pub mod numeric;
pub mod operators;
pub mod reconstruction;
pub mod sampling;
pub mod solver;
pub mod suite;
pub mod variational;

pub use actions::{ActionKind, ActionRegistry, GroupAction, GroupElement, Scalar};
pub use error::{Error, Result};
pub use frames::{InvariantSequence, LatticePath};
