//! Forward and inverse solvers for general-type discrete Dirac systems.
//!
//! The system is the recursion y_{k+1}(z) = (I + i z j C_k) y_k(z) driven by
//! a finite sequence of Hermitian positive j-unitary matrices C_k, with
//! j = diag(I_{m1}, -I_{m2}). The crate covers:
//!
//! - the j-metric matrix algebra behind the class (fractional powers, Halmos
//!   extensions, beta/gamma row factorizations) in [`jalgebra`];
//! - the bijection between potentials and strictly contractive Schur
//!   coefficient sequences, with the solution transform between the Szego
//!   and Dirac recursions, in [`potential`];
//! - fundamental solutions and Weyl functions on an interval in [`direct`];
//! - the symmetric S-node realization (A, S, Pi) and its transfer matrix
//!   function in [`snode`];
//! - Taylor coefficients of the disk-variable Weyl function, by an algebraic
//!   and a sampling route, in [`taylor`];
//! - recovery of the potential from those coefficients, the displacement
//!   structure of S, Borg-Marchenko comparison and one-step continuations in
//!   [`inverse`];
//! - a JSON document layer and the `dirac-lab` command driver in [`doc`] and
//!   [`cli`].

pub mod cli;
pub mod direct;
pub mod doc;
pub mod error;
pub mod inverse;
pub mod jalgebra;
pub mod mat;
pub mod potential;
pub mod snode;
pub mod taylor;

pub use error::{Error, Result};
pub use jalgebra::{JUnitaryPositive, Signature};
pub use mat::CMat;
pub use potential::{DiracPotential, SchurSequence, UChain};
pub use taylor::TaylorData;
