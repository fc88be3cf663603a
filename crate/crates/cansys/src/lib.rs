//! Numerical toolkit for 2x2 canonical systems `J u' = z H u` on a half line.
//!
//! The building blocks are piecewise-constant positive semi-definite
//! Hamiltonian fields ([`hamiltonian`]), closed-form transfer matrices
//! ([`transfer`]), Weyl functions and limit-point/limit-circle
//! classification ([`weyl`]), self-adjoint boundary value problems with a
//! shooting eigensolver ([`extension`]), Green-kernel resolvents with a
//! Hilbert-Schmidt cross-check ([`resolvent`]), and a finite-dimensional
//! linear-relation lab ([`relations`]).

pub mod defaults;
pub mod error;
pub mod extension;
pub mod hamiltonian;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod relations;
pub mod resolvent;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
