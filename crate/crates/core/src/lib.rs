//! Computational engine for the Frobenius structure on spaces of Laurent
//! polynomials, the small quantum cohomology of two-pointed P^1 orbifolds,
//! and residue-based verification of Hirota-type bilinear identities.
//!
//! The crate is organized bottom-up:
//!
//! - [`scalar`], [`laurent`], [`puiseux`], [`mpoly`], [`mat`]: arithmetic
//!   substrate (exact rationals / complex floats, Laurent polynomials,
//!   log-Puiseux series, sparse multivariate polynomials, dense matrices).
//! - [`frobenius`], [`symfrob`]: the family of superpotentials
//!   f = x^k + t_1 x^(k-1) + ... + (Q e^(t_N)/x)^m, its Jacobian-ring
//!   multiplication, residue metric, flat coordinates, Euler field and
//!   grading, pointwise over a field and symbolically over a polynomial ring.
//! - [`semisimple`], [`calibration`]: canonical coordinates at a point with
//!   distinct critical values, and the two gauge series (lower-triangular in
//!   1/z, upper-triangular in z) with their quadratic forms.
//! - [`periods`], [`phase`]: period vectors over one-point cycles and
//!   thimbles, their closed forms at infinity and local expansions at
//!   critical values, analytic continuation, and the phase-factor integrals.
//! - [`orbifold`], [`recon`]: the orbifold cup/quantum rings of C_{k,m} and
//!   the degree-by-degree reconstruction of the Frobenius structure from its
//!   tangent algebra at the origin, checked against the Laurent side.
//! - [`hqe`]: Fock-space truncations, the Witten-Kontsevich tau function,
//!   vertex-operator arithmetic, and the KdV / local ancestor residue checks.

pub mod error;
pub mod scalar;

pub mod laurent;
pub mod mat;
pub mod mpoly;
pub mod puiseux;

pub mod frobenius;
pub mod symfrob;

pub mod roots;
pub mod semisimple;

mod cseries;
pub mod calibration;

pub mod periods;

pub mod phase;
pub mod quad;

pub mod orbifold;

pub mod numfield;
pub mod recon;

pub mod hqe;

pub mod report;

pub use error::{Error, Result};
pub use scalar::{Field, Rat, Tol, C64};
