//! Default numerical tolerances.
//!
//! Every construction in this crate is exact up to floating-point
//! rounding at the dimensions in scope (d <= 9), so the defaults are
//! tight. Functions that take an explicit `tol` argument use it for
//! trace-identity style checks; the remaining constants bound effects
//! that accumulate differently.

/// Trace identities, overlaps, and other quantities that are exact up
/// to a short chain of floating-point sums.
pub const DEFAULT: f64 = 1e-9;

/// Slack allowed below zero for eigenvalues of operators that are
/// positive semidefinite in exact arithmetic.
pub const POSITIVITY: f64 = 1e-10;

/// Hermiticity defect `max |A - A^dag|` accepted at construction.
pub const HERMITICITY: f64 = 1e-12;

/// Unitarity defect `max |U U^dag - I|` for Weyl operators.
pub const UNITARITY: f64 = 1e-12;

/// Identities that hold entrywise after a single pass of arithmetic,
/// e.g. Fourier round trips and character sums.
pub const EXACT: f64 = 1e-12;

/// Row/column sums of stochastic matrices built from closed-form rows.
pub const STOCHASTIC: f64 = 1e-10;
