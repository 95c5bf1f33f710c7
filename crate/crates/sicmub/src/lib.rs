//! Constructions linking symmetric informationally complete POVMs (SICs)
//! and mutually unbiased bases (MUBs).
//!
//! The bridge between the two structures is combinatorial: a SIC in
//! dimension `d` has `d^2` effects; splitting them into `d` bins of `d`
//! elements (a *d-partition*) and summing each bin yields a `d`-outcome
//! marginal POVM. Families of partitions in which any two bins from
//! distinct partitions share exactly one element (the *1-overlap
//! property*) produce marginals that are mutually unbiased, and — when
//! the marginals commute — joint eigenbases that form MUBs. Conversely,
//! `d + 1` MUBs smeared by doubly stochastic matrices can be recombined
//! along a dual path system into a SIC system, which is a SIC exactly
//! when all recombined operators are positive.
//!
//! Modules:
//!
//! - [`field`] — exact arithmetic in GF(p^n) with the field trace.
//! - [`phase`] — the discrete phase space `V = F x F`, its symplectic
//!   form and characters, lines, cosets, and the symplectic Fourier
//!   transform.
//! - [`combin`] — d-partitions, Latin squares, MOLS, the dual
//!   `(d+1) x d` path system, and the orthogonal-mate search.
//! - [`operators`] — dense complex operators, POVM/PVM/SIC verification,
//!   and simultaneous diagonalization of commuting Hermitian families.
//! - [`bridge`] — marginalization of SICs, mutual-unbiasedness checks,
//!   smearing, MUB extraction, SIC-system reconstruction, and the
//!   positive-smearing search.
//! - [`covariant`] — the discrete Weyl-Heisenberg representation,
//!   covariant phase-space observables, their line marginals, and the
//!   four-way SIC characterization.
//! - [`io`] — JSON schemas for every artifact the command-line tool
//!   reads and writes.
//!
//! Every construction returns or can be fed into a
//! [`report::VerificationReport`] that lists, per check, the target
//! value, the worst observed value, and the deviation.
//!
//! See the `examples/` directory for one runnable walkthrough per major
//! capability, starting with `qubit_bridge`.

pub mod bridge;
pub mod combin;
pub mod covariant;
pub mod error;
pub mod field;
pub mod io;
pub mod operators;
pub mod phase;
pub mod report;
pub mod tol;

pub use error::{Error, Result};
pub use report::{Check, VerificationReport};
