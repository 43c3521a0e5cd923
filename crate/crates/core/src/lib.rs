//! Exact arithmetic for Egyptian-fraction decompositions of `4/n`.
//!
//! The crate covers the closed-form Type I / Type II families, the
//! greedy-type decomposition algorithm and its divisibility criterion, the
//! residue-class sieve over the `q`-polynomial, the `q`-conjecture checkers,
//! CRT constructions of long runs, and certificate-producing range
//! verification.

pub mod arith;
pub mod bitmap;
pub mod certify;
pub mod conjectures;
pub mod decimal;
pub mod error;
pub mod greedy;
pub mod identities;
pub mod runs;
pub mod sieve;

pub use arith::{Congruence, WideInt};
pub use error::{Error, Result};
pub use identities::{Decomposition, DecompositionKind, ParamWitness, WitnessFamily};
