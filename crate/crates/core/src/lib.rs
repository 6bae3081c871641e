//! Systolic invariants of contact forms on toric domains and disk-map
//! suspensions.
//!
//! The crate computes systolic pairings `ρ = link·vol/(T·T')` of periodic Reeb
//! orbits on boundaries of toric domains in closed form, samples the Reeb flow
//! and its Liouville measure, estimates asymptotic intersection numbers with
//! Seifert surfaces, computes linking numbers of sampled curves in S³, and
//! implements the action / Calabi-invariant dictionary for Hamiltonian disk
//! maps and their suspensions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature tables are quoted at the precision of their published source
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod diskmap;
pub mod error;
pub mod flow;
pub mod numerics;
pub mod systolic;
pub mod topology;
pub mod toric;

pub use error::{Error, Result};
