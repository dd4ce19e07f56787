//! Core algorithms for approximating the random subset sum problem.
//!
//! Given a multiset of integers and a target `T`, the goal is to find a
//! subset whose sum is as close to `T` as possible. This crate provides:
//!
//! - [`instance`]: instance generators over several i.i.d. weight
//!   distributions, target rules, and the sign-flip symmetrization
//!   transform that recenters any input family around zero.
//! - [`beam`]: width-bounded beam search primitives, including the
//!   closest-subset-sum specialization.
//! - [`reconstruct`]: checkpointed forward search plus backward subset
//!   reconstruction in `O(w * sqrt(n))` memory.
//! - [`mitm`]: the meet-in-the-middle beam — a bucketed anchor mesh built
//!   from a short prefix of the items, then a residual-guided beam over
//!   the remainder.
//! - [`variants`]: bounded-cardinality and d-dimensional vector versions
//!   of the meet-in-the-middle beam.
//! - [`baselines`]: exact oracles (half-enumeration and offset dynamic
//!   programming), the Gens-Levner trimming scheme, and classic bitstring
//!   metaheuristics (SA, GA, PSO, Tabu, AOA).
//! - [`coverage`]: Monte Carlo experiments for the anchor-mesh bucket
//!   filling dynamics.
//!
//! The crate is `no_std` (with `alloc`). Everything is deterministic given
//! explicit 64-bit seeds; there is no global state.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod beam;
pub mod coverage;
pub mod error;
pub mod instance;
pub mod mitm;
pub mod reconstruct;
pub mod rng;
pub mod variants;

pub use error::{Error, Result};
pub use instance::{
    desymmetrize_subset, make_target, sample_items, symmetrize, DistributionSpec, Family,
    Instance, Support, SymmetrizationRecord, TargetRule,
};
pub use rng::{mix64, mix64_3, SplitMix64};
