//! Variants of the meet-in-the-middle beam: bounded cardinality and
//! d-dimensional vector subset sum.

mod bounded;
mod vector;

pub use bounded::{bounded_mitm_solve, BoundedCandidate, BoundedMitmResult};
pub use vector::{
    vector_mitm_solve, vector_mitm_solve_with_index, NearestIndexKind, VectorInstance,
    VectorMitmResult,
};
