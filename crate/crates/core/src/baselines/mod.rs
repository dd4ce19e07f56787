//! Comparison solvers: the exact oracle used throughout testing, the
//! Gens-Levner trimming scheme for nonnegative instances, and classic
//! bitstring metaheuristics.

mod fptas;
mod meta;
mod oracle;

pub use fptas::fptas_gens_levner;
pub use meta::{run_metaheuristic, run_metaheuristic_with_stop, MetaheuristicParams};
pub use oracle::{exact_min_error, OracleResult};
