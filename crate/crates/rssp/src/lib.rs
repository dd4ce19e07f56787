//! Experiment harness, file formats, and CLI for the subset sum
//! approximation toolkit. The algorithms live in `rssp-core`; this crate
//! adds everything that needs the standard library: timing, worker
//! threads, CSV/JSONL emission, and the `rssp` binary.

pub mod cli;
pub mod experiments;
pub mod fit;
pub mod io;
