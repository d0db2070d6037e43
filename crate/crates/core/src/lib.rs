//! Streaming toolkit for Freebase-style N-Triples dumps.
//!
//! The stages mirror a dump-processing pipeline: [`ntparse`] normalizes lines,
//! [`slicer`] partitions triples by predicate, [`profiler`] and [`schemarec`]
//! analyse the slices and [`dedup`] measures redundancy. [`synthgen`] writes
//! synthetic dumps with exact ground truth, and [`pipeline`] wires the stages
//! together around on-disk manifests.

pub mod dedup;
pub mod extsort;
pub mod ntparse;
pub mod pipeline;
pub mod profiler;
pub mod progress;
pub mod schema;
pub mod schemarec;
pub mod slicer;
pub mod synthgen;

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
