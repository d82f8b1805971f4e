//! Constructive results: greedy translate sets, the packing bound,
//! fattening, partitions into packing classes, subadditivity and the
//! pipeline producing a compact translate set for `S - S`.

pub mod greedy;
pub mod packing;
pub mod partition;
pub mod pipeline;

pub use greedy::{greedy_translates, Blocked, CoverResult, Maximality};
pub use packing::{fatten, packing_bound_check, packing_violation, FattenResult, HSet, PackingVerdict};
pub use partition::{auto_h, partition_by_coloring, AutoH, PartitionResult};
pub use pipeline::{subadditivity_check, syndetic_pipeline, PipelineResult, SubadditivityVerdict};
