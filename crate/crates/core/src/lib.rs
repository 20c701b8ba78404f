//! Multilevel KLFM bipartitioning of hypergraphs whose nodes have several
//! alternative implementations ("personalities"), each with its own
//! resource-weight vector.
//!
//! The pipeline: [`coarsen`] builds a hierarchy with per-supernode
//! personality bases, [`refine`] runs gain-bucket passes from the coarsest
//! level down, and [`remap`] re-selects personalities with sides fixed.
//! [`strategy`] wires these into the six named strategies.

pub mod buckets;
pub mod coarsen;
pub mod constraints;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod objective;
pub mod refine;
pub mod remap;
pub mod state;
pub mod strategy;

pub use constraints::{ConstraintSet, RelaxationSchedule, RelaxationShape};
pub use error::{Error, Result};
pub use graph::{Hyperedge, Hypergraph, Node, ResourceVector, MAX_RESOURCES};
pub use objective::Policy;
pub use state::PartitionState;
pub use strategy::{run_strategy, ResultReport, StrategyConfig, StrategyKind};

#[cfg(test)]
mod test_util {
    pub use crate::harness::generate::random_small_graph as random_graph;
}
