//! Reinforcing communication networks against random node faults by node
//! replication.
//!
//! A network `G = (V, E)` is replaced by copies `V x [l]`. Inside a region of
//! a partition copies are wired index to index; arcs crossing regions are
//! wired all to all. With `l = f + 1` copies the construction tolerates
//! omission faults, with `l = 2f + 1` Byzantine faults. The singleton
//! partition gives the strong construction.
//!
//! Modules, bottom up:
//!
//! * [`graph`], [`graphml`]: networks, generators and GraphML ingestion.
//! * [`partition`]: hypercube, spectral and exhaustive region partitions.
//! * [`reinforce`]: the replicated network and its overheads.
//! * [`reliability`]: exact failure probabilities and tolerable fault rates.
//! * [`sweep`]: overhead versus fault-rate design sweeps.
//! * [`program`], [`simulate`]: executing routing programs on reinforced
//!   networks under injected faults.

pub mod error;
pub mod graph;
pub mod graphml;
pub mod partition;
pub mod program;
pub mod reinforce;
pub mod reliability;
pub mod rng;
pub mod simulate;
pub mod sweep;

pub use error::{Error, Result};
pub use graph::{build_hypercube, build_path, Network, NodeId};
pub use graphml::parse_graphml;
pub use partition::{
    cut_stats, partition_brute_force, partition_hypercube, partition_spectral,
    singleton_partition, CutStats, Partition,
};
pub use program::{Flood, Message, NodeContext, PathForwarding, RoutingProgram};
pub use reinforce::{
    reinforce_partitioned, reinforce_strong, CopyId, FaultKind, FaultModel, Overheads,
    ReinforcedNetwork,
};
pub use reliability::{failure_byz, failure_om, max_tolerable_p, naive_replication_p};
pub use simulate::{
    check_lemma_condition, exhaustive_success, monte_carlo, run_byz, run_om, run_reference,
    sample_faults, Adversary, Estimate, FaultScenario, SimOptions, SimOutcome, Simulator,
};
pub use sweep::{pareto_sweep, Partitioner, SweepConfig, SweepRow};
