//! Coupled cell hypernetworks on directed weighted hypergraphs.
//!
//! A directed hypergraph here has hyperedges with a *multiset* tail and a set
//! head, each carrying an exact rational weight. On top of that structure the
//! crate decides and enumerates robust (cluster) synchronization patterns,
//! builds quotient hypernetworks, relates them to equitable partitions of the
//! bipartite incidence digraph, and evaluates/integrates the admissible
//! coupled cell vector fields, including a replicator-type case study with
//! pairwise and triplet interaction matrices.
//!
//! All combinatorial decisions (input equivalence, balance, quotients,
//! polydiagonal invariance) are made in exact rational arithmetic; floating
//! point only enters for trajectories and eigenvalues.

pub mod dynamics;
pub mod eigen;
pub mod hypergraph;
pub mod partition;
pub mod rational;
pub mod replicator;
pub mod synchrony;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use hypergraph::{EdgeSpec, Hyperedge, Hypergraph, HypergraphError, IncidenceDigraph};
pub use partition::Partition;
pub use rational::{parse_rat, rat, Rat, RatMatrix};
pub use synchrony::{
    balanced_via_incidence, check_cluster_symmetry, coarsest_balanced, enumerate_balanced,
    input_equivalence, is_balanced, lift_partition, matrix_synchrony_check, pattern_of,
    project_partition, quotient, BalanceCheck, BalanceWitness, Pattern, SynchronyError,
};
