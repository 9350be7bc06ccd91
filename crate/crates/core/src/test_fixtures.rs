//! Small hypergraphs shared across unit tests.

use crate::hypergraph::{EdgeSpec, Hypergraph};
use crate::partition::Partition;
use crate::rational::Rat;

pub use crate::rational::{rat, rat_int};

fn one() -> Rat {
    rat_int(1)
}

/// Partition from nontrivial classes of node labels; unlisted labels become
/// singletons.
pub fn part(h: &Hypergraph, classes: &[&[&str]]) -> Partition {
    let mut raw: Vec<usize> = (0..h.node_count()).collect();
    let n = h.node_count();
    for (offset, class) in classes.iter().enumerate() {
        for label in *class {
            let node = h.node_index(label).unwrap_or_else(|| panic!("unknown label {label}"));
            raw[node] = n + offset;
        }
    }
    Partition::from_assignment(&raw)
}

/// One node with a self-loop.
pub fn self_loop() -> Hypergraph {
    Hypergraph::from_numbered(1, vec![EdgeSpec::simple("e", &["1"], &["1"], one())]).unwrap()
}

/// Four nodes; ({1,2},{3,4}), ({1},{4}), ({1},{1}); weight 1.
pub fn four_node() -> Hypergraph {
    Hypergraph::from_numbered(
        4,
        vec![
            EdgeSpec::simple("e1", &["1", "2"], &["3", "4"], one()),
            EdgeSpec::simple("e2", &["1"], &["4"], one()),
            EdgeSpec::simple("e3", &["1"], &["1"], one()),
        ],
    )
    .unwrap()
}

/// Six nodes, five mixed-cardinality edges, weight 1 throughout.
pub fn six_node() -> Hypergraph {
    Hypergraph::from_numbered(
        6,
        vec![
            EdgeSpec::simple("e1", &["2", "5"], &["1"], one()),
            EdgeSpec::simple("e2", &["2"], &["2", "4"], one()),
            EdgeSpec::simple("e3", &["1", "2"], &["6"], one()),
            EdgeSpec::simple("e4", &["4", "6"], &["3", "5"], one()),
            EdgeSpec::simple("e5", &["4"], &["3"], one()),
        ],
    )
    .unwrap()
}

/// Three nodes; the coarse form of the six-node hypergraph under its maximal
/// synchrony pattern: ({1,2},{1,3}), ({2},{2}), ({2},{3}).
pub fn three_node() -> Hypergraph {
    Hypergraph::from_numbered(
        3,
        vec![
            EdgeSpec::simple("e1", &["1", "2"], &["1", "3"], one()),
            EdgeSpec::simple("e2", &["2"], &["2"], one()),
            EdgeSpec::simple("e3", &["2"], &["3"], one()),
        ],
    )
    .unwrap()
}

/// Six nodes with a weight-2 edge; input classes {1,6},{2},{3,4},{5}.
pub fn weighted_six() -> Hypergraph {
    Hypergraph::from_numbered(
        6,
        vec![
            EdgeSpec::simple("e1", &["1", "2"], &["3"], one()),
            EdgeSpec::simple("e2", &["5", "6"], &["2", "3"], one()),
            EdgeSpec::simple("e3", &["1", "2"], &["4"], rat_int(2)),
            EdgeSpec::simple("e4", &["2", "3", "4"], &["5"], one()),
        ],
    )
    .unwrap()
}

/// Three-layer feed-forward hypernetwork with auto-regulation.
pub fn feedforward() -> Hypergraph {
    Hypergraph::from_numbered(
        6,
        vec![
            EdgeSpec::simple("e1", &["1", "2"], &["4"], one()),
            EdgeSpec::simple("e2", &["1", "2", "3"], &["5"], one()),
            EdgeSpec::simple("e3", &["4", "5"], &["6"], one()),
            EdgeSpec::simple("e4", &["1", "2"], &["1"], one()),
            EdgeSpec::simple("e5", &["1", "2", "3"], &["2", "3"], one()),
        ],
    )
    .unwrap()
}

/// Two-node coarse form of [`feedforward`] under {1,4,6},{2,3,5}.
pub fn feedforward_quotient() -> Hypergraph {
    Hypergraph::from_numbered(
        2,
        vec![
            EdgeSpec::simple("q1", &["1", "2"], &["1"], one()),
            EdgeSpec::new("q2", &[("1", 1), ("2", 2)], &["2"], one()),
        ],
    )
    .unwrap()
}

/// Fourteen nodes, all tails of cardinality 3; the three-class relation below
/// is balanced.
pub fn layered14() -> Hypergraph {
    Hypergraph::from_numbered(
        14,
        vec![
            EdgeSpec::simple("e1", &["1", "2", "3"], &["14"], one()),
            EdgeSpec::simple("e2", &["11", "12", "13"], &["14"], one()),
            EdgeSpec::simple("e3", &["5", "6", "7"], &["4"], one()),
            EdgeSpec::simple("e4", &["8", "9", "10"], &["14"], one()),
            EdgeSpec::simple("e5", &["1", "2", "3"], &["4"], rat_int(2)),
        ],
    )
    .unwrap()
}

pub fn layered14_balanced() -> Partition {
    part(
        &layered14(),
        &[
            &["1", "5", "6", "8", "9", "11"],
            &["2", "3", "7", "10", "12", "13"],
            &["4", "14"],
        ],
    )
}

/// Twelve nodes, all tails of cardinality 3; the three-class relation below
/// is *not* balanced.
pub fn layered12() -> Hypergraph {
    Hypergraph::from_numbered(
        12,
        vec![
            EdgeSpec::simple("e1", &["1", "2", "3"], &["12"], one()),
            EdgeSpec::simple("e3", &["5", "6", "7"], &["4"], one()),
            EdgeSpec::simple("e4", &["9", "10", "11"], &["12"], one()),
            EdgeSpec::simple("e5", &["1", "2", "8"], &["4"], one()),
        ],
    )
    .unwrap()
}

pub fn layered12_relation() -> Partition {
    part(
        &layered12(),
        &[
            &["1", "2", "8", "9"],
            &["3", "5", "6", "7", "10", "11"],
            &["4", "12"],
        ],
    )
}

/// Chain with distinct weights; every node sits in its own input class.
pub fn weighted_path() -> Hypergraph {
    Hypergraph::from_numbered(
        3,
        vec![
            EdgeSpec::simple("e1", &["1"], &["2"], one()),
            EdgeSpec::simple("e2", &["2"], &["3"], rat_int(2)),
        ],
    )
    .unwrap()
}
