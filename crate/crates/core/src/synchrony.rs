//! Robust synchrony: input equivalence, balanced relations, quotients, and
//! the incidence-digraph correspondence.
//!
//! A partition of the cells is *balanced* when any two cells in the same class
//! receive, per tail cardinality and per tail pattern, the same total edge
//! weight. Balanced partitions are exactly the partitions whose polydiagonal
//! is flow-invariant for every admissible vector field, and they correspond to
//! equitable partitions of the bipartite incidence digraph that keep cell and
//! edge nodes apart.
//!
//! Weights may be negative, so all comparisons here are weight-sum based: a
//! pattern whose weights cancel to zero counts the same as an absent pattern.
//! (A zero total contributes nothing to any admissible field.)

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use thiserror::Error;

use crate::hypergraph::{EdgeSpec, Hyperedge, Hypergraph, HypergraphError};
use crate::partition::{all_partitions, Partition};
use crate::rational::{format_rat, Rat, RatMatrix};

/// Class-multiplicity vector of an edge tail under a partition; entry `i`
/// counts tail nodes (with multiplicity) in class `i`. Entries sum to `k(e)`.
pub type Pattern = Vec<u32>;

/// Per-node map `(tail cardinality, pattern) → summed weight`.
pub type PatternWeights = BTreeMap<(usize, Pattern), Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynchronyError {
    #[error("ground set of {size} elements exceeds enumeration cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("partition is not balanced: {0}")]
    NotBalanced(BalanceWitness),
    #[error("matrix is {rows}x{cols} but the partition has {expected} elements")]
    DimensionMismatch { rows: usize, cols: usize, expected: usize },
}

/// Cells in one class whose pattern weights differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceWitness {
    pub cell_a: usize,
    pub cell_b: usize,
    pub tail_cardinality: usize,
    pub pattern: Pattern,
    pub weight_a: Rat,
    pub weight_b: Rat,
}

impl std::fmt::Display for BalanceWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "cells {} and {} carry weights {} and {} on pattern {:?} (tail cardinality {})",
            self.cell_a,
            self.cell_b,
            format_rat(&self.weight_a),
            format_rat(&self.weight_b),
            self.pattern,
            self.tail_cardinality,
        )
    }
}

/// Outcome of a balance decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceCheck {
    pub balanced: bool,
    pub witness: Option<BalanceWitness>,
}

/// Pattern of `edge` under `part`.
pub fn edge_pattern(part: &Partition, edge: &Hyperedge) -> Pattern {
    let mut pattern = vec![0u32; part.num_classes()];
    for &(node, mult) in edge.tail() {
        pattern[part.class_of(node)] += mult;
    }
    pattern
}

/// Pattern of the edge with the given id; `UnknownEdge` if absent.
pub fn pattern_of(
    h: &Hypergraph,
    part: &Partition,
    edge_id: &str,
) -> Result<Pattern, HypergraphError> {
    let edge = h.edge_by_id(edge_id).ok_or_else(|| HypergraphError::UnknownEdge(edge_id.to_string()))?;
    Ok(edge_pattern(part, edge))
}

/// Per-node pattern weight tables under `part`. Entries whose weights sum to
/// zero are retained; use [`normalized_weights`] for comparisons.
pub fn pattern_weight_tables(h: &Hypergraph, part: &Partition) -> Vec<PatternWeights> {
    assert_eq!(part.size(), h.node_count(), "partition size must match node count");
    let mut tables = vec![PatternWeights::new(); h.node_count()];
    for edge in h.edges() {
        let pattern = edge_pattern(part, edge);
        let k = edge.tail_cardinality();
        for &node in edge.head() {
            let entry = tables[node].entry((k, pattern.clone())).or_insert_with(Rat::zero);
            *entry += edge.weight();
        }
    }
    tables
}

/// Drops zero-sum entries; the comparison form of a pattern weight table.
pub fn normalized_weights(table: &PatternWeights) -> PatternWeights {
    table.iter().filter(|(_, w)| !w.is_zero()).map(|(k, w)| (k.clone(), w.clone())).collect()
}

fn node_weight_key(h: &Hypergraph, node: usize) -> Vec<(usize, Rat)> {
    let mut sums: BTreeMap<usize, Rat> = BTreeMap::new();
    for edge in h.backward_star(node, None).expect("node in range") {
        *sums.entry(edge.tail_cardinality()).or_insert_with(Rat::zero) += edge.weight();
    }
    sums.into_iter().filter(|(_, w)| !w.is_zero()).collect()
}

/// Input equivalence: cells are equivalent when they receive the same total
/// weight for every tail cardinality. Cells with empty backward stars share a
/// class. Every balanced partition refines this one.
pub fn input_equivalence(h: &Hypergraph) -> Partition {
    let mut seen: HashMap<Vec<(usize, Rat)>, usize> = HashMap::new();
    let mut raw = Vec::with_capacity(h.node_count());
    for node in 0..h.node_count() {
        let key = node_weight_key(h, node);
        let next = seen.len();
        raw.push(*seen.entry(key).or_insert(next));
    }
    Partition::from_assignment(&raw)
}

fn compare_tables(
    cell_a: usize,
    cell_b: usize,
    a: &PatternWeights,
    b: &PatternWeights,
) -> Option<BalanceWitness> {
    let mut keys: Vec<&(usize, Pattern)> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let wa = a.get(key).cloned().unwrap_or_else(Rat::zero);
        let wb = b.get(key).cloned().unwrap_or_else(Rat::zero);
        if wa != wb {
            return Some(BalanceWitness {
                cell_a,
                cell_b,
                tail_cardinality: key.0,
                pattern: key.1.clone(),
                weight_a: wa,
                weight_b: wb,
            });
        }
    }
    None
}

/// Decides balance of an arbitrary partition; on failure the witness names a
/// cell pair and a pattern with differing weights.
pub fn is_balanced(h: &Hypergraph, part: &Partition) -> BalanceCheck {
    let tables: Vec<PatternWeights> =
        pattern_weight_tables(h, part).iter().map(normalized_weights).collect();
    for class in part.classes() {
        let rep = class[0];
        for &cell in &class[1..] {
            if let Some(witness) = compare_tables(rep, cell, &tables[rep], &tables[cell]) {
                return BalanceCheck { balanced: false, witness: Some(witness) };
            }
        }
    }
    BalanceCheck { balanced: true, witness: None }
}

/// Coarsest balanced partition: the fixed point of signature refinement
/// seeded with input equivalence. Each round splits classes by the map
/// `(tail cardinality, pattern) → total weight` taken over the current
/// classes; every balanced partition refines the result.
pub fn coarsest_balanced(h: &Hypergraph) -> Partition {
    let mut part = input_equivalence(h);
    loop {
        let tables = pattern_weight_tables(h, &part);
        let mut seen: HashMap<(usize, Vec<((usize, Pattern), Rat)>), usize> = HashMap::new();
        let mut raw = Vec::with_capacity(part.size());
        for node in 0..part.size() {
            let signature: Vec<((usize, Pattern), Rat)> =
                normalized_weights(&tables[node]).into_iter().collect();
            let key = (part.class_of(node), signature);
            let next = seen.len();
            raw.push(*seen.entry(key).or_insert(next));
        }
        let refined = Partition::from_assignment(&raw);
        if refined == part {
            break;
        }
        part = refined;
    }
    debug_assert!(is_balanced(h, &part).balanced, "refinement fixed point must be balanced");
    part
}

/// Enumerates every balanced partition (canonical forms, sorted).
///
/// Searches restricted-growth assignments limited to refinements of input
/// equivalence; a branch is cut as soon as two same-class cells whose tails
/// are fully assigned disagree on pattern weights.
pub fn enumerate_balanced(h: &Hypergraph, cap: usize) -> Result<Vec<Partition>, SynchronyError> {
    let n = h.node_count();
    if n > cap {
        return Err(SynchronyError::TooLarge { size: n, cap });
    }
    if n == 0 {
        return Ok(vec![Partition::singletons(0)]);
    }
    let input_eq = input_equivalence(h);

    // Step at which a cell's pattern weights are determined: all tail nodes of
    // its backward star assigned, and the cell itself assigned.
    let ready_step: Vec<usize> = (0..n)
        .map(|c| {
            h.backward_star(c, None)
                .expect("node in range")
                .iter()
                .flat_map(|e| e.tail_support())
                .max()
                .map_or(c, |last| last.max(c))
        })
        .collect();
    let mut ready_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, &step) in ready_step.iter().enumerate() {
        ready_at[step].push(c);
    }

    struct Search<'a> {
        h: &'a Hypergraph,
        input_eq: &'a Partition,
        ready_step: &'a [usize],
        ready_at: &'a [Vec<usize>],
        assignment: Vec<usize>,
        class_firsts: Vec<usize>,
        out: Vec<Partition>,
    }

    impl Search<'_> {
        fn partial_table(&self, cell: usize, num_classes: usize) -> PatternWeights {
            let mut table = PatternWeights::new();
            for edge in self.h.backward_star(cell, None).expect("node in range") {
                let mut pattern = vec![0u32; num_classes];
                for &(node, mult) in edge.tail() {
                    pattern[self.assignment[node]] += mult;
                }
                let entry = table
                    .entry((edge.tail_cardinality(), pattern))
                    .or_insert_with(Rat::zero);
                *entry += edge.weight();
            }
            normalized_weights(&table)
        }

        fn prefix_consistent(&self, step: usize, num_classes: usize) -> bool {
            for &cell in &self.ready_at[step] {
                let class = self.assignment[cell];
                let comparator = (0..=step).find(|&c| {
                    c != cell && self.assignment[c] == class && self.ready_step[c] <= step
                });
                if let Some(other) = comparator {
                    let a = self.partial_table(other, num_classes);
                    let b = self.partial_table(cell, num_classes);
                    if a != b {
                        return false;
                    }
                }
            }
            true
        }

        fn recurse(&mut self, i: usize, num_classes: usize) {
            let n = self.assignment.len();
            if i == n {
                let part = Partition::from_assignment(&self.assignment);
                if is_balanced(self.h, &part).balanced {
                    self.out.push(part);
                }
                return;
            }
            for class in 0..=num_classes {
                let new_class = class == num_classes;
                if !new_class
                    && self.input_eq.class_of(self.class_firsts[class])
                        != self.input_eq.class_of(i)
                {
                    continue;
                }
                self.assignment[i] = class;
                if new_class {
                    self.class_firsts.push(i);
                }
                let classes_now = num_classes + usize::from(new_class);
                if self.prefix_consistent(i, classes_now) {
                    self.recurse(i + 1, classes_now);
                }
                if new_class {
                    self.class_firsts.pop();
                }
            }
        }
    }

    let mut search = Search {
        h,
        input_eq: &input_eq,
        ready_step: &ready_step,
        ready_at: &ready_at,
        assignment: vec![0; n],
        class_firsts: vec![0],
        out: Vec::new(),
    };
    search.recurse(1, 1);
    let mut out = search.out;
    out.sort();
    Ok(out)
}

/// Quotient hypernetwork of `h` by a balanced partition.
///
/// Nodes are the classes (labeled by their first member); for each class and
/// each distinct `(tail cardinality, pattern)` with nonzero total weight on a
/// representative there is one singleton-head edge whose tail is the pattern
/// read as a multiset of classes.
pub fn quotient(h: &Hypergraph, part: &Partition) -> Result<Hypergraph, SynchronyError> {
    let check = is_balanced(h, part);
    if !check.balanced {
        return Err(SynchronyError::NotBalanced(check.witness.expect("witness on failure")));
    }
    let classes = part.classes();
    let labels: Vec<String> = classes.iter().map(|c| h.label_of(c[0]).to_string()).collect();
    let tables = pattern_weight_tables(h, part);
    let mut edges = Vec::new();
    let mut next_id = 1usize;
    for (class_idx, class) in classes.iter().enumerate() {
        let rep = class[0];
        for ((_, pattern), weight) in normalized_weights(&tables[rep]) {
            let tail: Vec<(String, u32)> = pattern
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0)
                .map(|(c, &m)| (labels[c].clone(), m))
                .collect();
            edges.push(EdgeSpec {
                id: format!("q{next_id}"),
                tail,
                head: vec![labels[class_idx].clone()],
                weight,
            });
            next_id += 1;
        }
    }
    Ok(Hypergraph::new(labels, edges).expect("quotient construction is internally consistent"))
}

/// Lifts a cell partition to the incidence digraph: cells keep their classes
/// and hyperedges are grouped by equal patterns. Ground set is nodes followed
/// by edges in input order.
pub fn lift_partition(h: &Hypergraph, part: &Partition) -> Partition {
    assert_eq!(part.size(), h.node_count(), "partition size must match node count");
    let p = part.num_classes();
    let mut groups: HashMap<Pattern, usize> = HashMap::new();
    let mut raw: Vec<usize> = part.assignment().to_vec();
    for edge in h.edges() {
        let pattern = edge_pattern(part, edge);
        let next = p + groups.len();
        raw.push(*groups.entry(pattern).or_insert(next));
    }
    Partition::from_assignment(&raw)
}

/// Restriction of an incidence-digraph partition to the cells.
pub fn project_partition(h: &Hypergraph, dpart: &Partition) -> Partition {
    assert_eq!(
        dpart.size(),
        h.node_count() + h.edge_count(),
        "partition must cover nodes and edges of the incidence digraph"
    );
    dpart.restrict(h.node_count())
}

/// True when the polydiagonal of `part` is invariant under `m`: for every two
/// rows in one class, the entry sums over each class agree (equitable
/// condition), checked exactly.
pub fn matrix_synchrony_check(m: &RatMatrix, part: &Partition) -> Result<bool, SynchronyError> {
    let n = part.size();
    if !m.is_square() || m.nrows() != n {
        return Err(SynchronyError::DimensionMismatch {
            rows: m.nrows(),
            cols: m.ncols(),
            expected: n,
        });
    }
    let p = part.num_classes();
    let class_sums = |row: usize| -> Vec<Rat> {
        let mut sums = vec![Rat::zero(); p];
        for (col, value) in m.row(row).iter().enumerate() {
            sums[part.class_of(col)] += value;
        }
        sums
    };
    for class in part.classes() {
        let rep_sums = class_sums(class[0]);
        for &row in &class[1..] {
            if class_sums(row) != rep_sums {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Balanced partitions of the cells obtained through the incidence digraph:
/// enumerate node partitions, attach the coarsest admissible edge grouping
/// (equal tail-matrix class sums), and keep those whose polydiagonal is
/// invariant under the block adjacency matrix. Agrees with
/// [`enumerate_balanced`] as a set.
pub fn balanced_via_incidence(h: &Hypergraph, cap: usize) -> Result<Vec<Partition>, SynchronyError> {
    let (n, m) = (h.node_count(), h.edge_count());
    if n + m > cap {
        return Err(SynchronyError::TooLarge { size: n + m, cap });
    }
    let incidence = h.incidence_digraph();
    let adjacency = incidence.adjacency();
    let mut out = Vec::new();
    for part in all_partitions(n) {
        let p = part.num_classes();
        let mut groups: HashMap<Vec<Rat>, usize> = HashMap::new();
        let mut raw: Vec<usize> = part.assignment().to_vec();
        for j in 0..m {
            let mut sums = vec![Rat::zero(); p];
            for (col, value) in incidence.tail_matrix.row(j).iter().enumerate() {
                sums[part.class_of(col)] += value;
            }
            let next = p + groups.len();
            raw.push(*groups.entry(sums).or_insert(next));
        }
        let lifted = Partition::from_assignment(&raw);
        if matrix_synchrony_check(&adjacency, &lifted)? {
            out.push(part);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// True when permuting the given cells is a symmetry of every admissible
/// system: each edge head meeting the set contains it, and each tail support
/// meeting the set contains it with one common multiplicity.
pub fn check_cluster_symmetry(h: &Hypergraph, cells: &[usize]) -> Result<bool, HypergraphError> {
    for &c in cells {
        if c >= h.node_count() {
            return Err(HypergraphError::UnknownNode(c.to_string()));
        }
    }
    let in_set = |v: usize| cells.contains(&v);
    for edge in h.edges() {
        if edge.head().iter().any(|&v| in_set(v)) && !cells.iter().all(|&v| edge.head().binary_search(&v).is_ok()) {
            return Ok(false);
        }
        if edge.tail_support().any(in_set) {
            let mults: Vec<Option<u32>> = cells
                .iter()
                .map(|&v| edge.tail().iter().find(|&&(t, _)| t == v).map(|&(_, m)| m))
                .collect();
            if mults.iter().any(Option::is_none) {
                return Ok(false);
            }
            if mults.windows(2).any(|w| w[0] != w[1]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
