//! Directed weighted hypergraphs with multiset tails and set heads.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::rational::{Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("edge `{0}`: empty tail")]
    EmptyTail(String),
    #[error("edge `{0}`: empty head")]
    EmptyHead(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("edge `{edge}`: multiplicity {multiplicity} for node `{node}` must be positive")]
    NonPositiveMultiplicity { edge: String, node: String, multiplicity: u32 },
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}`: parts do not partition the head")]
    InvalidPartition(String),
    #[error("cannot combine `{0}` and `{1}`: tail multisets differ")]
    TailMismatch(String, String),
    #[error("cannot combine `{0}` and `{1}`: heads overlap")]
    HeadOverlap(String, String),
    #[error("cannot combine `{0}` and `{1}`: weights differ")]
    WeightMismatch(String, String),
}

/// Edge description used to build a [`Hypergraph`]; tail entries are
/// `(label, multiplicity)` pairs and repeated labels accumulate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: Vec<(String, u32)>,
    pub head: Vec<String>,
    pub weight: Rat,
}

impl EdgeSpec {
    pub fn new(
        id: impl Into<String>,
        tail: &[(&str, u32)],
        head: &[&str],
        weight: Rat,
    ) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            tail: tail.iter().map(|(l, m)| (l.to_string(), *m)).collect(),
            head: head.iter().map(|l| l.to_string()).collect(),
            weight,
        }
    }

    /// Tail with all multiplicities one.
    pub fn simple(id: impl Into<String>, tail: &[&str], head: &[&str], weight: Rat) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            tail: tail.iter().map(|l| (l.to_string(), 1)).collect(),
            head: head.iter().map(|l| l.to_string()).collect(),
            weight,
        }
    }
}

/// Directed hyperedge over node indices: multiset tail, set head, rational weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperedge {
    id: String,
    tail: Vec<(usize, u32)>,
    head: Vec<usize>,
    weight: Rat,
}

impl Hyperedge {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Sorted `(node, multiplicity)` pairs; two tails are equal as multisets
    /// exactly when these slices are equal.
    pub fn tail(&self) -> &[(usize, u32)] {
        &self.tail
    }

    /// Sorted head node indices.
    pub fn head(&self) -> &[usize] {
        &self.head
    }

    pub fn weight(&self) -> &Rat {
        &self.weight
    }

    /// Tail cardinality `k(e)` counting multiplicity.
    pub fn tail_cardinality(&self) -> usize {
        self.tail.iter().map(|&(_, m)| m as usize).sum()
    }

    /// Nodes occurring in the tail, ignoring multiplicity.
    pub fn tail_support(&self) -> impl Iterator<Item = usize> + '_ {
        self.tail.iter().map(|&(v, _)| v)
    }

    /// Tail node indices repeated with multiplicity, ascending.
    pub fn tail_with_multiplicity(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.tail_cardinality());
        for &(v, m) in &self.tail {
            out.extend(std::iter::repeat(v).take(m as usize));
        }
        out
    }
}

/// Directed weighted hypergraph with dense node indices `0..n`.
///
/// Node and edge order is input order; every derived list is emitted in that
/// order. Values are immutable after construction and all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn new(labels: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Hypergraph, HypergraphError> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(HypergraphError::DuplicateLabel(label.clone()));
            }
        }
        let mut built = Hypergraph { labels, index, edges: Vec::with_capacity(edges.len()) };
        let mut ids = BTreeSet::new();
        for spec in edges {
            if !ids.insert(spec.id.clone()) {
                return Err(HypergraphError::DuplicateEdgeId(spec.id));
            }
            let edge = built.resolve_edge(spec)?;
            built.edges.push(edge);
        }
        Ok(built)
    }

    /// Nodes labeled `"1"`, …, `"n"`.
    pub fn from_numbered(n: usize, edges: Vec<EdgeSpec>) -> Result<Hypergraph, HypergraphError> {
        Hypergraph::new((1..=n).map(|i| i.to_string()).collect(), edges)
    }

    fn resolve_edge(&self, spec: EdgeSpec) -> Result<Hyperedge, HypergraphError> {
        if spec.tail.is_empty() {
            return Err(HypergraphError::EmptyTail(spec.id));
        }
        if spec.head.is_empty() {
            return Err(HypergraphError::EmptyHead(spec.id));
        }
        let mut tail: BTreeMap<usize, u32> = BTreeMap::new();
        for (label, mult) in &spec.tail {
            if *mult == 0 {
                return Err(HypergraphError::NonPositiveMultiplicity {
                    edge: spec.id,
                    node: label.clone(),
                    multiplicity: 0,
                });
            }
            let node = self.node_index(label).ok_or_else(|| HypergraphError::UnknownNode(label.clone()))?;
            *tail.entry(node).or_insert(0) += mult;
        }
        let mut head = BTreeSet::new();
        for label in &spec.head {
            let node = self.node_index(label).ok_or_else(|| HypergraphError::UnknownNode(label.clone()))?;
            head.insert(node);
        }
        Ok(Hyperedge {
            id: spec.id,
            tail: tail.into_iter().collect(),
            head: head.into_iter().collect(),
            weight: spec.weight,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_of(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge_by_id(&self, id: &str) -> Option<&Hyperedge> {
        self.edges.iter().find(|e| e.id == id)
    }

    fn check_node(&self, node: usize) -> Result<(), HypergraphError> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(HypergraphError::UnknownNode(node.to_string()))
        }
    }

    /// Hyperedges with `node` in the head, optionally restricted to tail
    /// cardinality `k`, in input order.
    pub fn backward_star(
        &self,
        node: usize,
        k: Option<usize>,
    ) -> Result<Vec<&Hyperedge>, HypergraphError> {
        self.check_node(node)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| e.head.binary_search(&node).is_ok())
            .filter(|e| k.map_or(true, |k| e.tail_cardinality() == k))
            .collect())
    }

    /// Hyperedges with `node` in the tail support, in input order.
    pub fn forward_star(&self, node: usize) -> Result<Vec<&Hyperedge>, HypergraphError> {
        self.check_node(node)?;
        Ok(self.edges.iter().filter(|e| e.tail_support().any(|v| v == node)).collect())
    }

    /// Tail cardinalities of the backward star of `node`, or of the whole
    /// hypergraph when `node` is `None`.
    pub fn tail_cardinalities(&self, node: Option<usize>) -> Result<BTreeSet<usize>, HypergraphError> {
        match node {
            Some(node) => Ok(self.backward_star(node, None)?.iter().map(|e| e.tail_cardinality()).collect()),
            None => Ok(self.edges.iter().map(|e| e.tail_cardinality()).collect()),
        }
    }

    fn with_edges(&self, edges: Vec<Hyperedge>) -> Hypergraph {
        let mut edges = edges;
        dedupe_ids(&mut edges);
        Hypergraph { labels: self.labels.clone(), index: self.index.clone(), edges }
    }

    /// Replaces every hyperedge with an `r`-element head by `r` hyperedges of
    /// the same tail and weight, one per head node. Idempotent; the admissible
    /// vector fields are unchanged.
    pub fn normalize_heads(&self) -> Hypergraph {
        let mut edges = Vec::new();
        for e in &self.edges {
            if e.head.len() == 1 {
                edges.push(e.clone());
            } else {
                for &v in &e.head {
                    edges.push(Hyperedge {
                        id: format!("{}:{}", e.id, self.labels[v]),
                        tail: e.tail.clone(),
                        head: vec![v],
                        weight: e.weight.clone(),
                    });
                }
            }
        }
        self.with_edges(edges)
    }

    /// Splits edge `id` into one edge per part; `parts` must be nonempty,
    /// pairwise disjoint, and cover the head exactly.
    pub fn split_edge_head(
        &self,
        id: &str,
        parts: &[Vec<usize>],
    ) -> Result<Hypergraph, HypergraphError> {
        let pos = self
            .edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| HypergraphError::UnknownEdge(id.to_string()))?;
        let edge = &self.edges[pos];
        let invalid = || HypergraphError::InvalidPartition(id.to_string());
        if parts.is_empty() {
            return Err(invalid());
        }
        let mut seen = BTreeSet::new();
        for part in parts {
            if part.is_empty() {
                return Err(invalid());
            }
            for &v in part {
                if edge.head.binary_search(&v).is_err() || !seen.insert(v) {
                    return Err(invalid());
                }
            }
        }
        if seen.len() != edge.head.len() {
            return Err(invalid());
        }
        let mut edges = Vec::with_capacity(self.edges.len() + parts.len() - 1);
        edges.extend_from_slice(&self.edges[..pos]);
        for (j, part) in parts.iter().enumerate() {
            let mut head: Vec<usize> = part.clone();
            head.sort_unstable();
            edges.push(Hyperedge {
                id: format!("{}:{}", id, j + 1),
                tail: edge.tail.clone(),
                head,
                weight: edge.weight.clone(),
            });
        }
        edges.extend_from_slice(&self.edges[pos + 1..]);
        Ok(self.with_edges(edges))
    }

    /// Combines two edges with equal tail multisets, disjoint heads, and equal
    /// weights into one; the result takes the first edge's position.
    pub fn combine_edges(&self, id1: &str, id2: &str) -> Result<Hypergraph, HypergraphError> {
        let pos1 = self
            .edges
            .iter()
            .position(|e| e.id == id1)
            .ok_or_else(|| HypergraphError::UnknownEdge(id1.to_string()))?;
        let pos2 = self
            .edges
            .iter()
            .position(|e| e.id == id2)
            .ok_or_else(|| HypergraphError::UnknownEdge(id2.to_string()))?;
        let (e1, e2) = (&self.edges[pos1], &self.edges[pos2]);
        if pos1 == pos2 {
            return Err(HypergraphError::HeadOverlap(id1.to_string(), id2.to_string()));
        }
        if e1.tail != e2.tail {
            return Err(HypergraphError::TailMismatch(id1.to_string(), id2.to_string()));
        }
        if e1.head.iter().any(|v| e2.head.binary_search(v).is_ok()) {
            return Err(HypergraphError::HeadOverlap(id1.to_string(), id2.to_string()));
        }
        if e1.weight != e2.weight {
            return Err(HypergraphError::WeightMismatch(id1.to_string(), id2.to_string()));
        }
        let mut head: Vec<usize> = e1.head.iter().chain(&e2.head).copied().collect();
        head.sort_unstable();
        let combined = Hyperedge {
            id: format!("{}+{}", id1, id2),
            tail: e1.tail.clone(),
            head,
            weight: e1.weight.clone(),
        };
        let mut edges = Vec::with_capacity(self.edges.len() - 1);
        for (i, e) in self.edges.iter().enumerate() {
            if i == pos1 {
                edges.push(combined.clone());
            } else if i != pos2 {
                edges.push(e.clone());
            }
        }
        Ok(self.with_edges(edges))
    }

    /// Constituent hypergraph: same nodes, edges restricted to tail
    /// cardinality `k`. May have an empty edge set and need not be connected.
    pub fn constituent(&self, k: usize) -> Hypergraph {
        let edges = self.edges.iter().filter(|e| e.tail_cardinality() == k).cloned().collect();
        Hypergraph { labels: self.labels.clone(), index: self.index.clone(), edges }
    }

    /// Weighted incidence digraph: `W[i][j] = w_j` iff node `i` is in the head
    /// of edge `j`, `T[j][i] =` multiplicity of node `i` in the tail of `j`.
    pub fn incidence_digraph(&self) -> IncidenceDigraph {
        let (n, m) = (self.node_count(), self.edge_count());
        let mut w = RatMatrix::zeros(n, m);
        let mut t = RatMatrix::zeros(m, n);
        for (j, e) in self.edges.iter().enumerate() {
            for &i in &e.head {
                w.set(i, j, e.weight.clone());
            }
            for &(i, mult) in &e.tail {
                t.set(j, i, Rat::from_integer(mult.into()));
            }
        }
        IncidenceDigraph { weight_matrix: w, tail_matrix: t }
    }

    /// Weak connectivity of the bipartite incidence graph over all nodes.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n <= 1 {
            return true;
        }
        let total = n + self.edge_count();
        let mut adjacency = vec![Vec::new(); total];
        for (j, e) in self.edges.iter().enumerate() {
            let ev = n + j;
            for v in e.tail_support().chain(e.head.iter().copied()) {
                adjacency[v].push(ev);
                adjacency[ev].push(v);
            }
        }
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen[..n].iter().all(|&s| s)
    }
}

fn dedupe_ids(edges: &mut [Hyperedge]) {
    let mut used = BTreeSet::new();
    for e in edges.iter_mut() {
        while !used.insert(e.id.clone()) {
            e.id.push('\'');
        }
    }
}

/// Incidence digraph of a hypergraph: block adjacency matrix
/// `[[0, W], [T, 0]]` over nodes followed by edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceDigraph {
    pub weight_matrix: RatMatrix,
    pub tail_matrix: RatMatrix,
}

impl IncidenceDigraph {
    pub fn node_count(&self) -> usize {
        self.weight_matrix.nrows()
    }

    pub fn edge_count(&self) -> usize {
        self.weight_matrix.ncols()
    }

    pub fn adjacency(&self) -> RatMatrix {
        let (n, m) = (self.node_count(), self.edge_count());
        let mut a = RatMatrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..m {
                a.set(i, n + j, self.weight_matrix.get(i, j).clone());
            }
        }
        for j in 0..m {
            for i in 0..n {
                a.set(n + j, i, self.tail_matrix.get(j, i).clone());
            }
        }
        a
    }
}
