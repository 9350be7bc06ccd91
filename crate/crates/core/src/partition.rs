//! Equivalence relations on `{0, …, n−1}` in canonical restricted-growth form.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("invalid partition: {0}")]
    Invalid(String),
}

/// Partition of a ground set `{0, …, n−1}`.
///
/// Stored as a restricted-growth assignment: class ids are contiguous and
/// appear in order of first occurrence by element index, so each equivalence
/// relation has exactly one representation and partitions compare/sort
/// deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    num_classes: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary class-id assignment.
    pub fn from_assignment(raw: &[usize]) -> Partition {
        let mut relabel: Vec<Option<usize>> = vec![None; raw.len().max(raw.iter().map(|&c| c + 1).max().unwrap_or(0))];
        let mut assignment = Vec::with_capacity(raw.len());
        let mut next = 0;
        for &c in raw {
            let id = *relabel[c].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            assignment.push(id);
        }
        Partition { assignment, num_classes: next }
    }

    /// Builds from explicit classes, which must cover `0..n` exactly once.
    pub fn from_classes(n: usize, classes: &[Vec<usize>]) -> Result<Partition, PartitionError> {
        let mut raw = vec![usize::MAX; n];
        for (id, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(PartitionError::Invalid("empty class".into()));
            }
            for &el in class {
                if el >= n {
                    return Err(PartitionError::Invalid(format!("element {el} out of range 0..{n}")));
                }
                if raw[el] != usize::MAX {
                    return Err(PartitionError::Invalid(format!("element {el} assigned twice")));
                }
                raw[el] = id;
            }
        }
        if let Some(el) = raw.iter().position(|&c| c == usize::MAX) {
            return Err(PartitionError::Invalid(format!("element {el} not assigned")));
        }
        Ok(Partition::from_assignment(&raw))
    }

    pub fn singletons(n: usize) -> Partition {
        Partition { assignment: (0..n).collect(), num_classes: n }
    }

    pub fn one_class(n: usize) -> Partition {
        Partition { assignment: vec![0; n], num_classes: if n == 0 { 0 } else { 1 } }
    }

    pub fn size(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_of(&self, element: usize) -> usize {
        self.assignment[element]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Classes in canonical order; elements inside each class are increasing.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.num_classes];
        for (el, &c) in self.assignment.iter().enumerate() {
            classes[c].push(el);
        }
        classes
    }

    /// True when every class of `self` is contained in a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        assert_eq!(self.size(), coarser.size());
        let mut image = vec![usize::MAX; self.num_classes];
        for (el, &c) in self.assignment.iter().enumerate() {
            let target = coarser.assignment[el];
            if image[c] == usize::MAX {
                image[c] = target;
            } else if image[c] != target {
                return false;
            }
        }
        true
    }

    /// Restriction to the first `len` elements, recanonicalized.
    pub fn restrict(&self, len: usize) -> Partition {
        Partition::from_assignment(&self.assignment[..len])
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes = self.classes();
        let body: Vec<String> = classes
            .iter()
            .map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{{{}}}", body.join(" | "))
    }
}

/// All partitions of `{0, …, n−1}` in lexicographic restricted-growth order.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut raw = vec![0usize; n];
    fn rec(raw: &mut Vec<usize>, i: usize, max_used: usize, out: &mut Vec<Partition>) {
        let n = raw.len();
        if i == n {
            out.push(Partition::from_assignment(raw));
            return;
        }
        for c in 0..=max_used + 1 {
            raw[i] = c;
            rec(raw, i + 1, max_used.max(c), out);
        }
    }
    if n == 0 {
        out.push(Partition { assignment: vec![], num_classes: 0 });
    } else {
        raw[0] = 0;
        rec(&mut raw, 1, 0, &mut out);
    }
    out
}
