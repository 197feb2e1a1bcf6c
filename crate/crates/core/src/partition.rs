use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A partition of `0..n` in canonical form: members sorted within each
/// block, blocks ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Checks that `blocks` are nonempty, disjoint and cover `0..n`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::MalformedPartition("empty block".into()));
            }
            for &x in block {
                if x >= n {
                    return Err(Error::MalformedPartition(format!(
                        "element {x} outside domain of size {n}"
                    )));
                }
                if seen[x] {
                    return Err(Error::MalformedPartition(format!(
                        "element {x} appears twice"
                    )));
                }
                seen[x] = true;
            }
        }
        if let Some(x) = seen.iter().position(|&s| !s) {
            return Err(Error::MalformedPartition(format!(
                "element {x} is not covered"
            )));
        }
        Ok(Self::canonical(blocks))
    }

    /// Partition whose blocks are the fibres of `labels`.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (x, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(x);
        }
        Self::canonical(by_label.into_values().collect())
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            blocks: (0..n).map(|x| vec![x]).collect(),
        }
    }

    pub fn single_block(n: usize) -> Self {
        if n == 0 {
            return Partition { blocks: Vec::new() };
        }
        Partition {
            blocks: vec![(0..n).collect()],
        }
    }

    fn canonical(mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn domain_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Index of the block containing each element, blocks numbered in
    /// canonical order.
    pub fn block_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.domain_size()];
        for (i, block) in self.blocks.iter().enumerate() {
            for &x in block {
                out[x] = i;
            }
        }
        out
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.blocks
            .iter()
            .any(|bl| bl.contains(&a) && bl.contains(&b))
    }

    pub fn block_of(&self, x: usize) -> Option<&[usize]> {
        self.blocks
            .iter()
            .find(|b| b.contains(&x))
            .map(Vec::as_slice)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Union-find over `0..n`, used to accumulate orbits.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut y = x;
        while self.parent[y] != root {
            let next = self.parent[y];
            self.parent[y] = root;
            y = next;
        }
        root
    }

    /// Returns true if the two classes were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Keep the smaller index as root so labels stay canonical.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let p = Partition::from_blocks(5, vec![vec![4, 1], vec![3, 0], vec![2]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 3], vec![1, 4], vec![2]]);
        assert_eq!(p.block_index(), vec![0, 1, 2, 0, 1]);
        assert_eq!(p.to_string(), "{0,3} {1,4} {2}");
        assert_eq!(
            Partition::from_labels(&[7, 3, 7, 3, 9]),
            Partition::from_blocks(5, vec![vec![0, 2], vec![1, 3], vec![4]]).unwrap()
        );
    }

    #[test]
    fn malformed() {
        assert!(Partition::from_blocks(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(2, vec![vec![0, 1], vec![1]]).is_err());
        assert!(Partition::from_blocks(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(Partition::from_blocks(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn union_find_keeps_least_root() {
        let mut uf = UnionFind::new(4);
        uf.union(3, 1);
        uf.union(2, 3);
        assert_eq!(uf.labels(), vec![0, 1, 1, 1]);
    }
}
