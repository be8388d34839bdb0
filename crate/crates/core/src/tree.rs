//! Finite balls of the Cayley tree.
//!
//! A [`FiniteTree`] of order `k` and depth `n` is the ball `V_n` around a
//! distinguished root: the root has `k + 1` neighbours, every other vertex
//! has one parent and `k` children. Vertices are numbered breadth-first, so
//! the ball `V_m` for any `m <= n` is the index prefix `0..ball_size(m)` and
//! each sphere `W_m` is a contiguous index range.

use std::ops::Range;

use thiserror::Error;

/// Hard cap on the number of vertices a tree may hold.
pub const MAX_VERTICES: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree order k must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("tree of order {k} and depth {depth} exceeds {MAX_VERTICES} vertices")]
    TooLarge { k: usize, depth: usize },
    #[error("level {level} is outside 0..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("vertex {index} does not exist (tree has {len} vertices)")]
    InvalidVertex { index: usize, len: usize },
}

/// Rooted Cayley tree of order `k` truncated at depth `n`. Immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    k: usize,
    depth: usize,
    parent: Vec<Option<usize>>,
    generation: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// `level_start[m]..level_start[m + 1]` is the sphere `W_m`.
    level_start: Vec<usize>,
}

/// Number of vertices on sphere `W_m` of an order-`k` tree, if it fits.
pub fn sphere_size(k: usize, m: usize) -> Option<usize> {
    if m == 0 {
        return Some(1);
    }
    let mut size = k.checked_add(1)?;
    for _ in 1..m {
        size = size.checked_mul(k)?;
    }
    Some(size)
}

/// Number of vertices in the ball `V_n`, if it fits.
pub fn ball_size(k: usize, n: usize) -> Option<usize> {
    (0..=n).try_fold(0usize, |acc, m| acc.checked_add(sphere_size(k, m)?))
}

/// Builds the ball of radius `n` of the order-`k` Cayley tree.
pub fn build_tree(k: usize, n: usize) -> Result<FiniteTree, TreeError> {
    if k < 1 {
        return Err(TreeError::InvalidOrder(k));
    }
    let total = ball_size(k, n)
        .filter(|&t| t <= MAX_VERTICES)
        .ok_or(TreeError::TooLarge { k, depth: n })?;

    let mut parent = Vec::with_capacity(total);
    let mut generation = Vec::with_capacity(total);
    let mut children = vec![Vec::new(); total];
    let mut level_start = Vec::with_capacity(n + 2);

    parent.push(None);
    generation.push(0);
    level_start.push(0);
    level_start.push(1);

    for m in 1..=n {
        let prev = level_start[m - 1]..level_start[m];
        for x in prev {
            let fan_out = if x == 0 { k + 1 } else { k };
            for _ in 0..fan_out {
                let child = parent.len();
                parent.push(Some(x));
                generation.push(m);
                children[x].push(child);
            }
        }
        level_start.push(parent.len());
    }
    debug_assert_eq!(parent.len(), total);

    Ok(FiniteTree {
        k,
        depth: n,
        parent,
        generation,
        children,
        level_start,
    })
}

impl FiniteTree {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Index range of the sphere `W_m`.
    pub fn level_range(&self, m: usize) -> Result<Range<usize>, TreeError> {
        if m > self.depth {
            return Err(TreeError::LevelOutOfRange {
                level: m,
                depth: self.depth,
            });
        }
        Ok(self.level_start[m]..self.level_start[m + 1])
    }

    /// Vertices at distance exactly `m` from the root, ascending.
    pub fn sphere(&self, m: usize) -> Result<Vec<usize>, TreeError> {
        self.level_range(m).map(|r| r.collect())
    }

    /// Number of vertices in `V_m` (the prefix `0..ball_len(m)`).
    pub fn ball_len(&self, m: usize) -> Result<usize, TreeError> {
        self.level_range(m).map(|r| r.end)
    }

    /// Direct descendants `S(x)`.
    pub fn children(&self, x: usize) -> Result<&[usize], TreeError> {
        self.check(x)?;
        Ok(&self.children[x])
    }

    pub fn parent(&self, x: usize) -> Result<Option<usize>, TreeError> {
        self.check(x)?;
        Ok(self.parent[x])
    }

    pub fn generation(&self, x: usize) -> Result<usize, TreeError> {
        self.check(x)?;
        Ok(self.generation[x])
    }

    /// Leaves of the ball, i.e. the outer sphere `W_n`.
    pub fn leaves(&self) -> Range<usize> {
        self.level_start[self.depth]..self.level_start[self.depth + 1]
    }

    /// Edges as `(parent, child)` pairs in child order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
    }

    /// Sizes `|W_0|, ..., |W_n|`.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.level_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    // Unchecked accessors for hot loops inside the crate.
    pub(crate) fn parent_of(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    fn check(&self, x: usize) -> Result<(), TreeError> {
        if x < self.len() {
            Ok(())
        } else {
            Err(TreeError::InvalidVertex {
                index: x,
                len: self.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Level sizes by walking the tree from the root, independent of the
    /// closed-form counts.
    fn enumerate_levels(tree: &FiniteTree) -> Vec<usize> {
        let mut sizes = vec![0; tree.depth() + 1];
        let mut stack = vec![(tree.root(), 0usize)];
        while let Some((x, d)) = stack.pop() {
            sizes[d] += 1;
            for &c in tree.children(x).unwrap() {
                stack.push((c, d + 1));
            }
        }
        sizes
    }

    #[test]
    fn radius_zero_is_just_the_root() {
        let t = build_tree(2, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.edges().count(), 0);
        assert!(t.children(0).unwrap().is_empty());
    }

    #[test]
    fn binary_tree_depth_two_counts() {
        let t = build_tree(2, 2).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 3, 6]);
        assert_eq!(t.len(), 10);
        assert_eq!(t.sphere(0).unwrap(), vec![0]);
        assert_eq!(t.sphere(1).unwrap().len(), 3);
    }

    #[test]
    fn ternary_tree_matches_walk() {
        let t = build_tree(3, 2).unwrap();
        assert_eq!(enumerate_levels(&t), vec![1, 4, 12]);
        assert_eq!(t.len(), 17);
        assert_eq!(t.sphere(2).unwrap().len(), 12);
        // vertex 1 is an internal non-root vertex
        assert_eq!(t.children(1).unwrap().len(), 3);
    }

    #[test]
    fn root_and_leaf_children() {
        let t = build_tree(2, 1).unwrap();
        assert_eq!(t.children(0).unwrap(), &[1, 2, 3]);
        for leaf in t.leaves() {
            assert!(t.children(leaf).unwrap().is_empty());
        }
    }

    #[test]
    fn errors() {
        assert_eq!(build_tree(0, 3), Err(TreeError::InvalidOrder(0)));
        assert!(matches!(build_tree(1000, 10), Err(TreeError::TooLarge { .. })));
        assert!(matches!(build_tree(2, 60), Err(TreeError::TooLarge { .. })));
        let t = build_tree(2, 2).unwrap();
        assert!(matches!(
            t.sphere(3),
            Err(TreeError::LevelOutOfRange { level: 3, depth: 2 })
        ));
        assert!(matches!(
            t.children(10),
            Err(TreeError::InvalidVertex { index: 10, len: 10 })
        ));
    }

    #[test]
    fn path_for_order_one() {
        let t = build_tree(1, 3).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 2, 2, 2]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn structural_invariants(k in 1usize..6, n in 0usize..5) {
                let t = build_tree(k, n).unwrap();
                let sizes = t.level_sizes();
                prop_assert_eq!(sizes[0], 1);
                for (m, &s) in sizes.iter().enumerate().skip(1) {
                    prop_assert_eq!(s, (k + 1) * k.pow(m as u32 - 1));
                }
                prop_assert_eq!(sizes.iter().sum::<usize>(), t.len());
                prop_assert_eq!(t.edges().count(), t.len() - 1);
                prop_assert_eq!(enumerate_levels(&t), sizes);
                for (p, c) in t.edges() {
                    prop_assert_eq!(t.generation(c).unwrap(), t.generation(p).unwrap() + 1);
                }
                for x in 0..t.len() {
                    let g = t.generation(x).unwrap();
                    let expected = if g == n { 0 } else if x == 0 { k + 1 } else { k };
                    prop_assert_eq!(t.children(x).unwrap().len(), expected);
                }
            }
        }
    }
}
