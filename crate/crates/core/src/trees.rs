//! Full binary trees: construction, enumeration, uniform sampling, and
//! Horton–Strahler order statistics.
//!
//! A tree is stored as an index arena with ordered (left/right) children, so
//! the two mirror-image trees on three leaves are distinct, matching the
//! uniform model the rest of the crate assumes. All traversals are iterative;
//! degenerate caterpillar trees cannot overflow the stack.

use crate::Rational;
use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

/// Largest magnitude [`enumerate_trees`] accepts by default; the census size
/// is the Catalan number C(n-1), which is 58786 at n = 12.
pub const DEFAULT_ENUM_CAP: usize = 12;

/// Errors from tree construction and parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    /// Magnitude outside the accepted range for the operation.
    #[error("magnitude must be between 1 and {cap}, got {n}")]
    MagnitudeOutOfRange {
        /// Requested magnitude.
        n: usize,
        /// Largest accepted magnitude.
        cap: usize,
    },
    /// Empty serialization.
    #[error("empty input")]
    Empty,
    /// Character other than `(` or `)`.
    #[error("unexpected byte {byte:?} at position {pos}")]
    UnexpectedByte {
        /// Offending byte rendered as a char.
        byte: char,
        /// Byte offset in the input.
        pos: usize,
    },
    /// More `)` than `(` at some point, or too few at the end.
    #[error("unbalanced parentheses at position {pos}")]
    Unbalanced {
        /// Byte offset in the input.
        pos: usize,
    },
    /// A node closed with one child or more than two.
    #[error("node with {arity} children at position {pos}; full binary trees need 0 or 2")]
    BadArity {
        /// Number of children seen.
        arity: usize,
        /// Byte offset of the closing `)`.
        pos: usize,
    },
    /// Input continues past the root's closing parenthesis.
    #[error("trailing input at position {pos}")]
    Trailing {
        /// Byte offset of the first trailing byte.
        pos: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Leaf,
    Internal { left: u32, right: u32 },
}

/// A full binary tree with ordered children, stored as an index arena.
///
/// Invariants maintained by every constructor: exactly `2n - 1` nodes for
/// magnitude (leaf count) `n`, every internal node has two children, and the
/// arena contains no unreachable slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: u32,
}

impl Tree {
    /// The single-leaf tree (magnitude 1).
    pub fn leaf() -> Self {
        Tree { nodes: vec![Node::Leaf], root: 0 }
    }

    /// Joins two trees under a new root, preserving child order.
    pub fn join(left: &Tree, right: &Tree) -> Self {
        let mut nodes = Vec::with_capacity(1 + left.nodes.len() + right.nodes.len());
        nodes.push(Node::Internal {
            left: 1 + left.root,
            right: 1 + left.nodes.len() as u32 + right.root,
        });
        let mut copy_shifted = |src: &Tree, shift: u32| {
            for node in &src.nodes {
                nodes.push(match *node {
                    Node::Leaf => Node::Leaf,
                    Node::Internal { left, right } => {
                        Node::Internal { left: left + shift, right: right + shift }
                    }
                });
            }
        };
        copy_shifted(left, 1);
        copy_shifted(right, 1 + left.nodes.len() as u32);
        Tree { nodes, root: 0 }
    }

    /// Number of leaves.
    pub fn magnitude(&self) -> usize {
        self.nodes.len().div_ceil(2)
    }

    /// Total number of nodes (`2 * magnitude - 1`).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Serializes to a balanced-parentheses string: a leaf is `()`, an
    /// internal node wraps the concatenated child encodings.
    pub fn to_parens(&self) -> String {
        let mut out = String::with_capacity(2 * self.nodes.len());
        // Explicit stack: Open pushes the subtree, Close emits the ')'.
        enum Step {
            Open(u32),
            Close,
        }
        let mut stack = vec![Step::Open(self.root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Close => out.push(')'),
                Step::Open(v) => {
                    out.push('(');
                    stack.push(Step::Close);
                    if let Node::Internal { left, right } = self.nodes[v as usize] {
                        stack.push(Step::Open(right));
                        stack.push(Step::Open(left));
                    }
                }
            }
        }
        out
    }

    /// Parses the [`to_parens`](Self::to_parens) encoding, validating that the
    /// input is a single full binary tree.
    pub fn from_parens(s: &str) -> Result<Self, TreeError> {
        let mut nodes: Vec<Node> = Vec::new();
        // One frame per currently-open node: the ids of its finished children.
        let mut open: Vec<Vec<u32>> = Vec::new();
        let mut last_root: Option<u32> = None;
        for (pos, byte) in s.bytes().enumerate() {
            match byte {
                b'(' => {
                    if last_root.is_some() && open.is_empty() {
                        return Err(TreeError::Trailing { pos });
                    }
                    open.push(Vec::new());
                }
                b')' => {
                    let children = open.pop().ok_or(TreeError::Unbalanced { pos })?;
                    let id = nodes.len() as u32;
                    match children.as_slice() {
                        [] => nodes.push(Node::Leaf),
                        [left, right] => {
                            nodes.push(Node::Internal { left: *left, right: *right })
                        }
                        _ => {
                            return Err(TreeError::BadArity { arity: children.len(), pos })
                        }
                    }
                    match open.last_mut() {
                        Some(parent) => {
                            if parent.len() == 2 {
                                return Err(TreeError::BadArity { arity: 3, pos });
                            }
                            parent.push(id);
                        }
                        None => last_root = Some(id),
                    }
                }
                other => {
                    return Err(TreeError::UnexpectedByte { byte: other as char, pos })
                }
            }
        }
        if !open.is_empty() {
            return Err(TreeError::Unbalanced { pos: s.len() });
        }
        match last_root {
            Some(root) => Ok(Tree { nodes, root }),
            None => Err(TreeError::Empty),
        }
    }
}

/// Catalan number C(k) = binom(2k, k) / (k + 1); C(n-1) counts the full
/// binary trees with n leaves.
pub fn catalan(k: usize) -> BigInt {
    let k = BigInt::from(k);
    binomial(2 * k.clone(), k.clone()) / (k + 1)
}

/// Enumerates every tree of the given magnitude in canonical order with the
/// default magnitude cap ([`DEFAULT_ENUM_CAP`]).
///
/// Canonical order is recursive: trees are listed by left-subtree magnitude
/// ascending, then by the left subtree's canonical rank, then the right's.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>, TreeError> {
    enumerate_trees_capped(n, DEFAULT_ENUM_CAP)
}

/// [`enumerate_trees`] with an explicit magnitude cap.
pub fn enumerate_trees_capped(n: usize, cap: usize) -> Result<Vec<Tree>, TreeError> {
    if n == 0 || n > cap {
        return Err(TreeError::MagnitudeOutOfRange { n, cap });
    }
    let mut by_magnitude: Vec<Vec<Tree>> = vec![vec![], vec![Tree::leaf()]];
    for k in 2..=n {
        let mut shapes = Vec::new();
        for left_mag in 1..k {
            for left in &by_magnitude[left_mag] {
                for right in &by_magnitude[k - left_mag] {
                    shapes.push(Tree::join(left, right));
                }
            }
        }
        by_magnitude.push(shapes);
    }
    Ok(by_magnitude.pop().expect("n >= 1"))
}

/// Draws a uniformly random tree of magnitude `n` in O(n).
///
/// Growth step: pick any node uniformly, splice a new internal node into the
/// edge above it, and attach a fresh leaf on a uniformly chosen side. Each
/// ordered shape on `n` leaves admits exactly `n!` insertion histories, so
/// the unlabeled shape is uniform.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
    assert!(n >= 1, "magnitude must be at least 1");
    let mut nodes = Vec::with_capacity(2 * n - 1);
    nodes.push(Node::Leaf);
    for _ in 1..n {
        let v = rng.random_range(0..nodes.len());
        let leaf_on_left = rng.random_bool(0.5);
        // The new internal node takes over slot v so references from v's
        // parent stay valid; v's old subtree moves to a fresh slot.
        let moved = nodes.len() as u32;
        let fresh = moved + 1;
        nodes.push(nodes[v]);
        nodes.push(Node::Leaf);
        nodes[v] = if leaf_on_left {
            Node::Internal { left: fresh, right: moved }
        } else {
            Node::Internal { left: moved, right: fresh }
        };
    }
    Tree { nodes, root: 0 }
}

/// Horton–Strahler orders and branch counts of one tree.
///
/// Ordering rules: a leaf has order 1; an internal node whose children have
/// equal orders `r` gets `r + 1`, otherwise the larger child order. A branch
/// of order `r` is a maximal chain of adjacent order-`r` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrahlerProfile {
    magnitude: usize,
    orders: Vec<u32>,
    counts: Vec<u64>,
}

impl StrahlerProfile {
    /// Leaf count of the profiled tree.
    pub fn magnitude(&self) -> usize {
        self.magnitude
    }

    /// Order of the root, i.e. the largest order present.
    pub fn strahler_number(&self) -> u32 {
        self.counts.len() as u32
    }

    /// Number of branches of order `r` (1-based); zero beyond the root order.
    pub fn count(&self, r: u32) -> u64 {
        assert!(r >= 1, "orders are 1-based");
        self.counts.get(r as usize - 1).copied().unwrap_or(0)
    }

    /// Branch counts for orders `1..=strahler_number`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Per-node orders, parallel to the tree's arena.
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }
}

/// Computes the [`StrahlerProfile`] of a tree in one post-order pass.
pub fn strahler(tree: &Tree) -> StrahlerProfile {
    let mut orders = vec![0u32; tree.nodes.len()];
    let mut stack = Vec::with_capacity(64);
    stack.push((tree.root, false));
    while let Some((v, children_done)) = stack.pop() {
        match tree.nodes[v as usize] {
            Node::Leaf => orders[v as usize] = 1,
            Node::Internal { left, right } => {
                if children_done {
                    let (a, b) = (orders[left as usize], orders[right as usize]);
                    orders[v as usize] = if a == b { a + 1 } else { a.max(b) };
                } else {
                    stack.push((v, true));
                    stack.push((left, false));
                    stack.push((right, false));
                }
            }
        }
    }
    // A node heads a branch iff its parent has a different order (or it is
    // the root); counting heads counts branches.
    let mut counts = vec![0u64; orders[tree.root as usize] as usize];
    counts[orders[tree.root as usize] as usize - 1] += 1;
    for (v, node) in tree.nodes.iter().enumerate() {
        if let Node::Internal { left, right } = *node {
            for child in [left, right] {
                if orders[child as usize] != orders[v] {
                    counts[orders[child as usize] as usize - 1] += 1;
                }
            }
        }
    }
    StrahlerProfile { magnitude: tree.magnitude(), orders, counts }
}

/// Ratio of branch counts `S_{q+r} / S_q` as an exact rational, with the
/// convention that the ratio is 0 when the denominator count is 0.
pub fn bifurcation_ratio(profile: &StrahlerProfile, q: u32, r: u32) -> Rational {
    assert!(q >= 1 && r >= 1, "orders are 1-based and the gap must be positive");
    let denom = profile.count(q);
    if denom == 0 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(profile.count(q + r)), BigInt::from(denom))
}

// ── Tests ──────────────────────────────────────────────────────────────
