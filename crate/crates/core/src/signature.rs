//! Signatures `↑^m/↓^n` of node pairs, subsumption and congruence.

use std::fmt;

use crate::document::{Document, NodeId};
use crate::error::Result;
use crate::expr::Expr;

pub type Pair = (NodeId, NodeId);

/// The path from `v` up to the top `⊤(v,w)` and down to `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub up: usize,
    pub down: usize,
    /// `v = y_0, ..., y_up = top, ..., y_{up+down} = w`.
    pub path: Vec<NodeId>,
}

impl Signature {
    pub fn top(&self) -> NodeId {
        self.path[self.up]
    }

    pub fn expr(&self) -> Expr {
        Expr::up_down(self.up, self.down)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    /// True if `v` is an ancestor of `w` or vice versa (or `v = w`).
    pub fn is_vertical(&self) -> bool {
        self.up == 0 || self.down == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr())
    }
}

pub fn signature_of(doc: &Document, v: NodeId, w: NodeId) -> Result<Signature> {
    doc.check(v)?;
    doc.check(w)?;
    Ok(sig(doc, v, w))
}

pub(crate) fn sig(doc: &Document, v: NodeId, w: NodeId) -> Signature {
    let top = doc.lca(v, w);
    let up = doc.depth(v) - doc.depth(top);
    let down = doc.depth(w) - doc.depth(top);
    let mut path: Vec<NodeId> = (0..=up).map(|i| doc.ancestor_unchecked(v, i)).collect();
    path.extend((0..down).rev().map(|i| doc.ancestor_unchecked(w, i)));
    Signature { up, down, path }
}

/// `(v,w) ∈ ↑^m/↓^n(D)`.
pub fn in_up_down(doc: &Document, m: usize, n: usize, (v, w): Pair) -> bool {
    if doc.depth(v) < m {
        return false;
    }
    let t = doc.ancestor_unchecked(v, m);
    doc.depth(w) == doc.depth(t) + n && doc.ancestor_unchecked(w, n) == t
}

/// All `w` with `(v,w) ∈ ↑^m/↓^n(D)`, in id order.
pub fn up_down_targets(doc: &Document, m: usize, n: usize, v: NodeId) -> Vec<NodeId> {
    if doc.depth(v) < m {
        return Vec::new();
    }
    let t = doc.ancestor_unchecked(v, m);
    let want = doc.depth(t) + n;
    if n == 0 {
        return vec![t];
    }
    doc.descendants(t).filter(|&w| doc.depth(w) == want).collect()
}

/// `p1 ≳ p2`: `p2 ∈ sig(p1)(D)`.
pub fn subsumes(doc: &Document, p1: Pair, p2: Pair) -> Result<bool> {
    for x in [p1.0, p1.1, p2.0, p2.1] {
        doc.check(x)?;
    }
    Ok(subsumes_unchecked(doc, p1, p2))
}

pub(crate) fn subsumes_unchecked(doc: &Document, p1: Pair, p2: Pair) -> bool {
    let s = sig(doc, p1.0, p1.1);
    in_up_down(doc, s.up, s.down, p2)
}

/// `p1 ≅ p2`, via the shortcut: one membership test for vertical pairs,
/// otherwise membership in `↑^m/↓^n − ↑^{m−1}/↓^{n−1}`.
pub fn congruent(doc: &Document, p1: Pair, p2: Pair) -> Result<bool> {
    for x in [p1.0, p1.1, p2.0, p2.1] {
        doc.check(x)?;
    }
    Ok(congruent_unchecked(doc, p1, p2))
}

pub(crate) fn congruent_unchecked(doc: &Document, p1: Pair, p2: Pair) -> bool {
    let s = sig(doc, p1.0, p1.1);
    if s.is_vertical() {
        in_up_down(doc, s.up, s.down, p2)
    } else {
        in_up_down(doc, s.up, s.down, p2) && !in_up_down(doc, s.up - 1, s.down - 1, p2)
    }
}

/// The node corresponding to path position `i` of `s` in a subsumed pair.
pub fn corresponding(doc: &Document, s: &Signature, i: usize, (v2, w2): Pair) -> NodeId {
    if i <= s.up {
        doc.ancestor_unchecked(v2, i)
    } else {
        doc.ancestor_unchecked(w2, s.up + s.down - i)
    }
}

/// All pairs subsumed by `p`.
pub fn subsumed_pairs(doc: &Document, p: Pair) -> Vec<Pair> {
    let s = sig(doc, p.0, p.1);
    doc.nodes().flat_map(|v| up_down_targets(doc, s.up, s.down, v).into_iter().map(move |w| (v, w))).collect()
}

/// All pairs congruent to `p`.
pub fn congruent_pairs(doc: &Document, p: Pair) -> Vec<Pair> {
    let s = sig(doc, p.0, p.1);
    subsumed_pairs(doc, p).into_iter().filter(|&(v, w)| sig(doc, v, w).shape() == s.shape()).collect()
}
