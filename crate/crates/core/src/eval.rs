//! Relations, node sets and the denotational semantics of expressions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::document::{Document, NodeId};
use crate::error::{Error, Result};
use crate::expr::Expr;

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// A set of nodes of one document, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet {
    n: usize,
    bits: Vec<u64>,
}

impl NodeSet {
    pub fn new(n: usize) -> NodeSet {
        NodeSet { n, bits: vec![0; words(n)] }
    }

    pub fn full(n: usize) -> NodeSet {
        let mut s = NodeSet::new(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> NodeSet {
        let mut s = NodeSet::new(n);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.n && self.bits[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: NodeId) {
        assert!(v < self.n, "node {v} out of range");
        self.bits[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: NodeId) {
        if v < self.n {
            self.bits[v / 64] &= !(1 << (v % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }

    pub fn union_with(&mut self, o: &NodeSet) {
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, o: &NodeSet) -> bool {
        self.bits.iter().zip(&o.bits).all(|(a, b)| a & !b == 0)
    }

    /// Parses comma-separated node ids.
    pub fn parse(n: usize, text: &str) -> Result<NodeSet> {
        let mut s = NodeSet::new(n);
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: usize = tok.parse().map_err(|_| Error::Syntax { pos: 0, msg: format!("bad node id {tok:?}") })?;
            if v >= n {
                return Err(Error::InvalidNode { node: v, len: n });
            }
            s.insert(v);
        }
        Ok(s)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|v| v.to_string()).collect();
        f.write_str(&ids.join(","))
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// A binary relation on the nodes of one document, stored as a bit matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: usize,
    w: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn new(n: usize) -> Relation {
        let w = words(n);
        Relation { n, w, bits: vec![0; n * w] }
    }

    pub fn identity(n: usize) -> Relation {
        let mut r = Relation::new(n);
        for v in 0..n {
            r.insert(v, v);
        }
        r
    }

    pub fn full(n: usize) -> Relation {
        let mut r = Relation::new(n);
        for v in 0..n {
            for w in 0..n {
                r.insert(v, w);
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Relation {
        let mut r = Relation::new(n);
        for (v, w) in pairs {
            r.insert(v, w);
        }
        r
    }

    /// The diagonal `{(v,v) : v ∈ s}`.
    pub fn diagonal(s: &NodeSet) -> Relation {
        Relation::from_pairs(s.universe(), s.iter().map(|v| (v, v)))
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, v: NodeId, w: NodeId) -> bool {
        v < self.n && w < self.n && self.bits[v * self.w + w / 64] >> (w % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: NodeId, w: NodeId) {
        assert!(v < self.n && w < self.n, "pair ({v},{w}) out of range");
        self.bits[v * self.w + w / 64] |= 1 << (w % 64);
    }

    pub fn remove(&mut self, v: NodeId, w: NodeId) {
        if v < self.n && w < self.n {
            self.bits[v * self.w + w / 64] &= !(1 << (w % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    fn row_words(&self, v: NodeId) -> &[u64] {
        &self.bits[v * self.w..(v + 1) * self.w]
    }

    pub fn row_is_empty(&self, v: NodeId) -> bool {
        self.row_words(v).iter().all(|&x| x == 0)
    }

    /// `{w : (v,w) ∈ self}`.
    pub fn row(&self, v: NodeId) -> NodeSet {
        NodeSet { n: self.n, bits: self.row_words(v).to_vec() }
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.n).flat_map(move |v| (0..self.n).filter(move |&w| self.contains(v, w)).map(move |w| (v, w)))
    }

    /// Nodes with a nonempty row.
    pub fn domain(&self) -> NodeSet {
        NodeSet::from_nodes(self.n, (0..self.n).filter(|&v| !self.row_is_empty(v)))
    }

    /// Nodes with a nonempty column.
    pub fn range(&self) -> NodeSet {
        let mut s = NodeSet::new(self.n);
        for v in 0..self.n {
            for (a, b) in s.bits.iter_mut().zip(self.row_words(v)) {
                *a |= b;
            }
        }
        s
    }

    pub fn transpose(&self) -> Relation {
        Relation::from_pairs(self.n, self.pairs().map(|(v, w)| (w, v)))
    }

    pub fn union_with(&mut self, o: &Relation) {
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, o: &Relation) {
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a &= b;
        }
    }

    pub fn diff_with(&mut self, o: &Relation) {
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a &= !b;
        }
    }

    pub fn union(&self, o: &Relation) -> Relation {
        let mut r = self.clone();
        r.union_with(o);
        r
    }

    pub fn intersect(&self, o: &Relation) -> Relation {
        let mut r = self.clone();
        r.intersect_with(o);
        r
    }

    pub fn diff(&self, o: &Relation) -> Relation {
        let mut r = self.clone();
        r.diff_with(o);
        r
    }

    pub fn is_subset(&self, o: &Relation) -> bool {
        self.bits.iter().zip(&o.bits).all(|(a, b)| a & !b == 0)
    }

    /// Relational composition, joined on the middle node.
    pub fn compose(&self, o: &Relation) -> Relation {
        let mut out = Relation::new(self.n);
        let w = self.w;
        for v in 0..self.n {
            for (wi, &word) in self.row_words(v).iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let mid = wi * 64 + word.trailing_zeros() as usize;
                    word &= word - 1;
                    let (dst, src) = (v * w, mid * w);
                    for i in 0..w {
                        out.bits[dst + i] |= o.bits[src + i];
                    }
                }
            }
        }
        out
    }

    /// Parses pairs separated by commas or newlines, each `u v`.
    pub fn parse(n: usize, text: &str) -> Result<Relation> {
        let mut r = Relation::new(n);
        for item in text.split([',', '\n', ';']).map(str::trim).filter(|s| !s.is_empty()) {
            let ids: Vec<&str> = item.split_whitespace().collect();
            let bad = || Error::Syntax { pos: 0, msg: format!("bad pair {item:?}") };
            if ids.len() != 2 {
                return Err(bad());
            }
            let v: usize = ids[0].parse().map_err(|_| bad())?;
            let w: usize = ids[1].parse().map_err(|_| bad())?;
            for x in [v, w] {
                if x >= n {
                    return Err(Error::InvalidNode { node: x, len: n });
                }
            }
            r.insert(v, w);
        }
        Ok(r)
    }

    /// One `u v` line per pair, sorted.
    pub fn to_lines(&self) -> String {
        let lines: Vec<String> = self.pairs().map(|(v, w)| format!("{v} {w}")).collect();
        lines.join("\n")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lines())
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.pairs().map(|(v, w)| format!("({v},{w})")).collect();
        write!(f, "{{{}}}", ps.join(","))
    }
}

/// The child-edge relation `↓(D)`.
pub fn down_relation(doc: &Document) -> Relation {
    Relation::from_pairs(doc.len(), doc.nodes().flat_map(|v| doc.children(v).iter().map(move |&c| (v, c))))
}

/// `ch_k` applied to a node predicate given by its domain.
pub fn count_relation(doc: &Document, k: u32, sat: &NodeSet) -> Relation {
    let mut r = Relation::new(doc.len());
    for v in doc.nodes() {
        if doc.children(v).iter().filter(|&&c| sat.contains(c)).count() >= k as usize {
            r.insert(v, v);
        }
    }
    r
}

/// `e(D)`.
pub fn eval(e: &Expr, doc: &Document) -> Relation {
    Evaluator::new(doc).eval(e)
}

/// `e(D)(v) = {w : (v,w) ∈ e(D)}`.
pub fn eval_from(e: &Expr, doc: &Document, v: NodeId) -> Result<NodeSet> {
    doc.check(v)?;
    Ok(eval(e, doc).row(v))
}

/// Evaluator with a memo table for subterms shared by reference.
pub struct Evaluator<'d> {
    doc: &'d Document,
    down: Relation,
    up: Relation,
    memo: HashMap<*const Expr, Relation>,
}

impl<'d> Evaluator<'d> {
    pub fn new(doc: &'d Document) -> Self {
        let down = down_relation(doc);
        let up = down.transpose();
        Evaluator { doc, down, up, memo: HashMap::new() }
    }

    fn sub(&mut self, a: &Arc<Expr>) -> Relation {
        if Arc::strong_count(a) > 1 {
            let key = Arc::as_ptr(a);
            if let Some(r) = self.memo.get(&key) {
                return r.clone();
            }
            let r = self.eval(a);
            self.memo.insert(key, r.clone());
            r
        } else {
            self.eval(a)
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Relation {
        let n = self.doc.len();
        match e {
            Expr::Empty => Relation::new(n),
            Expr::Eps => Relation::identity(n),
            Expr::LabelTest(l) => Relation::from_pairs(n, self.doc.nodes_with_label(l).iter().map(|&v| (v, v))),
            Expr::Down => self.down.clone(),
            Expr::Up => self.up.clone(),
            Expr::Proj1(a) => Relation::diagonal(&self.sub(a).domain()),
            Expr::Proj2(a) => Relation::diagonal(&self.sub(a).range()),
            Expr::Inverse(a) => self.sub(a).transpose(),
            Expr::Count(k, a) => {
                let sat = self.sub(a).domain();
                count_relation(self.doc, *k, &sat)
            }
            Expr::Compose(a, b) => {
                let ra = self.sub(a);
                if ra.is_empty() {
                    return ra;
                }
                ra.compose(&self.sub(b))
            }
            Expr::Union(a, b) => self.sub(a).union(&self.sub(b)),
            Expr::Intersect(a, b) => self.sub(a).intersect(&self.sub(b)),
            Expr::Diff(a, b) => self.sub(a).diff(&self.sub(b)),
        }
    }
}
