//! Node-level structural relations and their pair-level liftings.

use std::collections::HashMap;
use std::fmt;

use crate::document::{Document, NodeId};
use crate::error::Result;
use crate::eval::Relation;
use crate::signature::{corresponding, sig, subsumes_unchecked, Pair};

/// The structural relations between nodes of one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeNotion {
    /// Downward-k-equivalence `≡↓k`.
    DownK(u32),
    /// Upward-equivalence `≡↑`.
    Upward,
    /// k-equivalence `≈k`.
    UpDownK(u32),
    /// Downward-relatedness `⊒` (a preorder).
    DownRelated,
    /// `⊒ ∩ ⊒ᵀ`.
    WeakDown,
    /// Relatedness `⊵` (a preorder).
    Related,
    /// `⊵ ∩ ⊵ᵀ`.
    WeakUpDown,
    /// `≥↑` (a preorder).
    UpRelated,
}

impl NodeNotion {
    pub fn is_preorder(&self) -> bool {
        matches!(self, NodeNotion::DownRelated | NodeNotion::Related | NodeNotion::UpRelated)
    }
}

impl fmt::Display for NodeNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeNotion::DownK(k) => write!(f, "down-k({k})"),
            NodeNotion::Upward => f.write_str("up"),
            NodeNotion::UpDownK(k) => write!(f, "k({k})"),
            NodeNotion::DownRelated => f.write_str("down-rel"),
            NodeNotion::WeakDown => f.write_str("weak-down"),
            NodeNotion::Related => f.write_str("rel"),
            NodeNotion::WeakUpDown => f.write_str("weak"),
            NodeNotion::UpRelated => f.write_str("up-rel"),
        }
    }
}

/// A computed node relation: block ids (smallest member of each block)
/// for equivalences, a matrix with `(v1,v2)` meaning `v1 ≥ v2` for preorders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRelationData {
    Partition(Vec<NodeId>),
    Preorder(Relation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRelationIndex {
    pub notion: NodeNotion,
    pub data: NodeRelationData,
}

impl NodeRelationIndex {
    /// For equivalences `v1 ~ v2`; for preorders `v1 ≥ v2`.
    pub fn related(&self, v1: NodeId, v2: NodeId) -> bool {
        match &self.data {
            NodeRelationData::Partition(b) => b[v1] == b[v2],
            NodeRelationData::Preorder(m) => m.contains(v1, v2),
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            NodeRelationData::Partition(b) => b.len(),
            NodeRelationData::Preorder(m) => m.universe(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Block id of `v` (partitions only).
    pub fn block(&self, v: NodeId) -> Option<NodeId> {
        match &self.data {
            NodeRelationData::Partition(b) => Some(b[v]),
            NodeRelationData::Preorder(_) => None,
        }
    }

    /// The blocks of a partition, or the classes of the induced equivalence
    /// of a preorder, sorted by smallest member.
    pub fn blocks(&self) -> Vec<Vec<NodeId>> {
        let n = self.len();
        let ids: Vec<NodeId> = match &self.data {
            NodeRelationData::Partition(b) => b.clone(),
            NodeRelationData::Preorder(m) => {
                (0..n).map(|v| (0..=v).find(|&u| m.contains(u, v) && m.contains(v, u)).unwrap()).collect()
            }
        };
        let mut blocks: Vec<Vec<NodeId>> = Vec::new();
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        for (v, &b) in ids.iter().enumerate() {
            let i = *index.entry(b).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[i].push(v);
        }
        blocks
    }

    /// `{0} {1,4} ...` for partitions; `u <= v` lines (meaning `v ≥ u`)
    /// for preorders.
    pub fn render(&self) -> String {
        match &self.data {
            NodeRelationData::Partition(_) => {
                let parts: Vec<String> = self
                    .blocks()
                    .iter()
                    .map(|b| format!("{{{}}}", b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                parts.join(" ")
            }
            NodeRelationData::Preorder(m) => {
                let t = m.transpose();
                t.pairs().map(|(u, v)| format!("{u} <= {v}")).collect::<Vec<_>>().join("\n")
            }
        }
    }

    /// The relation as a matrix (`(v1,v2)` iff related).
    pub fn matrix(&self) -> Relation {
        match &self.data {
            NodeRelationData::Preorder(m) => m.clone(),
            NodeRelationData::Partition(b) => {
                let n = b.len();
                Relation::from_pairs(n, (0..n).flat_map(|v| (0..n).filter(move |&w| b[v] == b[w]).map(move |w| (v, w))))
            }
        }
    }
}

/// Canonical block ids from arbitrary keys: each node gets the smallest
/// node sharing its key.
fn canonical<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Vec<NodeId> {
    let mut first: HashMap<K, NodeId> = HashMap::new();
    keys.into_iter().enumerate().map(|(v, k)| *first.entry(k).or_insert(v)).collect()
}

fn count_blocks(b: &[NodeId]) -> usize {
    b.iter().enumerate().filter(|&(v, &id)| v == id).count()
}

/// `≡↓k` by iterated refinement on (label, capped child-block multiset).
pub fn down_k_blocks(doc: &Document, k: u32) -> Vec<NodeId> {
    let mut blocks = canonical(doc.labels().iter().cloned());
    loop {
        let next = canonical(doc.nodes().map(|v| {
            let mut counts: Vec<(NodeId, u32)> = Vec::new();
            let mut cs: Vec<NodeId> = doc.children(v).iter().map(|&c| blocks[c]).collect();
            cs.sort_unstable();
            for b in cs {
                match counts.last_mut() {
                    Some((lb, n)) if *lb == b => *n = (*n + 1).min(k),
                    _ => counts.push((b, 1.min(k))),
                }
            }
            (blocks[v], counts)
        }));
        if count_blocks(&next) == count_blocks(&blocks) {
            return next;
        }
        blocks = next;
    }
}

fn up_down_blocks(doc: &Document, down: &[NodeId]) -> Vec<NodeId> {
    canonical(doc.nodes().map(|v| doc.root_path(v).iter().map(|&a| down[a]).collect::<Vec<_>>()))
}

/// `⊒` as the greatest fixpoint, by deletion from the equal-label pairs.
pub fn down_related(doc: &Document) -> Relation {
    let n = doc.len();
    let mut r = Relation::from_pairs(
        n,
        doc.nodes().flat_map(|v| doc.nodes().filter(move |&w| doc.label(v) == doc.label(w)).map(move |w| (v, w))),
    );
    loop {
        let mut changed = false;
        for v1 in doc.nodes() {
            for v2 in doc.nodes() {
                if r.contains(v1, v2)
                    && !doc.children(v1).iter().all(|&c1| doc.children(v2).iter().any(|&c2| r.contains(c1, c2)))
                {
                    r.remove(v1, v2);
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// `⊒` by rank-bounded iteration: `|V|` rounds of the defining step.
pub fn down_related_bounded(doc: &Document) -> Relation {
    let n = doc.len();
    let base = Relation::from_pairs(
        n,
        doc.nodes().flat_map(|v| doc.nodes().filter(move |&w| doc.label(v) == doc.label(w)).map(move |w| (v, w))),
    );
    let mut r = base.clone();
    for _ in 0..n {
        let prev = r.clone();
        r = Relation::from_pairs(
            n,
            base.pairs().filter(|&(v1, v2)| {
                doc.children(v1).iter().all(|&c1| doc.children(v2).iter().any(|&c2| prev.contains(c1, c2)))
            }),
        );
    }
    r
}

fn pointwise_on_root_paths(doc: &Document, m: &Relation) -> Relation {
    let n = doc.len();
    let mut out = Relation::new(n);
    for v1 in doc.nodes() {
        for v2 in doc.nodes() {
            if doc.depth(v1) == doc.depth(v2)
                && (0..=doc.depth(v1)).all(|i| m.contains(doc.ancestor_unchecked(v1, i), doc.ancestor_unchecked(v2, i)))
            {
                out.insert(v1, v2);
            }
        }
    }
    out
}

fn symmetric_blocks(m: &Relation) -> Vec<NodeId> {
    let n = m.universe();
    (0..n).map(|v| (0..=v).find(|&u| m.contains(u, v) && m.contains(v, u)).unwrap()).collect()
}

/// `≥↑`: `v1`'s root path labels match the lowest part of `v2`'s.
pub fn up_related(doc: &Document) -> Relation {
    let n = doc.len();
    let mut out = Relation::new(n);
    for v1 in doc.nodes() {
        for v2 in doc.nodes() {
            if doc.depth(v1) <= doc.depth(v2)
                && (0..=doc.depth(v1))
                    .all(|i| doc.label(doc.ancestor_unchecked(v1, i)) == doc.label(doc.ancestor_unchecked(v2, i)))
            {
                out.insert(v1, v2);
            }
        }
    }
    out
}

pub fn node_relation(doc: &Document, notion: NodeNotion) -> NodeRelationIndex {
    use NodeRelationData::*;
    let data = match notion {
        NodeNotion::DownK(k) => Partition(down_k_blocks(doc, k.max(1))),
        NodeNotion::UpDownK(k) => Partition(up_down_blocks(doc, &down_k_blocks(doc, k.max(1)))),
        NodeNotion::Upward => Partition(canonical(
            doc.nodes().map(|v| doc.root_path(v).iter().map(|&a| doc.label(a).clone()).collect::<Vec<_>>()),
        )),
        NodeNotion::DownRelated => Preorder(down_related(doc)),
        NodeNotion::WeakDown => Partition(symmetric_blocks(&down_related(doc))),
        NodeNotion::Related => Preorder(pointwise_on_root_paths(doc, &down_related(doc))),
        NodeNotion::WeakUpDown => Partition(symmetric_blocks(&pointwise_on_root_paths(doc, &down_related(doc)))),
        NodeNotion::UpRelated => Preorder(up_related(doc)),
    };
    NodeRelationIndex { notion, data }
}

/// Whether pairs are compared by signature subsumption or congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairMode {
    Subsumes,
    Congruent,
}

/// `≳_θ` or `≅_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairTheta {
    pub theta: NodeNotion,
    pub mode: PairMode,
}

impl PairTheta {
    pub fn new(theta: NodeNotion, mode: PairMode) -> PairTheta {
        PairTheta { theta, mode }
    }
}

/// Pair relation test against a precomputed node relation.
pub struct PairRelator<'d> {
    doc: &'d Document,
    index: NodeRelationIndex,
    mode: PairMode,
}

impl<'d> PairRelator<'d> {
    pub fn new(doc: &'d Document, theta: PairTheta) -> Self {
        PairRelator { doc, index: node_relation(doc, theta.theta), mode: theta.mode }
    }

    pub fn index(&self) -> &NodeRelationIndex {
        &self.index
    }

    pub fn related(&self, p1: Pair, p2: Pair) -> bool {
        let doc = self.doc;
        let s = sig(doc, p1.0, p1.1);
        let shape_ok = match self.mode {
            PairMode::Subsumes => subsumes_unchecked(doc, p1, p2),
            PairMode::Congruent => subsumes_unchecked(doc, p1, p2) && sig(doc, p2.0, p2.1).shape() == s.shape(),
        };
        shape_ok && s.path.iter().enumerate().all(|(i, &y1)| self.index.related(y1, corresponding(doc, &s, i, p2)))
    }
}

/// `p1 ≳_θ p2` or `p1 ≅_θ p2`: the signature condition plus
/// `y1 θ y2` for every node `y1` on the path of `p1`.
pub fn pair_related(doc: &Document, theta: PairTheta, p1: Pair, p2: Pair) -> Result<bool> {
    for x in [p1.0, p1.1, p2.0, p2.1] {
        doc.check(x)?;
    }
    Ok(PairRelator::new(doc, theta).related(p1, p2))
}
