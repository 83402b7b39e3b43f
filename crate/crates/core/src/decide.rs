//! Structural deciders for node equivalence and for global, local and root
//! definability.

use std::fmt;

use crate::document::{Document, NodeId};
use crate::equiv::{node_relation, NodeNotion, PairMode, PairRelator, PairTheta};
use crate::error::{Error, Result};
use crate::eval::{NodeSet, Relation};
use crate::expr::{Family, Fragment};
use crate::signature::{sig, subsumed_pairs, up_down_targets, Pair};

/// Which pairs a fragment can relate at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Any,
    /// `w` is a descendant of `v` or equal to it.
    Descendant,
    /// `w` is an ancestor of `v` or equal to it.
    Ancestor,
}

impl Shape {
    pub fn admits(&self, doc: &Document, (v, w): Pair) -> bool {
        match self {
            Shape::Any => true,
            Shape::Descendant => doc.is_ancestor_or_self(v, w),
            Shape::Ancestor => doc.is_ancestor_or_self(w, v),
        }
    }
}

/// The structural characterization attached to a fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentProfile {
    pub fragment: Fragment,
    /// Characterizes expression equivalence of nodes.
    pub node_notion: NodeNotion,
    /// Characterizes `≥exp` (positive fragments only).
    pub directional: Option<NodeNotion>,
    /// The pair relation under which definable relations are closed.
    pub pair: PairTheta,
    pub shape: Shape,
}

impl FragmentProfile {
    pub fn pair_mode(&self) -> PairMode {
        self.pair.mode
    }

    /// The counting bound the characterization is stated for.
    pub fn effective_k(&self) -> u32 {
        match self.node_notion {
            NodeNotion::DownK(k) | NodeNotion::UpDownK(k) => k,
            _ => 0,
        }
    }
}

/// The profile row of a registry fragment. `xpath(k)` and `core-xpath(k)`
/// simulate `ch2`/`ch3` (resp. `ch2`) with their other operations, so their
/// node notions use `max(k,3)` and `max(k,2)`.
pub fn fragment_profile(fragment: &Fragment) -> Result<FragmentProfile> {
    use NodeNotion::*;
    let k = fragment.count_bound;
    let cong = |t| PairTheta::new(t, PairMode::Congruent);
    let sub = |t| PairTheta::new(t, PairMode::Subsumes);
    let (node_notion, directional, pair, shape) = match fragment.family {
        Family::Sd => (DownK(k), None, cong(DownK(k)), Shape::Descendant),
        Family::SdPos => (WeakDown, Some(DownRelated), cong(DownRelated), Shape::Descendant),
        Family::Wd => (UpDownK(k), None, cong(UpDownK(k)), Shape::Descendant),
        Family::WdPos => (WeakUpDown, Some(Related), cong(Related), Shape::Descendant),
        Family::Su => (Upward, None, cong(Upward), Shape::Ancestor),
        Family::SuPos => (Upward, Some(UpRelated), cong(UpRelated), Shape::Ancestor),
        Family::XPath => (UpDownK(k.max(3)), None, cong(UpDownK(k.max(3))), Shape::Any),
        Family::CoreXPath => (UpDownK(k.max(2)), None, sub(UpDownK(k.max(2))), Shape::Any),
        Family::PosXPath => (WeakUpDown, Some(Related), sub(Related), Shape::Any),
        Family::Custom => return Err(Error::UnknownFragment(fragment.name.clone())),
    };
    Ok(FragmentProfile { fragment: fragment.clone(), node_notion, directional, pair, shape })
}

/// `v1 ≡exp v2` decided structurally.
pub fn nodes_equiv_structural(doc: &Document, v1: NodeId, v2: NodeId, fragment: &Fragment) -> Result<bool> {
    doc.check(v1)?;
    doc.check(v2)?;
    let p = fragment_profile(fragment)?;
    Ok(node_relation(doc, p.node_notion).related(v1, v2))
}

/// `v1 ≥exp v2` decided structurally; only for positive fragments.
pub fn nodes_geq_structural(doc: &Document, v1: NodeId, v2: NodeId, fragment: &Fragment) -> Result<bool> {
    doc.check(v1)?;
    doc.check(v2)?;
    let p = fragment_profile(fragment)?;
    match p.directional {
        Some(n) => Ok(node_relation(doc, n).related(v1, v2)),
        None => Err(Error::Hypothesis(format!("{} has difference; only the symmetric test applies", fragment.name))),
    }
}

/// Why a relation or node set is not definable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// `p ∈ R` is related to `q ∉ R`.
    Pair { from: Pair, to: Pair },
    /// A pair the fragment cannot produce at all.
    Shape(Pair),
    /// `w1 ∈ W` is related to `w2 ∉ W` from the start node.
    Node { from: NodeId, to: NodeId },
    /// A node outside the reach of the fragment from the start node.
    NodeShape(NodeId),
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterexample::Pair { from, to } => write!(f, "({},{}) ~> ({},{})", from.0, from.1, to.0, to.1),
            Counterexample::Shape(p) => write!(f, "({},{}) shape", p.0, p.1),
            Counterexample::Node { from, to } => write!(f, "{from} ~> {to}"),
            Counterexample::NodeShape(w) => write!(f, "{w} shape"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub definable: bool,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    fn yes() -> Verdict {
        Verdict { definable: true, counterexample: None }
    }

    fn no(c: Counterexample) -> Verdict {
        Verdict { definable: false, counterexample: Some(c) }
    }
}

/// Precomputed state for repeated closure checks on one document.
pub struct Decider<'d> {
    doc: &'d Document,
    profile: FragmentProfile,
    relator: PairRelator<'d>,
}

impl<'d> Decider<'d> {
    pub fn new(doc: &'d Document, fragment: &Fragment) -> Result<Self> {
        let profile = fragment_profile(fragment)?;
        let relator = PairRelator::new(doc, profile.pair);
        Ok(Decider { doc, profile, relator })
    }

    pub fn profile(&self) -> &FragmentProfile {
        &self.profile
    }

    pub fn doc(&self) -> &'d Document {
        self.doc
    }

    pub fn related(&self, p: Pair, q: Pair) -> bool {
        self.relator.related(p, q)
    }

    /// Pairs `q` with `p θ q`, in lexicographic order, found by walking the
    /// pairs that share `p`'s signature (or are subsumed by it).
    pub fn successors(&self, p: Pair) -> Vec<Pair> {
        let s = sig(self.doc, p.0, p.1);
        let cands: Vec<Pair> = match self.profile.pair.mode {
            PairMode::Subsumes => subsumed_pairs(self.doc, p),
            PairMode::Congruent => self
                .doc
                .nodes()
                .flat_map(|v| up_down_targets(self.doc, s.up, s.down, v).into_iter().map(move |w| (v, w)))
                .collect(),
        };
        cands.into_iter().filter(|&q| self.relator.related(p, q)).collect()
    }

    /// Successors by testing every pair of the document.
    pub fn successors_naive(&self, p: Pair) -> Vec<Pair> {
        let n = self.doc.len();
        (0..n).flat_map(|v| (0..n).map(move |w| (v, w))).filter(|&q| self.relator.related(p, q)).collect()
    }

    pub fn global(&self, r: &Relation) -> Verdict {
        self.global_with(r, |p| self.successors(p))
    }

    pub fn global_naive(&self, r: &Relation) -> Verdict {
        self.global_with(r, |p| self.successors_naive(p))
    }

    fn global_with(&self, r: &Relation, succ: impl Fn(Pair) -> Vec<Pair>) -> Verdict {
        if let Some(p) = r.pairs().find(|&p| !self.profile.shape.admits(self.doc, p)) {
            return Verdict::no(Counterexample::Shape(p));
        }
        for p in r.pairs() {
            if let Some(q) = succ(p).into_iter().find(|&(v, w)| !r.contains(v, w)) {
                return Verdict::no(Counterexample::Pair { from: p, to: q });
            }
        }
        Verdict::yes()
    }

    pub fn local(&self, v: NodeId, w: &NodeSet) -> Verdict {
        if let Some(x) = w.iter().find(|&x| !self.profile.shape.admits(self.doc, (v, x))) {
            return Verdict::no(Counterexample::NodeShape(x));
        }
        for w1 in w.iter() {
            for (v2, w2) in self.successors((v, w1)) {
                if v2 == v && !w.contains(w2) {
                    return Verdict::no(Counterexample::Node { from: w1, to: w2 });
                }
            }
        }
        Verdict::yes()
    }

    /// The least relation containing `seed` and closed under the pair relation.
    pub fn close(&self, seed: &Relation) -> Relation {
        let mut out = Relation::new(self.doc.len());
        let mut stack: Vec<Pair> = seed.pairs().filter(|&p| self.profile.shape.admits(self.doc, p)).collect();
        for &(v, w) in &stack {
            out.insert(v, w);
        }
        while let Some(p) = stack.pop() {
            for (v, w) in self.successors(p) {
                if !out.contains(v, w) {
                    out.insert(v, w);
                    stack.push((v, w));
                }
            }
        }
        out
    }

    /// The least node set containing `seed` and closed from `v`.
    pub fn close_local(&self, v: NodeId, seed: &NodeSet) -> NodeSet {
        let mut out = NodeSet::new(self.doc.len());
        let mut stack: Vec<NodeId> = seed.iter().filter(|&x| self.profile.shape.admits(self.doc, (v, x))).collect();
        for &x in &stack {
            out.insert(x);
        }
        while let Some(x) = stack.pop() {
            for (v2, w2) in self.successors((v, x)) {
                if v2 == v && !out.contains(w2) {
                    out.insert(w2);
                    stack.push(w2);
                }
            }
        }
        out
    }

    /// Distinct closures of single nodes from the root. For equivalence
    /// profiles these are the root-view classes.
    pub fn root_classes(&self) -> Vec<NodeSet> {
        let n = self.doc.len();
        let mut out: Vec<NodeSet> = Vec::new();
        for w in 0..n {
            if !self.profile.shape.admits(self.doc, (0, w)) {
                continue;
            }
            let c = self.close_local(0, &NodeSet::from_nodes(n, [w]));
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

pub fn definable_global(doc: &Document, r: &Relation, fragment: &Fragment) -> Result<Verdict> {
    if r.universe() != doc.len() {
        return Err(Error::InvalidNode { node: r.universe(), len: doc.len() });
    }
    Ok(Decider::new(doc, fragment)?.global(r))
}

pub fn definable_local(doc: &Document, v: NodeId, w: &NodeSet, fragment: &Fragment) -> Result<Verdict> {
    doc.check(v)?;
    if w.universe() != doc.len() {
        return Err(Error::InvalidNode { node: w.universe(), len: doc.len() });
    }
    Ok(Decider::new(doc, fragment)?.local(v, w))
}

pub fn definable_root(doc: &Document, w: &NodeSet, fragment: &Fragment) -> Result<Verdict> {
    definable_local(doc, doc.root(), w, fragment)
}

/// Every node set definable from the root, as unions of root classes.
/// For preorder fragments the classes are principal closures and may
/// overlap; their unions are still exactly the closed sets.
pub fn root_definable_sets(doc: &Document, fragment: &Fragment) -> Result<Vec<NodeSet>> {
    let classes = Decider::new(doc, fragment)?.root_classes();
    if classes.len() >= 32 {
        return Err(Error::Hypothesis(format!("{} root classes are too many to enumerate", classes.len())));
    }
    let n = doc.len();
    let mut out = std::collections::BTreeSet::new();
    for mask in 0u64..(1u64 << classes.len()) {
        let mut s = NodeSet::new(n);
        for (i, c) in classes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.union_with(c);
            }
        }
        out.insert(s);
    }
    Ok(out.into_iter().collect())
}
