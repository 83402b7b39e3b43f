//! Characteristic expressions and witness synthesis.
//!
//! Every builder here produces a standard-shaped expression; counting above
//! the fragment's bound is expanded afterwards by the counting templates.

use std::collections::HashMap;
use std::sync::Arc;

use crate::decide::{fragment_profile, Counterexample, Decider};
use crate::document::{Document, NodeId};
use crate::equiv::{down_k_blocks, node_relation, NodeNotion};
use crate::error::{Error, Result};
use crate::eval::{NodeSet, Relation};
use crate::expr::{Expr, Family, Fragment};
use crate::rewrite::expand_counting_above;
use crate::signature::{sig, Pair};

fn arc(e: Expr) -> Arc<Expr> {
    Arc::new(e)
}

fn compose_all(parts: Vec<Arc<Expr>>) -> Expr {
    let mut it = parts.into_iter().rev();
    let last = it.next().expect("nonempty");
    let mut acc = last;
    for p in it {
        acc = arc(Expr::Compose(p, acc));
    }
    Arc::try_unwrap(acc).unwrap_or_else(|a| (*a).clone())
}

/// `π1(ε − e)`: "no `e`-successor".
fn not(e: Expr) -> Expr {
    Expr::p1(Expr::diff(Expr::Eps, e))
}

/// Block ids per node, and the expression built for each block.
type Memo = (Vec<NodeId>, HashMap<NodeId, Arc<Expr>>);

/// Builds characteristic expressions on one document, sharing
/// subexpressions between nodes of the same block.
pub struct Characteristics<'d> {
    doc: &'d Document,
    down: HashMap<u32, Memo>,
    weak: Option<Memo>,
}

impl<'d> Characteristics<'d> {
    pub fn new(doc: &'d Document) -> Self {
        Characteristics { doc, down: HashMap::new(), weak: None }
    }

    fn label(&self, v: NodeId) -> Expr {
        Expr::LabelTest(self.doc.label(v).clone())
    }

    /// A predicate holding exactly at the nodes `≡↓k` to `v`.
    pub fn down_k(&mut self, v: NodeId, k: u32) -> Arc<Expr> {
        let k = k.max(1);
        if !self.down.contains_key(&k) {
            self.down.insert(k, (down_k_blocks(self.doc, k), HashMap::new()));
        }
        self.down_k_rec(v, k)
    }

    fn down_k_rec(&mut self, v: NodeId, k: u32) -> Arc<Expr> {
        let b = self.down[&k].0[v];
        if let Some(e) = self.down[&k].1.get(&b) {
            return e.clone();
        }
        // Child blocks with their representatives and counts, in block order.
        let mut counts: Vec<(NodeId, NodeId, u32)> = Vec::new();
        for &c in self.doc.children(v) {
            let cb = self.down[&k].0[c];
            match counts.iter_mut().find(|(x, _, _)| *x == cb) {
                Some(t) => t.2 += 1,
                None => counts.push((cb, c, 1)),
            }
        }
        counts.sort_unstable();
        let mut parts = vec![arc(self.label(v))];
        let mut alts = Vec::new();
        for &(_, c, n) in &counts {
            let chi = self.down_k_rec(c, k);
            let m = n.min(k);
            parts.push(arc(Expr::Count(m, chi.clone())));
            if m < k {
                parts.push(arc(not(Expr::Count(m + 1, chi.clone()))));
            }
            alts.push(chi);
        }
        let no_other = if alts.is_empty() {
            not(Expr::p1(Expr::Down))
        } else {
            let u = alts.into_iter().map(|a| (*a).clone()).reduce(Expr::union).unwrap();
            not(Expr::p1(Expr::comp(Expr::Down, not(u))))
        };
        parts.push(arc(no_other));
        let e = arc(compose_all(parts));
        self.down.get_mut(&k).unwrap().1.insert(b, e.clone());
        e
    }

    /// A predicate holding at exactly the nodes `u` with `v ⊒ u`.
    pub fn weak_down(&mut self, v: NodeId) -> Arc<Expr> {
        if self.weak.is_none() {
            let idx = node_relation(self.doc, NodeNotion::WeakDown);
            let blocks = self.doc.nodes().map(|x| idx.block(x).unwrap()).collect();
            self.weak = Some((blocks, HashMap::new()));
        }
        self.weak_rec(v)
    }

    fn weak_rec(&mut self, v: NodeId) -> Arc<Expr> {
        let b = self.weak.as_ref().unwrap().0[v];
        if let Some(e) = self.weak.as_ref().unwrap().1.get(&b) {
            return e.clone();
        }
        let mut reps: Vec<(NodeId, NodeId)> = Vec::new();
        for &c in self.doc.children(v) {
            let cb = self.weak.as_ref().unwrap().0[c];
            if !reps.iter().any(|&(x, _)| x == cb) {
                reps.push((cb, c));
            }
        }
        reps.sort_unstable();
        let mut parts = vec![arc(self.label(v))];
        for (_, c) in reps {
            let chi = self.weak_rec(c);
            parts.push(arc(Expr::Proj1(arc(Expr::Compose(arc(Expr::Down), chi)))));
        }
        let e = arc(compose_all(parts));
        self.weak.as_mut().unwrap().1.insert(b, e.clone());
        e
    }

    /// `π2(π1(ε − π2(↓))/χ(a0)/↓/…/↓/χ(ad))`: the nodes `≈k` to `v`.
    pub fn up_down_k(&mut self, v: NodeId, k: u32) -> Expr {
        let mut parts = vec![arc(not(Expr::p2(Expr::Down)))];
        for (i, a) in self.doc.root_path(v).into_iter().enumerate() {
            if i > 0 {
                parts.push(arc(Expr::Down));
            }
            parts.push(self.down_k(a, k));
        }
        Expr::p2(compose_all(parts))
    }

    /// `π2(π1(↓^H)/χ⊒(a0)/↓/…/↓/χ⊒(ad))` with `H` the height of the
    /// document: the nodes `u` with `v ⊵ u`.
    pub fn weak_up_down(&mut self, v: NodeId) -> Expr {
        let h = self.doc.height(self.doc.root());
        let mut parts = vec![arc(if h == 0 { Expr::Eps } else { Expr::p1(Expr::up_down(0, h)) })];
        for (i, a) in self.doc.root_path(v).into_iter().enumerate() {
            if i > 0 {
                parts.push(arc(Expr::Down));
            }
            parts.push(self.weak_down(a));
        }
        Expr::p2(compose_all(parts))
    }

    /// `π1(λ̂(v)/↑/…/↑/λ̂(a0)[/π1(ε − π1(↑))])`: with `exact` the nodes
    /// `≡↑` to `v`, otherwise the nodes `u` with `v ≥↑ u`.
    pub fn upward(&mut self, v: NodeId, exact: bool) -> Expr {
        let mut parts = Vec::new();
        for (i, a) in self.doc.root_path(v).into_iter().rev().enumerate() {
            if i > 0 {
                parts.push(Expr::Up);
            }
            parts.push(self.label(a));
        }
        if exact {
            parts.push(not(Expr::p1(Expr::Up)));
        }
        Expr::p1(Expr::chain(parts))
    }

    /// The characteristic predicate of `v` for `notion`. For preorders it
    /// holds at exactly the nodes `u` with `v θ u`.
    pub fn of(&mut self, v: NodeId, notion: NodeNotion) -> Expr {
        match notion {
            NodeNotion::DownK(k) => (*self.down_k(v, k)).clone(),
            NodeNotion::UpDownK(k) => self.up_down_k(v, k),
            NodeNotion::Upward => self.upward(v, true),
            NodeNotion::UpRelated => self.upward(v, false),
            NodeNotion::WeakDown | NodeNotion::DownRelated => (*self.weak_down(v)).clone(),
            NodeNotion::WeakUpDown | NodeNotion::Related => self.weak_up_down(v),
        }
    }
}

/// The characteristic predicate of `v` for `notion`, unexpanded.
pub fn characteristic(doc: &Document, v: NodeId, notion: NodeNotion) -> Result<Expr> {
    doc.check(v)?;
    Ok(Characteristics::new(doc).of(v, notion))
}

/// Synthesis of expressions within one fragment on one document.
pub struct Synthesizer<'d> {
    decider: Decider<'d>,
    chars: Characteristics<'d>,
    fragment: Fragment,
}

impl<'d> Synthesizer<'d> {
    pub fn new(doc: &'d Document, fragment: &Fragment) -> Result<Self> {
        Ok(Synthesizer {
            decider: Decider::new(doc, fragment)?,
            chars: Characteristics::new(doc),
            fragment: fragment.clone(),
        })
    }

    pub fn decider(&self) -> &Decider<'d> {
        &self.decider
    }

    fn doc(&self) -> &'d Document {
        self.decider.doc()
    }

    fn fit(&self, e: Expr) -> Result<Expr> {
        expand_counting_above(&e, self.fragment.count_bound, self.fragment.core)
    }

    /// In-fragment predicate holding at `u` iff `v ≡exp u`, or for positive
    /// fragments iff `v ≥exp u`.
    pub fn node_characteristic(&mut self, v: NodeId) -> Result<Expr> {
        self.doc().check(v)?;
        let notion = self.decider.profile().directional.unwrap_or(self.decider.profile().node_notion);
        let e = self.chars.of(v, notion);
        self.fit(e)
    }

    /// An in-fragment predicate true at exactly one of `v1`, `v2`, if any.
    pub fn distinguisher(&mut self, v1: NodeId, v2: NodeId) -> Result<Option<Expr>> {
        self.doc().check(v1)?;
        self.doc().check(v2)?;
        let p = self.decider.profile().clone();
        let idx = node_relation(self.doc(), p.directional.unwrap_or(p.node_notion));
        if !idx.related(v1, v2) {
            return self.node_characteristic(v1).map(Some);
        }
        if !idx.related(v2, v1) {
            return self.node_characteristic(v2).map(Some);
        }
        Ok(None)
    }

    /// An expression containing `p` and contained in every definable
    /// relation that contains `p`.
    pub fn separation(&mut self, (v, w): Pair) -> Result<Expr> {
        let doc = self.doc();
        doc.check(v)?;
        doc.check(w)?;
        let p = self.decider.profile().clone();
        if !p.shape.admits(doc, (v, w)) {
            return Err(Error::Shape(v, w));
        }
        let s = sig(doc, v, w);
        let k = p.effective_k();
        let e = match p.fragment.family {
            Family::Sd | Family::SdPos | Family::Wd | Family::WdPos => {
                let start = match p.fragment.family {
                    Family::Sd => (*self.chars.down_k(v, k)).clone(),
                    Family::SdPos => (*self.chars.weak_down(v)).clone(),
                    Family::Wd => self.chars.up_down_k(v, k),
                    _ => self.chars.weak_up_down(v),
                };
                let mut parts = vec![arc(start)];
                for &y in &s.path[1..] {
                    parts.push(arc(Expr::Down));
                    parts.push(match p.fragment.family {
                        Family::Sd | Family::Wd => self.chars.down_k(y, k),
                        _ => self.chars.weak_down(y),
                    });
                }
                compose_all(parts)
            }
            Family::Su | Family::SuPos => {
                let u = self.chars.upward(v, p.fragment.family == Family::Su);
                Expr::chain(std::iter::once(u).chain(std::iter::repeat_n(Expr::Up, s.up)))
            }
            Family::XPath | Family::CoreXPath | Family::PosXPath => {
                let (a, b) = if p.fragment.family == Family::PosXPath {
                    (self.chars.weak_up_down(v), self.chars.weak_up_down(w))
                } else {
                    (self.chars.up_down_k(v, k), self.chars.up_down_k(w, k))
                };
                let core = Expr::chain([a, s.expr(), b]);
                if p.fragment.family == Family::XPath && !s.is_vertical() {
                    Expr::diff(core, Expr::up_down(s.up - 1, s.down - 1))
                } else {
                    core
                }
            }
            Family::Custom => return Err(Error::UnknownFragment(p.fragment.name.clone())),
        };
        self.fit(e)
    }

    /// An in-fragment expression evaluating to `r`, or the reason none exists.
    pub fn witness(&mut self, r: &Relation) -> Result<Expr> {
        let doc = self.doc();
        if r.universe() != doc.len() {
            return Err(Error::InvalidNode { node: r.universe(), len: doc.len() });
        }
        let verdict = self.decider.global(r);
        match verdict.counterexample {
            None => {}
            Some(Counterexample::Shape((v, w))) => return Err(Error::Shape(v, w)),
            Some(Counterexample::Pair { from, to }) => return Err(Error::NotClosed(from.0, from.1, to.0, to.1)),
            Some(_) => unreachable!("global verdicts carry pair counterexamples"),
        }
        let mut covered = Relation::new(doc.len());
        let mut parts = Vec::new();
        for p in r.pairs().collect::<Vec<_>>() {
            if covered.contains(p.0, p.1) {
                continue;
            }
            for (a, b) in self.decider.successors(p) {
                covered.insert(a, b);
            }
            parts.push(self.separation(p)?);
        }
        Ok(Expr::union_all(parts))
    }

    /// An in-fragment expression `e` with `e(v) = w`.
    pub fn local(&mut self, v: NodeId, w: &NodeSet) -> Result<Expr> {
        let doc = self.doc();
        doc.check(v)?;
        match self.decider.local(v, w).counterexample {
            None => {}
            Some(Counterexample::NodeShape(x)) => return Err(Error::Shape(v, x)),
            Some(Counterexample::Node { from, to }) => return Err(Error::NotClosed(v, from, v, to)),
            Some(_) => unreachable!("local verdicts carry node counterexamples"),
        }
        let seed = Relation::from_pairs(doc.len(), w.iter().map(|x| (v, x)));
        let closed = self.decider.close(&seed);
        self.witness(&closed)
    }
}

pub fn synthesize_witness(doc: &Document, r: &Relation, fragment: &Fragment) -> Result<Expr> {
    Synthesizer::new(doc, fragment)?.witness(r)
}

pub fn synthesize_local(doc: &Document, v: NodeId, w: &NodeSet, fragment: &Fragment) -> Result<Expr> {
    Synthesizer::new(doc, fragment)?.local(v, w)
}

pub fn distinguish(doc: &Document, v1: NodeId, v2: NodeId, fragment: &Fragment) -> Result<Option<Expr>> {
    fragment_profile(fragment)?;
    Synthesizer::new(doc, fragment)?.distinguisher(v1, v2)
}
