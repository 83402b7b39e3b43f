//! Brute-force ground truth by exhaustive expression enumeration.
//!
//! Expressions are enumerated bottom-up by size (AST constructor count,
//! `ch_k` counting 1). The pruned search keeps one representative per
//! relation value on the document, which preserves every reachable
//! relation since evaluation is compositional.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::document::{Document, Label, NodeId};
use crate::error::Result;
use crate::eval::{count_relation, down_relation, NodeSet, Relation};
use crate::expr::{print_expr, Expr, Fragment};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_size: usize,
    /// Label alphabet; `None` means the labels of the document.
    pub labels: Option<Vec<Label>>,
}

impl OracleBudget {
    pub fn new(max_size: usize) -> OracleBudget {
        OracleBudget { max_size: max_size.max(1), labels: None }
    }

    pub fn with_labels(max_size: usize, labels: &[&str]) -> OracleBudget {
        OracleBudget {
            max_size: max_size.max(1),
            labels: Some(labels.iter().map(|l| Label::new(l).expect("valid label")).collect()),
        }
    }

    fn alphabet(&self, doc: Option<&Document>) -> Vec<Label> {
        match (&self.labels, doc) {
            (Some(l), _) => l.clone(),
            (None, Some(d)) => d.alphabet(),
            (None, None) => Vec::new(),
        }
    }
}

/// Plain expressions may occur anywhere; boolean combinations containing
/// `∩`/`−` may only occur under a projection in core fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Cat {
    Plain,
    Bool,
}

#[derive(Clone, Copy)]
enum Op {
    P1,
    P2,
    Inv,
    Ch(u32),
    Comp,
    Union,
    Inter,
    Diff,
}

fn unary_ops(f: &Fragment) -> Vec<Op> {
    let mut ops = Vec::new();
    if f.ops.proj1 {
        ops.push(Op::P1);
    }
    if f.ops.proj2 {
        ops.push(Op::P2);
    }
    if f.ops.inverse {
        ops.push(Op::Inv);
    }
    ops.extend((1..=f.count_bound).map(Op::Ch));
    ops
}

fn binary_ops(f: &Fragment) -> Vec<Op> {
    let mut ops = vec![Op::Comp, Op::Union];
    if f.ops.intersect {
        ops.push(Op::Inter);
    }
    if f.ops.diff {
        ops.push(Op::Diff);
    }
    ops
}

fn atoms(f: &Fragment, labels: &[Label]) -> Vec<Expr> {
    let mut out = vec![Expr::Empty, Expr::Eps];
    out.extend(labels.iter().cloned().map(Expr::LabelTest));
    if f.ops.down {
        out.push(Expr::Down);
    }
    if f.ops.up {
        out.push(Expr::Up);
    }
    out
}

/// Category of the result, or `None` if the combination is ill-formed.
fn unary_cat(op: Op, a: Cat) -> Option<Cat> {
    match op {
        Op::P1 | Op::P2 => Some(Cat::Plain),
        _ if a == Cat::Bool => None,
        _ => Some(Cat::Plain),
    }
}

fn binary_cat(f: &Fragment, op: Op, a: Cat, b: Cat) -> Option<Cat> {
    if !f.core {
        return Some(Cat::Plain);
    }
    match op {
        Op::Comp => (a == Cat::Plain && b == Cat::Plain).then_some(Cat::Plain),
        Op::Union => Some(a.max(b)),
        _ => Some(Cat::Bool),
    }
}

fn build1(op: Op, a: &Arc<Expr>) -> Expr {
    match op {
        Op::P1 => Expr::Proj1(a.clone()),
        Op::P2 => Expr::Proj2(a.clone()),
        Op::Inv => Expr::Inverse(a.clone()),
        Op::Ch(k) => Expr::Count(k, a.clone()),
        _ => unreachable!(),
    }
}

fn build2(op: Op, a: &Arc<Expr>, b: &Arc<Expr>) -> Expr {
    match op {
        Op::Comp => Expr::Compose(a.clone(), b.clone()),
        Op::Union => Expr::Union(a.clone(), b.clone()),
        Op::Inter => Expr::Intersect(a.clone(), b.clone()),
        Op::Diff => Expr::Diff(a.clone(), b.clone()),
        _ => unreachable!(),
    }
}

/// Every fragment-wellformed expression of size `≤ max_size` over the
/// budget's alphabet, each exactly once, in nondecreasing size.
pub fn enum_exprs(fragment: &Fragment, budget: &OracleBudget) -> Vec<Expr> {
    enum_exprs_over(fragment, budget, None)
}

/// As [`enum_exprs`], defaulting the alphabet to `doc`'s labels.
pub fn enum_exprs_over(fragment: &Fragment, budget: &OracleBudget, doc: Option<&Document>) -> Vec<Expr> {
    let labels = budget.alphabet(doc);
    let mut levels: Vec<Vec<(Arc<Expr>, Cat)>> = vec![Vec::new()];
    let un = unary_ops(fragment);
    let bin = binary_ops(fragment);
    for s in 1..=budget.max_size {
        let mut level = Vec::new();
        if s == 1 {
            level.extend(atoms(fragment, &labels).into_iter().map(|e| (Arc::new(e), Cat::Plain)));
        } else {
            for &op in &un {
                for (a, ca) in &levels[s - 1] {
                    if let Some(c) = unary_cat(op, *ca) {
                        level.push((Arc::new(build1(op, a)), c));
                    }
                }
            }
            for &op in &bin {
                for i in 1..s - 1 {
                    for (a, ca) in &levels[i] {
                        for (b, cb) in &levels[s - 1 - i] {
                            if let Some(c) = binary_cat(fragment, op, *ca, *cb) {
                                level.push((Arc::new(build2(op, a, b)), c));
                            }
                        }
                    }
                }
            }
        }
        levels.push(level);
    }
    levels
        .into_iter()
        .flatten()
        .filter(|(_, c)| *c == Cat::Plain)
        .map(|(e, _)| Arc::try_unwrap(e).unwrap_or_else(|a| (*a).clone()))
        .collect()
}

#[derive(Clone)]
struct Item {
    expr: Arc<Expr>,
    rel: Arc<Relation>,
    cat: Cat,
}

/// Semantically pruned enumeration on one document.
pub struct Enumerator<'d> {
    doc: &'d Document,
    fragment: Fragment,
    labels: Vec<Label>,
    levels: Vec<Vec<Item>>,
    seen: HashMap<Arc<Relation>, Cat>,
}

struct LevelOut {
    items: Vec<Item>,
    hits: Vec<Arc<Expr>>,
}

impl<'d> Enumerator<'d> {
    pub fn new(doc: &'d Document, fragment: &Fragment, budget: &OracleBudget) -> Self {
        Enumerator {
            doc,
            fragment: fragment.clone(),
            labels: budget.alphabet(Some(doc)),
            levels: vec![Vec::new()],
            seen: HashMap::new(),
        }
    }

    /// Number of sizes enumerated so far.
    pub fn size(&self) -> usize {
        self.levels.len() - 1
    }

    /// Distinct relations of wellformed expressions found so far.
    pub fn relations(&self) -> BTreeSet<Relation> {
        self.seen.iter().filter(|(_, c)| **c == Cat::Plain).map(|(r, _)| (**r).clone()).collect()
    }

    /// Representatives found so far, with their relations.
    pub fn representatives(&self) -> impl Iterator<Item = (&Expr, &Relation)> {
        self.levels.iter().flatten().filter(|i| i.cat == Cat::Plain).map(|i| (&*i.expr, &*i.rel))
    }

    fn eval1(&self, op: Op, a: &Relation) -> Relation {
        match op {
            Op::P1 => Relation::diagonal(&a.domain()),
            Op::P2 => Relation::diagonal(&a.range()),
            Op::Inv => a.transpose(),
            Op::Ch(k) => count_relation(self.doc, k, &a.domain()),
            _ => unreachable!(),
        }
    }

    fn eval2(op: Op, a: &Relation, b: &Relation) -> Relation {
        match op {
            Op::Comp => a.compose(b),
            Op::Union => a.union(b),
            Op::Inter => a.intersect(b),
            Op::Diff => a.diff(b),
            _ => unreachable!(),
        }
    }

    fn fresh(&self, rel: &Relation, cat: Cat) -> bool {
        match self.seen.get(rel) {
            None => true,
            Some(c) => cat < *c,
        }
    }

    /// Builds level `s`. Candidates satisfying `hit` (plain only) are
    /// returned unpruned; `last` skips building what no later level needs.
    fn level(&self, s: usize, hit: &(dyn Fn(&Relation) -> bool + Sync), last: bool) -> LevelOut {
        let n = self.doc.len();
        let mut cands: Vec<(Expr, Relation, Cat)> = Vec::new();
        if s == 1 {
            let down = down_relation(self.doc);
            for e in atoms(&self.fragment, &self.labels) {
                let r = match &e {
                    Expr::Empty => Relation::new(n),
                    Expr::Eps => Relation::identity(n),
                    Expr::LabelTest(l) => {
                        Relation::from_pairs(n, self.doc.nodes_with_label(l).iter().map(|&v| (v, v)))
                    }
                    Expr::Down => down.clone(),
                    _ => down.transpose(),
                };
                cands.push((e, r, Cat::Plain));
            }
            return self.collect(cands.into_iter(), hit, last);
        }
        // One job per (op, left size); merged deterministically below.
        let mut jobs: Vec<(Op, usize)> = unary_ops(&self.fragment).into_iter().map(|op| (op, 0)).collect();
        for op in binary_ops(&self.fragment) {
            for i in 1..s - 1 {
                jobs.push((op, i));
            }
        }
        let outs: Vec<LevelOut> = jobs
            .par_iter()
            .map(|&(op, i)| {
                let mut local: Vec<(Expr, Relation, Cat)> = Vec::new();
                if i == 0 {
                    for a in &self.levels[s - 1] {
                        if let Some(c) = unary_cat(op, a.cat) {
                            if last && c == Cat::Bool {
                                continue;
                            }
                            let r = self.eval1(op, &a.rel);
                            if last || self.fresh(&r, c) || (c == Cat::Plain && hit(&r)) {
                                local.push((build1(op, &a.expr), r, c));
                            }
                        }
                    }
                } else {
                    let commutes = matches!(op, Op::Union | Op::Inter);
                    let j = s - 1 - i;
                    if commutes && i > j {
                        return LevelOut { items: Vec::new(), hits: Vec::new() };
                    }
                    for (ai, a) in self.levels[i].iter().enumerate() {
                        for (bi, b) in self.levels[j].iter().enumerate() {
                            if commutes && i == j && bi < ai {
                                continue;
                            }
                            let Some(c) = binary_cat(&self.fragment, op, a.cat, b.cat) else { continue };
                            if last && c == Cat::Bool {
                                continue;
                            }
                            let r = Self::eval2(op, &a.rel, &b.rel);
                            if last || self.fresh(&r, c) || (c == Cat::Plain && hit(&r)) {
                                local.push((build2(op, &a.expr, &b.expr), r, c));
                            }
                        }
                    }
                }
                self.collect(local.into_iter(), hit, last)
            })
            .collect();
        self.merge(outs)
    }

    fn collect(&self, cands: impl Iterator<Item = (Expr, Relation, Cat)>, hit: &dyn Fn(&Relation) -> bool, last: bool) -> LevelOut {
        let mut best: HashMap<Relation, (Cat, Expr)> = HashMap::new();
        let mut hits = Vec::new();
        for (e, r, c) in cands {
            if c == Cat::Plain && hit(&r) {
                hits.push(Arc::new(e.clone()));
            }
            if last || !self.fresh(&r, c) {
                continue;
            }
            match best.get_mut(&r) {
                Some(slot) => {
                    if (c, &e) < (slot.0, &slot.1) {
                        *slot = (c, e);
                    }
                }
                None => {
                    best.insert(r, (c, e));
                }
            }
        }
        let items = best.into_iter().map(|(r, (cat, e))| Item { expr: Arc::new(e), rel: Arc::new(r), cat }).collect();
        LevelOut { items, hits }
    }

    fn merge(&self, outs: Vec<LevelOut>) -> LevelOut {
        let mut best: HashMap<Arc<Relation>, Item> = HashMap::new();
        let mut hits = Vec::new();
        for o in outs {
            hits.extend(o.hits);
            for it in o.items {
                match best.get_mut(&it.rel) {
                    Some(slot) => {
                        if (it.cat, &*it.expr) < (slot.cat, &*slot.expr) {
                            *slot = it;
                        }
                    }
                    None => {
                        best.insert(it.rel.clone(), it);
                    }
                }
            }
        }
        let mut items: Vec<Item> = best.into_values().collect();
        items.sort_by(|a, b| (a.cat, &*a.expr).cmp(&(b.cat, &*b.expr)));
        LevelOut { items, hits }
    }

    fn push(&mut self, items: Vec<Item>) {
        for it in &items {
            self.seen.insert(it.rel.clone(), it.cat);
        }
        self.levels.push(items);
    }

    /// Enumerates up to `max_size`, stopping at the first size with a
    /// plain expression whose relation satisfies `hit`; returns the hit
    /// with the smallest printed form.
    pub fn search(&mut self, max_size: usize, hit: &(dyn Fn(&Relation) -> bool + Sync)) -> Option<Expr> {
        if let Some(e) = self.representatives().find(|(_, r)| hit(r)).map(|(e, _)| e.clone()) {
            return Some(e);
        }
        while self.size() < max_size {
            let s = self.size() + 1;
            let out = self.level(s, hit, s == max_size);
            if !out.hits.is_empty() {
                return out.hits.iter().map(|e| (print_expr(e), e)).min().map(|(_, e)| (**e).clone());
            }
            self.push(out.items);
        }
        None
    }

    /// Enumerates through `max_size` and returns every distinct relation.
    pub fn run(&mut self, max_size: usize) -> BTreeSet<Relation> {
        while self.size() < max_size {
            let s = self.size() + 1;
            let out = self.level(s, &|_| false, false);
            self.push(out.items);
        }
        self.relations()
    }

    /// Domains of all wellformed relations through `max_size`. The last
    /// level is scanned but not stored.
    pub fn domains(&mut self, max_size: usize) -> BTreeSet<NodeSet> {
        while self.size() + 1 < max_size {
            let s = self.size() + 1;
            let o = self.level(s, &|_| false, false);
            self.push(o.items);
        }
        let mut out: BTreeSet<NodeSet> = self.representatives().map(|(_, r)| r.domain()).collect();
        if self.size() < max_size {
            let o = self.level(self.size() + 1, &|_| false, false);
            out.extend(o.items.iter().filter(|i| i.cat == Cat::Plain).map(|i| i.rel.domain()));
        }
        out
    }
}

/// Smallest enumerated `e` nonempty at exactly one of `v1`, `v2`.
pub fn find_distinguishing(
    doc: &Document,
    fragment: &Fragment,
    v1: NodeId,
    v2: NodeId,
    budget: &OracleBudget,
) -> Result<Option<Expr>> {
    doc.check(v1)?;
    doc.check(v2)?;
    let mut en = Enumerator::new(doc, fragment, budget);
    Ok(en.search(budget.max_size, &|r: &Relation| r.row_is_empty(v1) != r.row_is_empty(v2)))
}

/// Smallest enumerated `e` nonempty at `v1` and empty at `v2`; it refutes
/// `v1 ≥exp v2`.
pub fn find_directional(
    doc: &Document,
    fragment: &Fragment,
    v1: NodeId,
    v2: NodeId,
    budget: &OracleBudget,
) -> Result<Option<Expr>> {
    doc.check(v1)?;
    doc.check(v2)?;
    let mut en = Enumerator::new(doc, fragment, budget);
    Ok(en.search(budget.max_size, &|r: &Relation| !r.row_is_empty(v1) && r.row_is_empty(v2)))
}

/// Smallest enumerated `e` with `e(D) = r`.
pub fn find_defining(doc: &Document, fragment: &Fragment, r: &Relation, budget: &OracleBudget) -> Option<Expr> {
    if r.universe() != doc.len() {
        return None;
    }
    let mut en = Enumerator::new(doc, fragment, budget);
    en.search(budget.max_size, &|x: &Relation| x == r)
}

/// `(v1,v2)` such that every enumerated expression nonempty at `v1` is
/// nonempty at `v2`: bounded `v1 ≥exp v2`.
pub fn bounded_geq(doc: &Document, fragment: &Fragment, budget: &OracleBudget) -> Relation {
    let doms = Enumerator::new(doc, fragment, budget).domains(budget.max_size);
    let n = doc.len();
    let mut out = Relation::full(n);
    for d in &doms {
        for v1 in d.iter() {
            for v2 in 0..n {
                if !d.contains(v2) {
                    out.remove(v1, v2);
                }
            }
        }
    }
    out
}

/// Bounded `≡exp` as a relation.
pub fn bounded_equiv(doc: &Document, fragment: &Fragment, budget: &OracleBudget) -> Relation {
    let g = bounded_geq(doc, fragment, budget);
    g.intersect(&g.transpose())
}

/// Per-pair agreement between structural and bounded semantic verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub fragment: String,
    pub v1: NodeId,
    pub v2: NodeId,
    pub structural: bool,
    pub oracle: bool,
}

/// Compares structural node equivalence against the bounded oracle.
/// Pairs judged distinct structurally are certified by the synthesized
/// distinguisher instead of searching.
pub fn check_node_equivalence(doc: &Document, fragment: &Fragment, max_size: usize) -> Result<Vec<Disagreement>> {
    use crate::decide::nodes_equiv_structural;
    use crate::eval::eval;
    use crate::synth::Synthesizer;
    let oracle = bounded_equiv(doc, fragment, &OracleBudget::new(max_size));
    let mut synth = Synthesizer::new(doc, fragment)?;
    let mut out = Vec::new();
    for v1 in doc.nodes() {
        for v2 in doc.nodes() {
            let s = nodes_equiv_structural(doc, v1, v2, fragment)?;
            let o = if s {
                oracle.contains(v1, v2)
            } else {
                match synth.distinguisher(v1, v2)? {
                    Some(e) => {
                        let dom = eval(&e, doc).domain();
                        dom.contains(v1) == dom.contains(v2)
                    }
                    None => true,
                }
            };
            if s != o {
                out.push(Disagreement { fragment: fragment.name.clone(), v1, v2, structural: s, oracle: o });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{D2, T1};
    use crate::eval::eval;

    fn doc(s: &str) -> Document {
        Document::parse(s).unwrap()
    }

    #[test]
    fn atoms_of_sd() {
        let got: Vec<String> = enum_exprs(&Fragment::sd(1), &OracleBudget::with_labels(1, &["a"]))
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(got, ["0", "self", "~a", "down"]);
    }

    #[test]
    fn distinguishing_examples() {
        let t1 = doc(T1);
        let e = find_distinguishing(&t1, &Fragment::sd(2), 1, 4, &OracleBudget::new(4)).unwrap().unwrap();
        assert_eq!(e.to_string(), "ch2(self)");
        assert!(find_distinguishing(&t1, &Fragment::sd(1), 1, 4, &OracleBudget::new(7)).unwrap().is_none());
        let d2 = doc(D2);
        assert!(find_distinguishing(&d2, &Fragment::xpath(3), 1, 2, &OracleBudget::new(6)).unwrap().is_none());
    }

    #[test]
    fn defining_examples() {
        let d2 = doc(D2);
        let r = Relation::from_pairs(3, [(1, 2), (2, 1)]);
        let e = find_defining(&d2, &Fragment::xpath(3), &r, &OracleBudget::new(5)).unwrap();
        assert_eq!(e.to_string(), "up/down - self");
        assert!(find_defining(&d2, &Fragment::core_xpath(2), &r, &OracleBudget::new(7)).is_none());
        let t1 = doc(T1);
        let down = eval(&Expr::Down, &t1);
        assert_eq!(find_defining(&t1, &Fragment::sd(1), &down, &OracleBudget::new(1)), Some(Expr::Down));
    }

    #[test]
    fn pruning_keeps_every_relation() {
        let t1 = doc(T1);
        for f in [Fragment::sd(1), Fragment::core_xpath(2), Fragment::xpath(1), Fragment::pos_xpath()] {
            let raw: BTreeSet<Relation> =
                enum_exprs_over(&f, &OracleBudget::new(4), Some(&t1)).iter().map(|e| eval(e, &t1)).collect();
            let pruned = Enumerator::new(&t1, &f, &OracleBudget::new(4)).run(4);
            assert_eq!(raw, pruned, "{f}");
        }
    }
}
