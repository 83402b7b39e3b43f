//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treerel::document::{D2, D3, T1};
use treerel::expr::{Expr, OpSet};
use treerel::gen::{random_document, ExprGen};
use treerel::{Document, Relation};

pub type Pairs = BTreeSet<(usize, usize)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn canonical_docs() -> Vec<Document> {
    [T1, D2, D3].iter().map(|s| Document::parse(s).unwrap()).collect()
}

pub fn random_docs(seed: u64, count: usize, max_nodes: usize, labels: &[&str]) -> Vec<Document> {
    let mut r = rng(seed);
    (0..count).map(|_| random_document(&mut r, max_nodes, labels)).collect()
}

pub fn all_ops() -> OpSet {
    OpSet { down: true, up: true, proj1: true, proj2: true, inverse: true, intersect: true, diff: true }
}

pub fn gen_all(labels: &[&str]) -> ExprGen {
    ExprGen::new(all_ops(), 3, labels)
}

/// Evaluation written directly from the clause-by-clause semantics, on
/// explicit pair sets and the parent map only.
pub fn naive(e: &Expr, doc: &Document) -> Pairs {
    let n = doc.len();
    let nodes = || 0..n;
    let child = |v: usize, w: usize| doc.parent(w) == Some(v);
    match e {
        Expr::Empty => Pairs::new(),
        Expr::Eps => nodes().map(|v| (v, v)).collect(),
        Expr::LabelTest(l) => nodes().filter(|&v| doc.label(v) == l).map(|v| (v, v)).collect(),
        Expr::Down => nodes().flat_map(|v| nodes().map(move |w| (v, w))).filter(|&(v, w)| child(v, w)).collect(),
        Expr::Up => nodes().flat_map(|v| nodes().map(move |w| (v, w))).filter(|&(v, w)| child(w, v)).collect(),
        Expr::Proj1(a) => naive(a, doc).iter().map(|&(v, _)| (v, v)).collect(),
        Expr::Proj2(a) => naive(a, doc).iter().map(|&(_, w)| (w, w)).collect(),
        Expr::Inverse(a) => naive(a, doc).iter().map(|&(v, w)| (w, v)).collect(),
        Expr::Count(k, a) => {
            let r = naive(a, doc);
            nodes()
                .filter(|&v| nodes().filter(|&w| child(v, w) && r.iter().any(|&(x, _)| x == w)).count() >= *k as usize)
                .map(|v| (v, v))
                .collect()
        }
        Expr::Compose(a, b) => {
            let (ra, rb) = (naive(a, doc), naive(b, doc));
            let mut out = Pairs::new();
            for &(v, u) in &ra {
                for &(u2, w) in &rb {
                    if u == u2 {
                        out.insert((v, w));
                    }
                }
            }
            out
        }
        Expr::Union(a, b) => naive(a, doc).union(&naive(b, doc)).copied().collect(),
        Expr::Intersect(a, b) => naive(a, doc).intersection(&naive(b, doc)).copied().collect(),
        Expr::Diff(a, b) => naive(a, doc).difference(&naive(b, doc)).copied().collect(),
    }
}

pub fn pairs(r: &Relation) -> Pairs {
    r.pairs().collect()
}
