//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treerel::expr::OpSet;
use treerel::gen::{random_document_exact, ExprGen};
use treerel::{Document, Expr, Relation};

pub const LABELS: &[&str] = &["a", "b", "c"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random document with exactly `n` nodes, fixed by `seed`.
pub fn document(seed: u64, n: usize) -> Document {
    random_document_exact(&mut rng(seed), n, LABELS)
}

/// `count` random expressions over every operator, each of AST size `size`.
pub fn expressions(seed: u64, count: usize, size: usize) -> Vec<Expr> {
    let ops = OpSet { down: true, up: true, proj1: true, proj2: true, inverse: true, intersect: true, diff: true };
    let gen = ExprGen::new(ops, 3, LABELS);
    let mut r = rng(seed);
    (0..count).map(|_| gen.expr(&mut r, size)).collect()
}

/// A random relation containing roughly one pair in `density`.
pub fn relation(seed: u64, doc: &Document, density: u32) -> Relation {
    use rand::Rng;
    let mut r = rng(seed);
    let n = doc.len();
    let pairs: Vec<_> = (0..n).flat_map(|v| (0..n).map(move |w| (v, w))).collect();
    Relation::from_pairs(n, pairs.into_iter().filter(|_| r.gen_ratio(1, density)))
}
