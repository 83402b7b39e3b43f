//! Random documents and expressions for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::document::{Document, Label};
use crate::expr::{Expr, OpSet};

/// A random document with `1..=max_nodes` nodes over `labels`.
pub fn random_document<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize, labels: &[&str]) -> Document {
    let n = rng.gen_range(1..=max_nodes.max(1));
    random_document_exact(rng, n, labels)
}

/// A random document with exactly `n` nodes; shapes are drawn by random
/// parent attachment, then renumbered in preorder.
pub fn random_document_exact<R: Rng + ?Sized>(rng: &mut R, n: usize, labels: &[&str]) -> Document {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 1..n {
        let p = rng.gen_range(0..v);
        children[p].push(v);
    }
    let names: Vec<&str> = (0..n).map(|_| *labels.choose(rng).expect("nonempty alphabet")).collect();
    fn write(v: usize, children: &[Vec<usize>], names: &[&str], out: &mut String) {
        out.push('(');
        out.push_str(names[v]);
        for &c in &children[v] {
            out.push(' ');
            write(c, children, names, out);
        }
        out.push(')');
    }
    let mut text = String::new();
    write(0, &children, &names, &mut text);
    Document::parse(&text).expect("generated document parses")
}

/// The same tree with each node's children listed in a random order,
/// together with the map from old ids to new ids.
pub fn shuffle_document<R: Rng + ?Sized>(rng: &mut R, doc: &Document) -> (Document, Vec<usize>) {
    fn write<R: Rng + ?Sized>(rng: &mut R, doc: &Document, v: usize, order: &mut Vec<usize>, out: &mut String) {
        order.push(v);
        out.push('(');
        out.push_str(doc.label(v).as_str());
        let mut cs = doc.children(v).to_vec();
        cs.shuffle(rng);
        for c in cs {
            out.push(' ');
            write(rng, doc, c, order, out);
        }
        out.push(')');
    }
    let mut order = Vec::new();
    let mut text = String::new();
    write(rng, doc, 0, &mut order, &mut text);
    let mut map = vec![0; doc.len()];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new;
    }
    (Document::parse(&text).expect("shuffled document parses"), map)
}

/// Shape of random expressions.
#[derive(Debug, Clone)]
pub struct ExprGen {
    pub ops: OpSet,
    pub count_bound: u32,
    pub labels: Vec<Label>,
}

impl ExprGen {
    pub fn new(ops: OpSet, count_bound: u32, labels: &[&str]) -> ExprGen {
        ExprGen { ops, count_bound, labels: labels.iter().map(|l| Label::new(l).unwrap()).collect() }
    }

    /// A random standard-shaped expression of size at most `size`.
    pub fn expr<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Expr {
        let size = rng.gen_range(1..=size.max(1));
        self.exact(rng, size)
    }

    fn atom<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let mut atoms = vec![Expr::Empty, Expr::Eps];
        atoms.extend(self.labels.iter().cloned().map(Expr::LabelTest));
        if self.ops.down {
            atoms.push(Expr::Down);
            atoms.push(Expr::Down);
        }
        if self.ops.up {
            atoms.push(Expr::Up);
            atoms.push(Expr::Up);
        }
        atoms.choose(rng).unwrap().clone()
    }

    fn exact<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Expr {
        if size <= 1 {
            return self.atom(rng);
        }
        let mut unary: Vec<u8> = Vec::new();
        if self.ops.proj1 {
            unary.push(0);
        }
        if self.ops.proj2 {
            unary.push(1);
        }
        if self.ops.inverse {
            unary.push(2);
        }
        if self.count_bound > 0 {
            unary.push(3);
        }
        let mut binary: Vec<u8> = vec![0, 0, 1];
        if self.ops.intersect {
            binary.push(2);
        }
        if self.ops.diff {
            binary.push(3);
        }
        let use_unary = size == 2 || (!unary.is_empty() && rng.gen_bool(0.3));
        if use_unary {
            if unary.is_empty() {
                return self.atom(rng);
            }
            let inner = self.exact(rng, size - 1);
            return match unary.choose(rng).unwrap() {
                0 => Expr::p1(inner),
                1 => Expr::p2(inner),
                2 => Expr::inv(inner),
                _ => Expr::ch(rng.gen_range(1..=self.count_bound), inner),
            };
        }
        let left = rng.gen_range(1..size - 1);
        let (a, b) = (self.exact(rng, left), self.exact(rng, size - 1 - left));
        match binary.choose(rng).unwrap() {
            0 => Expr::comp(a, b),
            1 => Expr::union(a, b),
            2 => Expr::inter(a, b),
            _ => Expr::diff(a, b),
        }
    }
}
