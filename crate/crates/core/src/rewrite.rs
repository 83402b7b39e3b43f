//! Semantics-preserving rewrites: projection/inverse elimination, counting
//! expansion, downward core normalization and up/down duality.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, Fragment};

fn has(e: &Expr, pred: fn(&Expr) -> bool) -> bool {
    e.contains(&pred)
}

/// Removes every `p1`, `p2` and `inv` using `π1(e) = (e/e⁻¹)∩ε`,
/// `π2(e) = (e⁻¹/e)∩ε` and pushing inverses to the leaves. Intersection
/// is spelled `a - (a - b)` when `fragment` has difference but no
/// intersection.
pub fn eliminate_proj_inverse(e: &Expr, fragment: &Fragment) -> Result<Expr> {
    let ops = fragment.ops;
    if !ops.intersect && !ops.diff {
        return Err(Error::Hypothesis(format!("{} has neither intersection nor difference", fragment.name)));
    }
    if ops.down != ops.up {
        return Err(Error::Hypothesis(format!("{} does not have both or neither of down and up", fragment.name)));
    }
    Ok(Eliminator { use_intersect: ops.intersect }.run(e))
}

struct Eliminator {
    use_intersect: bool,
}

impl Eliminator {
    fn meet_eps(&self, a: Expr) -> Expr {
        if self.use_intersect {
            Expr::inter(a, Expr::Eps)
        } else {
            let a = Arc::new(a);
            Expr::Diff(a.clone(), Arc::new(Expr::Diff(a, Arc::new(Expr::Eps))))
        }
    }

    fn run(&self, e: &Expr) -> Expr {
        match e {
            Expr::Empty | Expr::Eps | Expr::LabelTest(_) | Expr::Down | Expr::Up => e.clone(),
            Expr::Proj1(a) => {
                let a = self.run(a);
                let ai = invert(&a);
                self.meet_eps(Expr::comp(a, ai))
            }
            Expr::Proj2(a) => {
                let a = self.run(a);
                let ai = invert(&a);
                self.meet_eps(Expr::comp(ai, a))
            }
            Expr::Inverse(a) => invert(&self.run(a)),
            Expr::Count(k, a) => Expr::ch(*k, self.run(a)),
            Expr::Compose(a, b) => Expr::comp(self.run(a), self.run(b)),
            Expr::Union(a, b) => Expr::union(self.run(a), self.run(b)),
            Expr::Intersect(a, b) => Expr::inter(self.run(a), self.run(b)),
            Expr::Diff(a, b) => Expr::diff(self.run(a), self.run(b)),
        }
    }
}

/// Pushes an inverse through an expression free of projections and inverses.
fn invert(e: &Expr) -> Expr {
    match e {
        Expr::Empty | Expr::Eps | Expr::LabelTest(_) | Expr::Count(..) => e.clone(),
        Expr::Down => Expr::Up,
        Expr::Up => Expr::Down,
        Expr::Compose(a, b) => Expr::comp(invert(b), invert(a)),
        Expr::Union(a, b) => Expr::union(invert(a), invert(b)),
        Expr::Intersect(a, b) => Expr::inter(invert(a), invert(b)),
        Expr::Diff(a, b) => Expr::diff(invert(a), invert(b)),
        Expr::Proj1(_) | Expr::Proj2(_) | Expr::Inverse(_) => unreachable!("eliminated bottom-up"),
    }
}

/// `ch1(e) = π1(↓/e)`.
pub fn ch1_template(e: Expr) -> Expr {
    Expr::p1(Expr::comp(Expr::Down, e))
}

fn sibling_other(e: &Expr) -> Expr {
    let pe = Expr::p1(e.clone());
    Expr::diff(Expr::chain([pe.clone(), Expr::Up, Expr::Down, pe]), Expr::Eps)
}

/// `ch2(e) = π1(↓/(π1(e)/↑/↓/π1(e) − ε))`.
pub fn ch2_template(e: Expr) -> Expr {
    Expr::p1(Expr::comp(Expr::Down, sibling_other(&e)))
}

/// `ch3(e) = π1(↓/((π1(e)/↑/↓/π1(e)−ε)/(π1(e)/↑/↓/π1(e)−ε) − ε))`.
pub fn ch3_template(e: Expr) -> Expr {
    let s = sibling_other(&e);
    Expr::p1(Expr::comp(Expr::Down, Expr::diff(Expr::comp(s.clone(), s), Expr::Eps)))
}

/// `ch2(e)` with the difference directly under a projection:
/// `π1(↓/π1(π1(e)/↑/↓/π1(e) − ε))`.
pub fn ch2_core_template(e: Expr) -> Expr {
    Expr::p1(Expr::comp(Expr::Down, Expr::p1(sibling_other(&e))))
}

/// Replaces every `ch_m`, `m ≤ 3`, by the counting templates.
pub fn expand_counting(e: &Expr) -> Result<Expr> {
    expand_above(e, 0, false)
}

/// Replaces `ch_m` for `m > bound` only; with `core` the core-shaped
/// `ch2` template is used and `ch3` is refused.
pub fn expand_counting_above(e: &Expr, bound: u32, core: bool) -> Result<Expr> {
    expand_above(e, bound, core)
}

fn expand_above(e: &Expr, bound: u32, core: bool) -> Result<Expr> {
    let rec = |a: &Arc<Expr>| expand_above(a, bound, core);
    Ok(match e {
        Expr::Empty | Expr::Eps | Expr::LabelTest(_) | Expr::Down | Expr::Up => e.clone(),
        Expr::Count(k, a) if *k <= bound => Expr::ch(*k, rec(a)?),
        Expr::Count(k, a) => {
            let body = rec(a)?;
            match (k, core) {
                (1, false) => ch1_template(body),
                (2, false) => ch2_template(body),
                (3, false) => ch3_template(body),
                (1, true) => ch1_template(body),
                (2, true) => ch2_core_template(body),
                _ => return Err(Error::Hypothesis(format!("ch{k} has no counting template here"))),
            }
        }
        Expr::Proj1(a) => Expr::p1(rec(a)?),
        Expr::Proj2(a) => Expr::p2(rec(a)?),
        Expr::Inverse(a) => Expr::inv(rec(a)?),
        Expr::Compose(a, b) => Expr::comp(rec(a)?, rec(b)?),
        Expr::Union(a, b) => Expr::union(rec(a)?, rec(b)?),
        Expr::Intersect(a, b) => Expr::inter(rec(a)?, rec(b)?),
        Expr::Diff(a, b) => Expr::diff(rec(a)?, rec(b)?),
    })
}

/// Up/down duality: `↓↔↑`, `π1↔π2`, compositions reversed. The result
/// denotes the transpose of the input. `ch_k(e)` becomes `ch_k(π2(e'))`.
pub fn dualize(e: &Expr) -> Result<Expr> {
    if has(e, |x| matches!(x, Expr::Inverse(_))) {
        return Err(Error::Hypothesis("dualize does not accept inv".into()));
    }
    if has(e, |x| matches!(x, Expr::Down)) && has(e, |x| matches!(x, Expr::Up)) {
        return Err(Error::Hypothesis("dualize needs one-directional navigation".into()));
    }
    Ok(dual(e))
}

fn dual(e: &Expr) -> Expr {
    match e {
        Expr::Empty | Expr::Eps | Expr::LabelTest(_) => e.clone(),
        Expr::Down => Expr::Up,
        Expr::Up => Expr::Down,
        Expr::Proj1(a) => Expr::p2(dual(a)),
        Expr::Proj2(a) => Expr::p1(dual(a)),
        Expr::Count(k, a) => Expr::ch(*k, Expr::p2(dual(a))),
        Expr::Compose(a, b) => Expr::comp(dual(b), dual(a)),
        Expr::Union(a, b) => Expr::union(dual(a), dual(b)),
        Expr::Intersect(a, b) => Expr::inter(dual(a), dual(b)),
        Expr::Diff(a, b) => Expr::diff(dual(a), dual(b)),
        Expr::Inverse(_) => unreachable!("rejected by dualize"),
    }
}

/// A chain `c_0/↓/c_1/…/↓/c_n` of node predicates.
type Chain = Vec<Expr>;

/// Conjunction of node predicates, as composition of diagonals.
fn and(p: &Expr, q: &Expr) -> Expr {
    match (p, q) {
        (Expr::Eps, _) => q.clone(),
        (_, Expr::Eps) => p.clone(),
        (Expr::Empty, _) | (_, Expr::Empty) => Expr::Empty,
        _ if p == q => p.clone(),
        _ => Expr::comp(p.clone(), q.clone()),
    }
}

fn live(c: Chain) -> Option<Chain> {
    if c.contains(&Expr::Empty) {
        None
    } else {
        Some(c)
    }
}

fn chain_expr(c: &Chain) -> Expr {
    let mut parts = Vec::new();
    for (i, p) in c.iter().enumerate() {
        if i > 0 {
            parts.push(Expr::Down);
        }
        if *p != Expr::Eps {
            parts.push(p.clone());
        }
    }
    if parts.is_empty() {
        Expr::Eps
    } else {
        Expr::chain(parts)
    }
}

fn nf_expr(nf: &[Chain]) -> Expr {
    Expr::union_all(nf.iter().map(chain_expr))
}

fn chain_minus(x: &Chain, y: &Chain) -> Vec<Chain> {
    if x.len() != y.len() {
        return vec![x.clone()];
    }
    (0..x.len())
        .filter_map(|j| {
            let mut c = x.clone();
            c[j] = match (&x[j], &y[j]) {
                (_, Expr::Eps) => Expr::Empty,
                (Expr::Empty, _) => Expr::Empty,
                (a, b) => Expr::p1(Expr::diff(a.clone(), b.clone())),
            };
            live(c)
        })
        .collect()
}

fn normal_form(e: &Expr) -> Vec<Chain> {
    match e {
        Expr::Empty => vec![],
        Expr::Eps => vec![vec![Expr::Eps]],
        Expr::LabelTest(_) => vec![vec![e.clone()]],
        Expr::Down => vec![vec![Expr::Eps, Expr::Eps]],
        Expr::Proj1(a) | Expr::Proj2(a) | Expr::Count(_, a) => {
            let body = normal_form(a);
            if body.is_empty() {
                return vec![];
            }
            let body = nf_expr(&body);
            let p = match e {
                Expr::Proj1(_) => Expr::p1(body),
                Expr::Proj2(_) => Expr::p2(body),
                Expr::Count(k, _) => Expr::ch(*k, body),
                _ => unreachable!(),
            };
            vec![vec![p]]
        }
        Expr::Compose(a, b) => {
            let (na, nb) = (normal_form(a), normal_form(b));
            let mut out = Vec::new();
            for x in &na {
                for y in &nb {
                    let mut c: Chain = x[..x.len() - 1].to_vec();
                    c.push(and(x.last().unwrap(), &y[0]));
                    c.extend(y[1..].iter().cloned());
                    out.extend(live(c));
                }
            }
            out
        }
        Expr::Union(a, b) => {
            let mut out = normal_form(a);
            out.extend(normal_form(b));
            out
        }
        Expr::Intersect(a, b) => {
            let (na, nb) = (normal_form(a), normal_form(b));
            let mut out = Vec::new();
            for x in &na {
                for y in &nb {
                    if x.len() == y.len() {
                        out.extend(live(x.iter().zip(y).map(|(p, q)| and(p, q)).collect()));
                    }
                }
            }
            out
        }
        Expr::Diff(a, b) => {
            let nb = normal_form(b);
            let mut cur = normal_form(a);
            for y in &nb {
                cur = cur.iter().flat_map(|x| chain_minus(x, y)).collect();
            }
            cur
        }
        Expr::Up | Expr::Inverse(_) => unreachable!("rejected by downward_core_normalize"),
    }
}

/// Rewrites a downward expression (no `up`, no `inv`) into a union of
/// chains `c_0/↓/…/↓/c_n` whose predicates use intersection and difference
/// only directly inside projections.
pub fn downward_core_normalize(e: &Expr) -> Result<Expr> {
    if has(e, |x| matches!(x, Expr::Up | Expr::Inverse(_))) {
        return Err(Error::Hypothesis("downward core normalization needs an expression without up or inv".into()));
    }
    Ok(nf_expr(&normal_form(e)))
}
