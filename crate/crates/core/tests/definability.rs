mod common;

use rand::Rng;
use treerel::decide::{definable_local, root_definable_sets, Counterexample, Decider};
use treerel::expr::Fragment;
use treerel::gen::random_document;
use treerel::oracle::{find_defining, Enumerator, OracleBudget};
use treerel::{eval, NodeSet, Relation};

use common::{canonical_docs, random_docs, rng};

#[test]
fn walk_and_naive_closure_checks_agree() {
    let mut r = rng(41);
    for f in Fragment::registry(&[1, 2, 3]) {
        for _ in 0..20 {
            let d = random_document(&mut r, 9, &["a", "b"]);
            let n = d.len();
            let dec = Decider::new(&d, &f).unwrap();
            for v in d.nodes() {
                for w in d.nodes() {
                    assert_eq!(dec.successors((v, w)), dec.successors_naive((v, w)), "{f} on {d}");
                }
            }
            let rel = Relation::from_pairs(n, (0..r.gen_range(0..6)).map(|_| (r.gen_range(0..n), r.gen_range(0..n))));
            assert_eq!(dec.global(&rel), dec.global_naive(&rel));
        }
    }
}

#[test]
fn soundness_bridge_on_canonical_docs() {
    let mut r = rng(42);
    for d in canonical_docs() {
        for f in Fragment::registry(&[1, 2, 3]) {
            let dec = Decider::new(&d, &f).unwrap();
            let n = d.len();
            for _ in 0..10 {
                let seed = Relation::from_pairs(n, (0..r.gen_range(1..3)).map(|_| (r.gen_range(0..n), r.gen_range(0..n))));
                let closed = dec.close(&seed);
                assert!(dec.global(&closed).definable);
                let e = treerel::synth::synthesize_witness(&d, &closed, &f).unwrap();
                assert_eq!(eval(&e, &d), closed);
            }
        }
    }
}

/// Rejections are confirmed by exhaustive search: no small expression
/// defines the relation, and every relation reached that contains the
/// counterexample's first pair contains its second.
#[test]
fn completeness_bridge_bounded() {
    let mut r = rng(43);
    let frags = [Fragment::sd(1), Fragment::wd(2), Fragment::su(), Fragment::xpath(1), Fragment::core_xpath(2), Fragment::pos_xpath()];
    for f in &frags {
        for _ in 0..4 {
            let d = random_document(&mut r, 6, &["a", "b"]);
            let n = d.len();
            let rel = Relation::from_pairs(n, (0..r.gen_range(1..4)).map(|_| (r.gen_range(0..n), r.gen_range(0..n))));
            let dec = Decider::new(&d, f).unwrap();
            let verdict = dec.global(&rel);
            let Some(Counterexample::Pair { from, to }) = verdict.counterexample else { continue };
            let size = if f.ops.up && f.ops.down { 5 } else { 7 };
            assert!(find_defining(&d, f, &rel, &OracleBudget::new(size)).is_none());
            let mut en = Enumerator::new(&d, f, &OracleBudget::new(size));
            for x in en.run(size) {
                if x.contains(from.0, from.1) {
                    assert!(x.contains(to.0, to.1), "{f} on {d}");
                }
            }
        }
    }
}

#[test]
fn root_definable_sets_match_subset_enumeration() {
    let mut docs = canonical_docs();
    docs.extend(random_docs(44, 12, 8, &["a", "b"]));
    for d in docs {
        for f in Fragment::registry(&[1, 2, 3]) {
            let by_classes = root_definable_sets(&d, &f).unwrap();
            let n = d.len();
            let mut by_subsets: Vec<NodeSet> = (0u32..1 << n)
                .map(|m| NodeSet::from_nodes(n, (0..n).filter(|&i| m >> i & 1 == 1)))
                .filter(|s| definable_local(&d, 0, s, &f).unwrap().definable)
                .collect();
            by_subsets.sort();
            assert_eq!(by_classes, by_subsets, "{f} on {d}");
        }
    }
}

#[test]
fn root_collapse_with_counting_at_least_three() {
    let mut docs = canonical_docs();
    docs.extend(random_docs(45, 40, 10, &["a", "b"]));
    for d in docs {
        for k in 1..=4 {
            let x = root_definable_sets(&d, &Fragment::xpath(k)).unwrap();
            let s = root_definable_sets(&d, &Fragment::sd(k.max(3))).unwrap();
            assert_eq!(x, s, "k={k} on {d}");
        }
    }
}

#[test]
fn full_equivalence_refines_core_equivalence() {
    for d in random_docs(46, 40, 10, &["a", "b"]) {
        for v in d.nodes() {
            for w in d.nodes() {
                if treerel::decide::nodes_equiv_structural(&d, v, w, &Fragment::xpath(3)).unwrap() {
                    assert!(treerel::decide::nodes_equiv_structural(&d, v, w, &Fragment::core_xpath(2)).unwrap());
                }
            }
        }
    }
}
