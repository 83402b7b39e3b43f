mod common;

use proptest::prelude::*;
use treerel::document::{StructureAnswer, StructureQuery};
use treerel::gen::{random_document, shuffle_document};
use treerel::Document;

use common::rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ancestor_at_depth_is_root(seed in any::<u64>()) {
        let d = random_document(&mut rng(seed), 14, &["a", "b", "c"]);
        for v in d.nodes() {
            prop_assert_eq!(d.ancestor_at(v, d.depth(v)).unwrap(), d.root());
            prop_assert!(d.ancestor_at(v, d.depth(v) + 1).is_err());
        }
    }

    #[test]
    fn serialize_round_trips(seed in any::<u64>()) {
        let d = random_document(&mut rng(seed), 14, &["a", "b"]);
        let text = d.serialize();
        prop_assert_eq!(Document::parse(&text).unwrap(), d.clone());
        let spaced = text.replace('(', " ( ").replace(')', " )\n");
        prop_assert_eq!(Document::parse(&spaced).unwrap().serialize(), text);
    }

    #[test]
    fn height_zero_iff_leaf(seed in any::<u64>()) {
        let d = random_document(&mut rng(seed), 14, &["a"]);
        for v in d.nodes() {
            prop_assert_eq!(d.height(v) == 0, d.children(v).is_empty());
        }
    }

    #[test]
    fn shuffling_children_keeps_structure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_document(&mut r, 12, &["a", "b"]);
        let (s, map) = shuffle_document(&mut r, &d);
        for v in d.nodes() {
            prop_assert_eq!(d.label(v), s.label(map[v]));
            prop_assert_eq!(d.depth(v), s.depth(map[v]));
            prop_assert_eq!(d.parent(v).map(|p| map[p]), s.parent(map[v]));
        }
    }
}

#[test]
fn structure_queries_on_t1() {
    let d = Document::parse(treerel::document::T1).unwrap();
    assert_eq!(d.structure_query(2, StructureQuery::Depth).unwrap(), StructureAnswer::Int(2));
    assert_eq!(d.structure_query(0, StructureQuery::Height).unwrap(), StructureAnswer::Int(2));
    assert_eq!(d.structure_query(5, StructureQuery::AncestorAt(1)).unwrap(), StructureAnswer::Node(4));
    assert_eq!(d.structure_query(0, StructureQuery::IsRoot).unwrap(), StructureAnswer::Flag(true));
    assert!(d.structure_query(9, StructureQuery::Depth).is_err());
}
