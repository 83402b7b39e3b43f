mod common;

use proptest::prelude::*;
use treerel::expr::{check_fragment, Expr, Fragment};
use treerel::rewrite::{downward_core_normalize, eliminate_proj_inverse, expand_counting, expand_counting_above};

use common::{gen_all, rng};

/// Pairs `(small, large)` of registry fragments whose operation sets are
/// included in each other.
fn inclusions() -> Vec<(Fragment, Fragment)> {
    let reg = Fragment::registry(&[1, 2, 3]);
    let mut out = Vec::new();
    for a in &reg {
        for b in &reg {
            if a.ops.is_subset(&b.ops) && a.count_bound <= b.count_bound && (b.core <= a.core || !a.ops.intersect && !a.ops.diff) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>(), size in 1usize..14) {
        let e = gen_all(&["a", "b", "c"]).expr(&mut rng(seed), size);
        prop_assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn fragment_membership_is_monotone(seed in any::<u64>(), size in 1usize..10) {
        let e = gen_all(&["a"]).expr(&mut rng(seed), size);
        for (small, large) in inclusions() {
            if check_fragment(&e, &small).is_ok() {
                prop_assert!(check_fragment(&e, &large).is_ok(), "{} in {} but not {}", e, small, large);
            }
        }
    }

    #[test]
    fn normalizations_land_in_their_fragment(seed in any::<u64>(), size in 1usize..9) {
        let e = gen_all(&["a", "b"]).expr(&mut rng(seed), size);
        let x = Fragment::xpath(3);
        if check_fragment(&e, &x).is_ok() {
            let free = eliminate_proj_inverse(&e, &x).unwrap();
            prop_assert!(check_fragment(&free, &x).is_ok());
            prop_assert!(check_fragment(&expand_counting(&e).unwrap(), &Fragment::xpath(1)).is_ok());
        }
        let sd = Fragment::sd(3);
        if check_fragment(&e, &sd).is_ok() {
            let n = downward_core_normalize(&e).unwrap();
            prop_assert!(check_fragment(&n, &sd.as_core()).is_ok(), "{}", n);
        }
        let c = Fragment::core_xpath(3);
        if check_fragment(&e, &c).is_ok() && !e.contains(&|y| matches!(y, Expr::Count(3, _))) {
            let lowered = expand_counting_above(&e, 1, true).unwrap();
            prop_assert!(check_fragment(&lowered, &Fragment::core_xpath(1)).is_ok(), "{}", lowered);
        }
    }
}

#[test]
fn registry_keys_resolve() {
    for f in Fragment::registry(&[1, 2, 3]) {
        let back = Fragment::by_name(&f.name, None).unwrap();
        assert_eq!(back, f);
    }
    assert!(Fragment::by_name("su(2)", None).is_err());
    assert!(Fragment::by_name("sd(0)", None).is_err());
    assert!(Fragment::by_name("nope", None).is_err());
}
