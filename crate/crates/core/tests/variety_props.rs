mod common;

use proptest::prelude::*;
use trimedial::variety::{small_seeds, Trimediality};
use trimedial::{builtin, check_identity, is_medial_on, is_trimedial, subgroupoid_closure, CayleyTable, Check, Subset};

use common::*;

/// Fixpoint by repeated full squaring, independent of the worklist.
fn naive_closure(t: &CayleyTable, seed: &[usize]) -> Vec<usize> {
    let mut s: std::collections::BTreeSet<usize> = seed.iter().copied().collect();
    loop {
        let next: std::collections::BTreeSet<usize> = s
            .iter()
            .flat_map(|&a| s.iter().map(move |&b| t.get(a, b)))
            .chain(s.iter().copied())
            .collect();
        if next == s {
            return s.into_iter().collect();
        }
        s = next;
    }
}

fn arb_table_and_seed() -> impl Strategy<Value = (CayleyTable, Vec<usize>, Vec<usize>)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(0..n as u8, n * n).prop_map(move |e| CayleyTable::from_entries(n, e).unwrap()),
            prop::collection::vec(0..n, 0..3),
            prop::collection::vec(0..n, 0..3),
        )
    })
}

proptest! {
    #[test]
    fn closure_matches_naive_fixpoint((t, seed, _) in arb_table_and_seed()) {
        let c = subgroupoid_closure(&t, Subset::from_elements(seed.iter().copied())).unwrap();
        prop_assert_eq!(c.elements(), naive_closure(&t, &seed));
    }

    #[test]
    fn closure_idempotent_and_monotone((t, a, b) in arb_table_and_seed()) {
        let sa = Subset::from_elements(a.iter().copied());
        let sab = Subset::from_elements(a.iter().chain(&b).copied());
        let ca = subgroupoid_closure(&t, sa).unwrap();
        prop_assert_eq!(subgroupoid_closure(&t, ca).unwrap(), ca);
        prop_assert!(ca.is_subset(&subgroupoid_closure(&t, sab).unwrap()));
        prop_assert!(sa.is_subset(&ca));
    }

    #[test]
    fn medial_implies_trimedial((t, _, _) in arb_table_and_seed()) {
        if check_identity(&t, &builtin("medial").unwrap()).holds() {
            prop_assert!(is_trimedial(&t).is_trimedial());
        }
    }
}

#[test]
fn closed_subsets_of_quasigroups_are_latin_subsquares() {
    for n in 1..=4 {
        for q in all_quasigroups(n) {
            for seed in small_seeds(n) {
                let s = subgroupoid_closure(&q, seed).unwrap();
                let elems = s.elements();
                for &a in &elems {
                    let row: Subset = Subset::from_elements(elems.iter().map(|&b| q.get(a, b)));
                    let col: Subset = Subset::from_elements(elems.iter().map(|&b| q.get(b, a)));
                    assert_eq!(row, s, "{q}");
                    assert_eq!(col, s, "{q}");
                }
            }
        }
    }
}

#[test]
fn trimedial_and_generated_by_three_implies_medial() {
    let medial = builtin("medial").unwrap();
    let mut instances = 0;
    for n in 1..=4 {
        for q in all_quasigroups(n) {
            let generated = small_seeds(n).any(|s| subgroupoid_closure(&q, s).unwrap() == Subset::full(n));
            if generated && is_trimedial(&q).is_trimedial() {
                instances += 1;
                assert!(check_identity(&q, &medial).holds(), "{q}");
            }
        }
    }
    assert!(instances > 100);
}

#[test]
fn characterizations_agree_on_small_quasigroups() {
    let ids = ["i1", "i2", "i3", "kepka", "corollary"].map(|n| builtin(n).unwrap());
    for n in 1..=4 {
        for q in all_quasigroups(n) {
            let h: Vec<bool> = ids.iter().map(|id| check_identity(&q, id).holds()).collect();
            let s123 = h[0] && h[1] && h[2];
            let tri = is_trimedial(&q).is_trimedial();
            assert_eq!(s123, h[3], "{q}");
            assert_eq!(h[3], h[4], "{q}");
            assert_eq!(h[4], tri, "{q}");
        }
    }
}

#[test]
fn trimedial_witness_is_first_failing_seed() {
    let q = t4_sigma();
    let Trimediality::Witness { seed, closure, assignment, lhs, rhs } = is_trimedial(&q) else {
        panic!("T4σ is not trimedial");
    };
    for earlier in small_seeds(4).take_while(|s| *s != seed) {
        let c = subgroupoid_closure(&q, earlier).unwrap();
        assert_eq!(is_medial_on(&q, c), Ok(Check::Holds));
    }
    assert_eq!(
        is_medial_on(&q, closure),
        Ok(Check::Counterexample { assignment, lhs, rhs })
    );
}
