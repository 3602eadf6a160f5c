use proptest::prelude::*;

use emc_core::family::{compact_ground, potential, KSet, Params, SetFamily};
use emc_core::matching::{has_s_matching, matching_number, max_matching, naive_matching_number, pullback_matching};
use emc_core::shifting::{shift_family, ShiftStep};

fn arb_family(max_n: u32, max_k: u32, max_len: usize) -> impl Strategy<Value = SetFamily> {
    (2..=max_n, 1..=max_k, 1u32..=4)
        .prop_filter("k < n", |(n, k, _)| k < n)
        .prop_flat_map(move |(n, k, s)| {
            let p = Params::new(n, k, s).unwrap();
            let all: Vec<KSet> = p.all_ksets().collect();
            let len = all.len();
            (Just(p), proptest::sample::subsequence(all, 0..=len.min(max_len)))
        })
        .prop_map(|(p, sets)| SetFamily::new(p, sets).unwrap())
}

fn arb_case() -> impl Strategy<Value = (SetFamily, ShiftStep)> {
    arb_family(9, 3, 18).prop_flat_map(|f| {
        let n = f.params().n();
        (Just(f), 1..=n, 1..n).prop_map(move |(f, i, d)| {
            let j = (i - 1 + d) % n + 1;
            (f, ShiftStep::new(i, j, n).unwrap())
        })
    })
}

proptest! {
    #[test]
    fn exact_matcher_agrees_with_all_subsets(f in arb_family(9, 3, 14)) {
        prop_assert_eq!(Some(matching_number(&f)), naive_matching_number(&f));
        let m = max_matching(&f);
        prop_assert!(m.is_within(&f));
        prop_assert_eq!(m.len(), matching_number(&f));
    }

    #[test]
    fn pullback_recovers_a_matching((f, step) in arb_case()) {
        let shifted = shift_family(&f, step);
        let m_prime = max_matching(&shifted);
        let m = pullback_matching(&f, step, &m_prime).unwrap();
        prop_assert!(m.is_within(&f));
        prop_assert_eq!(m.len(), m_prime.len());
    }

    #[test]
    fn shifting_keeps_families_matching_free((f, step) in arb_case()) {
        prop_assume!(!has_s_matching(&f));
        prop_assert!(!has_s_matching(&shift_family(&f, step)));
    }

    #[test]
    fn compaction_keeps_structure(f in arb_family(9, 3, 18)) {
        let c = compact_ground(&f).unwrap();
        prop_assert_eq!(c.family.len(), f.len());
        prop_assert_eq!(matching_number(&c.family), matching_number(&f));
        prop_assert_eq!(c.family.support().count_ones() as u32, c.new_n);
        prop_assert!(potential(&c.family) >= potential(&f) || !c.s_slots_refilled.is_empty());
        prop_assert_eq!(c.relabel_map.len() as u32, c.new_n);
    }
}
