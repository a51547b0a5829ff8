use perverse_core::fixtures;
use perverse_core::poset::{CellSet, StratifiedPoset};
use proptest::prelude::*;

fn all_fixtures() -> Vec<(String, StratifiedPoset)> {
    let mut out = Vec::new();
    for name in fixtures::NAMES {
        let p = fixtures::by_name(name).unwrap();
        out.push((format!("{name}/merged"), p.merge_strata_by_dimension()));
        out.push((name.to_string(), p));
    }
    out
}

#[test]
fn filtrations_are_complementary() {
    for (name, p) in all_fixtures() {
        let all = p.all_cells();
        for m in 0..=p.max_pdim() + 1 {
            let u = p.upper(m).unwrap();
            assert!(p.is_up_set(&u), "{name} U^{m}");
            let l = if m == 0 { CellSet::new() } else { p.lower(m - 1).unwrap() };
            assert!(p.is_down_set(&l), "{name} L^{}", m as i64 - 1);
            assert!(u.is_disjoint(&l));
            assert_eq!(u.union(&l).count(), all.len(), "{name} m={m}");
        }
        assert_eq!(p.upper(0).unwrap(), all);
        assert!(p.upper(p.max_pdim() + 1).unwrap().is_empty());
    }
}

#[test]
fn merging_is_idempotent_and_keeps_dimensions() {
    for (name, p) in all_fixtures() {
        let m = p.merge_strata_by_dimension();
        assert!(m.is_merged());
        assert!(m.validate().is_valid(), "{name}");
        assert_eq!(m.merge_strata_by_dimension(), m);
        for x in p.cell_ids() {
            assert_eq!(m.pdim_of(x), p.pdim_of(x));
        }
        for k in 0..=p.max_pdim() {
            assert_eq!(m.upper(k).unwrap(), p.upper(k).unwrap());
        }
    }
    let s = fixtures::suspension().merge_strata_by_dimension();
    assert_eq!(s.stratum_count(), 2);
    assert!(s.find_stratum("N+S").is_some());
}

#[test]
fn stars_and_induced_posets() {
    for (name, p) in all_fixtures() {
        for x in p.cell_ids() {
            let star = p.star(x);
            assert!(p.is_up_set(&star));
            assert!(star.contains(&x));
            assert!(star.iter().all(|y| p.leq(x, *y)));
            let (sub, emb) = p.induced(&star).unwrap();
            assert!(sub.validate().is_valid(), "{name}");
            assert_eq!(emb.len(), star.len());
            for (a, b) in sub.covers() {
                assert!(p.less(emb[a.0], emb[b.0]));
            }
        }
    }
}

#[test]
fn set_dimension_of_strata() {
    let p = fixtures::axes();
    assert_eq!(p.set_dimension(&CellSet::new()), -1);
    assert_eq!(p.set_dimension(&p.all_cells()), 2);
    for (s, stratum) in p.strata() {
        assert_eq!(p.set_dimension(&p.cells_of_stratum(s)), stratum.pdim as i64);
        let cl = p.closure(&p.cells_of_stratum(s));
        assert_eq!(p.set_dimension(&cl), stratum.pdim as i64);
    }
}

#[test]
fn builder_rejects_bad_input() {
    let dup = StratifiedPoset::builder().stratum("A", 0).cell("a", 0, "A").cell("a", 0, "A").build();
    assert!(dup.is_err());
    let unknown = StratifiedPoset::builder().stratum("A", 0).cell("a", 0, "B").build();
    assert!(unknown.is_err());
    let loop_ = StratifiedPoset::builder().stratum("A", 0).cell("a", 0, "A").cover("a", "a").build();
    assert!(loop_.is_err());
    let cycle = StratifiedPoset::builder()
        .stratum("A", 0)
        .cell("a", 0, "A")
        .cell("b", 1, "A")
        .cover("a", "b")
        .cover("b", "a")
        .build()
        .unwrap();
    assert!(!cycle.validate().is_valid());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_the_smallest_down_set(fixture in 0usize..7, mask in any::<u64>()) {
        let p = fixtures::by_name(fixtures::NAMES[fixture]).unwrap();
        let a: CellSet = p.cell_ids().filter(|x| mask >> (x.0 % 64) & 1 == 1).collect();
        let cl = p.closure(&a);
        prop_assert!(p.is_down_set(&cl));
        prop_assert!(a.is_subset(&cl));
        prop_assert_eq!(p.closure(&cl), cl.clone());
        for y in &cl {
            prop_assert!(a.iter().any(|x| p.leq(*y, *x)));
        }
        prop_assert!(p.set_dimension(&cl) >= p.set_dimension(&a));
    }
}
