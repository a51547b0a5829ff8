mod common;

use perverse_core::linalg::{cone, cone_maps, rat, ChainMap, CochainComplex, CohomologyTable, DoubleComplex, RatMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{invertible, random_complex, random_map};

#[test]
fn product_of_thin_factors_has_rank_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // random 5×3 and 3×7 of full rank 3, via invertible blocks
    let (a, _) = invertible(&mut rng, 5);
    let (b, _) = invertible(&mut rng, 7);
    let left = a.select_columns(&[0, 1, 2]);
    let right = b.select_rows(&[0, 1, 2]);
    let m = left.mul(&right);
    let (r, k) = m.rank_kernel();
    assert_eq!(r, 3);
    assert_eq!(k.shape(), (7, 4));
    assert!(m.mul(&k).is_zero());
    assert_eq!(k.rank(), 4);
}

#[test]
fn rank_of_known_matrices() {
    assert_eq!(RatMatrix::zeros(3, 4).rank(), 0);
    assert_eq!(RatMatrix::identity(4).rank(), 4);
    let m = RatMatrix::from_i64(3, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
    assert_eq!(m.rank(), 2);
    assert_eq!(m.kernel().cols(), 1);
    // entries large enough to leave the word-size fast path
    let big = i64::MAX / 3;
    let m = RatMatrix::from_i64(2, 2, &[big, big - 1, big - 1, big - 2]);
    assert_eq!(m.rank(), 2);
    let m = RatMatrix::from_i64(2, 2, &[big, big, big, big]);
    assert_eq!(m.rank(), 1);
}

#[test]
fn two_term_complex() {
    // Q --[1 1]^T--> Q^2: H^0 = 0, H^1 = Q
    let c = CochainComplex::new(0, vec![1, 2], vec![RatMatrix::from_i64(2, 1, &[1, 1])]).unwrap();
    assert_eq!(c.cohomology(), CohomologyTable::from_dims([(1, 1)]));
    assert_eq!(c.euler_characteristic(), -1);
    let bad = CochainComplex::new(0, vec![1, 1, 1], vec![RatMatrix::identity(1), RatMatrix::identity(1)]);
    assert!(bad.is_err());
}

#[test]
fn total_complex_of_square() {
    // Q -1-> Q over Q -1-> Q: acyclic rows, acyclic total complex
    let mut d = DoubleComplex::new();
    for p in 0..2 {
        for q in 0..2 {
            d.set_dim(p, q, 1);
        }
    }
    d.set_horizontal(0, 0, RatMatrix::identity(1));
    d.set_horizontal(0, 1, RatMatrix::identity(1));
    d.set_vertical(0, 0, RatMatrix::identity(1));
    d.set_vertical(1, 0, RatMatrix::identity(1));
    let t = d.total_complex().unwrap();
    t.check_square_zero().unwrap();
    assert!(t.cohomology().is_zero());
    assert!(t.is_acyclic());
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cohomology_matches_construction(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let built = random_complex(&mut rng, -1, 4, 2);
        let c = &built.complex;
        c.check_square_zero().unwrap();
        let h = c.cohomology();
        for (k, (_, hk, _)) in &built.layout {
            prop_assert_eq!(h.get(*k), *hk);
        }
        prop_assert_eq!(h.euler_characteristic(), c.euler_characteristic());
    }

    #[test]
    fn rank_is_invariant_under_basis_change(seed in seeds(), rows in 1usize..7, cols in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<i64> = (0..rows * cols).map(|_| rand::Rng::gen_range(&mut rng, -2..=2)).collect();
        let m = RatMatrix::from_i64(rows, cols, &entries);
        let (g, _) = invertible(&mut rng, rows);
        let (h, _) = invertible(&mut rng, cols);
        let r = m.rank();
        prop_assert_eq!(g.mul(&m).mul(&h).rank(), r);
        prop_assert_eq!(m.transpose().rank(), r);
        let k = m.kernel();
        prop_assert_eq!(k.cols() + r, cols);
        prop_assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn shift_moves_cohomology(seed in seeds(), n in -3i32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_complex(&mut rng, 0, 3, 2).complex;
        let s = c.shift(n);
        s.check_square_zero().unwrap();
        prop_assert_eq!(s.cohomology(), c.cohomology().shifted(n));
    }

    #[test]
    fn truncation_keeps_low_cohomology(seed in seeds(), k in -1i32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_complex(&mut rng, 0, 4, 2).complex;
        let (t, _) = c.truncate_leq(k);
        t.check_square_zero().unwrap();
        let h = c.cohomology();
        let ht = t.cohomology();
        for j in -1..6 {
            prop_assert_eq!(ht.get(j), if j <= k { h.get(j) } else { 0 });
        }
    }

    #[test]
    fn cone_long_exact_sequence(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_complex(&mut rng, 0, 3, 2);
        let t = random_complex(&mut rng, 0, 3, 2);
        let f = random_map(&mut rng, &s, &t);
        let (src, tgt) = (&s.complex, &t.complex);
        f.validate(src, tgt).unwrap();
        let c = cone(src, tgt, &f).unwrap();
        c.check_square_zero().unwrap();
        let (i, p) = cone_maps(src, tgt);
        let shifted = src.shift(1);
        i.validate(tgt, &c).unwrap();
        p.validate(&c, &shifted).unwrap();
        let (hs, ht, hc) = (src.cohomology(), tgt.cohomology(), c.cohomology());
        for k in -2..5 {
            let rf = f.induced_rank(src, tgt, k);
            let rf1 = f.induced_rank(src, tgt, k + 1);
            let ri = i.induced_rank(tgt, &c, k);
            let rp = p.induced_rank(&c, &shifted, k);
            // exactness at H^k(T), H^k(Cone) and H^{k+1}(S)
            prop_assert_eq!(ht.get(k), rf + ri, "at T, degree {}", k);
            prop_assert_eq!(hc.get(k), ri + rp, "at Cone, degree {}", k);
            prop_assert_eq!(hs.get(k + 1), rp + rf1, "at S[1], degree {}", k);
        }
        prop_assert_eq!(hc.euler_characteristic(), ht.euler_characteristic() - hs.euler_characteristic());
    }

    #[test]
    fn composition_and_identity(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex(&mut rng, 0, 3, 2);
        let b = random_complex(&mut rng, 0, 3, 2);
        let c = random_complex(&mut rng, 0, 3, 2);
        let f = random_map(&mut rng, &a, &b);
        let g = random_map(&mut rng, &b, &c);
        let gf = f.then(&g);
        gf.validate(&a.complex, &c.complex).unwrap();
        let id = ChainMap::identity(&a.complex);
        for k in 0..3 {
            prop_assert_eq!(id.induced_rank(&a.complex, &a.complex, k), a.complex.cohomology().get(k));
            prop_assert!(gf.induced_rank(&a.complex, &c.complex, k) <= f.induced_rank(&a.complex, &b.complex, k));
        }
        let twice = f.add(&f, &a.complex, &b.complex);
        prop_assert_eq!(twice, f.scale(&rat(2)));
    }
}
