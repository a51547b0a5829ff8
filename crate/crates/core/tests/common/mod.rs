//! Random cochain complexes and chain maps for property tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use perverse_core::linalg::{rat, ChainMap, CochainComplex, RatMatrix, Rational};
use rand::Rng;

/// Unit lower times unit upper triangular, so always invertible.
pub fn invertible<R: Rng>(rng: &mut R, n: usize) -> (RatMatrix, RatMatrix) {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for i in 0..n {
        lower.push((i, i, rat(1)));
        upper.push((i, i, rat(1)));
        for j in 0..i {
            lower.push((i, j, rat(rng.gen_range(-2..=2))));
            upper.push((j, i, rat(rng.gen_range(-2..=2))));
        }
    }
    let g = RatMatrix::from_entries(n, n, lower).mul(&RatMatrix::from_entries(n, n, upper));
    let inv = g.solve(&RatMatrix::identity(n)).expect("invertible");
    (g, inv)
}

/// A complex with prescribed cohomology dimensions `h` and boundary ranks
/// `b` (d^k has rank `b[k]`), written in a random basis. Returns the complex
/// and the basis change `g_k` from standard to random coordinates.
pub struct Built {
    pub complex: CochainComplex,
    pub change: BTreeMap<i32, (RatMatrix, RatMatrix)>,
    /// standard coordinates: `[image of d^{k-1} | harmonic | complement]`
    pub layout: BTreeMap<i32, (usize, usize, usize)>,
}

pub fn random_complex<R: Rng>(rng: &mut R, lo: i32, len: usize, max: usize) -> Built {
    let h: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=max)).collect();
    let b: Vec<usize> = (0..len)
        .map(|i| if i + 1 < len { rng.gen_range(0..=max) } else { 0 })
        .collect();
    standard(rng, lo, &h, &b)
}

pub fn standard<R: Rng>(rng: &mut R, lo: i32, h: &[usize], b: &[usize]) -> Built {
    let len = h.len();
    let mut layout = BTreeMap::new();
    let mut dims = BTreeMap::new();
    for i in 0..len {
        let prev = if i > 0 { b[i - 1] } else { 0 };
        layout.insert(lo + i as i32, (prev, h[i], b[i]));
        dims.insert(lo + i as i32, prev + h[i] + b[i]);
    }
    let mut change = BTreeMap::new();
    for (k, n) in &dims {
        change.insert(*k, invertible(rng, *n));
    }
    let mut diffs = BTreeMap::new();
    for i in 0..len.saturating_sub(1) {
        let k = lo + i as i32;
        let (p0, h0, b0) = layout[&k];
        let std = RatMatrix::from_entries(dims[&(k + 1)], dims[&k], (0..b0).map(|j| (j, p0 + h0 + j, rat(1))));
        let (g1, _) = &change[&(k + 1)];
        let (_, ginv0) = &change[&k];
        diffs.insert(k, g1.mul(&std).mul(ginv0));
    }
    let complex = CochainComplex::from_maps(&dims, diffs).expect("square zero");
    Built { complex, change, layout }
}

/// A chain map `S → T` acting on harmonic parts by random matrices and on
/// the acyclic parts by a random scalar. It multiplies the standard
/// differential `e_{p+h+j} ↦ e_j` compatibly.
pub fn random_map<R: Rng>(rng: &mut R, s: &Built, t: &Built) -> ChainMap {
    let mut comps = BTreeMap::new();
    let keys: Vec<i32> = s.layout.keys().copied().filter(|k| t.layout.contains_key(k)).collect();
    // one scalar per pair of acyclic pieces `e_{p+h+j} ↦ e_j` in degree k, k+1
    let mut scalars: BTreeMap<i32, Vec<Vec<Rational>>> = BTreeMap::new();
    for k in &keys {
        let (_, _, bs) = s.layout[k];
        let (_, _, bt) = t.layout[k];
        let m = (0..bt)
            .map(|_| (0..bs).map(|_| rat(rng.gen_range(-1..=1))).collect())
            .collect();
        scalars.insert(*k, m);
    }
    for k in &keys {
        let (ps, hs, bs) = s.layout[k];
        let (pt, ht, bt) = t.layout[k];
        let mut entries = Vec::new();
        for i in 0..ht {
            for j in 0..hs {
                entries.push((pt + i, ps + j, rat(rng.gen_range(-2..=2))));
            }
        }
        // complement block, and the matching block on images in degree k+1
        if let Some(m) = scalars.get(k) {
            for i in 0..bt {
                for j in 0..bs {
                    entries.push((pt + ht + i, ps + hs + j, m[i][j].clone()));
                }
            }
        }
        if let Some(m) = scalars.get(&(k - 1)) {
            for (i, row) in m.iter().enumerate().take(pt) {
                for (j, v) in row.iter().enumerate().take(ps) {
                    entries.push((i, j, v.clone()));
                }
            }
        }
        let std = RatMatrix::from_entries(pt + ht + bt, ps + hs + bs, entries);
        let (gt, _) = &t.change[k];
        let (_, gsinv) = &s.change[k];
        comps.insert(*k, gt.mul(&std).mul(gsinv));
    }
    ChainMap::from_components(comps)
}
