//! Derived sections of sheaf complexes over opens of a finite poset.
//!
//! `RΓ(V; A)` is modelled by the nerve double complex
//! `C^{p,q} = ⊕_{x_0 < … < x_p in V} A^q(x_p)` with the alternating face
//! differential, where dropping the last vertex applies the restriction
//! `A(x_{p-1}) → A(x_p)`. Local cohomology with supports in a down-set `Z`
//! is the shifted cone of the degreewise projection
//! `RΓ(U_x; A) → RΓ(U_x ∖ Z; A)`.

use alloc::borrow::Cow;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cone_unchecked, sign, ChainMap, CochainComplex, CohomologyTable, MatrixBuilder, RatMatrix};
use crate::poset::{CellId, CellSet, StratifiedPoset, StratumId};
use crate::sheaf::{topological_order, SheafComplex};

/// Strict chains `x_0 < … < x_p` of a cell set, grouped by `p` and sorted
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nerve {
    chains: Vec<Vec<Vec<CellId>>>,
    index: Vec<BTreeMap<Vec<CellId>, usize>>,
}

impl Nerve {
    pub fn new(p: &StratifiedPoset, v: &CellSet) -> Self {
        let mut chains: Vec<Vec<Vec<CellId>>> = Vec::new();
        let mut stack: Vec<Vec<CellId>> = v.iter().rev().map(|x| vec![*x]).collect();
        while let Some(ch) = stack.pop() {
            let last = *ch.last().unwrap();
            for y in p.strictly_above(last).iter().rev() {
                if v.contains(y) {
                    let mut next = ch.clone();
                    next.push(*y);
                    stack.push(next);
                }
            }
            let len = ch.len();
            if chains.len() < len {
                chains.resize(len, Vec::new());
            }
            chains[len - 1].push(ch);
        }
        for level in chains.iter_mut() {
            level.sort();
        }
        let index = chains
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect())
            .collect();
        Nerve { chains, index }
    }

    /// Chains with `p + 1` elements.
    pub fn chains(&self, p: usize) -> &[Vec<CellId>] {
        self.chains.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_p(&self) -> Option<usize> {
        self.chains.len().checked_sub(1)
    }

    pub fn position(&self, chain: &[CellId]) -> Option<usize> {
        self.index.get(chain.len().checked_sub(1)?)?.get(chain).copied()
    }

    pub fn len(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// A sections complex together with the coordinates of its blocks.
#[derive(Clone, Debug)]
pub struct SectionsComplex {
    pub complex: CochainComplex,
    nerve: Nerve,
    /// `offsets[p][chain][q - q_lo]`: position of the block inside its total
    /// degree, `usize::MAX` for zero blocks.
    offsets: Vec<Vec<Vec<usize>>>,
    q_lo: i32,
}

impl SectionsComplex {
    pub fn nerve(&self) -> &Nerve {
        &self.nerve
    }

    pub(crate) fn offset(&self, p: usize, chain: usize, q: i32) -> Option<usize> {
        let i = q - self.q_lo;
        if i < 0 {
            return None;
        }
        let o = *self.offsets.get(p)?.get(chain)?.get(i as usize)?;
        (o != usize::MAX).then_some(o)
    }
}

/// Evaluation context for derived sections of one sheaf complex. Holds the
/// composite restriction `A(x) → A(y)` for every `x < y`, so repeated
/// queries over different opens share that work.
pub struct Sections<'a> {
    sheaf: &'a SheafComplex,
    transport: BTreeMap<(CellId, CellId), ChainMap>,
}

impl<'a> Sections<'a> {
    pub fn new(sheaf: &'a SheafComplex) -> Self {
        let p = sheaf.base();
        let mut transport: BTreeMap<(CellId, CellId), ChainMap> = BTreeMap::new();
        for z in topological_order(p) {
            for &(a, ci) in p.down_covers(z) {
                let r = sheaf.restriction(ci);
                transport.entry((a, z)).or_insert_with(|| r.clone());
                let below: Vec<CellId> = p.cell_ids().filter(|x| p.less(*x, a)).collect();
                for x in below {
                    if !transport.contains_key(&(x, z)) {
                        let m = transport[&(x, a)].then(r);
                        transport.insert((x, z), m);
                    }
                }
            }
        }
        Sections { sheaf, transport }
    }

    pub fn sheaf(&self) -> &SheafComplex {
        self.sheaf
    }

    /// Composite restriction `A(x) → A(y)` for `x ≤ y`.
    pub fn transport(&self, x: CellId, y: CellId) -> Cow<'_, ChainMap> {
        if x == y {
            Cow::Owned(ChainMap::identity(self.sheaf.stalk(x)))
        } else {
            Cow::Borrowed(&self.transport[&(x, y)])
        }
    }

    fn check_open(&self, v: &CellSet) -> Result<()> {
        if self.sheaf.base().is_up_set(v) {
            Ok(())
        } else {
            Err(Error::NotClosed { expected: "an up-set" })
        }
    }

    /// `RΓ(V; A)` as the total complex of the nerve double complex, with
    /// `d = d_h + (-1)^p d_v`.
    pub fn complex(&self, v: &CellSet) -> Result<SectionsComplex> {
        self.check_open(v)?;
        Ok(self.complex_unchecked(v))
    }

    pub(crate) fn complex_unchecked(&self, v: &CellSet) -> SectionsComplex {
        let a = self.sheaf;
        let nerve = Nerve::new(a.base(), v);
        let q_range = v
            .iter()
            .filter_map(|x| Some((a.stalk(*x).lo()?, a.stalk(*x).hi()?)))
            .fold(None, |acc: Option<(i32, i32)>, (lo, hi)| match acc {
                None => Some((lo, hi)),
                Some((l, h)) => Some((l.min(lo), h.max(hi))),
            });
        let Some((q_lo, q_hi)) = q_range else {
            return SectionsComplex {
                complex: CochainComplex::zero(),
                offsets: Vec::new(),
                nerve,
                q_lo: 0,
            };
        };
        let nq = (q_hi - q_lo + 1) as usize;
        let max_p = nerve.max_p().unwrap_or(0);
        // total-degree dims and block offsets, blocks ordered by p then chain
        let mut tot_dims: BTreeMap<i32, usize> = BTreeMap::new();
        let mut offsets = vec![Vec::new(); max_p + 1];
        for p in 0..=max_p {
            for chain in nerve.chains(p) {
                let stalk = a.stalk(*chain.last().unwrap());
                let mut row = vec![usize::MAX; nq];
                for (qi, slot) in row.iter_mut().enumerate() {
                    let q = q_lo + qi as i32;
                    let d = stalk.dim(q);
                    if d > 0 {
                        let n = p as i32 + q;
                        let e = tot_dims.entry(n).or_insert(0);
                        *slot = *e;
                        *e += d;
                    }
                }
                offsets[p].push(row);
            }
        }
        let mut builders: BTreeMap<i32, MatrixBuilder> = BTreeMap::new();
        for p in 0..=max_p {
            for (ci, chain) in nerve.chains(p).iter().enumerate() {
                let top = *chain.last().unwrap();
                let stalk = a.stalk(top);
                // vertical part
                for q in stalk.degrees() {
                    let (Some(src), Some(dst)) = (
                        offset_of(&offsets, q_lo, p, ci, q),
                        offset_of(&offsets, q_lo, p, ci, q + 1),
                    ) else {
                        continue;
                    };
                    let n = p as i32 + q;
                    block_row(&mut builders, &tot_dims, n).add_scaled_block(dst, src, &stalk.differential(q), sign(p as i32) as i32);
                }
                // horizontal part: faces of this chain, which has p + 1 elements
                if p == 0 {
                    continue;
                }
                for i in 0..=p {
                    let mut face = chain.clone();
                    face.remove(i);
                    let fi = nerve.position(&face).expect("faces of chains are chains");
                    let s = sign(i as i32) as i32;
                    if i < p {
                        for q in stalk.degrees() {
                            let (Some(src), Some(dst)) = (
                                offset_of(&offsets, q_lo, p - 1, fi, q),
                                offset_of(&offsets, q_lo, p, ci, q),
                            ) else {
                                continue;
                            };
                            let n = p as i32 - 1 + q;
                            let b = block_row(&mut builders, &tot_dims, n);
                            for j in 0..stalk.dim(q) {
                                b.add(dst + j, src + j, crate::linalg::rat(s as i64));
                            }
                        }
                    } else {
                        let prev = face[p - 1];
                        let rho = self.transport(prev, top);
                        let prev_stalk = a.stalk(prev);
                        for q in prev_stalk.degrees() {
                            let (Some(src), Some(dst)) = (
                                offset_of(&offsets, q_lo, p - 1, fi, q),
                                offset_of(&offsets, q_lo, p, ci, q),
                            ) else {
                                continue;
                            };
                            let n = p as i32 - 1 + q;
                            block_row(&mut builders, &tot_dims, n).add_scaled_block(dst, src, &rho.component(q, prev_stalk, stalk), s);
                        }
                    }
                }
            }
        }
        let diffs: BTreeMap<i32, RatMatrix> = builders.into_iter().map(|(n, b)| (n, b.build())).collect();
        let complex = CochainComplex::from_maps(&tot_dims, diffs).expect("nerve differential squares to zero");
        SectionsComplex {
            complex,
            nerve,
            offsets,
            q_lo,
        }
    }

    /// Degreewise projection `RΓ(W) → RΓ(V)` for `V ⊆ W`: chains of `W` not
    /// inside `V` are dropped.
    pub fn projection(&self, from: &SectionsComplex, to: &SectionsComplex) -> ChainMap {
        let a = self.sheaf;
        let mut builders: BTreeMap<i32, MatrixBuilder> = BTreeMap::new();
        for p in 0..to.nerve.chains.len() {
            for (ci, chain) in to.nerve.chains(p).iter().enumerate() {
                let fi = from.nerve.position(chain).expect("V ⊆ W");
                let stalk = a.stalk(*chain.last().unwrap());
                for q in stalk.degrees() {
                    let (Some(dst), Some(src)) = (to.offset(p, ci, q), from.offset(p, fi, q)) else {
                        continue;
                    };
                    let n = p as i32 + q;
                    let b = builders.entry(n).or_insert_with(|| {
                        MatrixBuilder::new(to.complex.dim(n), from.complex.dim(n))
                    });
                    for j in 0..stalk.dim(q) {
                        b.add(dst + j, src + j, crate::linalg::rat(1));
                    }
                }
            }
        }
        ChainMap::from_components(builders.into_iter().map(|(n, b)| (n, b.build())).collect())
    }

    /// The restriction `RΓ(W; A) → RΓ(V; A)` for up-sets `V ⊆ W`, with both
    /// complexes.
    pub fn restriction_map(&self, v: &CellSet, w: &CellSet) -> Result<(SectionsComplex, SectionsComplex, ChainMap)> {
        self.check_open(v)?;
        self.check_open(w)?;
        if !v.is_subset(w) {
            return Err(Error::Precondition("restriction needs V ⊆ W".into()));
        }
        let big = self.complex_unchecked(w);
        let small = self.complex_unchecked(v);
        let f = self.projection(&big, &small);
        Ok((big, small, f))
    }

    /// Sections of `A` over the star `U_x` with supports in the down-set `z`:
    /// `Cone(RΓ(U_x) → RΓ(U_x ∖ Z))[-1]`.
    pub fn supported(&self, x: CellId, z: &CellSet) -> Result<CochainComplex> {
        let p = self.sheaf.base();
        if !p.is_down_set(z) {
            return Err(Error::NotClosed { expected: "a down-set" });
        }
        Ok(self.supported_in(&p.star(x), z))
    }

    /// `Cone(RΓ(V) → RΓ(V ∖ Z))[-1]` for an up-set `V`.
    pub(crate) fn supported_in(&self, v: &CellSet, z: &CellSet) -> CochainComplex {
        let rest: CellSet = v.difference(z).copied().collect();
        let whole = self.complex_unchecked(v);
        let punctured = self.complex_unchecked(&rest);
        let f = self.projection(&whole, &punctured);
        cone_unchecked(&whole.complex, &punctured.complex, &f).shift(-1)
    }

    /// Local cohomology on the star of `x` with supports in the down-set
    /// `z`, using `A(x)` in place of `RΓ(U_x)`:
    /// `Cone(A(x) → RΓ(U_x ∖ Z))[-1]`, where a section goes to its
    /// restrictions at the vertices of `U_x ∖ Z`. Quasi-isomorphic to
    /// [`Sections::supported`] and much smaller, since only the link part
    /// of the star enters the nerve.
    pub fn supported_on_star(&self, x: CellId, z: &CellSet) -> CochainComplex {
        let p = self.sheaf.base();
        let rest: CellSet = p.star(x).difference(z).copied().collect();
        let link = self.complex_unchecked(&rest);
        let src = self.sheaf.stalk(x);
        let mut comps = BTreeMap::new();
        for q in src.degrees() {
            let mut b = MatrixBuilder::new(link.complex.dim(q), src.dim(q));
            for (ci, chain) in link.nerve.chains(0).iter().enumerate() {
                if let Some(o) = link.offset(0, ci, q) {
                    let y = chain[0];
                    b.add_block(o, 0, &self.transport(x, y).component(q, src, self.sheaf.stalk(y)));
                }
            }
            comps.insert(q, b.build());
        }
        let f = ChainMap::from_components(comps);
        cone_unchecked(src, &link.complex, &f).shift(-1)
    }

    /// Local cohomology model as a kernel: the subcomplex of `RΓ(V)` on
    /// chains whose minimum lies in `Z`. Quasi-isomorphic to
    /// [`Sections::supported_in`] because the projection is surjective.
    /// `Z` only needs to be closed relative to `V`.
    pub fn supported_kernel(&self, v: &CellSet, z: &CellSet) -> Result<CochainComplex> {
        let p = self.sheaf.base();
        let relatively_closed = z
            .iter()
            .filter(|y| v.contains(y))
            .all(|y| v.iter().all(|x| !p.less(*x, *y) || z.contains(x)));
        if !p.is_up_set(v) || !relatively_closed {
            return Err(Error::NotClosed {
                expected: "an up-set V and a set Z closed in V",
            });
        }
        let whole = self.complex_unchecked(v);
        let keep = self.chain_coordinates(&whole, |chain| z.contains(&chain[0]));
        Ok(subcomplex(&whole.complex, &keep))
    }

    /// Coordinates (per total degree) of the blocks whose chain satisfies
    /// `pred`, in increasing order.
    pub(crate) fn chain_coordinates(&self, s: &SectionsComplex, pred: impl Fn(&[CellId]) -> bool) -> BTreeMap<i32, Vec<usize>> {
        let a = self.sheaf;
        let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for p in 0..s.nerve.chains.len() {
            for (ci, chain) in s.nerve.chains(p).iter().enumerate() {
                if !pred(chain) {
                    continue;
                }
                let stalk = a.stalk(*chain.last().unwrap());
                for q in stalk.degrees() {
                    if let Some(o) = s.offset(p, ci, q) {
                        let v = out.entry(p as i32 + q).or_default();
                        v.extend(o..o + stalk.dim(q));
                    }
                }
            }
        }
        for v in out.values_mut() {
            v.sort_unstable();
        }
        out
    }

    pub fn stalk_cohomology(&self, x: CellId) -> CohomologyTable {
        self.sheaf.stalk(x).cohomology()
    }

    /// `H^*(j_x^! A)`: local cohomology on the star with supports in
    /// `{y ≤ x}`.
    pub fn costalk_cohomology(&self, x: CellId) -> CohomologyTable {
        let p = self.sheaf.base();
        self.supported_on_star(x, &p.down_closure(x)).cohomology()
    }

    /// For each cell of the stratum, the stalk cohomology of `r_S^! A`,
    /// i.e. local cohomology on the star with supports in `closure(S)`.
    pub fn shriek_restriction_table(&self, s: StratumId) -> BTreeMap<CellId, CohomologyTable> {
        let p = self.sheaf.base();
        let cells = p.cells_of_stratum(s);
        let closure = p.closure(&cells);
        cells
            .iter()
            .map(|x| (*x, self.supported_on_star(*x, &closure).cohomology()))
            .collect()
    }

    pub fn hypercohomology(&self, v: &CellSet) -> Result<CohomologyTable> {
        Ok(self.complex(v)?.complex.cohomology())
    }
}

/// Builder for the differential leaving total degree `n`.
fn block_row<'b>(builders: &'b mut BTreeMap<i32, MatrixBuilder>, dims: &BTreeMap<i32, usize>, n: i32) -> &'b mut MatrixBuilder {
    let d = |k: i32| dims.get(&k).copied().unwrap_or(0);
    builders.entry(n).or_insert_with(|| MatrixBuilder::new(d(n + 1), d(n)))
}

fn offset_of(offsets: &[Vec<Vec<usize>>], q_lo: i32, p: usize, chain: usize, q: i32) -> Option<usize> {
    let i = q - q_lo;
    if i < 0 {
        return None;
    }
    let o = *offsets.get(p)?.get(chain)?.get(i as usize)?;
    (o != usize::MAX).then_some(o)
}

/// The subcomplex spanned by the given coordinates. The caller guarantees
/// the span is closed under the differential.
pub(crate) fn subcomplex(c: &CochainComplex, keep: &BTreeMap<i32, Vec<usize>>) -> CochainComplex {
    let empty = Vec::new();
    let get = |k: i32| keep.get(&k).unwrap_or(&empty);
    let dims: BTreeMap<i32, usize> = keep.iter().map(|(k, v)| (*k, v.len())).collect();
    let diffs = keep
        .keys()
        .map(|&k| {
            let d = c.differential(k);
            let rows = get(k + 1);
            let m = d.select_rows(rows).select_columns(get(k));
            (k, m)
        })
        .collect();
    CochainComplex::from_maps(&dims, diffs).expect("subcomplex of a complex")
}

/// `RΓ(V; A)` for an up-set `V`.
pub fn sections_complex(v: &CellSet, a: &SheafComplex) -> Result<CochainComplex> {
    Ok(Sections::new(a).complex(v)?.complex)
}

pub fn stalk_cohomology(x: CellId, a: &SheafComplex) -> Result<CohomologyTable> {
    check_cell(x, a)?;
    Ok(a.stalk(x).cohomology())
}

/// Local cohomology `H_Z(U_x; A)` as a complex; see [`Sections::supported`].
pub fn supported_sections(x: CellId, z: &CellSet, a: &SheafComplex) -> Result<CochainComplex> {
    check_cell(x, a)?;
    Sections::new(a).supported(x, z)
}

pub fn costalk_cohomology(x: CellId, a: &SheafComplex) -> Result<CohomologyTable> {
    check_cell(x, a)?;
    Ok(Sections::new(a).costalk_cohomology(x))
}

pub fn shriek_restriction_table(s: StratumId, a: &SheafComplex) -> BTreeMap<CellId, CohomologyTable> {
    Sections::new(a).shriek_restriction_table(s)
}

pub fn hypercohomology(v: &CellSet, a: &SheafComplex) -> Result<CohomologyTable> {
    Sections::new(a).hypercohomology(v)
}

fn check_cell(x: CellId, a: &SheafComplex) -> Result<()> {
    if x.0 < a.base().cell_count() {
        Ok(())
    } else {
        Err(Error::Unknown {
            kind: "cell",
            name: alloc::format!("#{}", x.0),
        })
    }
}

/// Ranks of the map induced on cohomology, degree by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InducedRanks {
    /// `(degree, dim H(source), dim H(target), rank)`.
    pub rows: Vec<(i32, usize, usize, usize)>,
}

impl InducedRanks {
    pub fn compute(f: &ChainMap, source: &CochainComplex, target: &CochainComplex, degrees: impl IntoIterator<Item = i32>) -> Self {
        let hs = source.cohomology();
        let ht = target.cohomology();
        let rows = degrees
            .into_iter()
            .map(|k| {
                let rank = if hs.get(k) == 0 || ht.get(k) == 0 {
                    0
                } else {
                    f.induced_rank(source, target, k)
                };
                (k, hs.get(k), ht.get(k), rank)
            })
            .collect();
        InducedRanks { rows }
    }

    pub fn at(&self, k: i32) -> Option<(usize, usize, usize)> {
        self.rows.iter().find(|r| r.0 == k).map(|r| (r.1, r.2, r.3))
    }

    pub fn injective(&self, k: i32) -> bool {
        self.at(k).is_none_or(|(s, _, r)| r == s)
    }

    pub fn iso(&self, k: i32) -> bool {
        self.at(k).is_none_or(|(s, t, r)| r == s && r == t)
    }
}

/// Verdict of an exactness check over a long exact sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactnessReport {
    /// One row per degree `k`: dimensions of the three terms.
    pub terms: Vec<(i32, usize, usize, usize)>,
    /// Slots where exactness fails, as `(degree, position 0..3)`.
    pub failures: Vec<(i32, u8)>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exactness of `… → H^k(A) →i H^k(B) →p H^k(C) →δ H^{k+1}(A) → …` for a
/// short exact sequence of complexes given by coordinate inclusion and
/// projection: `a_coords[k]` are the coordinates of `B^k` spanning the
/// subcomplex `A`, and `C` is spanned by the complementary coordinates.
pub(crate) fn ses_exactness(b: &CochainComplex, a_coords: &BTreeMap<i32, Vec<usize>>) -> ExactnessReport {
    let degrees = b.degrees();
    let mut c_coords: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for k in degrees.clone() {
        let sub: BTreeSet<usize> = a_coords.get(&k).map(|v| v.iter().copied().collect()).unwrap_or_default();
        c_coords.insert(k, (0..b.dim(k)).filter(|i| !sub.contains(i)).collect());
    }
    let a = subcomplex(b, a_coords);
    let c = subcomplex(b, &c_coords);
    let lo = degrees.start;
    let coord_map = |coords: &BTreeMap<i32, Vec<usize>>, k: i32, into_big: bool| -> RatMatrix {
        let empty = Vec::new();
        let cs = coords.get(&k).unwrap_or(&empty);
        let n = b.dim(k);
        if into_big {
            RatMatrix::from_entries(n, cs.len(), cs.iter().enumerate().map(|(j, i)| (*i, j, crate::linalg::rat(1))))
        } else {
            RatMatrix::from_entries(cs.len(), n, cs.iter().enumerate().map(|(j, i)| (j, *i, crate::linalg::rat(1))))
        }
    };
    // rebase subcomplexes: `subcomplex` keeps absolute degrees
    let incl = ChainMap::from_components(degrees.clone().map(|k| (k, coord_map(a_coords, k, true))).collect());
    let proj = ChainMap::from_components(degrees.clone().map(|k| (k, coord_map(&c_coords, k, false))).collect());
    // connecting map δ: C^k → A^{k+1}: lift, apply d_B, read the A part
    let delta_at = |k: i32| -> RatMatrix {
        let lift = coord_map(&c_coords, k, true);
        let dl = b.differential(k).mul(&lift);
        coord_map(a_coords, k + 1, false).mul(&dl)
    };
    let ha = a.cohomology();
    let hb = b.cohomology();
    let hc = c.cohomology();
    let mut report = ExactnessReport::default();
    let rank_i = |k: i32| if ha.get(k) == 0 || hb.get(k) == 0 { 0 } else { incl.induced_rank(&a, b, k) };
    let rank_p = |k: i32| if hb.get(k) == 0 || hc.get(k) == 0 { 0 } else { proj.induced_rank(b, &c, k) };
    let rank_d = |k: i32| -> usize {
        if hc.get(k) == 0 || ha.get(k + 1) == 0 {
            return 0;
        }
        induced_rank_between(&delta_at(k), &c, &a, k, k + 1)
    };
    for k in lo - 1..degrees.end + 1 {
        report.terms.push((k, ha.get(k), hb.get(k), hc.get(k)));
        let (ri, rp, rd) = (rank_i(k), rank_p(k), rank_d(k));
        let rd_prev = rank_d(k - 1);
        let ri_next = rank_i(k + 1);
        // exact at H^k(A): ker i = im δ_{k-1}
        if ha.get(k) != ri + rd_prev {
            report.failures.push((k, 0));
        }
        // exact at H^k(B)
        if hb.get(k) != ri + rp || (ri > 0 && rp > 0 && composite_nonzero(&incl, &proj, &a, b, &c, k)) {
            report.failures.push((k, 1));
        }
        // exact at H^k(C)
        if hc.get(k) != rp + rd {
            report.failures.push((k, 2));
        }
        let _ = ri_next;
    }
    report
}

fn composite_nonzero(i: &ChainMap, p: &ChainMap, a: &CochainComplex, b: &CochainComplex, c: &CochainComplex, k: i32) -> bool {
    let _ = b;
    i.then(p).induced_rank(a, c, k) != 0
}

/// Rank on cohomology of a linear map `X^j → Y^l` sending cycles to cycles
/// and boundaries to boundaries.
pub(crate) fn induced_rank_between(m: &RatMatrix, x: &CochainComplex, y: &CochainComplex, j: i32, l: i32) -> usize {
    let z = x.differential(j).kernel();
    if z.cols() == 0 {
        return 0;
    }
    let img = m.mul(&z);
    let bnd = y.differential(l - 1);
    RatMatrix::hstack(y.dim(l), &[&img, &bnd]).rank() - bnd.rank()
}

/// Excision sequence `H_{Z'}(V) → H_Z(V) → H_{Z∖Z'}(V∖Z') → H^{+1}_{Z'}(V)`.
#[derive(Clone, Debug)]
pub struct ExcisionReport {
    /// Tables of the three terms, computed from cones.
    pub first: CohomologyTable,
    pub middle: CohomologyTable,
    pub third: CohomologyTable,
    /// Exactness checked on the short exact sequence of kernel models.
    pub exactness: ExactnessReport,
    /// Whether the cone and kernel models give the same tables.
    pub models_agree: bool,
}

impl ExcisionReport {
    pub fn is_exact(&self) -> bool {
        self.exactness.is_exact() && self.models_agree
    }
}

/// Checks the excision long exact sequence for down-sets `Z' ⊆ Z` on
/// `V = U_x` (or the whole base when `x` is `None`).
pub fn excision_les_check(x: Option<CellId>, z_small: &CellSet, z: &CellSet, a: &SheafComplex) -> Result<ExcisionReport> {
    let p = a.base();
    if !p.is_down_set(z_small) || !p.is_down_set(z) {
        return Err(Error::NotClosed { expected: "a down-set" });
    }
    if !z_small.is_subset(z) {
        return Err(Error::Precondition("excision needs Z' ⊆ Z".into()));
    }
    let s = Sections::new(a);
    let v = match x {
        Some(x) => {
            check_cell(x, a)?;
            p.star(x)
        }
        None => p.all_cells(),
    };
    let v_minus: CellSet = v.difference(z_small).copied().collect();
    let z_rest: CellSet = z.difference(z_small).copied().collect();
    let first = s.supported_in(&v, z_small).cohomology();
    let middle = s.supported_in(&v, z).cohomology();
    let third = s.supported_in(&v_minus, &z_rest).cohomology();

    // kernel model: Γ_Z(V) ⊇ Γ_{Z'}(V), quotient = chains with min in Z ∖ Z'
    let whole = s.complex_unchecked(&v);
    let big_coords = s.chain_coordinates(&whole, |c| z.contains(&c[0]));
    let gz = subcomplex(&whole.complex, &big_coords);
    // coordinates of Γ_{Z'} inside Γ_Z
    let small_abs = s.chain_coordinates(&whole, |c| z_small.contains(&c[0]));
    let mut rel: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (k, coords) in &big_coords {
        let pos: BTreeMap<usize, usize> = coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let sub = small_abs.get(k).map(|v| v.iter().map(|c| pos[c]).collect()).unwrap_or_default();
        rel.insert(*k, sub);
    }
    let exactness = ses_exactness(&gz, &rel);
    let kernel_first = s.supported_kernel(&v, z_small)?.cohomology();
    let kernel_third = s.supported_kernel(&v_minus, &z_rest)?.cohomology();
    let models_agree = kernel_first == first && gz.cohomology() == middle && kernel_third == third;
    Ok(ExcisionReport {
        first,
        middle,
        third,
        exactness,
        models_agree,
    })
}

/// Outcome of [`vanishing_propagation_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Some stalk has cohomology below `k`; nothing to check.
    Vacuous,
    /// Stalks vanish below `k` and so does hypercohomology.
    Holds,
    /// Stalks vanish below `k` but `ℍ^degree(V)` does not.
    Fails { degree: i32, dim: usize },
}

/// If every stalk on `V` has no cohomology below `k`, then neither does
/// `ℍ(V; A)`.
pub fn vanishing_propagation_check(v: &CellSet, a: &SheafComplex, k: i32) -> Result<Propagation> {
    let s = Sections::new(a);
    vanishing_propagation_with(&s, v, k)
}

pub(crate) fn vanishing_propagation_with(s: &Sections<'_>, v: &CellSet, k: i32) -> Result<Propagation> {
    let a = s.sheaf();
    let hypothesis = v.iter().all(|x| a.stalk(*x).cohomology().iter().all(|(j, _)| j >= k));
    if !hypothesis {
        return Ok(Propagation::Vacuous);
    }
    let h = s.hypercohomology(v)?;
    let verdict = match h.iter().find(|(j, _)| *j < k) {
        Some((degree, dim)) => Propagation::Fails { degree, dim },
        None => Propagation::Holds,
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::DoubleComplex;
    use alloc::sync::Arc;

    fn constant(p: StratifiedPoset, shift: i32) -> SheafComplex {
        SheafComplex::constant(Arc::new(p), 1, shift)
    }

    fn table(entries: &[(i32, usize)]) -> CohomologyTable {
        CohomologyTable::from_dims(entries.iter().copied())
    }

    #[test]
    fn circle_sections_of_constant_sheaf() {
        let a = constant(fixtures::circle(), 0);
        let all = a.base().all_cells();
        assert_eq!(hypercohomology(&all, &a).unwrap(), table(&[(0, 1), (1, 1)]));
        assert!(sections_complex(&CellSet::new(), &a).unwrap().is_zero());
    }

    #[test]
    fn sections_match_explicit_double_complex() {
        // circle, constant Q: C^{0,0} = Q^4, C^{1,0} = Q^4
        let a = constant(fixtures::circle(), 0);
        let s = Sections::new(&a);
        let sc = s.complex(&a.base().all_cells()).unwrap();
        let mut dc = DoubleComplex::new();
        let n0 = sc.nerve().chains(0).len();
        let n1 = sc.nerve().chains(1).len();
        dc.set_dim(0, 0, n0);
        dc.set_dim(1, 0, n1);
        let mut b = MatrixBuilder::new(n1, n0);
        for (i, ch) in sc.nerve().chains(1).iter().enumerate() {
            // face 0 drops x_0 (+), face 1 drops x_1 (-)
            b.add(i, sc.nerve().position(&ch[1..]).unwrap(), crate::linalg::rat(1));
            b.add(i, sc.nerve().position(&ch[..1]).unwrap(), crate::linalg::rat(-1));
        }
        dc.set_horizontal(0, 0, b.build());
        assert_eq!(dc.total_complex().unwrap(), sc.complex);
    }

    #[test]
    fn punctured_cone_is_a_circle() {
        let a = constant(fixtures::cone(), 0);
        let u1 = a.base().upper(1).unwrap();
        assert_eq!(hypercohomology(&u1, &a).unwrap(), table(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn stars_are_contractible() {
        for name in fixtures::NAMES {
            let a = constant(fixtures::by_name(name).unwrap(), 0);
            let s = Sections::new(&a);
            for x in a.base().cell_ids() {
                let h = s.hypercohomology(&a.base().star(x)).unwrap();
                assert_eq!(h, table(&[(0, 1)]), "{name} at {x:?}");
            }
        }
    }

    #[test]
    fn non_open_sets_rejected() {
        let a = constant(fixtures::cone(), 0);
        let l0 = a.base().lower(0).unwrap();
        assert!(sections_complex(&l0, &a).is_err());
        let c = a.base().cell_named("c").unwrap();
        assert!(supported_sections(c, &a.base().upper(1).unwrap(), &a).is_err());
    }

    #[test]
    fn cone_point_local_cohomology() {
        let p = fixtures::cone();
        let c = p.cell_named("c").unwrap();
        let z = p.lower(0).unwrap();
        let a = constant(p.clone(), 0);
        assert_eq!(supported_sections(c, &z, &a).unwrap().cohomology(), table(&[(2, 1)]));
        assert_eq!(costalk_cohomology(c, &a).unwrap(), table(&[(2, 1)]));
        let a1 = constant(p.clone(), 1);
        assert_eq!(supported_sections(c, &z, &a1).unwrap().cohomology(), table(&[(1, 1)]));
        // Z = everything recovers the stalk
        for x in p.cell_ids() {
            assert_eq!(
                supported_sections(x, &p.all_cells(), &a1).unwrap().cohomology(),
                stalk_cohomology(x, &a1).unwrap()
            );
        }
    }

    #[test]
    fn circle_vertex_costalk() {
        let a = constant(fixtures::circle(), 0);
        let v1 = a.base().cell_named("v1").unwrap();
        assert_eq!(costalk_cohomology(v1, &a).unwrap(), table(&[(1, 1)]));
        let e1 = a.base().cell_named("e1").unwrap();
        assert_eq!(costalk_cohomology(e1, &a).unwrap(), table(&[(0, 1)]));
    }

    #[test]
    fn shriek_tables_on_cone() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 1);
        let s0 = p.find_stratum("S0").unwrap();
        let s1 = p.find_stratum("S1").unwrap();
        let t0 = shriek_restriction_table(s0, &a);
        assert_eq!(t0.len(), 1);
        assert!(t0.values().all(|t| *t == table(&[(1, 1)])));
        let t1 = shriek_restriction_table(s1, &a);
        assert_eq!(t1.len(), 8);
        assert!(t1.values().all(|t| *t == table(&[(-1, 1)])));
        let pt = fixtures::point();
        let q = constant(pt.clone(), 0);
        let tp = shriek_restriction_table(StratumId(0), &q);
        assert!(tp.values().all(|t| *t == table(&[(0, 1)])));
    }

    #[test]
    fn restriction_to_punctured_cone() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 1);
        let s = Sections::new(&a);
        let (big, small, f) = s.restriction_map(&p.upper(1).unwrap(), &p.all_cells()).unwrap();
        f.validate(&big.complex, &small.complex).unwrap();
        let r = InducedRanks::compute(&f, &big.complex, &small.complex, -3..2);
        assert_eq!(r.at(-1), Some((1, 1, 1)));
        assert!(r.iso(-1));
        assert!(r.injective(0));
        assert!(!r.iso(0)); // H^0 of the link has no preimage
    }

    #[test]
    fn restriction_maps_compose() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 0);
        let s = Sections::new(&a);
        let all = p.all_cells();
        let u1 = p.upper(1).unwrap();
        let t1: CellSet = [p.cell_named("t1").unwrap()].into_iter().collect();
        let (x, w, f1) = s.restriction_map(&u1, &all).unwrap();
        let (_, v, f2) = s.restriction_map(&t1, &u1).unwrap();
        let (_, _, f12) = s.restriction_map(&t1, &all).unwrap();
        let _ = (x, w, v);
        assert_eq!(f1.then(&f2), f12);
        // V = W is the identity
        let (b1, b2, id) = s.restriction_map(&u1, &u1).unwrap();
        assert_eq!(id, ChainMap::identity(&b1.complex));
        assert_eq!(b1.complex, b2.complex);
    }

    #[test]
    fn excision_on_cone_point() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 0);
        let c = p.cell_named("c").unwrap();
        let r = excision_les_check(Some(c), &p.lower(0).unwrap(), &p.lower(1).unwrap(), &a).unwrap();
        assert!(r.is_exact(), "{r:?}");
        assert_eq!(r.middle, table(&[(0, 1)]));
        assert_eq!(r.first, table(&[(2, 1)]));
        assert_eq!(r.third, table(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn excision_degenerate_cases() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 0);
        let l0 = p.lower(0).unwrap();
        let r = excision_les_check(None, &l0, &l0, &a).unwrap();
        assert!(r.is_exact());
        assert!(r.third.is_zero());
        assert_eq!(r.first, r.middle);
        let r = excision_les_check(None, &CellSet::new(), &l0, &a).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.middle, r.third);
        assert!(excision_les_check(None, &p.all_cells(), &l0, &a).is_err());
    }

    #[test]
    fn vanishing_propagation_examples() {
        let p = fixtures::cone();
        let a = constant(p.clone(), 1);
        let all = p.all_cells();
        assert_eq!(vanishing_propagation_check(&all, &a, -1).unwrap(), Propagation::Holds);
        assert_eq!(vanishing_propagation_check(&all, &a, 0).unwrap(), Propagation::Vacuous);
        let sky = SheafComplex::skyscraper(Arc::new(p.clone()), &p.lower(0).unwrap(), &CochainComplex::concentrated(0, 1)).unwrap();
        assert_eq!(vanishing_propagation_check(&all, &sky, 0).unwrap(), Propagation::Holds);
    }
}
