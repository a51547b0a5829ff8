use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_traits::One;

use super::echelon::Echelon;
use super::matrix::{MatrixBuilder, RatMatrix};
use super::rational::{rat, Rational};
use crate::error::{Error, Result};

/// A bounded cochain complex of finite-dimensional rational vector spaces.
///
/// Degrees run over `lo..lo + dims.len()`; the differential `d^k` is a
/// `dim(k+1) × dim(k)` matrix. Zero spaces at either end are trimmed, so two
/// complexes are equal iff they have the same spaces and differentials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CochainComplex {
    lo: i32,
    dims: Vec<usize>,
    /// `diffs[i]` maps degree `lo + i` to `lo + i + 1`; one fewer than `dims`.
    diffs: Vec<RatMatrix>,
}

impl CochainComplex {
    pub fn zero() -> Self {
        CochainComplex {
            lo: 0,
            dims: Vec::new(),
            diffs: Vec::new(),
        }
    }

    /// `Q^dim` placed in a single degree.
    pub fn concentrated(degree: i32, dim: usize) -> Self {
        Self::from_parts(degree, alloc::vec![dim], Vec::new())
    }

    /// Builds and validates a complex: shapes must match and `d∘d = 0`.
    ///
    /// `diffs` holds `d^lo, …, d^{lo+n-2}` for `n = dims.len()`.
    pub fn new(lo: i32, dims: Vec<usize>, diffs: Vec<RatMatrix>) -> Result<Self> {
        if diffs.len() + 1 != dims.len().max(1) {
            return Err(Error::Shape {
                context: "cochain complex",
                expected: format!("{} differentials", dims.len().saturating_sub(1)),
                found: format!("{}", diffs.len()),
            });
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.shape() != (dims[i + 1], dims[i]) {
                return Err(Error::Shape {
                    context: "differential",
                    expected: format!("{}x{}", dims[i + 1], dims[i]),
                    found: format!("{}x{}", d.rows(), d.cols()),
                });
            }
        }
        let c = Self::from_parts(lo, dims, diffs);
        c.check_square_zero()?;
        Ok(c)
    }

    /// Unchecked constructor that only trims zero ends.
    pub(crate) fn from_parts(lo: i32, mut dims: Vec<usize>, mut diffs: Vec<RatMatrix>) -> Self {
        let mut lo = lo;
        while dims.last() == Some(&0) {
            dims.pop();
            diffs.pop();
        }
        let lead = dims.iter().take_while(|d| **d == 0).count();
        if lead == dims.len() {
            return Self::zero();
        }
        if lead > 0 {
            dims.drain(..lead);
            diffs.drain(..lead);
            lo += lead as i32;
        }
        CochainComplex { lo, dims, diffs }
    }

    /// Builds a complex from per-degree data, e.g. as produced by a
    /// totalization. Degrees absent from `dims` are zero.
    pub fn from_maps(dims: &BTreeMap<i32, usize>, diffs: BTreeMap<i32, RatMatrix>) -> Result<Self> {
        let (Some(&lo), Some(&hi)) = (dims.keys().next(), dims.keys().next_back()) else {
            return Ok(Self::zero());
        };
        let dim_at = |k: i32| dims.get(&k).copied().unwrap_or(0);
        let ds = (lo..=hi).map(dim_at).collect::<Vec<_>>();
        let mut mats = Vec::with_capacity(ds.len().saturating_sub(1));
        for k in lo..hi {
            mats.push(
                diffs
                    .get(&k)
                    .cloned()
                    .unwrap_or_else(|| RatMatrix::zeros(dim_at(k + 1), dim_at(k))),
            );
        }
        Self::new(lo, ds, mats)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Lowest degree with a nonzero space, `None` for the zero complex.
    pub fn lo(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.lo)
    }

    /// Highest degree with a nonzero space.
    pub fn hi(&self) -> Option<i32> {
        (!self.is_zero()).then(|| self.lo + self.dims.len() as i32 - 1)
    }

    /// Degrees that may carry a nonzero space.
    pub fn degrees(&self) -> core::ops::Range<i32> {
        self.lo..self.lo + self.dims.len() as i32
    }

    pub fn dim(&self, k: i32) -> usize {
        let i = k - self.lo;
        if i < 0 {
            0
        } else {
            self.dims.get(i as usize).copied().unwrap_or(0)
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// The differential `d^k`, a zero matrix of the right shape outside the
    /// stored range.
    pub fn differential(&self, k: i32) -> Cow<'_, RatMatrix> {
        let i = k - self.lo;
        if i >= 0 && (i as usize) < self.diffs.len() {
            Cow::Borrowed(&self.diffs[i as usize])
        } else {
            Cow::Owned(RatMatrix::zeros(self.dim(k + 1), self.dim(k)))
        }
    }

    pub fn check_square_zero(&self) -> Result<()> {
        for w in self.diffs.windows(2).enumerate() {
            let (i, pair) = w;
            if !pair[1].mul(&pair[0]).is_zero() {
                return Err(Error::NotAComplex {
                    degree: self.lo + i as i32,
                });
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|k| sign(k) * self.dim(k) as i64)
            .sum()
    }

    /// Ranks of all differentials, keyed by source degree.
    fn ranks(&self) -> BTreeMap<i32, usize> {
        self.degrees()
            .map(|k| (k, self.differential(k).rank()))
            .collect()
    }

    /// Dimensions of `H^k = ker d^k / im d^{k-1}`.
    pub fn cohomology(&self) -> CohomologyTable {
        let ranks = self.ranks();
        let r = |k: i32| ranks.get(&k).copied().unwrap_or(0);
        let dims = self
            .degrees()
            .map(|k| (k, self.dim(k) - r(k) - r(k - 1)))
            .filter(|(_, h)| *h > 0)
            .collect();
        CohomologyTable {
            dims,
            representatives: None,
        }
    }

    /// Cohomology with a basis of representative cocycles in each degree
    /// (columns of a `dim(k) × h^k` matrix).
    pub fn cohomology_with_representatives(&self) -> CohomologyTable {
        let mut dims = BTreeMap::new();
        let mut reps = BTreeMap::new();
        for k in self.degrees() {
            let z = self.differential(k).kernel();
            if z.cols() == 0 {
                continue;
            }
            let b = self.differential(k - 1);
            let mut ech = Echelon::from_rows(&b.transpose());
            let zt = z.transpose();
            let chosen: Vec<usize> = (0..zt.rows()).filter(|i| ech.insert(zt.row(*i))).collect();
            if !chosen.is_empty() {
                dims.insert(k, chosen.len());
                reps.insert(k, z.select_columns(&chosen));
            }
        }
        CohomologyTable {
            dims,
            representatives: Some(reps),
        }
    }

    /// The shift `C[n]`: `C[n]^k = C^{k+n}` with differential `(-1)^n d`.
    pub fn shift(&self, n: i32) -> Self {
        let s = rat(sign(n));
        CochainComplex {
            lo: self.lo - n,
            dims: self.dims.clone(),
            diffs: self.diffs.iter().map(|d| d.scale(&s)).collect(),
        }
    }

    pub fn direct_sum(&self, other: &CochainComplex) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().unwrap().max(other.hi().unwrap());
        let dims = (lo..=hi).map(|k| self.dim(k) + other.dim(k)).collect();
        let diffs = (lo..hi)
            .map(|k| RatMatrix::block_diag(&[&self.differential(k), &other.differential(k)]))
            .collect();
        Self::from_parts(lo, dims, diffs)
    }

    /// Good truncation `τ≤k`: degrees below `k` unchanged, degree `k`
    /// replaced by the cycles, higher degrees dropped. Also returns the
    /// basis of `ker d^k` used (columns), needed to truncate maps.
    pub fn truncate_leq(&self, k: i32) -> (Self, RatMatrix) {
        if self.is_zero() || k < self.lo {
            return (Self::zero(), RatMatrix::zeros(self.dim(k), 0));
        }
        let z = self.differential(k).kernel();
        let mut dims: Vec<usize> = (self.lo..k).map(|j| self.dim(j)).collect();
        dims.push(z.cols());
        let mut diffs: Vec<RatMatrix> = (self.lo..k - 1).map(|j| self.differential(j).into_owned()).collect();
        if k > self.lo {
            let incoming = self.differential(k - 1);
            let coords = z
                .solve(&incoming)
                .expect("image of d lies in the cycles");
            diffs.push(coords);
        }
        (Self::from_parts(self.lo, dims, diffs), z)
    }
}

/// `(-1)^k`.
pub(crate) fn sign(k: i32) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Degree-indexed dimensions of a cohomology, with optional representatives.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CohomologyTable {
    dims: BTreeMap<i32, usize>,
    representatives: Option<BTreeMap<i32, RatMatrix>>,
}

impl CohomologyTable {
    pub fn from_dims<I: IntoIterator<Item = (i32, usize)>>(dims: I) -> Self {
        CohomologyTable {
            dims: dims.into_iter().filter(|(_, d)| *d > 0).collect(),
            representatives: None,
        }
    }

    pub fn get(&self, k: i32) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Nonzero `(degree, dimension)` pairs in increasing degree.
    pub fn iter(&self) -> impl Iterator<Item = (i32, usize)> + '_ {
        self.dims.iter().map(|(k, d)| (*k, *d))
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn representatives(&self, k: i32) -> Option<&RatMatrix> {
        self.representatives.as_ref()?.get(&k)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.iter().map(|(k, d)| sign(k) * d as i64).sum()
    }

    /// Same dimensions, representatives ignored.
    pub fn same_dims(&self, other: &CohomologyTable) -> bool {
        self.dims == other.dims
    }

    /// The table shifted so that degree `k` moves to `k - n`.
    pub fn shifted(&self, n: i32) -> Self {
        Self::from_dims(self.iter().map(|(k, d)| (k - n, d)))
    }
}

/// A degreewise family of matrices `f^k: source^k → target^k`.
///
/// The complexes themselves are not stored; operations take them as
/// arguments. Missing degrees are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ChainMap {
    components: BTreeMap<i32, RatMatrix>,
}

impl ChainMap {
    pub fn from_components(components: BTreeMap<i32, RatMatrix>) -> Self {
        ChainMap {
            components: components.into_iter().filter(|(_, m)| !m.is_zero()).collect(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(c: &CochainComplex) -> Self {
        Self::from_components(c.degrees().map(|k| (k, RatMatrix::identity(c.dim(k)))).collect())
    }

    pub fn scalar(c: &CochainComplex, s: &Rational) -> Self {
        Self::from_components(c.degrees().map(|k| (k, RatMatrix::scalar(c.dim(k), s))).collect())
    }

    /// Nonzero components in increasing degree.
    pub fn components(&self) -> impl Iterator<Item = (i32, &RatMatrix)> + '_ {
        self.components.iter().map(|(k, m)| (*k, m))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Component in degree `k` with the shape dictated by the two complexes.
    pub fn component(&self, k: i32, source: &CochainComplex, target: &CochainComplex) -> Cow<'_, RatMatrix> {
        match self.components.get(&k) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(RatMatrix::zeros(target.dim(k), source.dim(k))),
        }
    }

    /// Checks shapes and `d_T f = f d_S` in every degree.
    pub fn validate(&self, source: &CochainComplex, target: &CochainComplex) -> Result<()> {
        for (k, m) in &self.components {
            if m.shape() != (target.dim(*k), source.dim(*k)) {
                return Err(Error::Shape {
                    context: "chain map component",
                    expected: format!("{}x{}", target.dim(*k), source.dim(*k)),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        if let Some(k) = self.first_noncommuting_degree(source, target) {
            return Err(Error::NotAChainMap { degree: k });
        }
        Ok(())
    }

    pub(crate) fn first_noncommuting_degree(&self, source: &CochainComplex, target: &CochainComplex) -> Option<i32> {
        let lo = source.lo().into_iter().chain(target.lo()).min()?;
        let hi = source.hi().into_iter().chain(target.hi()).max()?;
        (lo - 1..=hi).find(|&k| {
            let lhs = target.differential(k).mul(&self.component(k, source, target));
            let rhs = self.component(k + 1, source, target).mul(&source.differential(k));
            lhs != rhs
        })
    }

    /// `g ∘ f` for `f = self: A → B` and `g: B → C`.
    pub fn then(&self, g: &ChainMap) -> ChainMap {
        let comps = self
            .components
            .iter()
            .filter_map(|(k, f)| g.components.get(k).map(|gk| (*k, gk.mul(f))))
            .collect();
        Self::from_components(comps)
    }

    pub fn add(&self, other: &ChainMap, source: &CochainComplex, target: &CochainComplex) -> ChainMap {
        let keys: alloc::collections::BTreeSet<i32> =
            self.components.keys().chain(other.components.keys()).copied().collect();
        let comps = keys
            .into_iter()
            .map(|k| {
                (
                    k,
                    self.component(k, source, target)
                        .add(&other.component(k, source, target)),
                )
            })
            .collect();
        Self::from_components(comps)
    }

    pub fn scale(&self, s: &Rational) -> ChainMap {
        Self::from_components(self.components.iter().map(|(k, m)| (*k, m.scale(s))).collect())
    }

    /// The same components viewed as a map `A[n] → B[n]`.
    pub fn shift(&self, n: i32) -> ChainMap {
        Self::from_components(self.components.iter().map(|(k, m)| (k - n, m.clone())).collect())
    }

    pub fn direct_sum(&self, other: &ChainMap, sources: (&CochainComplex, &CochainComplex), targets: (&CochainComplex, &CochainComplex)) -> ChainMap {
        let degrees = degree_union(&[sources.0, sources.1, targets.0, targets.1]);
        Self::from_components(
            degrees
                .map(|k| {
                    (
                        k,
                        RatMatrix::block_diag(&[
                            &self.component(k, sources.0, targets.0),
                            &other.component(k, sources.1, targets.1),
                        ]),
                    )
                })
                .collect(),
        )
    }

    /// Rank of the induced map `H^k(source) → H^k(target)`:
    /// `rank [f(Z^k) | B^k] - rank B^k`.
    pub fn induced_rank(&self, source: &CochainComplex, target: &CochainComplex, k: i32) -> usize {
        let z = source.differential(k).kernel();
        if z.cols() == 0 {
            return 0;
        }
        let fz = self.component(k, source, target).mul(&z);
        let b = target.differential(k - 1);
        let both = RatMatrix::hstack(target.dim(k), &[&fz, &b]);
        both.rank() - b.rank()
    }

    /// The map induced on the truncations `τ≤k`, given the cycle bases
    /// returned by [`CochainComplex::truncate_leq`].
    pub fn truncate_leq(&self, k: i32, source: &CochainComplex, target: &CochainComplex, source_cycles: &RatMatrix, target_cycles: &RatMatrix) -> ChainMap {
        let mut comps: BTreeMap<i32, RatMatrix> = self
            .components
            .range(..k)
            .map(|(j, m)| (*j, m.clone()))
            .collect();
        if source_cycles.cols() > 0 && target_cycles.cols() > 0 {
            let image = self.component(k, source, target).mul(source_cycles);
            let coords = target_cycles
                .solve(&image)
                .expect("chain maps send cycles to cycles");
            comps.insert(k, coords);
        }
        Self::from_components(comps)
    }
}

pub(crate) fn degree_union(cs: &[&CochainComplex]) -> core::ops::Range<i32> {
    let lo = cs.iter().filter_map(|c| c.lo()).min();
    let hi = cs.iter().filter_map(|c| c.hi()).max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => lo..hi + 1,
        _ => 0..0,
    }
}

/// Mapping cone of `f: S → T`: `Cone^k = T^k ⊕ S^{k+1}` with differential
/// `(t, s) ↦ (d_T t + f s, -d_S s)`.
pub fn cone(source: &CochainComplex, target: &CochainComplex, f: &ChainMap) -> Result<CochainComplex> {
    f.validate(source, target)?;
    Ok(cone_unchecked(source, target, f))
}

pub(crate) fn cone_unchecked(source: &CochainComplex, target: &CochainComplex, f: &ChainMap) -> CochainComplex {
    let shifted = source.shift(1);
    let degrees = degree_union(&[target, &shifted]);
    if degrees.is_empty() {
        return CochainComplex::zero();
    }
    let lo = degrees.start;
    let dims: Vec<usize> = degrees.clone().map(|k| target.dim(k) + source.dim(k + 1)).collect();
    let diffs = (lo..degrees.end - 1)
        .map(|k| {
            let (t0, s0) = (target.dim(k), source.dim(k + 1));
            let (t1, s1) = (target.dim(k + 1), source.dim(k + 2));
            let mut b = MatrixBuilder::new(t1 + s1, t0 + s0);
            b.add_block(0, 0, &target.differential(k));
            b.add_block(0, t0, &f.component(k + 1, source, target));
            b.add_scaled_block(t1, t0, &source.differential(k + 1), -1);
            b.build()
        })
        .collect();
    CochainComplex::from_parts(lo, dims, diffs)
}

impl CochainComplex {
    /// Mapping cone of `f: self → target`.
    pub fn cone(&self, target: &CochainComplex, f: &ChainMap) -> Result<CochainComplex> {
        cone(self, target, f)
    }
}

/// The canonical maps `T → Cone(f)` and `Cone(f) → S[1]`.
pub fn cone_maps(source: &CochainComplex, target: &CochainComplex) -> (ChainMap, ChainMap) {
    let degrees = degree_union(&[target, &source.shift(1)]);
    let mut incl = BTreeMap::new();
    let mut proj = BTreeMap::new();
    for k in degrees {
        let (t, s) = (target.dim(k), source.dim(k + 1));
        incl.insert(
            k,
            RatMatrix::from_entries(t + s, t, (0..t).map(|i| (i, i, Rational::one()))),
        );
        proj.insert(
            k,
            RatMatrix::from_entries(s, t + s, (0..s).map(|i| (i, t + i, Rational::one()))),
        );
    }
    (ChainMap::from_components(incl), ChainMap::from_components(proj))
}

/// A bounded double complex `D^{p,q}` with horizontal maps `(p,q) → (p+1,q)`
/// and vertical maps `(p,q) → (p,q+1)`. The two differentials are expected to
/// commute; the totalization inserts the sign `(-1)^p` on the vertical part.
#[derive(Clone, Debug, Default)]
pub struct DoubleComplex {
    dims: BTreeMap<(i32, i32), usize>,
    horizontal: BTreeMap<(i32, i32), RatMatrix>,
    vertical: BTreeMap<(i32, i32), RatMatrix>,
}

impl DoubleComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_dim(&mut self, p: i32, q: i32, dim: usize) {
        if dim > 0 {
            self.dims.insert((p, q), dim);
        } else {
            self.dims.remove(&(p, q));
        }
    }

    pub fn dim(&self, p: i32, q: i32) -> usize {
        self.dims.get(&(p, q)).copied().unwrap_or(0)
    }

    /// Sets `d_h: D^{p,q} → D^{p+1,q}`.
    pub fn set_horizontal(&mut self, p: i32, q: i32, m: RatMatrix) {
        self.horizontal.insert((p, q), m);
    }

    /// Sets `d_v: D^{p,q} → D^{p,q+1}`.
    pub fn set_vertical(&mut self, p: i32, q: i32, m: RatMatrix) {
        self.vertical.insert((p, q), m);
    }

    fn check_shapes(&self) -> Result<()> {
        for ((p, q), m) in &self.horizontal {
            let want = (self.dim(p + 1, *q), self.dim(*p, *q));
            if m.shape() != want {
                return Err(Error::Shape {
                    context: "horizontal differential",
                    expected: format!("{}x{}", want.0, want.1),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        for ((p, q), m) in &self.vertical {
            let want = (self.dim(*p, q + 1), self.dim(*p, *q));
            if m.shape() != want {
                return Err(Error::Shape {
                    context: "vertical differential",
                    expected: format!("{}x{}", want.0, want.1),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        Ok(())
    }

    /// `Tot^n = ⊕_{p+q=n} D^{p,q}` (blocks ordered by increasing `p`) with
    /// `d = d_h + (-1)^p d_v`. Fails if the result does not square to zero.
    pub fn total_complex(&self) -> Result<CochainComplex> {
        self.check_shapes()?;
        let mut blocks: BTreeMap<i32, Vec<(i32, i32, usize)>> = BTreeMap::new();
        for ((p, q), d) in &self.dims {
            blocks.entry(p + q).or_default().push((*p, *q, *d));
        }
        let mut offsets: BTreeMap<(i32, i32), usize> = BTreeMap::new();
        let mut tot_dims: BTreeMap<i32, usize> = BTreeMap::new();
        for (n, bs) in &blocks {
            let mut off = 0;
            for (p, q, d) in bs {
                offsets.insert((*p, *q), off);
                off += d;
            }
            tot_dims.insert(*n, off);
        }
        let mut builders: BTreeMap<i32, MatrixBuilder> = BTreeMap::new();
        let tdim = |n: i32| tot_dims.get(&n).copied().unwrap_or(0);
        for ((p, q), m) in &self.horizontal {
            if m.is_zero() {
                continue;
            }
            let n = p + q;
            let b = builders
                .entry(n)
                .or_insert_with(|| MatrixBuilder::new(tdim(n + 1), tdim(n)));
            b.add_block(offsets[&(p + 1, *q)], offsets[&(*p, *q)], m);
        }
        for ((p, q), m) in &self.vertical {
            if m.is_zero() {
                continue;
            }
            let n = p + q;
            let b = builders
                .entry(n)
                .or_insert_with(|| MatrixBuilder::new(tdim(n + 1), tdim(n)));
            b.add_scaled_block(offsets[&(*p, q + 1)], offsets[&(*p, *q)], m, sign(*p) as i32);
        }
        let diffs = builders.into_iter().map(|(n, b)| (n, b.build())).collect();
        CochainComplex::from_maps(&tot_dims, diffs)
    }
}

impl CochainComplex {
    /// Whether this complex has trivial cohomology.
    pub fn is_acyclic(&self) -> bool {
        self.cohomology().is_zero()
    }
}
