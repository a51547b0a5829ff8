//! Bounded complexes of cellular sheaves.
//!
//! A [`SheafComplex`] assigns a cochain complex to every cell and a chain map
//! to every covering relation `x ⋖ y`, going from the face to the coface.
//! Restrictions along longer chains are composites, so functoriality is the
//! requirement that all cover paths between two cells compose to the same
//! map.

mod deligne;
mod pushforward;
pub mod random;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{cone_unchecked, ChainMap, CochainComplex, RatMatrix, Rational};
use crate::poset::{CellId, CellSet, StratifiedPoset};

pub use deligne::{deligne_ic, deligne_ic_trivial};
pub use pushforward::pushforward_open;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafComplex {
    base: Arc<StratifiedPoset>,
    stalks: Vec<CochainComplex>,
    /// Indexed like `base.covers()`.
    restrictions: Vec<ChainMap>,
}

/// A morphism of sheaf complexes on a common base: one chain map per cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafMap {
    components: Vec<ChainMap>,
}

/// One violated invariant of a [`SheafComplex`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SheafViolation {
    /// The stalk at `cell` fails `d∘d = 0` or has mis-shaped differentials.
    Stalk { cell: CellId, degree: Option<i32> },
    /// The restriction along cover number `cover` has a mis-shaped component.
    RestrictionShape { cover: usize },
    /// The restriction along cover number `cover` does not commute with
    /// the differentials in `degree`.
    NotChainMap { cover: usize, degree: i32 },
    /// Two cover paths from `from` to `to`, ending with the covers
    /// `via_a ⋖ to` and `via_b ⋖ to`, compose to different maps in `degree`.
    Diamond { from: CellId, to: CellId, via_a: CellId, via_b: CellId, degree: i32 },
}

impl fmt::Display for SheafViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafViolation::Stalk { cell, degree } => write!(f, "stalk at #{} is not a complex ({:?})", cell.0, degree),
            SheafViolation::RestrictionShape { cover } => write!(f, "restriction along cover {cover} has the wrong shape"),
            SheafViolation::NotChainMap { cover, degree } => {
                write!(f, "restriction along cover {cover} is not a chain map in degree {degree}")
            }
            SheafViolation::Diamond { from, to, via_a, via_b, degree } => write!(
                f,
                "paths #{} → #{} → #{} and #{} → #{} → #{} disagree in degree {}",
                from.0, via_a.0, to.0, from.0, via_b.0, to.0, degree
            ),
        }
    }
}

/// Result of [`SheafComplex::validate`]; empty iff valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SheafReport {
    pub violations: Vec<SheafViolation>,
}

impl SheafReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A cover `x ⋖ y` inside one stratum along which cohomology is not
/// transported isomorphically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConstructibilityFailure {
    pub lower: CellId,
    pub upper: CellId,
    pub degree: i32,
    pub rank: usize,
    pub dims: (usize, usize),
}

impl SheafComplex {
    /// Assembles a sheaf complex without checking functoriality; see
    /// [`SheafComplex::validate`]. Fails only on a count mismatch.
    pub fn new(base: Arc<StratifiedPoset>, stalks: Vec<CochainComplex>, restrictions: Vec<ChainMap>) -> Result<Self> {
        if stalks.len() != base.cell_count() || restrictions.len() != base.covers().len() {
            return Err(Error::Shape {
                context: "sheaf complex",
                expected: format!("{} stalks and {} restrictions", base.cell_count(), base.covers().len()),
                found: format!("{} and {}", stalks.len(), restrictions.len()),
            });
        }
        Ok(SheafComplex {
            base,
            stalks,
            restrictions,
        })
    }

    pub fn base(&self) -> &StratifiedPoset {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<StratifiedPoset> {
        &self.base
    }

    pub fn stalk(&self, x: CellId) -> &CochainComplex {
        &self.stalks[x.0]
    }

    pub fn stalks(&self) -> &[CochainComplex] {
        &self.stalks
    }

    /// Restriction along the cover with index `i` in `base().covers()`.
    pub fn restriction(&self, i: usize) -> &ChainMap {
        &self.restrictions[i]
    }

    pub fn restrictions(&self) -> &[ChainMap] {
        &self.restrictions
    }

    pub fn is_zero(&self) -> bool {
        self.stalks.iter().all(CochainComplex::is_zero)
    }

    /// Lowest and highest degree carried by any stalk.
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let lo = self.stalks.iter().filter_map(CochainComplex::lo).min()?;
        let hi = self.stalks.iter().filter_map(CochainComplex::hi).max()?;
        Some((lo, hi))
    }

    pub fn zero(base: Arc<StratifiedPoset>) -> Self {
        let n = base.cell_count();
        let m = base.covers().len();
        SheafComplex {
            base,
            stalks: alloc::vec![CochainComplex::zero(); n],
            restrictions: alloc::vec![ChainMap::zero(); m],
        }
    }

    /// `Q^rank` in degree `-shift` at every cell, identity restrictions.
    pub fn constant(base: Arc<StratifiedPoset>, rank: usize, shift: i32) -> Self {
        let stalk = CochainComplex::concentrated(-shift, rank);
        let id = ChainMap::identity(&stalk);
        let n = base.cell_count();
        let m = base.covers().len();
        SheafComplex {
            base,
            stalks: alloc::vec![stalk; n],
            restrictions: alloc::vec![id; m],
        }
    }

    /// Extension by zero of the constant complex `c` on the down-set `z`.
    pub fn skyscraper(base: Arc<StratifiedPoset>, z: &CellSet, c: &CochainComplex) -> Result<Self> {
        if !base.is_down_set(z) {
            return Err(Error::NotClosed { expected: "a down-set" });
        }
        let stalks = base
            .cell_ids()
            .map(|x| if z.contains(&x) { c.clone() } else { CochainComplex::zero() })
            .collect();
        let id = ChainMap::identity(c);
        let restrictions = base
            .covers()
            .iter()
            .map(|(x, y)| {
                if z.contains(x) && z.contains(y) {
                    id.clone()
                } else {
                    ChainMap::zero()
                }
            })
            .collect();
        Ok(SheafComplex {
            base,
            stalks,
            restrictions,
        })
    }

    /// Checks every stalk, every restriction, and functoriality along all
    /// pairs of cover paths.
    pub fn validate(&self) -> SheafReport {
        let p = &*self.base;
        let mut violations = Vec::new();
        for (i, s) in self.stalks.iter().enumerate() {
            if let Err(e) = s.check_square_zero() {
                let degree = match e {
                    Error::NotAComplex { degree } => Some(degree),
                    _ => None,
                };
                violations.push(SheafViolation::Stalk { cell: CellId(i), degree });
            }
        }
        let mut maps_ok = true;
        for (i, (x, y)) in p.covers().iter().enumerate() {
            match self.restrictions[i].validate(self.stalk(*x), self.stalk(*y)) {
                Ok(()) => {}
                Err(Error::NotAChainMap { degree }) => {
                    violations.push(SheafViolation::NotChainMap { cover: i, degree });
                }
                Err(_) => {
                    maps_ok = false;
                    violations.push(SheafViolation::RestrictionShape { cover: i });
                }
            }
        }
        if maps_ok {
            violations.extend(self.functoriality_violations());
        }
        violations.sort();
        SheafReport { violations }
    }

    /// For every `x < z` and every cover `a ⋖ z` with `x ≤ a`, compares
    /// `A(a→z)∘A(x→a)` against one reference composite. By induction on path
    /// length this covers every pair of cover paths.
    fn functoriality_violations(&self) -> Vec<SheafViolation> {
        let p = &*self.base;
        let mut out = Vec::new();
        let order = topological_order(p);
        // composite[(x, z)] along the first path found, with the last cover used
        let mut composite: BTreeMap<(CellId, CellId), (ChainMap, CellId)> = BTreeMap::new();
        for &z in &order {
            for x in p.cell_ids().filter(|x| p.less(*x, z)) {
                let mut reference: Option<(ChainMap, CellId)> = None;
                for &(a, ci) in p.down_covers(z) {
                    if !p.leq(x, a) {
                        continue;
                    }
                    let head = if a == x {
                        ChainMap::identity(self.stalk(x))
                    } else {
                        composite[&(x, a)].0.clone()
                    };
                    let via = head.then(&self.restrictions[ci]);
                    match &reference {
                        None => reference = Some((via, a)),
                        Some((r, ra)) => {
                            if let Some(degree) = first_difference(r, &via) {
                                out.push(SheafViolation::Diamond {
                                    from: x,
                                    to: z,
                                    via_a: *ra,
                                    via_b: a,
                                    degree,
                                });
                            }
                        }
                    }
                }
                if let Some(r) = reference {
                    composite.insert((x, z), r);
                }
            }
        }
        out
    }

    /// Per cover inside a single stratum, checks that cohomology is carried
    /// isomorphically. Empty result means constructible.
    pub fn check_constructible(&self) -> Vec<ConstructibilityFailure> {
        let p = &*self.base;
        let mut out = Vec::new();
        for (i, (x, y)) in p.covers().iter().enumerate() {
            if p.stratum_of(*x) != p.stratum_of(*y) {
                continue;
            }
            let (sx, sy) = (self.stalk(*x), self.stalk(*y));
            let (hx, hy) = (sx.cohomology(), sy.cohomology());
            let degrees: alloc::collections::BTreeSet<i32> =
                hx.iter().chain(hy.iter()).map(|(k, _)| k).collect();
            for k in degrees {
                let dims = (hx.get(k), hy.get(k));
                let rank = if dims.0 == 0 || dims.1 == 0 {
                    0
                } else {
                    self.restrictions[i].induced_rank(sx, sy, k)
                };
                if rank != dims.0 || rank != dims.1 {
                    out.push(ConstructibilityFailure {
                        lower: *x,
                        upper: *y,
                        degree: k,
                        rank,
                        dims,
                    });
                }
            }
        }
        out.sort();
        out
    }

    pub fn is_constructible(&self) -> bool {
        self.check_constructible().is_empty()
    }

    /// `A[n]`: every stalk shifted, restrictions unchanged.
    pub fn shift(&self, n: i32) -> Self {
        SheafComplex {
            base: self.base.clone(),
            stalks: self.stalks.iter().map(|s| s.shift(n)).collect(),
            restrictions: self.restrictions.iter().map(|r| r.shift(n)).collect(),
        }
    }

    pub fn direct_sum(&self, other: &SheafComplex) -> Result<Self> {
        self.same_base(other)?;
        let p = &*self.base;
        let stalks = self
            .stalks
            .iter()
            .zip(&other.stalks)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        let restrictions = p
            .covers()
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                self.restrictions[i].direct_sum(
                    &other.restrictions[i],
                    (self.stalk(*x), other.stalk(*x)),
                    (self.stalk(*y), other.stalk(*y)),
                )
            })
            .collect();
        Ok(SheafComplex {
            base: self.base.clone(),
            stalks,
            restrictions,
        })
    }

    fn same_base(&self, other: &SheafComplex) -> Result<()> {
        if Arc::ptr_eq(&self.base, &other.base) || self.base == other.base {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// Stalkwise good truncation `τ≤k`.
    pub fn truncate_leq(&self, k: i32) -> Self {
        let p = &*self.base;
        let truncated: Vec<(CochainComplex, RatMatrix)> = self.stalks.iter().map(|s| s.truncate_leq(k)).collect();
        let restrictions = p
            .covers()
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                self.restrictions[i].truncate_leq(
                    k,
                    self.stalk(*x),
                    self.stalk(*y),
                    &truncated[x.0].1,
                    &truncated[y.0].1,
                )
            })
            .collect();
        SheafComplex {
            base: self.base.clone(),
            stalks: truncated.into_iter().map(|(c, _)| c).collect(),
            restrictions,
        }
    }

    /// Cellwise mapping cone of `f: self → target`.
    pub fn cone_of(&self, target: &SheafComplex, f: &SheafMap) -> Result<Self> {
        self.same_base(target)?;
        f.validate(self, target)?;
        let p = &*self.base;
        let stalks = p
            .cell_ids()
            .map(|x| cone_unchecked(self.stalk(x), target.stalk(x), &f.components[x.0]))
            .collect();
        let restrictions = p
            .covers()
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                let (sx, sy) = (self.stalk(*x), self.stalk(*y));
                let (tx, ty) = (target.stalk(*x), target.stalk(*y));
                let degrees = crate::linalg::degree_union(&[tx, ty, &sx.shift(1), &sy.shift(1)]);
                let comps = degrees
                    .map(|k| {
                        (
                            k,
                            RatMatrix::block_diag(&[
                                &target.restrictions[i].component(k, tx, ty),
                                &self.restrictions[i].component(k + 1, sx, sy),
                            ]),
                        )
                    })
                    .collect();
                ChainMap::from_components(comps)
            })
            .collect();
        Ok(SheafComplex {
            base: self.base.clone(),
            stalks,
            restrictions,
        })
    }

    /// Human-readable label of a cell, for reports.
    pub fn cell_name(&self, x: CellId) -> &str {
        &self.base.cell(x).name
    }
}

impl SheafMap {
    pub fn new(components: Vec<ChainMap>) -> Self {
        SheafMap { components }
    }

    pub fn identity(a: &SheafComplex) -> Self {
        SheafMap {
            components: a.stalks.iter().map(ChainMap::identity).collect(),
        }
    }

    pub fn zero(a: &SheafComplex) -> Self {
        SheafMap {
            components: alloc::vec![ChainMap::zero(); a.stalks.len()],
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        SheafMap {
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn component(&self, x: CellId) -> &ChainMap {
        &self.components[x.0]
    }

    /// Checks every component is a chain map and every naturality square
    /// commutes.
    pub fn validate(&self, source: &SheafComplex, target: &SheafComplex) -> Result<()> {
        source.same_base(target)?;
        let p = source.base();
        if self.components.len() != p.cell_count() {
            return Err(Error::Shape {
                context: "sheaf map",
                expected: format!("{} components", p.cell_count()),
                found: format!("{}", self.components.len()),
            });
        }
        for x in p.cell_ids() {
            self.components[x.0].validate(source.stalk(x), target.stalk(x))?;
        }
        for (i, (x, y)) in p.covers().iter().enumerate() {
            let lhs = self.components[x.0].then(&target.restrictions[i]);
            let rhs = source.restrictions[i].then(&self.components[y.0]);
            if let Some(k) = first_difference(&lhs, &rhs) {
                return Err(Error::Precondition(format!(
                    "naturality fails on cover {} < {} in degree {k}",
                    p.cell(*x).name,
                    p.cell(*y).name
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn first_difference(a: &ChainMap, b: &ChainMap) -> Option<i32> {
    let mut ka = a.components().peekable();
    let mut kb = b.components().peekable();
    loop {
        match (ka.peek(), kb.peek()) {
            (None, None) => return None,
            (Some((k, _)), None) | (None, Some((k, _))) => return Some(*k),
            (Some((k1, m1)), Some((k2, m2))) => {
                if k1 != k2 {
                    return Some(*k1.min(k2));
                }
                if m1 != m2 {
                    return Some(*k1);
                }
                ka.next();
                kb.next();
            }
        }
    }
}

/// Cells ordered so that every cell comes after all its faces.
pub(crate) fn topological_order(p: &StratifiedPoset) -> Vec<CellId> {
    let mut cells: Vec<CellId> = p.cell_ids().collect();
    cells.sort_by_key(|x| (core::cmp::Reverse(p.strictly_above(*x).len()), *x));
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::rat;

    fn cone() -> Arc<StratifiedPoset> {
        Arc::new(fixtures::cone())
    }

    #[test]
    fn constant_sheaf_is_valid_everywhere() {
        for name in fixtures::NAMES {
            let p = Arc::new(fixtures::by_name(name).unwrap());
            let a = SheafComplex::constant(p, 1, 0);
            assert!(a.validate().is_valid(), "{name}");
            assert!(a.is_constructible(), "{name}");
        }
    }

    #[test]
    fn zeroed_restriction_breaks_a_diamond() {
        let p = cone();
        let mut a = SheafComplex::constant(p.clone(), 1, 0);
        let i = p.cover_index(p.cell_named("a1").unwrap(), p.cell_named("t1").unwrap()).unwrap();
        a.restrictions[i] = ChainMap::zero();
        let report = a.validate();
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            SheafViolation::Diamond { to, .. } if *to == p.cell_named("t1").unwrap()
        )));
    }

    #[test]
    fn non_chain_map_restriction_reported() {
        let p = Arc::new(fixtures::circle());
        let stalk = CochainComplex::new(0, alloc::vec![1, 1], alloc::vec![RatMatrix::identity(1)]).unwrap();
        let mut a = SheafComplex::constant(p.clone(), 1, 0);
        for s in a.stalks.iter_mut() {
            *s = stalk.clone();
        }
        for r in a.restrictions.iter_mut() {
            *r = ChainMap::from_components([(0, RatMatrix::identity(1))].into_iter().collect());
        }
        let report = a.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SheafViolation::NotChainMap { degree: -1 | 0, .. })));
    }

    #[test]
    fn point_skyscrapers_are_constructible() {
        let p = cone();
        let c = p.cell_named("c").unwrap();
        let z: CellSet = [c].into_iter().collect();
        let sky = SheafComplex::skyscraper(p.clone(), &z, &CochainComplex::concentrated(0, 1)).unwrap();
        assert!(sky.validate().is_valid());
        assert!(sky.is_constructible());
        assert!(SheafComplex::skyscraper(p.clone(), &p.upper(1).unwrap(), &CochainComplex::concentrated(0, 1)).is_err());
        let whole = SheafComplex::skyscraper(p.clone(), &p.all_cells(), &CochainComplex::concentrated(0, 1)).unwrap();
        assert_eq!(whole, SheafComplex::constant(p.clone(), 1, 0));
        assert!(SheafComplex::skyscraper(p.clone(), &CellSet::new(), &CochainComplex::concentrated(0, 1))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn vertex_skyscraper_inside_a_stratum_is_not_constructible() {
        let p = Arc::new(fixtures::circle());
        let v1: CellSet = [p.cell_named("v1").unwrap()].into_iter().collect();
        let sky = SheafComplex::skyscraper(p, &v1, &CochainComplex::concentrated(0, 1)).unwrap();
        assert!(sky.validate().is_valid());
        let failures = sky.check_constructible();
        assert_eq!(failures.len(), 2);
        assert!(failures.iter().all(|f| f.degree == 0 && f.dims == (1, 0)));
    }

    #[test]
    fn constant_shifts() {
        let p = cone();
        let a = SheafComplex::constant(p.clone(), 1, 1);
        assert!(a.stalks().iter().all(|s| *s == CochainComplex::concentrated(-1, 1)));
        assert_eq!(SheafComplex::constant(p.clone(), 1, 0).shift(1), a);
        assert_eq!(a.shift(1).shift(-1), a);
    }

    #[test]
    fn sums_and_cones() {
        let p = cone();
        let c = p.cell_named("c").unwrap();
        let constant = SheafComplex::constant(p.clone(), 1, 0);
        let z: CellSet = [c].into_iter().collect();
        let sky = SheafComplex::skyscraper(p.clone(), &z, &CochainComplex::concentrated(0, 1)).unwrap();
        let sum = constant.direct_sum(&sky).unwrap();
        assert!(sum.validate().is_valid());
        for x in p.cell_ids() {
            assert_eq!(sum.stalk(x).total_dim(), if x == c { 2 } else { 1 });
        }
        let cone = sum.cone_of(&sum, &SheafMap::identity(&sum)).unwrap();
        assert!(cone.validate().is_valid());
        assert!(cone.stalks().iter().all(CochainComplex::is_acyclic));

        let twice = SheafMap::identity(&constant).scale(&rat(2));
        assert!(constant.cone_of(&constant, &twice).unwrap().stalks().iter().all(CochainComplex::is_acyclic));
    }

    #[test]
    fn base_mismatch_rejected() {
        let a = SheafComplex::constant(cone(), 1, 0);
        let b = SheafComplex::constant(Arc::new(fixtures::point()), 1, 0);
        assert_eq!(a.direct_sum(&b), Err(Error::BaseMismatch));
    }

    #[test]
    fn truncation_of_shifted_constant() {
        let a = SheafComplex::constant(cone(), 1, 1);
        assert_eq!(a.truncate_leq(-1), a);
        assert_eq!(a.truncate_leq(5), a);
        assert!(a.truncate_leq(-2).is_zero());
    }
}
