//! Finite stratified face posets.
//!
//! A cell `x` is a face of `y` when `x < y`. Open sets of the Alexandrov
//! topology are up-sets, so the smallest open neighbourhood of `x` is its
//! star `U_x = { y : y ≥ x }`, and closures are down-sets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumId(pub usize);

pub type CellSet = BTreeSet<CellId>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub name: String,
    /// Dimension of the cell in the geometric realization.
    pub cell_dim: u32,
    pub stratum: StratumId,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stratum {
    pub name: String,
    /// Complex dimension of the stratum; the perversity inequalities use it.
    pub pdim: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FiltrationKind {
    /// `U^m`: cells in strata with `pdim ≥ m` (open).
    Upper,
    /// `L^m`: cells in strata with `pdim ≤ m` (closed).
    Lower,
}

/// One violated invariant of a [`StratifiedPoset`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PosetViolation {
    /// The covering relations contain a cycle through this cell.
    Cycle { cell: CellId },
    /// `lower ⋖ upper` but `cell_dim(lower) ≥ cell_dim(upper)`.
    CoverDimension { lower: CellId, upper: CellId },
    /// `face < cell`, different strata, but the face's stratum is not of
    /// strictly lower dimension.
    Frontier { cell: CellId, face: CellId },
    /// Geometric flag set but `max cell_dim ≠ 2·pdim` on this stratum.
    Geometric { stratum: StratumId, expected: u32, found: Option<u32> },
}

impl fmt::Display for PosetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosetViolation::Cycle { cell } => write!(f, "order cycle through cell #{}", cell.0),
            PosetViolation::CoverDimension { lower, upper } => {
                write!(f, "cover #{} < #{} does not raise cell dimension", lower.0, upper.0)
            }
            PosetViolation::Frontier { cell, face } => {
                write!(f, "frontier condition fails: face #{} of #{}", face.0, cell.0)
            }
            PosetViolation::Geometric { stratum, expected, found } => write!(
                f,
                "stratum #{} has top cell dimension {:?}, expected {}",
                stratum.0, found, expected
            ),
        }
    }
}

/// Result of [`StratifiedPoset::validate`]; empty iff valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PosetReport {
    pub violations: Vec<PosetViolation>,
}

impl PosetReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A finite cell poset with a stratification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratifiedPoset {
    cells: Vec<Cell>,
    strata: Vec<Stratum>,
    covers: Vec<(CellId, CellId)>,
    geometric: bool,
    up: Vec<Vec<(CellId, usize)>>,
    down: Vec<Vec<(CellId, usize)>>,
    /// `above[x]` lists every `y > x` in increasing id order.
    above: Vec<Vec<CellId>>,
    less: Vec<bool>,
}

impl StratifiedPoset {
    pub fn builder() -> PosetBuilder {
        PosetBuilder::default()
    }

    fn from_parts(cells: Vec<Cell>, strata: Vec<Stratum>, covers: Vec<(CellId, CellId)>, geometric: bool) -> Self {
        let n = cells.len();
        let mut up = vec![Vec::new(); n];
        let mut down = vec![Vec::new(); n];
        for (i, (x, y)) in covers.iter().enumerate() {
            up[x.0].push((*y, i));
            down[y.0].push((*x, i));
        }
        let mut less = vec![false; n * n];
        for x in 0..n {
            let mut stack: Vec<usize> = up[x].iter().map(|(y, _)| y.0).collect();
            while let Some(y) = stack.pop() {
                if !less[x * n + y] {
                    less[x * n + y] = true;
                    stack.extend(up[y].iter().map(|(z, _)| z.0));
                }
            }
        }
        let above = (0..n)
            .map(|x| (0..n).filter(|y| less[x * n + y]).map(CellId).collect())
            .collect();
        StratifiedPoset {
            cells,
            strata,
            covers,
            geometric,
            up,
            down,
            above,
            less,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellId, &Cell)> + '_ {
        self.cells.iter().enumerate().map(|(i, c)| (CellId(i), c))
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len()).map(CellId)
    }

    pub fn cell(&self, x: CellId) -> &Cell {
        &self.cells[x.0]
    }

    pub fn strata(&self) -> impl Iterator<Item = (StratumId, &Stratum)> + '_ {
        self.strata.iter().enumerate().map(|(i, s)| (StratumId(i), s))
    }

    pub fn stratum_count(&self) -> usize {
        self.strata.len()
    }

    pub fn stratum(&self, s: StratumId) -> &Stratum {
        &self.strata[s.0]
    }

    pub fn stratum_of(&self, x: CellId) -> StratumId {
        self.cells[x.0].stratum
    }

    /// `pdim` of the stratum containing `x`.
    pub fn pdim_of(&self, x: CellId) -> u32 {
        self.strata[self.cells[x.0].stratum.0].pdim
    }

    pub fn covers(&self) -> &[(CellId, CellId)] {
        &self.covers
    }

    pub fn is_geometric(&self) -> bool {
        self.geometric
    }

    pub fn find_cell(&self, name: &str) -> Option<CellId> {
        self.cells.iter().position(|c| c.name == name).map(CellId)
    }

    pub fn find_stratum(&self, name: &str) -> Option<StratumId> {
        self.strata.iter().position(|s| s.name == name).map(StratumId)
    }

    pub fn cell_named(&self, name: &str) -> Result<CellId> {
        self.find_cell(name).ok_or_else(|| Error::Unknown {
            kind: "cell",
            name: name.into(),
        })
    }

    /// Cells covering `x`, with the index of each covering relation.
    pub fn up_covers(&self, x: CellId) -> &[(CellId, usize)] {
        &self.up[x.0]
    }

    /// Cells covered by `x`, with the index of each covering relation.
    pub fn down_covers(&self, x: CellId) -> &[(CellId, usize)] {
        &self.down[x.0]
    }

    pub fn cover_index(&self, x: CellId, y: CellId) -> Option<usize> {
        self.up[x.0].iter().find(|(z, _)| *z == y).map(|(_, i)| *i)
    }

    /// Strict order `x < y`.
    #[inline]
    pub fn less(&self, x: CellId, y: CellId) -> bool {
        self.less[x.0 * self.cells.len() + y.0]
    }

    #[inline]
    pub fn leq(&self, x: CellId, y: CellId) -> bool {
        x == y || self.less(x, y)
    }

    /// All `y > x`.
    pub fn strictly_above(&self, x: CellId) -> &[CellId] {
        &self.above[x.0]
    }

    /// The star `U_x = { y : y ≥ x }`, the smallest open set containing `x`.
    pub fn star(&self, x: CellId) -> CellSet {
        let mut s: CellSet = self.above[x.0].iter().copied().collect();
        s.insert(x);
        s
    }

    /// `{ y : y ≤ x }`.
    pub fn down_closure(&self, x: CellId) -> CellSet {
        self.cell_ids().filter(|y| self.leq(*y, x)).collect()
    }

    pub fn all_cells(&self) -> CellSet {
        self.cell_ids().collect()
    }

    pub fn is_up_set(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.up[x.0].iter().all(|(y, _)| a.contains(y)))
    }

    pub fn is_down_set(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.down[x.0].iter().all(|(y, _)| a.contains(y)))
    }

    /// Smallest down-set containing `a`.
    pub fn closure(&self, a: &CellSet) -> CellSet {
        let mut out = a.clone();
        let mut stack: Vec<CellId> = a.iter().copied().collect();
        while let Some(x) = stack.pop() {
            for (y, _) in &self.down[x.0] {
                if out.insert(*y) {
                    stack.push(*y);
                }
            }
        }
        out
    }

    pub fn cells_of_stratum(&self, s: StratumId) -> CellSet {
        self.cell_ids().filter(|x| self.stratum_of(*x) == s).collect()
    }

    /// Largest `pdim` over the strata meeting `a`; `-1` when `a` is empty.
    pub fn set_dimension(&self, a: &CellSet) -> i64 {
        a.iter().map(|x| self.pdim_of(*x) as i64).max().unwrap_or(-1)
    }

    pub fn max_pdim(&self) -> u32 {
        self.strata.iter().map(|s| s.pdim).max().unwrap_or(0)
    }

    pub fn max_cell_dim(&self) -> u32 {
        self.cells.iter().map(|c| c.cell_dim).max().unwrap_or(0)
    }

    /// `U^m` (upper) or `L^m` (lower). Fails if the result is not open,
    /// respectively closed, which only happens when the frontier condition
    /// is violated.
    pub fn filtration(&self, m: u32, kind: FiltrationKind) -> Result<CellSet> {
        let set: CellSet = self
            .cell_ids()
            .filter(|x| match kind {
                FiltrationKind::Upper => self.pdim_of(*x) >= m,
                FiltrationKind::Lower => self.pdim_of(*x) <= m,
            })
            .collect();
        match kind {
            FiltrationKind::Upper if !self.is_up_set(&set) => Err(Error::NotClosed { expected: "an up-set" }),
            FiltrationKind::Lower if !self.is_down_set(&set) => Err(Error::NotClosed { expected: "a down-set" }),
            _ => Ok(set),
        }
    }

    pub fn upper(&self, m: u32) -> Result<CellSet> {
        self.filtration(m, FiltrationKind::Upper)
    }

    pub fn lower(&self, m: u32) -> Result<CellSet> {
        self.filtration(m, FiltrationKind::Lower)
    }

    pub fn validate(&self) -> PosetReport {
        let mut violations = Vec::new();
        for x in self.cell_ids() {
            if self.less(x, x) {
                violations.push(PosetViolation::Cycle { cell: x });
            }
        }
        for (x, y) in &self.covers {
            if self.cell(*x).cell_dim >= self.cell(*y).cell_dim {
                violations.push(PosetViolation::CoverDimension { lower: *x, upper: *y });
            }
        }
        for x in self.cell_ids() {
            let s = self.stratum_of(x);
            for y in self.cell_ids() {
                if y != x && self.less(y, x) && self.stratum_of(y) != s && self.pdim_of(y) >= self.pdim_of(x) {
                    violations.push(PosetViolation::Frontier { cell: x, face: y });
                }
            }
        }
        if self.geometric {
            for (sid, s) in self.strata() {
                let found = self
                    .cells
                    .iter()
                    .filter(|c| c.stratum == sid)
                    .map(|c| c.cell_dim)
                    .max();
                if found != Some(2 * s.pdim) {
                    violations.push(PosetViolation::Geometric {
                        stratum: sid,
                        expected: 2 * s.pdim,
                        found,
                    });
                }
            }
        }
        violations.sort();
        PosetReport { violations }
    }

    /// Replaces all strata of equal `pdim` by their union. A stratum that is
    /// alone in its dimension keeps its name; merged strata get the original
    /// names joined by `+`. Empty strata are dropped.
    pub fn merge_strata_by_dimension(&self) -> StratifiedPoset {
        let mut by_dim: BTreeMap<u32, Vec<StratumId>> = BTreeMap::new();
        for (sid, s) in self.strata() {
            if self.cells.iter().any(|c| c.stratum == sid) {
                by_dim.entry(s.pdim).or_default().push(sid);
            }
        }
        let mut strata = Vec::new();
        let mut remap = vec![StratumId(usize::MAX); self.strata.len()];
        for (pdim, ids) in &by_dim {
            let name = ids
                .iter()
                .map(|s| self.strata[s.0].name.as_str())
                .collect::<Vec<_>>()
                .join("+");
            for s in ids {
                remap[s.0] = StratumId(strata.len());
            }
            strata.push(Stratum { name, pdim: *pdim });
        }
        let cells = self
            .cells
            .iter()
            .map(|c| Cell {
                stratum: remap[c.stratum.0],
                ..c.clone()
            })
            .collect();
        Self::from_parts(cells, strata, self.covers.clone(), self.geometric)
    }

    /// Whether every `pdim` is carried by at most one stratum.
    pub fn is_merged(&self) -> bool {
        let dims: BTreeSet<u32> = self.strata.iter().map(|s| s.pdim).collect();
        dims.len() == self.strata.len()
    }

    /// The induced subposet on an up-set or down-set `a`, keeping cell and
    /// stratum names. Covering relations restrict because such sets are
    /// order-convex. Strata with no cells in `a` are dropped.
    pub fn induced(&self, a: &CellSet) -> Result<(StratifiedPoset, Vec<CellId>)> {
        if !self.is_up_set(a) && !self.is_down_set(a) {
            return Err(Error::NotClosed {
                expected: "an up-set or a down-set",
            });
        }
        let embedding: Vec<CellId> = a.iter().copied().collect();
        let mut new_id = vec![usize::MAX; self.cells.len()];
        for (i, x) in embedding.iter().enumerate() {
            new_id[x.0] = i;
        }
        let used: BTreeSet<StratumId> = embedding.iter().map(|x| self.stratum_of(*x)).collect();
        let mut stratum_id = vec![usize::MAX; self.strata.len()];
        let mut strata = Vec::new();
        for s in &used {
            stratum_id[s.0] = strata.len();
            strata.push(self.strata[s.0].clone());
        }
        let cells = embedding
            .iter()
            .map(|x| {
                let c = &self.cells[x.0];
                Cell {
                    name: c.name.clone(),
                    cell_dim: c.cell_dim,
                    stratum: StratumId(stratum_id[c.stratum.0]),
                }
            })
            .collect();
        let covers = self
            .covers
            .iter()
            .filter(|(x, y)| new_id[x.0] != usize::MAX && new_id[y.0] != usize::MAX)
            .map(|(x, y)| (CellId(new_id[x.0]), CellId(new_id[y.0])))
            .collect();
        Ok((Self::from_parts(cells, strata, covers, self.geometric), embedding))
    }

    /// Names of the cells in `a`, in id order.
    pub fn names(&self, a: &CellSet) -> Vec<&str> {
        a.iter().map(|x| self.cells[x.0].name.as_str()).collect()
    }
}

/// Incremental constructor for [`StratifiedPoset`]; checks referential
/// integrity, leaving the mathematical invariants to
/// [`StratifiedPoset::validate`].
#[derive(Debug, Clone, Default)]
pub struct PosetBuilder {
    cells: Vec<(String, u32, String)>,
    strata: Vec<Stratum>,
    covers: Vec<(String, String)>,
    geometric: bool,
}

impl PosetBuilder {
    pub fn stratum(mut self, name: &str, pdim: u32) -> Self {
        self.strata.push(Stratum {
            name: name.into(),
            pdim,
        });
        self
    }

    /// Adds a cell in the stratum called `stratum`.
    pub fn cell(mut self, name: &str, cell_dim: u32, stratum: &str) -> Self {
        self.cells.push((name.into(), cell_dim, stratum.into()));
        self
    }

    /// Declares `lower ⋖ upper`.
    pub fn cover(mut self, lower: &str, upper: &str) -> Self {
        self.covers.push((lower.into(), upper.into()));
        self
    }

    pub fn geometric(mut self, flag: bool) -> Self {
        self.geometric = flag;
        self
    }

    pub fn build(self) -> Result<StratifiedPoset> {
        let mut stratum_ids = BTreeMap::new();
        for (i, s) in self.strata.iter().enumerate() {
            if stratum_ids.insert(s.name.clone(), StratumId(i)).is_some() {
                return Err(Error::InvalidPoset(format!("duplicate stratum `{}`", s.name)));
            }
        }
        let mut names = BTreeMap::new();
        let mut cells = Vec::with_capacity(self.cells.len());
        for (i, (name, cell_dim, stratum)) in self.cells.into_iter().enumerate() {
            let Some(sid) = stratum_ids.get(&stratum) else {
                return Err(Error::InvalidPoset(format!(
                    "cell `{name}` refers to unknown stratum `{stratum}`"
                )));
            };
            if names.insert(name.clone(), CellId(i)).is_some() {
                return Err(Error::InvalidPoset(format!("duplicate cell `{name}`")));
            }
            cells.push(Cell {
                name,
                cell_dim,
                stratum: *sid,
            });
        }
        let mut covers = Vec::new();
        let mut seen = BTreeSet::new();
        for (a, b) in &self.covers {
            let lookup = |n: &String| {
                names.get(n).copied().ok_or_else(|| Error::Unknown {
                    kind: "cell",
                    name: n.clone(),
                })
            };
            let (x, y) = (lookup(a)?, lookup(b)?);
            if x == y {
                return Err(Error::InvalidPoset(format!("cell `{a}` covers itself")));
            }
            if !seen.insert((x, y)) {
                return Err(Error::InvalidPoset(format!("duplicate cover `{a}` < `{b}`")));
            }
            covers.push((x, y));
        }
        Ok(StratifiedPoset::from_parts(cells, self.strata, covers, self.geometric))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(p: &StratifiedPoset, names: &[&str]) -> CellSet {
        names.iter().map(|n| p.find_cell(n).unwrap()).collect()
    }

    #[test]
    fn point_is_valid() {
        assert!(fixtures::point().validate().is_valid());
    }

    #[test]
    fn incomparable_cells_are_valid() {
        let p = StratifiedPoset::builder()
            .stratum("A", 0)
            .stratum("B", 1)
            .cell("a", 0, "A")
            .cell("b", 2, "B")
            .build()
            .unwrap();
        assert!(p.validate().is_valid());
    }

    #[test]
    fn swapped_cone_strata_violate_frontier_at_cone_point() {
        let cone = fixtures::cone();
        let c = cone.cell_named("c").unwrap();
        let mut b = StratifiedPoset::builder().stratum("S0", 1).stratum("S1", 0);
        for (_, cell) in cone.cells() {
            b = b.cell(&cell.name, cell.cell_dim, &cone.stratum(cell.stratum).name);
        }
        for (x, y) in cone.covers() {
            b = b.cover(&cone.cell(*x).name, &cone.cell(*y).name);
        }
        let bad = b.build().unwrap();
        let report = bad.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .all(|v| matches!(v, PosetViolation::Frontier { face, .. } if *face == c)));
        assert_eq!(report.violations.len(), 4);
    }

    #[test]
    fn cycle_and_cover_dimension_detected() {
        let p = StratifiedPoset::builder()
            .stratum("S", 0)
            .cell("a", 0, "S")
            .cell("b", 1, "S")
            .cover("a", "b")
            .cover("b", "a")
            .build()
            .unwrap();
        let v = p.validate().violations;
        assert!(v.contains(&PosetViolation::Cycle { cell: CellId(0) }));
        assert!(v.contains(&PosetViolation::CoverDimension {
            lower: CellId(1),
            upper: CellId(0)
        }));
    }

    #[test]
    fn builder_rejects_bad_references() {
        assert!(StratifiedPoset::builder().cell("a", 0, "nope").build().is_err());
        assert!(StratifiedPoset::builder()
            .stratum("S", 0)
            .cell("a", 0, "S")
            .cover("a", "b")
            .build()
            .is_err());
        assert!(StratifiedPoset::builder()
            .stratum("S", 0)
            .cell("a", 0, "S")
            .cell("a", 0, "S")
            .build()
            .is_err());
    }

    #[test]
    fn merge_examples() {
        let p = fixtures::point();
        assert_eq!(p.merge_strata_by_dimension(), p);

        let two = StratifiedPoset::builder()
            .stratum("P", 0)
            .stratum("Q", 0)
            .cell("p", 0, "P")
            .cell("q", 0, "Q")
            .build()
            .unwrap();
        let m = two.merge_strata_by_dimension();
        assert_eq!(m.stratum_count(), 1);
        assert_eq!(m.cells_of_stratum(StratumId(0)).len(), 2);

        let s = fixtures::suspension();
        let dims: Vec<u32> = s.strata().map(|(_, st)| st.pdim).collect();
        assert_eq!(dims, [0, 0, 1]);
        let m = s.merge_strata_by_dimension();
        let dims: Vec<u32> = m.strata().map(|(_, st)| st.pdim).collect();
        assert_eq!(dims, [0, 1]);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn cone_filtrations() {
        let p = fixtures::cone();
        assert_eq!(p.upper(0).unwrap(), p.all_cells());
        assert_eq!(p.lower(p.max_pdim()).unwrap(), p.all_cells());
        let u1 = p.upper(1).unwrap();
        assert_eq!(u1.len(), p.cell_count() - 1);
        assert!(!u1.contains(&p.cell_named("c").unwrap()));
        assert_eq!(p.lower(1).unwrap(), p.all_cells());
        assert_eq!(p.lower(0).unwrap(), set(&p, &["c"]));
    }

    #[test]
    fn point_filtrations() {
        let p = fixtures::point();
        assert!(p.upper(1).unwrap().is_empty());
        assert_eq!(p.lower(1).unwrap().len(), 1);
    }

    #[test]
    fn cone_closure_and_dimension() {
        let p = fixtures::cone();
        assert!(p.closure(&CellSet::new()).is_empty());
        let t1 = set(&p, &["t1"]);
        assert_eq!(p.closure(&t1), set(&p, &["t1", "a1", "a2", "e1", "v1", "v2", "c"]));
        let l0 = p.lower(0).unwrap();
        assert_eq!(p.closure(&l0), l0);
        assert_eq!(p.set_dimension(&CellSet::new()), -1);
        assert_eq!(p.set_dimension(&set(&p, &["c"])), 0);
        assert_eq!(p.set_dimension(&p.all_cells()), 1);
    }

    #[test]
    fn induced_keeps_names() {
        let p = fixtures::cone();
        let (sub, emb) = p.induced(&p.upper(1).unwrap()).unwrap();
        assert_eq!(sub.cell_count(), emb.len());
        assert!(sub.find_cell("c").is_none());
        assert_eq!(sub.stratum_count(), 1);
        assert!(sub.validate().is_valid());
    }
}
