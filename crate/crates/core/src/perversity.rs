//! Support and cosupport conditions for the middle perversity.
//!
//! Four characterizations are implemented independently:
//!
//! - `S1`/`C1`: dimension bounds on the closed sets `supp^k` and
//!   `cosupp^k`, built cell by cell;
//! - `S2`/`C2`: vanishing of `r_S^* A` and `r_S^! A` per stratum;
//! - `newS`/`newC`: vanishing of `u_m^* A` on `U^m` and of `ℓ_m^! A` on `L^m`.
//!
//! A cell `σ` belongs to `cosupp^k` when its costalk, shifted by
//! `cell_dim(σ)`, has cohomology in degree `k`; the costalk of an open cell
//! at an interior point is the cell costalk shifted by the cell dimension.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::fmt;

use crate::derived::{InducedRanks, Sections};
use crate::error::{Error, Result};
use crate::linalg::CohomologyTable;
use crate::poset::{CellId, CellSet, StratifiedPoset, StratumId};
use crate::sheaf::SheafComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    S1,
    C1,
    S2,
    C2,
    NewSupport,
    NewCosupport,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::S1,
        Condition::C1,
        Condition::S2,
        Condition::C2,
        Condition::NewSupport,
        Condition::NewCosupport,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::S1 => "S1",
            Condition::C1 => "C1",
            Condition::S2 => "S2",
            Condition::C2 => "C2",
            Condition::NewSupport => "newS",
            Condition::NewCosupport => "newC",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Condition::ALL.into_iter().find(|c| c.label() == s)
    }

    pub fn is_support(self) -> bool {
        matches!(self, Condition::S1 | Condition::S2 | Condition::NewSupport)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A nonzero cohomology group that breaks a condition.
///
/// `degree` is the degree in the object the condition talks about: the
/// stalk for `S1`, `S2`, `newS`; the point costalk for `C1` (the cell
/// costalk is nonzero in `degree - cell_dim`); local cohomology with
/// supports in `closure(S)` for `C2` and in `L^m` for `newC`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub condition: Condition,
    /// The filtration index `m` for `newS`/`newC`.
    pub level: Option<u32>,
    pub degree: i32,
    pub cell: CellId,
    pub stratum: StratumId,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

/// Verdict for one condition. Failures carry witnesses sorted by
/// `(level, degree, cell)`, so the first one has the smallest failing `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub condition: Condition,
    pub status: Status,
    pub witnesses: Vec<Witness>,
}

impl Outcome {
    fn from_witnesses(condition: Condition, mut witnesses: Vec<Witness>) -> Self {
        witnesses.sort();
        let status = if witnesses.is_empty() { Status::Pass } else { Status::Fail };
        Outcome {
            condition,
            status,
            witnesses,
        }
    }

    fn skipped(condition: Condition, why: &str) -> Self {
        Outcome {
            condition,
            status: Status::Skipped(why.into()),
            witnesses: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// All six verdicts together with the support and cosupport sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerversityReport {
    pub outcomes: Vec<Outcome>,
    /// Nonempty `supp^k`, keyed by `k`.
    pub supp: BTreeMap<i32, CellSet>,
    /// Nonempty `cosupp^k`, keyed by `k`.
    pub cosupp: BTreeMap<i32, CellSet>,
}

impl PerversityReport {
    pub fn outcome(&self, c: Condition) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.condition == c)
    }

    pub fn is_perverse(&self) -> bool {
        [Condition::S2, Condition::C2]
            .iter()
            .all(|c| self.outcome(*c).is_some_and(Outcome::passed))
    }
}

/// Degrees outside this window carry no stalk, costalk or local
/// cohomology: `[lo - #strata - 1, hi + max cell_dim + 1]`.
pub fn degree_window(a: &SheafComplex) -> Option<(i32, i32)> {
    let (lo, hi) = a.degree_range()?;
    let p = a.base();
    Some((lo - p.stratum_count() as i32 - 1, hi + p.max_cell_dim() as i32 + 1))
}

/// Evaluates the conditions on one complex, caching stalk and costalk
/// tables across checks.
pub struct Checker<'a> {
    a: &'a SheafComplex,
    sections: Sections<'a>,
    stalks: Vec<CohomologyTable>,
    costalks: Vec<OnceCell<CohomologyTable>>,
}

impl<'a> Checker<'a> {
    /// Fails unless `a` is a valid, constructible complex.
    pub fn new(a: &'a SheafComplex) -> Result<Self> {
        let report = a.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::Precondition(alloc::format!("invalid sheaf complex: {v}")));
        }
        if let Some(f) = a.check_constructible().first() {
            return Err(Error::NotConstructible(alloc::format!(
                "H^{} is not carried isomorphically along {} < {}",
                f.degree,
                a.cell_name(f.lower),
                a.cell_name(f.upper)
            )));
        }
        Ok(Self::new_unchecked(a))
    }

    pub(crate) fn new_unchecked(a: &'a SheafComplex) -> Self {
        let n = a.base().cell_count();
        Checker {
            a,
            sections: Sections::new(a),
            stalks: a.stalks().iter().map(|s| s.cohomology()).collect(),
            costalks: (0..n).map(|_| OnceCell::new()).collect(),
        }
    }

    pub fn sheaf(&self) -> &SheafComplex {
        self.a
    }

    pub fn sections(&self) -> &Sections<'a> {
        &self.sections
    }

    fn base(&self) -> &StratifiedPoset {
        self.a.base()
    }

    pub fn stalk(&self, x: CellId) -> &CohomologyTable {
        &self.stalks[x.0]
    }

    pub fn costalk(&self, x: CellId) -> &CohomologyTable {
        self.costalks[x.0].get_or_init(|| self.sections.costalk_cohomology(x))
    }

    /// `supp^k = closure{x : H^k(A_x) ≠ 0}`.
    pub fn supp_set(&self, k: i32) -> CellSet {
        let p = self.base();
        let gen: CellSet = p.cell_ids().filter(|x| self.stalk(*x).get(k) != 0).collect();
        p.closure(&gen)
    }

    /// `cosupp^k = closure{σ : H^{k - cell_dim σ}(A^!_σ) ≠ 0}`.
    pub fn cosupp_set(&self, k: i32) -> CellSet {
        let p = self.base();
        let gen: CellSet = p
            .cell_ids()
            .filter(|x| self.costalk(*x).get(k - p.cell(*x).cell_dim as i32) != 0)
            .collect();
        p.closure(&gen)
    }

    pub fn supp_sets(&self) -> BTreeMap<i32, CellSet> {
        let degrees: alloc::collections::BTreeSet<i32> =
            self.stalks.iter().flat_map(|t| t.iter().map(|(k, _)| k)).collect();
        degrees.into_iter().map(|k| (k, self.supp_set(k))).collect()
    }

    pub fn cosupp_sets(&self) -> BTreeMap<i32, CellSet> {
        let p = self.base();
        let degrees: alloc::collections::BTreeSet<i32> = p
            .cell_ids()
            .flat_map(|x| {
                let d = p.cell(x).cell_dim as i32;
                self.costalk(x).iter().map(move |(k, _)| k + d).collect::<Vec<_>>()
            })
            .collect();
        degrees.into_iter().map(|k| (k, self.cosupp_set(k))).collect()
    }

    fn witness(&self, condition: Condition, level: Option<u32>, degree: i32, cell: CellId, dim: usize) -> Witness {
        Witness {
            condition,
            level,
            degree,
            cell,
            stratum: self.base().stratum_of(cell),
            dim,
        }
    }

    /// `dim supp^{-k} ≤ k` for all `k`. A generator `x` of `supp^j` has
    /// `dim closure(x) = pdim(x)`, so a violation is a cell with
    /// `H^j(A_x) ≠ 0` and `pdim(x) > -j`.
    pub fn check_s1(&self) -> Outcome {
        let p = self.base();
        let mut w = Vec::new();
        for (j, set) in self.supp_sets() {
            if p.set_dimension(&set) <= -(j as i64) {
                continue;
            }
            for x in p.cell_ids() {
                let d = self.stalk(x).get(j);
                if d != 0 && p.pdim_of(x) as i64 > -(j as i64) {
                    w.push(self.witness(Condition::S1, None, j, x, d));
                }
            }
        }
        Outcome::from_witnesses(Condition::S1, w)
    }

    /// `dim cosupp^k ≤ k` for all `k`.
    pub fn check_c1(&self) -> Outcome {
        let p = self.base();
        let mut w = Vec::new();
        for (k, set) in self.cosupp_sets() {
            if p.set_dimension(&set) <= k as i64 {
                continue;
            }
            for x in p.cell_ids() {
                let d = self.costalk(x).get(k - p.cell(x).cell_dim as i32);
                if d != 0 && p.pdim_of(x) as i64 > k as i64 {
                    w.push(self.witness(Condition::C1, None, k, x, d));
                }
            }
        }
        Outcome::from_witnesses(Condition::C1, w)
    }

    /// For every stratum `S` and `k > -dim S`, the stalks on `S` vanish in
    /// degree `k`.
    pub fn check_s2(&self) -> Outcome {
        let p = self.base();
        let mut w = Vec::new();
        for (s, stratum) in p.strata() {
            let bound = -(stratum.pdim as i32);
            for x in p.cells_of_stratum(s) {
                for (k, d) in self.stalk(x).iter() {
                    if k > bound {
                        w.push(self.witness(Condition::S2, None, k, x, d));
                    }
                }
            }
        }
        Outcome::from_witnesses(Condition::S2, w)
    }

    /// The same condition stated cell by cell: `H^k(A_x) = 0` whenever
    /// `k > -pdim(x)`.
    pub fn check_s2_stalkwise(&self) -> Outcome {
        let p = self.base();
        let w = p
            .cell_ids()
            .flat_map(|x| {
                let bound = -(p.pdim_of(x) as i32);
                self.stalk(x)
                    .iter()
                    .filter(move |(k, _)| *k > bound)
                    .map(move |(k, d)| self.witness(Condition::S2, None, k, x, d))
                    .collect::<Vec<_>>()
            })
            .collect();
        Outcome::from_witnesses(Condition::S2, w)
    }

    /// For every stratum `S` and `k < -dim S`, the stalks of `r_S^! A`
    /// vanish in degree `k`.
    pub fn check_c2(&self) -> Outcome {
        let p = self.base();
        let mut w = Vec::new();
        for (s, stratum) in p.strata() {
            let bound = -(stratum.pdim as i32);
            for (x, table) in self.sections.shriek_restriction_table(s) {
                for (k, d) in table.iter() {
                    if k < bound {
                        w.push(self.witness(Condition::C2, None, k, x, d));
                    }
                }
            }
        }
        Outcome::from_witnesses(Condition::C2, w)
    }

    /// For every `m ≥ 0` and `k > -m`, the stalks on `U^m` vanish in degree
    /// `k`.
    pub fn check_new_support(&self) -> Result<Outcome> {
        let p = self.base();
        let mut w = Vec::new();
        for m in 0..=p.max_pdim() {
            for x in p.upper(m)? {
                for (k, d) in self.stalk(x).iter() {
                    if k > -(m as i32) {
                        w.push(self.witness(Condition::NewSupport, Some(m), k, x, d));
                    }
                }
            }
        }
        Ok(Outcome::from_witnesses(Condition::NewSupport, w))
    }

    /// For every `m ≥ 0` and `k < -m`, local cohomology on `U_x` with
    /// supports in `L^m` vanishes in degree `k` for every `x ∈ L^m`.
    pub fn check_new_cosupport(&self) -> Result<Outcome> {
        let p = self.base();
        let mut w = Vec::new();
        for m in 0..=p.max_pdim() {
            let l = p.lower(m)?;
            for x in l.iter() {
                let table = self.sections.supported_on_star(*x, &l).cohomology();
                for (k, d) in table.iter() {
                    if k < -(m as i32) {
                        w.push(self.witness(Condition::NewCosupport, Some(m), k, *x, d));
                    }
                }
            }
        }
        Ok(Outcome::from_witnesses(Condition::NewCosupport, w))
    }

    /// All six conditions. `S1`/`C1` are skipped on bases without the
    /// geometric flag, where the cell-dimension shift has no meaning.
    pub fn report(&self) -> Result<PerversityReport> {
        let geometric = self.base().is_geometric();
        let skip = "the base is not flagged geometric";
        let outcomes = alloc::vec![
            if geometric { self.check_s1() } else { Outcome::skipped(Condition::S1, skip) },
            if geometric { self.check_c1() } else { Outcome::skipped(Condition::C1, skip) },
            self.check_s2(),
            self.check_c2(),
            self.check_new_support()?,
            self.check_new_cosupport()?,
        ];
        Ok(PerversityReport {
            outcomes,
            supp: self.supp_sets().into_iter().filter(|(_, s)| !s.is_empty()).collect(),
            cosupp: if geometric {
                self.cosupp_sets().into_iter().filter(|(_, s)| !s.is_empty()).collect()
            } else {
                BTreeMap::new()
            },
        })
    }

    /// Recomputes the group a witness names and returns its dimension.
    pub fn recheck(&self, w: &Witness) -> Result<usize> {
        let p = self.base();
        Ok(match w.condition {
            Condition::S1 | Condition::S2 | Condition::NewSupport => self.a.stalk(w.cell).cohomology().get(w.degree),
            Condition::C1 => {
                let shift = p.cell(w.cell).cell_dim as i32;
                self.sections.costalk_cohomology(w.cell).get(w.degree - shift)
            }
            Condition::C2 => {
                let z = p.closure(&p.cells_of_stratum(w.stratum));
                self.sections.supported(w.cell, &z)?.cohomology().get(w.degree)
            }
            Condition::NewCosupport => {
                let m = w.level.ok_or_else(|| Error::Precondition("newC witness without a level".into()))?;
                self.sections.supported(w.cell, &p.lower(m)?)?.cohomology().get(w.degree)
            }
        })
    }
}

pub fn supp_set(k: i32, a: &SheafComplex) -> CellSet {
    Checker::new_unchecked(a).supp_set(k)
}

pub fn cosupp_set(k: i32, a: &SheafComplex) -> CellSet {
    Checker::new_unchecked(a).cosupp_set(k)
}

pub fn check(a: &SheafComplex) -> Result<PerversityReport> {
    Checker::new(a)?.report()
}

/// The same complex over `merge_strata_by_dimension` of its base.
pub fn on_merged_base(a: &SheafComplex) -> Result<SheafComplex> {
    if a.base().is_merged() {
        return Ok(a.clone());
    }
    let merged = Arc::new(a.base().merge_strata_by_dimension());
    SheafComplex::new(merged, a.stalks().to_vec(), a.restrictions().to_vec())
}

/// Both sides of each equivalence, computed independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub s2: Outcome,
    pub new_support: Outcome,
    pub c2: Outcome,
    pub new_cosupport: Outcome,
}

impl LemmaReport {
    pub fn support_agrees(&self) -> bool {
        self.s2.passed() == self.new_support.passed()
    }

    pub fn cosupport_agrees(&self) -> bool {
        self.c2.passed() == self.new_cosupport.passed()
    }

    pub fn agrees(&self) -> bool {
        self.support_agrees() && self.cosupport_agrees()
    }
}

/// Compares `S2` with `newS` and `C2` with `newC` after merging strata of
/// equal dimension.
pub fn verify_lemma_equivalence(a: &SheafComplex) -> Result<LemmaReport> {
    let merged = on_merged_base(a)?;
    let c = Checker::new(&merged)?;
    Ok(LemmaReport {
        s2: c.check_s2(),
        new_support: c.check_new_support()?,
        c2: c.check_c2(),
        new_cosupport: c.check_new_cosupport()?,
    })
}

/// Outcome of [`verify_proposition`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropositionReport {
    /// `C2` fails, so the statement does not apply.
    HypothesisFails(Outcome),
    Checked {
        m: u32,
        /// Rank table of `ℍ^k(X) → ℍ^k(U^{m+1})`.
        ranks: InducedRanks,
        /// Degrees `k ≤ -m-2` where the map is not an isomorphism, and
        /// `-m-1` if the map is not injective there.
        failures: Vec<i32>,
    },
}

impl PropositionReport {
    pub fn holds(&self) -> bool {
        matches!(self, PropositionReport::Checked { failures, .. } if failures.is_empty())
    }
}

/// For `A` satisfying `C2`: `ℍ^k(X; A) → ℍ^k(U^{m+1}; A)` is an isomorphism
/// for `k ≤ -m-2` and injective for `k = -m-1`.
pub fn verify_proposition(a: &SheafComplex, m: u32) -> Result<PropositionReport> {
    let c = Checker::new(a)?;
    let c2 = c.check_c2();
    if !c2.passed() {
        return Ok(PropositionReport::HypothesisFails(c2));
    }
    proposition_with(&c, m)
}

pub(crate) fn proposition_with(c: &Checker<'_>, m: u32) -> Result<PropositionReport> {
    let p = c.base();
    let (whole, open, f) = c.sections.restriction_map(&p.upper(m + 1)?, &p.all_cells())?;
    let top = -(m as i32) - 1;
    let lo = [whole.complex.lo(), open.complex.lo()].into_iter().flatten().min().unwrap_or(top);
    let hi = [whole.complex.hi(), open.complex.hi()].into_iter().flatten().max().unwrap_or(top);
    let ranks = InducedRanks::compute(&f, &whole.complex, &open.complex, lo.min(top)..=hi.max(top));
    let mut failures: Vec<i32> = (lo.min(top)..top).filter(|k| !ranks.iso(*k)).collect();
    if !ranks.injective(top) {
        failures.push(top);
    }
    Ok(PropositionReport::Checked { m, ranks, failures })
}

/// Outcome of [`verify_remark_containment`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemarkReport {
    Skipped(String),
    Checked {
        /// Degrees `k` with `cosupp^k ⊄ L^k`, with the offending cells.
        violations: BTreeMap<i32, CellSet>,
        c2: Outcome,
    },
}

impl RemarkReport {
    pub fn containment_holds(&self) -> Option<bool> {
        match self {
            RemarkReport::Skipped(_) => None,
            RemarkReport::Checked { violations, .. } => Some(violations.is_empty()),
        }
    }

    /// Whether containment and `C2` give the same verdict.
    pub fn agrees_with_c2(&self) -> Option<bool> {
        match self {
            RemarkReport::Skipped(_) => None,
            RemarkReport::Checked { violations, c2 } => Some(violations.is_empty() == c2.passed()),
        }
    }
}

/// Checks `cosupp^k ⊆ L^k` for all `k` on a geometric base.
pub fn verify_remark_containment(a: &SheafComplex) -> Result<RemarkReport> {
    if !a.base().is_geometric() {
        return Ok(RemarkReport::Skipped("the base is not flagged geometric".into()));
    }
    let c = Checker::new(a)?;
    remark_with(&c)
}

pub(crate) fn remark_with(c: &Checker<'_>) -> Result<RemarkReport> {
    let p = c.base();
    let mut violations = BTreeMap::new();
    for (k, set) in c.cosupp_sets() {
        let allowed = if k < 0 { CellSet::new() } else { p.lower(k as u32)? };
        let bad: CellSet = set.difference(&allowed).copied().collect();
        if !bad.is_empty() {
            violations.insert(k, bad);
        }
    }
    Ok(RemarkReport::Checked {
        violations,
        c2: c.check_c2(),
    })
}
