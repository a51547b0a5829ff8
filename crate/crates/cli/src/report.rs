//! Serializable reports. Cells and strata are named, witnesses keep the
//! engine's canonical order, and every report parses back from its JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use perverse_core::derived::InducedRanks;
use perverse_core::perversity::{Outcome, Status, Witness};
use perverse_core::{CellSet, SheafComplex, StratifiedPoset};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationReport {
    pub valid: bool,
    pub poset: Vec<String>,
    pub sheaf: Vec<String>,
    pub constructibility: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub degree: i32,
    pub cell: String,
    pub stratum: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionReport {
    pub condition: String,
    /// `pass`, `fail` or `skipped`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub witnesses: Vec<WitnessReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub method: String,
    pub passed: bool,
    pub conditions: Vec<ConditionReport>,
    pub supp: BTreeMap<i32, Vec<String>>,
    pub cosupp: BTreeMap<i32, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceReport {
    pub agrees: bool,
    pub stratum: ConditionReport,
    pub filtration: ConditionReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaReport {
    pub agrees: bool,
    pub support: EquivalenceReport,
    pub cosupport: EquivalenceReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankRow {
    pub degree: i32,
    pub source: usize,
    pub target: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropositionReport {
    pub m: u32,
    /// Whether `C2` holds, so the statement applies.
    pub hypothesis: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    /// `ℍ^k(X) → ℍ^k(U^{m+1})`.
    pub ranks: Vec<RankRow>,
    pub failures: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<ConditionReport>,
}

pub fn witness(p: &StratifiedPoset, w: &Witness) -> WitnessReport {
    WitnessReport {
        level: w.level,
        degree: w.degree,
        cell: p.cell(w.cell).name.clone(),
        stratum: p.stratum(w.stratum).name.clone(),
        dim: w.dim,
    }
}

pub fn condition(p: &StratifiedPoset, o: &Outcome) -> ConditionReport {
    let (status, note) = match &o.status {
        Status::Pass => ("pass", None),
        Status::Fail => ("fail", None),
        Status::Skipped(why) => ("skipped", Some(why.clone())),
    };
    ConditionReport {
        condition: o.condition.label().into(),
        status: status.into(),
        note,
        witnesses: o.witnesses.iter().map(|w| witness(p, w)).collect(),
    }
}

pub fn named_sets(p: &StratifiedPoset, sets: &BTreeMap<i32, CellSet>) -> BTreeMap<i32, Vec<String>> {
    sets.iter()
        .filter(|(_, s)| !s.is_empty())
        .map(|(k, s)| (*k, s.iter().map(|x| p.cell(*x).name.clone()).collect()))
        .collect()
}

pub fn rank_rows(r: &InducedRanks) -> Vec<RankRow> {
    r.rows
        .iter()
        .map(|(degree, source, target, rank)| RankRow {
            degree: *degree,
            source: *source,
            target: *target,
            rank: *rank,
        })
        .collect()
}

/// Deterministic JSON with a trailing newline.
pub fn to_json<T: Serialize>(r: &T) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

fn condition_text(out: &mut String, c: &ConditionReport) {
    let _ = write!(out, "{:<5} {}", c.condition, c.status);
    if let Some(n) = &c.note {
        let _ = write!(out, " ({n})");
    }
    out.push('\n');
    for w in &c.witnesses {
        let level = w.level.map(|m| format!("m={m} ")).unwrap_or_default();
        let _ = writeln!(
            out,
            "      {level}k={} cell {} in {} (dim {})",
            w.degree, w.cell, w.stratum, w.dim
        );
    }
}

fn sets_text(out: &mut String, label: &str, sets: &BTreeMap<i32, Vec<String>>) {
    for (k, cells) in sets {
        let _ = writeln!(out, "{label}^{k} = {{{}}}", cells.join(", "));
    }
}

impl ValidationReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", if self.valid { "valid" } else { "INVALID" });
        for (label, items) in [("poset", &self.poset), ("sheaf", &self.sheaf), ("constructibility", &self.constructibility)] {
            for m in items {
                let _ = writeln!(out, "  {label}: {m}");
            }
        }
        out
    }
}

impl CheckReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method {}: {}", self.method, if self.passed { "perverse" } else { "not perverse" });
        for c in &self.conditions {
            condition_text(&mut out, c);
        }
        sets_text(&mut out, "supp", &self.supp);
        sets_text(&mut out, "cosupp", &self.cosupp);
        out
    }
}

impl LemmaReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lemma: {}", if self.agrees { "verdicts agree" } else { "DISAGREEMENT" });
        for e in [&self.support, &self.cosupport] {
            condition_text(&mut out, &e.stratum);
            condition_text(&mut out, &e.filtration);
        }
        out
    }
}

impl PropositionReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let verdict = match self.holds {
            _ if !self.hypothesis => "C2 fails, statement does not apply",
            Some(true) => "holds",
            _ => "FAILS",
        };
        let _ = writeln!(out, "proposition m={}: {verdict}", self.m);
        if let Some(c) = &self.c2 {
            condition_text(&mut out, c);
        }
        if !self.ranks.is_empty() {
            let _ = writeln!(out, "   k  dim H(X)  dim H(U)  rank");
            for r in &self.ranks {
                let _ = writeln!(out, "{:>4}  {:>8}  {:>8}  {:>4}", r.degree, r.source, r.target, r.rank);
            }
        }
        for k in &self.failures {
            let _ = writeln!(out, "  failure at k={k}");
        }
        out
    }
}

/// A sheaf violation with cell names in place of ids.
pub fn sheaf_violation(a: &SheafComplex, v: &perverse_core::sheaf::SheafViolation) -> String {
    use perverse_core::sheaf::SheafViolation as V;
    let p = a.base();
    let n = |x: perverse_core::CellId| p.cell(x).name.clone();
    let cover = |i: usize| {
        let (x, y) = p.covers()[i];
        format!("{} ⋖ {}", n(x), n(y))
    };
    match v {
        V::Stalk { cell, degree } => match degree {
            Some(k) => format!("stalk at {} has d∘d ≠ 0 in degree {k}", n(*cell)),
            None => format!("stalk at {} is mis-shaped", n(*cell)),
        },
        V::RestrictionShape { cover: i } => format!("restriction along {} has the wrong shape", cover(*i)),
        V::NotChainMap { cover: i, degree } => {
            format!("restriction along {} is not a chain map in degree {degree}", cover(*i))
        }
        V::Diamond { from, to, via_a, via_b, degree } => {
            let path = |via: perverse_core::CellId| {
                if via == *from {
                    format!("{} → {}", n(*from), n(*to))
                } else if p.cover_index(*from, via).is_some() {
                    format!("{} → {} → {}", n(*from), n(via), n(*to))
                } else {
                    format!("{} → … → {} → {}", n(*from), n(via), n(*to))
                }
            };
            format!("paths {} and {} disagree in degree {degree}", path(*via_a), path(*via_b))
        }
    }
}

/// A poset violation with cell and stratum names in place of ids.
pub fn poset_violation(p: &StratifiedPoset, v: &perverse_core::poset::PosetViolation) -> String {
    use perverse_core::poset::PosetViolation as V;
    let n = |x: perverse_core::CellId| p.cell(x).name.clone();
    match v {
        V::Cycle { cell } => format!("order cycle through {}", n(*cell)),
        V::CoverDimension { lower, upper } => format!("cover {} ⋖ {} does not raise cell dimension", n(*lower), n(*upper)),
        V::Frontier { cell, face } => format!(
            "frontier condition fails: {} ({}) is a face of {} ({})",
            n(*face),
            p.stratum(p.stratum_of(*face)).name,
            n(*cell),
            p.stratum(p.stratum_of(*cell)).name
        ),
        V::Geometric { stratum, expected, found } => format!(
            "stratum {} has top cell dimension {}, expected {expected}",
            p.stratum(*stratum).name,
            found.map_or("none".to_string(), |d| d.to_string())
        ),
    }
}
