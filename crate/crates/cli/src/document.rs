//! The versioned JSON document: a stratified poset and, optionally, a sheaf
//! complex on it.
//!
//! Matrices are sparse lists of `[row, col, "p/q"]` triples whose shapes
//! follow from the stalk dimensions. Stalks and restrictions that are zero
//! may be omitted. Unknown fields are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use perverse_core::linalg::{format_rational, parse_rational, ChainMap, CochainComplex, RatMatrix};
use perverse_core::{CellId, Error, SheafComplex, StratifiedPoset};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: &str = "perverse-document/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: String,
    pub poset: PosetSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheaf: Option<SheafSection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetSection {
    pub geometric: bool,
    pub strata: Vec<StratumEntry>,
    pub cells: Vec<CellEntry>,
    /// `[face, coface]` pairs.
    pub covers: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumEntry {
    pub id: String,
    pub pdim: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub id: String,
    pub cell_dim: u32,
    pub stratum: String,
}

/// `[row, col, value]`.
pub type Entry = (usize, usize, String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafSection {
    pub stalks: Vec<StalkEntry>,
    pub restrictions: Vec<RestrictionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StalkEntry {
    pub cell: String,
    /// Degree to dimension.
    pub dims: BTreeMap<i32, usize>,
    /// `d^k`, keyed by the source degree `k`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub differentials: BTreeMap<i32, Vec<Entry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionEntry {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<i32, Vec<Entry>>,
}

/// Why a document could not be turned into a poset or sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoadError {
    /// Malformed JSON, wrong version, dangling names, entries out of range.
    Parse(String),
    /// Well-formed but mathematically invalid, e.g. `d∘d ≠ 0` in a stalk.
    Invalid(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Parse(m) => write!(f, "parse error: {m}"),
            LoadError::Invalid(m) => write!(f, "invalid: {m}"),
        }
    }
}

impl std::error::Error for LoadError {}

fn parse_err(m: impl Into<String>) -> LoadError {
    LoadError::Parse(m.into())
}

impl Document {
    /// Parses JSON text. Errors carry the field path and line/column.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            parse_err(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
        })?;
        if doc.version != FORMAT_VERSION {
            return Err(parse_err(format!(
                "at `version`: unsupported version `{}`, expected `{FORMAT_VERSION}`",
                doc.version
            )));
        }
        Ok(doc)
    }

    /// Pretty JSON with a trailing newline. Output is canonical: equal
    /// documents give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn from_poset(p: &StratifiedPoset) -> Self {
        Document {
            version: FORMAT_VERSION.into(),
            poset: PosetSection {
                geometric: p.is_geometric(),
                strata: p
                    .strata()
                    .map(|(_, s)| StratumEntry {
                        id: s.name.clone(),
                        pdim: s.pdim,
                    })
                    .collect(),
                cells: p
                    .cells()
                    .map(|(_, c)| CellEntry {
                        id: c.name.clone(),
                        cell_dim: c.cell_dim,
                        stratum: p.stratum(c.stratum).name.clone(),
                    })
                    .collect(),
                covers: p
                    .covers()
                    .iter()
                    .map(|(x, y)| [p.cell(*x).name.clone(), p.cell(*y).name.clone()])
                    .collect(),
            },
            sheaf: None,
        }
    }

    pub fn from_sheaf(a: &SheafComplex) -> Self {
        let p = a.base();
        let mut doc = Self::from_poset(p);
        let stalks = p
            .cell_ids()
            .filter(|x| !a.stalk(*x).is_zero())
            .map(|x| {
                let s = a.stalk(x);
                StalkEntry {
                    cell: p.cell(x).name.clone(),
                    dims: s.degrees().filter(|k| s.dim(*k) > 0).map(|k| (k, s.dim(k))).collect(),
                    differentials: s
                        .degrees()
                        .map(|k| (k, entries(&s.differential(k))))
                        .filter(|(_, e)| !e.is_empty())
                        .collect(),
                }
            })
            .collect();
        let restrictions = p
            .covers()
            .iter()
            .enumerate()
            .filter_map(|(i, (x, y))| {
                let (sx, sy) = (a.stalk(*x), a.stalk(*y));
                let f = a.restriction(i);
                let components: BTreeMap<i32, Vec<Entry>> = sx
                    .degrees()
                    .map(|k| (k, entries(&f.component(k, sx, sy))))
                    .filter(|(_, e)| !e.is_empty())
                    .collect();
                (!components.is_empty()).then(|| RestrictionEntry {
                    from: p.cell(*x).name.clone(),
                    to: p.cell(*y).name.clone(),
                    components,
                })
            })
            .collect();
        doc.sheaf = Some(SheafSection { stalks, restrictions });
        doc
    }

    /// The poset section alone.
    pub fn space_only(&self) -> Self {
        Document {
            sheaf: None,
            ..self.clone()
        }
    }

    pub fn to_poset(&self) -> Result<StratifiedPoset, LoadError> {
        let mut b = StratifiedPoset::builder().geometric(self.poset.geometric);
        for s in &self.poset.strata {
            b = b.stratum(&s.id, s.pdim);
        }
        for c in &self.poset.cells {
            b = b.cell(&c.id, c.cell_dim, &c.stratum);
        }
        for [x, y] in &self.poset.covers {
            b = b.cover(x, y);
        }
        b.build().map_err(|e| parse_err(format!("at `poset`: {e}")))
    }

    /// The sheaf section on `p`, which must come from [`Document::to_poset`].
    /// `Ok(None)` when the document has no sheaf.
    pub fn to_sheaf(&self, p: Arc<StratifiedPoset>) -> Result<Option<SheafComplex>, LoadError> {
        let Some(section) = &self.sheaf else { return Ok(None) };
        let mut stalks = vec![CochainComplex::zero(); p.cell_count()];
        let mut seen = BTreeSet::new();
        for (i, s) in section.stalks.iter().enumerate() {
            let at = format!("sheaf.stalks[{i}]");
            let x = lookup(&p, &s.cell, &at)?;
            if !seen.insert(x) {
                return Err(parse_err(format!("at `{at}`: second stalk for cell `{}`", s.cell)));
            }
            let mut diffs = BTreeMap::new();
            for (k, es) in &s.differentials {
                let (rows, cols) = (dim(&s.dims, k + 1), dim(&s.dims, *k));
                diffs.insert(*k, matrix(rows, cols, es, &format!("{at}.differentials.{k}"))?);
            }
            stalks[x.0] = CochainComplex::from_maps(&s.dims, diffs).map_err(|e| match e {
                Error::NotAComplex { .. } => LoadError::Invalid(format!("stalk at `{}`: {e}", s.cell)),
                other => parse_err(format!("at `{at}`: {other}")),
            })?;
        }
        let mut restrictions = vec![ChainMap::zero(); p.covers().len()];
        let mut seen = BTreeSet::new();
        for (i, r) in section.restrictions.iter().enumerate() {
            let at = format!("sheaf.restrictions[{i}]");
            let (x, y) = (lookup(&p, &r.from, &at)?, lookup(&p, &r.to, &at)?);
            let Some(ci) = p.cover_index(x, y) else {
                return Err(parse_err(format!("at `{at}`: `{}` ⋖ `{}` is not a cover", r.from, r.to)));
            };
            if !seen.insert(ci) {
                return Err(parse_err(format!("at `{at}`: second restriction for `{}` ⋖ `{}`", r.from, r.to)));
            }
            let (sx, sy) = (&stalks[x.0], &stalks[y.0]);
            let mut comps = BTreeMap::new();
            for (k, es) in &r.components {
                comps.insert(*k, matrix(sy.dim(*k), sx.dim(*k), es, &format!("{at}.components.{k}"))?);
            }
            restrictions[ci] = ChainMap::from_components(comps);
        }
        SheafComplex::new(p, stalks, restrictions)
            .map(Some)
            .map_err(|e| parse_err(format!("at `sheaf`: {e}")))
    }
}

fn dim(dims: &BTreeMap<i32, usize>, k: i32) -> usize {
    dims.get(&k).copied().unwrap_or(0)
}

fn lookup(p: &StratifiedPoset, name: &str, at: &str) -> Result<CellId, LoadError> {
    p.find_cell(name)
        .ok_or_else(|| parse_err(format!("at `{at}`: unknown cell `{name}`")))
}

fn matrix(rows: usize, cols: usize, es: &[Entry], at: &str) -> Result<RatMatrix, LoadError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(es.len());
    for (i, (r, c, v)) in es.iter().enumerate() {
        if *r >= rows || *c >= cols {
            return Err(parse_err(format!("at `{at}[{i}]`: entry ({r}, {c}) outside a {rows}x{cols} matrix")));
        }
        if !seen.insert((*r, *c)) {
            return Err(parse_err(format!("at `{at}[{i}]`: entry ({r}, {c}) given twice")));
        }
        let q = parse_rational(v).map_err(|e| parse_err(format!("at `{at}[{i}]`: {e}")))?;
        out.push((*r, *c, q));
    }
    Ok(RatMatrix::from_entries(rows, cols, out))
}

fn entries(m: &RatMatrix) -> Vec<Entry> {
    m.entries()
        .filter(|(_, _, v)| !num_is_zero(v))
        .map(|(r, c, v)| (r, c, format_rational(v)))
        .collect()
}

fn num_is_zero(v: &perverse_core::Rational) -> bool {
    *v.numer() == 0.into()
}
