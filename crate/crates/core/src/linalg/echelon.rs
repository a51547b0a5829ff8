use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{MatrixBuilder, RatMatrix};
use super::rational::Rational;

type IntRow = Vec<(usize, BigInt)>;

/// Fraction-free sparse row echelon form.
///
/// Rows are kept as primitive integer vectors (content one, positive leading
/// coefficient). Eliminating a leading entry takes an integer combination of
/// two rows and divides out the content again, so no rational arithmetic
/// happens inside the elimination loop.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, IntRow>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Echelon form of the row space of `m`. Sparser rows are inserted first
    /// to limit fill-in.
    pub fn from_rows(m: &RatMatrix) -> Self {
        let mut order: Vec<usize> = (0..m.rows()).filter(|r| !m.row(*r).is_empty()).collect();
        order.sort_by_key(|r| (m.row(*r).len(), *r));
        let mut ech = Self::new();
        for r in order {
            ech.insert(m.row(r));
        }
        ech
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Inserts a row; returns `true` if it was independent of the rows
    /// inserted so far.
    pub fn insert(&mut self, row: &[(usize, Rational)]) -> bool {
        let mut r = to_primitive(row);
        while let Some((lead, _)) = r.first() {
            let lead = *lead;
            match self.pivots.get(&lead) {
                Some(p) => r = eliminate(&r, p, lead),
                None => {
                    self.pivots.insert(lead, r);
                    return true;
                }
            }
        }
        false
    }

    /// Whether `row` lies in the span of the inserted rows.
    pub fn contains(&self, row: &[(usize, Rational)]) -> bool {
        let mut r = to_primitive(row);
        while let Some((lead, _)) = r.first() {
            match self.pivots.get(lead) {
                Some(p) => r = eliminate(&r, p, *lead),
                None => return false,
            }
        }
        true
    }

    /// Clears every pivot column in all other rows (reduced echelon form,
    /// up to the scale of each row).
    pub fn reduce(&mut self) {
        let cols: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for c in cols {
            let p = self.pivots[&c].clone();
            let targets: Vec<usize> = self
                .pivots
                .range(..c)
                .filter(|(_, row)| row.binary_search_by_key(&c, |(j, _)| *j).is_ok())
                .map(|(k, _)| *k)
                .collect();
            for t in targets {
                let row = self.pivots.remove(&t).unwrap();
                let reduced = eliminate(&row, &p, c);
                self.pivots.insert(t, reduced);
            }
        }
    }

    /// Null-space basis of the inserted rows, assuming [`Echelon::reduce`]
    /// was called. Columns of the result are indexed by the free columns in
    /// increasing order.
    pub fn kernel_basis(&self, ncols: usize) -> RatMatrix {
        let free: Vec<usize> = (0..ncols).filter(|c| !self.pivots.contains_key(c)).collect();
        let mut free_index = alloc::vec![usize::MAX; ncols];
        for (i, f) in free.iter().enumerate() {
            free_index[*f] = i;
        }
        let mut b = MatrixBuilder::new(ncols, free.len());
        for (i, f) in free.iter().enumerate() {
            b.add(*f, i, Rational::one());
        }
        for (c, row) in &self.pivots {
            let lead = &row[0].1;
            for (j, v) in &row[1..] {
                let fi = free_index[*j];
                debug_assert!(fi != usize::MAX, "echelon form is not reduced");
                b.add(*c, fi, Rational::new(-v.clone(), lead.clone()));
            }
        }
        b.build()
    }

    /// Reads off `X` with `A X = B` from the reduced echelon form of the
    /// augmented matrix `[A | B]`, where `A` has `ncols` columns.
    pub fn particular_solution(&self, ncols: usize, nrhs: usize) -> Option<RatMatrix> {
        if self.pivots.range(ncols..).next().is_some() {
            return None;
        }
        let mut b = MatrixBuilder::new(ncols, nrhs);
        for (c, row) in &self.pivots {
            let lead = &row[0].1;
            for (j, v) in row.iter().filter(|(j, _)| *j >= ncols) {
                b.add(*c, j - ncols, Rational::new(v.clone(), lead.clone()));
            }
        }
        Some(b.build())
    }
}

/// Rank by fraction-free elimination in `i64`, or `None` if an entry does
/// not fit or an intermediate value overflows.
pub(crate) fn small_rank(m: &RatMatrix) -> Option<usize> {
    let mut rows: Vec<Vec<(usize, i64)>> = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let row = m.row(r);
        if row.is_empty() {
            continue;
        }
        let mut lcm = 1i64;
        for (_, v) in row {
            let d = i64::try_from(v.denom()).ok()?;
            lcm = lcm.checked_mul(d / lcm.gcd(&d))?;
        }
        let mut out = Vec::with_capacity(row.len());
        for (c, v) in row {
            let n = i64::try_from(v.numer()).ok()?;
            let d = i64::try_from(v.denom()).ok()?;
            out.push((*c, n.checked_mul(lcm / d)?));
        }
        rows.push(small_normalize(out)?);
    }
    rows.sort_by_key(|r| (r.len(), r[0].0));
    let mut pivots: Vec<Option<Vec<(usize, i64)>>> = alloc::vec![None; m.cols()];
    let mut rank = 0;
    for mut r in rows {
        while let Some(&(lead, _)) = r.first() {
            match &pivots[lead] {
                Some(p) => r = small_eliminate(&r, p)?,
                None => {
                    pivots[lead] = Some(r);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Some(rank)
}

fn small_normalize(mut row: Vec<(usize, i64)>) -> Option<Vec<(usize, i64)>> {
    if row.is_empty() {
        return Some(row);
    }
    let mut g = 0i64;
    for (_, v) in &row {
        g = g.gcd(v);
        if g == 1 {
            break;
        }
    }
    if row[0].1 < 0 {
        g = g.checked_neg()?;
    }
    if g != 1 {
        for (_, v) in row.iter_mut() {
            *v /= g;
        }
    }
    Some(row)
}

/// Cancels the leading entry of `r` against the row `p` with the same lead.
fn small_eliminate(r: &[(usize, i64)], p: &[(usize, i64)]) -> Option<Vec<(usize, i64)>> {
    let (rv, pv) = (r[0].1, p[0].1);
    let g = rv.gcd(&pv);
    let (a, b) = (pv / g, rv / g);
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (1, 1);
    while i < r.len() || j < p.len() {
        let next = match (r.get(i), p.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) if ci == cj => {
                i += 1;
                j += 1;
                (*ci, a.checked_mul(*vi)?.checked_sub(b.checked_mul(*vj)?)?)
            }
            (Some((ci, vi)), Some((cj, _))) if ci < cj => {
                i += 1;
                (*ci, a.checked_mul(*vi)?)
            }
            (Some((ci, vi)), None) => {
                i += 1;
                (*ci, a.checked_mul(*vi)?)
            }
            (_, Some((cj, vj))) => {
                j += 1;
                (*cj, b.checked_mul(*vj)?.checked_neg()?)
            }
            (None, None) => unreachable!(),
        };
        if next.1 != 0 {
            out.push(next);
        }
    }
    small_normalize(out)
}

fn to_primitive(row: &[(usize, Rational)]) -> IntRow {
    if row.is_empty() {
        return Vec::new();
    }
    let mut lcm = BigInt::one();
    for (_, v) in row {
        lcm = lcm.lcm(v.denom());
    }
    let out: IntRow = row
        .iter()
        .map(|(c, v)| (*c, v.numer() * (&lcm / v.denom())))
        .collect();
    normalize(out)
}

fn normalize(mut row: IntRow) -> IntRow {
    if row.is_empty() {
        return row;
    }
    let mut g = BigInt::zero();
    for (_, v) in &row {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    let negate = row[0].1.is_negative();
    if !g.is_one() || negate {
        let g = if negate { -g } else { g };
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    row
}

/// `a * r - b * p` where `a`, `b` are chosen to cancel column `col`.
fn eliminate(r: &IntRow, p: &IntRow, col: usize) -> IntRow {
    let rv = &r[r.binary_search_by_key(&col, |(j, _)| *j).unwrap()].1;
    let pv = &r_lookup(p, col);
    let g = rv.gcd(pv);
    let a = pv / &g;
    let b = rv / &g;
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < r.len() || j < p.len() {
        let next = match (r.get(i), p.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) if ci == cj => {
                i += 1;
                j += 1;
                (*ci, &a * vi - &b * vj)
            }
            (Some((ci, vi)), Some((cj, _))) if ci < cj => {
                i += 1;
                (*ci, &a * vi)
            }
            (Some((ci, vi)), None) => {
                i += 1;
                (*ci, &a * vi)
            }
            (_, Some((cj, vj))) => {
                j += 1;
                (*cj, -(&b * vj))
            }
            (None, None) => unreachable!(),
        };
        if !next.1.is_zero() {
            out.push(next);
        }
    }
    normalize(out)
}

fn r_lookup(p: &IntRow, col: usize) -> BigInt {
    p[p.binary_search_by_key(&col, |(j, _)| *j).unwrap()].1.clone()
}
