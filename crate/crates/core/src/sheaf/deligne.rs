//! The Deligne construction of the middle-perversity intersection complex.

use alloc::format;
use alloc::sync::Arc;

use super::pushforward::pushforward_open;
use super::SheafComplex;
use crate::error::{Error, Result};
use crate::poset::{CellSet, StratifiedPoset};

/// Intersection complex extending the local system `seed` on the open
/// stratum. `p` must be merged (one stratum per dimension) and `seed` must
/// live on the induced poset of the top stratum, concentrated in degree 0.
///
/// Starting from `seed[n]`, for `m = n-1, …, 0` the complex on `U^{m+1}` is
/// pushed forward to `U^m` and truncated at `-m-1`.
pub fn deligne_ic(p: Arc<StratifiedPoset>, seed: &SheafComplex) -> Result<SheafComplex> {
    if !p.is_merged() {
        return Err(Error::Precondition("the stratification must have one stratum per dimension".into()));
    }
    if p.cell_count() == 0 {
        return Ok(SheafComplex::zero(p));
    }
    let n = p.max_pdim();
    let top = p.upper(n)?;
    let (top_poset, _) = p.induced(&top)?;
    if *seed.base() != top_poset {
        return Err(Error::BaseMismatch);
    }
    if seed.stalks().iter().any(|s| s.lo().is_some_and(|lo| lo != 0) || s.hi().is_some_and(|hi| hi != 0)) {
        return Err(Error::Precondition("the seed must be concentrated in degree 0".into()));
    }
    if !seed.is_constructible() {
        return Err(Error::NotConstructible(format!("seed on {}", p.stratum(p.stratum_of(*top.first().unwrap())).name)));
    }
    let mut current = seed.shift(n as i32);
    for m in (0..n).rev() {
        let outer = p.upper(m)?;
        let inner = p.upper(m + 1)?;
        // work inside the induced poset of U^m; at m = 0 that is `p` itself
        let (ambient, inner_local) = if m == 0 {
            (p.clone(), inner)
        } else {
            let (ambient, embedding) = p.induced(&outer)?;
            let local: CellSet = embedding
                .iter()
                .enumerate()
                .filter(|(_, x)| inner.contains(x))
                .map(|(i, _)| crate::poset::CellId(i))
                .collect();
            (Arc::new(ambient), local)
        };
        current = if inner_local.len() == ambient.cell_count() {
            // no stratum of dimension m: only the base changes
            rebase(ambient, &current)?
        } else {
            pushforward_open(ambient, &inner_local, &current)?.truncate_leq(-(m as i32) - 1)
        };
    }
    if !Arc::ptr_eq(current.base_arc(), &p) {
        current = rebase(p, &current)?;
    }
    Ok(current)
}

/// The same complex on an equal poset with the same cell and cover order.
fn rebase(p: Arc<StratifiedPoset>, a: &SheafComplex) -> Result<SheafComplex> {
    SheafComplex::new(p, a.stalks().to_vec(), a.restrictions().to_vec())
}

/// [`deligne_ic`] with the trivial rank-one local system.
pub fn deligne_ic_trivial(p: Arc<StratifiedPoset>) -> Result<SheafComplex> {
    if !p.is_merged() {
        return Err(Error::Precondition("the stratification must have one stratum per dimension".into()));
    }
    if p.cell_count() == 0 {
        return Ok(SheafComplex::zero(p));
    }
    let top = p.upper(p.max_pdim())?;
    let (top_poset, _) = p.induced(&top)?;
    deligne_ic(p, &SheafComplex::constant(Arc::new(top_poset), 1, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::CohomologyTable;

    #[test]
    fn smooth_case_is_shifted_constant() {
        let p = Arc::new(fixtures::disk());
        let ic = deligne_ic_trivial(p.clone()).unwrap();
        assert_eq!(ic, SheafComplex::constant(p, 1, 1));
        let pt = Arc::new(fixtures::point());
        assert_eq!(deligne_ic_trivial(pt.clone()).unwrap(), SheafComplex::constant(pt, 1, 0));
    }

    #[test]
    fn cone_ic_stalks() {
        let p = Arc::new(fixtures::cone());
        let ic = deligne_ic_trivial(p.clone()).unwrap();
        assert!(ic.validate().is_valid());
        assert!(ic.is_constructible());
        let only = CohomologyTable::from_dims([(-1, 1)]);
        for x in p.cell_ids() {
            assert_eq!(ic.stalk(x).cohomology(), only, "{}", p.cell(x).name);
        }
    }

    #[test]
    fn unmerged_rejected() {
        let p = Arc::new(fixtures::suspension());
        assert!(deligne_ic_trivial(p.clone()).is_err());
        let merged = Arc::new(p.merge_strata_by_dimension());
        let ic = deligne_ic_trivial(merged).unwrap();
        assert!(ic.validate().is_valid());
    }
}
