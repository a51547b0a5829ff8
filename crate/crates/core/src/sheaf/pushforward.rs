//! Derived pushforward along an open inclusion, restriction to opens and
//! closed sets, and the adjunction maps between them.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{SheafComplex, SheafMap};
use crate::derived::{Sections, SectionsComplex};
use crate::error::{Error, Result};
use crate::linalg::{ChainMap, MatrixBuilder};
use crate::poset::{CellId, CellSet, StratifiedPoset};

/// `Rj_* A` for `j: V ↪ P`, where `A` lives on the induced poset of the
/// up-set `V`. The stalk at `x` is the nerve complex `RΓ(U_x ∩ V; A)`, and
/// restrictions are the projections between these.
pub fn pushforward_open(p: Arc<StratifiedPoset>, v: &CellSet, a: &SheafComplex) -> Result<SheafComplex> {
    Ok(Pushforward::new(p, v, a)?.sheaf)
}

pub(crate) struct Pushforward {
    pub sheaf: SheafComplex,
    pub sections: Vec<SectionsComplex>,
    /// Position of each cell of `P` inside `V`, if any.
    pub local: Vec<Option<CellId>>,
}

impl Pushforward {
    pub fn new(p: Arc<StratifiedPoset>, v: &CellSet, a: &SheafComplex) -> Result<Self> {
        if !p.is_up_set(v) {
            return Err(Error::NotClosed { expected: "an up-set" });
        }
        let (sub, embedding) = p.induced(v)?;
        if *a.base() != sub {
            return Err(Error::BaseMismatch);
        }
        let mut local = vec![None; p.cell_count()];
        for (i, x) in embedding.iter().enumerate() {
            local[x.0] = Some(CellId(i));
        }
        let s = Sections::new(a);
        let sections: Vec<SectionsComplex> = p
            .cell_ids()
            .map(|x| {
                let u: CellSet = p.star(x).iter().filter_map(|y| local[y.0]).collect();
                s.complex_unchecked(&u)
            })
            .collect();
        let restrictions = p
            .covers()
            .iter()
            .map(|(x, y)| s.projection(&sections[x.0], &sections[y.0]))
            .collect();
        let stalks = sections.iter().map(|c| c.complex.clone()).collect();
        let sheaf = SheafComplex::new(p, stalks, restrictions)?;
        Ok(Pushforward { sheaf, sections, local })
    }
}

impl SheafComplex {
    /// `j^* A` for an up-set `V`, as a complex on the induced poset, with the
    /// embedding of its cells.
    pub fn restrict_open(&self, v: &CellSet) -> Result<(SheafComplex, Vec<CellId>)> {
        let p = self.base();
        if !p.is_up_set(v) {
            return Err(Error::NotClosed { expected: "an up-set" });
        }
        let (sub, embedding) = p.induced(v)?;
        let stalks = embedding.iter().map(|x| self.stalk(*x).clone()).collect();
        let restrictions = sub
            .covers()
            .iter()
            .map(|(x, y)| {
                let i = p.cover_index(embedding[x.0], embedding[y.0]).expect("induced cover");
                self.restriction(i).clone()
            })
            .collect();
        Ok((SheafComplex::new(Arc::new(sub), stalks, restrictions)?, embedding))
    }

    /// The unit `A → Rj_* j^* A` for the up-set `V`. At `x` the component
    /// sends a section to its restrictions at every vertex of `U_x ∩ V`.
    pub fn open_unit(&self, v: &CellSet) -> Result<(SheafComplex, SheafMap)> {
        let (restricted, _) = self.restrict_open(v)?;
        let push = Pushforward::new(self.base_arc().clone(), v, &restricted)?;
        let s = Sections::new(self);
        let p = self.base();
        let components = p
            .cell_ids()
            .map(|x| {
                let sc = &push.sections[x.0];
                let src = self.stalk(x);
                let tgt = &sc.complex;
                let mut comps = alloc::collections::BTreeMap::new();
                for q in src.degrees() {
                    let mut b = MatrixBuilder::new(tgt.dim(q), src.dim(q));
                    for (ci, chain) in sc.nerve().chains(0).iter().enumerate() {
                        let Some(o) = sc.offset(0, ci, q) else { continue };
                        let y = p
                            .cell_ids()
                            .find(|y| push.local[y.0] == Some(chain[0]))
                            .expect("chain vertex lies in V");
                        let t = s.transport(x, y);
                        b.add_block(o, 0, &t.component(q, src, self.stalk(y)));
                    }
                    comps.insert(q, b.build());
                }
                ChainMap::from_components(comps)
            })
            .collect();
        Ok((push.sheaf, SheafMap::new(components)))
    }

    /// `i_* i^* A` for a down-set `Z` (stalks outside `Z` replaced by zero)
    /// together with the restriction `A → i_* i^* A`.
    pub fn restrict_closed(&self, z: &CellSet) -> Result<(SheafComplex, SheafMap)> {
        let p = self.base();
        if !p.is_down_set(z) {
            return Err(Error::NotClosed { expected: "a down-set" });
        }
        let stalks = p
            .cell_ids()
            .map(|x| if z.contains(&x) { self.stalk(x).clone() } else { crate::linalg::CochainComplex::zero() })
            .collect();
        let restrictions = p
            .covers()
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                if z.contains(x) && z.contains(y) {
                    self.restriction(i).clone()
                } else {
                    ChainMap::zero()
                }
            })
            .collect();
        let components = p
            .cell_ids()
            .map(|x| {
                if z.contains(&x) {
                    ChainMap::identity(self.stalk(x))
                } else {
                    ChainMap::zero()
                }
            })
            .collect();
        let target = SheafComplex::new(self.base_arc().clone(), stalks, restrictions)?;
        Ok((target, SheafMap::new(components)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::CohomologyTable;

    fn table(entries: &[(i32, usize)]) -> CohomologyTable {
        CohomologyTable::from_dims(entries.iter().copied())
    }

    #[test]
    fn punctured_cone_pushforward() {
        let p = Arc::new(fixtures::cone());
        let u = p.upper(1).unwrap();
        let (sub, _) = p.induced(&u).unwrap();
        let a = SheafComplex::constant(Arc::new(sub), 1, 0);
        let push = pushforward_open(p.clone(), &u, &a).unwrap();
        assert!(push.validate().is_valid());
        let c = p.cell_named("c").unwrap();
        assert_eq!(push.stalk(c).cohomology(), table(&[(0, 1), (1, 1)]));
        for x in u.iter() {
            assert_eq!(push.stalk(*x).cohomology(), table(&[(0, 1)]));
        }
        assert!(push.is_constructible());
    }

    #[test]
    fn full_and_empty_opens() {
        let p = Arc::new(fixtures::node());
        let a = SheafComplex::constant(p.clone(), 2, 1);
        let (same, _) = a.restrict_open(&p.all_cells()).unwrap();
        let push = pushforward_open(p.clone(), &p.all_cells(), &same).unwrap();
        for x in p.cell_ids() {
            assert_eq!(push.stalk(x).cohomology(), a.stalk(x).cohomology());
        }
        let (empty, _) = a.restrict_open(&CellSet::new()).unwrap();
        assert!(pushforward_open(p.clone(), &CellSet::new(), &empty).unwrap().is_zero());
        assert!(pushforward_open(p.clone(), &p.lower(0).unwrap(), &a).is_err());
    }

    #[test]
    fn units_are_natural() {
        let p = Arc::new(fixtures::cone());
        let a = SheafComplex::constant(p.clone(), 1, 1);
        let (target, unit) = a.open_unit(&p.upper(1).unwrap()).unwrap();
        unit.validate(&a, &target).unwrap();
        let c = p.cell_named("c").unwrap();
        let r = unit.component(c).induced_rank(a.stalk(c), target.stalk(c), -1);
        assert_eq!(r, 1);
        let (closed, res) = a.restrict_closed(&p.lower(0).unwrap()).unwrap();
        res.validate(&a, &closed).unwrap();
        assert!(closed.validate().is_valid());
    }
}
