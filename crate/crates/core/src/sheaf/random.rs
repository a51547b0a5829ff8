//! Seeded generator of constructible complexes.
//!
//! Building blocks are the constant sheaf, its extensions by zero from
//! closed unions of strata, and its derived pushforwards from the opens
//! `U^m`. A sample is a direct sum of shifted terms, each either a power of
//! a block or the cone of a map `B^r → B'^s` obtained by tensoring a
//! canonical map `B → B'` with a random rational matrix.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SheafComplex, SheafMap};
use crate::linalg::{rat, ChainMap, RatMatrix, Rational};
use crate::poset::{CellSet, StratifiedPoset};

/// Size knobs for [`Generator::sample`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomParams {
    /// Upper bound on the number of summands; `0` gives the zero sheaf.
    pub terms: usize,
    /// Upper bound on the multiplicity of a block in one summand.
    pub max_rank: usize,
    /// Inclusive range of shifts applied to summands.
    pub shifts: (i32, i32),
    /// Chance, in percent, that a summand is a cone.
    pub cone_percent: u8,
}

impl RandomParams {
    /// Defaults scaled to the top stratum dimension `n`. Shifts range over
    /// `[n-2, n+1]` around the perverse shift `n` of the constant sheaf, so
    /// samples land on both sides of both conditions.
    pub fn for_dimension(n: u32) -> Self {
        let n = n as i32;
        RandomParams {
            terms: 2,
            max_rank: 2,
            shifts: (n - 2, n + 1),
            cone_percent: 40,
        }
    }
}

/// A named building block.
#[derive(Clone, Debug)]
pub struct Block {
    pub name: String,
    pub sheaf: SheafComplex,
}

/// A canonical map between two blocks, by index.
#[derive(Clone, Debug)]
pub struct BlockMap {
    pub source: usize,
    pub target: usize,
    pub map: SheafMap,
}

pub struct Generator {
    base: Arc<StratifiedPoset>,
    blocks: Vec<Block>,
    maps: Vec<BlockMap>,
}

impl Generator {
    pub fn new(base: Arc<StratifiedPoset>) -> Self {
        let constant = SheafComplex::constant(base.clone(), 1, 0);
        let mut blocks = alloc::vec![Block {
            name: "Q".into(),
            sheaf: constant.clone(),
        }];
        let mut maps = Vec::new();
        if base.cell_count() == 0 {
            return Generator { base, blocks, maps };
        }
        let all = base.all_cells();

        // closed unions of strata
        let mut closed: Vec<(String, CellSet)> = Vec::new();
        let mut seen: BTreeSet<CellSet> = BTreeSet::new();
        seen.insert(all.clone());
        seen.insert(CellSet::new());
        for m in 0..base.max_pdim() {
            if let Ok(l) = base.lower(m) {
                if seen.insert(l.clone()) {
                    closed.push((format!("Q_L{m}"), l));
                }
            }
        }
        for (s, stratum) in base.strata() {
            let cl = base.closure(&base.cells_of_stratum(s));
            let union_of_strata = cl.iter().all(|x| base.cells_of_stratum(base.stratum_of(*x)).is_subset(&cl));
            if union_of_strata && seen.insert(cl.clone()) {
                closed.push((format!("Q_cl({})", stratum.name), cl));
            }
        }
        let first_closed = blocks.len();
        for (name, z) in &closed {
            let (sheaf, map) = constant.restrict_closed(z).expect("down-set");
            maps.push(BlockMap {
                source: 0,
                target: blocks.len(),
                map,
            });
            blocks.push(Block { name: name.clone(), sheaf });
        }
        for (i, (_, z)) in closed.iter().enumerate() {
            for (j, (_, w)) in closed.iter().enumerate() {
                if i != j && w.is_subset(z) {
                    let (_, map) = blocks[first_closed + i].sheaf.restrict_closed(w).expect("down-set");
                    maps.push(BlockMap {
                        source: first_closed + i,
                        target: first_closed + j,
                        map,
                    });
                }
            }
        }

        // pushforwards from the filtration opens
        for m in 1..=base.max_pdim() {
            let Ok(u) = base.upper(m) else { continue };
            if u.is_empty() || u == all || !seen.insert(u.clone()) {
                continue;
            }
            let (sheaf, map) = constant.open_unit(&u).expect("up-set");
            if !sheaf.is_constructible() {
                continue;
            }
            maps.push(BlockMap {
                source: 0,
                target: blocks.len(),
                map,
            });
            blocks.push(Block {
                name: format!("Rj*Q_U{m}"),
                sheaf,
            });
        }
        for (i, b) in blocks.iter().enumerate() {
            maps.push(BlockMap {
                source: i,
                target: i,
                map: SheafMap::identity(&b.sheaf),
            });
        }
        Generator { base, blocks, maps }
    }

    pub fn base(&self) -> &Arc<StratifiedPoset> {
        &self.base
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn maps(&self) -> &[BlockMap] {
        &self.maps
    }

    /// Keeps only block `i` and its identity map.
    pub fn only(mut self, i: usize) -> Self {
        let block = self.blocks.swap_remove(i);
        self.maps = alloc::vec![BlockMap {
            source: 0,
            target: 0,
            map: SheafMap::identity(&block.sheaf),
        }];
        self.blocks = alloc::vec![block];
        self
    }

    pub fn sample(&self, seed: u64, params: &RandomParams) -> SheafComplex {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, params)
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R, params: &RandomParams) -> SheafComplex {
        let mut out = SheafComplex::zero(self.base.clone());
        if params.terms == 0 || params.max_rank == 0 {
            return out;
        }
        let count = rng.gen_range(1..=params.terms);
        for _ in 0..count {
            let shift = rng.gen_range(params.shifts.0..=params.shifts.1);
            let term = if rng.gen_range(0..100u8) < params.cone_percent {
                let (src, tgt, f) = self.random_map_with(rng, params.max_rank);
                src.cone_of(&tgt, &f).expect("maps between blocks are natural")
            } else {
                let b = &self.blocks[rng.gen_range(0..self.blocks.len())];
                power(&b.sheaf, rng.gen_range(1..=params.max_rank))
            };
            out = out.direct_sum(&term.shift(shift)).expect("same base");
        }
        out
    }

    /// A random map `B^r → B'^s` built from a canonical map `B → B'`.
    pub fn random_map_with<R: Rng>(&self, rng: &mut R, max_rank: usize) -> (SheafComplex, SheafComplex, SheafMap) {
        let bm = &self.maps[rng.gen_range(0..self.maps.len())];
        let r = rng.gen_range(1..=max_rank.max(1));
        let s = rng.gen_range(1..=max_rank.max(1));
        let m = random_matrix(rng, s, r);
        let source = &self.blocks[bm.source].sheaf;
        let target = &self.blocks[bm.target].sheaf;
        let map = tensor_map(&bm.map, &m, source, target);
        (power(source, r), power(target, s), map)
    }
}

/// `A ⊕ … ⊕ A` with `r` copies.
pub fn power(a: &SheafComplex, r: usize) -> SheafComplex {
    let mut out = SheafComplex::zero(a.base_arc().clone());
    for _ in 0..r {
        out = out.direct_sum(a).expect("same base");
    }
    out
}

/// `f ⊗ m: A^r → B^s` for `f: A → B` and an `s × r` matrix `m`.
pub fn tensor_map(f: &SheafMap, m: &RatMatrix, a: &SheafComplex, b: &SheafComplex) -> SheafMap {
    let p = a.base();
    SheafMap::new(
        p.cell_ids()
            .map(|x| {
                let (sa, sb) = (a.stalk(x), b.stalk(x));
                let comps = crate::linalg::degree_union(&[sa, sb])
                    .map(|k| (k, m.kron(&f.component(x).component(k, sa, sb))))
                    .collect();
                ChainMap::from_components(comps)
            })
            .collect(),
    )
}

/// Entries from `{-2, …, 2}` with occasional halves.
fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> RatMatrix {
    let entries: Vec<(usize, usize, Rational)> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| {
            let num = rng.gen_range(-2i64..=2);
            let v = if rng.gen_bool(0.2) {
                Rational::new(num.into(), 2.into())
            } else {
                rat(num)
            };
            (i, j, v)
        })
        .collect();
    RatMatrix::from_entries(rows, cols, entries)
}

/// Samples with [`RandomParams::for_dimension`] defaults.
pub fn random_constructible(base: Arc<StratifiedPoset>, seed: u64, terms: usize) -> SheafComplex {
    let params = RandomParams {
        terms,
        ..RandomParams::for_dimension(base.max_pdim())
    };
    Generator::new(base).sample(seed, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_size_gives_zero_sheaf() {
        let p = Arc::new(fixtures::cone());
        assert!(random_constructible(p, 7, 0).is_zero());
    }

    #[test]
    fn single_block_sampler_returns_the_block() {
        let p = Arc::new(fixtures::cone());
        let g = Generator::new(p);
        let names: Vec<String> = g.blocks().iter().map(|b| b.name.clone()).collect();
        assert!(names.contains(&"Rj*Q_U1".into()), "{names:?}");
        for i in 0..names.len() {
            let expected = g.blocks()[i].sheaf.clone();
            let one = Generator::new(g.base().clone()).only(i);
            let params = RandomParams {
                terms: 1,
                max_rank: 1,
                shifts: (0, 0),
                cone_percent: 0,
            };
            assert_eq!(one.sample(3, &params), expected);
        }
    }

    #[test]
    fn samples_are_valid_constructible_and_reproducible() {
        let p = Arc::new(fixtures::cone());
        let g = Generator::new(p.clone());
        let params = RandomParams::for_dimension(1);
        for seed in 0..20 {
            let a = g.sample(seed, &params);
            assert!(a.validate().is_valid(), "seed {seed}");
            assert!(a.is_constructible(), "seed {seed}");
            assert_eq!(a, g.sample(seed, &params));
        }
    }

    #[test]
    fn canonical_maps_are_natural() {
        for name in fixtures::NAMES {
            let g = Generator::new(Arc::new(fixtures::by_name(name).unwrap()));
            for bm in g.maps() {
                let (s, t) = (&g.blocks()[bm.source].sheaf, &g.blocks()[bm.target].sheaf);
                bm.map.validate(s, t).unwrap();
            }
            for b in g.blocks() {
                assert!(b.sheaf.validate().is_valid(), "{name} {}", b.name);
                assert!(b.sheaf.is_constructible(), "{name} {}", b.name);
            }
        }
    }
}
