//! Small stratified spaces with known answers.
//!
//! | name | models | strata (pdim) |
//! |------|--------|---------------|
//! | [`point`] | a point | `S0` (0) |
//! | [`circle`] | `S¹`, two vertices and two edges (non-geometric) | `S` (1) |
//! | [`disk`] | closed disk, unstratified | `D` (1) |
//! | [`cone`] | closed disk with its centre as a point stratum | `S0` (0), `S1` (1) |
//! | [`suspension`] | 2-sphere with both poles marked | `N` (0), `S` (0), `R` (1) |
//! | [`node`] | two disks glued at their centres (`xy = 0` in `C²`) | `O` (0), `X` (1), `Y` (1) |
//! | [`axes`] | `C²` with the coordinate axes and the origin | `O` (0), `A` (1), `G` (2) |

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::poset::{PosetBuilder, StratifiedPoset};

pub fn point() -> StratifiedPoset {
    StratifiedPoset::builder()
        .stratum("S0", 0)
        .cell("p", 0, "S0")
        .geometric(true)
        .build()
        .expect("fixture")
}

/// Circle with vertices `v1, v2` and edges `e1, e2`, each edge joining both
/// vertices.
pub fn circle() -> StratifiedPoset {
    StratifiedPoset::builder()
        .stratum("S", 1)
        .cell("v1", 0, "S")
        .cell("v2", 0, "S")
        .cell("e1", 1, "S")
        .cell("e2", 1, "S")
        .cover("v1", "e1")
        .cover("v2", "e1")
        .cover("v1", "e2")
        .cover("v2", "e2")
        .build()
        .expect("fixture")
}

/// Cone over the two-edge circle: cone point `c`, boundary circle
/// `v1, v2, e1, e2`, radial edges `a1 = c v1`, `a2 = c v2`, and triangles
/// `t1 = c e1`, `t2 = c e2`.
fn cone_cells(b: PosetBuilder, prefix: &str, apex: &str, apex_stratum: Option<&str>, rest: &str) -> PosetBuilder {
    let n = |s: &str| format!("{prefix}{s}");
    let mut b = b;
    if let Some(st) = apex_stratum {
        b = b.cell(apex, 0, st);
    }
    for v in ["v1", "v2"] {
        b = b.cell(&n(v), 0, rest);
    }
    for e in ["e1", "e2", "a1", "a2"] {
        b = b.cell(&n(e), 1, rest);
    }
    for t in ["t1", "t2"] {
        b = b.cell(&n(t), 2, rest);
    }
    let covers: [(String, String); 14] = [
        (n("v1"), n("e1")),
        (n("v2"), n("e1")),
        (n("v1"), n("e2")),
        (n("v2"), n("e2")),
        (apex.into(), n("a1")),
        (apex.into(), n("a2")),
        (n("v1"), n("a1")),
        (n("v2"), n("a2")),
        (n("a1"), n("t1")),
        (n("a2"), n("t1")),
        (n("e1"), n("t1")),
        (n("a1"), n("t2")),
        (n("a2"), n("t2")),
        (n("e2"), n("t2")),
    ];
    for (x, y) in covers.iter() {
        b = b.cover(x, y);
    }
    b
}

/// The cone fixture: `S0 = {c}` with pdim 0, `S1` = the other eight cells
/// with pdim 1.
pub fn cone() -> StratifiedPoset {
    let b = StratifiedPoset::builder().stratum("S0", 0).stratum("S1", 1).geometric(true);
    cone_cells(b, "", "c", Some("S0"), "S1").build().expect("fixture")
}

/// The same nine cells as [`cone`] in a single stratum.
pub fn disk() -> StratifiedPoset {
    let b = StratifiedPoset::builder().stratum("D", 1).geometric(true);
    cone_cells(b, "", "c", Some("D"), "D").build().expect("fixture")
}

/// Two cones glued at their apex `c`: branches `x*` and `y*` in separate
/// pdim-1 strata, apex in a pdim-0 stratum.
pub fn node() -> StratifiedPoset {
    let b = StratifiedPoset::builder()
        .stratum("O", 0)
        .stratum("X", 1)
        .stratum("Y", 1)
        .geometric(true);
    let b = cone_cells(b, "x", "c", Some("O"), "X");
    cone_cells(b, "y", "c", None, "Y").build().expect("fixture")
}

/// Suspension of the two-edge circle: poles `n`, `s` (separate pdim-0
/// strata), equator `v1, v2, e1, e2`, meridians `a*` (north) and `b*`
/// (south), triangles `t*` (north) and `u*` (south).
pub fn suspension() -> StratifiedPoset {
    let mut b = StratifiedPoset::builder()
        .stratum("N", 0)
        .stratum("S", 0)
        .stratum("R", 1)
        .geometric(true)
        .cell("n", 0, "N")
        .cell("s", 0, "S");
    for v in ["v1", "v2"] {
        b = b.cell(v, 0, "R");
    }
    for e in ["e1", "e2", "a1", "a2", "b1", "b2"] {
        b = b.cell(e, 1, "R");
    }
    for t in ["t1", "t2", "u1", "u2"] {
        b = b.cell(t, 2, "R");
    }
    let covers = [
        ("v1", "e1"),
        ("v2", "e1"),
        ("v1", "e2"),
        ("v2", "e2"),
        ("n", "a1"),
        ("n", "a2"),
        ("v1", "a1"),
        ("v2", "a2"),
        ("s", "b1"),
        ("s", "b2"),
        ("v1", "b1"),
        ("v2", "b2"),
        ("a1", "t1"),
        ("a2", "t1"),
        ("e1", "t1"),
        ("a1", "t2"),
        ("a2", "t2"),
        ("e2", "t2"),
        ("b1", "u1"),
        ("b2", "u1"),
        ("e1", "u1"),
        ("b1", "u2"),
        ("b2", "u2"),
        ("e2", "u2"),
    ];
    for (x, y) in covers {
        b = b.cover(x, y);
    }
    b.build().expect("fixture")
}

/// Open star of a disk centre: `c < a1, a2 < t1, t2`.
const STAR: [(&str, u32); 5] = [("c", 0), ("a1", 1), ("a2", 1), ("t1", 2), ("t2", 2)];
const STAR_COVERS: [(&str, &str); 6] = [
    ("c", "a1"),
    ("c", "a2"),
    ("a1", "t1"),
    ("a1", "t2"),
    ("a2", "t1"),
    ("a2", "t2"),
];

/// Product of two open disk stars modelling `C²` stratified by the origin
/// `O`, the punctured coordinate axes `A`, and the complement `G`.
/// Cells are named `σ.τ`.
pub fn axes() -> StratifiedPoset {
    let mut b = StratifiedPoset::builder()
        .stratum("O", 0)
        .stratum("A", 1)
        .stratum("G", 2)
        .geometric(true);
    for (s, ds) in STAR {
        for (t, dt) in STAR {
            let stratum = match (s == "c", t == "c") {
                (true, true) => "O",
                (true, false) | (false, true) => "A",
                _ => "G",
            };
            b = b.cell(&format!("{s}.{t}"), ds + dt, stratum);
        }
    }
    for (x, y) in STAR_COVERS {
        for (t, _) in STAR {
            b = b.cover(&format!("{x}.{t}"), &format!("{y}.{t}"));
            b = b.cover(&format!("{t}.{x}"), &format!("{t}.{y}"));
        }
    }
    b.build().expect("fixture")
}

/// Looks a fixture up by name.
pub fn by_name(name: &str) -> Option<StratifiedPoset> {
    Some(match name {
        "point" => point(),
        "circle" => circle(),
        "disk" => disk(),
        "cone" => cone(),
        "node" => node(),
        "suspension" => suspension(),
        "axes" => axes(),
        _ => return None,
    })
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 7] = ["point", "circle", "disk", "cone", "node", "suspension", "axes"];

/// The fixtures whose geometric flag is set.
pub fn geometric() -> Vec<(&'static str, StratifiedPoset)> {
    NAMES
        .iter()
        .filter_map(|n| by_name(n).map(|p| (*n, p)))
        .filter(|(_, p)| p.is_geometric())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_validate() {
        for name in NAMES {
            let p = by_name(name).unwrap();
            assert!(p.validate().is_valid(), "{name}: {:?}", p.validate());
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(cone().cell_count(), 9);
        assert_eq!(node().cell_count(), 17);
        assert_eq!(suspension().cell_count(), 14);
        assert_eq!(axes().cell_count(), 25);
        assert_eq!(axes().max_cell_dim(), 4);
    }
}
