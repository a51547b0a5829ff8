use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use perverse::report::{CheckReport, LemmaReport, PropositionReport, ValidationReport};
use perverse::Document;
use perverse_core::fixtures;
use perverse_core::linalg::CochainComplex;
use perverse_core::{CellSet, SheafComplex};
use tempfile::TempDir;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Out {
    let out = Command::new(env!("CARGO_BIN_EXE_perverse")).args(args).output().unwrap();
    Out {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn sheaf_file(dir: &TempDir, name: &str, a: &SheafComplex) -> PathBuf {
    write(dir, name, &Document::from_sheaf(a).to_json())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cone_constant(shift: i32) -> SheafComplex {
    SheafComplex::constant(Arc::new(fixtures::cone()), 1, shift)
}

#[test]
fn gen_point_is_a_one_cell_document() {
    let out = run(&["gen", "--fixture", "point"]);
    assert_eq!(out.code, 0);
    let doc = Document::parse(&out.stdout).unwrap();
    assert_eq!(doc.poset.cells.len(), 1);
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "point.json", &out.stdout);
    assert_eq!(run(&["validate", s(&f)]).code, 0);
}

#[test]
fn gen_cone_matches_the_fixture() {
    let out = run(&["gen", "--fixture", "cone"]);
    let doc = Document::parse(&out.stdout).unwrap();
    let names: Vec<&str> = doc.poset.cells.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(names, ["c", "v1", "v2", "e1", "e2", "a1", "a2", "t1", "t2"]);
    let strata: Vec<(&str, u32)> = doc.poset.strata.iter().map(|s| (s.id.as_str(), s.pdim)).collect();
    assert_eq!(strata, [("S0", 0), ("S1", 1)]);
    for c in &doc.poset.cells {
        assert_eq!(c.stratum, if c.id == "c" { "S0" } else { "S1" });
    }
    assert_eq!(run(&["gen", "--fixture", "torus"]).code, 2);
}

#[test]
fn broken_diamond_names_both_paths() {
    let dir = TempDir::new().unwrap();
    let mut doc = Document::from_sheaf(&cone_constant(1));
    let restrictions = &mut doc.sheaf.as_mut().unwrap().restrictions;
    let i = restrictions.iter().position(|r| r.from == "e1" && r.to == "t1").unwrap();
    restrictions.remove(i);
    let f = write(&dir, "broken.json", &doc.to_json());
    let out = run(&["validate", s(&f), "--report", "json"]);
    assert_eq!(out.code, 1);
    let r: ValidationReport = serde_json::from_str(&out.stdout).unwrap();
    assert!(!r.valid);
    let line = r.sheaf.iter().find(|m| m.contains("paths")).expect("a diamond witness");
    assert!(line.contains("e1 → t1") || line.contains("→ e1 → t1"), "{line}");
    assert!(line.contains("→ t1"), "{line}");
}

#[test]
fn truncated_and_malformed_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let text = Document::from_sheaf(&cone_constant(1)).to_json();
    let f = write(&dir, "cut.json", &text[..text.len() / 2]);
    let out = run(&["validate", s(&f)]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line"), "{}", out.stderr);
    let missing = dir.path().join("absent.json");
    assert_eq!(run(&["validate", s(&missing)]).code, 2);
    let f = write(&dir, "extra.json", &text.replacen("\"geometric\"", "\"bogus\": 1, \"geometric\"", 1));
    let out = run(&["check", s(&f), "--method", "stratum"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("bogus"));
}

#[test]
fn shifted_constant_passes_every_method() {
    let dir = TempDir::new().unwrap();
    let f = sheaf_file(&dir, "q1.json", &cone_constant(1));
    let mut sets = Vec::new();
    for method in ["stalkwise", "stratum", "filtration"] {
        let out = run(&["check", s(&f), "--method", method, "--report", "json"]);
        assert_eq!(out.code, 0, "{method}: {}", out.stdout);
        let r: CheckReport = serde_json::from_str(&out.stdout).unwrap();
        assert!(r.passed);
        assert_eq!(r.conditions.len(), 2);
        sets.push((r.supp, r.cosupp));
    }
    assert!(sets.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn unshifted_constant_fails_every_method() {
    let dir = TempDir::new().unwrap();
    let f = sheaf_file(&dir, "q0.json", &cone_constant(0));
    for method in ["stalkwise", "stratum", "filtration"] {
        let out = run(&["check", s(&f), "--method", method, "--report", "json"]);
        assert_eq!(out.code, 1, "{method}");
        let r: CheckReport = serde_json::from_str(&out.stdout).unwrap();
        let support = &r.conditions[0];
        assert_eq!(support.status, "fail");
        let w = &support.witnesses[0];
        assert_eq!(w.degree, 0);
        match method {
            "filtration" => assert_eq!(w.level, Some(1)),
            _ => assert_eq!(w.stratum, "S1"),
        }
    }
}

#[test]
fn zero_sheaf_passes() {
    let dir = TempDir::new().unwrap();
    let zero = SheafComplex::zero(Arc::new(fixtures::cone()));
    let f = sheaf_file(&dir, "zero.json", &zero);
    for method in ["stalkwise", "stratum", "filtration"] {
        assert_eq!(run(&["check", s(&f), "--method", method]).code, 0);
    }
}

#[test]
fn stalkwise_is_refused_on_abstract_posets() {
    let dir = TempDir::new().unwrap();
    let a = SheafComplex::constant(Arc::new(fixtures::circle()), 1, 1);
    let f = sheaf_file(&dir, "circle.json", &a);
    let out = run(&["check", s(&f), "--method", "stalkwise"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("geometric"));
    assert_eq!(run(&["check", s(&f), "--method", "stratum"]).code, 0);
}

#[test]
fn lemma_on_every_fixture() {
    let dir = TempDir::new().unwrap();
    for name in perverse::commands::fixture_names() {
        let out = run(&["gen", "--fixture", name]);
        let f = write(&dir, &format!("{name}.json"), &out.stdout);
        let out = run(&["verify", s(&f), "--lemma", "--report", "json"]);
        assert_eq!(out.code, 0, "{name}: {}", out.stdout);
        let r: LemmaReport = serde_json::from_str(&out.stdout).unwrap();
        assert!(r.agrees);
    }
}

#[test]
fn proposition_exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = sheaf_file(&dir, "q1.json", &cone_constant(1));
    let out = run(&["verify", s(&f), "--prop", "0", "--report", "json"]);
    assert_eq!(out.code, 0);
    let r: PropositionReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(r.holds, Some(true));
    assert!(r.ranks.iter().any(|row| row.degree == -1 && row.rank == 1));

    // skyscraper at the cone point in degree -2 fails C2
    let p = Arc::new(fixtures::cone());
    let z: CellSet = [p.cell_named("c").unwrap()].into();
    let sky = SheafComplex::skyscraper(p, &z, &CochainComplex::concentrated(-2, 1)).unwrap();
    let f = sheaf_file(&dir, "sky.json", &sky);
    let out = run(&["verify", s(&f), "--prop", "0"]);
    assert_eq!(out.code, 3, "{}", out.stdout);
    assert!(out.stdout.contains("does not apply"));
    assert_eq!(run(&["verify", s(&f)]).code, 2);
}

#[test]
fn reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = sheaf_file(&dir, "q0.json", &cone_constant(0));
    let out = run(&["check", s(&f), "--method", "filtration", "--report", "json"]);
    let r: CheckReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(perverse::report::to_json(&r), out.stdout);
    let out = run(&["validate", s(&f), "--report", "json"]);
    let r: ValidationReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(perverse::report::to_json(&r), out.stdout);
}

#[test]
fn random_generation_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let space = run(&["gen", "--fixture", "cone"]).stdout;
    let f = write(&dir, "cone.json", &space);
    let a = run(&["gen", "--random", "42", "--space", s(&f)]);
    let b = run(&["gen", "--random", "42", "--space", s(&f)]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let out = dir.path().join("r.json");
    assert_eq!(run(&["gen", "--random", "42", "--space", s(&f), "-o", s(&out)]).code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a.stdout);
    let g = write(&dir, "r42.json", &a.stdout);
    assert_eq!(run(&["validate", s(&g)]).code, 0);
    // a space-only document works as well
    let bare = Document::parse(&space).unwrap().space_only().to_json();
    let h = write(&dir, "bare.json", &bare);
    assert_eq!(run(&["gen", "--random", "42", "--space", s(&h)]).stdout, a.stdout);
}
