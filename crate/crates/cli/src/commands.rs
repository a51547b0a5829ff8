//! The four commands, as functions from document text to exit code and
//! output, so they can be tested without spawning processes.

use std::sync::Arc;

use perverse_core::perversity::{self, Checker, Outcome};
use perverse_core::sheaf::random::{Generator, RandomParams};
use perverse_core::sheaf::{deligne_ic_trivial, SheafComplex};
use perverse_core::{fixtures, StratifiedPoset};

use crate::document::{Document, LoadError};
use crate::report::{self, CheckReport, EquivalenceReport, LemmaReport, PropositionReport, ValidationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// `S1`/`C1`, cell by cell.
    Stalkwise,
    /// `S2`/`C2`, stratum by stratum.
    Stratum,
    /// `newS`/`newC` over the filtration.
    Filtration,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Stalkwise => "stalkwise",
            Method::Stratum => "stratum",
            Method::Filtration => "filtration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    fn new(code: i32, stdout: String) -> Self {
        Run {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        stderr.push('\n');
        Run {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

fn render<T: serde::Serialize>(r: &T, format: ReportFormat, text: impl FnOnce(&T) -> String) -> String {
    match format {
        ReportFormat::Json => report::to_json(r),
        ReportFormat::Text => text(r),
    }
}

fn load_error(e: LoadError) -> Run {
    match e {
        LoadError::Parse(_) => Run::error(EXIT_PARSE, e.to_string()),
        LoadError::Invalid(_) => Run::error(EXIT_FAIL, e.to_string()),
    }
}

/// Parsed document, its poset and its sheaf.
type Loaded = (Arc<StratifiedPoset>, Option<SheafComplex>);

fn load(text: &str) -> Result<Loaded, LoadError> {
    let doc = Document::parse(text)?;
    let p = Arc::new(doc.to_poset()?);
    let a = doc.to_sheaf(p.clone())?;
    Ok((p, a))
}

fn validation(p: &StratifiedPoset, a: Option<&SheafComplex>) -> ValidationReport {
    let poset: Vec<String> = p.validate().violations.iter().map(|v| report::poset_violation(p, v)).collect();
    let (mut sheaf, mut constructibility) = (Vec::new(), Vec::new());
    if let Some(a) = a {
        sheaf = a.validate().violations.iter().map(|v| report::sheaf_violation(a, v)).collect();
        if sheaf.is_empty() {
            constructibility = a
                .check_constructible()
                .iter()
                .map(|f| {
                    format!(
                        "{} ⋖ {} in {}: H^{} has dims {} → {} but the map has rank {}",
                        p.cell(f.lower).name,
                        p.cell(f.upper).name,
                        p.stratum(p.stratum_of(f.lower)).name,
                        f.degree,
                        f.dims.0,
                        f.dims.1,
                        f.rank
                    )
                })
                .collect();
        }
    }
    ValidationReport {
        valid: poset.is_empty() && sheaf.is_empty() && constructibility.is_empty(),
        poset,
        sheaf,
        constructibility,
    }
}

pub fn validate(text: &str, format: ReportFormat) -> Run {
    let (p, a) = match load(text) {
        Ok(l) => l,
        Err(e) => return load_error(e),
    };
    let r = validation(&p, a.as_ref());
    let code = if r.valid { EXIT_PASS } else { EXIT_FAIL };
    Run::new(code, render(&r, format, ValidationReport::text))
}

/// Loads a document that must carry a valid, constructible sheaf.
fn load_sheaf(text: &str, format: ReportFormat) -> Result<SheafComplex, Run> {
    let (p, a) = load(text).map_err(load_error)?;
    let Some(a) = a else {
        return Err(Run::error(EXIT_PARSE, "parse error: the document has no `sheaf` section"));
    };
    let r = validation(&p, Some(&a));
    if !r.valid {
        let mut run = Run::new(EXIT_FAIL, render(&r, format, ValidationReport::text));
        run.stderr = "the document does not validate\n".into();
        return Err(run);
    }
    Ok(a)
}

pub fn check(text: &str, method: Method, format: ReportFormat) -> Run {
    let a = match load_sheaf(text, format) {
        Ok(a) => a,
        Err(run) => return run,
    };
    let p = a.base();
    if method == Method::Stalkwise && !p.is_geometric() {
        return Run::error(
            EXIT_HYPOTHESIS,
            "the stalkwise method needs cell dimensions with geometric meaning; the base is not flagged geometric (use --method stratum or filtration)",
        );
    }
    let c = Checker::new(&a).expect("validated");
    let outcomes: Vec<Outcome> = match method {
        Method::Stalkwise => vec![c.check_s1(), c.check_c1()],
        Method::Stratum => vec![c.check_s2(), c.check_c2()],
        Method::Filtration => vec![
            c.check_new_support().expect("filtration sets"),
            c.check_new_cosupport().expect("filtration sets"),
        ],
    };
    let passed = outcomes.iter().all(Outcome::passed);
    let r = CheckReport {
        method: method.name().into(),
        passed,
        conditions: outcomes.iter().map(|o| report::condition(p, o)).collect(),
        supp: report::named_sets(p, &c.supp_sets()),
        cosupp: if p.is_geometric() {
            report::named_sets(p, &c.cosupp_sets())
        } else {
            Default::default()
        },
    };
    Run::new(if passed { EXIT_PASS } else { EXIT_FAIL }, render(&r, format, CheckReport::text))
}

pub fn verify_lemma(text: &str, format: ReportFormat) -> Run {
    let a = match load_sheaf(text, format) {
        Ok(a) => a,
        Err(run) => return run,
    };
    let merged = perversity::on_merged_base(&a).expect("same cells");
    let l = perversity::verify_lemma_equivalence(&merged).expect("validated");
    let q = merged.base();
    let pair = |left: &Outcome, right: &Outcome| EquivalenceReport {
        agrees: left.passed() == right.passed(),
        stratum: report::condition(q, left),
        filtration: report::condition(q, right),
    };
    let r = LemmaReport {
        agrees: l.agrees(),
        support: pair(&l.s2, &l.new_support),
        cosupport: pair(&l.c2, &l.new_cosupport),
    };
    Run::new(if r.agrees { EXIT_PASS } else { EXIT_FAIL }, render(&r, format, LemmaReport::text))
}

pub fn verify_proposition(text: &str, m: u32, format: ReportFormat) -> Run {
    let a = match load_sheaf(text, format) {
        Ok(a) => a,
        Err(run) => return run,
    };
    let p = a.base();
    let (r, code) = match perversity::verify_proposition(&a, m).expect("validated") {
        perversity::PropositionReport::HypothesisFails(c2) => (
            PropositionReport {
                m,
                hypothesis: false,
                holds: None,
                ranks: Vec::new(),
                failures: Vec::new(),
                c2: Some(report::condition(p, &c2)),
            },
            EXIT_HYPOTHESIS,
        ),
        checked @ perversity::PropositionReport::Checked { .. } => {
            let holds = checked.holds();
            let perversity::PropositionReport::Checked { ranks, failures, .. } = checked else { unreachable!() };
            (
                PropositionReport {
                    m,
                    hypothesis: true,
                    holds: Some(holds),
                    ranks: report::rank_rows(&ranks),
                    failures,
                    c2: None,
                },
                if holds { EXIT_PASS } else { EXIT_FAIL },
            )
        }
    };
    Run::new(code, render(&r, format, PropositionReport::text))
}

/// Names accepted by `gen --fixture`.
pub fn fixture_names() -> Vec<&'static str> {
    let mut names: Vec<&str> = fixtures::NAMES.to_vec();
    names.push("ic-cone");
    names
}

/// A fixture with the constant sheaf shifted by the top stratum dimension,
/// or for `ic-cone` the intersection complex of the cone.
pub fn gen_fixture(name: &str) -> Run {
    let sheaf = if name == "ic-cone" {
        deligne_ic_trivial(Arc::new(fixtures::cone())).expect("the cone is merged")
    } else {
        let Some(p) = fixtures::by_name(name) else {
            return Run::error(
                EXIT_PARSE,
                format!("unknown fixture `{name}`; expected one of {}", fixture_names().join(", ")),
            );
        };
        let n = p.max_pdim() as i32;
        SheafComplex::constant(Arc::new(p), 1, n)
    };
    Run::new(EXIT_PASS, Document::from_sheaf(&sheaf).to_json())
}

/// A random constructible complex on the space of `space_text`; any sheaf
/// section there is ignored.
pub fn gen_random(seed: u64, space_text: &str) -> Run {
    let doc = match Document::parse(space_text) {
        Ok(d) => d.space_only(),
        Err(e) => return load_error(e),
    };
    let p = match doc.to_poset() {
        Ok(p) => Arc::new(p),
        Err(e) => return load_error(e),
    };
    let violations = p.validate().violations;
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| report::poset_violation(&p, v)).collect();
        return Run::error(EXIT_FAIL, format!("the space does not validate:\n  {}", lines.join("\n  ")));
    }
    let params = RandomParams::for_dimension(p.max_pdim());
    let a = Generator::new(p).sample(seed, &params);
    Run::new(EXIT_PASS, Document::from_sheaf(&a).to_json())
}
