use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use perverse::commands::{self, Method, ReportFormat, Run, EXIT_PARSE};

#[derive(Parser)]
#[command(name = "perverse", version, about = "Check perversity of constructible complexes on stratified posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Stalkwise,
    Stratum,
    Filtration,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the poset, the sheaf and constructibility.
    Validate {
        /// Document to read.
        file: PathBuf,
        /// Report format.
        #[arg(long, value_enum, default_value = "text")]
        report: Format,
    },
    /// Decide the support and cosupport conditions by one method.
    Check {
        /// Document to read.
        file: PathBuf,
        /// stalkwise (S1/C1), stratum (S2/C2) or filtration (newS/newC).
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Report format.
        #[arg(long, value_enum, default_value = "text")]
        report: Format,
    },
    /// Compare characterizations, or test the restriction statement at level m.
    #[command(group(ArgGroup::new("what").required(true).args(["lemma", "prop"])))]
    Verify {
        /// Document to read.
        file: PathBuf,
        /// Check that the stratum and filtration forms give the same verdicts.
        #[arg(long)]
        lemma: bool,
        /// Check that ℍ^k(X) → ℍ^k(U^{m+1}) is injective for k = -m-1 and bijective for k < -m-1.
        #[arg(long, value_name = "M")]
        prop: Option<u32>,
        /// Report format.
        #[arg(long, value_enum, default_value = "text")]
        report: Format,
    },
    /// Emit a document: a fixture, or a random complex on a given space.
    #[command(group(ArgGroup::new("source").required(true).args(["fixture", "random"])))]
    Gen {
        /// point, circle, disk, cone, node, suspension, axes or ic-cone.
        #[arg(long, value_name = "NAME")]
        fixture: Option<String>,
        /// Seed for a random constructible complex.
        #[arg(long, value_name = "SEED", requires = "space")]
        random: Option<u64>,
        /// Document whose poset carries the random complex.
        #[arg(long, value_name = "FILE")]
        space: Option<PathBuf>,
        /// Write here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String, Run> {
    std::fs::read_to_string(path).map_err(|e| Run {
        code: EXIT_PARSE,
        stdout: String::new(),
        stderr: format!("cannot read {}: {e}\n", path.display()),
    })
}

fn format(f: Format) -> ReportFormat {
    match f {
        Format::Json => ReportFormat::Json,
        Format::Text => ReportFormat::Text,
    }
}

fn run(cli: Cli) -> Result<Run, Run> {
    Ok(match cli.command {
        Command::Validate { file, report } => commands::validate(&read(&file)?, format(report)),
        Command::Check { file, method, report } => {
            let method = match method {
                MethodArg::Stalkwise => Method::Stalkwise,
                MethodArg::Stratum => Method::Stratum,
                MethodArg::Filtration => Method::Filtration,
            };
            commands::check(&read(&file)?, method, format(report))
        }
        Command::Verify { file, lemma, prop, report } => {
            let text = read(&file)?;
            match (lemma, prop) {
                (true, _) => commands::verify_lemma(&text, format(report)),
                (_, Some(m)) => commands::verify_proposition(&text, m, format(report)),
                _ => unreachable!("clap enforces the group"),
            }
        }
        Command::Gen { fixture, random, space, output } => {
            let run = match (fixture, random, space) {
                (Some(name), _, _) => commands::gen_fixture(&name),
                (None, Some(seed), Some(space)) => commands::gen_random(seed, &read(&space)?),
                _ => unreachable!("clap enforces the group"),
            };
            match output {
                Some(path) if run.code == 0 => {
                    if let Err(e) = std::fs::write(&path, &run.stdout) {
                        return Err(Run {
                            code: 1,
                            stdout: String::new(),
                            stderr: format!("cannot write {}: {e}\n", path.display()),
                        });
                    }
                    Run { stdout: String::new(), ..run }
                }
                _ => run,
            }
        }
    })
}

fn main() -> ExitCode {
    let run = run(Cli::parse()).unwrap_or_else(|e| e);
    let _ = std::io::stdout().write_all(run.stdout.as_bytes());
    let _ = std::io::stderr().write_all(run.stderr.as_bytes());
    ExitCode::from(run.code as u8)
}
