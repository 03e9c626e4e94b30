//! Command-line front end. Exit status: 0 on success, 2 on invalid input,
//! 3 when a requested verdict is unknown or undecided, or no rule exists.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use walkembed::classic::{
    azema_yor_check, chw_search, hall_rule, AzemaYorVerdict, ChwSearchOptions, ChwVerdict,
};
use walkembed::engine::{compile, Certificate, RuleFile, WalkPath};
use walkembed::measures::{barycenter, potential};
use walkembed::par::Execution;
use walkembed::sim::{exact_law, simulate, SimOptions, DEFAULT_STAGE_CAP};
use walkembed::ui::{
    classify_s, classify_s3, ifs_approximate, search_matrix, IfsSystem, MatrixSearch, S3Verdict,
};
use walkembed::IntegerMeasure;

#[derive(Parser)]
#[command(
    name = "walkembed",
    version,
    about = "Embed integer laws in the simple symmetric random walk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Membership verdicts with certificates for a measure file.
    Classify {
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ay,chw,ui")]
        classes: Vec<Class>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Build a stopping rule file for a measure.
    Embed {
        measure: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Monte Carlo report for a rule file.
    Simulate {
        rule: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "WALKEMBED_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STAGE_CAP)]
        stage_cap: u64,
        /// Run every trial on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Exact stopped law within `2 * stages` steps, and the residual mass.
    ExactLaw {
        rule: PathBuf,
        #[arg(long, default_value_t = 8)]
        stages: usize,
    },
    /// Decisions along one path, one line `n X stop|continue` per step.
    Replay {
        rule: PathBuf,
        /// Increments, e.g. `1,-1,1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        path: Vec<i8>,
        /// Exit pair for randomized rules, e.g. `-2,0`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 2)]
        draw: Option<Vec<i64>>,
    },
    /// Operations on the embeddable set at 0 for the support {-2, 0, 2}.
    Set {
        #[command(subcommand)]
        command: SetCommand,
    },
    /// Potential and barycenter function of a measure.
    Potential { measure: PathBuf },
}

#[derive(Subcommand)]
enum SetCommand {
    /// Depth-d image of [0,1] under the set's function system.
    Approx {
        #[arg(long, value_enum, default_value = "s")]
        system: System,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Longest chip sequence tried.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Last stage tried by the matrix search.
    #[arg(long, default_value_t = 12)]
    max_stage: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Class {
    Ay,
    Chw,
    Ui,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ay,
    Chw,
    UiMatrix,
    Minimal,
    Hall,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum System {
    S,
    STilde,
}

/// Command output; `decided` is false when some verdict was not definite (exit status 3).
struct Outcome {
    output: Value,
    decided: bool,
}

impl Outcome {
    fn decided(output: Value) -> Self {
        Outcome {
            output,
            decided: true,
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_measure(path: &Path) -> Result<IntegerMeasure> {
    let text = read_input(path)?;
    IntegerMeasure::from_json(&text)
        .with_context(|| format!("{} is not a valid measure", path.display()))
}

fn read_rule(path: &Path) -> Result<RuleFile> {
    let text = read_input(path)?;
    RuleFile::from_json(&text)
        .with_context(|| format!("{} is not a valid rule file", path.display()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn ui_verdict(mu: &IntegerMeasure, max_stage: usize) -> Result<(Value, Option<Certificate>, bool)> {
    mu.require_centered()?;
    let inside = |allowed: &[i64]| mu.support().all(|k| allowed.contains(&k));
    if inside(&[-2, 0, 2]) {
        let v = classify_s(&mu.weight(0))?;
        let cert = v.is_member().then(|| Certificate::Digits {
            digits: v.digits().clone(),
        });
        return Ok((
            json!({ "method": "digits", "result": to_value(&v) }),
            cert,
            true,
        ));
    }
    if inside(&[-2, -1, 0, 1, 2]) {
        let v = classify_s3(&[mu.weight(-1), mu.weight(0), mu.weight(1)])?;
        let cert = match &v {
            S3Verdict::Member { digits, .. } => Some(Certificate::Digits3 {
                digits: digits.clone(),
            }),
            S3Verdict::NonMember { .. } => None,
        };
        return Ok((
            json!({ "method": "digits3", "result": to_value(&v) }),
            cert,
            true,
        ));
    }
    let v = search_matrix(mu, max_stage)?;
    let (cert, decided) = match &v {
        MatrixSearch::Member { matrix, .. } => (
            Some(Certificate::Matrix {
                matrix: matrix.clone(),
            }),
            true,
        ),
        MatrixSearch::Unknown { .. } => (None, false),
    };
    Ok((
        json!({ "method": "matrixSearch", "result": to_value(&v) }),
        cert,
        decided,
    ))
}

fn chw_decided(v: &ChwVerdict) -> bool {
    match v {
        ChwVerdict::Member { .. } => true,
        ChwVerdict::NonMemberUpToDepth { exhausted, .. } => *exhausted,
        ChwVerdict::Unknown { .. } => false,
    }
}

fn classify(measure: &Path, classes: &[Class], search: &SearchArgs) -> Result<Outcome> {
    let mu = read_measure(measure)?;
    mu.require_centered()?;
    let mut out = serde_json::Map::new();
    out.insert("measure".into(), to_value(&mu));
    let mut decided = true;
    for class in classes {
        match class {
            Class::Ay => {
                out.insert("ay".into(), to_value(&azema_yor_check(&mu)?));
            }
            Class::Chw => {
                let v = chw_search(&mu, ChwSearchOptions::depth(search.depth))?;
                decided &= chw_decided(&v);
                out.insert("chw".into(), to_value(&v));
            }
            Class::Ui => {
                let (v, _, d) = ui_verdict(&mu, search.max_stage)?;
                decided &= d;
                out.insert("ui".into(), v);
            }
        }
    }
    Ok(Outcome {
        output: Value::Object(out),
        decided,
    })
}

fn certificate(
    mu: &IntegerMeasure,
    method: Method,
    search: &SearchArgs,
) -> Result<Result<Certificate, Value>> {
    Ok(match method {
        Method::Ay => match azema_yor_check(mu)? {
            AzemaYorVerdict::Member { thresholds } => Ok(Certificate::Thresholds { thresholds }),
            v => Err(to_value(&v)),
        },
        Method::Chw => match chw_search(mu, ChwSearchOptions::depth(search.depth))? {
            ChwVerdict::Member { chips } => Ok(Certificate::Chips { chips }),
            v => Err(to_value(&v)),
        },
        Method::UiMatrix => match ui_verdict(mu, search.max_stage)? {
            (_, Some(cert), _) => Ok(cert),
            (v, None, _) => Err(v),
        },
        Method::Minimal => Ok(Certificate::Minimal {
            measure: mu.clone(),
        }),
        Method::Hall => Ok(Certificate::Pairs {
            pairs: hall_rule(mu)?,
        }),
    })
}

fn embed(
    measure: &Path,
    method: Method,
    out: Option<&Path>,
    search: &SearchArgs,
) -> Result<Outcome> {
    let mu = read_measure(measure)?;
    if method != Method::Minimal {
        mu.require_centered()?;
    }
    let cert = match certificate(&mu, method, search)? {
        Ok(cert) => cert,
        Err(verdict) => {
            eprintln!(
                "no rule: the measure is not embeddable by this method within the search limits"
            );
            return Ok(Outcome {
                output: verdict,
                decided: false,
            });
        }
    };
    let file = RuleFile {
        rule: compile(&cert)?,
        target: Some(mu),
    };
    if let Some(path) = out {
        fs::write(path, file.to_json() + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        return Ok(Outcome::decided(
            json!({ "kind": file.rule.kind(), "written": path.display().to_string() }),
        ));
    }
    Ok(Outcome::decided(to_value(&file)))
}

fn replay(rule: &Path, path: Vec<i8>, draw: Option<Vec<i64>>) -> Result<String> {
    let file = read_rule(rule)?;
    let path = WalkPath::new(path)?;
    let draw = draw.map(|d| (d[0], d[1]));
    if draw.is_none() && file.rule.needs_randomization() {
        bail!("randomized rule needs --draw u,v");
    }
    Ok(file.rule.transcript(&path, draw)?)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Classify {
            measure,
            classes,
            search,
        } => classify(&measure, &classes, &search),
        Command::Embed {
            measure,
            method,
            out,
            search,
        } => embed(&measure, method, out.as_deref(), &search),
        Command::Simulate {
            rule,
            trials,
            seed,
            stage_cap,
            sequential,
        } => {
            if trials == 0 {
                bail!("--trials must be at least 1");
            }
            let file = read_rule(&rule)?;
            let execution = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let options = SimOptions {
                trials,
                seed,
                stage_cap,
                execution,
            };
            let report = simulate(&file.rule, file.target().as_ref(), options)?;
            Ok(Outcome::decided(to_value(&report)))
        }
        Command::ExactLaw { rule, stages } => {
            let file = read_rule(&rule)?;
            let law = exact_law(&file.rule, stages)?;
            Ok(Outcome::decided(to_value(&law)))
        }
        Command::Replay { rule, path, draw } => {
            let _ = write!(std::io::stdout().lock(), "{}", replay(&rule, path, draw)?);
            Ok(Outcome {
                output: Value::Null,
                decided: true,
            })
        }
        Command::Set {
            command: SetCommand::Approx { system, depth, out },
        } => {
            let system = match system {
                System::S => IfsSystem::s(),
                System::STilde => IfsSystem::s_tilde(),
            };
            let approx = to_value(&ifs_approximate(&system, depth)?);
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&approx)? + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(Outcome::decided(approx))
        }
        Command::Potential { measure } => {
            let mu = read_measure(&measure)?;
            let u = potential(&mu);
            let mut out = json!({ "potential": to_value(&u), "slopes": to_value(&u.slopes()) });
            if mu.is_centered() {
                out["barycenter"] = to_value(&barycenter(&mu)?);
            }
            Ok(Outcome::decided(out))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            if !outcome.output.is_null() {
                let text =
                    serde_json::to_string_pretty(&outcome.output).expect("json values serialize");
                // a closed pipe downstream is not an error of ours
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            if outcome.decided {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
