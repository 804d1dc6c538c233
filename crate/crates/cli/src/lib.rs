//! The `onerel` command line. `run` does all the work so tests can call it
//! without spawning a process.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use onerel::cancellation::{bound_report, max_piece_length, satisfies_c_prime, CancellationError, Side};
use onerel::diagram::{validate_diagram, DiagramDoc, DiagramError, VanKampenDiagram};
use onerel::lallop::{lallop, LallopError, LallopOptions, LallopResult, Mode, Solver, DEFAULT_BUDGET};
use onerel::pods::ver_functionals;
use onerel::survey::{run_survey, to_csv, SurveyConfig, SurveyError, DEFAULT_REJECTION_CAP};
use onerel::words::{cyclically_reduce, evaluate, primitive_root, Word, WordError};
use onerel::{format_rational, parse_rational};
use serde::Serialize;
use serde_json::{json, Value};

/// Bumped whenever a JSON payload changes shape.
pub const SCHEMA_VERSION: &str = "1";

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)");

#[derive(Debug, Parser)]
#[command(name = "onerel", version = VERSION, about = "Bounds for the simplicial volume of one-relator groups")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Truncated,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Truncated => Mode::Truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Float,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free reduction, roots and expressions.
    #[command(subcommand)]
    Word(WordCommand),
    /// Longest piece and the small cancellation condition.
    Piece {
        word: String,
        /// Test C′(1/N).
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Every bound that follows from the word and an optional scl value.
    Bounds {
        word: String,
        /// scl of the word as p/q.
        #[arg(long)]
        scl: Option<String>,
    },
    /// Van Kampen diagram files.
    #[command(subcommand)]
    Diagram(DiagramCommand),
    /// Solve the lallop program.
    Lallop {
        word: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
        solver: SolverArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Largest number of fragments to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Random words in the commutator subgroup.
    Survey {
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        with_lallop: Option<ModeArg>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        lallop_budget: u64,
        #[arg(long, default_value_t = DEFAULT_REJECTION_CAP)]
        rejection_cap: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum WordCommand {
    /// Freely reduce a word.
    Reduce { word: String },
    /// Cyclic reduction and primitive root.
    Root { word: String },
    /// Evaluate an expression such as "[a,b]^c" or "x y'".
    Eval {
        expr: String,
        /// Bind a name to a word, as name=word.
        #[arg(long = "let", value_parser = parse_binding)]
        bindings: Vec<(String, String)>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiagramCommand {
    /// Validate a diagram file.
    Check { file: PathBuf },
    /// Vertices, Euler characteristic, curvature and the volume bound.
    Metrics { file: PathBuf },
    /// The pod vector of a reduced diagram.
    Phi { file: PathBuf },
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (name, word) = s.split_once('=').ok_or_else(|| format!("expected name=word, got {s:?}"))?;
    Ok((name.trim().to_string(), word.trim().to_string()))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Cancellation(#[from] CancellationError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Lallop(#[from] LallopError),
    #[error(transparent)]
    Survey(#[from] SurveyError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Word(e) => e.name(),
            CliError::Cancellation(e) => e.name(),
            CliError::Diagram(e) => e.name(),
            CliError::Lallop(e) => e.name(),
            CliError::Survey(e) => e.name(),
            CliError::Io(_) => "IoError",
        }
    }

    /// 1 usage or bad input, 2 model or infeasible, 3 resource limit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lallop(LallopError::ResourceLimit { .. }) => 3,
            CliError::Lallop(LallopError::Diagram(_)) => 1,
            CliError::Lallop(_) => 2,
            CliError::Survey(SurveyError::RejectionBudgetExceeded { .. }) => 3,
            CliError::Survey(SurveyError::Lallop(LallopError::ResourceLimit { .. })) => 3,
            CliError::Survey(SurveyError::Lallop(_)) => 2,
            CliError::Diagram(DiagramError::NotReduced { .. }) => 2,
            CliError::Cancellation(CancellationError::InvalidScl { .. }) => 2,
            _ => 1,
        }
    }
}

/// What a command produced, before formatting.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub text: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct OutputEnvelope<'a> {
    pub command: &'a str,
    pub inputs: &'a Value,
    pub result: &'a Value,
    pub warnings: &'a [String],
    pub version: Value,
    pub timing: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses argv (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Output {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    if let Some(n) = cli.threads {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(report) => {
            let seconds = start.elapsed().as_secs_f64();
            let mut stderr = String::new();
            for w in &report.warnings {
                stderr.push_str(&format!("warning: {w}\n"));
            }
            let stdout = match cli.format {
                Format::Text => {
                    let mut t = report.text.clone();
                    if !t.ends_with('\n') {
                        t.push('\n');
                    }
                    t
                }
                Format::Json => {
                    let env = OutputEnvelope {
                        command: &report.command,
                        inputs: &report.inputs,
                        result: &report.result,
                        warnings: &report.warnings,
                        version: json!({ "package": env!("CARGO_PKG_VERSION"), "schema": SCHEMA_VERSION }),
                        timing: json!({ "seconds": seconds }),
                    };
                    serde_json::to_string_pretty(&env).expect("serializable") + "\n"
                }
            };
            Output { code: 0, stdout, stderr }
        }
        Err(e) => Output {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {}: {}\n", e.name(), e),
        },
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Word(w) => word_command(w),
        Command::Piece { word, n } => piece_command(word, *n),
        Command::Bounds { word, scl } => bounds_command(word, scl.as_deref()),
        Command::Diagram(d) => diagram_command(d),
        Command::Lallop {
            word,
            mode,
            solver,
            tol,
            certificate,
            budget,
        } => lallop_command(word, *mode, *solver, *tol, certificate.as_ref(), *budget),
        Command::Survey {
            alphabet,
            lengths,
            samples,
            seed,
            out,
            with_lallop,
            lallop_budget,
            rejection_cap,
        } => {
            let mut cfg = SurveyConfig::new(*alphabet, lengths.clone(), *samples, *seed);
            cfg.lallop = with_lallop.map(Mode::from);
            cfg.lallop_budget = *lallop_budget;
            cfg.rejection_cap = *rejection_cap;
            survey_command(&cfg, out.as_ref())
        }
    }
}

fn word_command(cmd: &WordCommand) -> Result<Report, CliError> {
    match cmd {
        WordCommand::Reduce { word } => {
            let w = Word::parse(word)?;
            let (core, conj) = cyclically_reduce(&w);
            Ok(Report {
                command: "word reduce".into(),
                inputs: json!({ "word": word }),
                result: json!({
                    "reduced": w.to_string(),
                    "length": w.len(),
                    "cyclic_core": core.to_string(),
                    "conjugator": conj.to_string(),
                }),
                text: w.to_string(),
                warnings: vec![],
            })
        }
        WordCommand::Root { word } => {
            let w = Word::parse(word)?;
            let dec = primitive_root(&w)?;
            Ok(Report {
                command: "word root".into(),
                inputs: json!({ "word": word }),
                result: to_value(&dec),
                text: format!(
                    "root: {}\nexponent: {}\nconjugator: {}",
                    dec.root, dec.exponent, dec.conjugator
                ),
                warnings: vec![],
            })
        }
        WordCommand::Eval { expr, bindings } => {
            let mut env = HashMap::new();
            for (name, word) in bindings {
                env.insert(name.clone(), Word::parse(word)?);
            }
            let w = evaluate(expr, &env)?;
            let b: serde_json::Map<String, Value> =
                bindings.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            Ok(Report {
                command: "word eval".into(),
                inputs: json!({ "expr": expr, "bindings": b }),
                result: json!({ "word": w.to_string(), "length": w.len() }),
                text: w.to_string(),
                warnings: vec![],
            })
        }
    }
}

fn piece_command(word: &str, n: Option<usize>) -> Result<Report, CliError> {
    let w = Word::parse(word)?;
    let report = max_piece_length(&w)?;
    let mut result = to_value(&report);
    let threshold = if report.c_prime_threshold == 0 {
        "every N".to_string()
    } else {
        report.c_prime_threshold.to_string()
    };
    let mut text = format!("max piece length: {}\n", report.max_piece_length);
    if let Some(wit) = &report.witness {
        text.push_str(&format!("piece: {}\n", wit.piece));
    }
    text.push_str(&format!("C'(1/N) holds for N <= {threshold}"));
    if let Some(n) = n {
        let ok = satisfies_c_prime(&w, n)?;
        result["c_prime"] = json!({ "N": n, "holds": ok });
        text.push_str(&format!("\nC'(1/{n}): {ok}"));
    }
    Ok(Report {
        command: "piece".into(),
        inputs: json!({ "word": word, "N": n }),
        result,
        text,
        warnings: vec![],
    })
}

fn bounds_command(word: &str, scl: Option<&str>) -> Result<Report, CliError> {
    let w = Word::parse(word)?;
    let scl = scl
        .map(|s| parse_rational(s).map_err(|e| CliError::Usage(format!("--scl: {e}"))))
        .transpose()?;
    let report = bound_report(&w, scl.as_ref())?;
    let mut lines = Vec::new();
    for b in &report.bounds {
        let q = match b.quantity {
            onerel::cancellation::Quantity::Volume => "volume",
            onerel::cancellation::Quantity::Scl => "scl",
        };
        let rel = match b.side {
            Side::Lower => ">=",
            Side::Upper => "<=",
            Side::StrictUpper => "<",
            Side::Exact => "=",
        };
        lines.push(format!("{q} {rel} {} ({})", format_rational(&b.value), b.source));
    }
    let lower = report.volume_lower().map(format_rational);
    let upper = report.volume_upper().map(|(u, strict)| json!({ "value": format_rational(u), "strict": strict }));
    let mut result = to_value(&report);
    result["volume_interval"] = json!({ "lower": lower, "upper": upper });
    Ok(Report {
        command: "bounds".into(),
        inputs: json!({ "word": word, "scl": scl.as_ref().map(format_rational) }),
        result,
        text: lines.join("\n"),
        warnings: vec![],
    })
}

fn load_diagram(file: &PathBuf) -> Result<VanKampenDiagram, CliError> {
    let doc = DiagramDoc::load(file)?;
    Ok(validate_diagram(&doc)?)
}

fn diagram_command(cmd: &DiagramCommand) -> Result<Report, CliError> {
    match cmd {
        DiagramCommand::Check { file } => {
            let d = load_diagram(file)?;
            let m = d.metrics();
            let mut warnings = vec![];
            if !m.reduced {
                warnings.push(format!("{} cancelling pair(s)", m.offending_rectangles.len()));
            }
            Ok(Report {
                command: "diagram check".into(),
                inputs: json!({ "file": file }),
                result: json!({
                    "valid": true,
                    "relator": d.root().to_string(),
                    "power": d.power(),
                    "vertices": m.vertices,
                    "edges": m.edges,
                    "faces": m.faces,
                    "chi": m.chi,
                    "degree": m.total_degree,
                    "reduced": m.reduced,
                }),
                text: format!(
                    "valid: V={} E={} F={} chi={} degree={} reduced={}",
                    m.vertices, m.edges, m.faces, m.chi, m.total_degree, m.reduced
                ),
                warnings,
            })
        }
        DiagramCommand::Metrics { file } => {
            let d = load_diagram(file)?;
            let m = d.metrics();
            let bound = d.volume_upper_bound().ok();
            let mut result = to_value(&m);
            result["volume_upper_bound"] = json!(bound.as_ref().map(format_rational));
            result["gauss_bonnet"] = json!(m.gauss_bonnet_holds());
            result["branch_bound"] = json!(m.branch_bound_holds());
            let curv: Vec<String> = m.curvature_per_disk.iter().map(format_rational).collect();
            let genus: Vec<String> = m.genus.iter().map(|g| g.to_string()).collect();
            let text = [
                format!("vertices: {}", m.vertices),
                format!("edges: {}", m.edges),
                format!("faces: {}", m.faces),
                format!("chi: {}", m.chi),
                format!("chi_minus: {}", m.chi_minus),
                format!("degree: {}", m.total_degree),
                format!("genus: {}", genus.join(", ")),
                format!("curvature: {}", curv.join(", ")),
                format!("reduced: {}", m.reduced),
                format!(
                    "volume upper bound: {}",
                    bound.as_ref().map(format_rational).unwrap_or_else(|| "none".into())
                ),
            ]
            .join("\n");
            Ok(Report {
                command: "diagram metrics".into(),
                inputs: json!({ "file": file }),
                result,
                text,
                warnings: vec![],
            })
        }
        DiagramCommand::Phi { file } => {
            let d = load_diagram(file)?;
            let phi = d.phi()?;
            let f = ver_functionals(&phi, d.root().len(), d.power());
            let pods: Vec<Value> = phi
                .iter()
                .map(|(p, c)| json!({ "pod": p.to_string(), "coefficient": format_rational(c) }))
                .collect();
            let mut lines: Vec<String> = phi
                .iter()
                .map(|(p, c)| format!("{} {}", format_rational(c), p))
                .collect();
            lines.push(format!(
                "lambda = {}, nu = {}, nubar = {}",
                format_rational(&f.lambda),
                format_rational(&f.nu),
                format_rational(&f.nubar)
            ));
            Ok(Report {
                command: "diagram phi".into(),
                inputs: json!({ "file": file }),
                result: json!({ "pods": pods, "functionals": to_value(&f) }),
                text: lines.join("\n"),
                warnings: vec![],
            })
        }
    }
}

/// The JSON payload of a lallop result, shared with the tests.
pub fn lallop_payload(res: &LallopResult) -> Value {
    json!({
        "value": res.value.to_string(),
        "verification": res.verification,
        "root": res.root.to_string(),
        "power": res.power,
        "mode": res.mode,
        "variables": res.variables,
        "constraints": res.constraints,
        "counts": res.counts,
        "timings": res.timings,
    })
}

fn lallop_command(
    word: &str,
    mode: ModeArg,
    solver: SolverArg,
    tol: f64,
    certificate: Option<&PathBuf>,
    budget: u64,
) -> Result<Report, CliError> {
    let w = Word::parse(word)?;
    let opts = LallopOptions {
        mode: mode.into(),
        solver: match solver {
            SolverArg::Exact => Solver::Exact,
            SolverArg::Float => Solver::Float { tol },
        },
        budget,
    };
    let res = lallop(&w, &opts)?;
    let mut warnings = vec![];
    if res.verification == "unverified" {
        warnings.push("the floating-point optimum could not be verified exactly".to_string());
    }
    if let Some(path) = certificate {
        match res.certificate_json() {
            Some(text) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => warnings.push("no exact certificate to write".to_string()),
        }
    }
    Ok(Report {
        command: "lallop".into(),
        inputs: json!({
            "word": word,
            "mode": Mode::from(mode),
            "solver": opts.solver,
            "budget": budget,
            "certificate": certificate,
        }),
        result: lallop_payload(&res),
        text: res.value.to_string(),
        warnings,
    })
}

fn survey_command(cfg: &SurveyConfig, out: Option<&PathBuf>) -> Result<Report, CliError> {
    let rows = run_survey(cfg)?;
    let csv = to_csv(&rows)?;
    let text = match out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            format!("wrote {} rows to {}", rows.len(), path.display())
        }
        None => csv,
    };
    Ok(Report {
        command: "survey".into(),
        inputs: json!({
            "alphabet": cfg.alphabet_size,
            "lengths": cfg.lengths,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "with_lallop": cfg.lallop,
            "out": out,
        }),
        result: json!({ "rows": to_value(&rows) }),
        text,
        warnings: vec![],
    })
}
