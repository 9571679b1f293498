//! `collider` command line.

use std::fs::File;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collider_core::{fit_logistic, fit_ols, EstimationError, IrlsOptions, McError, Scenario, SemError};
use serde::Serialize;

use crate::audit::audit;
use crate::grid::parse_grid;
use crate::io::{self, FitReport, Report, ReportProvenance};
use crate::parallel;

pub const DEFAULT_SEED: u64 = 777;

#[derive(Debug, Parser)]
#[command(name = "collider", version, about = "Collider-bias simulation laboratory")]
pub struct Cli {
    /// Worker threads for generation and Monte Carlo (never changes output).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Logistic,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (standard output when absent).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset from a SEM spec file.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Hold a variable fixed: `--do Sodium_gr=3.5` (repeatable).
        #[arg(long = "do", value_name = "VAR=VALUE")]
        intervene: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Fit a linear or logistic regression to a CSV dataset.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        outcome: String,
        /// Comma-separated regressors; empty for an intercept-only model.
        #[arg(long, value_delimiter = ',', default_value = "")]
        regressors: Vec<String>,
        #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
        family: FamilyArg,
        #[command(flatten)]
        output: Output,
    },
    /// Replicated collider experiment on the sodium model.
    Mc {
        #[arg(long, default_value_t = 1.05, allow_negative_numbers = true)]
        beta1: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long, default_value_t = 2.8, allow_negative_numbers = true)]
        alpha1: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        alpha2: f64,
        #[arg(short, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(10..))]
        n: u64,
        #[arg(short = 'R', long = "replicates", default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        replicates: u64,
        #[arg(long, default_value_t = Scenario::reference().seed)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Collider coefficient over a grid of effects (alpha1 = alpha2 = alpha).
    Sweep {
        /// Values as `start:end[:step]` or a comma list.
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        beta1: Grid,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
        #[arg(short, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(10..))]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Audit an adjustment set against a DAG file.
    DagCheck {
        dag: PathBuf,
        #[arg(long)]
        exposure: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, value_delimiter = ',', default_value = "")]
        adjust: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Six-number summaries of a CSV dataset or of fresh draws from a spec.
    Describe {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        data: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..), requires = "spec")]
        n: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory of static files served under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

/// An expanded `start:end[:step]` range or comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<io::SpecError> for CliError {
    fn from(e: io::SpecError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        CliError::numeric(format!("{}: {e}", e.name()))
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match (&e, e.estimation()) {
            (_, Some(source)) => CliError::numeric(format!("{}: {e}", source.name())),
            (McError::InvalidScenario(_), _) => CliError::usage(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<SemError> for CliError {
    fn from(e: SemError) -> Self {
        match e {
            SemError::UnknownColumn(_) | SemError::SingularDesign { .. } | SemError::ConstantColumn(_) => {
                CliError::numeric(e.to_string())
            }
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<io::DataError> for CliError {
    fn from(e: io::DataError) -> Self {
        CliError::usage(e.to_string())
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(
            File::create(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn write_rows(out: &mut dyn Write, comment: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    writeln!(out, "{comment}")?;
    let mut w = csv::Writer::from_writer(&mut *out);
    let csv_err = |e: csv::Error| CliError::usage(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_intervention(s: &str) -> Result<(String, f64), CliError> {
    let (var, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--do expects VAR=VALUE, got {s:?}")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--do value {value:?} is not a number")))?;
    Ok((var.trim().to_string(), v))
}

/// Parses arguments (exiting with code 2 on usage errors) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(t) => parallel::with_threads(t, || run(cli)),
        None => run(cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Generate {
            spec,
            n,
            seed,
            intervene,
            output,
        } => {
            let sem = io::load_sem(&spec)?;
            let intervened = intervene
                .iter()
                .map(|s| parse_intervention(s))
                .collect::<Result<Vec<_>, _>>()?;
            if verbose {
                eprintln!("generating {n} rows from {} (seed {seed})", spec.display());
            }
            let data = parallel::generate(&sem, &intervened, n as usize, seed)?;
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => io::write_csv(&data, &mut out)?,
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance: ReportProvenance::new(Some(seed), Some(sem.digest())),
                        body: &data,
                    },
                )?,
            }
            out.flush()?;
        }
        Command::Fit {
            data,
            outcome,
            regressors,
            family,
            output,
        } => {
            let dataset = io::load_csv(&data)?;
            let regressors: Vec<String> = regressors.into_iter().filter(|r| !r.is_empty()).collect();
            let report = match family {
                FamilyArg::Gaussian => FitReport::from(&fit_ols(&dataset, &outcome, &regressors)?),
                FamilyArg::Logistic => {
                    FitReport::from(&fit_logistic(&dataset, &outcome, &regressors, IrlsOptions::default())?)
                }
            };
            let prov = dataset.provenance();
            let provenance = ReportProvenance::new(prov.map(|p| p.seed), prov.map(|p| p.digest));
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance,
                        body: &report,
                    },
                )?,
                Format::Csv => {
                    let comment = io::provenance_comment(
                        prov.map(|p| p.seed),
                        prov.map(|p| p.digest),
                        &[("formula", report.formula.replace(' ', ""))],
                    );
                    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    let rows: Vec<Vec<String>> = report
                        .terms
                        .iter()
                        .map(|t| {
                            vec![
                                t.name.clone(),
                                t.coef.to_string(),
                                t.se.to_string(),
                                opt(t.odds_ratio),
                                opt(t.ci.map(|c| c[0])),
                                opt(t.ci.map(|c| c[1])),
                            ]
                        })
                        .collect();
                    write_rows(
                        &mut out,
                        &comment,
                        &["term", "coef", "se", "or", "ci_low", "ci_high"],
                        &rows,
                    )?;
                }
            }
            out.flush()?;
        }
        Command::Mc {
            beta1,
            beta2,
            alpha1,
            alpha2,
            n,
            replicates,
            seed,
            output,
        } => {
            let sc = Scenario {
                beta1,
                beta2,
                alpha1,
                alpha2,
                n: n as usize,
                replicates: replicates as usize,
                seed,
            };
            if verbose {
                eprintln!("running {replicates} replicates of n={n}");
            }
            let summary = parallel::run_mc(&sc)?;
            let digest = sc.sem().digest();
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance: ReportProvenance::new(Some(seed), Some(digest)),
                        body: &summary,
                    },
                )?,
                Format::Csv => {
                    let value = serde_json::to_value(summary).expect("serializable");
                    let obj = value.as_object().expect("struct");
                    let header: Vec<&str> = obj.keys().map(String::as_str).collect();
                    let row: Vec<String> = obj.values().map(|v| v.to_string()).collect();
                    write_rows(
                        &mut out,
                        &io::provenance_comment(Some(seed), Some(digest), &[]),
                        &header,
                        &[row],
                    )?;
                }
            }
            out.flush()?;
        }
        Command::Sweep {
            beta1: Grid(beta1),
            alpha: Grid(alpha),
            n,
            seed,
            output,
        } => {
            let rows = parallel::run_sweep(&beta1, &alpha, n as usize, seed)?;
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let table: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.beta1.to_string(),
                                r.alpha.to_string(),
                                r.estimated_coef.to_string(),
                                r.analytic_coef.to_string(),
                                r.abs_bias_table3.to_string(),
                            ]
                        })
                        .collect();
                    let comment = io::provenance_comment(Some(seed), None, &[("n", n.to_string())]);
                    write_rows(
                        &mut out,
                        &comment,
                        &["beta1", "alpha", "estimate", "analytic", "abs_bias"],
                        &table,
                    )?;
                }
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance: ReportProvenance::new(Some(seed), None),
                        body: Rows { n: n as usize, rows },
                    },
                )?,
            }
            out.flush()?;
        }
        Command::DagCheck {
            dag,
            exposure,
            outcome,
            adjust,
            output,
        } => {
            let graph = io::load_dag(&dag)?;
            let adjust: Vec<String> = adjust.into_iter().filter(|a| !a.is_empty()).collect();
            let report = audit(&graph, &exposure, &outcome, &adjust).map_err(|e| CliError::usage(e.to_string()))?;
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance: ReportProvenance::new(None, None),
                        body: &report,
                    },
                )?,
                Format::Csv => {
                    let comment = format!(
                        "{}\n# exposure={} outcome={} adjust={} verdict={}",
                        io::provenance_comment(None, None, &[]),
                        report.exposure,
                        report.outcome,
                        report.adjust.join(","),
                        if report.valid { "valid" } else { "invalid" }
                    );
                    let rows: Vec<Vec<String>> = report
                        .paths
                        .iter()
                        .map(|p| vec![p.path.clone(), p.kind.as_str().into(), p.status.as_str().into()])
                        .collect();
                    write_rows(&mut out, &comment, &["path", "kind", "status"], &rows)?;
                }
            }
            out.flush()?;
        }
        Command::Describe {
            data,
            spec,
            n,
            seed,
            output,
        } => {
            let (dataset, provenance) = match (data, spec) {
                (Some(path), _) => {
                    let d = io::load_csv(&path)?;
                    let p = d.provenance();
                    (d, (p.map(|p| p.seed), p.map(|p| p.digest)))
                }
                (None, Some(path)) => {
                    let sem = io::load_sem(&path)?;
                    let n = n.ok_or_else(|| CliError::usage("describe --spec needs -n"))?;
                    let none: [(&str, f64); 0] = [];
                    let d = parallel::generate(&sem, &none, n as usize, seed)?;
                    (d, (Some(seed), Some(sem.digest())))
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let summaries = dataset.describe()?;
            let mut out = sink(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = summaries
                        .iter()
                        .map(|(name, s)| {
                            [s.min, s.q1, s.median, s.mean, s.q3, s.max]
                                .iter()
                                .map(ToString::to_string)
                                .fold(vec![name.clone()], |mut r, v| {
                                    r.push(v);
                                    r
                                })
                        })
                        .collect();
                    let comment = io::provenance_comment(provenance.0, provenance.1, &[("n", dataset.n().to_string())]);
                    write_rows(
                        &mut out,
                        &comment,
                        &["variable", "min", "q1", "median", "mean", "q3", "max"],
                        &rows,
                    )?;
                }
                Format::Json => write_json(
                    &mut out,
                    &Report {
                        provenance: ReportProvenance::new(provenance.0, provenance.1),
                        body: Rows {
                            n: dataset.n(),
                            rows: summaries
                                .iter()
                                .map(|(variable, summary)| VariableSummary { variable, summary })
                                .collect(),
                        },
                    },
                )?,
            }
            out.flush()?;
        }
        Command::Serve { port, host, static_dir } => {
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::api::serve(addr, static_dir))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VariableSummary<'a> {
    variable: &'a str,
    #[serde(flatten)]
    summary: &'a collider_core::sem::Summary,
}

#[derive(Serialize)]
struct Rows<T> {
    n: usize,
    rows: Vec<T>,
}
