//! File formats: SEM spec files (TOML or a JSON mirror), DAG files, dataset
//! CSV and fit reports.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use collider_core::sem::{Column, Provenance};
use collider_core::{
    Assignment, Comparison, CompiledSem, Dag, Dataset, Indicator, LogisticFit, Noise, OlsFit, ParentTerm, SemError,
    SemSpec,
};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GENERATOR: &str = "collider-lab";

/// A malformed spec or DAG file. `line` is 1-based when the problem can be
/// pinned to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file, line, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFormat {
    Toml,
    Json,
}

impl SpecFormat {
    /// `.json` selects the JSON mirror; anything else is read as TOML.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => SpecFormat::Json,
            _ => SpecFormat::Toml,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// A string that may remember where it sat in the source text.
trait Located {
    fn text(&self) -> &str;
    fn offset(&self) -> Option<usize>;
}

impl Located for String {
    fn text(&self) -> &str {
        self
    }
    fn offset(&self) -> Option<usize> {
        None
    }
}

impl Located for toml::Spanned<String> {
    fn text(&self) -> &str {
        self.get_ref()
    }
    fn offset(&self) -> Option<usize> {
        Some(self.span().start)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "N: Deserialize<'de>"))]
struct RawSpec<N> {
    #[serde(default)]
    assign: Vec<RawAssign<N>>,
    #[serde(default)]
    indicator: Vec<RawIndicator<N>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "N: Deserialize<'de>"))]
struct RawAssign<N> {
    name: N,
    #[serde(default)]
    intercept: f64,
    #[serde(default)]
    parents: Vec<RawParent<N>>,
    #[serde(default)]
    noise: RawNoise,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "N: Deserialize<'de>"))]
struct RawParent<N> {
    var: N,
    coef: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    #[serde(default)]
    mean: f64,
    #[serde(default = "unit")]
    sd: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for RawNoise {
    fn default() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "N: Deserialize<'de>"))]
struct RawIndicator<N> {
    name: N,
    source: N,
    cutoff: f64,
    op: Option<Comparison>,
}

impl<N: Located> RawSpec<N> {
    fn to_spec(&self) -> SemSpec {
        SemSpec {
            assignments: self
                .assign
                .iter()
                .map(|a| Assignment {
                    name: a.name.text().to_string(),
                    intercept: a.intercept,
                    parents: a
                        .parents
                        .iter()
                        .map(|p| ParentTerm {
                            var: p.var.text().to_string(),
                            coef: p.coef,
                        })
                        .collect(),
                    noise: Noise::new(a.noise.mean, a.noise.sd),
                })
                .collect(),
            indicators: self
                .indicator
                .iter()
                .map(|i| Indicator {
                    name: i.name.text().to_string(),
                    source: i.source.text().to_string(),
                    cutoff: i.cutoff,
                    op: i.op.unwrap_or(Comparison::Greater),
                })
                .collect(),
        }
    }

    /// Source offset of the entry responsible for `err`.
    fn blame(&self, err: &SemError) -> Option<usize> {
        let names = || {
            self.assign
                .iter()
                .map(|a| &a.name)
                .chain(self.indicator.iter().map(|i| &i.name))
        };
        let parents = || self.assign.iter().flat_map(|a| a.parents.iter().map(|p| &p.var));
        match err {
            SemError::DuplicateVariable(v) => names().filter(|n| n.text() == v).nth(1)?.offset(),
            SemError::ForwardReference { variable, parent } => self
                .assign
                .iter()
                .find(|a| a.name.text() == variable)?
                .parents
                .iter()
                .find(|p| p.var.text() == parent)?
                .var
                .offset(),
            SemError::UnknownVariable(v) | SemError::NotContinuous(v) => parents()
                .chain(self.indicator.iter().map(|i| &i.source))
                .find(|p| p.text() == v)?
                .offset(),
            SemError::NegativeSd { variable, .. } | SemError::NonFinite { variable } => {
                names().find(|n| n.text() == variable)?.offset()
            }
            _ => None,
        }
    }
}

fn compile_raw<N: Located>(raw: RawSpec<N>, text: &str, file: &str) -> Result<CompiledSem, SpecError> {
    raw.to_spec().compile().map_err(|e| SpecError {
        file: file.to_string(),
        line: raw.blame(&e).map(|o| line_of(text, o)),
        message: e.to_string(),
    })
}

/// Parses and compiles a SEM spec. `file` only labels error messages.
pub fn parse_sem(text: &str, format: SpecFormat, file: &str) -> Result<CompiledSem, SpecError> {
    match format {
        SpecFormat::Toml => {
            let raw: RawSpec<toml::Spanned<String>> = toml::from_str(text).map_err(|e| SpecError {
                file: file.to_string(),
                line: e.span().map(|s| line_of(text, s.start)),
                message: e.message().to_string(),
            })?;
            compile_raw(raw, text, file)
        }
        SpecFormat::Json => {
            let raw: RawSpec<String> = serde_json::from_str(text).map_err(|e| SpecError {
                file: file.to_string(),
                line: (e.line() > 0).then_some(e.line()),
                message: e.to_string(),
            })?;
            compile_raw(raw, text, file)
        }
    }
}

pub fn load_sem(path: &Path) -> Result<CompiledSem, SpecError> {
    let text = read_text(path)?;
    parse_sem(&text, SpecFormat::from_path(path), &path.display().to_string())
}

fn read_text(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|e| SpecError {
        file: path.display().to_string(),
        line: None,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagFile {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl From<&Dag> for DagFile {
    fn from(dag: &Dag) -> Self {
        Self {
            nodes: dag.nodes().to_vec(),
            edges: dag.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

pub fn parse_dag(text: &str, file: &str) -> Result<Dag, SpecError> {
    let raw: DagFile = serde_json::from_str(text).map_err(|e| SpecError {
        file: file.to_string(),
        line: (e.line() > 0).then_some(e.line()),
        message: e.to_string(),
    })?;
    Dag::new(&raw.nodes, raw.edges.iter().map(|(a, b)| (a, b))).map_err(|e| SpecError {
        file: file.to_string(),
        line: None,
        message: e.to_string(),
    })
}

pub fn load_dag(path: &Path) -> Result<Dag, SpecError> {
    let text = read_text(path)?;
    parse_dag(&text, &path.display().to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}, column {column}: cannot read {value:?} as a number")]
    NotNumeric { line: u64, column: String, value: String },
    #[error("{0}")]
    Sem(#[from] SemError),
}

/// Hex form of a spec digest as it appears in reports.
pub fn digest_hex(digest: u64) -> String {
    format!("{digest:016x}")
}

/// Leading comment line of CSV output.
pub fn provenance_comment(seed: Option<u64>, digest: Option<u64>, extra: &[(&str, String)]) -> String {
    let mut s = format!("# {GENERATOR} {VERSION}");
    if let Some(seed) = seed {
        s.push_str(&format!(" seed={seed}"));
    }
    if let Some(d) = digest {
        s.push_str(&format!(" spec={}", digest_hex(d)));
    }
    for (k, v) in extra {
        s.push_str(&format!(" {k}={v}"));
    }
    s
}

/// Writes `data` as CSV: a provenance comment, a header row, then one row per
/// observation. Reals use the shortest decimal form that reads back to the
/// same `f64`.
pub fn write_csv<W: Write>(data: &Dataset, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    let indicators: Vec<&str> = data
        .columns()
        .iter()
        .filter(|c| c.indicator)
        .map(|c| c.name.as_str())
        .collect();
    let mut extra = Vec::new();
    if !indicators.is_empty() {
        extra.push(("indicators", indicators.join(",")));
    }
    let prov = data.provenance();
    writeln!(
        out,
        "{}",
        provenance_comment(prov.map(|p| p.seed), prov.map(|p| p.digest), &extra)
    )?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(data.names())?;
    let cols = data.columns();
    let mut row: Vec<String> = Vec::with_capacity(cols.len());
    for i in 0..data.n() {
        row.clear();
        row.extend(cols.iter().map(|c| c.values[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    out.flush()
}

/// Reads CSV written by [`write_csv`] or any numeric CSV with a header row.
/// Lines starting with `#` are comments; the first may carry provenance.
pub fn read_csv(text: &str) -> Result<Dataset, DataError> {
    let mut seed = None;
    let mut digest = None;
    let mut indicators: Vec<String> = Vec::new();
    if let Some(first) = text.lines().next().and_then(|l| l.strip_prefix('#')) {
        for token in first.split_whitespace() {
            match token.split_once('=') {
                Some(("seed", v)) => seed = v.parse::<u64>().ok(),
                Some(("spec", v)) => digest = u64::from_str_radix(v, 16).ok(),
                Some(("indicators", v)) => indicators = v.split(',').map(String::from).collect(),
                _ => {}
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| DataError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let names: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        for ((field, col), name) in record.iter().zip(values.iter_mut()).zip(&names) {
            let v = field.parse::<f64>().map_err(|_| DataError::NotNumeric {
                line,
                column: name.clone(),
                value: field.to_string(),
            })?;
            col.push(v);
        }
    }
    let columns = names
        .into_iter()
        .zip(values)
        .map(|(name, values)| Column {
            indicator: indicators.contains(&name),
            name,
            values,
        })
        .collect();
    let provenance = match (seed, digest) {
        (Some(seed), Some(digest)) => Some(Provenance { seed, digest }),
        _ => None,
    };
    Ok(Dataset::from_parts(columns, provenance)?)
}

pub fn load_csv(path: &Path) -> Result<Dataset, DataError> {
    read_csv(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub name: String,
    pub coef: f64,
    pub se: f64,
    #[serde(rename = "or", default, skip_serializing_if = "Option::is_none")]
    pub odds_ratio: Option<f64>,
    /// 95% Wald interval for the odds ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
}

/// Serializable summary of a linear or logistic fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub outcome: String,
    pub family: Family,
    pub formula: String,
    pub terms: Vec<TermReport>,
    pub n: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviance: Option<f64>,
    pub aic: f64,
    pub loglik: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl FitReport {
    pub fn term(&self, name: &str) -> Option<&TermReport> {
        self.terms.iter().find(|t| t.name == name)
    }
}

impl From<&OlsFit> for FitReport {
    fn from(fit: &OlsFit) -> Self {
        Self {
            outcome: fit.outcome.clone(),
            family: Family::Gaussian,
            formula: fit.formula(),
            terms: fit
                .terms
                .iter()
                .zip(fit.coefficients.iter().zip(&fit.standard_errors))
                .map(|(name, (&coef, &se))| TermReport {
                    name: name.clone(),
                    coef,
                    se,
                    odds_ratio: None,
                    ci: None,
                })
                .collect(),
            n: fit.n,
            p: fit.p,
            rss: Some(fit.rss),
            deviance: None,
            aic: fit.aic,
            loglik: fit.loglik,
            converged: None,
            iterations: None,
        }
    }
}

impl From<&LogisticFit> for FitReport {
    fn from(fit: &LogisticFit) -> Self {
        Self {
            outcome: fit.outcome.clone(),
            family: Family::Binomial,
            formula: fit.formula(),
            terms: (0..fit.p)
                .map(|i| TermReport {
                    name: fit.terms[i].clone(),
                    coef: fit.coefficients[i],
                    se: fit.standard_errors[i],
                    odds_ratio: Some(fit.odds_ratios[i]),
                    ci: Some([fit.ci_low[i], fit.ci_high[i]]),
                })
                .collect(),
            n: fit.n,
            p: fit.p,
            rss: None,
            deviance: Some(fit.deviance),
            aic: fit.aic,
            loglik: fit.loglik,
            converged: Some(fit.converged),
            iterations: Some(fit.iterations),
        }
    }
}

/// Who produced a report and from what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub generator: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_digest: Option<String>,
}

impl ReportProvenance {
    pub fn new(seed: Option<u64>, digest: Option<u64>) -> Self {
        Self {
            generator: GENERATOR.to_string(),
            version: VERSION.to_string(),
            seed,
            spec_digest: digest.map(digest_hex),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub provenance: ReportProvenance,
    #[serde(flatten)]
    pub body: T,
}
