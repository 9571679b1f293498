//! Linear-Gaussian structural equation models.
//!
//! A [`SemSpec`] is an ordered list of assignments
//! `X = intercept + Σ coef·parent + N(mean, sd²)` plus threshold indicators
//! derived from assigned variables. Compiling checks that every parent is
//! defined earlier, which makes the declaration order a topological order.
//!
//! # Generation order
//!
//! Observations are produced in blocks of [`BLOCK_LEN`]. Block `b` draws from
//! ChaCha stream `b` under the run seed. Within a block, observations are
//! visited in index order and, for each one, exactly one standard normal is
//! drawn per assignment in declaration order, including intervened variables
//! whose draw is discarded. A block is therefore a pure function of
//! `(sem, interventions, seed, block index)`, and any partition of the
//! blocks across workers reassembles to the same dataset.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Dag, GraphError};
use crate::linalg::{self, Matrix};
use crate::rng::NormalStream;
use crate::stats;

/// Observations per generation block.
pub const BLOCK_LEN: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParentTerm {
    pub var: String,
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Noise {
    pub mean: f64,
    pub sd: f64,
}

impl Noise {
    pub const STANDARD: Noise = Noise { mean: 0.0, sd: 1.0 };

    pub fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }
}

impl Default for Noise {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub name: String,
    pub intercept: f64,
    pub parents: Vec<ParentTerm>,
    pub noise: Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Comparison {
    #[cfg_attr(feature = "serde", serde(rename = "gt"))]
    Greater,
    #[cfg_attr(feature = "serde", serde(rename = "ge"))]
    GreaterOrEqual,
}

impl Comparison {
    pub fn holds(self, value: f64, cutoff: f64) -> bool {
        match self {
            Comparison::Greater => value > cutoff,
            Comparison::GreaterOrEqual => value >= cutoff,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Greater => "gt",
            Comparison::GreaterOrEqual => "ge",
        }
    }
}

/// `name = 1` when `source op cutoff`, else 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Indicator {
    pub name: String,
    pub source: String,
    pub cutoff: f64,
    pub op: Comparison,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemSpec {
    pub assignments: Vec<Assignment>,
    pub indicators: Vec<Indicator>,
}

impl SemSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an assignment; `parents` are `(name, coefficient)` pairs.
    pub fn assign(mut self, name: &str, intercept: f64, parents: &[(&str, f64)], noise: Noise) -> Self {
        self.assignments.push(Assignment {
            name: name.to_string(),
            intercept,
            parents: parents
                .iter()
                .map(|&(var, coef)| ParentTerm {
                    var: var.to_string(),
                    coef,
                })
                .collect(),
            noise,
        });
        self
    }

    pub fn indicator(mut self, name: &str, source: &str, cutoff: f64, op: Comparison) -> Self {
        self.indicators.push(Indicator {
            name: name.to_string(),
            source: source.to_string(),
            cutoff,
            op,
        });
        self
    }

    /// FNV-1a 64 over a canonical byte rendering (names and IEEE bit patterns).
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for a in &self.assignments {
            h.tag(b'A');
            h.str(&a.name);
            h.f64(a.intercept);
            for p in &a.parents {
                h.tag(b'P');
                h.str(&p.var);
                h.f64(p.coef);
            }
            h.tag(b'N');
            h.f64(a.noise.mean);
            h.f64(a.noise.sd);
        }
        for i in &self.indicators {
            h.tag(b'I');
            h.str(&i.name);
            h.str(&i.source);
            h.f64(i.cutoff);
            h.str(i.op.symbol());
        }
        h.0
    }

    pub fn compile(self) -> Result<CompiledSem, SemError> {
        CompiledSem::new(self)
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    fn tag(&mut self, t: u8) {
        self.bytes(&[t]);
    }
    fn str(&mut self, s: &str) {
        self.bytes(&(s.len() as u64).to_le_bytes());
        self.bytes(s.as_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_bits().to_le_bytes());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SemError {
    /// `variable` uses `parent`, which is only defined later.
    ForwardReference {
        variable: String,
        parent: String,
    },
    DuplicateVariable(String),
    NegativeSd {
        variable: String,
        sd: f64,
    },
    NonFinite {
        variable: String,
    },
    UnknownVariable(String),
    /// A name refers to an indicator where a continuous variable is required.
    NotContinuous(String),
    UnknownColumn(String),
    RaggedColumns {
        column: String,
        len: usize,
        expected: usize,
    },
    NotIndicator {
        column: String,
        value: f64,
    },
    InvalidCount {
        what: &'static str,
        value: usize,
        min: usize,
    },
    ConstantColumn(String),
    /// Population design is rank-deficient: `ratio` is the smallest over the
    /// largest singular value.
    SingularDesign {
        ratio: f64,
    },
    Graph(GraphError),
}

impl fmt::Display for SemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemError::ForwardReference { variable, parent } => {
                write!(f, "{variable} references {parent} before it is defined")
            }
            SemError::DuplicateVariable(v) => write!(f, "variable {v} defined twice"),
            SemError::NegativeSd { variable, sd } => {
                write!(f, "noise sd of {variable} is negative ({sd})")
            }
            SemError::NonFinite { variable } => write!(f, "non-finite parameter in {variable}"),
            SemError::UnknownVariable(v) => write!(f, "unknown variable {v}"),
            SemError::NotContinuous(v) => write!(f, "{v} is an indicator, not a continuous variable"),
            SemError::UnknownColumn(c) => write!(f, "unknown column {c}"),
            SemError::RaggedColumns { column, len, expected } => {
                write!(f, "column {column} has {len} values, expected {expected}")
            }
            SemError::NotIndicator { column, value } => {
                write!(f, "indicator column {column} holds {value}, expected 0 or 1")
            }
            SemError::InvalidCount { what, value, min } => {
                write!(f, "{what} must be at least {min}, got {value}")
            }
            SemError::ConstantColumn(c) => write!(f, "column {c} is constant"),
            SemError::SingularDesign { ratio } => {
                write!(f, "singular design (singular value ratio {ratio:e})")
            }
            SemError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SemError {}

impl From<GraphError> for SemError {
    fn from(e: GraphError) -> Self {
        SemError::Graph(e)
    }
}

/// A validated SEM ready for generation and moment computations.
#[derive(Debug, Clone)]
pub struct CompiledSem {
    spec: SemSpec,
    dag: Dag,
    /// Parent `(index, coef)` per assignment.
    parents: Vec<Vec<(usize, f64)>>,
    indicator_sources: Vec<usize>,
    digest: u64,
}

impl CompiledSem {
    pub fn new(spec: SemSpec) -> Result<Self, SemError> {
        let mut position = BTreeMap::new();
        for (i, a) in spec.assignments.iter().enumerate() {
            if position.insert(a.name.as_str(), i).is_some() {
                return Err(SemError::DuplicateVariable(a.name.clone()));
            }
        }
        let mut parents = Vec::with_capacity(spec.assignments.len());
        let mut edges = Vec::new();
        for (i, a) in spec.assignments.iter().enumerate() {
            let finite = a.intercept.is_finite()
                && a.noise.mean.is_finite()
                && a.noise.sd.is_finite()
                && a.parents.iter().all(|p| p.coef.is_finite());
            if !finite {
                return Err(SemError::NonFinite {
                    variable: a.name.clone(),
                });
            }
            if a.noise.sd < 0.0 {
                return Err(SemError::NegativeSd {
                    variable: a.name.clone(),
                    sd: a.noise.sd,
                });
            }
            let mut ps = Vec::with_capacity(a.parents.len());
            for p in &a.parents {
                match position.get(p.var.as_str()) {
                    Some(&j) if j < i => {
                        ps.push((j, p.coef));
                        edges.push((p.var.as_str(), a.name.as_str()));
                    }
                    Some(_) => {
                        return Err(SemError::ForwardReference {
                            variable: a.name.clone(),
                            parent: p.var.clone(),
                        })
                    }
                    None if spec.indicators.iter().any(|ind| ind.name == p.var) => {
                        return Err(SemError::NotContinuous(p.var.clone()))
                    }
                    None => return Err(SemError::UnknownVariable(p.var.clone())),
                }
            }
            parents.push(ps);
        }
        let mut indicator_sources = Vec::with_capacity(spec.indicators.len());
        let mut indicator_names = BTreeMap::new();
        for ind in &spec.indicators {
            if position.contains_key(ind.name.as_str()) || indicator_names.insert(ind.name.as_str(), ()).is_some() {
                return Err(SemError::DuplicateVariable(ind.name.clone()));
            }
            if !ind.cutoff.is_finite() {
                return Err(SemError::NonFinite {
                    variable: ind.name.clone(),
                });
            }
            let src = position
                .get(ind.source.as_str())
                .copied()
                .ok_or_else(|| SemError::UnknownVariable(ind.source.clone()))?;
            indicator_sources.push(src);
        }
        let dag = Dag::new(spec.assignments.iter().map(|a| a.name.as_str()), edges)?;
        let digest = spec.digest();
        Ok(Self {
            spec,
            dag,
            parents,
            indicator_sources,
            digest,
        })
    }

    pub fn spec(&self) -> &SemSpec {
        &self.spec
    }

    /// Causal graph over the assigned variables (indicators excluded).
    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Assigned variable names; this is also a topological order.
    pub fn variables(&self) -> impl Iterator<Item = &str> + '_ {
        self.spec.assignments.iter().map(|a| a.name.as_str())
    }

    pub fn indicators(&self) -> impl Iterator<Item = &str> + '_ {
        self.spec.indicators.iter().map(|i| i.name.as_str())
    }

    /// Column names of generated datasets: assignments, then indicators.
    pub fn column_names(&self) -> Vec<String> {
        self.variables()
            .chain(self.indicators())
            .map(ToString::to_string)
            .collect()
    }

    fn position(&self, name: &str) -> Result<usize, SemError> {
        if let Some(i) = self.spec.assignments.iter().position(|a| a.name == name) {
            return Ok(i);
        }
        if self.spec.indicators.iter().any(|i| i.name == name) {
            return Err(SemError::NotContinuous(name.to_string()));
        }
        Err(SemError::UnknownVariable(name.to_string()))
    }

    /// Coefficients as a dense matrix `B[child][parent]`; strictly lower
    /// triangular in declaration order.
    pub fn coefficient_matrix(&self) -> Matrix {
        let k = self.parents.len();
        let mut b = Matrix::zeros(k, k);
        for (i, ps) in self.parents.iter().enumerate() {
            for &(j, c) in ps {
                b[(i, j)] += c;
            }
        }
        b
    }

    /// Resolves `do(...)` values to a per-assignment override vector.
    pub fn interventions<S: AsRef<str>>(&self, set: &[(S, f64)]) -> Result<Vec<Option<f64>>, SemError> {
        let mut out = vec![None; self.spec.assignments.len()];
        for (name, value) in set {
            let i = self.position(name.as_ref())?;
            if !value.is_finite() {
                return Err(SemError::NonFinite {
                    variable: name.as_ref().to_string(),
                });
            }
            out[i] = Some(*value);
        }
        Ok(out)
    }

    /// Number of blocks needed for `n` observations.
    pub fn block_count(n: usize) -> usize {
        n.div_ceil(BLOCK_LEN)
    }

    /// Generates block `block` of an `n`-row dataset: a row-major buffer with
    /// one row per observation and one column per assignment.
    pub fn generate_block(&self, overrides: &[Option<f64>], seed: u64, n: usize, block: usize) -> Vec<f64> {
        let k = self.spec.assignments.len();
        let start = block * BLOCK_LEN;
        let rows = BLOCK_LEN.min(n.saturating_sub(start));
        let mut rng = NormalStream::new(seed, block as u64);
        let mut out = vec![0.0; rows * k];
        for r in 0..rows {
            let row = &mut out[r * k..(r + 1) * k];
            for (i, a) in self.spec.assignments.iter().enumerate() {
                let z = rng.standard_normal();
                row[i] = match overrides.get(i).copied().flatten() {
                    Some(v) => v,
                    None => {
                        let mut v = a.intercept;
                        for &(j, c) in &self.parents[i] {
                            v += c * row[j];
                        }
                        v + a.noise.mean + a.noise.sd * z
                    }
                };
            }
        }
        out
    }

    /// Stitches blocks (in block order) into a dataset and derives indicators.
    pub fn assemble(&self, blocks: &[Vec<f64>], n: usize, seed: u64) -> Dataset {
        let k = self.spec.assignments.len();
        let mut values: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(n)).collect();
        for block in blocks {
            for row in block.chunks_exact(k.max(1)) {
                for (col, &v) in values.iter_mut().zip(row) {
                    col.push(v);
                }
            }
        }
        let mut columns: Vec<Column> = self
            .spec
            .assignments
            .iter()
            .zip(values)
            .map(|(a, v)| Column {
                name: a.name.clone(),
                values: v,
                indicator: false,
            })
            .collect();
        for (ind, &src) in self.spec.indicators.iter().zip(&self.indicator_sources) {
            let v = columns[src]
                .values
                .iter()
                .map(|&x| if ind.op.holds(x, ind.cutoff) { 1.0 } else { 0.0 })
                .collect();
            columns.push(Column {
                name: ind.name.clone(),
                values: v,
                indicator: true,
            });
        }
        Dataset {
            n,
            columns,
            provenance: Some(Provenance {
                seed,
                digest: self.digest,
            }),
        }
    }

    /// Draws `n` observations.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Dataset, SemError> {
        self.generate_with(&vec![None; self.spec.assignments.len()], n, seed)
    }

    /// Draws `n` observations with the listed variables held fixed.
    pub fn generate_do<S: AsRef<str>>(
        &self,
        intervened: &[(S, f64)],
        n: usize,
        seed: u64,
    ) -> Result<Dataset, SemError> {
        let overrides = self.interventions(intervened)?;
        self.generate_with(&overrides, n, seed)
    }

    fn generate_with(&self, overrides: &[Option<f64>], n: usize, seed: u64) -> Result<Dataset, SemError> {
        if n < 1 {
            return Err(SemError::InvalidCount {
                what: "n",
                value: n,
                min: 1,
            });
        }
        let blocks: Vec<Vec<f64>> = (0..Self::block_count(n))
            .map(|b| self.generate_block(overrides, seed, n, b))
            .collect();
        Ok(self.assemble(&blocks, n, seed))
    }

    /// Exact means and covariances of the assigned variables.
    pub fn implied_moments(&self) -> ImpliedMoments {
        let k = self.spec.assignments.len();
        let mut mean = vec![0.0; k];
        let mut cov = Matrix::zeros(k, k);
        for (i, a) in self.spec.assignments.iter().enumerate() {
            let ps = &self.parents[i];
            mean[i] = a.intercept + a.noise.mean + ps.iter().map(|&(j, c)| c * mean[j]).sum::<f64>();
            for m in 0..i {
                let c: f64 = ps.iter().map(|&(j, b)| b * cov[(j, m)]).sum();
                cov[(i, m)] = c;
                cov[(m, i)] = c;
            }
            let mut var = a.noise.sd * a.noise.sd;
            for &(j, bj) in ps {
                for &(l, bl) in ps {
                    var += bj * bl * cov[(j, l)];
                }
            }
            cov[(i, i)] = var;
        }
        ImpliedMoments {
            names: self.variables().map(ToString::to_string).collect(),
            mean,
            cov,
        }
    }

    /// Population least-squares coefficients of `outcome` on `regressors`:
    /// the large-sample limit of [`crate::fit_ols`] on data from this model.
    pub fn population_ols<S: AsRef<str>>(&self, outcome: &str, regressors: &[S]) -> Result<PopulationFit, SemError> {
        self.implied_moments().population_ols(outcome, regressors)
    }
}

/// Means and covariance of the continuous variables, in declaration order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImpliedMoments {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub cov: Matrix,
}

impl ImpliedMoments {
    pub fn index(&self, name: &str) -> Result<usize, SemError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SemError::UnknownVariable(name.to_string()))
    }

    pub fn mean_of(&self, name: &str) -> Result<f64, SemError> {
        Ok(self.mean[self.index(name)?])
    }

    pub fn cov_of(&self, a: &str, b: &str) -> Result<f64, SemError> {
        Ok(self.cov[(self.index(a)?, self.index(b)?)])
    }

    pub fn correlation(&self, a: &str, b: &str) -> Result<f64, SemError> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        Ok(self.cov[(i, j)] / libm::sqrt(self.cov[(i, i)] * self.cov[(j, j)]))
    }

    pub fn population_ols<S: AsRef<str>>(&self, outcome: &str, regressors: &[S]) -> Result<PopulationFit, SemError> {
        let y = self.index(outcome)?;
        let xs: Vec<usize> = regressors
            .iter()
            .map(|r| self.index(r.as_ref()))
            .collect::<Result<_, _>>()?;
        let names: Vec<String> = regressors.iter().map(|r| r.as_ref().to_string()).collect();
        let sxx = self.cov.select(&xs);
        let sxy: Vec<f64> = xs.iter().map(|&i| self.cov[(i, y)]).collect();
        if xs.is_empty() {
            return Ok(PopulationFit {
                outcome: outcome.to_string(),
                regressors: names,
                intercept: self.mean[y],
                coefficients: Vec::new(),
                residual_variance: self.cov[(y, y)],
                precision: Matrix::zeros(0, 0),
            });
        }
        let ev = linalg::symmetric_eigenvalues(&sxx);
        let (hi, lo) = (ev[0], ev[ev.len() - 1]);
        let ratio = if hi > 0.0 { lo.max(0.0) / hi } else { 0.0 };
        if !(ratio >= 1e-10) {
            return Err(SemError::SingularDesign { ratio });
        }
        let (b, precision) = linalg::spd_solve_and_inverse(&sxx, &sxy).ok_or(SemError::SingularDesign { ratio })?;
        let intercept = self.mean[y] - xs.iter().zip(&b).map(|(&i, c)| c * self.mean[i]).sum::<f64>();
        let residual_variance = self.cov[(y, y)] - linalg::dot(&b, &sxy);
        Ok(PopulationFit {
            outcome: outcome.to_string(),
            regressors: names,
            intercept,
            coefficients: b,
            residual_variance,
            precision,
        })
    }
}

/// Population regression of one variable on others.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PopulationFit {
    pub outcome: String,
    pub regressors: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Variance of the outcome left after the regression.
    pub residual_variance: f64,
    /// Inverse of the regressors' covariance matrix.
    pub precision: Matrix,
}

impl PopulationFit {
    pub fn coef(&self, name: &str) -> Option<f64> {
        self.regressors
            .iter()
            .position(|r| r == name)
            .map(|i| self.coefficients[i])
    }

    /// Large-sample standard error of slope `name` for a sample of size `n`.
    pub fn standard_error(&self, name: &str, n: usize) -> Option<f64> {
        let i = self.regressors.iter().position(|r| r == name)?;
        Some(libm::sqrt(self.residual_variance * self.precision[(i, i)] / n as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub seed: u64,
    pub digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Threshold indicator (values are 0 or 1).
    pub indicator: bool,
}

/// Column-oriented table of observations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    n: usize,
    columns: Vec<Column>,
    provenance: Option<Provenance>,
}

impl Dataset {
    /// Builds a dataset from named continuous columns of equal length.
    pub fn from_columns<S: Into<String>>(columns: Vec<(S, Vec<f64>)>) -> Result<Self, SemError> {
        let columns: Vec<Column> = columns
            .into_iter()
            .map(|(name, values)| Column {
                name: name.into(),
                values,
                indicator: false,
            })
            .collect();
        Self::from_parts(columns, None)
    }

    pub fn from_parts(columns: Vec<Column>, provenance: Option<Provenance>) -> Result<Self, SemError> {
        let n = columns.first().map_or(0, |c| c.values.len());
        for (i, c) in columns.iter().enumerate() {
            if c.values.len() != n {
                return Err(SemError::RaggedColumns {
                    column: c.name.clone(),
                    len: c.values.len(),
                    expected: n,
                });
            }
            if columns[..i].iter().any(|d| d.name == c.name) {
                return Err(SemError::DuplicateVariable(c.name.clone()));
            }
            if c.indicator {
                if let Some(&bad) = c.values.iter().find(|&&v| v != 0.0 && v != 1.0) {
                    return Err(SemError::NotIndicator {
                        column: c.name.clone(),
                        value: bad,
                    });
                }
            }
        }
        Ok(Self { n, columns, provenance })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn column(&self, name: &str) -> Result<&[f64], SemError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| SemError::UnknownColumn(name.to_string()))
    }

    /// Copy restricted to the given rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                values: rows.iter().map(|&r| c.values[r]).collect(),
                indicator: c.indicator,
            })
            .collect();
        Dataset {
            n: rows.len(),
            columns,
            provenance: self.provenance,
        }
    }

    /// Six-number summary of every column.
    pub fn describe(&self) -> Result<Vec<(String, Summary)>, SemError> {
        if self.n < 1 {
            return Err(SemError::InvalidCount {
                what: "n",
                value: self.n,
                min: 1,
            });
        }
        Ok(self
            .columns
            .iter()
            .map(|c| (c.name.clone(), Summary::of(&c.values)))
            .collect())
    }

    /// Spearman rank correlations among `vars` (average ranks for ties).
    pub fn spearman_matrix<S: AsRef<str>>(&self, vars: &[S]) -> Result<Matrix, SemError> {
        if self.n < 2 {
            return Err(SemError::InvalidCount {
                what: "n",
                value: self.n,
                min: 2,
            });
        }
        let ranks: Vec<Vec<f64>> = vars
            .iter()
            .map(|v| {
                let col = self.column(v.as_ref())?;
                if col.iter().all(|&x| x == col[0]) {
                    return Err(SemError::ConstantColumn(v.as_ref().to_string()));
                }
                Ok(stats::average_ranks(col))
            })
            .collect::<Result<_, _>>()?;
        let k = vars.len();
        let mut m = Matrix::identity(k);
        for i in 0..k {
            for j in (i + 1)..k {
                let rho = stats::pearson(&ranks[i], &ranks[j])
                    .ok_or_else(|| SemError::ConstantColumn(vars[i].as_ref().to_string()))?;
                m[(i, j)] = rho;
                m[(j, i)] = rho;
            }
        }
        Ok(m)
    }
}

/// Minimum, quartiles (type 7), mean and maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let s = stats::sorted(values);
        Self {
            min: s[0],
            q1: stats::quantile_sorted(&s, 0.25),
            median: stats::quantile_sorted(&s, 0.5),
            mean: stats::mean(values),
            q3: stats::quantile_sorted(&s, 0.75),
            max: s[s.len() - 1],
        }
    }
}
