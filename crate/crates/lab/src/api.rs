//! Stateless JSON service behind the interactive explorer.
//!
//! Every response is a pure function of the request: the seed travels in the
//! request and nothing is kept between calls.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::Query;
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use collider_core::fixtures::{self, AGE, HYPERTENSION, PROTEINURIA, SBP, SODIUM};
use collider_core::rng::NormalStream;
use collider_core::sem::Column;
use collider_core::{
    analytic_collider_coef, fit_logistic, fit_ols, forest_rows, partial_curve, EstimationError, ForestRow, IrlsOptions,
    McError, PartialCurve, SweepRow,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::audit::{audit, VerdictReport};
use crate::grid::parse_grid;
use crate::io::{FitReport, ReportProvenance, VERSION};
use crate::parallel;

pub const MIN_N: usize = 100;
pub const MAX_N: usize = 100_000;
pub const MAX_SWEEP_CELLS: usize = 200;
pub const CURVE_POINTS: usize = 50;
/// Largest accepted |coefficient| in a simulate request.
pub const COEF_LIMIT: f64 = 100.0;
/// RNG stream for scatter subsampling; generation uses streams 0, 1, … per block.
const SCATTER_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRequest {
    pub beta1: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n: usize,
    pub seed: u64,
    pub include_points: bool,
    pub max_points: usize,
}

impl Default for SimulateRequest {
    fn default() -> Self {
        Self {
            beta1: 1.05,
            alpha1: 2.8,
            alpha2: 2.0,
            n: 1000,
            seed: 777,
            include_points: true,
            max_points: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

fn bounded_count(v: &Value, field: &str, min: usize, max: usize, errors: &mut Vec<FieldError>) -> Option<usize> {
    let Some(x) = v.as_u64() else {
        errors.push(FieldError::new(field, format!("{field} must be a whole number")));
        return None;
    };
    if x < min as u64 {
        errors.push(FieldError::new(field, format!("{field} below minimum ({min})")));
        None
    } else if x > max as u64 {
        errors.push(FieldError::new(field, format!("{field} above maximum ({max})")));
        None
    } else {
        Some(x as usize)
    }
}

impl SimulateRequest {
    /// Parses a request body. Absent fields take their defaults; every
    /// problem is reported against the field that caused it.
    pub fn from_json(body: &[u8]) -> Result<Self, Vec<FieldError>> {
        let value: Value =
            serde_json::from_slice(body).map_err(|e| vec![FieldError::new("body", format!("malformed JSON: {e}"))])?;
        let Value::Object(map) = value else {
            return Err(vec![FieldError::new("body", "expected a JSON object")]);
        };
        let mut req = Self::default();
        let mut errors = Vec::new();
        for (key, v) in &map {
            match key.as_str() {
                "beta1" | "alpha1" | "alpha2" => match v.as_f64() {
                    Some(x) if x.abs() <= COEF_LIMIT => {
                        *match key.as_str() {
                            "beta1" => &mut req.beta1,
                            "alpha1" => &mut req.alpha1,
                            _ => &mut req.alpha2,
                        } = x;
                    }
                    Some(_) => errors.push(FieldError::new(
                        key,
                        format!("{key} must lie in [-{COEF_LIMIT}, {COEF_LIMIT}]"),
                    )),
                    None => errors.push(FieldError::new(key, format!("{key} must be a number"))),
                },
                "n" => {
                    if let Some(n) = bounded_count(v, key, MIN_N, MAX_N, &mut errors) {
                        req.n = n;
                    }
                }
                "max_points" => {
                    if let Some(m) = bounded_count(v, key, 1, MAX_N, &mut errors) {
                        req.max_points = m;
                    }
                }
                "seed" => match v.as_u64() {
                    Some(s) => req.seed = s,
                    None => errors.push(FieldError::new(key, "seed must be a non-negative integer")),
                },
                "include_points" => match v.as_bool() {
                    Some(b) => req.include_points = b,
                    None => errors.push(FieldError::new(key, "include_points must be true or false")),
                },
                _ => errors.push(FieldError::new(key, format!("unknown field {key}"))),
            }
        }
        if errors.is_empty() {
            Ok(req)
        } else {
            Err(errors)
        }
    }
}

/// Crude (`SBP ~ Sodium`), age-adjusted and collider-adjusted variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple<T> {
    pub crude: T,
    pub age_adjusted: T,
    pub collider_adjusted: T,
}

/// Single-dataset counterparts of the Monte Carlo bias definitions, with the
/// age-adjusted estimate standing in for the true-model coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReadout {
    pub true_effect: f64,
    pub true_model_coef: f64,
    pub collider_coef: f64,
    /// `true_model_coef − |collider_coef|`.
    pub bias_box6: f64,
    /// `100 · bias_box6 / true_model_coef`; absent when that is zero.
    pub relbias_box6_pct: Option<f64>,
    /// `collider_coef − true_effect`.
    pub bias_simple: f64,
    /// `true_effect − collider_coef`.
    pub abs_bias_table3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    /// Row indices into the full dataset, ascending.
    pub rows: Vec<usize>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResponse {
    pub request: SimulateRequest,
    pub seed: u64,
    pub provenance: ReportProvenance,
    pub analytic_collider_coef: f64,
    pub fits: Triple<FitReport>,
    pub logistic_fits: Triple<FitReport>,
    /// Sodium odds ratios of the three logistic fits.
    pub forest: Vec<ForestRow>,
    pub bias: BiasReadout,
    /// Fitted SBP against sodium for each linear fit, other terms at medians.
    pub curves: Triple<PartialCurve>,
    pub points: Option<Points>,
}

/// A fit that could not be computed for the requested parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitFailure {
    pub fit: String,
    pub error: EstimationError,
}

/// `k` distinct row indices out of `n`, ascending, chosen by a seeded partial
/// Fisher–Yates shuffle.
pub fn subsample(n: usize, k: usize, seed: u64) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut rng = NormalStream::new(seed, SCATTER_STREAM);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

const SETS: [(&str, &[&str]); 3] = [
    ("crude", &[SODIUM]),
    ("age_adjusted", &[SODIUM, AGE]),
    ("collider_adjusted", &[SODIUM, AGE, PROTEINURIA]),
];

fn triple<T, E>(mut f: impl FnMut(&'static str, &'static [&'static str]) -> Result<T, E>) -> Result<Triple<T>, E> {
    Ok(Triple {
        crude: f(SETS[0].0, SETS[0].1)?,
        age_adjusted: f(SETS[1].0, SETS[1].1)?,
        collider_adjusted: f(SETS[2].0, SETS[2].1)?,
    })
}

pub fn simulate(req: &SimulateRequest) -> Result<SimulateResponse, FitFailure> {
    let sem = fixtures::sodium_with(req.beta1, 2.0, req.alpha1, req.alpha2);
    let data = sem.generate(req.n, req.seed).expect("n validated");
    let fail = |fit: String| move |error| FitFailure { fit, error };

    let ols = triple(|label, regs| fit_ols(&data, SBP, regs).map_err(fail(format!("linear {label}"))))?;
    let logit = triple(|label, regs| {
        fit_logistic(&data, HYPERTENSION, regs, IrlsOptions::default()).map_err(fail(format!("logistic {label}")))
    })?;
    let curves = Triple {
        crude: partial_curve(&ols.crude, &data, SODIUM, CURVE_POINTS).map_err(fail("curve crude".into()))?,
        age_adjusted: partial_curve(&ols.age_adjusted, &data, SODIUM, CURVE_POINTS)
            .map_err(fail("curve age_adjusted".into()))?,
        collider_adjusted: partial_curve(&ols.collider_adjusted, &data, SODIUM, CURVE_POINTS)
            .map_err(fail("curve collider_adjusted".into()))?,
    };
    let forest = forest_rows(
        &[
            logit.crude.clone(),
            logit.age_adjusted.clone(),
            logit.collider_adjusted.clone(),
        ],
        SODIUM,
    )
    .map_err(fail("forest".into()))?;

    let true_model_coef = ols.age_adjusted.coef(SODIUM).expect("regressor present");
    let collider_coef = ols.collider_adjusted.coef(SODIUM).expect("regressor present");
    let bias_box6 = true_model_coef - collider_coef.abs();
    let bias = BiasReadout {
        true_effect: req.beta1,
        true_model_coef,
        collider_coef,
        bias_box6,
        relbias_box6_pct: (true_model_coef != 0.0).then(|| 100.0 * bias_box6 / true_model_coef),
        bias_simple: collider_coef - req.beta1,
        abs_bias_table3: req.beta1 - collider_coef,
    };
    let points = req.include_points.then(|| {
        let rows = subsample(req.n, req.max_points, req.seed);
        let columns = data.take_rows(&rows).columns().to_vec();
        Points { rows, columns }
    });
    Ok(SimulateResponse {
        request: req.clone(),
        seed: req.seed,
        provenance: ReportProvenance::new(Some(req.seed), Some(sem.digest())),
        analytic_collider_coef: analytic_collider_coef(req.beta1, req.alpha1, req.alpha2),
        fits: Triple {
            crude: FitReport::from(&ols.crude),
            age_adjusted: FitReport::from(&ols.age_adjusted),
            collider_adjusted: FitReport::from(&ols.collider_adjusted),
        },
        logistic_fits: Triple {
            crude: FitReport::from(&logit.crude),
            age_adjusted: FitReport::from(&logit.age_adjusted),
            collider_adjusted: FitReport::from(&logit.collider_adjusted),
        },
        forest,
        bias,
        curves,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagReport {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub exposure: String,
    pub outcome: String,
    pub verdicts: Vec<VerdictReport>,
}

/// The sodium DAG audited with no adjustment, with age, and with age and
/// proteinuria.
pub fn dag_report() -> DagReport {
    let dag = fixtures::fig3_dag();
    let sets: [&[&str]; 3] = [&[], &["AGE"], &["AGE", "PRO"]];
    DagReport {
        nodes: dag.nodes().to_vec(),
        edges: dag.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        exposure: "SOD".into(),
        outcome: "SBP".into(),
        verdicts: sets
            .iter()
            .map(|s| audit(&dag, "SOD", "SBP", s).expect("fixture nodes"))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("serializable");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn bad_request(fields: Vec<FieldError>) -> Response {
    let message = fields.iter().map(|f| f.message.as_str()).collect::<Vec<_>>().join("; ");
    json(
        StatusCode::BAD_REQUEST,
        &ErrorBody {
            error: "InvalidRequest".into(),
            message,
            fields,
        },
    )
}

fn unprocessable(error: &EstimationError, context: &str) -> Response {
    json(
        StatusCode::UNPROCESSABLE_ENTITY,
        &ErrorBody {
            error: error.name().into(),
            message: format!("{context}: {error}"),
            fields: Vec::new(),
        },
    )
}

fn internal(message: String) -> Response {
    json(
        StatusCode::INTERNAL_SERVER_ERROR,
        &ErrorBody {
            error: "Internal".into(),
            message,
            fields: Vec::new(),
        },
    )
}

async fn simulate_handler(body: Bytes) -> Response {
    let req = match SimulateRequest::from_json(&body) {
        Ok(r) => r,
        Err(fields) => return bad_request(fields),
    };
    match tokio::task::spawn_blocking(move || simulate(&req)).await {
        Ok(Ok(resp)) => json(StatusCode::OK, &resp),
        Ok(Err(f)) => unprocessable(&f.error, &f.fit),
        Err(e) => internal(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepQuery {
    pub beta1: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

impl SweepQuery {
    pub fn parse(params: &BTreeMap<String, String>) -> Result<Self, Vec<FieldError>> {
        let mut errors = Vec::new();
        let mut grid = |key: &str| match params.get(key) {
            None => {
                errors.push(FieldError::new(key, format!("{key} is required")));
                Vec::new()
            }
            Some(s) => parse_grid(s).unwrap_or_else(|e| {
                errors.push(FieldError::new(key, e));
                Vec::new()
            }),
        };
        let beta1 = grid("beta1");
        let alphas = grid("alphas");
        let mut n = 1000;
        if let Some(s) = params.get("n") {
            match s.parse::<usize>() {
                Ok(v) if v < MIN_N => errors.push(FieldError::new("n", format!("n below minimum ({MIN_N})"))),
                Ok(v) if v > MAX_N => errors.push(FieldError::new("n", format!("n above maximum ({MAX_N})"))),
                Ok(v) => n = v,
                Err(_) => errors.push(FieldError::new("n", "n must be a whole number")),
            }
        }
        let mut seed = 777;
        if let Some(s) = params.get("seed") {
            match s.parse::<u64>() {
                Ok(v) => seed = v,
                Err(_) => errors.push(FieldError::new("seed", "seed must be a non-negative integer")),
            }
        }
        for key in params.keys() {
            if !["beta1", "alphas", "n", "seed"].contains(&key.as_str()) {
                errors.push(FieldError::new(key, format!("unknown parameter {key}")));
            }
        }
        let cells = beta1.len() * alphas.len();
        if errors.is_empty() && cells > MAX_SWEEP_CELLS {
            errors.push(FieldError::new(
                "alphas",
                format!("grid has {cells} cells; at most {MAX_SWEEP_CELLS} per call"),
            ));
        }
        if errors.is_empty() {
            Ok(Self { beta1, alphas, n, seed })
        } else {
            Err(errors)
        }
    }
}

async fn sweep_handler(Query(params): Query<BTreeMap<String, String>>) -> Response {
    let q = match SweepQuery::parse(&params) {
        Ok(q) => q,
        Err(fields) => return bad_request(fields),
    };
    let run = move || parallel::run_sweep(&q.beta1, &q.alphas, q.n, q.seed);
    match tokio::task::spawn_blocking(run).await {
        Ok(Ok(rows)) => json::<Vec<SweepRow>>(StatusCode::OK, &rows),
        Ok(Err(e @ McError::Cell { .. })) => {
            let source = e.estimation().expect("cell error").clone();
            unprocessable(&source, &e.to_string())
        }
        Ok(Err(e)) => bad_request(vec![FieldError::new("grid", e.to_string())]),
        Err(e) => internal(e.to_string()),
    }
}

async fn dag_handler() -> Response {
    json(StatusCode::OK, &dag_report())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

async fn health() -> Response {
    json(
        StatusCode::OK,
        &Health {
            status: "ok".into(),
            version: VERSION.into(),
        },
    )
}

pub fn router(static_dir: Option<PathBuf>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let mut app = Router::new()
        .route("/api/simulate", post(simulate_handler))
        .route("/api/sweep", get(sweep_handler))
        .route("/api/dag", get(dag_handler))
        .route("/api/healthz", get(health))
        .route("/healthz", get(health));
    if let Some(dir) = static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(cors)
}

pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_defaults_and_field_errors() {
        assert_eq!(SimulateRequest::from_json(b"{}").unwrap(), SimulateRequest::default());
        let e = SimulateRequest::from_json(br#"{"n": 10}"#).unwrap_err();
        assert_eq!(e, [FieldError::new("n", "n below minimum (100)")]);
        let e = SimulateRequest::from_json(br#"{"n": 200000, "beta1": "x", "zzz": 1}"#).unwrap_err();
        let fields: Vec<&str> = e.iter().map(|f| f.field.as_str()).collect();
        assert_eq!(fields, ["beta1", "n", "zzz"]);
        assert!(SimulateRequest::from_json(b"[1]").is_err());
        assert!(SimulateRequest::from_json(b"{").is_err());
    }

    #[test]
    fn subsample_is_seeded_and_sorted() {
        let a = subsample(1000, 100, 5);
        assert_eq!(a, subsample(1000, 100, 5));
        assert_ne!(a, subsample(1000, 100, 6));
        assert_eq!(a.len(), 100);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsample(50, 100, 1), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn sweep_query_validation() {
        let p = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let q = SweepQuery::parse(&p(&[("beta1", "1"), ("alphas", "0.5:5:0.5")])).unwrap();
        assert_eq!((q.alphas.len(), q.n, q.seed), (10, 1000, 777));
        assert!(SweepQuery::parse(&p(&[("beta1", "1:20"), ("alphas", "0.5:5:0.5"), ("n", "100")])).is_ok());
        let big = SweepQuery::parse(&p(&[("beta1", "1:21"), ("alphas", "0.5:5:0.5")])).unwrap_err();
        assert!(big[0].message.contains("at most 200"));
        assert!(SweepQuery::parse(&p(&[("beta1", "1")])).is_err());
        assert!(SweepQuery::parse(&p(&[("beta1", "1"), ("alphas", "1"), ("x", "1")])).is_err());
    }
}
