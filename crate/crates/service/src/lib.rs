//! Stateless HTTP JSON API over the scaling engine.
//!
//! Every successful response is `{"schema_version": "1", "result": …}` and
//! every error `{"schema_version": "1", "error": {"code", "message"}}` with a
//! code from [`ErrorCode`]. Handlers share nothing but immutable data, so
//! responses depend only on the request body.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::DefaultBodyLimit;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{Any, CorsLayer};

use scaling_horizon::accounting::{reference_gpu_hours, ModelAccount};
use scaling_horizon::scenario::{attach_paper_values, PaperReported, MAX_SCENARIOS};
use scaling_horizon::solve::first_order_sensitivity;
use scaling_horizon::{
    compare, presets, relative_efficiency, sensitivity_slope, time_to_target,
    time_to_target_perturbed, Perturbation, ScalingConfig, Scenario, ScenarioResult, SolveResult,
    TrajectorySeries, ValueSource,
};

mod error;

pub use error::{ApiError, ErrorCode};

pub const SCHEMA_VERSION: &str = "1";
pub const MAX_BODY_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy)]
pub struct ServiceOptions {
    /// Allow cross-origin requests from any origin.
    pub cors_allow_any: bool,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            cors_allow_any: true,
        }
    }
}

fn ok<T: Serialize>(result: T) -> Response {
    Json(json!({ "schema_version": SCHEMA_VERSION, "result": result })).into_response()
}

fn parse<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = body.map_err(|rejection| {
        let status = rejection.status();
        ApiError::new(status, ErrorCode::MalformedBody, rejection.body_text())
    })?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::malformed(e.to_string()))
}

fn respond<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(value) => ok(value),
        Err(err) => err.into_response(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub kappa: f64,
    pub gamma: f64,
    #[serde(default)]
    pub l0: Option<f64>,
    pub t: Vec<f64>,
}

fn evaluate(req: EvaluateRequest) -> Result<TrajectorySeries, ApiError> {
    let mut config = ScalingConfig::new(req.kappa, req.gamma)?;
    if let Some(l0) = req.l0 {
        config = config.with_l0(l0)?;
    }
    Ok(TrajectorySeries::at_times(&config, &req.t)?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub kappa: f64,
    pub gamma: f64,
    pub target: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub sensitivity: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveResponse {
    #[serde(flatten)]
    pub solve: SolveResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_slope: Option<f64>,
    /// The `1/(γ ln 2)` approximation, shown next to the exact slope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_slope: Option<f64>,
}

fn solve(req: SolveRequest) -> Result<SolveResponse, ApiError> {
    let config = ScalingConfig::new(req.kappa, req.gamma)?;
    let solve = match req.tau {
        Some(tau) => time_to_target_perturbed(&config, req.target, Perturbation::new(tau)?)?,
        None => time_to_target(&config, req.target)?,
    };
    let (sensitivity_slope, first_order_slope) = if req.sensitivity {
        (
            Some(sensitivity_slope(&config, req.target)?),
            Some(first_order_sensitivity(req.gamma)?),
        )
    } else {
        (None, None)
    };
    Ok(SolveResponse {
        solve,
        sensitivity_slope,
        first_order_slope,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRequest {
    pub scenarios: Vec<Scenario>,
    pub target: f64,
    #[serde(default)]
    pub paper_values: bool,
}

fn compare_scenarios(req: CompareRequest) -> Result<Vec<ScenarioResult>, ApiError> {
    if req.scenarios.is_empty() {
        return Err(ApiError::malformed("scenario list must not be empty"));
    }
    if req.scenarios.len() > MAX_SCENARIOS {
        return Err(ApiError::invalid(format!(
            "at most {MAX_SCENARIOS} scenarios per request, got {}",
            req.scenarios.len()
        )));
    }
    let mut scenarios = req.scenarios;
    let source = if req.paper_values {
        scenarios.iter_mut().for_each(attach_paper_values);
        ValueSource::PaperReported
    } else {
        ValueSource::Formula
    };
    Ok(compare(&scenarios, req.target, source)?)
}

/// A preset as listed by `GET /v1/scenarios/presets`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PresetView {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub slug: String,
    pub paper_reported: Option<PaperReported>,
}

fn preset_views() -> Vec<PresetView> {
    presets()
        .into_iter()
        .map(|s| PresetView {
            slug: s.slug(),
            paper_reported: s.paper_reported.clone(),
            scenario: s,
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyRequest {
    pub subject: ModelAccount,
    pub baseline: ModelAccount,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AccountSummary {
    pub name: String,
    pub logical_compute: f64,
    pub reference_gpu_hours: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EfficiencyResponse {
    pub relative_efficiency: f64,
    pub subject: AccountSummary,
    pub baseline: AccountSummary,
}

fn summarize(a: &ModelAccount) -> Result<AccountSummary, ApiError> {
    Ok(AccountSummary {
        name: a.name.clone(),
        logical_compute: a.logical_compute()?,
        reference_gpu_hours: reference_gpu_hours(a)?,
    })
}

fn efficiency(req: EfficiencyRequest) -> Result<EfficiencyResponse, ApiError> {
    Ok(EfficiencyResponse {
        relative_efficiency: relative_efficiency(&req.subject, &req.baseline)?,
        subject: summarize(&req.subject)?,
        baseline: summarize(&req.baseline)?,
    })
}

fn handler<Req, Res>(
    f: fn(Req) -> Result<Res, ApiError>,
) -> impl Fn(Result<Bytes, BytesRejection>) -> std::future::Ready<Response> + Clone
where
    Req: DeserializeOwned,
    Res: Serialize,
{
    move |body| std::future::ready(respond(parse(body).and_then(f)))
}

/// Builds the `/v1` router.
pub fn router(options: ServiceOptions) -> Router {
    let app = Router::new()
        .route(
            "/v1/health",
            get(|| async { Json(json!({ "status": "ok" })) }),
        )
        .route("/v1/evaluate", post(handler(evaluate)))
        .route("/v1/solve", post(handler(solve)))
        .route("/v1/scenarios/compare", post(handler(compare_scenarios)))
        .route(
            "/v1/scenarios/presets",
            get(|| async { ok(preset_views()) }),
        )
        .route(
            "/v1/accounting/relative-efficiency",
            post(handler(efficiency)),
        )
        .fallback(|| async {
            ApiError::new(
                StatusCode::NOT_FOUND,
                ErrorCode::InvalidArgument,
                "no such endpoint",
            )
        })
        .method_not_allowed_fallback(|| async {
            ApiError::new(
                StatusCode::METHOD_NOT_ALLOWED,
                ErrorCode::InvalidArgument,
                "method not allowed",
            )
        })
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES));
    if options.cors_allow_any {
        app.layer(
            CorsLayer::new()
                .allow_origin(Any)
                .allow_methods(Any)
                .allow_headers(Any),
        )
    } else {
        app
    }
}

/// Serves the API on `addr` until ctrl-c.
pub async fn serve(addr: SocketAddr, options: ServiceOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(options))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
