//! REST routes over a shared [`Gateway`].

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, RawQuery, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use matspace_core::connectors::ConnectorSpec;
use matspace_core::dataspace::KItemPatch;
use matspace_core::form::FormSchema;
use matspace_core::search::SearchQuery;
use matspace_core::workflow::AppSpec;
use matspace_core::{analysis, KType};
use matspace_rdf::Iri;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::error::ApiError;
use crate::ops::{self, Action, IngestRequest, LinkRequest, NewKItem, RunRequest, TermRequest};
use crate::state::Gateway;

type ApiResult<T = Json<Value>> = Result<T, ApiError>;
type Shared = State<Arc<Gateway>>;

const MAX_BODY: usize = 256 * 1024 * 1024;

pub fn router(gw: Arc<Gateway>) -> Router {
    let cors = cors_layer(&gw.config.cors_origins);
    Router::new()
        .route("/health", get(health))
        .route("/ktypes", post(create_ktype).get(list_ktypes))
        .route("/ktypes/{id}", get(get_ktype).delete(delete_ktype))
        .route("/ktypes/{id}/form", get(get_form).post(attach_form))
        .route("/kitems", post(create_kitem).get(list_kitems))
        .route("/kitems/{id}", get(get_kitem).patch(patch_kitem).delete(delete_kitem))
        .route("/kitems/{id}/links", post(link))
        .route("/kitems/{id}/annotations", post(annotate))
        .route("/kitems/{id}/attachments", post(attach))
        .route("/kitems/{id}/attachments/{filename}", get(get_attachment))
        .route("/kitems/{id}/ingest", post(ingest))
        .route("/kitems/{id}/expand", post(expand))
        .route("/kitems/{id}/forms/{schema}/submit", post(submit_form))
        .route("/kitems/{id}/graph", get(kitem_graph))
        .route("/kitems/{id}/linkgraph", get(link_graph))
        .route("/kitems/{id}/level", get(level))
        .route("/kitems/{id}/metadata", get(metadata))
        .route("/kitems/{id}/columns/{name}", get(column))
        .route("/kitems/{id}/trace", get(trace_kitem))
        .route("/kitems/{id}/export", post(export_card))
        .route("/search", get(search))
        .route("/sparql", get(sparql_get).post(sparql_post))
        .route("/vocabulary/terms", post(add_term).get(list_terms))
        .route("/vocabulary/search", get(find_terms))
        .route("/vocabulary/import", post(import_vocabulary))
        .route("/apps", post(register_app).get(list_apps))
        .route("/apps/{id}", get(get_app))
        .route("/apps/{id}/run", post(run_app))
        .route("/runs", get(list_runs))
        .route("/runs/drain", post(drain))
        .route("/runs/{id}", get(get_run))
        .route("/connectors", post(add_connector).get(list_connectors))
        .route("/connectors/{id}/sync", post(sync_connector))
        .route("/trace", get(trace))
        .route("/analysis/hardness", get(hardness))
        .layer(middleware::from_fn_with_state(gw.clone(), require_token))
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .layer(cors)
        .with_state(gw)
}

fn cors_layer(origins: &[String]) -> CorsLayer {
    let base = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        return base.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    base.allow_origin(AllowOrigin::list(list))
}

/// Mutating routes need the bearer token when one is configured. SPARQL
/// POST is a read.
async fn require_token(State(gw): Shared, req: Request, next: Next) -> Response {
    let Some(token) = gw.config.token.as_deref() else {
        return next.run(req).await;
    };
    let read_only = matches!(*req.method(), Method::GET | Method::HEAD | Method::OPTIONS)
        || (req.method() == Method::POST && req.uri().path() == "/sparql");
    if read_only {
        return next.run(req).await;
    }
    let given = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if given == Some(token) {
        next.run(req).await
    } else {
        ApiError::unauthorized().into_response()
    }
}

/// Runs a mutation off the async executor.
async fn mutate(gw: Arc<Gateway>, action: Action) -> ApiResult<Value> {
    tokio::task::spawn_blocking(move || gw.apply(action))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

fn json_of<T: serde::Serialize>(v: T) -> ApiResult {
    Ok(Json(serde_json::to_value(v)?))
}

fn parse_iri(s: &str) -> Result<Iri, ApiError> {
    Iri::new(s).map_err(|e| ApiError::bad_request(e.to_string()))
}

async fn health(State(gw): Shared) -> ApiResult {
    let stats = gw.read().stats();
    Ok(Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION"), "stats": stats })))
}

// ---- k-types ----

async fn create_ktype(State(gw): Shared, Json(k): Json<KType>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::CreateKType(k)).await?)))
}

async fn list_ktypes(State(gw): Shared) -> ApiResult {
    json_of(gw.read().ktypes())
}

async fn get_ktype(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().ktype(&id)?)
}

async fn delete_ktype(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    Ok(Json(mutate(gw, Action::DeleteKType(id)).await?))
}

async fn get_form(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().form(&id)?)
}

async fn attach_form(State(gw): Shared, Path(id): Path<String>, Json(schema): Json<FormSchema>) -> ApiResult<(StatusCode, Json<Value>)> {
    if schema.ktype != id {
        return Err(ApiError::bad_request(format!("schema k-type '{}' does not match '{id}'", schema.ktype)));
    }
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::AttachForm(schema)).await?)))
}

// ---- k-items ----

async fn create_kitem(State(gw): Shared, Json(n): Json<NewKItem>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::CreateKItem(n)).await?)))
}

#[derive(Debug, Deserialize)]
struct ListParams {
    ktype: Option<String>,
}

async fn list_kitems(State(gw): Shared, Query(p): Query<ListParams>) -> ApiResult {
    let ds = gw.read();
    let items: Vec<_> = ds.kitems().into_iter().filter(|k| p.ktype.as_ref().is_none_or(|t| &k.ktype == t)).collect();
    json_of(items)
}

async fn get_kitem(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    Ok(Json(ops::kitem_view(&gw.read(), &id)?))
}

async fn patch_kitem(State(gw): Shared, Path(id): Path<String>, Json(patch): Json<KItemPatch>) -> ApiResult {
    Ok(Json(mutate(gw, Action::PatchKItem(id, patch)).await?))
}

async fn delete_kitem(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    Ok(Json(mutate(gw, Action::DeleteKItem(id)).await?))
}

async fn link(State(gw): Shared, Path(id): Path<String>, Json(l): Json<LinkRequest>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::Link(id, l)).await?)))
}

#[derive(Debug, Deserialize)]
struct AnnotationBody {
    iri: String,
}

async fn annotate(State(gw): Shared, Path(id): Path<String>, Json(b): Json<AnnotationBody>) -> ApiResult {
    let iri = parse_iri(&b.iri)?;
    Ok(Json(mutate(gw, Action::Annotate(id, iri)).await?))
}

#[derive(Debug, Deserialize)]
struct AttachParams {
    filename: String,
    media_type: Option<String>,
}

async fn attach(
    State(gw): Shared,
    Path(id): Path<String>,
    Query(p): Query<AttachParams>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let media_type = p
        .media_type
        .or_else(|| headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).map(str::to_string))
        .unwrap_or_else(|| "application/octet-stream".into());
    let action = Action::Attach { id, filename: p.filename, bytes: body.to_vec(), media_type };
    Ok((StatusCode::CREATED, Json(mutate(gw, action).await?)))
}

async fn get_attachment(State(gw): Shared, Path((id, filename)): Path<(String, String)>) -> ApiResult<Response> {
    let ds = gw.read();
    let media = ds
        .kitem(&id)?
        .attachment(&filename)
        .map(|a| a.media_type.clone())
        .unwrap_or_else(|| "application/octet-stream".into());
    let bytes = ds.attachment_bytes(&id, &filename)?.to_vec();
    Ok(([(header::CONTENT_TYPE, media)], bytes).into_response())
}

async fn ingest(State(gw): Shared, Path(id): Path<String>, Json(mut req): Json<IngestRequest>) -> ApiResult {
    req.config.strict |= gw.config.strict_ingest;
    Ok(Json(mutate(gw, Action::Ingest(id, req)).await?))
}

async fn expand(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    Ok(Json(mutate(gw, Action::ExpandColumns(id)).await?))
}

#[derive(Debug, Deserialize)]
struct SubmitBody {
    values: BTreeMap<String, Value>,
}

async fn submit_form(State(gw): Shared, Path((id, schema)): Path<(String, String)>, Json(b): Json<SubmitBody>) -> ApiResult {
    Ok(Json(mutate(gw, Action::SubmitForm { id, schema, values: b.values }).await?))
}

async fn kitem_graph(State(gw): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let ttl = gw.read().kitem_turtle(&id)?;
    Ok(([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], ttl).into_response())
}

#[derive(Debug, Deserialize)]
struct DepthParams {
    depth: Option<usize>,
}

async fn link_graph(State(gw): Shared, Path(id): Path<String>, Query(p): Query<DepthParams>) -> ApiResult {
    json_of(gw.read().link_graph(&id, p.depth.unwrap_or(2))?)
}

async fn level(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    let ds = gw.read();
    Ok(Json(json!({
        "level": ds.integration_level(&id)?,
        "evidence": ds.level_evidence(&id)?,
    })))
}

async fn metadata(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().metadata_rows(&id)?)
}

async fn column(State(gw): Shared, Path((id, name)): Path<(String, String)>) -> ApiResult {
    json_of(gw.read().column(&id, &name)?)
}

async fn trace_kitem(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().trace(&id)?)
}

#[derive(Debug, Deserialize)]
struct ExportParams {
    template: Option<String>,
}

async fn export_card(State(gw): Shared, Path(id): Path<String>, Query(p): Query<ExportParams>) -> ApiResult<(StatusCode, Json<Value>)> {
    let template = ops::parse_template(p.template.as_deref().unwrap_or("hs-analytic"))?;
    Ok((StatusCode::ACCEPTED, Json(mutate(gw, Action::ExportCard(id, template)).await?)))
}

// ---- search and query ----

/// `text`, `limit`, and repeatable `ktype` / `annotation` parameters.
fn search_query(raw: &str) -> Result<SearchQuery, ApiError> {
    let mut q = SearchQuery::default();
    for (k, v) in url::form_urlencoded::parse(raw.as_bytes()) {
        match k.as_ref() {
            "text" | "q" if !v.trim().is_empty() => q.text = Some(v.into_owned()),
            "ktype" => q.ktypes.push(v.into_owned()),
            "annotation" => q.annotations.push(parse_iri(&v)?),
            "limit" => q.limit = Some(v.parse().map_err(|_| ApiError::bad_request(format!("bad limit '{v}'")))?),
            _ => {}
        }
    }
    Ok(q)
}

async fn search(State(gw): Shared, RawQuery(raw): RawQuery) -> ApiResult {
    let q = search_query(raw.as_deref().unwrap_or(""))?;
    json_of(gw.read().search(&q)?)
}

fn sparql_response(gw: &Gateway, query: &str) -> ApiResult<Response> {
    let sol = gw.read().sparql(query)?;
    Ok(([(header::CONTENT_TYPE, "application/sparql-results+json")], Json(sol.to_json())).into_response())
}

#[derive(Debug, Deserialize)]
struct SparqlParams {
    query: String,
}

async fn sparql_get(State(gw): Shared, Query(p): Query<SparqlParams>) -> ApiResult<Response> {
    sparql_response(&gw, &p.query)
}

async fn sparql_post(State(gw): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let ctype = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    let query = if ctype.starts_with("application/x-www-form-urlencoded") {
        url::form_urlencoded::parse(&body)
            .find(|(k, _)| k == "query")
            .map(|(_, v)| v.into_owned())
            .ok_or_else(|| ApiError::bad_request("form body without 'query'"))?
    } else {
        String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("query is not UTF-8"))?
    };
    sparql_response(&gw, &query)
}

// ---- vocabulary ----

async fn add_term(State(gw): Shared, Json(t): Json<TermRequest>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::AddTerm(t)).await?)))
}

async fn list_terms(State(gw): Shared) -> ApiResult {
    let ds = gw.read();
    json_of(ds.registry().terms().collect::<Vec<_>>())
}

#[derive(Debug, Deserialize)]
struct TermSearch {
    #[serde(default)]
    q: String,
    parent: Option<String>,
}

async fn find_terms(State(gw): Shared, Query(p): Query<TermSearch>) -> ApiResult {
    let ds = gw.read();
    match p.parent {
        Some(parent) => json_of(ds.children(&parse_iri(&parent)?)?),
        None => json_of(ds.find_terms(&p.q)),
    }
}

async fn import_vocabulary(State(gw): Shared, body: Bytes) -> ApiResult {
    let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("vocabulary is not UTF-8"))?;
    Ok(Json(mutate(gw, Action::ImportVocabulary(text)).await?))
}

// ---- apps and runs ----

async fn register_app(State(gw): Shared, Json(spec): Json<AppSpec>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::RegisterApp(spec)).await?)))
}

async fn list_apps(State(gw): Shared) -> ApiResult {
    json_of(gw.read().apps())
}

async fn get_app(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().app(&id)?)
}

async fn run_app(State(gw): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: RunRequest = if body.is_empty() { RunRequest { inputs: vec![], settings: BTreeMap::new() } } else { serde_json::from_slice(&body)? };
    Ok((StatusCode::ACCEPTED, Json(mutate(gw, Action::RunApp(id, req)).await?)))
}

async fn list_runs(State(gw): Shared) -> ApiResult {
    json_of(gw.read().runs())
}

async fn get_run(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    json_of(gw.read().run(&id)?)
}

async fn drain(State(gw): Shared) -> ApiResult {
    Ok(Json(mutate(gw, Action::Drain).await?))
}

// ---- connectors ----

async fn add_connector(State(gw): Shared, Json(spec): Json<ConnectorSpec>) -> ApiResult<(StatusCode, Json<Value>)> {
    Ok((StatusCode::CREATED, Json(mutate(gw, Action::AddConnector(spec)).await?)))
}

async fn list_connectors(State(gw): Shared) -> ApiResult {
    json_of(gw.read().connectors())
}

async fn sync_connector(State(gw): Shared, Path(id): Path<String>) -> ApiResult {
    let out = tokio::task::spawn_blocking(move || gw.sync_connector(&id))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(out))
}

// ---- provenance and analysis ----

#[derive(Debug, Deserialize)]
struct TraceParams {
    entity: String,
}

async fn trace(State(gw): Shared, Query(p): Query<TraceParams>) -> ApiResult {
    json_of(gw.read().trace(&p.entity)?)
}

async fn hardness(State(gw): Shared) -> ApiResult {
    json_of(analysis::hardness_by_alloy(&gw.read())?)
}
