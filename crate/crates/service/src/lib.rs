//! HTTP+JSON session over a loaded project: suggestions, previews, apply.

use std::collections::{BTreeSet, HashMap};
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::{Arc, RwLock};

use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use plref_core::analysis::{all_suggestions, Suggestion};
use plref_core::edit::{apply_and_reload, unified_diff, EditError, EditSet, Fs, RealFs, SemanticsFlag};
use plref_core::model::Program;
use plref_core::transform::{from_suggestion, run, TransformError, TransformRequest};

pub const DEFAULT_PORT: u16 = 7171;
pub const VERSION_HEADER: &str = "x-plref-version";

struct Preview {
    version: u64,
    suggestion_id: Option<String>,
    edits: EditSet,
}

struct Session {
    program: Arc<Program>,
    previews: HashMap<String, Preview>,
    rejected: BTreeSet<String>,
    next_preview: u64,
}

/// Shared server state. Reads take the snapshot; applies are serialized by
/// `writer` and swap the snapshot when the reload succeeds.
pub struct AppState {
    session: RwLock<Session>,
    writer: tokio::sync::Mutex<()>,
    fs: Arc<dyn Fs + Send + Sync>,
}

impl AppState {
    pub fn new(program: Program) -> Arc<AppState> {
        Self::with_fs(program, Arc::new(RealFs))
    }

    pub fn with_fs(program: Program, fs: Arc<dyn Fs + Send + Sync>) -> Arc<AppState> {
        Arc::new(AppState {
            session: RwLock::new(Session {
                program: Arc::new(program),
                previews: HashMap::new(),
                rejected: BTreeSet::new(),
                next_preview: 1,
            }),
            writer: tokio::sync::Mutex::new(()),
            fs,
        })
    }

    pub fn version(&self) -> u64 {
        self.session.read().unwrap().program.version
    }

    fn snapshot(&self) -> Arc<Program> {
        self.session.read().unwrap().program.clone()
    }
}

struct ApiError {
    status: StatusCode,
    name: String,
    message: String,
    version: u64,
}

impl ApiError {
    fn new(status: StatusCode, name: &str, message: impl Into<String>, version: u64) -> Self {
        ApiError {
            status,
            name: name.to_string(),
            message: message.into(),
            version,
        }
    }

    fn bad(message: impl Into<String>, version: u64) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadParams", message, version)
    }

    fn transform(e: TransformError, version: u64) -> Self {
        let status = if e.is_bad_params() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Self::new(status, e.name(), e.to_string(), version)
    }

    fn stale(message: impl Into<String>, version: u64) -> Self {
        Self::new(StatusCode::CONFLICT, "Stale", message, version)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": self.name, "message": self.message, "version": self.version});
        with_version((self.status, Json(body)).into_response(), self.version)
    }
}

fn with_version(mut r: Response, version: u64) -> Response {
    r.headers_mut().insert(VERSION_HEADER, HeaderValue::from(version));
    r
}

fn ok(body: Value, version: u64) -> Response {
    with_version(Json(body).into_response(), version)
}

type ApiResult = Result<Response, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/project", get(project))
        .route("/api/suggestions", get(suggestions))
        .route("/api/preview", post(preview))
        .route("/api/apply", post(apply))
        .route("/api/reject", post(reject))
        .route("/api/source", get(source))
        .with_state(state)
}

/// Serves on loopback until the process is stopped.
pub async fn serve(program: Program, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(program))).await
}

async fn project(State(st): State<Arc<AppState>>) -> ApiResult {
    let p = st.snapshot();
    let modules: Vec<Value> = p
        .modules
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "file": p.files[m.file].path,
                "files": m.files.iter().map(|f| p.files[*f].path.clone()).collect::<Vec<_>>(),
                "exports": m.exports.iter().map(|e| format!("{}/{}", e.name, e.arity)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let preds: Vec<String> = p.preds.keys().map(|k| k.to_string()).collect();
    let roots: Vec<String> = p.roots.iter().map(|k| k.to_string()).collect();
    let files: Vec<&str> = p.files.iter().map(|f| f.path.as_str()).collect();
    Ok(ok(
        json!({"version": p.version, "files": files, "modules": modules, "predicates": preds, "roots": roots}),
        p.version,
    ))
}

fn visible_suggestions(st: &AppState, p: &Program) -> Vec<Suggestion> {
    let rejected = st.session.read().unwrap().rejected.clone();
    all_suggestions(p).into_iter().filter(|s| !rejected.contains(&s.id)).collect()
}

async fn suggestions(State(st): State<Arc<AppState>>) -> ApiResult {
    let p = st.snapshot();
    let list = visible_suggestions(&st, &p);
    Ok(ok(json!({"version": p.version, "suggestions": list}), p.version))
}

async fn preview(State(st): State<Arc<AppState>>, body: Option<Json<Value>>) -> ApiResult {
    let p = st.snapshot();
    let v = p.version;
    let Some(Json(body)) = body else {
        return Err(ApiError::bad("expected a JSON body", v));
    };
    let (req, sid) = match body.get("suggestion_id") {
        Some(id) => {
            let id = id.as_str().ok_or_else(|| ApiError::bad("suggestion_id must be a string", v))?;
            let s = all_suggestions(&p)
                .into_iter()
                .find(|s| s.id == id)
                .ok_or_else(|| ApiError::stale(format!("no suggestion {id} at version {v}"), v))?;
            let req = from_suggestion(&s).ok_or_else(|| {
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "NotApplicable",
                    format!("{} suggestions need parameters; send a transform request", s.kind),
                    v,
                )
            })?;
            (req, Some(id.to_string()))
        }
        None => {
            let req: TransformRequest =
                serde_json::from_value(body).map_err(|e| ApiError::bad(e.to_string(), v))?;
            (req, None)
        }
    };
    let edits = run(&p, &req).map_err(|e| ApiError::transform(e, v))?;
    let diff = unified_diff(&edits, &p).map_err(|e| ApiError::stale(e.to_string(), v))?;
    let mut s = st.session.write().unwrap();
    if s.program.version != v {
        return Err(ApiError::stale("the project changed while previewing", s.program.version));
    }
    let id = format!("pv{}", s.next_preview);
    s.next_preview += 1;
    let body = json!({
        "version": v,
        "preview_id": id,
        "transform": req.name(),
        "diff": diff,
        "semantics_flag": edits.semantics,
        "annotations": edits.annotations,
        "edits": edits.edits,
        "file_ops": edits.file_ops,
    });
    s.previews.insert(
        id,
        Preview {
            version: v,
            suggestion_id: sid,
            edits,
        },
    );
    Ok(ok(body, v))
}

#[derive(Deserialize)]
struct ApplyBody {
    preview_id: String,
    #[serde(default)]
    accept_semantics_change: bool,
}

async fn apply(State(st): State<Arc<AppState>>, body: Option<Json<Value>>) -> ApiResult {
    let _w = st.writer.lock().await;
    let (program, version) = {
        let s = st.session.read().unwrap();
        (s.program.clone(), s.program.version)
    };
    let Some(Json(body)) = body else {
        return Err(ApiError::bad("expected a JSON body", version));
    };
    let body: ApplyBody = serde_json::from_value(body).map_err(|e| ApiError::bad(e.to_string(), version))?;
    let edits = {
        let s = st.session.read().unwrap();
        let pv = s
            .previews
            .get(&body.preview_id)
            .ok_or_else(|| ApiError::bad(format!("unknown preview {}", body.preview_id), version))?;
        if pv.version != version {
            return Err(ApiError::stale(
                format!("preview was computed at version {} but the project is at {version}", pv.version),
                version,
            ));
        }
        pv.edits.clone()
    };
    if edits.semantics != SemanticsFlag::Preserving && !body.accept_semantics_change {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "SemanticsChangeNotAccepted",
            format!("the change is {}; resend with accept_semantics_change", edits.semantics.as_str()),
            version,
        ));
    }
    let fs = st.fs.clone();
    let res = tokio::task::spawn_blocking(move || apply_and_reload(&edits, &program, fs.as_ref()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string(), version))?;
    let (report, fresh) = match res {
        Ok(r) => r,
        Err(e) if e.is_stale() => return Err(ApiError::stale(e.to_string(), version)),
        Err(e @ EditError::Conflicts(_)) => {
            return Err(ApiError::new(StatusCode::CONFLICT, "Conflict", e.to_string(), version))
        }
        Err(e) => return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string(), version)),
    };
    let nv = fresh.version;
    let mut s = st.session.write().unwrap();
    s.program = Arc::new(fresh);
    Ok(ok(
        json!({"version": nv, "new_version": nv, "files_written": report.files_written, "files_deleted": report.files_deleted}),
        nv,
    ))
}

async fn reject(State(st): State<Arc<AppState>>, body: Option<Json<Value>>) -> ApiResult {
    let v = st.version();
    let id = body
        .as_ref()
        .and_then(|Json(b)| b.get("suggestion_id"))
        .and_then(Value::as_str)
        .ok_or_else(|| ApiError::bad("expected {\"suggestion_id\": ...}", v))?
        .to_string();
    let mut s = st.session.write().unwrap();
    s.rejected.insert(id.clone());
    s.previews.retain(|_, p| p.suggestion_id.as_deref() != Some(id.as_str()));
    Ok(ok(json!({"version": v, "rejected": id}), v))
}

#[derive(Deserialize)]
struct SourceQuery {
    file: Option<String>,
}

async fn source(State(st): State<Arc<AppState>>, Query(q): Query<SourceQuery>) -> ApiResult {
    let p = st.snapshot();
    let v = p.version;
    let file = q.file.ok_or_else(|| ApiError::bad("missing file parameter", v))?;
    let fid = p
        .file_index(&file)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownFile", format!("{file} is not in the project"), v))?;
    Ok(ok(json!({"version": v, "file": file, "text": p.file_text(fid)}), v))
}
