//! HTTP service behind the segment review UI.
//!
//! Endpoints (all responses are JSON unless noted):
//!
//! - `GET /api/segments?filter=&page=&page_size=`: segment summaries sorted
//!   by id. `filter` is a tag name (`High`, `Low`, `Fixable`, `Untagged`);
//!   pages are 1-based and a page past the end is empty.
//! - `GET /api/segments/{id}/audio`: the segment WAV (`audio/wav`).
//! - `GET /api/segments/{id}/peaks?buckets=`: min/max sample pairs for
//!   waveform drawing.
//! - `POST /api/segments/{id}/tag` with `{"tag": "High", "note": "..."}`.
//! - `GET /api/stats`: counts per tag.
//!
//! Static frontend files are served at `/` when a directory is configured.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tower_http::services::ServeDir;
use versekit::audio::{load_wav, waveform_peaks, DEFAULT_PEAK_BUCKETS};
use versekit::corpus::{read_manifest, CorpusError, QualityTag, SegmentRecord};
use versekit::tags::{parse_assignable, TagError, TagStore};

pub const DEFAULT_PORT: u16 = 8517;
pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Tags(#[from] TagError),
    #[error("segment id {0:?} appears more than once in the manifest")]
    DuplicateId(String),
}

#[derive(Debug, Clone)]
pub struct ReviewOptions {
    pub peak_buckets: usize,
    /// Built frontend assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ReviewOptions {
    fn default() -> Self {
        Self {
            peak_buckets: DEFAULT_PEAK_BUCKETS,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Peaks {
    id: String,
    sample_rate: u32,
    samples: usize,
    peaks: Vec<(f32, f32)>,
}

pub struct ReviewState {
    records: Vec<SegmentRecord>,
    index: HashMap<String, usize>,
    audio_root: PathBuf,
    tags: Mutex<TagStore>,
    peaks: Mutex<HashMap<(String, usize), Arc<Peaks>>>,
    options: ReviewOptions,
}

impl ReviewState {
    /// Relative `audio_filepath`s are resolved against `audio_root`.
    pub fn new(
        mut records: Vec<SegmentRecord>,
        audio_root: impl Into<PathBuf>,
        tags: TagStore,
        options: ReviewOptions,
    ) -> Result<Self, ReviewError> {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(ReviewError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self {
            records,
            index,
            audio_root: audio_root.into(),
            tags: Mutex::new(tags),
            peaks: Mutex::new(HashMap::new()),
            options,
        })
    }

    /// Reads the manifest and replays the tag log (created if missing).
    pub fn load(
        manifest: impl AsRef<Path>,
        tag_log: impl AsRef<Path>,
        options: ReviewOptions,
    ) -> Result<Self, ReviewError> {
        let manifest = manifest.as_ref();
        let records = read_manifest(manifest)?;
        let root = manifest.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::new(records, root, TagStore::open(tag_log)?, options)
    }

    fn tags(&self) -> MutexGuard<'_, TagStore> {
        // a panic mid-write leaves the map consistent with the log
        self.tags.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Manifest records with the current tags applied, sorted by id.
    pub fn tagged_records(&self) -> Vec<SegmentRecord> {
        let mut records = self.records.clone();
        self.tags().apply(&mut records);
        records
    }

    fn audio_path(&self, record: &SegmentRecord) -> PathBuf {
        let p = Path::new(&record.audio_filepath);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.audio_root.join(p)
        }
    }

    fn record(&self, id: &str) -> Result<&SegmentRecord, ApiError> {
        self.index
            .get(id)
            .map(|&i| &self.records[i])
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no segment with id {id:?}")))
    }
}

struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn allowed_tags() -> Vec<&'static str> {
    QualityTag::ASSIGNABLE.iter().map(QualityTag::as_str).collect()
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    filter: Option<String>,
    page: Option<usize>,
    page_size: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    id: &'a str,
    audio_start_sec: f64,
    duration: f64,
    text: &'a str,
    normalized_text: &'a str,
    word_count: usize,
    char_count: usize,
    word_rate: f64,
    char_rate: f64,
    tag: QualityTag,
    note: String,
}

async fn list_segments(
    State(state): State<Arc<ReviewState>>,
    Query(q): Query<ListQuery>,
) -> Result<Response, ApiError> {
    let filter = match q.filter.as_deref() {
        None | Some("") | Some("all") => None,
        Some(f) => Some(f.parse::<QualityTag>().map_err(|_| ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({
                "error": format!("unknown filter {f:?}"),
                "allowed": ["High", "Low", "Fixable", "Untagged", "all"],
            }),
        })?),
    };
    let page = q.page.unwrap_or(1);
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page == 0 || page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("page must be >= 1 and page_size in 1..={MAX_PAGE_SIZE}"),
        ));
    }
    let tags = state.tags();
    let matching: Vec<&SegmentRecord> = state
        .records
        .iter()
        .filter(|r| filter.is_none_or(|f| tags.tag_of(&r.id) == f))
        .collect();
    let total = matching.len();
    let segments: Vec<Summary> = matching
        .into_iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .map(|r| {
            let entry = tags.get(&r.id);
            Summary {
                id: &r.id,
                audio_start_sec: r.audio_start_sec,
                duration: r.duration,
                text: &r.text,
                normalized_text: &r.normalized_text,
                word_count: r.word_count,
                char_count: r.char_count,
                word_rate: r.word_rate,
                char_rate: r.char_rate,
                tag: entry.map_or(QualityTag::Untagged, |e| e.tag),
                note: entry.map(|e| e.note.clone()).unwrap_or_default(),
            }
        })
        .collect();
    Ok(Json(json!({
        "total": total,
        "page": page,
        "page_size": page_size,
        "pages": total.div_ceil(page_size),
        "segments": segments,
    }))
    .into_response())
}

fn missing_file(path: &Path, err: std::io::Error) -> ApiError {
    if err.kind() == std::io::ErrorKind::NotFound {
        ApiError {
            status: StatusCode::GONE,
            body: json!({
                "error": "segment audio file is missing",
                "path": path.display().to_string(),
            }),
        }
    } else {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{}: {err}", path.display()))
    }
}

async fn get_audio(
    State(state): State<Arc<ReviewState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let path = state.audio_path(state.record(&id)?);
    let bytes = tokio::fs::read(&path).await.map_err(|e| missing_file(&path, e))?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

#[derive(Debug, Deserialize)]
struct PeaksQuery {
    buckets: Option<usize>,
}

async fn get_peaks(
    State(state): State<Arc<ReviewState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<PeaksQuery>,
) -> Result<Response, ApiError> {
    let record = state.record(&id)?;
    let buckets = q.buckets.unwrap_or(state.options.peak_buckets);
    if buckets == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "buckets must be at least 1"));
    }
    let key = (id.clone(), buckets);
    if let Some(p) = state.peaks.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(Json(p.as_ref().clone()).into_response());
    }
    let path = state.audio_path(record);
    let state2 = Arc::clone(&state);
    let peaks = tokio::task::spawn_blocking(move || {
        let buf = load_wav(&path).map_err(|e| match e {
            versekit::audio::AudioError::Io(io) => missing_file(&path, io),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("{}: {other}", path.display())),
        })?;
        Ok::<_, ApiError>(Peaks {
            id,
            sample_rate: buf.sample_rate(),
            samples: buf.frames(),
            peaks: waveform_peaks(&buf, buckets),
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let peaks = Arc::new(peaks);
    state2
        .peaks
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, Arc::clone(&peaks));
    Ok(Json(peaks.as_ref().clone()).into_response())
}

#[derive(Debug, Deserialize)]
struct TagRequest {
    tag: String,
    #[serde(default)]
    note: String,
}

async fn set_tag(
    State(state): State<Arc<ReviewState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    state.record(&id)?;
    let req: TagRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")))?;
    let tag = parse_assignable(&req.tag).map_err(|_| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        body: json!({
            "error": format!("invalid tag {:?}", req.tag),
            "allowed": allowed_tags(),
        }),
    })?;
    let entry = tokio::task::spawn_blocking(move || {
        let entry = state.tags().set(&id, tag, &req.note);
        entry.map(|e| (id, e))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let (id, entry) = entry;
    Ok(Json(json!({
        "id": id,
        "tag": entry.tag,
        "note": entry.note,
        "updated_at": entry.updated_at,
    }))
    .into_response())
}

async fn get_stats(State(state): State<Arc<ReviewState>>) -> Json<serde_json::Value> {
    let tags = state.tags();
    let mut counts: HashMap<QualityTag, usize> = HashMap::new();
    for r in &state.records {
        *counts.entry(tags.tag_of(&r.id)).or_default() += 1;
    }
    let total = state.records.len();
    let untagged = counts.get(&QualityTag::Untagged).copied().unwrap_or(0);
    let count = |t: QualityTag| counts.get(&t).copied().unwrap_or(0);
    Json(json!({
        "total": total,
        "counts": {
            "High": count(QualityTag::High),
            "Low": count(QualityTag::Low),
            "Fixable": count(QualityTag::Fixable),
            "Untagged": untagged,
        },
        "reviewed": total - untagged,
        "progress": if total == 0 { 1.0 } else { (total - untagged) as f64 / total as f64 },
    }))
}

async fn no_frontend() -> Html<&'static str> {
    Html(
        "<!doctype html><title>versekit review</title>\
         <p>No frontend directory configured. The JSON API lives under <code>/api/</code>.</p>",
    )
}

pub fn router(state: Arc<ReviewState>) -> Router {
    let static_dir = state.options.static_dir.clone();
    let api = Router::new()
        .route("/api/segments", get(list_segments))
        .route("/api/segments/{id}/audio", get(get_audio))
        .route("/api/segments/{id}/peaks", get(get_peaks))
        .route("/api/segments/{id}/tag", post(set_tag))
        .route("/api/stats", get(get_stats))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api.route("/", get(no_frontend)),
    }
}

/// Serves until the process is stopped.
pub async fn serve(state: Arc<ReviewState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("review service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
