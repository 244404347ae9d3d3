//! Read-only HTTP API over loaded map documents.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, RawQuery, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use metalmap::atlas::{MapDocument, MapItem};
use serde::Serialize;
use serde_json::json;

use crate::pipeline::{self, THUMBS_DIR};

const JSON: &str = "application/json";
const PNG: &str = "image/png";
const HTML: &str = "text/html; charset=utf-8";

struct LoadedMap {
    doc: MapDocument,
    json: Bytes,
    background: Option<Bytes>,
}

/// Everything the service answers from, fixed at startup.
pub struct AppState {
    maps: BTreeMap<String, LoadedMap>,
    listing: Bytes,
    items: HashMap<String, Bytes>,
    thumbs: HashMap<String, Bytes>,
    ui_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct MapSummary<'a> {
    name: &'a str,
    items: usize,
    feature_kind: String,
    metric: String,
    grid_level: u32,
    background: bool,
}

#[derive(Serialize)]
struct Placement {
    x: f64,
    y: f64,
    gx: u32,
    gy: u32,
}

#[derive(Serialize)]
struct ItemDetail<'a> {
    id: &'a str,
    name: &'a str,
    genres: &'a [String],
    themes: &'a [String],
    status: metalmap::Status,
    label: Option<&'a str>,
    thumb: &'a str,
    maps: BTreeMap<&'a str, Placement>,
}

#[derive(Serialize)]
struct ItemList<'a> {
    map: &'a str,
    count: usize,
    items: Vec<&'a MapItem>,
}

impl AppState {
    /// `docs` pairs each document with the bytes it was loaded from; those
    /// bytes are served unchanged.
    pub fn new(docs: Vec<(MapDocument, Vec<u8>)>, thumbs: HashMap<String, Bytes>, ui_dir: Option<PathBuf>) -> Result<Self> {
        if docs.is_empty() {
            bail!("the service needs at least one map document");
        }
        let mut maps = BTreeMap::new();
        for (doc, bytes) in docs {
            let background = doc.background.as_ref().map(|b| b.to_png()).transpose()?.map(Bytes::from);
            let name = doc.name.clone();
            let entry = LoadedMap {
                doc,
                json: Bytes::from(bytes),
                background,
            };
            if maps.insert(name.clone(), entry).is_some() {
                bail!("two map documents are named `{name}`");
            }
        }

        let summaries: Vec<MapSummary> = maps
            .values()
            .map(|m| MapSummary {
                name: &m.doc.name,
                items: m.doc.items.len(),
                feature_kind: m.doc.provenance.feature_kind.to_string(),
                metric: m.doc.provenance.metric.as_str().to_string(),
                grid_level: m.doc.provenance.grid_level,
                background: m.background.is_some(),
            })
            .collect();
        let listing = Bytes::from(serde_json::to_vec(&json!({ "maps": summaries }))?);

        let mut details: BTreeMap<&str, ItemDetail> = BTreeMap::new();
        for m in maps.values() {
            for it in &m.doc.items {
                let entry = details.entry(&it.id).or_insert_with(|| ItemDetail {
                    id: &it.id,
                    name: &it.name,
                    genres: &it.genres,
                    themes: &it.themes,
                    status: it.status,
                    label: it.label.as_deref(),
                    thumb: &it.thumb,
                    maps: BTreeMap::new(),
                });
                entry.maps.insert(
                    &m.doc.name,
                    Placement {
                        x: it.x,
                        y: it.y,
                        gx: it.gx,
                        gy: it.gy,
                    },
                );
            }
        }
        let items = details
            .into_iter()
            .map(|(id, d)| Ok((id.to_string(), Bytes::from(serde_json::to_vec(&d)?))))
            .collect::<Result<HashMap<_, _>>>()?;

        Ok(AppState {
            listing,
            items,
            maps,
            thumbs,
            ui_dir,
        })
    }

    /// Loads `out/maps/*.json` and `out/thumbs/*.png`.
    pub fn from_out_dir(out: &Path, ui_dir: Option<PathBuf>) -> Result<Self> {
        let docs = pipeline::load_documents(out)?;
        let thumbs = load_thumbs(&out.join(THUMBS_DIR))?;
        Self::new(docs, thumbs, ui_dir)
    }

    pub fn map_names(&self) -> impl Iterator<Item = &str> {
        self.maps.keys().map(String::as_str)
    }
}

pub fn load_thumbs(dir: &Path) -> Result<HashMap<String, Bytes>> {
    let mut thumbs = HashMap::new();
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(thumbs);
    };
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "png") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
                thumbs.insert(stem.to_string(), Bytes::from(bytes));
            }
        }
    }
    Ok(thumbs)
}

fn body(content_type: &'static str, bytes: Bytes) -> Response {
    ([(header::CONTENT_TYPE, content_type)], bytes).into_response()
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    let bytes = serde_json::to_vec(&json!({ "error": message.into() })).expect("error body serializes");
    (status, [(header::CONTENT_TYPE, JSON)], bytes).into_response()
}

fn not_found(what: &str, name: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("unknown {what} `{name}`"))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/maps", get(list_maps))
        .route("/api/maps/{name}", get(get_map))
        .route("/api/maps/{name}/items", get(filter_items))
        .route("/api/maps/{name}/background", get(get_background))
        .route("/api/items/{id}", get(get_item))
        .route("/thumbs/{id}", get(get_thumb))
        .fallback(static_ui)
        .with_state(state)
}

async fn list_maps(State(s): State<Arc<AppState>>) -> Response {
    body(JSON, s.listing.clone())
}

async fn get_map(State(s): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> Response {
    match s.maps.get(&name) {
        Some(m) => body(JSON, m.json.clone()),
        None => not_found("map", &name),
    }
}

/// Query for the items endpoint: any number of `genre` tags (all must
/// match) and at most one `q` name substring.
#[derive(Debug, Default, PartialEq)]
pub struct ItemQuery {
    pub genres: Vec<String>,
    pub q: Option<String>,
}

impl ItemQuery {
    pub fn parse(raw: Option<&str>) -> Result<ItemQuery, String> {
        let mut query = ItemQuery::default();
        for (key, value) in form_urlencoded::parse(raw.unwrap_or("").as_bytes()) {
            match key.as_ref() {
                "genre" => {
                    let tag = value.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                    if tag.is_empty() {
                        return Err("empty genre filter".into());
                    }
                    query.genres.push(tag);
                }
                "q" => {
                    if query.q.is_some() {
                        return Err("`q` given more than once".into());
                    }
                    query.q = Some(value.into_owned());
                }
                other => return Err(format!("unknown query parameter `{other}`")),
            }
        }
        Ok(query)
    }
}

async fn filter_items(State(s): State<Arc<AppState>>, UrlPath(name): UrlPath<String>, RawQuery(raw): RawQuery) -> Response {
    let Some(m) = s.maps.get(&name) else {
        return not_found("map", &name);
    };
    let query = match ItemQuery::parse(raw.as_deref()) {
        Ok(q) => q,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    let items = m.doc.filter(&query.genres, query.q.as_deref());
    let list = ItemList {
        map: &m.doc.name,
        count: items.len(),
        items,
    };
    match serde_json::to_vec(&list) {
        Ok(bytes) => body(JSON, Bytes::from(bytes)),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_background(State(s): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> Response {
    match s.maps.get(&name) {
        Some(LoadedMap {
            background: Some(png), ..
        }) => body(PNG, png.clone()),
        Some(_) => error(StatusCode::NOT_FOUND, format!("map `{name}` has no background")),
        None => not_found("map", &name),
    }
}

async fn get_item(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    match s.items.get(&id) {
        Some(bytes) => body(JSON, bytes.clone()),
        None => not_found("item", &id),
    }
}

async fn get_thumb(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    let hit = s
        .thumbs
        .get(&id)
        .or_else(|| id.strip_suffix(".png").and_then(|stem| s.thumbs.get(stem)));
    match hit {
        Some(bytes) => body(PNG, bytes.clone()),
        None => not_found("thumbnail", &id),
    }
}

fn placeholder(state: &AppState) -> String {
    let links: String = state
        .map_names()
        .map(|n| format!("<li><a href=\"/api/maps/{n}\">{n}</a></li>"))
        .collect();
    format!(
        "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>metalmap</title></head>\
<body><h1>metalmap</h1><p>No UI bundle configured. Maps:</p><ul>{links}</ul></body></html>\n"
    )
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => HTML,
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => JSON,
        Some("png") => PNG,
        Some("svg") => "image/svg+xml",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

async fn static_ui(State(s): State<Arc<AppState>>, uri: Uri) -> Response {
    let rel = uri.path().trim_start_matches('/');
    if rel.starts_with("api/") || rel.starts_with("thumbs/") {
        return error(StatusCode::NOT_FOUND, format!("no route for `{}`", uri.path()));
    }
    let Some(root) = &s.ui_dir else {
        return if rel.is_empty() || rel == "index.html" {
            body(HTML, Bytes::from(placeholder(&s)))
        } else {
            error(StatusCode::NOT_FOUND, format!("no route for `{}`", uri.path()))
        };
    };
    let rel = Path::new(if rel.is_empty() { "index.html" } else { rel });
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return error(StatusCode::NOT_FOUND, "invalid path");
    }
    let path = root.join(rel);
    match fs::read(&path) {
        Ok(bytes) => body(content_type(&path), Bytes::from(bytes)),
        Err(_) => error(StatusCode::NOT_FOUND, format!("no route for `{}`", uri.path())),
    }
}

pub async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> Result<()> {
    axum::serve(listener, router(state)).await.context("server stopped")
}
