//! Map documents: the serialized bundle the map service loads and the UI
//! explores.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{BandRecord, Status};
use crate::embed::{EmbedParams, Layout2D, INIT_METHOD};
use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::gridify::{cell_count, GridAssignment, CURVE, MAX_LEVEL};
use crate::metrics::Metric;
use crate::scalar::Real;

pub const SCHEMA_VERSION: i64 = 1;
pub const BACKGROUND_METHOD: &str = "knn-majority";
pub const DEFAULT_BACKGROUND_RESOLUTION: usize = 64;
pub const DEFAULT_BACKGROUND_K: usize = 10;

/// JSON Schema describing exported map documents.
pub const MAP_DOCUMENT_SCHEMA: &str = include_str!("../schema/map_document.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapItem {
    pub id: String,
    pub name: String,
    pub genres: Vec<String>,
    pub themes: Vec<String>,
    pub status: Status,
    pub label: Option<String>,
    pub x: f64,
    pub y: f64,
    pub gx: u32,
    pub gy: u32,
    /// Thumbnail path relative to the document.
    pub thumb: String,
}

impl MapItem {
    pub fn has_genre(&self, tag: &str) -> bool {
        self.genres.iter().any(|g| g == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub feature_kind: FeatureKind,
    pub metric: Metric,
    pub embed: EmbedParams<f64>,
    pub init: String,
    pub grid_level: u32,
    pub curve: String,
    pub collision_policy: String,
}

impl Provenance {
    pub fn new<T: Real>(
        feature_kind: FeatureKind,
        metric: Metric,
        params: &EmbedParams<T>,
        grid: &GridAssignment,
    ) -> Result<Self> {
        let resolved = params.resolved()?;
        Ok(Provenance {
            feature_kind,
            metric,
            embed: EmbedParams {
                k: resolved.k,
                min_dist: resolved.min_dist.as_f64(),
                spread: resolved.spread.as_f64(),
                n_epochs: resolved.n_epochs,
                negative_samples: resolved.negative_samples,
                initial_lr: resolved.initial_lr.as_f64(),
                seed: resolved.seed,
                a: resolved.a.map(Real::as_f64),
                b: resolved.b.map(Real::as_f64),
            },
            init: INIT_METHOD.to_string(),
            grid_level: grid.level,
            curve: grid.curve.clone(),
            collision_policy: grid.collision_policy.clone(),
        })
    }
}

/// Genre-majority raster drawn under the points. Row 0 is the minimum-y
/// edge of the layout's bounding box; cells are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundRaster {
    pub width: usize,
    pub height: usize,
    pub k: usize,
    pub method: String,
    pub cells: Vec<Option<String>>,
    pub colors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub schema_version: i64,
    pub name: String,
    pub items: Vec<MapItem>,
    pub provenance: Provenance,
    pub background: Option<BackgroundRaster>,
}

impl MapDocument {
    pub fn item(&self, id: &str) -> Option<&MapItem> {
        self.items
            .binary_search_by(|it| it.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.items[i])
    }

    /// Items carrying every tag in `genres` whose name contains `query`
    /// (case-insensitive). Empty filters match everything.
    pub fn filter<'a>(&'a self, genres: &[String], query: Option<&str>) -> Vec<&'a MapItem> {
        let query = query.map(str::to_lowercase).filter(|q| !q.is_empty());
        self.items
            .iter()
            .filter(|it| genres.iter().all(|g| it.has_genre(g)))
            .filter(|it| match &query {
                Some(q) => it.name.to_lowercase().contains(q.as_str()),
                None => true,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDocument(msg));
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if self.name.trim().is_empty() {
            return bad("map name is empty".into());
        }
        let p = &self.provenance;
        if p.grid_level > MAX_LEVEL {
            return bad(format!("grid level {} too large", p.grid_level));
        }
        if p.curve != CURVE {
            return bad(format!("unsupported curve `{}`", p.curve));
        }
        if cell_count(p.grid_level) < self.items.len() as u64 {
            return bad("grid level too small for item count".into());
        }
        match (p.embed.a, p.embed.b) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {}
            _ => return bad("provenance must record positive curve parameters a and b".into()),
        }
        if p.init.is_empty() || p.collision_policy.is_empty() {
            return bad("provenance is incomplete".into());
        }
        let side = 1u64 << p.grid_level;
        let mut cells = HashSet::new();
        for pair in self.items.windows(2) {
            if pair[0].id >= pair[1].id {
                return bad(format!("items not strictly ordered by id at `{}`", pair[1].id));
            }
        }
        for it in &self.items {
            if it.id.is_empty() {
                return bad("item with empty id".into());
            }
            if !(it.x.is_finite() && it.y.is_finite()) {
                return bad(format!("item `{}` has non-finite coordinates", it.id));
            }
            if it.gx as u64 >= side || it.gy as u64 >= side {
                return bad(format!("item `{}` cell out of range", it.id));
            }
            if !cells.insert((it.gx, it.gy)) {
                return bad(format!("duplicate grid cell ({}, {})", it.gx, it.gy));
            }
        }
        if let Some(bg) = &self.background {
            if bg.width == 0 || bg.height == 0 || bg.k == 0 {
                return bad("background dimensions and k must be at least 1".into());
            }
            let n = bg.width * bg.height;
            if bg.cells.len() != n || bg.colors.len() != n {
                return bad("background cell count does not match its dimensions".into());
            }
            for (genre, color) in bg.cells.iter().zip(&bg.colors) {
                if *color != genre_color(genre.as_deref()) {
                    return bad(format!("background color {color} is not the palette color"));
                }
            }
        }
        Ok(())
    }
}

/// Joins records, layout and grid into a document ordered by id.
pub fn assemble_map<T: Real>(
    name: &str,
    records: &[BandRecord],
    layout: &Layout2D<T>,
    grid: &GridAssignment,
    provenance: Provenance,
    background: Option<BackgroundRaster>,
) -> Result<MapDocument> {
    let record_ids: BTreeSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let layout_ids: BTreeSet<&str> = layout.ids.iter().map(String::as_str).collect();
    let grid_ids: BTreeSet<&str> = grid.cells.keys().map(String::as_str).collect();
    if record_ids != layout_ids || record_ids != grid_ids || record_ids.len() != records.len() {
        let union: BTreeSet<&str> = record_ids.union(&layout_ids).chain(&grid_ids).copied().collect();
        let missing: Vec<String> = union
            .into_iter()
            .filter(|id| !(record_ids.contains(id) && layout_ids.contains(id) && grid_ids.contains(id)))
            .map(String::from)
            .collect();
        return Err(Error::IdMismatch(missing));
    }

    let coords: BTreeMap<&str, [T; 2]> = layout
        .ids
        .iter()
        .map(String::as_str)
        .zip(layout.coords.iter().copied())
        .collect();
    let mut sorted: Vec<&BandRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let items = sorted
        .into_iter()
        .map(|r| {
            let [x, y] = coords[r.id.as_str()];
            let (gx, gy) = grid.cells[&r.id];
            MapItem {
                id: r.id.clone(),
                name: r.name.clone(),
                genres: r.genres.iter().cloned().collect(),
                themes: r.themes.iter().cloned().collect(),
                status: r.status,
                label: r.label.clone(),
                x: x.as_f64(),
                y: y.as_f64(),
                gx,
                gy,
                thumb: thumb_path(&r.id),
            }
        })
        .collect();
    let doc = MapDocument {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        items,
        provenance,
        background,
    };
    doc.validate()?;
    Ok(doc)
}

pub fn thumb_path(id: &str) -> String {
    format!("thumbs/{id}.png")
}

// ---------------------------------------------------------------------------
// Background raster
// ---------------------------------------------------------------------------

/// Named genre colors; everything else hashes into [`CATEGORICAL`].
pub const NAMED_COLORS: [(&str, &str); 4] = [
    ("black metal", "#ffffff"),
    ("death metal", "#ff0000"),
    ("thrash metal", "#0000ff"),
    ("heavy metal", "#ffd700"),
];
pub const CATEGORICAL: [&str; 10] = [
    "#8c564b", "#9467bd", "#2ca02c", "#17becf", "#e377c2", "#bcbd22", "#7f7f7f", "#ff7f0e", "#aec7e8",
    "#98df8a",
];
pub const EMPTY_COLOR: &str = "#404040";

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Palette color for a genre tag (`None` is an empty cell).
pub fn genre_color(genre: Option<&str>) -> String {
    let Some(genre) = genre else {
        return EMPTY_COLOR.to_string();
    };
    NAMED_COLORS
        .iter()
        .find(|(g, _)| *g == genre)
        .map(|(_, c)| c.to_string())
        .unwrap_or_else(|| CATEGORICAL[(fnv1a(genre) % CATEGORICAL.len() as u64) as usize].to_string())
}

/// Majority primary genre among the `k` items nearest each cell center.
///
/// Distance ties are broken by item id and vote ties by genre name, so the
/// raster does not depend on item order. Items without a primary genre do
/// not vote; a cell whose neighbors all lack one stays empty.
pub fn genre_background<T: Real>(
    layout: &Layout2D<T>,
    primary: &[Option<String>],
    resolution: usize,
    k: usize,
) -> Result<BackgroundRaster> {
    if layout.is_empty() {
        return Err(Error::invalid("background needs a non-empty layout"));
    }
    if primary.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            actual: primary.len(),
        });
    }
    if resolution == 0 || k == 0 {
        return Err(Error::invalid("background resolution and k must be at least 1"));
    }
    let k = k.min(layout.len());
    let pts: Vec<[f64; 2]> = layout.coords.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let center = |axis: usize, idx: usize| lo[axis] + (idx as f64 + 0.5) * (hi[axis] - lo[axis]) / resolution as f64;

    let mut cells = Vec::with_capacity(resolution * resolution);
    let mut order: Vec<(f64, &str, usize)> = Vec::with_capacity(pts.len());
    for row in 0..resolution {
        let cy = center(1, row);
        for col in 0..resolution {
            let cx = center(0, col);
            order.clear();
            order.extend(pts.iter().enumerate().map(|(i, p)| {
                let d = (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
                (d, layout.ids[i].as_str(), i)
            }));
            let cmp = |a: &(f64, &str, usize), b: &(f64, &str, usize)| {
                a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(b.1))
            };
            if k < order.len() {
                order.select_nth_unstable_by(k - 1, cmp);
            }
            let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
            for &(_, _, i) in &order[..k] {
                if let Some(g) = primary[i].as_deref() {
                    *votes.entry(g).or_default() += 1;
                }
            }
            // BTreeMap iterates genres ascending; keep the first maximum
            let winner = votes
                .into_iter()
                .fold(None::<(&str, usize)>, |best, (g, c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((g, c)),
                })
                .map(|(g, _)| g.to_string());
            cells.push(winner);
        }
    }
    let colors = cells.iter().map(|g| genre_color(g.as_deref())).collect();
    Ok(BackgroundRaster {
        width: resolution,
        height: resolution,
        k,
        method: BACKGROUND_METHOD.to_string(),
        cells,
        colors,
    })
}

fn parse_hex(color: &str) -> [u8; 3] {
    let c = color.trim_start_matches('#');
    let channel = |i: usize| u8::from_str_radix(c.get(i..i + 2).unwrap_or("00"), 16).unwrap_or(0);
    [channel(0), channel(2), channel(4)]
}

impl BackgroundRaster {
    /// One pixel per cell, PNG row 0 = raster row 0.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut pixels = Vec::with_capacity(self.width * self.height * 4);
        for color in &self.colors {
            let [r, g, b] = parse_hex(color);
            pixels.extend_from_slice(&[r, g, b, 255]);
        }
        crate::features::RasterImage::new(self.width as u32, self.height as u32, pixels)?.to_png()
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

pub fn export_map(doc: &MapDocument) -> Result<Vec<u8>> {
    doc.validate()?;
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn import_map(bytes: &[u8]) -> Result<MapDocument> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_i64)
        .ok_or_else(|| Error::InvalidDocument("missing integer schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let doc: MapDocument = serde_json::from_value(value)?;
    doc.validate()?;
    Ok(doc)
}
