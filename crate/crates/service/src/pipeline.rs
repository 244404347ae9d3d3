//! Batch stages. Each stage writes its output under the configured output
//! directory so the next one can start from disk.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use metalmap::atlas::{self, MapDocument, Provenance};
use metalmap::corpus::{self, BandRecord, FilterReport, TagVocabulary};
use metalmap::embed::{self, Embedding, Layout2D};
use metalmap::features::{self, FeatureKind, FeatureSet, RasterImage};
use metalmap::gridify::{self, GridAssignment};
use metalmap::{EmbedParams, Metric};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const FILTER_REPORT_FILE: &str = "filter_report.json";
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const EMBEDDING_FILE: &str = "embedding.json";
pub const GRID_FILE: &str = "grid.json";
pub const MAPS_DIR: &str = "maps";
pub const THUMBS_DIR: &str = "thumbs";
pub const THUMB_MAX_SIDE: u32 = 128;

pub fn features_file(kind: FeatureKind) -> String {
    format!("features_{kind}.txt")
}

pub fn map_file(out: &Path, name: &str) -> PathBuf {
    out.join(MAPS_DIR).join(format!("{name}.json"))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write(path, bytes)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

/// Stored output of the embed stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub feature_kind: FeatureKind,
    pub metric: Metric,
    pub params: EmbedParams<f64>,
    pub layout: Layout2D<f64>,
}

pub fn load_records(path: &Path) -> Result<Vec<BandRecord>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    corpus::parse_manifest(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Parses the manifest, applies the filters and stores the kept records.
pub fn ingest(cfg: &PipelineConfig) -> Result<(Vec<BandRecord>, FilterReport)> {
    let records = load_records(&cfg.manifest)?;
    let (kept, report) = if cfg.filters {
        corpus::apply_filters(&records)
    } else {
        let n = records.len();
        let (_, mut report) = corpus::apply_filters(&[]);
        report.total_in = n;
        report.kept = n;
        (records, report)
    };
    write(&cfg.out.join(RECORDS_FILE), corpus::write_manifest(&kept))?;
    write_json(&cfg.out.join(FILTER_REPORT_FILE), &report)?;
    Ok((kept, report))
}

pub fn vocabulary(cfg: &PipelineConfig, records: &[BandRecord]) -> Result<TagVocabulary> {
    Ok(corpus::build_vocabulary(records, cfg.vocabulary_size)?)
}

fn logo(cfg: &PipelineConfig, record: &BandRecord) -> Result<RasterImage> {
    let path = cfg.image_root.join(&record.logo_path);
    RasterImage::open(&path).with_context(|| format!("logo for `{}`", record.id))
}

/// Computes the configured feature family and writes logo thumbnails for
/// the service.
pub fn compute_features(cfg: &PipelineConfig, records: &[BandRecord]) -> Result<FeatureSet<f64>> {
    if records.is_empty() {
        bail!("no records to featurize");
    }
    let vocab = vocabulary(cfg, records)?;
    write_json(&cfg.out.join(VOCABULARY_FILE), &vocab)?;

    let kind = cfg.feature_kind;
    let set = match kind {
        FeatureKind::Histogram | FeatureKind::Thumbnail => {
            let mut set: Option<FeatureSet<f64>> = None;
            for r in records {
                let img = logo(cfg, r)?;
                let v: Vec<f64> = if kind == FeatureKind::Histogram {
                    features::color_histogram(&img, features::DEFAULT_HISTOGRAM_BINS)
                } else {
                    features::grey_thumbnail(&img, features::DEFAULT_THUMBNAIL_SIDE)
                }
                .with_context(|| format!("features for `{}`", r.id))?;
                if set.is_none() {
                    set = Some(FeatureSet::new(kind, v.len())?);
                }
                set.as_mut().expect("initialized above").insert(r.id.clone(), v)?;
            }
            set.expect("records are non-empty")
        }
        FeatureKind::Tag => {
            let mut set = FeatureSet::new(kind, vocab.len())?;
            for r in records {
                let v = corpus::tag_vector(r, &vocab)?;
                set.insert(r.id.clone(), v.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())?;
            }
            set
        }
        FeatureKind::Latent => {
            let path = cfg.latents.as_ref().ok_or_else(|| anyhow!("no latent file configured"))?;
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let all: FeatureSet<f64> = features::load_latents(BufReader::new(file))?;
            let mut set = FeatureSet::new(kind, all.dim())?;
            for r in records {
                let v = all
                    .get(&r.id)
                    .ok_or_else(|| anyhow!("latent file has no vector for `{}`", r.id))?;
                set.insert(r.id.clone(), v.to_vec())?;
            }
            set
        }
    };
    write(&cfg.out.join(features_file(kind)), set.to_text())?;
    write_thumbnails(cfg, records)?;
    Ok(set)
}

fn write_thumbnails(cfg: &PipelineConfig, records: &[BandRecord]) -> Result<()> {
    let dir = cfg.out.join(THUMBS_DIR);
    for r in records {
        let png = match logo(cfg, r) {
            Ok(img) => img.fit_within(THUMB_MAX_SIDE).to_png()?,
            // latent and tag maps may not ship images
            Err(_) if matches!(cfg.feature_kind, FeatureKind::Latent | FeatureKind::Tag) => continue,
            Err(e) => return Err(e),
        };
        write(&dir.join(format!("{}.png", r.id)), png)?;
    }
    Ok(())
}

pub fn load_features(cfg: &PipelineConfig) -> Result<FeatureSet<f64>> {
    let path = cfg.out.join(features_file(cfg.feature_kind));
    let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(features::load_feature_text(BufReader::new(file), cfg.feature_kind)?)
}

pub fn run_embed(cfg: &PipelineConfig, set: &FeatureSet<f64>) -> Result<EmbeddingFile> {
    let Embedding { layout, metric, params } = embed::embed(set, cfg.metric(), &cfg.embed.params())?;
    let file = EmbeddingFile {
        feature_kind: set.kind(),
        metric,
        params,
        layout,
    };
    write_json(&cfg.out.join(EMBEDDING_FILE), &file)?;
    Ok(file)
}

pub fn load_embedding(cfg: &PipelineConfig) -> Result<EmbeddingFile> {
    let path = cfg.out.join(EMBEDDING_FILE);
    let file: EmbeddingFile = serde_json::from_slice(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    Layout2D::new(file.layout.ids.clone(), file.layout.coords.clone())?;
    Ok(file)
}

pub fn run_gridify(cfg: &PipelineConfig, layout: &Layout2D<f64>) -> Result<GridAssignment> {
    let level = gridify::choose_level(layout.len(), cfg.occupancy)?;
    let grid = gridify::assign_cells(layout, level)?;
    write_json(&cfg.out.join(GRID_FILE), &grid)?;
    Ok(grid)
}

pub fn load_grid(cfg: &PipelineConfig) -> Result<GridAssignment> {
    let path = cfg.out.join(GRID_FILE);
    serde_json::from_slice(&read(&path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Assembles and writes the map document from stage outputs.
pub fn build_map(
    cfg: &PipelineConfig,
    records: &[BandRecord],
    embedding: &EmbeddingFile,
    grid: &GridAssignment,
) -> Result<MapDocument> {
    let vocab = vocabulary(cfg, records)?;
    let by_id: std::collections::HashMap<&str, &BandRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let primary: Vec<Option<String>> = embedding
        .layout
        .ids
        .iter()
        .map(|id| by_id.get(id.as_str()).and_then(|r| vocab.primary(&r.genres)).map(String::from))
        .collect();
    let background = atlas::genre_background(&embedding.layout, &primary, cfg.background_resolution, cfg.background_k)?;
    let provenance = Provenance::new(embedding.feature_kind, embedding.metric, &embedding.params, grid)?;
    let doc = atlas::assemble_map(&cfg.name, records, &embedding.layout, grid, provenance, Some(background))?;
    write(&map_file(&cfg.out, &cfg.name), atlas::export_map(&doc)?)?;
    Ok(doc)
}

/// Every stage from manifest to map document.
pub fn run_atlas(cfg: &PipelineConfig) -> Result<MapDocument> {
    cfg.validate()?;
    let (records, _) = ingest(cfg)?;
    let set = compute_features(cfg, &records)?;
    let embedding = run_embed(cfg, &set)?;
    let grid = run_gridify(cfg, &embedding.layout)?;
    build_map(cfg, &records, &embedding, &grid)
}

pub fn load_documents(out: &Path) -> Result<Vec<(MapDocument, Vec<u8>)>> {
    let dir = out.join(MAPS_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut docs = Vec::new();
    for path in paths {
        let bytes = read(&path)?;
        let doc = atlas::import_map(&bytes).with_context(|| format!("loading {}", path.display()))?;
        docs.push((doc, bytes));
    }
    if docs.is_empty() {
        bail!("no map documents in {}", dir.display());
    }
    Ok(docs)
}
