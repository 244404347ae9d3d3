use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use metalmap::{EmbedParams, FeatureKind, Metric};
use serde::{Deserialize, Serialize};

/// Embedding section of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSection {
    pub k: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub negative_samples: usize,
    pub initial_lr: f64,
    pub seed: u64,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl Default for EmbedSection {
    fn default() -> Self {
        let p = EmbedParams::<f64>::default();
        EmbedSection {
            k: p.k,
            min_dist: p.min_dist,
            spread: p.spread,
            n_epochs: p.n_epochs,
            negative_samples: p.negative_samples,
            initial_lr: p.initial_lr,
            seed: p.seed,
            a: None,
            b: None,
        }
    }
}

impl EmbedSection {
    pub fn params(&self) -> EmbedParams<f64> {
        EmbedParams {
            k: self.k,
            min_dist: self.min_dist,
            spread: self.spread,
            n_epochs: self.n_epochs,
            negative_samples: self.negative_samples,
            initial_lr: self.initial_lr,
            seed: self.seed,
            a: self.a,
            b: self.b,
        }
    }
}

/// Pipeline settings. Relative paths in a config file resolve against the
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub name: String,
    pub manifest: PathBuf,
    pub image_root: PathBuf,
    pub feature_kind: FeatureKind,
    /// Defaults to the natural metric of `feature_kind`.
    pub metric: Option<Metric>,
    /// Latent vector file, required when `feature_kind = "latent"`.
    pub latents: Option<PathBuf>,
    pub filters: bool,
    pub vocabulary_size: usize,
    pub occupancy: f64,
    pub background_resolution: usize,
    pub background_k: usize,
    pub out: PathBuf,
    pub bind: String,
    pub port: u16,
    pub embed: EmbedSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            name: "map".into(),
            manifest: PathBuf::from("manifest.jsonl"),
            image_root: PathBuf::from("."),
            feature_kind: FeatureKind::Histogram,
            metric: None,
            latents: None,
            filters: true,
            vocabulary_size: 51,
            occupancy: 0.5,
            background_resolution: metalmap::atlas::DEFAULT_BACKGROUND_RESOLUTION,
            background_k: metalmap::atlas::DEFAULT_BACKGROUND_K,
            out: PathBuf::from("out"),
            bind: "127.0.0.1".into(),
            port: 8080,
            embed: EmbedSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).context("invalid config")?;
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.manifest);
        join(&mut self.image_root);
        join(&mut self.out);
        if let Some(p) = self.latents.as_mut() {
            join(p);
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric.unwrap_or_else(|| Metric::default_for(self.feature_kind))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            bail!("map name must be non-empty and contain no path separators");
        }
        if !(self.occupancy > 0.0 && self.occupancy <= 1.0) {
            bail!("occupancy must be in (0, 1]");
        }
        if self.vocabulary_size == 0 {
            bail!("vocabulary_size must be at least 1");
        }
        if self.background_resolution == 0 || self.background_k == 0 {
            bail!("background resolution and k must be at least 1");
        }
        if self.feature_kind == FeatureKind::Latent && self.latents.is_none() {
            bail!("feature_kind = \"latent\" needs a `latents` file");
        }
        self.embed.params().validate()?;
        Ok(())
    }
}
