//! Seeded synthetic logo corpora.
//!
//! Each class gets its own dominant color and stroke style, so class
//! membership is recoverable from color histograms and, to a lesser degree,
//! from greyscale shape. Base colors sit at quantization-bin centers and the
//! per-item jitter stays inside the bin.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_tag, BandRecord, ManifestLine};
use crate::error::{Error, Result};
use crate::features::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke {
    /// thick filled bars
    Block,
    /// one-pixel hairlines
    Thin,
    /// zig-zag spikes
    Jagged,
    /// rings
    Round,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassStyle {
    /// Raw genre string written to the manifest, e.g. "Black Metal".
    pub genre: String,
    pub color: [u8; 3],
    pub stroke: Stroke,
}

impl ClassStyle {
    pub fn new(genre: impl Into<String>, color: [u8; 3], stroke: Stroke) -> Self {
        ClassStyle {
            genre: genre.into(),
            color,
            stroke,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub classes: Vec<ClassStyle>,
    pub items_per_class: usize,
    pub width: u32,
    pub height: u32,
}

const COLOR_JITTER: i32 = 20;

fn default_styles() -> Vec<ClassStyle> {
    vec![
        ClassStyle::new("Black Metal", [224, 224, 224], Stroke::Thin),
        ClassStyle::new("Death Metal", [224, 32, 32], Stroke::Jagged),
        ClassStyle::new("Thrash Metal", [32, 96, 224], Stroke::Block),
        ClassStyle::new("Heavy Metal", [224, 160, 32], Stroke::Round),
        ClassStyle::new("Doom Metal", [96, 32, 160], Stroke::Block),
        ClassStyle::new("Power Metal", [32, 160, 96], Stroke::Round),
        ClassStyle::new("Grindcore", [160, 160, 32], Stroke::Jagged),
        ClassStyle::new("Folk Metal", [96, 160, 224], Stroke::Thin),
    ]
}

impl SynthSpec {
    /// Uses the first `classes` built-in styles (at most 8).
    pub fn with_classes(classes: usize, items_per_class: usize) -> Result<Self> {
        let styles = default_styles();
        if classes > styles.len() {
            return Err(Error::invalid(format!(
                "at most {} built-in classes, asked for {classes}",
                styles.len()
            )));
        }
        Ok(SynthSpec {
            classes: styles.into_iter().take(classes).collect(),
            items_per_class,
            width: 96,
            height: 48,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::invalid("synthetic corpus needs at least 2 classes"));
        }
        if self.items_per_class < 2 {
            return Err(Error::invalid("synthetic corpus needs at least 2 items per class"));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::invalid("synthetic images must be at least 16x16"));
        }
        let mut genres: Vec<String> = self.classes.iter().map(|c| normalize_tag(&c.genre)).collect();
        genres.sort();
        genres.dedup();
        if genres.len() != self.classes.len() || genres.iter().any(|g| g.is_empty()) {
            return Err(Error::invalid("class genres must be distinct and non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<BandRecord>,
    /// Same order as `records`.
    pub images: Vec<RasterImage>,
    /// Class index per record.
    pub classes: Vec<usize>,
}

impl SynthCorpus {
    /// Writes `manifest.jsonl` and the logo PNGs under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (record, image) in self.records.iter().zip(&self.images) {
            let path = dir.join(&record.logo_path);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, image.to_png()?).map_err(|e| Error::io(&path, e))?;
        }
        let manifest = dir.join("manifest.jsonl");
        std::fs::write(&manifest, super::write_manifest(&self.records))
            .map_err(|e| Error::io(&manifest, e))?;
        Ok(())
    }
}

const SYLLABLES: [&str; 16] = [
    "vor", "grim", "ash", "nek", "thal", "mor", "kry", "zul", "bal", "dra", "sep", "ul", "ruk", "vel", "orn",
    "gath",
];
const THEMES: [&str; 8] = [
    "darkness", "war", "death", "nature", "occultism", "mythology", "despair", "history",
];
const ACCENTS: [[u8; 3]; 3] = [[96, 96, 96], [160, 160, 160], [32, 32, 32]];

/// Generates a deterministic corpus. Random draws happen class by class,
/// item by item: name, themes, then the image.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut images = Vec::new();
    let mut classes = Vec::new();
    for (ci, style) in spec.classes.iter().enumerate() {
        for item in 0..spec.items_per_class {
            let id = format!("c{ci:02}-{item:04}");
            let n_syl = rng.random_range(2..=3);
            let mut name = String::new();
            for _ in 0..n_syl {
                name.push_str(SYLLABLES[rng.random_range(0..SYLLABLES.len())]);
            }
            let name = capitalize(&name);
            let n_themes = rng.random_range(1..=2);
            let themes: Vec<String> = (0..n_themes)
                .map(|_| THEMES[rng.random_range(0..THEMES.len())].to_string())
                .collect();
            let image = draw_logo(spec.width, spec.height, style, &mut rng);
            let record = BandRecord::from_line(ManifestLine {
                id: id.clone(),
                name,
                genre: style.genre.clone(),
                themes,
                label: Some(format!("{} Records", style.genre)),
                status: "Active".into(),
                country: None,
                logo: format!("logos/{id}.png"),
            })?;
            records.push(record);
            images.push(image);
            classes.push(ci);
        }
    }
    Ok(SynthCorpus {
        records,
        images,
        classes,
    })
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct Canvas {
    image: RasterImage,
}

impl Canvas {
    fn plot(&mut self, x: i64, y: i64, rgba: [u8; 4]) {
        if x >= 0 && y >= 0 && (x as u32) < self.image.width() && (y as u32) < self.image.height() {
            self.image.set_pixel(x as u32, y as u32, rgba);
        }
    }

    fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, rgba: [u8; 4]) {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.plot(x, y, rgba);
            }
        }
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), half_width: i64, rgba: [u8; 4]) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
        for s in 0..=steps {
            let x = x0 + (x1 - x0) * s / steps;
            let y = y0 + (y1 - y0) * s / steps;
            self.fill_rect(x - half_width, y - half_width, x + half_width, y + half_width, rgba);
        }
    }

    fn ring(&mut self, cx: i64, cy: i64, radius: i64, thickness: i64, rgba: [u8; 4]) {
        let outer = radius * radius;
        let inner = (radius - thickness).max(0).pow(2);
        for y in cy - radius..=cy + radius {
            for x in cx - radius..=cx + radius {
                let d = (x - cx).pow(2) + (y - cy).pow(2);
                if d <= outer && d >= inner {
                    self.plot(x, y, rgba);
                }
            }
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, base: [u8; 3]) -> [u8; 4] {
    let mut out = [0u8, 0, 0, 255];
    for c in 0..3 {
        let v = base[c] as i32 + rng.random_range(-COLOR_JITTER..=COLOR_JITTER);
        out[c] = v.clamp(0, 255) as u8;
    }
    out
}

fn draw_logo(width: u32, height: u32, style: &ClassStyle, rng: &mut ChaCha8Rng) -> RasterImage {
    let mut canvas = Canvas {
        image: RasterImage::filled(width, height, [0, 0, 0, 0]).expect("valid dimensions"),
    };
    let color = jitter(rng, style.color);
    let (w, h) = (width as i64, height as i64);
    let glyphs = rng.random_range(3..=5);
    let slot = w / glyphs;
    let margin = h / 6;
    for g in 0..glyphs {
        let x0 = g * slot + rng.random_range(1..=slot / 6 + 1);
        let x1 = (g + 1) * slot - rng.random_range(1..=slot / 6 + 1);
        let top = margin + rng.random_range(0..=margin);
        let bottom = h - margin - rng.random_range(0..=margin);
        match style.stroke {
            Stroke::Block => {
                let bar = rng.random_range(2..=4);
                canvas.fill_rect(x0, top, x0 + bar, bottom, color);
                canvas.fill_rect(x0, top, x1, top + bar, color);
                canvas.fill_rect(x0, bottom - bar, x1, bottom, color);
            }
            Stroke::Thin => {
                let mid = (x0 + x1) / 2 + rng.random_range(-2..=2);
                canvas.line((x0, bottom), (mid, top), 0, color);
                canvas.line((mid, top), (x1, bottom), 0, color);
                canvas.line((x0, top), (x1, top), 0, color);
            }
            Stroke::Jagged => {
                let teeth = rng.random_range(2..=4);
                let step = ((x1 - x0) / teeth).max(1);
                for t in 0..teeth {
                    let a = x0 + t * step;
                    canvas.line((a, bottom), (a + step / 2, top), 1, color);
                    canvas.line((a + step / 2, top), (a + step, bottom), 1, color);
                }
            }
            Stroke::Round => {
                let r = ((x1 - x0).min(bottom - top) / 2).max(3);
                canvas.ring((x0 + x1) / 2, (top + bottom) / 2, r, 2, color);
            }
        }
    }
    // speckle the strokes with neutral accents, each logo with its own mix
    let shares: Vec<f64> = ACCENTS.iter().map(|_| rng.random_range(0.0..0.1)).collect();
    for y in 0..height {
        for x in 0..width {
            let px = canvas.image.pixel(x, y);
            let roll = rng.random::<f64>();
            if px[3] == 255 && roll < shares.iter().sum::<f64>() {
                let mut acc = 0.0;
                let pick = shares.iter().position(|s| {
                    acc += s;
                    roll < acc
                });
                let accent = ACCENTS[pick.unwrap_or(ACCENTS.len() - 1)];
                canvas.image.set_pixel(x, y, [accent[0], accent[1], accent[2], 255]);
            }
        }
    }
    canvas.image
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = SynthSpec::with_classes(3, 4).unwrap();
        let a = synth_corpus(&spec, 7).unwrap();
        let b = synth_corpus(&spec, 7).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.to_png().unwrap(), y.to_png().unwrap());
        }
        let c = synth_corpus(&spec, 8).unwrap();
        assert_ne!(a.images, c.images);
    }

    #[test]
    fn cardinality() {
        let spec = SynthSpec::with_classes(2, 5).unwrap();
        let corpus = synth_corpus(&spec, 1).unwrap();
        assert_eq!(corpus.records.len(), 10);
        let genres: std::collections::BTreeSet<_> =
            corpus.records.iter().flat_map(|r| r.genres.iter().cloned()).collect();
        assert_eq!(genres.len(), 2);
    }

    #[test]
    fn invalid_specs() {
        assert!(synth_corpus(&SynthSpec::with_classes(1, 5).unwrap(), 0).is_err());
        assert!(synth_corpus(&SynthSpec::with_classes(2, 1).unwrap(), 0).is_err());
        assert!(SynthSpec::with_classes(9, 2).is_err());
        let mut dup = SynthSpec::with_classes(2, 2).unwrap();
        dup.classes[1].genre = "black metal".into();
        assert!(synth_corpus(&dup, 0).is_err());
    }

    #[test]
    fn every_record_survives_filters() {
        let corpus = synth_corpus(&SynthSpec::with_classes(4, 3).unwrap(), 3).unwrap();
        let (kept, _) = super::super::apply_filters(&corpus.records);
        assert_eq!(kept.len(), corpus.records.len());
    }
}
