//! Image feature vectors and externally computed latent vectors.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Alpha values below this are treated as background by the histogram.
pub const ALPHA_THRESHOLD: u8 = 128;
pub const DEFAULT_HISTOGRAM_BINS: usize = 4;
pub const DEFAULT_THUMBNAIL_SIDE: usize = 64;

/// Row-major RGBA raster, 8 bits per channel.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        let expected = 4 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    /// Uniformly filled image.
    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, rgba.repeat(n))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        [
            self.pixels[i],
            self.pixels[i + 1],
            self.pixels[i + 2],
            self.pixels[i + 3],
        ]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgba: [u8; 4]) {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 4].copy_from_slice(&rgba);
    }

    /// Decodes a PNG or JPEG file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?.to_rgba8();
        let (w, h) = img.dimensions();
        Self::new(w, h, img.into_raw())
    }

    pub fn from_encoded(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes)?.to_rgba8();
        let (w, h) = img.dimensions();
        Self::new(w, h, img.into_raw())
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let buf = image::RgbaImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length checked at construction");
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    /// Downscaled copy fitting inside `max_side` (aspect preserved), for
    /// tooltips. Images already small enough are returned unchanged.
    pub fn fit_within(&self, max_side: u32) -> RasterImage {
        if self.width <= max_side && self.height <= max_side {
            return self.clone();
        }
        let buf = image::RgbaImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length checked at construction");
        let scale = max_side as f64 / self.width.max(self.height) as f64;
        let w = ((self.width as f64 * scale).round() as u32).max(1);
        let h = ((self.height as f64 * scale).round() as u32).max(1);
        let small = image::imageops::resize(&buf, w, h, image::imageops::FilterType::Triangle);
        RasterImage {
            width: w,
            height: h,
            pixels: small.into_raw(),
        }
    }
}

/// Joint RGB histogram over opaque pixels, L1-normalized.
///
/// Each channel value `v` falls in bin `v * bins / 256`; the flat index is
/// `r * bins^2 + g * bins + b`.
pub fn color_histogram<T: Real>(image: &RasterImage, bins_per_channel: usize) -> Result<Vec<T>> {
    if !(2..=16).contains(&bins_per_channel) {
        return Err(Error::invalid(format!(
            "bins_per_channel must be in [2, 16], got {bins_per_channel}"
        )));
    }
    let bins = bins_per_channel;
    let mut counts = vec![0u64; bins * bins * bins];
    let mut total = 0u64;
    for px in image.pixels.chunks_exact(4) {
        if px[3] < ALPHA_THRESHOLD {
            continue;
        }
        let q = |v: u8| v as usize * bins / 256;
        counts[q(px[0]) * bins * bins + q(px[1]) * bins + q(px[2])] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyImage);
    }
    let total = T::from_u64(total).expect("count representable");
    Ok(counts
        .into_iter()
        .map(|c| T::from_u64(c).expect("count representable") / total)
        .collect())
}

/// Greyscale thumbnail, `side * side` values in [0, 1], row-major.
///
/// The image is composited over white, centered on a white square canvas
/// whose side is the longer image dimension, then bilinearly resampled with
/// pixel-center alignment. Luminance uses Rec.601 weights.
pub fn grey_thumbnail<T: Real>(image: &RasterImage, side: usize) -> Result<Vec<T>> {
    if side == 0 {
        return Err(Error::invalid("thumbnail side must be at least 1"));
    }
    let (w, h) = (image.width as usize, image.height as usize);
    let canvas_side = w.max(h);
    let off_x = (canvas_side - w) / 2;
    let off_y = (canvas_side - h) / 2;

    // luminance of every canvas pixel, white outside the image
    let mut canvas = vec![1.0f64; canvas_side * canvas_side];
    for y in 0..h {
        for x in 0..w {
            let [r, g, b, a] = image.pixel(x as u32, y as u32);
            let a = a as f64;
            let over = |c: u8| (c as f64 * a + 255.0 * (255.0 - a)) / 255.0;
            let lum = (299.0 * over(r) + 587.0 * over(g) + 114.0 * over(b)) / 255_000.0;
            canvas[(y + off_y) * canvas_side + x + off_x] = lum;
        }
    }

    let scale = canvas_side as f64 / side as f64;
    let max_idx = (canvas_side - 1) as f64;
    let sample = |cx: usize, cy: usize| canvas[cy * canvas_side + cx];
    let lerp = |a: f64, b: f64, t: f64| if a == b { a } else { a + (b - a) * t };

    let mut out = Vec::with_capacity(side * side);
    for dy in 0..side {
        let v = ((dy as f64 + 0.5) * scale - 0.5).clamp(0.0, max_idx);
        let y0 = v.floor() as usize;
        let y1 = (y0 + 1).min(canvas_side - 1);
        let fy = v - y0 as f64;
        for dx in 0..side {
            let u = ((dx as f64 + 0.5) * scale - 0.5).clamp(0.0, max_idx);
            let x0 = u.floor() as usize;
            let x1 = (x0 + 1).min(canvas_side - 1);
            let fx = u - x0 as f64;
            let top = lerp(sample(x0, y0), sample(x1, y0), fx);
            let bottom = lerp(sample(x0, y1), sample(x1, y1), fx);
            let value = lerp(top, bottom, fy).clamp(0.0, 1.0);
            out.push(T::c(value));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Histogram,
    Thumbnail,
    Latent,
    Tag,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Histogram => "histogram",
            FeatureKind::Thumbnail => "thumbnail",
            FeatureKind::Latent => "latent",
            FeatureKind::Tag => "tag",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "histogram" => Ok(FeatureKind::Histogram),
            "thumbnail" => Ok(FeatureKind::Thumbnail),
            "latent" => Ok(FeatureKind::Latent),
            "tag" => Ok(FeatureKind::Tag),
            other => Err(Error::invalid(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// Equal-length real vectors keyed by item id, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    kind: FeatureKind,
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<T>>,
    index: HashMap<String, usize>,
}

impl<T: Real> FeatureSet<T> {
    pub fn new(kind: FeatureKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be at least 1"));
        }
        Ok(FeatureSet {
            kind,
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<T>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("feature vector for `{id}` is not finite")));
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.vectors.push(vector);
        Ok(())
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn get(&self, id: &str) -> Option<&[T]> {
        self.index.get(id).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter().map(Vec::as_slice))
    }

    /// Writes the set in the latent text format: id followed by the vector,
    /// whitespace-separated, one item per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, v) in self.iter() {
            out.push_str(id);
            for x in v {
                out.push(' ');
                out.push_str(&format!("{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a latent vector file (`id v1 v2 ... vd` per line). Blank lines are
/// skipped. The result is tagged with `kind`, which is `Latent` for files
/// produced by external models.
pub fn load_feature_text<T: Real, R: BufRead>(reader: R, kind: FeatureKind) -> Result<FeatureSet<T>> {
    let mut set: Option<FeatureSet<T>> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let mut tokens = line.split_whitespace();
        let Some(id) = tokens.next() else { continue };
        let values = tokens
            .map(|t| {
                t.parse::<f64>().map(T::c).map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("non-numeric value `{t}`"),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        if set.is_none() {
            set = Some(FeatureSet::new(kind, values.len()).map_err(|_| Error::Parse {
                line: lineno,
                message: "item has no values".into(),
            })?);
        }
        let set = set.as_mut().expect("initialized above");
        if values.len() != set.dim() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("ragged dimension: expected {}, got {}", set.dim(), values.len()),
            });
        }
        set.insert(id, values).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
    }
    set.ok_or_else(|| Error::invalid("latent file has no items; dimension undefined"))
}

pub fn load_latents<T: Real, R: BufRead>(reader: R) -> Result<FeatureSet<T>> {
    load_feature_text(reader, FeatureKind::Latent)
}
