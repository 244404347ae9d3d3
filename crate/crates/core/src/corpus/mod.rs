//! Corpus manifests, filtering rules, and the genre vocabulary.

mod genre;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use genre::{normalize_tag, parse_genre_string};
pub use synth::{synth_corpus, ClassStyle, Stroke, SynthCorpus, SynthSpec};

/// Label value used by the source database for bands without a label.
pub const UNSIGNED_LABEL: &str = "unsigned/independent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Inactive,
    Unknown,
}

impl Status {
    /// Case-insensitive; anything unrecognized is `Unknown`.
    pub fn parse(text: &str) -> Status {
        match text.trim().to_ascii_lowercase().as_str() {
            "active" => Status::Active,
            "inactive" => Status::Inactive,
            _ => Status::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Active => "active",
            Status::Inactive => "inactive",
            Status::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One band in the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandRecord {
    pub id: String,
    pub name: String,
    pub genre_raw: String,
    pub genres: BTreeSet<String>,
    pub themes: BTreeSet<String>,
    pub label: Option<String>,
    pub status: Status,
    pub country: Option<String>,
    /// Logo image path relative to the configured image root.
    pub logo_path: String,
}

/// Wire form of one manifest line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestLine {
    pub id: String,
    pub name: String,
    pub genre: String,
    #[serde(default)]
    pub themes: Vec<String>,
    #[serde(default)]
    pub label: Option<String>,
    pub status: String,
    #[serde(default)]
    pub country: Option<String>,
    pub logo: String,
}

impl BandRecord {
    pub fn from_line(line: ManifestLine) -> Result<BandRecord> {
        if line.id.trim().is_empty() {
            return Err(Error::invalid("record id is empty"));
        }
        let genres = parse_genre_string(&line.genre);
        let themes = line
            .themes
            .iter()
            .map(|t| normalize_tag(t))
            .filter(|t| !t.is_empty())
            .collect();
        Ok(BandRecord {
            id: line.id,
            name: line.name,
            genres,
            genre_raw: line.genre,
            themes,
            label: line.label,
            status: Status::parse(&line.status),
            country: line.country,
            logo_path: line.logo,
        })
    }

    pub fn to_line(&self) -> ManifestLine {
        ManifestLine {
            id: self.id.clone(),
            name: self.name.clone(),
            genre: self.genre_raw.clone(),
            themes: self.themes.iter().cloned().collect(),
            label: self.label.clone(),
            status: self.status.as_str().to_string(),
            country: self.country.clone(),
            logo: self.logo_path.clone(),
        }
    }
}

/// Reads a JSON-lines manifest. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<BandRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let record = BandRecord::from_line(parsed).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        out.push(record);
    }
    Ok(out)
}

/// Serializes records back to JSON-lines, one per line.
pub fn write_manifest(records: &[BandRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&r.to_line()).expect("manifest line serializes"));
        out.push('\n');
    }
    out
}

/// Filtering rules, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FilterRule {
    /// status is not active
    Inactive,
    /// label absent or "unsigned/independent"
    Unsigned,
    /// no lyrical themes tagged
    NoThemes,
    /// label carried by fewer than two records of the input
    SingleBandLabel,
}

impl FilterRule {
    pub const ORDER: [FilterRule; 4] = [
        FilterRule::Inactive,
        FilterRule::Unsigned,
        FilterRule::NoThemes,
        FilterRule::SingleBandLabel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterRule::Inactive => "inactive",
            FilterRule::Unsigned => "unsigned",
            FilterRule::NoThemes => "no_themes",
            FilterRule::SingleBandLabel => "single_band_label",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total_in: usize,
    pub kept: usize,
    /// Every rule name is present, zero counts included.
    pub dropped_by_rule: BTreeMap<String, usize>,
}

fn label_key(label: &str) -> String {
    label.trim().to_lowercase()
}

fn is_unsigned(label: Option<&str>) -> bool {
    match label {
        None => true,
        Some(l) => {
            let key = label_key(l);
            key.is_empty() || key == UNSIGNED_LABEL
        }
    }
}

/// Applies the four corpus rules; each dropped record is charged to the
/// first rule that rejects it. Label membership is counted over the whole
/// input before any rule runs.
pub fn apply_filters(records: &[BandRecord]) -> (Vec<BandRecord>, FilterReport) {
    let mut label_counts: HashMap<String, usize> = HashMap::new();
    for r in records {
        if let Some(l) = &r.label {
            *label_counts.entry(label_key(l)).or_default() += 1;
        }
    }

    let mut dropped: BTreeMap<String, usize> =
        FilterRule::ORDER.iter().map(|r| (r.name().to_string(), 0)).collect();
    let mut kept = Vec::new();
    for r in records {
        let verdict = FilterRule::ORDER.into_iter().find(|rule| match rule {
            FilterRule::Inactive => r.status != Status::Active,
            FilterRule::Unsigned => is_unsigned(r.label.as_deref()),
            FilterRule::NoThemes => r.themes.is_empty(),
            FilterRule::SingleBandLabel => {
                let key = label_key(r.label.as_deref().unwrap_or_default());
                label_counts.get(&key).copied().unwrap_or(0) < 2
            }
        });
        match verdict {
            Some(rule) => *dropped.get_mut(rule.name()).unwrap() += 1,
            None => kept.push(r.clone()),
        }
    }
    let report = FilterReport {
        total_in: records.len(),
        kept: kept.len(),
        dropped_by_rule: dropped,
    };
    (kept, report)
}

/// Most frequent genre tags, by number of records carrying them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagVocabulary {
    pub tags: Vec<String>,
    pub frequencies: Vec<usize>,
}

impl TagVocabulary {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    /// First vocabulary tag (in vocabulary order) that the genre set carries.
    pub fn primary<'a>(&'a self, genres: &BTreeSet<String>) -> Option<&'a str> {
        self.tags
            .iter()
            .find(|t| genres.contains(t.as_str()))
            .map(String::as_str)
    }
}

pub fn build_vocabulary(records: &[BandRecord], k: usize) -> Result<TagVocabulary> {
    if k == 0 {
        return Err(Error::invalid("vocabulary size must be at least 1"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for g in &r.genres {
            *counts.entry(g.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);
    Ok(TagVocabulary {
        tags: ranked.iter().map(|(t, _)| t.to_string()).collect(),
        frequencies: ranked.iter().map(|(_, c)| *c).collect(),
    })
}

/// Binary membership vector of a record's genres over the vocabulary.
pub fn tag_vector(record: &BandRecord, vocab: &TagVocabulary) -> Result<Vec<bool>> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary is empty"));
    }
    Ok(vocab
        .tags
        .iter()
        .map(|t| record.genres.contains(t))
        .collect())
}
