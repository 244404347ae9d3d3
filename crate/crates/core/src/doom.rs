//! Logo design-space ratings: the 18 rating dimensions and the descriptive
//! statistics computed over a complete rater × logo × dimension table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 5;
/// Bimodality coefficient of the uniform distribution.
pub const BIMODAL_THRESHOLD: f64 = 5.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionGroup {
    Bertin,
    LetterStyle,
    WholeLogo,
    Graphics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Thickness,
    Size,
    Texture,
    Orientation,
    Color,
    Novelty,
    Angularity,
    Constraints,
    Sharpness,
    Tightness,
    Symmetry,
    Space,
    Connectivity,
    Dimensionality,
    Deviation,
    Congruence,
    Abstraction,
    Integrity,
}

impl Dimension {
    pub const ALL: [Dimension; 18] = [
        Dimension::Thickness,
        Dimension::Size,
        Dimension::Texture,
        Dimension::Orientation,
        Dimension::Color,
        Dimension::Novelty,
        Dimension::Angularity,
        Dimension::Constraints,
        Dimension::Sharpness,
        Dimension::Tightness,
        Dimension::Symmetry,
        Dimension::Space,
        Dimension::Connectivity,
        Dimension::Dimensionality,
        Dimension::Deviation,
        Dimension::Congruence,
        Dimension::Abstraction,
        Dimension::Integrity,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        use Dimension::*;
        match self {
            Thickness => "Thickness",
            Size => "Size",
            Texture => "Texture",
            Orientation => "Orientation",
            Color => "Color",
            Novelty => "Novelty",
            Angularity => "Angularity",
            Constraints => "Constraints",
            Sharpness => "Sharpness",
            Tightness => "Tightness",
            Symmetry => "Symmetry",
            Space => "Space",
            Connectivity => "Connectivity",
            Dimensionality => "Dimensionality",
            Deviation => "Deviation",
            Congruence => "Congruence",
            Abstraction => "Abstraction",
            Integrity => "Integrity",
        }
    }

    pub fn group(self) -> DimensionGroup {
        match self.index() {
            0..=4 => DimensionGroup::Bertin,
            5..=9 => DimensionGroup::LetterStyle,
            10..=14 => DimensionGroup::WholeLogo,
            _ => DimensionGroup::Graphics,
        }
    }

    /// What a rater scores, from 1 (low end) to 5 (high end).
    pub fn prompt(self) -> &'static str {
        use Dimension::*;
        match self {
            Thickness => "stroke weight: hairline (1) to heavy (5)",
            Size => "letter size variation: uniform (1) to strongly varied (5)",
            Texture => "surface treatment: flat fill (1) to heavily textured (5)",
            Orientation => "baseline and letter angle: level (1) to strongly tilted or rotated (5)",
            Color => "use of color: monochrome (1) to many hues (5)",
            Novelty => "letterforms: conventional typeface (1) to invented shapes (5)",
            Angularity => "corners: rounded (1) to angular (5)",
            Constraints => "letters bend to an outer shape: free (1) to fully constrained (5)",
            Sharpness => "terminals: blunt (1) to spiked or pointed (5)",
            Tightness => "letter spacing: airy (1) to interlocked (5)",
            Symmetry => "mirror symmetry of the whole mark: none (1) to exact (5)",
            Space => "negative space inside the mark: dense (1) to open (5)",
            Connectivity => "letters joined into one piece: separate (1) to fully connected (5)",
            Dimensionality => "depth effects: flat (1) to strongly three-dimensional (5)",
            Deviation => "departure from a readable word shape: legible (1) to illegible (5)",
            Congruence => "fit between the look and the band's genre: poor (1) to strong (5)",
            Abstraction => "pictorial elements: literal imagery (1) to abstract ornament (5)",
            Integrity => "imagery fused with lettering: separate (1) to inseparable (5)",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase();
        if key == "originality" {
            return Ok(Dimension::Novelty);
        }
        Dimension::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(&key))
            .ok_or_else(|| Error::Ratings(format!("unknown dimension `{}`", s.trim())))
    }
}

/// Complete score table. Raters and logos are kept sorted so every
/// statistic is independent of input row order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    raters: Vec<String>,
    logos: Vec<String>,
    // [rater][logo][dimension]
    scores: Vec<u8>,
    intended_genre: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    rater: String,
    logo: String,
    dimension: String,
    score: String,
}

impl RatingTable {
    /// Builds a table from `(rater, logo, dimension, score)` cells.
    pub fn from_cells<I, S>(cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, Dimension, i64)>,
        S: Into<String>,
    {
        let mut map: HashMap<(String, String, Dimension), u8> = HashMap::new();
        for (rater, logo, dim, score) in cells {
            let (rater, logo) = (rater.into(), logo.into());
            if !(MIN_SCORE as i64..=MAX_SCORE as i64).contains(&score) {
                return Err(Error::Ratings(format!(
                    "score {score} out of range {MIN_SCORE}..={MAX_SCORE} at ({rater}, {logo}, {dim})"
                )));
            }
            if rater.is_empty() || logo.is_empty() {
                return Err(Error::Ratings("empty rater or logo id".into()));
            }
            let key = (rater, logo, dim);
            if map.contains_key(&key) {
                return Err(Error::Ratings(format!("duplicate cell ({}, {}, {})", key.0, key.1, key.2)));
            }
            map.insert(key, score as u8);
        }
        if map.is_empty() {
            return Err(Error::Ratings("no ratings".into()));
        }
        let raters: Vec<String> = map.keys().map(|k| k.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let logos: Vec<String> = map.keys().map(|k| k.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();

        let nd = Dimension::ALL.len();
        let mut scores = vec![0u8; raters.len() * logos.len() * nd];
        let mut missing = Vec::new();
        for (ri, rater) in raters.iter().enumerate() {
            for (li, logo) in logos.iter().enumerate() {
                for dim in Dimension::ALL {
                    match map.get(&(rater.clone(), logo.clone(), dim)) {
                        Some(&s) => scores[(ri * logos.len() + li) * nd + dim.index()] = s,
                        None => missing.push(format!("({rater}, {logo}, {dim})")),
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Ratings(format!(
                "{} missing cell(s): {}",
                missing.len(),
                missing.join(", ")
            )));
        }
        Ok(RatingTable {
            raters,
            logos,
            scores,
            intended_genre: BTreeMap::new(),
        })
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn logos(&self) -> &[String] {
        &self.logos
    }

    pub fn score(&self, rater: usize, logo: usize, dim: Dimension) -> u8 {
        self.scores[(rater * self.logos.len() + logo) * Dimension::ALL.len() + dim.index()]
    }

    /// Optional genre a logo was meant to signal; not used by the statistics.
    pub fn intended_genre(&self, logo: &str) -> Option<&str> {
        self.intended_genre.get(logo).map(String::as_str)
    }

    pub fn set_intended_genre(&mut self, logo: &str, genre: impl Into<String>) -> Result<()> {
        self.logo_index(logo)?;
        self.intended_genre.insert(logo.to_string(), genre.into());
        Ok(())
    }

    fn logo_index(&self, logo: &str) -> Result<usize> {
        self.logos.binary_search_by(|l| l.as_str().cmp(logo)).map_err(|_| Error::NotFound {
            what: "logo",
            name: logo.to_string(),
        })
    }

    fn rater_index(&self, rater: &str) -> Result<usize> {
        self.raters.binary_search_by(|r| r.as_str().cmp(rater)).map_err(|_| Error::NotFound {
            what: "rater",
            name: rater.to_string(),
        })
    }

    fn column(&self, logo: usize, dim: Dimension) -> impl Iterator<Item = i64> + '_ {
        (0..self.raters.len()).map(move |r| self.score(r, logo, dim) as i64)
    }
}

/// Reads a `rater,logo,dimension,score` CSV. Data rows are addressed by
/// their 1-based line number in range errors.
pub fn load_ratings<R: Read>(reader: R) -> Result<RatingTable> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers().map_err(|e| Error::Ratings(e.to_string()))?.clone();
    let expected = ["rater", "logo", "dimension", "score"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(Error::Ratings(format!(
            "header must be `rater,logo,dimension,score`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cells = Vec::new();
    for (i, row) in csv.deserialize::<CsvRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Ratings(format!("line {line}: {e}")))?;
        let dim: Dimension = row.dimension.parse()?;
        let score: i64 = row.score.parse().map_err(|_| {
            Error::Ratings(format!(
                "line {line}: score `{}` at ({}, {}, {dim}) is not an integer",
                row.score, row.rater, row.logo
            ))
        })?;
        if !(MIN_SCORE as i64..=MAX_SCORE as i64).contains(&score) {
            return Err(Error::Ratings(format!(
                "line {line}: score {score} out of range {MIN_SCORE}..={MAX_SCORE} at ({}, {}, {dim})",
                row.rater, row.logo
            )));
        }
        cells.push((row.rater, row.logo, dim, score));
    }
    RatingTable::from_cells(cells)
}

fn mean_sd(values: impl Iterator<Item = i64>) -> (f64, f64) {
    let (mut n, mut s, mut ss) = (0i64, 0i64, 0i64);
    for v in values {
        n += 1;
        s += v;
        ss += v * v;
    }
    let mean = s as f64 / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let num = n * ss - s * s;
    (mean, (num as f64 / (n * (n - 1)) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionStat {
    pub dimension: Dimension,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and sample sd (n − 1) across raters for each dimension.
pub fn logo_profile(table: &RatingTable, logo: &str) -> Result<Vec<DimensionStat>> {
    let li = table.logo_index(logo)?;
    Ok(Dimension::ALL
        .into_iter()
        .map(|dim| {
            let (mean, sd) = mean_sd(table.column(li, dim));
            DimensionStat { dimension: dim, mean, sd }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub logo: String,
    pub score: f64,
}

/// Logos by mean per-dimension rater sd, highest first, ties by id.
pub fn disagreement_ranking(table: &RatingTable) -> Result<Vec<Disagreement>> {
    if table.raters.len() < 2 {
        return Err(Error::Ratings("disagreement needs at least 2 raters".into()));
    }
    let mut out: Vec<Disagreement> = (0..table.logos.len())
        .map(|li| {
            let total: f64 = Dimension::ALL.into_iter().map(|d| mean_sd(table.column(li, d)).1).sum();
            Disagreement {
                logo: table.logos[li].clone(),
                score: total / Dimension::ALL.len() as f64,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.logo.cmp(&b.logo)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionSpread {
    pub dimension: Dimension,
    pub discriminability: f64,
    pub bimodality_coefficient: Option<f64>,
    pub bimodal_flag: Option<bool>,
}

/// Sample variance (n − 1) of `xs`.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Bimodality coefficient from bias-adjusted skewness and excess kurtosis.
/// `None` when n < 4 or the values have no spread.
pub fn bimodality_coefficient(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let moment = |p: i32| xs.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / nf;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    if m2 <= (f64::EPSILON * scale).powi(2) {
        return None;
    }
    let skew = (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * m3 / m2.powf(1.5);
    let kurt = (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * (m4 / (m2 * m2) - 3.0) + 6.0);
    Some((skew * skew + 1.0) / (kurt + 3.0 * (nf - 1.0).powi(2) / ((nf - 2.0) * (nf - 3.0))))
}

/// Per-dimension spread of the per-logo mean scores.
pub fn dimension_spread(table: &RatingTable) -> Result<Vec<DimensionSpread>> {
    if table.logos.len() < 3 {
        return Err(Error::Ratings("dimension spread needs at least 3 logos".into()));
    }
    Ok(Dimension::ALL
        .into_iter()
        .map(|dim| {
            let means: Vec<f64> = (0..table.logos.len()).map(|li| mean_sd(table.column(li, dim)).0).collect();
            let bc = bimodality_coefficient(&means);
            DimensionSpread {
                dimension: dim,
                discriminability: sample_variance(&means),
                bimodality_coefficient: bc,
                bimodal_flag: bc.map(|b| b > BIMODAL_THRESHOLD),
            }
        })
        .collect())
}

/// Mean over logos of |rater score − mean of the other raters|.
pub fn rater_deviation(table: &RatingTable, rater: &str) -> Result<Vec<(Dimension, f64)>> {
    let ri = table.rater_index(rater)?;
    let n = table.raters.len();
    if n < 2 {
        return Err(Error::Ratings("rater deviation needs at least 2 raters".into()));
    }
    Ok(Dimension::ALL
        .into_iter()
        .map(|dim| {
            let total: f64 = (0..table.logos.len())
                .map(|li| {
                    let own = table.score(ri, li, dim) as f64;
                    let others: i64 = table.column(li, dim).sum::<i64>() - own as i64;
                    (own - others as f64 / (n - 1) as f64).abs()
                })
                .sum();
            (dim, total / table.logos.len() as f64)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadEntry {
    pub discriminability: f64,
    pub bimodality_coefficient: Option<f64>,
    pub bimodal_flag: Option<bool>,
}

/// Everything `rate-stats` prints. Sections whose preconditions fail are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingReport {
    pub statistics: &'static str,
    pub raters: Vec<String>,
    pub logos: Vec<String>,
    pub profiles: BTreeMap<String, BTreeMap<String, ProfileEntry>>,
    pub disagreement: Option<Vec<Disagreement>>,
    pub dimension_spread: Option<BTreeMap<String, SpreadEntry>>,
    pub rater_deviation: Option<BTreeMap<String, BTreeMap<String, f64>>>,
}

pub const STATISTICS_NOTE: &str = "sd uses the n-1 divisor; disagreement is the mean sd over dimensions; \
discriminability is the n-1 variance of per-logo means; bimodality flag is BC > 5/9";

pub fn rating_report(table: &RatingTable) -> Result<RatingReport> {
    let mut profiles = BTreeMap::new();
    for logo in &table.logos {
        let entries = logo_profile(table, logo)?
            .into_iter()
            .map(|s| (s.dimension.name().to_string(), ProfileEntry { mean: s.mean, sd: s.sd }))
            .collect();
        profiles.insert(logo.clone(), entries);
    }
    let spread = (table.logos.len() >= 3).then(|| dimension_spread(table)).transpose()?.map(|v| {
        v.into_iter()
            .map(|s| {
                (
                    s.dimension.name().to_string(),
                    SpreadEntry {
                        discriminability: s.discriminability,
                        bimodality_coefficient: s.bimodality_coefficient,
                        bimodal_flag: s.bimodal_flag,
                    },
                )
            })
            .collect()
    });
    let deviation = if table.raters.len() >= 2 {
        let mut m = BTreeMap::new();
        for rater in &table.raters {
            let per = rater_deviation(table, rater)?
                .into_iter()
                .map(|(d, v)| (d.name().to_string(), v))
                .collect();
            m.insert(rater.clone(), per);
        }
        Some(m)
    } else {
        None
    };
    Ok(RatingReport {
        statistics: STATISTICS_NOTE,
        raters: table.raters.clone(),
        logos: table.logos.clone(),
        profiles,
        disagreement: (table.raters.len() >= 2).then(|| disagreement_ranking(table)).transpose()?,
        dimension_spread: spread,
        rater_deviation: deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(raters: &[&str], logos: &[&str], f: impl Fn(usize, usize, Dimension) -> i64) -> RatingTable {
        let mut cells = Vec::new();
        for (ri, r) in raters.iter().enumerate() {
            for (li, l) in logos.iter().enumerate() {
                for d in Dimension::ALL {
                    cells.push((r.to_string(), l.to_string(), d, f(ri, li, d)));
                }
            }
        }
        RatingTable::from_cells(cells).unwrap()
    }

    #[test]
    fn eighteen_dimensions_in_four_groups() {
        let mut counts = BTreeMap::new();
        for d in Dimension::ALL {
            *counts.entry(d.group()).or_insert(0) += 1;
            assert_eq!(d.name().parse::<Dimension>().unwrap(), d);
            assert_eq!(Dimension::ALL[d.index()], d);
        }
        assert_eq!(counts[&DimensionGroup::Bertin], 5);
        assert_eq!(counts[&DimensionGroup::LetterStyle], 5);
        assert_eq!(counts[&DimensionGroup::WholeLogo], 5);
        assert_eq!(counts[&DimensionGroup::Graphics], 3);
        assert_eq!("originality".parse::<Dimension>().unwrap(), Dimension::Novelty);
        assert!("Loudness".parse::<Dimension>().is_err());
    }

    #[test]
    fn csv_loading_and_errors() {
        let mut text = String::from("rater,logo,dimension,score\n");
        for r in ["r1", "r2"] {
            for d in Dimension::ALL {
                text.push_str(&format!("{r},L,{d},3\n"));
            }
        }
        let t = load_ratings(text.as_bytes()).unwrap();
        assert_eq!(t.raters(), ["r1", "r2"]);
        assert!(logo_profile(&t, "L").unwrap().iter().all(|s| s.sd == 0.0 && s.mean == 3.0));

        let bad = text.replacen("Thickness,3", "Thickness,6", 1);
        let err = load_ratings(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("r1") && err.contains("Thickness"), "{err}");

        let missing: String = text.lines().filter(|l| *l != "r2,L,Integrity,3").map(|l| format!("{l}\n")).collect();
        let err = load_ratings(missing.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("(r2, L, Integrity)"), "{err}");

        let unknown = format!("{text}r1,L,Loudness,3\n");
        assert!(load_ratings(unknown.as_bytes()).unwrap_err().to_string().contains("Loudness"));

        let dup = format!("{text}r1,L,Size,3\n");
        assert!(load_ratings(dup.as_bytes()).is_err());
        assert!(load_ratings("a,b,c\n".as_bytes()).is_err());
    }

    #[test]
    fn two_rater_split() {
        let t = uniform(&["a", "b"], &["L"], |r, _, _| if r == 0 { 1 } else { 5 });
        for s in logo_profile(&t, "L").unwrap() {
            assert_eq!(s.mean, 3.0);
            assert!((s.sd - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        }
        assert!(rater_deviation(&t, "a").unwrap().iter().all(|&(_, v)| v == 4.0));
        assert!(logo_profile(&t, "nope").is_err());
        assert!(rater_deviation(&t, "nope").is_err());
    }

    #[test]
    fn single_rater_conventions() {
        let t = uniform(&["solo"], &["A", "B"], |_, l, _| 1 + l as i64);
        assert!(logo_profile(&t, "B").unwrap().iter().all(|s| s.sd == 0.0));
        assert!(disagreement_ranking(&t).is_err());
        assert!(rater_deviation(&t, "solo").is_err());
        let report = rating_report(&t).unwrap();
        assert!(report.disagreement.is_none() && report.dimension_spread.is_none());
    }

    #[test]
    fn ranking_order() {
        let t = uniform(&["a", "b"], &["calm", "split"], |r, l, _| if l == 1 && r == 1 { 5 } else { 1 });
        let rank = disagreement_ranking(&t).unwrap();
        assert_eq!(rank[0].logo, "split");
        assert_eq!(rank[1].score, 0.0);
        let flat = uniform(&["a", "b"], &["z", "m", "a"], |_, _, _| 2);
        let ids: Vec<_> = disagreement_ranking(&flat).unwrap().into_iter().map(|d| d.logo).collect();
        assert_eq!(ids, ["a", "m", "z"]);
    }

    #[test]
    fn spread_of_equal_means() {
        let t = uniform(&["a", "b"], &["1", "2", "3", "4"], |_, _, _| 4);
        for s in dimension_spread(&t).unwrap() {
            assert_eq!(s.discriminability, 0.0);
            assert_eq!(s.bimodality_coefficient, None);
            assert_eq!(s.bimodal_flag, None);
        }
        let three = uniform(&["a"], &["1", "2", "3"], |_, l, _| 1 + l as i64);
        assert!(dimension_spread(&three).unwrap().iter().all(|s| s.bimodality_coefficient.is_none()));
        let two = uniform(&["a"], &["1", "2"], |_, _, _| 1);
        assert!(dimension_spread(&two).is_err());
    }

    #[test]
    fn bc_matches_kstat_oracle() {
        let split: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 5.0 }).collect();
        let even: Vec<f64> = (0..20).map(|i| (1 + i % 5) as f64).collect();
        for xs in [&split, &even] {
            let ours = bimodality_coefficient(xs).unwrap();
            let oracle = metalmap_testkit::bimodality_kstat(xs).unwrap();
            assert!((ours - oracle).abs() < 1e-9);
        }
        assert!(bimodality_coefficient(&split).unwrap() > BIMODAL_THRESHOLD);
        assert!(bimodality_coefficient(&even).unwrap() < BIMODAL_THRESHOLD);
    }

    #[test]
    fn report_serializes() {
        let t = uniform(&["a", "b", "c"], &["x", "y", "z", "w"], |r, l, d| 1 + ((r + l + d.index()) % 5) as i64);
        let json = serde_json::to_value(rating_report(&t).unwrap()).unwrap();
        assert!(json["profiles"]["x"]["Integrity"]["sd"].is_number());
        assert!(json["dimension_spread"]["Novelty"]["discriminability"].is_number());
        assert_eq!(json["disagreement"].as_array().unwrap().len(), 4);
    }
}
