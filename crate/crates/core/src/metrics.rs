//! Pairwise distances and exact k-nearest-neighbor graphs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureSet};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `2(b+c) / (a + d + 2(b+c))` over binary vectors.
    SokalMichener,
    /// Simple-matching distance `(b+c) / n` over binary vectors.
    SimpleMatching,
    L1,
    Euclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SokalMichener => "sokal_michener",
            Metric::SimpleMatching => "simple_matching",
            Metric::L1 => "l1",
            Metric::Euclidean => "euclidean",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Metric::SokalMichener | Metric::SimpleMatching)
    }

    /// Conventional metric for a feature family.
    pub fn default_for(kind: FeatureKind) -> Metric {
        match kind {
            FeatureKind::Histogram => Metric::L1,
            FeatureKind::Thumbnail | FeatureKind::Latent => Metric::Euclidean,
            FeatureKind::Tag => Metric::SokalMichener,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "sokal_michener" => Ok(Metric::SokalMichener),
            "simple_matching" | "sokal_michener_classical" => Ok(Metric::SimpleMatching),
            "l1" | "manhattan" => Ok(Metric::L1),
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

fn check_len(u: usize, v: usize) -> Result<()> {
    if u != v {
        return Err(Error::DimensionMismatch {
            expected: u,
            actual: v,
        });
    }
    Ok(())
}

/// Agreement counts `(a, b, c, d)` = (#11, #10, #01, #00).
fn agreement(u: &[bool], v: &[bool]) -> (usize, usize, usize, usize) {
    let mut counts = (0, 0, 0, 0);
    for (&x, &y) in u.iter().zip(v) {
        match (x, y) {
            (true, true) => counts.0 += 1,
            (true, false) => counts.1 += 1,
            (false, true) => counts.2 += 1,
            (false, false) => counts.3 += 1,
        }
    }
    counts
}

pub fn sokal_michener<T: Real>(u: &[bool], v: &[bool]) -> Result<T> {
    check_len(u.len(), v.len())?;
    if u.is_empty() {
        return Err(Error::invalid("binary vectors must be non-empty"));
    }
    let (a, b, c, d) = agreement(u, v);
    let mismatch = 2 * (b + c);
    if mismatch == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_usize_lossy(mismatch) / T::from_usize_lossy(a + d + mismatch))
}

pub fn simple_matching<T: Real>(u: &[bool], v: &[bool]) -> Result<T> {
    check_len(u.len(), v.len())?;
    if u.is_empty() {
        return Err(Error::invalid("binary vectors must be non-empty"));
    }
    let (_, b, c, _) = agreement(u, v);
    Ok(T::from_usize_lossy(b + c) / T::from_usize_lossy(u.len()))
}

pub fn l1_distance<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    check_len(u.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(&x, &y)| (x - y).abs()).sum())
}

pub fn euclidean_distance<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    check_len(u.len(), v.len())?;
    Ok(u.iter()
        .zip(v)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt())
}

/// Reads a real vector as binary; only exact 0 and 1 are accepted.
pub fn as_binary<T: Real>(v: &[T]) -> Option<Vec<bool>> {
    v.iter()
        .map(|&x| {
            if x == T::one() {
                Some(true)
            } else if x == T::zero() {
                Some(false)
            } else {
                None
            }
        })
        .collect()
}

/// Exact neighbor lists. Row `i` holds `k` `(index, distance)` pairs sorted
/// by ascending distance, ties by ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph<T> {
    pub k: usize,
    pub ids: Vec<String>,
    pub neighbors: Vec<Vec<(usize, T)>>,
}

impl<T> NeighborGraph<T> {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

fn by_distance_then_index<T: Real>(a: &(usize, T), b: &(usize, T)) -> Ordering {
    a.1.partial_cmp(&b.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// Brute-force kNN. Rows are computed in parallel; each row is a pure
/// function of the input so the result matches a sequential run.
pub fn knn_graph<T: Real>(features: &FeatureSet<T>, metric: Metric, k: usize) -> Result<NeighborGraph<T>> {
    let n = features.len();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::invalid(format!("k = {k} requires more than {k} items, got {n}")));
    }
    let vectors = features.vectors();

    let binary: Option<Vec<Vec<bool>>> = if metric.is_binary() {
        if features.kind() != FeatureKind::Tag {
            return Err(Error::MetricMismatch {
                metric: metric.to_string(),
                kind: features.kind().to_string(),
                reason: "binary metrics require tag features".into(),
            });
        }
        let converted: Option<Vec<Vec<bool>>> = vectors.iter().map(|v| as_binary(v)).collect();
        match converted {
            Some(b) => Some(b),
            None => {
                return Err(Error::MetricMismatch {
                    metric: metric.to_string(),
                    kind: features.kind().to_string(),
                    reason: "vectors contain values other than 0 and 1".into(),
                })
            }
        }
    } else {
        None
    };

    let distance = |i: usize, j: usize| -> T {
        match (metric, &binary) {
            (Metric::SokalMichener, Some(b)) => sokal_michener(&b[i], &b[j]),
            (Metric::SimpleMatching, Some(b)) => simple_matching(&b[i], &b[j]),
            (Metric::L1, _) => l1_distance(&vectors[i], &vectors[j]),
            (Metric::Euclidean, _) => euclidean_distance(&vectors[i], &vectors[j]),
            _ => unreachable!("binary vectors prepared for binary metrics"),
        }
        .expect("feature set vectors share one dimension")
    };

    let neighbors = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(usize, T)> = (0..n).filter(|&j| j != i).map(|j| (j, distance(i, j))).collect();
            row.sort_by(by_distance_then_index);
            row.truncate(k);
            row
        })
        .collect();

    Ok(NeighborGraph {
        k,
        ids: features.ids().to_vec(),
        neighbors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&x| x == 1).collect()
    }

    #[test]
    fn sokal_michener_hand_cases() {
        let u = bits(&[1, 0, 1, 0]);
        let v = bits(&[1, 1, 0, 0]);
        let d: f64 = sokal_michener(&u, &v).unwrap();
        assert!((d - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(sokal_michener::<f64>(&u, &u).unwrap(), 0.0);
        let comp: Vec<bool> = u.iter().map(|b| !b).collect();
        assert_eq!(sokal_michener::<f64>(&u, &comp).unwrap(), 1.0);
        assert_eq!(simple_matching::<f64>(&u, &v).unwrap(), 0.5);
        assert_eq!(simple_matching::<f64>(&u, &comp).unwrap(), 1.0);
        assert!(sokal_michener::<f64>(&u, &v[..3]).is_err());
    }

    #[test]
    fn real_metrics() {
        assert_eq!(l1_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(l1_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(euclidean_distance(&[0.0f32], &[1.0, 2.0]).is_err());
    }

    fn line_set(xs: &[f64]) -> FeatureSet<f64> {
        let mut set = FeatureSet::new(FeatureKind::Latent, 1).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            set.insert(format!("p{i}"), vec![x]).unwrap();
        }
        set
    }

    #[test]
    fn collinear_knn() {
        let g = knn_graph(&line_set(&[0.0, 1.0, 3.0]), Metric::Euclidean, 1).unwrap();
        let firsts: Vec<usize> = g.neighbors.iter().map(|r| r[0].0).collect();
        assert_eq!(firsts, vec![1, 0, 1]);
        assert_eq!(g.neighbors[2][0].1, 2.0);
    }

    #[test]
    fn duplicates_are_mutual_neighbors() {
        let g = knn_graph(&line_set(&[5.0, 0.0, 5.0, 9.0]), Metric::L1, 1).unwrap();
        assert_eq!(g.neighbors[0][0], (2, 0.0));
        assert_eq!(g.neighbors[2][0], (0, 0.0));
    }

    #[test]
    fn knn_preconditions() {
        let set = line_set(&[0.0, 1.0]);
        assert!(knn_graph(&set, Metric::L1, 2).is_err());
        assert!(matches!(
            knn_graph(&set, Metric::SokalMichener, 1),
            Err(Error::MetricMismatch { .. })
        ));
        let mut tags = FeatureSet::new(FeatureKind::Tag, 2).unwrap();
        tags.insert("a", vec![1.0, 0.5]).unwrap();
        tags.insert("b", vec![1.0, 0.0]).unwrap();
        assert!(knn_graph(&tags, Metric::SokalMichener, 1).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        let g = knn_graph(&line_set(&[0.0, 1.0, -1.0, 2.0]), Metric::Euclidean, 2).unwrap();
        assert_eq!(g.neighbors[0], vec![(1, 1.0), (2, 1.0)]);
    }

    proptest! {
        #[test]
        fn binary_metric_axioms(pair in (1usize..40).prop_flat_map(|n| (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        ))) {
            let (u, v) = pair;
            for f in [sokal_michener::<f64>, simple_matching::<f64>] {
                let d = f(&u, &v).unwrap();
                prop_assert_eq!(d, f(&v, &u).unwrap());
                prop_assert_eq!(f(&u, &u).unwrap(), 0.0);
                prop_assert!((0.0..=1.0).contains(&d));
            }
            let (a, _, _, d) = agreement(&u, &v);
            prop_assert_eq!(sokal_michener::<f64>(&u, &v).unwrap() == 1.0, a + d == 0);
        }

        #[test]
        fn real_metric_axioms(pair in (1usize..30).prop_flat_map(|n| (
            proptest::collection::vec(-1e3f64..1e3, n),
            proptest::collection::vec(-1e3f64..1e3, n),
        ))) {
            let (u, v) = pair;
            for f in [l1_distance::<f64>, euclidean_distance::<f64>] {
                let d = f(&u, &v).unwrap();
                prop_assert!(d >= 0.0);
                prop_assert_eq!(d, f(&v, &u).unwrap());
                prop_assert_eq!(f(&u, &u).unwrap(), 0.0);
            }
        }
    }
}
