//! Neighbor-graph embedding into the plane.
//!
//! The pipeline is: exact kNN graph, per-node bandwidth calibration
//! ([`smooth_knn`]), fuzzy-union symmetrization ([`fuzzy_union`]), curve
//! parameters from `min_dist`/`spread` ([`fit_ab`]), and sampled SGD
//! ([`optimize_layout`]). The optimizer loop is sequential so a seed fully
//! determines the output.

mod curve;
mod graph;
mod layout;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::metrics::{knn_graph, Metric};
use crate::scalar::Real;

pub use curve::{curve, fit_ab, fit_rmse, target_membership};
pub use graph::{fuzzy_union, smooth_knn, FuzzyGraph, SmoothedKnn, SIGMA_MIN};
pub use layout::{optimize_layout, Layout2D, GRADIENT_CLIP, INIT_EXTENT, REPULSION_GUARD};

/// Initialization recorded in provenance.
pub const INIT_METHOD: &str = "uniform";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams<T> {
    pub k: usize,
    pub min_dist: T,
    pub spread: T,
    pub n_epochs: usize,
    pub negative_samples: usize,
    pub initial_lr: T,
    pub seed: u64,
    /// Curve parameters; fitted from `min_dist`/`spread` when `None`.
    pub a: Option<T>,
    pub b: Option<T>,
}

impl<T: Real> Default for EmbedParams<T> {
    fn default() -> Self {
        EmbedParams {
            k: 15,
            min_dist: T::c(0.1),
            spread: T::one(),
            n_epochs: 500,
            negative_samples: 5,
            initial_lr: T::one(),
            seed: 0,
            a: None,
            b: None,
        }
    }
}

impl<T: Real> EmbedParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("k must be at least 2"));
        }
        if !(self.min_dist > T::zero() && self.min_dist <= self.spread) {
            return Err(Error::invalid("need 0 < min_dist <= spread"));
        }
        if self.n_epochs == 0 {
            return Err(Error::invalid("n_epochs must be at least 1"));
        }
        if !(self.initial_lr.is_finite() && self.initial_lr >= T::zero()) {
            return Err(Error::invalid("initial_lr must be finite and non-negative"));
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if let Some(v) = v {
                if !(v > T::zero() && v.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// `(a, b)` from the overrides, falling back to a fit per missing value.
    pub fn curve(&self) -> Result<(T, T)> {
        match (self.a, self.b) {
            (Some(a), Some(b)) => Ok((a, b)),
            (a, b) => {
                let (fa, fb) = fit_ab(self.min_dist.as_f64(), self.spread.as_f64())?;
                Ok((a.unwrap_or(T::c(fa)), b.unwrap_or(T::c(fb))))
            }
        }
    }

    /// Copy with `a` and `b` filled in.
    pub fn resolved(&self) -> Result<Self> {
        let (a, b) = self.curve()?;
        Ok(EmbedParams {
            a: Some(a),
            b: Some(b),
            ..self.clone()
        })
    }
}

/// Output of [`embed`]: the layout plus what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    pub layout: Layout2D<T>,
    pub metric: Metric,
    /// Parameters with the curve resolved.
    pub params: EmbedParams<T>,
}

pub fn embed<T: Real>(features: &FeatureSet<T>, metric: Metric, params: &EmbedParams<T>) -> Result<Embedding<T>> {
    params.validate()?;
    let params = params.resolved()?;
    let graph = knn_graph(features, metric, params.k)?;
    let smoothed = smooth_knn(&graph)?;
    let fuzzy = fuzzy_union(&smoothed);
    let layout = optimize_layout(&fuzzy, &params)?;
    Ok(Embedding {
        layout,
        metric,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    fn blobs(n_per: usize, seed: u64) -> (FeatureSet<f64>, Vec<usize>) {
        let mut rng = metalmap_testkit::SplitMix(seed);
        let centers = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 5.0]];
        let mut set = FeatureSet::new(FeatureKind::Latent, 3).unwrap();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for i in 0..n_per {
                let v = center.iter().map(|&m| m + rng.unit() - 0.5).collect();
                set.insert(format!("c{c}-{i}"), v).unwrap();
                labels.push(c);
            }
        }
        (set, labels)
    }

    fn quick(seed: u64) -> EmbedParams<f64> {
        EmbedParams {
            k: 5,
            n_epochs: 60,
            seed,
            ..EmbedParams::default()
        }
    }

    #[test]
    fn same_seed_same_layout() {
        let (set, _) = blobs(10, 1);
        let a = embed(&set, Metric::Euclidean, &quick(3)).unwrap();
        let b = embed(&set, Metric::Euclidean, &quick(3)).unwrap();
        assert_eq!(a.layout, b.layout);
        let c = embed(&set, Metric::Euclidean, &quick(4)).unwrap();
        assert_ne!(a.layout, c.layout);
    }

    #[test]
    fn minimal_corpus() {
        let (set, _) = blobs(1, 2);
        let params = EmbedParams {
            k: 2,
            n_epochs: 5,
            ..EmbedParams::default()
        };
        let e = embed(&set, Metric::Euclidean, &params).unwrap();
        assert_eq!(e.layout.len(), 3);
        assert!(e.layout.coords.iter().flatten().all(|v| v.is_finite()));
        assert!(e.params.a.is_some() && e.params.b.is_some());
    }

    #[test]
    fn single_epoch_stays_in_bounds() {
        let (set, _) = blobs(8, 5);
        let params = EmbedParams {
            k: 4,
            n_epochs: 1,
            negative_samples: 50,
            ..EmbedParams::default()
        };
        let e = embed(&set, Metric::Euclidean, &params).unwrap();
        // every node fires at most a handful of times with |step| <= lr * 4
        for p in &e.layout.coords {
            assert!(p.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn separates_blobs() {
        let (set, labels) = blobs(30, 9);
        let params = EmbedParams {
            k: 8,
            n_epochs: 200,
            seed: 11,
            ..EmbedParams::default()
        };
        let e = embed(&set, Metric::Euclidean, &params).unwrap();
        let pts: Vec<[f64; 2]> = e.layout.coords.clone();
        assert!(metalmap_testkit::silhouette(&pts, &labels) > 0.5);
    }

    #[test]
    fn generic_over_f32() {
        let mut set = FeatureSet::<f32>::new(FeatureKind::Latent, 2).unwrap();
        for i in 0..12 {
            set.insert(format!("p{i}"), vec![(i % 3) as f32 * 5.0, i as f32 * 0.1]).unwrap();
        }
        let params = EmbedParams::<f32> {
            k: 3,
            n_epochs: 30,
            ..EmbedParams::default()
        };
        let e = embed(&set, Metric::Euclidean, &params).unwrap();
        assert!(e.layout.coords.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn param_validation() {
        let bad = [
            EmbedParams::<f64> { k: 1, ..Default::default() },
            EmbedParams { min_dist: 0.0, ..Default::default() },
            EmbedParams { min_dist: 2.0, ..Default::default() },
            EmbedParams { n_epochs: 0, ..Default::default() },
            EmbedParams { a: Some(-1.0), ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        let manual = EmbedParams::<f64> { a: Some(2.0), b: Some(0.5), ..Default::default() };
        assert_eq!(manual.curve().unwrap(), (2.0, 0.5));
    }
}
