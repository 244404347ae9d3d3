//! Stochastic layout optimization with negative sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::FuzzyGraph;
use super::EmbedParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const INIT_EXTENT: f64 = 10.0;
pub const GRADIENT_CLIP: f64 = 4.0;
pub const REPULSION_GUARD: f64 = 0.001;

/// Continuous 2-D coordinates per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout2D<T> {
    pub ids: Vec<String>,
    pub coords: Vec<[T; 2]>,
}

impl<T: Real> Layout2D<T> {
    pub fn new(ids: Vec<String>, coords: Vec<[T; 2]>) -> Result<Self> {
        if ids.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                actual: coords.len(),
            });
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("layout coordinates must be finite"));
        }
        Ok(Layout2D { ids, coords })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn to_f64(&self) -> Layout2D<f64> {
        Layout2D {
            ids: self.ids.clone(),
            coords: self.coords.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect(),
        }
    }
}

fn clip<T: Real>(v: T) -> T {
    let c = T::c(GRADIENT_CLIP);
    v.max(-c).min(c)
}

/// Runs SGD over the fuzzy graph.
///
/// Random draws, all from one ChaCha8 stream seeded with `params.seed`:
/// 1. initial coordinates, node by node, x then y, uniform in [-10, 10);
/// 2. per epoch, per edge `(i, j)` in stored order, when the edge fires:
///    `negative_samples` node draws for head `i`, then as many for head `j`.
///
/// An edge's counter grows by `w / max_w` each epoch and the edge fires (and
/// the counter drops by one) once it reaches 1. A firing moves each endpoint
/// toward the other, then pushes it away from its negative samples.
/// The learning rate in epoch `e` is `initial_lr * (1 - e / n_epochs)`.
pub fn optimize_layout<T: Real>(graph: &FuzzyGraph<T>, params: &EmbedParams<T>) -> Result<Layout2D<T>> {
    params.validate()?;
    let n = graph.n();
    if n == 0 {
        return Err(Error::invalid("cannot lay out an empty graph"));
    }
    let (a, b) = params.curve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let extent = T::c(INIT_EXTENT);
    let mut coords: Vec<[T; 2]> = (0..n)
        .map(|_| {
            let x = T::c(rng.random::<f64>()) * (extent + extent) - extent;
            let y = T::c(rng.random::<f64>()) * (extent + extent) - extent;
            [x, y]
        })
        .collect();

    let max_w = graph
        .edges
        .iter()
        .map(|e| e.2)
        .fold(T::zero(), |m, w| if w > m { w } else { m });
    if max_w <= T::zero() {
        return Layout2D::new(graph.ids.clone(), coords);
    }
    let rates: Vec<T> = graph.edges.iter().map(|e| e.2 / max_w).collect();
    let mut counters = vec![T::zero(); graph.edges.len()];

    let two = T::c(2.0);
    let guard = T::c(REPULSION_GUARD);
    let epochs = T::from_usize_lossy(params.n_epochs);

    for epoch in 0..params.n_epochs {
        let lr = params.initial_lr * (T::one() - T::from_usize_lossy(epoch) / epochs);
        for (e, &(i, j, _)) in graph.edges.iter().enumerate() {
            counters[e] += rates[e];
            if counters[e] < T::one() {
                continue;
            }
            counters[e] -= T::one();

            for (head, tail) in [(i, j), (j, i)] {
                // attraction
                let dx = coords[head][0] - coords[tail][0];
                let dy = coords[head][1] - coords[tail][1];
                let dsq = dx * dx + dy * dy;
                if dsq > T::zero() {
                    let coeff = -two * a * b * dsq.powf(b - T::one()) / (T::one() + a * dsq.powf(b));
                    coords[head][0] += lr * clip(coeff * dx);
                    coords[head][1] += lr * clip(coeff * dy);
                }
                // repulsion
                for _ in 0..params.negative_samples {
                    let other = rng.random_range(0..n);
                    if other == head {
                        continue;
                    }
                    let dx = coords[head][0] - coords[other][0];
                    let dy = coords[head][1] - coords[other][1];
                    let dsq = dx * dx + dy * dy;
                    let coeff = two * b / ((guard + dsq) * (T::one() + a * dsq.powf(b)));
                    coords[head][0] += lr * clip(coeff * dx);
                    coords[head][1] += lr * clip(coeff * dy);
                }
            }
        }
    }

    Layout2D::new(graph.ids.clone(), coords)
}
