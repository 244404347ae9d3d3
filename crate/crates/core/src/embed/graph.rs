//! Bandwidth calibration of kNN distances and fuzzy-union symmetrization.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metrics::NeighborGraph;
use crate::scalar::Real;

/// Lower bound on calibrated bandwidths.
pub const SIGMA_MIN: f64 = 1e-3;
const SEARCH_ITERATIONS: usize = 64;
const SEARCH_TOLERANCE: f64 = 1e-5;

/// Per-node calibration of a neighbor graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedKnn<T> {
    pub k: usize,
    pub ids: Vec<String>,
    /// Distance to the nearest neighbor.
    pub rho: Vec<T>,
    pub sigma: Vec<T>,
    /// True where the bandwidth search could not reach `log2(k)` above
    /// `SIGMA_MIN` and sigma was clamped.
    pub clamped: Vec<bool>,
    /// Directed `(neighbor, weight)` pairs, same order as the input graph.
    pub weights: Vec<Vec<(usize, T)>>,
}

fn membership<T: Real>(d: T, rho: T, sigma: T) -> T {
    let excess = (d - rho).max(T::zero());
    (-excess / sigma).exp()
}

/// Finds sigma per node with `sum_j exp(-max(0, d_ij - rho_i) / sigma) = log2(k)`
/// by bisection (doubling while no upper bound is known).
pub fn smooth_knn<T: Real>(graph: &NeighborGraph<T>) -> Result<SmoothedKnn<T>> {
    if graph.k < 2 {
        return Err(Error::invalid("bandwidth calibration needs k >= 2"));
    }
    let target = T::from_usize_lossy(graph.k).log2();
    let tol = T::c(SEARCH_TOLERANCE);
    let sigma_min = T::c(SIGMA_MIN);
    let two = T::c(2.0);

    let n = graph.n();
    let mut rho = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut clamped = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);

    for row in &graph.neighbors {
        let r = row.first().map(|&(_, d)| d).unwrap_or_else(T::zero);
        let sum_at = |s: T| row.iter().map(|&(_, d)| membership(d, r, s)).sum::<T>();

        let (mut lo, mut hi, mut mid) = (T::zero(), T::infinity(), T::one());
        for _ in 0..SEARCH_ITERATIONS {
            let total = sum_at(mid);
            if (total - target).abs() < tol {
                break;
            }
            if total > target {
                hi = mid;
                mid = (lo + hi) / two;
            } else {
                lo = mid;
                mid = if hi.is_infinite() { mid * two } else { (lo + hi) / two };
            }
        }
        let is_clamped = mid < sigma_min;
        let s = if is_clamped { sigma_min } else { mid };
        weights.push(row.iter().map(|&(j, d)| (j, membership(d, r, s))).collect());
        rho.push(r);
        sigma.push(s);
        clamped.push(is_clamped);
    }

    Ok(SmoothedKnn {
        k: graph.k,
        ids: graph.ids.clone(),
        rho,
        sigma,
        clamped,
        weights,
    })
}

/// Undirected weighted graph; edges `(i, j, w)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph<T> {
    pub ids: Vec<String>,
    pub edges: Vec<(usize, usize, T)>,
}

impl<T: Real> FuzzyGraph<T> {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Symmetric membership lookup, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> T {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|pos| self.edges[pos].2)
            .unwrap_or_else(|_| T::zero())
    }
}

/// Probabilistic t-conorm `p + q - p q` over both edge directions.
pub fn fuzzy_union<T: Real>(smoothed: &SmoothedKnn<T>) -> FuzzyGraph<T> {
    let mut pairs: BTreeMap<(usize, usize), (T, T)> = BTreeMap::new();
    for (i, row) in smoothed.weights.iter().enumerate() {
        for &(j, w) in row {
            if i == j {
                continue;
            }
            let entry = pairs.entry((i.min(j), i.max(j))).or_insert((T::zero(), T::zero()));
            if i < j {
                entry.0 = w;
            } else {
                entry.1 = w;
            }
        }
    }
    let edges = pairs
        .into_iter()
        .filter_map(|((i, j), (p, q))| {
            let w = combine(p, q);
            (w > T::zero()).then_some((i, j, w))
        })
        .collect();
    FuzzyGraph {
        ids: smoothed.ids.clone(),
        edges,
    }
}

pub(crate) fn combine<T: Real>(p: T, q: T) -> T {
    p + q - p * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(rows: Vec<Vec<(usize, f64)>>, k: usize) -> NeighborGraph<f64> {
        NeighborGraph {
            k,
            ids: (0..rows.len()).map(|i| format!("n{i}")).collect(),
            neighbors: rows,
        }
    }

    #[test]
    fn nearest_weight_is_one() {
        let g = graph(vec![vec![(1, 0.7), (2, 1.5), (3, 2.0)]; 4], 3);
        let s = smooth_knn(&g).unwrap();
        assert_eq!(s.rho[0], 0.7);
        assert_eq!(s.weights[0][0].1, 1.0);
        let total: f64 = s.weights[0].iter().map(|w| w.1).sum();
        assert!((total - 3f64.log2()).abs() < 1e-3);
        assert!(!s.clamped[0]);
    }

    #[test]
    fn equidistant_neighbors_clamp() {
        let g = graph(vec![vec![(1, 2.0), (2, 2.0), (3, 2.0)]; 4], 3);
        let s = smooth_knn(&g).unwrap();
        assert!(s.clamped.iter().all(|&c| c));
        assert!(s.sigma.iter().all(|&v| v == SIGMA_MIN));
        assert!(s.weights.iter().flatten().all(|&(_, w)| w == 1.0));
    }

    #[test]
    fn k_one_rejected() {
        assert!(smooth_knn(&graph(vec![vec![(1, 1.0)], vec![(0, 1.0)]], 1)).is_err());
    }

    #[test]
    fn union_formula() {
        assert_eq!(combine(1.0, 0.0), 1.0);
        assert_eq!(combine(0.5, 0.5), 0.75);
        let s = SmoothedKnn {
            k: 2,
            ids: vec!["a".into(), "b".into(), "c".into()],
            rho: vec![0.0; 3],
            sigma: vec![1.0; 3],
            clamped: vec![false; 3],
            weights: vec![vec![(1, 0.5), (2, 0.0)], vec![(0, 0.5)], vec![(0, 0.0)]],
        };
        let f = fuzzy_union(&s);
        assert_eq!(f.edges, vec![(0, 1, 0.75)]);
        assert_eq!(f.weight(1, 0), 0.75);
        assert_eq!(f.weight(0, 2), 0.0);
    }

    proptest! {
        #[test]
        fn union_bounds(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let w = combine(p, q);
            prop_assert!(w >= p.max(q) - 1e-15);
            prop_assert!(w <= (p + q).min(1.0) + 1e-15);
        }
    }
}
