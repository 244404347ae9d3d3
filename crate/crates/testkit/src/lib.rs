//! Independent oracles and fixtures shared by the metalmap test suites.
//!
//! Nothing in here depends on the `metalmap` crate. Every routine recomputes
//! its quantity by a different path than the production code (brute force,
//! recursion, k-statistics, dense grid search) so a test that compares the
//! two is a real cross-check.

use std::collections::HashMap;
use std::path::PathBuf;

/// Absolute path of a file in `crates/testkit/fixtures`.
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Least-squares (a, b) for min_dist = 0.1, spread = 1.0 as produced by
/// `scipy.optimize.curve_fit(lambda x, a, b: 1 / (1 + a * x ** (2 * b)), xv, yv)`
/// with `xv = np.linspace(0, 3, 300)`. Computed once outside this repository
/// and frozen here; RMSE at this optimum is 0.016190.
pub const SCIPY_AB_MIN_DIST_0_1: (f64, f64) = (1.5769434602697652, 0.8950608778515733);
pub const SCIPY_RMSE_MIN_DIST_0_1: f64 = 0.01619005024349704;

// ---------------------------------------------------------------------------
// Curve fitting oracle
// ---------------------------------------------------------------------------

fn target_curve(d: f64, min_dist: f64, spread: f64) -> f64 {
    if d <= min_dist {
        1.0
    } else {
        (-(d - min_dist) / spread).exp()
    }
}

/// RMSE of `1 / (1 + a d^(2b))` against the piecewise target over 300
/// evenly spaced samples of `[0, 3 * spread]`.
pub fn curve_rmse(a: f64, b: f64, min_dist: f64, spread: f64) -> f64 {
    let n = 300;
    let mut acc = 0.0;
    for i in 0..n {
        let d = 3.0 * spread * i as f64 / (n - 1) as f64;
        let phi = 1.0 / (1.0 + a * d.powf(2.0 * b));
        let r = phi - target_curve(d, min_dist, spread);
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

/// Dense two-stage grid search for the least-squares (a, b). Slow and
/// derivative-free on purpose.
pub fn least_squares_grid(min_dist: f64, spread: f64) -> (f64, f64, f64) {
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for ia in 0..400 {
        let a = (0.01f64.ln() + (100.0f64.ln() - 0.01f64.ln()) * ia as f64 / 399.0).exp();
        for ib in 0..400 {
            let b = 0.05 + 3.0 * ib as f64 / 399.0;
            let r = curve_rmse(a, b, min_dist, spread);
            if r < best.2 {
                best = (a, b, r);
            }
        }
    }
    // refine around the coarse winner
    let (a0, b0) = (best.0, best.1);
    for ia in 0..200 {
        let a = a0 * (0.95 + 0.1 * ia as f64 / 199.0);
        for ib in 0..200 {
            let b = b0 * (0.95 + 0.1 * ib as f64 / 199.0);
            let r = curve_rmse(a, b, min_dist, spread);
            if r < best.2 {
                best = (a, b, r);
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Hilbert curve oracle
// ---------------------------------------------------------------------------

/// Enumerates the order-`r` Hilbert curve by recursive quadrant assembly:
/// transpose in the lower-left, translate into the two upper quadrants,
/// anti-transpose in the lower-right. Starts at (0,0), first step (0,1),
/// ends at (2^r - 1, 0).
pub fn hilbert_enumerate(r: u32) -> Vec<(u32, u32)> {
    if r == 0 {
        return vec![(0, 0)];
    }
    let prev = hilbert_enumerate(r - 1);
    let s = 1u32 << (r - 1);
    let mut out = Vec::with_capacity(prev.len() * 4);
    out.extend(prev.iter().map(|&(x, y)| (y, x)));
    out.extend(prev.iter().map(|&(x, y)| (x, y + s)));
    out.extend(prev.iter().map(|&(x, y)| (x + s, y + s)));
    out.extend(prev.iter().map(|&(x, y)| (2 * s - 1 - y, s - 1 - x)));
    out
}

// ---------------------------------------------------------------------------
// Statistics oracles
// ---------------------------------------------------------------------------

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n-1 divisor, two-pass.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Bimodality coefficient from Fisher k-statistics built on raw power sums.
/// `G1 = k3 / k2^1.5`, `G2 = k4 / k2^2`. Returns `None` when n < 4 or the
/// variance is zero.
pub fn bimodality_kstat(xs: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 4 {
        return None;
    }
    let s1: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x * x).sum();
    let s3: f64 = xs.iter().map(|x| x * x * x).sum();
    let s4: f64 = xs.iter().map(|x| x * x * x * x).sum();
    let k2 = (n * s2 - s1 * s1) / (n * (n - 1.0));
    if k2.abs() < 1e-15 {
        return None;
    }
    let k3 = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
    let k4 = (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2
        - 4.0 * n * (n + 1.0) * s1 * s3
        + n * n * (n + 1.0) * s4)
        / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    let g1 = k3 / k2.powf(1.5);
    let g2 = k4 / (k2 * k2);
    Some((g1 * g1 + 1.0) / (g2 + 3.0 * (n - 1.0).powi(2) / ((n - 2.0) * (n - 3.0))))
}

/// Mean silhouette over all points, Euclidean distance in 2-D.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    assert_eq!(points.len(), labels.len());
    let n = points.len();
    let n_labels = labels.iter().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; n_labels];
        let mut counts = vec![0usize; n_labels];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            sums[labels[j]] += (dx * dx + dy * dy).sqrt();
            counts[labels[j]] += 1;
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue; // singleton cluster contributes 0
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..n_labels)
            .filter(|&l| l != own && counts[l] > 0)
            .map(|l| sums[l] / counts[l] as f64)
            .fold(f64::INFINITY, f64::min);
        let s = (b - a) / a.max(b);
        total += if s.is_finite() { s } else { 0.0 };
    }
    total / n as f64
}

/// Fuzzy set cross-entropy between high-dimensional memberships `v` and the
/// low-dimensional curve `1 / (1 + a d^(2b))`, summed over the given pairs.
pub fn fuzzy_cross_entropy(points: &[[f64; 2]], pairs: &[(usize, usize, f64)], a: f64, b: f64) -> f64 {
    const EPS: f64 = 1e-12;
    pairs
        .iter()
        .map(|&(i, j, v)| {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let d2 = dx * dx + dy * dy;
            let w = 1.0 / (1.0 + a * d2.powf(b));
            let w = w.clamp(EPS, 1.0 - EPS);
            -v * w.ln() - (1.0 - v) * (1.0 - w).ln()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Distance / kNN oracles
// ---------------------------------------------------------------------------

pub fn naive_euclidean(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        let d = u[i] - v[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Exhaustive kNN with (distance, index) ordering from a full distance matrix.
pub fn naive_knn(dist: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = dist.len();
    (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, dist[i][j])).collect();
            // insertion sort: slow, obviously correct
            for a in 1..row.len() {
                let mut b = a;
                while b > 0 {
                    let (j0, d0) = row[b - 1];
                    let (j1, d1) = row[b];
                    if d1 < d0 || (d1 == d0 && j1 < j0) {
                        row.swap(b - 1, b);
                        b -= 1;
                    } else {
                        break;
                    }
                }
            }
            row.truncate(k);
            row
        })
        .collect()
}

/// Color histogram recomputed from raw RGBA bytes through a hash map of
/// quantized colors.
pub fn histogram_oracle(rgba: &[u8], bins: usize) -> Vec<f64> {
    let mut counts: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut total = 0usize;
    for px in rgba.chunks(4) {
        if px[3] < 128 {
            continue;
        }
        let q = |v: u8| (v as usize * bins) / 256;
        *counts.entry((q(px[0]), q(px[1]), q(px[2]))).or_default() += 1;
        total += 1;
    }
    let mut out = vec![0.0; bins * bins * bins];
    for ((r, g, b), c) in counts {
        out[r * bins * bins + g * bins + b] = c as f64 / total as f64;
    }
    out
}

pub fn l1(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

// ---------------------------------------------------------------------------
// Tiny deterministic generator for oracle-side sampling
// ---------------------------------------------------------------------------

/// SplitMix64. Used where a test needs reproducible inputs without sharing
/// the production RNG.
#[derive(Debug, Clone)]
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
