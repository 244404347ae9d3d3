//! Least-squares fit of the low-dimensional membership curve
//! `1 / (1 + a d^(2b))` to the offset exponential target.

use crate::error::{Error, Result};

const SAMPLES: usize = 300;
const CONVERGENCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 500;

fn sample_grid(spread: f64) -> Vec<f64> {
    (0..SAMPLES)
        .map(|i| 3.0 * spread * i as f64 / (SAMPLES - 1) as f64)
        .collect()
}

/// Target membership: 1 up to `min_dist`, exponential decay after.
pub fn target_membership(d: f64, min_dist: f64, spread: f64) -> f64 {
    if d <= min_dist {
        1.0
    } else {
        (-(d - min_dist) / spread).exp()
    }
}

pub fn curve(d: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * d.powf(2.0 * b))
}

/// RMSE of the curve against the target on the 300-point sample grid.
pub fn fit_rmse(a: f64, b: f64, min_dist: f64, spread: f64) -> f64 {
    let xs = sample_grid(spread);
    rmse(&xs, a, b, min_dist, spread)
}

fn rmse(xs: &[f64], a: f64, b: f64, min_dist: f64, spread: f64) -> f64 {
    let sse: f64 = xs
        .iter()
        .map(|&d| {
            let r = curve(d, a, b) - target_membership(d, min_dist, spread);
            r * r
        })
        .sum();
    (sse / xs.len() as f64).sqrt()
}

/// Coarse grid search over `(a, b)` followed by damped Gauss-Newton
/// (Levenberg-Marquardt) until successive RMSE values differ by < 1e-8.
pub fn fit_ab(min_dist: f64, spread: f64) -> Result<(f64, f64)> {
    if !(min_dist > 0.0 && min_dist <= spread && spread.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < min_dist <= spread, got min_dist={min_dist}, spread={spread}"
        )));
    }
    let xs = sample_grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&d| target_membership(d, min_dist, spread)).collect();

    let mut best = (1.0, 1.0, f64::INFINITY);
    for ia in 0..60 {
        let a = 10f64.powf(-2.0 + 4.0 * ia as f64 / 59.0);
        for ib in 0..60 {
            let b = 0.1 + 2.9 * ib as f64 / 59.0;
            let r = rmse(&xs, a, b, min_dist, spread);
            if r < best.2 {
                best = (a, b, r);
            }
        }
    }

    let (mut a, mut b, mut current) = best;
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        // normal equations J^T J delta = -J^T r
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&d, &y) in xs.iter().zip(&ys) {
            let u = if d > 0.0 { d.powf(2.0 * b) } else { 0.0 };
            let denom = 1.0 + a * u;
            let r = 1.0 / denom - y;
            let da = -u / (denom * denom);
            let db = if d > 0.0 { -a * u * 2.0 * d.ln() / (denom * denom) } else { 0.0 };
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        jtj[1][0] = jtj[0][1];

        let mut accepted = None;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < f64::MIN_POSITIVE {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let step_b = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + step_a, b + step_b);
            if na > 0.0 && nb > 0.0 {
                let r = rmse(&xs, na, nb, min_dist, spread);
                if r <= current {
                    accepted = Some((na, nb, r));
                    lambda = (lambda / 10.0).max(1e-12);
                    break;
                }
            }
            lambda *= 10.0;
        }
        match accepted {
            Some((na, nb, r)) => {
                let improvement = current - r;
                a = na;
                b = nb;
                current = r;
                if improvement < CONVERGENCE {
                    return Ok((a, b));
                }
            }
            // no damped step improves: stationary at this precision
            None => return Ok((a, b)),
        }
    }
    Err(Error::FitDiverged { a, b, rmse: current })
}
