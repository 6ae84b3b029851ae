use std::collections::HashSet;

use super::PhasePoint;
use crate::error::{Error, Result};

/// Box-counting dimension of `points` in phase space: the least-squares slope
/// of `log N(eps)` against `log(1/eps)`, with the RMS residual of the fit.
pub fn box_counting_dimension(points: &[PhasePoint], scales: &[f64]) -> Result<(f64, f64)> {
    let coords: Vec<[f64; 4]> = points.iter().map(|p| [p.x[0], p.x[1], p.xi[0], p.xi[1]]).collect();
    box_counting(&coords, scales)
}

/// Same estimator for points in any fixed dimension.
pub fn box_counting<const D: usize>(points: &[[f64; D]], scales: &[f64]) -> Result<(f64, f64)> {
    if points.len() < 100 {
        return Err(Error::Parameter(format!("box counting needs at least 100 points, got {}", points.len())));
    }
    if scales.len() < 2 || scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter("need at least two positive scales".into()));
    }
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().copied().fold(0.0, f64::max);
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!("scales must span a decade, got [{lo}, {hi}]")));
    }
    let mut origin = [f64::INFINITY; D];
    for p in points {
        for d in 0..D {
            if !p[d].is_finite() {
                return Err(Error::Input("non-finite point in box counting".into()));
            }
            origin[d] = origin[d].min(p[d]);
        }
    }
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &eps in scales {
        let boxes: HashSet<[i64; D]> = points
            .iter()
            .map(|p| {
                let mut key = [0i64; D];
                for d in 0..D {
                    key[d] = ((p[d] - origin[d]) / eps).floor() as i64;
                }
                key
            })
            .collect();
        xs.push((1.0 / eps).ln());
        ys.push((boxes.len() as f64).ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid = (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, resid))
}
