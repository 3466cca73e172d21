//! Lloyd's k-means over quantized IRS configurations under the squared
//! circular distance.
//!
//! Centroids live in the continuous phase domain. The update step computes,
//! per element, the exact minimizer of the summed squared arc distance to the
//! cluster members, which keeps the objective non-increasing across
//! iterations.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::{circular_delta, grid_phase, IrsConfiguration};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iterations: usize,
    /// Stop once the relative objective change drops below this.
    pub tolerance: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans {
    /// Continuous centroid phases, one vector per cluster.
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each input point.
    pub assignment: Vec<usize>,
    /// Objective after every assignment step.
    pub objective: Vec<f64>,
}

/// Minimizer of `sum_j w_j * delta(a_j, c)^2` over the circle.
///
/// The cost is piecewise quadratic with breakpoints at the antipodes of the
/// samples; on each piece the optimum is the weighted mean of the unwrapped
/// samples, clamped to the piece. Zero total weight yields phase 0.
pub fn circular_frechet_mean(samples: &[(f64, f64)]) -> f64 {
    let total: f64 = samples.iter().map(|s| s.1).sum();
    if samples.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let cost = |c: f64| -> f64 {
        samples
            .iter()
            .map(|&(a, w)| w * circular_delta(a, c).powi(2))
            .sum()
    };
    let mut breaks: Vec<f64> = samples.iter().map(|&(a, _)| (a + PI).rem_euclid(TAU)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut best = (f64::INFINITY, 0.0);
    for s in 0..breaks.len() {
        let lo = breaks[s];
        let hi = if s + 1 < breaks.len() {
            breaks[s + 1]
        } else {
            breaks[0] + TAU
        };
        let mid = 0.5 * (lo + hi);
        let mut acc = 0.0;
        for &(a, w) in samples {
            let rep = a + TAU * ((mid - a) / TAU).round();
            acc += w * rep;
        }
        let c = (acc / total).clamp(lo, hi).rem_euclid(TAU);
        let v = cost(c);
        if v < best.0 || (v == best.0 && c < best.1) {
            best = (v, c);
        }
    }
    best.1
}

struct Points<'a> {
    data: &'a [IrsConfiguration],
    bits: u32,
    n: usize,
}

impl Points<'_> {
    /// `delta^2` between grid level `l` and every centroid element, cached as
    /// a `[element][level]` table.
    fn level_table(&self, centroid: &[f64]) -> Vec<f64> {
        let levels = 1usize << self.bits;
        let mut t = Vec::with_capacity(self.n * levels);
        for &c in centroid {
            for l in 0..levels {
                t.push(circular_delta(grid_phase(l as u16, self.bits), c).powi(2));
            }
        }
        t
    }

    fn distance(&self, p: usize, table: &[f64]) -> f64 {
        let levels = 1usize << self.bits;
        self.data[p]
            .indices()
            .iter()
            .enumerate()
            .map(|(n, &l)| table[n * levels + l as usize])
            .sum()
    }
}

fn nearest(points: &Points, p: usize, tables: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, t) in tables.iter().enumerate() {
        let d = points.distance(p, t);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans_circular<R: Rng + ?Sized>(
    data: &[IrsConfiguration],
    k: usize,
    opts: KMeansOptions,
    rng: &mut R,
) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::InvalidArgument("k-means needs k >= 1".into()));
    }
    if data.len() < k {
        return Err(Error::InsufficientTrainingData {
            points: data.len(),
            clusters: k,
        });
    }
    let bits = data[0].bits();
    let n = data[0].len();
    if data.iter().any(|p| p.bits() != bits || p.len() != n) {
        return Err(Error::InvalidArgument(
            "training points differ in size or resolution".into(),
        ));
    }
    let levels = 1usize << bits;
    let points = Points { data, bits, n };

    // k-means++: D^2 weighting, where our distance is already squared
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen = vec![false; data.len()];
    let first = rng.random_range(0..data.len());
    chosen[first] = true;
    centroids.push(data[first].phases());
    let mut dmin: Vec<f64> = {
        let t = points.level_table(&centroids[0]);
        (0..data.len()).map(|p| points.distance(p, &t)).collect()
    };
    while centroids.len() < k {
        let total: f64 = dmin.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (p, &d) in dmin.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(p);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total has a positive weight")
        } else {
            // fewer distinct points than clusters
            (0..data.len()).find(|&p| !chosen[p]).unwrap_or(0)
        };
        chosen[pick] = true;
        centroids.push(data[pick].phases());
        let t = points.level_table(centroids.last().unwrap());
        for (p, d) in dmin.iter_mut().enumerate() {
            *d = d.min(points.distance(p, &t));
        }
    }

    let mut objective = Vec::new();
    let mut assignment = vec![0usize; data.len()];
    for iter in 0..opts.max_iterations {
        let tables: Vec<Vec<f64>> = centroids.iter().map(|c| points.level_table(c)).collect();
        let mut j = 0.0;
        for (p, a) in assignment.iter_mut().enumerate() {
            let (c, d) = nearest(&points, p, &tables);
            *a = c;
            j += d;
        }
        objective.push(j);
        if iter > 0 {
            let prev = objective[iter - 1];
            if j == 0.0 || (prev - j).abs() <= opts.tolerance * prev {
                break;
            }
        } else if j == 0.0 {
            break;
        }
        if iter + 1 == opts.max_iterations {
            break;
        }

        // per-cluster, per-element histograms over grid levels
        let mut hist = vec![0u32; k * n * levels];
        for (p, &c) in assignment.iter().enumerate() {
            for (e, &l) in data[p].indices().iter().enumerate() {
                hist[(c * n + e) * levels + l as usize] += 1;
            }
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            for (e, value) in centroid.iter_mut().enumerate() {
                let h = &hist[(c * n + e) * levels..(c * n + e + 1) * levels];
                let samples: Vec<(f64, f64)> = h
                    .iter()
                    .enumerate()
                    .filter(|(_, &cnt)| cnt > 0)
                    .map(|(l, &cnt)| (grid_phase(l as u16, bits), f64::from(cnt)))
                    .collect();
                if samples.is_empty() {
                    continue; // empty cluster keeps its centroid
                }
                let cost = |x: f64| -> f64 {
                    samples
                        .iter()
                        .map(|&(a, w)| w * circular_delta(a, x).powi(2))
                        .sum()
                };
                let candidate = circular_frechet_mean(&samples);
                if cost(candidate) < cost(*value) {
                    *value = candidate;
                }
            }
        }
    }

    Ok(KMeans {
        centroids,
        assignment,
        objective,
    })
}
