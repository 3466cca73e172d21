//! Cell-specific codebook of IRS configurations.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_circular, KMeans, KMeansOptions};
use super::{circular_delta, grid_phase, optimal_phases, quantize_config, IrsConfiguration};
use crate::channel::{drop_n, synthesize_channels, UeDrop};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// The discrete set of configurations the gNB may signal, `2^b_q` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    b_q: u32,
    b_irs: u32,
    n_irs: usize,
    entries: Vec<IrsConfiguration>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookDoc {
    b_q: u32,
    b_irs: u32,
    n_irs: usize,
    entries: Vec<Vec<u16>>,
}

impl Codebook {
    pub fn new(b_q: u32, b_irs: u32, n_irs: usize, entries: Vec<IrsConfiguration>) -> Result<Self> {
        if b_q as usize >= usize::BITS as usize || entries.len() != 1usize << b_q {
            return Err(Error::InvalidArgument(format!(
                "codebook with b_q={b_q} needs {} entries, got {}",
                1u128 << b_q,
                entries.len()
            )));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.bits() != b_irs || e.len() != n_irs {
                return Err(Error::InvalidArgument(format!(
                    "entry {i} has {} elements at {} bits, expected {n_irs} at {b_irs}",
                    e.len(),
                    e.bits()
                )));
            }
            if !seen.insert(e.indices()) {
                return Err(Error::InvalidArgument(format!("entry {i} is a duplicate")));
            }
        }
        Ok(Self {
            b_q,
            b_irs,
            n_irs,
            entries,
        })
    }

    /// Every grid vector, in lexicographic index order (`b_q = b_irs * n_irs`).
    pub fn full_grid(b_irs: u32, n_irs: usize) -> Result<Self> {
        let b_q = b_irs * n_irs as u32;
        if b_q > 20 {
            return Err(Error::InvalidArgument(format!(
                "full grid of {b_q} bits is too large"
            )));
        }
        let levels = 1usize << b_irs;
        let entries = (0..1usize << b_q)
            .map(|mut code| {
                let mut idx = vec![0u16; n_irs];
                for slot in idx.iter_mut().rev() {
                    *slot = (code % levels) as u16;
                    code /= levels;
                }
                IrsConfiguration::new(b_irs, idx)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(b_q, b_irs, n_irs, entries)
    }

    pub fn b_q(&self) -> u32 {
        self.b_q
    }

    pub fn b_irs(&self) -> u32 {
        self.b_irs
    }

    pub fn n_irs(&self) -> usize {
        self.n_irs
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IrsConfiguration] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &IrsConfiguration {
        &self.entries[idx]
    }

    /// Whether this codebook fits the scenario's IRS and address width.
    pub fn matches(&self, cfg: &ScenarioConfig) -> bool {
        self.b_q == cfg.b_codebook && self.b_irs == cfg.b_irs && self.n_irs == cfg.n_irs()
    }

    pub fn to_json(&self) -> String {
        let doc = CodebookDoc {
            b_q: self.b_q,
            b_irs: self.b_irs,
            n_irs: self.n_irs,
            entries: self.entries.iter().map(|e| e.indices().to_vec()).collect(),
        };
        serde_json::to_string(&doc).expect("codebook serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: CodebookDoc = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("codebook document: {e}")))?;
        let entries = doc
            .entries
            .into_iter()
            .map(|idx| IrsConfiguration::new(doc.b_irs, idx))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.b_q, doc.b_irs, doc.n_irs, entries)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}

/// Index of the entry closest to `theta` in circular distance; ties go to the
/// lowest index.
pub fn map_to_codebook(theta: &[f64], cb: &Codebook) -> Result<usize> {
    if cb.is_empty() {
        return Err(Error::InvalidArgument("empty codebook".into()));
    }
    if theta.len() != cb.n_irs {
        return Err(Error::InvalidArgument(format!(
            "{} phases for a {}-element codebook",
            theta.len(),
            cb.n_irs
        )));
    }
    let levels = 1usize << cb.b_irs;
    let table: Vec<f64> = theta
        .iter()
        .flat_map(|&t| (0..levels).map(move |l| circular_delta(t, grid_phase(l as u16, cb.b_irs)).powi(2)))
        .collect();
    let mut best = (0, f64::INFINITY);
    for (c, e) in cb.entries.iter().enumerate() {
        let d: f64 = e
            .indices()
            .iter()
            .enumerate()
            .map(|(n, &l)| table[n * levels + l as usize])
            .sum();
        if d < best.1 {
            best = (c, d);
        }
    }
    Ok(best.0)
}

/// Quantized per-(UE, carrier) optima of a fresh training drop of
/// `cfg.m_training` UEs. Degenerate links are skipped.
pub fn training_points<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<IrsConfiguration>> {
    let drop = drop_n(cfg, cfg.m_training, rng);
    let base: u64 = rng.random();
    let per_ue: Vec<Vec<IrsConfiguration>> = (0..drop.len())
        .into_par_iter()
        .map(|m| {
            let mut ue_rng = ChaCha8Rng::seed_from_u64(base);
            ue_rng.set_stream(m as u64);
            let single = UeDrop {
                positions: vec![drop.positions[m]],
                los: vec![drop.los[m]],
            };
            let ch = synthesize_channels(cfg, &single, &mut ue_rng)?;
            Ok((0..ch.n_carriers())
                .map(|i| optimal_phases(&ch.cascade_columns(0, i)))
                .filter(|opt| !opt.degenerate)
                .map(|opt| quantize_config(&opt.phases, cfg.b_irs))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_ue.into_iter().flatten().collect())
}

/// Clusters `points` into a `2^b_q` codebook. Also returns the clustering
/// run for inspection.
pub fn codebook_from_points<R: Rng + ?Sized>(
    points: &[IrsConfiguration],
    b_q: u32,
    b_irs: u32,
    n_irs: usize,
    rng: &mut R,
) -> Result<(Codebook, KMeans)> {
    let k = 1usize << b_q;
    if points.len() < k {
        return Err(Error::InsufficientTrainingData {
            points: points.len(),
            clusters: k,
        });
    }
    let km = kmeans_circular(points, k, KMeansOptions::default(), rng)?;
    let mut used: HashSet<Vec<u16>> = HashSet::with_capacity(k);
    let mut entries = Vec::with_capacity(k);
    for centroid in &km.centroids {
        let q = quantize_config(centroid, b_irs);
        let q = if used.contains(q.indices()) {
            nearest_unused(&q, centroid, &used)
        } else {
            q
        };
        used.insert(q.indices().to_vec());
        entries.push(q);
    }
    Ok((Codebook::new(b_q, b_irs, n_irs, entries)?, km))
}

/// Builds the cell-specific codebook for `cfg`.
pub fn build_codebook<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Codebook> {
    let k = cfg.codebook_size();
    if cfg.m_training * cfg.f < k {
        return Err(Error::InsufficientTrainingData {
            points: cfg.m_training * cfg.f,
            clusters: k,
        });
    }
    let points = training_points(cfg, rng)?;
    let (cb, km) = codebook_from_points(&points, cfg.b_codebook, cfg.b_irs, cfg.n_irs(), rng)?;
    log::debug!(
        "codebook: {} points, {} k-means iterations, objective {:?}",
        points.len(),
        km.objective.len(),
        km.objective.last()
    );
    Ok(cb)
}

/// Closest grid vector to `centroid` that is not yet in `used`, searched in
/// growing rings of single-element moves around `start`.
fn nearest_unused(
    start: &IrsConfiguration,
    centroid: &[f64],
    used: &HashSet<Vec<u16>>,
) -> IrsConfiguration {
    let bits = start.bits();
    let levels = 1u16 << bits;
    let score = |idx: &[u16]| -> f64 {
        idx.iter()
            .zip(centroid)
            .map(|(&l, &c)| circular_delta(grid_phase(l, bits), c).powi(2))
            .sum()
    };
    let mut visited: HashSet<Vec<u16>> = HashSet::new();
    visited.insert(start.indices().to_vec());
    let mut frontier = vec![start.indices().to_vec()];
    loop {
        let mut ring: Vec<(f64, Vec<u16>)> = Vec::new();
        for v in &frontier {
            for n in 0..v.len() {
                for l in 0..levels {
                    if l == v[n] {
                        continue;
                    }
                    let mut w = v.clone();
                    w[n] = l;
                    if visited.insert(w.clone()) {
                        ring.push((score(&w), w));
                    }
                }
            }
        }
        assert!(!ring.is_empty(), "grid exhausted while deduplicating codebook");
        ring.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        if let Some((_, w)) = ring.iter().find(|(_, w)| !used.contains(w)) {
            return IrsConfiguration::new(bits, w.clone()).expect("grid vector");
        }
        frontier = ring.into_iter().map(|(_, w)| w).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn new_enforces_size_and_distinctness() {
        let a = IrsConfiguration::new(1, vec![0, 1]).unwrap();
        let b = IrsConfiguration::new(1, vec![1, 1]).unwrap();
        assert!(Codebook::new(1, 1, 2, vec![a.clone(), b.clone()]).is_ok());
        assert!(Codebook::new(1, 1, 2, vec![a.clone(), a.clone()]).is_err());
        assert!(Codebook::new(2, 1, 2, vec![a.clone(), b.clone()]).is_err());
        assert!(Codebook::new(1, 1, 3, vec![a, b]).is_err());
    }

    #[test]
    fn full_grid_enumerates_everything() {
        let cb = Codebook::full_grid(1, 3).unwrap();
        assert_eq!(cb.len(), 8);
        assert_eq!(cb.entry(0).indices(), &[0, 0, 0]);
        assert_eq!(cb.entry(5).indices(), &[1, 0, 1]);
    }

    #[test]
    fn mapping_examples() {
        let cb = Codebook::full_grid(2, 2).unwrap();
        for c in [0usize, 3, 7, 15] {
            assert_eq!(map_to_codebook(&cb.entry(c).phases(), &cb).unwrap(), c);
        }
        let single = Codebook::new(0, 1, 2, vec![IrsConfiguration::zeros(1, 2)]).unwrap();
        assert_eq!(map_to_codebook(&[2.0, 4.0], &single).unwrap(), 0);
        assert!(map_to_codebook(&[0.0], &cb).is_err());
    }

    #[test]
    fn mapping_matches_linear_scan() {
        let mut rng = stream(8, Stream::Instance, 0);
        let points: Vec<IrsConfiguration> = (0..64)
            .map(|_| {
                IrsConfiguration::new(2, (0..6).map(|_| rng.random_range(0..4)).collect()).unwrap()
            })
            .collect();
        let (cb, _) = codebook_from_points(&points, 4, 2, 6, &mut rng).unwrap();
        for _ in 0..200 {
            let theta: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            let mut best = (0, f64::INFINITY);
            for (c, e) in cb.entries().iter().enumerate() {
                let d = super::super::circular_distance_phases(&theta, &e.phases()).unwrap();
                if d < best.1 {
                    best = (c, d);
                }
            }
            assert_eq!(map_to_codebook(&theta, &cb).unwrap(), best.0);
        }
    }

    #[test]
    fn exhaustive_training_recovers_full_grid() {
        let grid = Codebook::full_grid(1, 2).unwrap();
        let points: Vec<IrsConfiguration> = (0..12).map(|i| grid.entry(i % 4).clone()).collect();
        let mut rng = stream(1, Stream::Instance, 0);
        let (cb, _) = codebook_from_points(&points, 2, 1, 2, &mut rng).unwrap();
        let mut got: Vec<_> = cb.entries().iter().map(|e| e.indices().to_vec()).collect();
        got.sort();
        let want: Vec<_> = grid.entries().iter().map(|e| e.indices().to_vec()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn duplicate_centroids_are_spread_to_distinct_entries() {
        // Only two distinct training vectors but four codewords requested.
        let a = IrsConfiguration::new(1, vec![0, 0, 0]).unwrap();
        let b = IrsConfiguration::new(1, vec![1, 1, 1]).unwrap();
        let points = vec![a.clone(), a.clone(), a, b.clone(), b];
        let mut rng = stream(4, Stream::Instance, 0);
        let (cb, _) = codebook_from_points(&points, 2, 1, 3, &mut rng).unwrap();
        assert_eq!(cb.len(), 4);
        let set: HashSet<_> = cb.entries().iter().map(|e| e.indices().to_vec()).collect();
        assert!(set.contains(&vec![0, 0, 0]));
        assert!(set.contains(&vec![1, 1, 1]));
    }

    #[test]
    fn build_is_deterministic_and_json_round_trips() {
        let cfg = ScenarioConfig {
            k: 4,
            f: 2,
            z: 2,
            n_gnb: 4,
            n_ue: 2,
            irs_rows: 2,
            irs_cols: 4,
            b_codebook: 3,
            m_training: 40,
            ..ScenarioConfig::desk()
        };
        let a = build_codebook(&cfg, &mut stream(5, Stream::Training, 0)).unwrap();
        let b = build_codebook(&cfg, &mut stream(5, Stream::Training, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.matches(&cfg));
        assert_eq!(Codebook::from_json_str(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn insufficient_training_data() {
        let cfg = ScenarioConfig {
            k: 2,
            f: 1,
            z: 1,
            irs_rows: 2,
            irs_cols: 4,
            b_codebook: 6,
            m_training: 20,
            ..ScenarioConfig::desk()
        };
        assert!(matches!(
            build_codebook(&cfg, &mut stream(0, Stream::Training, 0)),
            Err(Error::InsufficientTrainingData { .. })
        ));
    }
}
