//! Timbre clustering of quantized onsets and instrument role assignment.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rhythm::OnsetEvent;
use crate::stats;

pub const DEFAULT_SEED: u64 = 7_067_265;
pub const DEFAULT_K: usize = 4;
pub const MIN_CLUSTER_POPULATION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Snare,
    Kick,
    OtherPercussion,
    Hihat,
}

impl Role {
    /// Roles in order of increasing median onset strength.
    pub const ALL: [Role; 4] = [Role::Snare, Role::Kick, Role::OtherPercussion, Role::Hihat];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Snare => "snare",
            Role::Kick => "kick",
            Role::OtherPercussion => "other",
            Role::Hihat => "hihat",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snare" => Ok(Role::Snare),
            "kick" => Ok(Role::Kick),
            "other" | "other_percussion" => Ok(Role::OtherPercussion),
            "hihat" | "hi-hat" | "hat" => Ok(Role::Hihat),
            other => Err(Error::InvalidArgument(format!("unknown role {other:?}"))),
        }
    }
}

/// One clustered instrument: which grid steps it plays on and its timbre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentTrack {
    pub cluster_id: usize,
    pub role: Option<Role>,
    pub steps: BTreeSet<usize>,
    pub onset_count: usize,
    pub median_strength: f64,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub seed: u64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            max_iter: 100,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

fn kmeans_pp_seed(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..points.len())
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
    let dim = points[0].len();
    let k = centroids.len();
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    let mut history = vec![inertia(points, &centroids, &assignments)];

    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            // An emptied cluster keeps its previous centroid.
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        let j = inertia(points, &centroids, &next);
        let prev = *history.last().unwrap();
        assert!(
            j <= prev + 1e-9 * prev.abs().max(1.0),
            "k-means inertia increased: {prev} -> {j}"
        );
        history.push(j);
        let changed = next != assignments;
        assignments = next;
        if !changed {
            break;
        }
    }
    KMeansFit {
        inertia: *history.last().unwrap(),
        centroids,
        assignments,
        inertia_history: history,
    }
}

/// Lloyd's k-means with k-means++ seeding, keeping the lowest-inertia
/// restart. Restart `r` is seeded with `seed + r`; ties go to the lower `r`.
pub fn kmeans(points: &[Vec<f64>], k: usize, cfg: &KMeansConfig) -> KMeansFit {
    assert!(!points.is_empty() && k >= 1 && k <= points.len());
    let fits: Vec<KMeansFit> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            let init = kmeans_pp_seed(points, k, &mut rng);
            lloyd(points, init, cfg.max_iter)
        })
        .collect();
    fits.into_iter()
        .reduce(|best, f| if f.inertia < best.inertia { f } else { best })
        .expect("at least one restart")
}

fn l2_normalize(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub k: usize,
    pub kmeans: KMeansConfig,
    pub min_population: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            kmeans: KMeansConfig::default(),
            min_population: MIN_CLUSTER_POPULATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Surviving clusters, ordered by cluster id. Roles are not yet assigned.
    pub tracks: Vec<InstrumentTrack>,
    /// k-means inertia over all onsets, before small clusters are discarded.
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
    /// All onset spectra were identical; a single cluster was returned.
    pub degenerate: bool,
}

/// Cluster quantized onsets by their L2-normalized spectra.
///
/// Inputs are sorted by time first so the result does not depend on input
/// order. Cluster ids are renumbered by earliest member. Clusters with fewer
/// than `min_population` onsets are dropped.
pub fn cluster_onsets(onsets: &[(usize, OnsetEvent)], cfg: &ClusterConfig) -> Clustering {
    if onsets.is_empty() || cfg.k == 0 {
        return Clustering {
            tracks: Vec::new(),
            inertia: 0.0,
            inertia_history: Vec::new(),
            degenerate: false,
        };
    }
    let mut sorted: Vec<&(usize, OnsetEvent)> = onsets.iter().collect();
    sorted.sort_by(|a, b| {
        a.1.time
            .total_cmp(&b.1.time)
            .then(a.0.cmp(&b.0))
            .then(a.1.strength.total_cmp(&b.1.strength))
            .then_with(|| {
                a.1.spectrum
                    .iter()
                    .zip(&b.1.spectrum)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
    });
    let points: Vec<Vec<f64>> = sorted
        .iter()
        .map(|(_, o)| l2_normalize(&o.spectrum))
        .collect();

    let degenerate = points.iter().all(|p| p == &points[0]);
    let k = if degenerate {
        1
    } else {
        cfg.k.min(points.len())
    };
    let fit = kmeans(&points, k, &cfg.kmeans);

    // Renumber clusters by first appearance in time order.
    let mut relabel = vec![usize::MAX; k];
    let mut next = 0;
    for &a in &fit.assignments {
        if relabel[a] == usize::MAX {
            relabel[a] = next;
            next += 1;
        }
    }

    let mut tracks = Vec::new();
    for (old, &id) in relabel.iter().enumerate() {
        if id == usize::MAX {
            continue;
        }
        let members: Vec<&&(usize, OnsetEvent)> = sorted
            .iter()
            .zip(&fit.assignments)
            .filter(|(_, &a)| a == old)
            .map(|(m, _)| m)
            .collect();
        if members.len() < cfg.min_population && !degenerate {
            continue;
        }
        let strengths: Vec<f64> = members.iter().map(|m| m.1.strength).collect();
        tracks.push(InstrumentTrack {
            cluster_id: id,
            role: None,
            steps: members.iter().map(|m| m.0).collect(),
            onset_count: members.len(),
            median_strength: stats::median(&strengths),
            centroid: fit.centroids[old].clone(),
        });
    }
    tracks.sort_by_key(|t| t.cluster_id);
    Clustering {
        tracks,
        inertia: fit.inertia,
        inertia_history: fit.inertia_history,
        degenerate,
    }
}

/// Assign roles by increasing median strength (ties: lower cluster id
/// first), following `order`. Returns the tracks in role-assignment order.
pub fn assign_roles_with(tracks: &[InstrumentTrack], order: &[Role; 4]) -> Vec<InstrumentTrack> {
    let mut sorted = tracks.to_vec();
    sorted.sort_by(|a, b| {
        a.median_strength
            .total_cmp(&b.median_strength)
            .then(a.cluster_id.cmp(&b.cluster_id))
    });
    sorted.truncate(4);
    for (track, role) in sorted.iter_mut().zip(order) {
        track.role = Some(*role);
    }
    sorted
}

/// [`assign_roles_with`] using snare, kick, other percussion, hi-hat.
pub fn assign_roles(tracks: &[InstrumentTrack]) -> Vec<InstrumentTrack> {
    assign_roles_with(tracks, &Role::ALL)
}

/// Parse a comma-separated role order such as `snare,kick,other,hihat`.
pub fn parse_role_order(s: &str) -> Result<[Role; 4], Error> {
    let roles: Vec<Role> = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
    let unique: BTreeSet<Role> = roles.iter().copied().collect();
    if roles.len() != 4 || unique.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "role order must name each of the four roles once, got {s:?}"
        )));
    }
    Ok([roles[0], roles[1], roles[2], roles[3]])
}
