//! End-to-end consensus extraction for one song.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::audio::{self, AudioClip, PIPELINE_RATE};
use crate::clustering::{self, ClusterConfig, InstrumentTrack, Role};
use crate::consensus::{self, ConsensusPattern, RoleSteps};
use crate::error::{Error, Result};
use crate::rhythm::{self, OnsetEvent, PeakPicking, RhythmGrid, TempoEstimate, FOLD_RANGE};
use crate::spectral;

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub sample_rate: u32,
    pub n_fft: usize,
    pub hop: usize,
    pub kernel_time: usize,
    pub kernel_freq: usize,
    pub peak_picking: PeakPicking,
    pub cluster: ClusterConfig,
    /// Roles handed out in order of increasing median onset strength.
    pub role_order: [Role; 4],
    /// Rotate the consensus loop to its canonical start (see
    /// [`consensus::canonical_rotation`]).
    pub canonical_rotation: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            sample_rate: PIPELINE_RATE,
            n_fft: spectral::DEFAULT_N_FFT,
            hop: spectral::DEFAULT_HOP,
            kernel_time: spectral::DEFAULT_KERNEL_TIME,
            kernel_freq: spectral::DEFAULT_KERNEL_FREQ,
            peak_picking: PeakPicking::default(),
            cluster: ClusterConfig::default(),
            role_order: Role::ALL,
            canonical_rotation: true,
        }
    }
}

impl ExtractConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.cluster.kmeans.seed = seed;
        self
    }
}

/// Onset summary for debug output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnsetRecord {
    pub time: f64,
    pub strength: f64,
    pub strong: bool,
}

/// Cluster summary for debug output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRecord {
    pub cluster_id: usize,
    pub role: Option<Role>,
    pub median_strength: f64,
    pub steps: Vec<usize>,
    pub centroid: Vec<f64>,
}

impl From<&InstrumentTrack> for ClusterRecord {
    fn from(t: &InstrumentTrack) -> Self {
        Self {
            cluster_id: t.cluster_id,
            role: t.role,
            median_strength: t.median_strength,
            steps: t.steps.iter().copied().collect(),
            centroid: t.centroid.clone(),
        }
    }
}

/// Everything the pipeline produced for one song.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub pattern: ConsensusPattern,
    /// Tempo as estimated from the click track, before octave folding.
    pub raw_tempo: TempoEstimate,
    pub tempo: TempoEstimate,
    pub grid: RhythmGrid,
    pub onsets: Vec<OnsetEvent>,
    pub strong_threshold: f64,
    pub tracks: Vec<InstrumentTrack>,
    pub clustering_degenerate: bool,
    pub clicks: AudioClip,
}

impl Extraction {
    pub fn onset_records(&self) -> Vec<OnsetRecord> {
        self.onsets
            .iter()
            .map(|o| OnsetRecord {
                time: o.time,
                strength: o.strength,
                strong: o.strength >= self.strong_threshold,
            })
            .collect()
    }

    pub fn cluster_records(&self) -> Vec<ClusterRecord> {
        self.tracks.iter().map(ClusterRecord::from).collect()
    }
}

/// Decode `path`, cut the analysis window and extract its consensus pattern.
pub fn extract_file(path: impl AsRef<Path>, cfg: &ExtractConfig) -> Result<Extraction> {
    let clip = audio::decode_at(path, cfg.sample_rate)?;
    let window = audio::sample_window(&clip)?;
    extract_window(&window, cfg)
}

/// Run the extraction on an already-windowed clip.
pub fn extract_window(window: &AudioClip, cfg: &ExtractConfig) -> Result<Extraction> {
    let spec = spectral::stft(window, cfg.n_fft, cfg.hop)?;
    let separated = spectral::hpss(&spec, cfg.kernel_time, cfg.kernel_freq)?;
    let envelope = rhythm::onset_envelope(&separated.percussive);
    let onsets = rhythm::detect_onsets_with(
        &envelope,
        &separated.percussive,
        cfg.hop,
        window.sample_rate,
        &cfg.peak_picking,
    );
    if onsets.is_empty() {
        return Err(Error::NoOnsets);
    }

    let strong_threshold = rhythm::strong_threshold(&onsets).unwrap_or(f64::INFINITY);
    let strong_times: Vec<f64> = onsets
        .iter()
        .filter(|o| o.strength >= strong_threshold)
        .map(|o| o.time)
        .collect();
    let duration = window.duration_secs();
    let clicks = rhythm::synthesize_clicks(&strong_times, duration, window.sample_rate);
    let raw_tempo = rhythm::estimate_tempo(&clicks)?;
    let tempo = raw_tempo.fold_into(FOLD_RANGE.0, FOLD_RANGE.1);

    let grid = rhythm::fit_grid(&onsets, &tempo, duration)?;
    let quantized = rhythm::quantize(&onsets, &grid);
    let clustering = clustering::cluster_onsets(&quantized, &cfg.cluster);
    let tracks = clustering::assign_roles_with(&clustering.tracks, &cfg.role_order);

    let mut role_steps: RoleSteps = Default::default();
    for t in &tracks {
        if let Some(role) = t.role {
            role_steps[role.index()] = align_to_downbeat(&t.steps, grid.downbeat);
        }
    }
    let usable = grid.n_steps.saturating_sub(grid.downbeat);
    let mut pattern = consensus::find_consensus(&role_steps, usable, tempo.rounded_bpm)?;
    if cfg.canonical_rotation {
        let source_window = pattern.source_window;
        pattern = consensus::canonical_rotation(&pattern);
        pattern.source_window = source_window;
    }

    Ok(Extraction {
        pattern,
        raw_tempo,
        tempo,
        grid,
        onsets,
        strong_threshold,
        tracks,
        clustering_degenerate: clustering.degenerate,
        clicks,
    })
}

fn align_to_downbeat(steps: &BTreeSet<usize>, downbeat: usize) -> BTreeSet<usize> {
    steps.range(downbeat..).map(|s| s - downbeat).collect()
}
