//! Onset envelope, onset picking, click-track tempo estimation and the
//! 16th-note grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::spectral::{self, Matrix};
use crate::stats;

/// A detected percussive onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetEvent {
    pub frame: usize,
    /// Seconds from the start of the analysed clip (`frame · hop / rate`).
    pub time: f64,
    pub strength: f64,
    /// Mean percussive magnitude spectrum over frames `frame-1..=frame+1`.
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempoEstimate {
    pub bpm: f64,
    pub rounded_bpm: u32,
    /// Set when the click track had no usable periodicity and the prior
    /// centre was returned instead.
    pub fallback: bool,
}

impl TempoEstimate {
    pub fn from_bpm(bpm: f64) -> Self {
        Self {
            bpm,
            rounded_bpm: (bpm.round() as u32).clamp(MIN_BPM as u32, MAX_BPM as u32),
            fallback: false,
        }
    }

    /// Fold by octaves into `[lo, hi]`.
    pub fn fold_into(self, lo: f64, hi: f64) -> Self {
        let mut bpm = self.bpm;
        while bpm < lo {
            bpm *= 2.0;
        }
        while bpm > hi {
            bpm /= 2.0;
        }
        Self {
            fallback: self.fallback,
            ..Self::from_bpm(bpm)
        }
    }
}

/// 16th-note grid over the analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhythmGrid {
    /// Time of grid index 0, in `[0, step)`.
    pub origin: f64,
    /// Duration of one 16th note, `15 / bpm`.
    pub step: f64,
    pub n_steps: usize,
    /// Grid index of the first beat one (the start of the 2-bar cycle).
    pub downbeat: usize,
}

impl RhythmGrid {
    pub fn time_of(&self, index: usize) -> f64 {
        self.origin + index as f64 * self.step
    }
}

pub const MIN_BPM: f64 = 30.0;
pub const MAX_BPM: f64 = 300.0;
pub const PRIOR_CENTER_BPM: f64 = 120.0;
/// Octave range tempos are folded into before the grid is fitted.
pub const FOLD_RANGE: (f64, f64) = (70.0, 180.0);
pub const STRONG_PERCENTILE: f64 = 98.0;
pub const STEPS_PER_BAR: usize = 16;
pub const CYCLE_STEPS: usize = 32;

/// Per-frame spectral flux: `Σ_f max(0, S[f,t] - S[f,t-1])`, 0 for frame 0.
pub fn onset_envelope(magnitude: &Matrix) -> Vec<f64> {
    let mut env = vec![0.0; magnitude.cols];
    for f in 0..magnitude.rows {
        let row = magnitude.row(f);
        for t in 1..magnitude.cols {
            let d = row[t] - row[t - 1];
            if d > 0.0 {
                env[t] += d;
            }
        }
    }
    env
}

/// Peak-picking contract for [`detect_onsets`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPicking {
    /// Half-width (frames) of the local-maximum test.
    pub max_radius: usize,
    /// Half-width (frames) of the local-mean test.
    pub mean_radius: usize,
    /// Threshold above the local mean, as a fraction of the envelope's 95th percentile.
    pub delta_factor: f64,
    /// Minimum spacing between onsets, in seconds.
    pub wait_secs: f64,
}

impl Default for PeakPicking {
    fn default() -> Self {
        Self {
            max_radius: 3,
            mean_radius: 3,
            delta_factor: 0.07,
            wait_secs: 0.030,
        }
    }
}

/// Frame indices of envelope peaks.
pub fn pick_peaks(envelope: &[f64], frame_secs: f64, cfg: &PeakPicking) -> Vec<usize> {
    let n = envelope.len();
    if n == 0 {
        return Vec::new();
    }
    let delta = cfg.delta_factor * stats::percentile(envelope, 95.0).unwrap_or(0.0);
    let wait = (cfg.wait_secs / frame_secs).ceil() as usize;
    let mut peaks: Vec<usize> = Vec::new();
    for t in 0..n {
        let v = envelope[t];
        if v <= 0.0 {
            continue;
        }
        let lo = t.saturating_sub(cfg.max_radius);
        let hi = (t + cfg.max_radius).min(n - 1);
        if envelope[lo..=hi].iter().any(|&u| u > v) {
            continue;
        }
        let lo = t.saturating_sub(cfg.mean_radius);
        let hi = (t + cfg.mean_radius).min(n - 1);
        let local_mean = stats::mean(&envelope[lo..=hi]);
        if v < local_mean + delta {
            continue;
        }
        if let Some(&last) = peaks.last() {
            if t < last + wait {
                continue;
            }
        }
        peaks.push(t);
    }
    peaks
}

/// Detect onsets in `envelope` and attach each one's percussive spectrum.
pub fn detect_onsets(
    envelope: &[f64],
    percussive: &Matrix,
    hop: usize,
    sample_rate: u32,
) -> Vec<OnsetEvent> {
    detect_onsets_with(
        envelope,
        percussive,
        hop,
        sample_rate,
        &PeakPicking::default(),
    )
}

pub fn detect_onsets_with(
    envelope: &[f64],
    percussive: &Matrix,
    hop: usize,
    sample_rate: u32,
    cfg: &PeakPicking,
) -> Vec<OnsetEvent> {
    let frame_secs = hop as f64 / sample_rate as f64;
    pick_peaks(envelope, frame_secs, cfg)
        .into_iter()
        .map(|frame| OnsetEvent {
            frame,
            time: frame as f64 * frame_secs,
            strength: envelope[frame],
            spectrum: onset_spectrum(percussive, frame),
        })
        .collect()
}

fn onset_spectrum(percussive: &Matrix, frame: usize) -> Vec<f64> {
    if percussive.cols == 0 {
        return vec![0.0; percussive.rows];
    }
    let lo = frame.saturating_sub(1);
    let hi = (frame + 1).min(percussive.cols - 1);
    let count = (hi + 1 - lo) as f64;
    (0..percussive.rows)
        .map(|f| (lo..=hi).map(|t| percussive.get(f, t)).sum::<f64>() / count)
        .collect()
}

/// Strength at or above which an onset counts as strong.
pub fn strong_threshold(onsets: &[OnsetEvent]) -> Option<f64> {
    let strengths: Vec<f64> = onsets.iter().map(|o| o.strength).collect();
    stats::percentile(&strengths, STRONG_PERCENTILE)
}

/// Onsets whose strength reaches the 98th percentile of all onset strengths.
pub fn strong_onsets(onsets: &[OnsetEvent]) -> Vec<OnsetEvent> {
    match strong_threshold(onsets) {
        Some(th) => onsets
            .iter()
            .filter(|o| o.strength >= th)
            .cloned()
            .collect(),
        None => Vec::new(),
    }
}

pub const CLICK_FREQ_HZ: f64 = 1000.0;
pub const CLICK_SECS: f64 = 0.030;
const CLICK_DECAY_SECS: f64 = 0.005;

/// Silent clip of `duration` seconds with a decaying 1 kHz click at each time.
pub fn synthesize_clicks(times: &[f64], duration: f64, rate: u32) -> AudioClip {
    let n = (duration * rate as f64).round() as usize;
    let click_len = (CLICK_SECS * rate as f64).round() as usize;
    let click: Vec<f32> = (0..click_len)
        .map(|i| {
            let t = i as f64 / rate as f64;
            ((2.0 * PI * CLICK_FREQ_HZ * t).sin() * (-t / CLICK_DECAY_SECS).exp()) as f32
        })
        .collect();
    let mut samples = vec![0.0f32; n];
    for &t in times {
        if !(0.0..duration).contains(&t) {
            continue;
        }
        let start = (t * rate as f64).round() as usize;
        for (i, c) in click.iter().enumerate() {
            if let Some(s) = samples.get_mut(start + i) {
                *s = (*s + c).clamp(-1.0, 1.0);
            }
        }
    }
    AudioClip::new(samples, rate)
}

/// Analysis resolution for the click track, finer than the song analysis
/// so long-lag periodicity can be located to a fraction of a BPM.
pub const TEMPO_N_FFT: usize = 512;
pub const TEMPO_HOP: usize = 64;
/// Timing tolerance of comb teeth (Gaussian σ, seconds).
const TOOTH_SIGMA_SECS: f64 = 0.015;
const BPM_RESOLUTION: f64 = 0.01;

/// Log-normal tempo prior centred on 120 BPM with a one-octave σ.
pub fn tempo_prior(bpm: f64) -> f64 {
    let octaves = (bpm / PRIOR_CENTER_BPM).log2();
    (-0.5 * octaves * octaves).exp()
}

/// Estimate the tempo of a click track.
///
/// The onset envelope of the clip is autocorrelated over its full length.
/// Each candidate tempo in 30–300 BPM is scored by summing the (timing
/// tolerant) autocorrelation at every multiple of its beat lag, and the
/// score is weighted by [`tempo_prior`]. Summing all multiples lets sparse
/// click tracks, where few clicks are a single beat apart, still pin the
/// beat period, and the long lags give sub-BPM precision.
pub fn estimate_tempo(clicks: &AudioClip) -> Result<TempoEstimate> {
    if clicks.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let spec = spectral::stft(clicks, TEMPO_N_FFT, TEMPO_HOP)?;
    let env = onset_envelope(&spec.magnitude());
    let frame_rate = clicks.sample_rate as f64 / TEMPO_HOP as f64;
    Ok(tempo_from_envelope(&env, frame_rate))
}

pub fn tempo_from_envelope(env: &[f64], frame_rate: f64) -> TempoEstimate {
    let fallback = TempoEstimate {
        fallback: true,
        ..TempoEstimate::from_bpm(PRIOR_CENTER_BPM)
    };
    let acf = autocorrelation(env);
    if acf.is_empty() || acf[0] <= 0.0 {
        return fallback;
    }
    let smooth = gaussian_smooth(&acf, TOOTH_SIGMA_SECS * frame_rate);
    let max_lag = (smooth.len() - 1) as f64;

    let lag_at = |lag: f64| -> f64 {
        let i = lag.floor() as usize;
        let frac = lag - i as f64;
        smooth[i] * (1.0 - frac) + smooth[(i + 1).min(smooth.len() - 1)] * frac
    };

    let n_candidates = ((MAX_BPM - MIN_BPM) / BPM_RESOLUTION).round() as usize + 1;
    let mut best: Option<(f64, f64)> = None;
    for j in 0..n_candidates {
        let bpm = MIN_BPM + j as f64 * BPM_RESOLUTION;
        let period = 60.0 * frame_rate / bpm;
        if period > max_lag {
            continue;
        }
        let mut comb = 0.0;
        let mut k = 1.0;
        while k * period <= max_lag {
            comb += lag_at(k * period);
            k += 1.0;
        }
        let score = comb * tempo_prior(bpm);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((bpm, score));
        }
    }
    match best {
        // Anything below this is numerical residue of the lag-0 peak.
        Some((bpm, score)) if score > 1e-6 * acf[0] => TempoEstimate::from_bpm(bpm),
        _ => fallback,
    }
}

/// Linear (non-circular) autocorrelation via FFT, lags `0..n`.
fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex64> = x
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    buf.truncate(n);
    buf.iter().map(|c| (c.re / size as f64).max(0.0)).collect()
}

fn gaussian_smooth(x: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-0.5 * (d as f64 / sigma).powi(2)).exp())
        .collect();
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .zip(-radius..=radius)
                .filter_map(|(w, d)| {
                    let j = i + d;
                    (0..n).contains(&j).then(|| w * x[j as usize])
                })
                .sum()
        })
        .collect()
}

/// Fit the 16th-note grid to the onsets.
///
/// The phase is the offset in `[0, step)` that maximises the total strength
/// of onsets lying within `step/4` of a grid point, refined to the
/// strength-weighted circular mean of those onsets' phases. The downbeat is
/// the position in the 32-step cycle carrying the most onset strength.
pub fn fit_grid(
    onsets: &[OnsetEvent],
    tempo: &TempoEstimate,
    window_secs: f64,
) -> Result<RhythmGrid> {
    if onsets.is_empty() {
        return Err(Error::GridUndefined);
    }
    let step = 15.0 / tempo.rounded_bpm as f64;
    let origin = fit_phase(onsets, step);
    let n_steps = ((window_secs - origin) / step).ceil().max(0.0) as usize;
    let mut grid = RhythmGrid {
        origin,
        step,
        n_steps,
        downbeat: 0,
    };
    grid.downbeat = find_downbeat(&quantize(onsets, &grid));
    Ok(grid)
}

const PHASE_CANDIDATES: usize = 400;

fn fit_phase(onsets: &[OnsetEvent], step: f64) -> f64 {
    let phase_of = |t: f64| t.rem_euclid(step);
    let circ_dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(step);
        d.min(step - d)
    };
    let tol = step / 4.0;

    let mut best_phase = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for j in 0..PHASE_CANDIDATES {
        let phi = j as f64 * step / PHASE_CANDIDATES as f64;
        let score: f64 = onsets
            .iter()
            .filter(|o| circ_dist(phase_of(o.time), phi) <= tol)
            .map(|o| o.strength.max(f64::MIN_POSITIVE))
            .sum();
        if score > best_score {
            best_score = score;
            best_phase = phi;
        }
    }

    let (mut sx, mut sy) = (0.0, 0.0);
    for o in onsets {
        let p = phase_of(o.time);
        if circ_dist(p, best_phase) <= tol {
            let w = o.strength.max(f64::MIN_POSITIVE);
            let angle = 2.0 * PI * p / step;
            sx += w * angle.cos();
            sy += w * angle.sin();
        }
    }
    let mut phase = (sy.atan2(sx) / (2.0 * PI) * step).rem_euclid(step);
    if step - phase < 1e-12 * step {
        phase = 0.0;
    }
    phase
}

fn find_downbeat(quantized: &[(usize, OnsetEvent)]) -> usize {
    let mut totals = [0.0f64; CYCLE_STEPS];
    for (idx, o) in quantized {
        totals[idx % CYCLE_STEPS] += o.strength;
    }
    let mut best = 0;
    for (i, &v) in totals.iter().enumerate() {
        if v > totals[best] {
            best = i;
        }
    }
    best
}

/// Snap onsets to the nearest grid index. Exact half-step ties go to the
/// earlier index; onsets falling outside `[0, n_steps)` are dropped.
pub fn quantize(onsets: &[OnsetEvent], grid: &RhythmGrid) -> Vec<(usize, OnsetEvent)> {
    onsets
        .iter()
        .filter_map(|o| {
            let idx = nearest_step(o.time, grid)?;
            Some((idx, o.clone()))
        })
        .collect()
}

/// Grid index for time `t`, half-step ties rounding down.
pub fn nearest_step(t: f64, grid: &RhythmGrid) -> Option<usize> {
    let x = (t - grid.origin) / grid.step;
    let idx = (x - 0.5).ceil();
    (idx >= 0.0 && (idx as usize) < grid.n_steps).then_some(idx as usize)
}
