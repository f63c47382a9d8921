//! Short-time Fourier transform and median-filter harmonic/percussive
//! source separation with soft masks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub const DEFAULT_N_FFT: usize = 2048;
pub const DEFAULT_HOP: usize = 512;
/// Median kernel length along time (frames).
pub const DEFAULT_KERNEL_TIME: usize = 75;
/// Median kernel length along frequency (bins).
pub const DEFAULT_KERNEL_FREQ: usize = 75;

/// Dense row-major real matrix; rows are frequency bins, columns frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

/// Complex STFT, `n_fft/2 + 1` bins by `frames` columns, row-major.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub values: Vec<Complex64>,
    pub bins: usize,
    pub frames: usize,
    pub n_fft: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub sample_rate: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hann,
}

impl Spectrogram {
    #[inline]
    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.values[bin * self.frames + frame]
    }

    pub fn magnitude(&self) -> Matrix {
        Matrix {
            rows: self.bins,
            cols: self.frames,
            data: self.values.iter().map(|c| c.norm()).collect(),
        }
    }

    /// Centre frequency of `bin` in Hz.
    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate as f64 / self.n_fft as f64
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Centred STFT with a Hann window. The signal is zero-padded by `n_fft/2`
/// on both sides so frame `t` is centred on sample `t·hop`.
pub fn stft(clip: &AudioClip, n_fft: usize, hop: usize) -> Result<Spectrogram> {
    stft_samples(&clip.samples, clip.sample_rate, n_fft, hop)
}

pub fn stft_samples(
    samples: &[f32],
    sample_rate: u32,
    n_fft: usize,
    hop: usize,
) -> Result<Spectrogram> {
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if !n_fft.is_power_of_two() || n_fft < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_fft {n_fft} is not a power of two"
        )));
    }
    if hop == 0 || hop > n_fft {
        return Err(Error::InvalidArgument(format!(
            "hop {hop} must be in 1..={n_fft}"
        )));
    }
    let pad = n_fft / 2;
    let frames = 1 + samples.len() / hop;
    let bins = n_fft / 2 + 1;
    let window = hann(n_fft);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);

    let columns: Vec<Vec<Complex64>> = (0..frames)
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, t| {
                let start = (t * hop) as isize - pad as isize;
                let mut buf: Vec<Complex64> = (0..n_fft)
                    .map(|i| {
                        let idx = start + i as isize;
                        let x = if idx >= 0 && (idx as usize) < samples.len() {
                            samples[idx as usize] as f64
                        } else {
                            0.0
                        };
                        Complex64::new(x * window[i], 0.0)
                    })
                    .collect();
                fft.process_with_scratch(&mut buf, scratch);
                buf.truncate(bins);
                buf
            },
        )
        .collect();

    let mut values = vec![Complex64::new(0.0, 0.0); bins * frames];
    for (t, col) in columns.iter().enumerate() {
        for (f, v) in col.iter().enumerate() {
            values[f * frames + t] = *v;
        }
    }
    Ok(Spectrogram {
        values,
        bins,
        frames,
        n_fft,
        hop,
        window: WindowKind::Hann,
        sample_rate,
    })
}

/// Sliding median of odd length `kernel`, edges replicated.
pub fn median_filter_1d(input: &[f64], kernel: usize) -> Vec<f64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let half = (kernel / 2) as isize;
    let at = |i: isize| input[i.clamp(0, n as isize - 1) as usize];

    let mut window: Vec<f64> = (-half..=half).map(at).collect();
    window.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n);
    out.push(window[half as usize]);
    for i in 1..n as isize {
        let leaving = at(i - 1 - half);
        let entering = at(i + half);
        let pos = window
            .binary_search_by(|v| v.total_cmp(&leaving))
            .expect("leaving value is in the window");
        window.remove(pos);
        let ins = window
            .binary_search_by(|v| v.total_cmp(&entering))
            .unwrap_or_else(|p| p);
        window.insert(ins, entering);
        out.push(window[half as usize]);
    }
    out
}

/// Median filter each row (along time).
pub fn median_filter_rows(m: &Matrix, kernel: usize) -> Matrix {
    let data: Vec<f64> = (0..m.rows)
        .into_par_iter()
        .flat_map_iter(|r| median_filter_1d(m.row(r), kernel))
        .collect();
    Matrix {
        rows: m.rows,
        cols: m.cols,
        data,
    }
}

/// Median filter each column (along frequency).
pub fn median_filter_columns(m: &Matrix, kernel: usize) -> Matrix {
    let columns: Vec<Vec<f64>> = (0..m.cols)
        .into_par_iter()
        .map(|c| median_filter_1d(&m.column(c), kernel))
        .collect();
    let mut out = Matrix::zeros(m.rows, m.cols);
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            out.set(r, c, *v);
        }
    }
    out
}

/// Wiener-style soft masks (power 2, margin 1) from the two enhanced
/// magnitudes. Where both are zero the energy is split evenly, so the masks
/// always sum to one.
pub fn soft_masks(harmonic_enhanced: &Matrix, percussive_enhanced: &Matrix) -> (Matrix, Matrix) {
    let mut mh = Matrix::zeros(harmonic_enhanced.rows, harmonic_enhanced.cols);
    let mut mp = mh.clone();
    for i in 0..harmonic_enhanced.data.len() {
        let h = harmonic_enhanced.data[i];
        let p = percussive_enhanced.data[i];
        let z = h.max(p);
        let m = if z <= f64::MIN_POSITIVE {
            0.5
        } else {
            let (h, p) = ((h / z).powi(2), (p / z).powi(2));
            h / (h + p)
        };
        mh.data[i] = m;
        mp.data[i] = 1.0 - m;
    }
    (mh, mp)
}

#[derive(Debug, Clone)]
pub struct HpssResult {
    pub harmonic: Matrix,
    pub percussive: Matrix,
    /// Unit-modulus phase of the input (1 where the input is zero).
    pub phase: Vec<Complex64>,
    pub harmonic_mask: Matrix,
    pub percussive_mask: Matrix,
}

/// Median-filter HPSS. `kernel_time` filters along frames (harmonic
/// enhancement), `kernel_freq` along bins (percussive enhancement).
pub fn hpss(spec: &Spectrogram, kernel_time: usize, kernel_freq: usize) -> Result<HpssResult> {
    for (name, k) in [("kernel_time", kernel_time), ("kernel_freq", kernel_freq)] {
        if k == 0 || k % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be odd and positive, got {k}"
            )));
        }
    }
    let mag = spec.magnitude();
    let (harmonic_mask, percussive_mask, harmonic, percussive) =
        hpss_magnitude(&mag, kernel_time, kernel_freq);
    let phase = spec
        .values
        .iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                c / n
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    Ok(HpssResult {
        harmonic,
        percussive,
        phase,
        harmonic_mask,
        percussive_mask,
    })
}

/// HPSS on a bare magnitude matrix: (harmonic mask, percussive mask,
/// harmonic, percussive).
pub fn hpss_magnitude(
    mag: &Matrix,
    kernel_time: usize,
    kernel_freq: usize,
) -> (Matrix, Matrix, Matrix, Matrix) {
    let h_enh = median_filter_rows(mag, kernel_time);
    let p_enh = median_filter_columns(mag, kernel_freq);
    let (mh, mp) = soft_masks(&h_enh, &p_enh);
    let mut harmonic = mag.clone();
    let mut percussive = mag.clone();
    for i in 0..mag.data.len() {
        harmonic.data[i] = mag.data[i] * mh.data[i];
        percussive.data[i] = mag.data[i] * mp.data[i];
    }
    (mh, mp, harmonic, percussive)
}
