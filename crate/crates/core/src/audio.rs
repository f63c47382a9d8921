//! Audio decoding, resampling and analysis-window selection.
//!
//! RIFF/WAVE PCM is decoded in-process. Anything else goes through a
//! [`Decoder`] implementation; [`CommandDecoder`] shells out to an external
//! converter (ffmpeg by default) that writes WAVE to standard output.

use std::f64::consts::PI;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::error::{Error, Result};

/// Sample rate every clip is resampled to on decode.
pub const PIPELINE_RATE: u32 = 22_050;

/// Start of the analysis window, in seconds.
pub const WINDOW_START_SECS: u32 = 60;
/// Length of the analysis window, in seconds.
pub const WINDOW_SECS: u32 = 60;
/// Songs shorter than this are rejected.
pub const MIN_SONG_SECS: u32 = WINDOW_START_SECS + WINDOW_SECS;

/// Mono PCM audio with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    pub source_path: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
            source_path: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Interleaved PCM as handed over by a decoder, before mixdown.
#[derive(Debug, Clone)]
pub struct RawAudio {
    pub interleaved: Vec<f32>,
    pub channels: u16,
    pub sample_rate: u32,
}

/// Pluggable decoder: a path in, raw interleaved PCM plus metadata out.
pub trait Decoder: Send + Sync {
    fn decode_raw(&self, path: &Path) -> Result<RawAudio>;
}

/// Built-in RIFF/WAVE decoder (8/16/24/32-bit integer, 32-bit float).
#[derive(Debug, Default, Clone, Copy)]
pub struct WavDecoder;

impl Decoder for WavDecoder {
    fn decode_raw(&self, path: &Path) -> Result<RawAudio> {
        let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
        read_wav(reader, path)
    }
}

/// Decoder that runs an external converter and reads WAVE from its stdout.
///
/// Arguments equal to `{input}` are replaced by the source path.
#[derive(Debug, Clone)]
pub struct CommandDecoder {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandDecoder {
    pub fn ffmpeg() -> Self {
        Self {
            program: "ffmpeg".into(),
            args: [
                "-v",
                "error",
                "-i",
                "{input}",
                "-f",
                "wav",
                "-acodec",
                "pcm_s16le",
                "-",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

impl Decoder for CommandDecoder {
    fn decode_raw(&self, path: &Path) -> Result<RawAudio> {
        let args: Vec<std::ffi::OsString> = self
            .args
            .iter()
            .map(|a| {
                if a == "{input}" {
                    path.as_os_str().to_owned()
                } else {
                    a.into()
                }
            })
            .collect();
        let output = Command::new(&self.program)
            .args(&args)
            .output()
            .map_err(|e| Error::UnsupportedCodec {
                path: path.to_path_buf(),
                reason: format!("external decoder {:?} unavailable: {e}", self.program),
            })?;
        if !output.status.success() {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                reason: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            });
        }
        let reader =
            hound::WavReader::new(Cursor::new(output.stdout)).map_err(|e| wav_error(path, e))?;
        read_wav(reader, path)
    }
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedCodec {
            path: path.to_path_buf(),
            reason: "unsupported WAVE sample format".into(),
        },
        other => Error::Decode {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

fn read_wav<R: std::io::Read>(reader: hound::WavReader<R>, path: &Path) -> Result<RawAudio> {
    let spec = reader.spec();
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 * scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (format, bits) => {
            return Err(Error::UnsupportedCodec {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    Ok(RawAudio {
        interleaved,
        channels: spec.channels,
        sample_rate: spec.sample_rate,
    })
}

fn is_wave(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("wav") || e.eq_ignore_ascii_case("wave"))
        .unwrap_or(false)
}

/// Decode `path` to a mono clip at [`PIPELINE_RATE`].
///
/// WAVE files are read in-process; other extensions go through
/// [`CommandDecoder::ffmpeg`].
pub fn decode(path: impl AsRef<Path>) -> Result<AudioClip> {
    decode_at(path, PIPELINE_RATE)
}

pub fn decode_at(path: impl AsRef<Path>, rate: u32) -> Result<AudioClip> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    if is_wave(path) {
        decode_with(path, &WavDecoder, rate)
    } else {
        decode_with(path, &CommandDecoder::ffmpeg(), rate)
    }
}

pub fn decode_with(path: &Path, decoder: &dyn Decoder, rate: u32) -> Result<AudioClip> {
    if rate == 0 {
        return Err(Error::InvalidArgument(
            "sample rate must be positive".into(),
        ));
    }
    let raw = decoder.decode_raw(path)?;
    if raw.channels == 0 || raw.sample_rate == 0 {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "zero channels or zero sample rate".into(),
        });
    }
    let mono = downmix(&raw.interleaved, raw.channels as usize);
    if mono.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let mut samples = resample(&mono, raw.sample_rate, rate);
    normalize_peak(&mut samples);
    Ok(AudioClip {
        samples,
        sample_rate: rate,
        source_path: path.display().to_string(),
    })
}

/// Average interleaved channels into one.
pub fn downmix(interleaved: &[f32], channels: usize) -> Vec<f32> {
    if channels == 1 {
        return interleaved.to_vec();
    }
    interleaved
        .chunks_exact(channels)
        .map(|frame| (frame.iter().map(|&s| s as f64).sum::<f64>() / channels as f64) as f32)
        .collect()
}

/// Replace non-finite samples with silence and scale down if the peak
/// exceeds full scale. Clips already inside [-1, 1] are left untouched.
fn normalize_peak(samples: &mut [f32]) {
    let mut peak = 0.0f32;
    for s in samples.iter_mut() {
        if !s.is_finite() {
            *s = 0.0;
        }
        peak = peak.max(s.abs());
    }
    if peak > 1.0 {
        let gain = 1.0 / peak;
        samples.iter_mut().for_each(|s| *s *= gain);
    }
}

const SINC_ZERO_CROSSINGS: usize = 24;
const SINC_TABLE_RESOLUTION: usize = 512;

/// Band-limited resampling by windowed-sinc interpolation.
///
/// The kernel is a Blackman-windowed sinc with 24 zero crossings per side,
/// its cutoff at 95 % of the lower Nyquist frequency. Kernel values come
/// from a table sampled at 1/512 of a tap and linearly interpolated.
pub fn resample(input: &[f32], from_rate: u32, to_rate: u32) -> Vec<f32> {
    if from_rate == to_rate || input.is_empty() {
        return input.to_vec();
    }
    let ratio = to_rate as f64 / from_rate as f64;
    let cutoff = 0.95 * ratio.min(1.0);
    let table = sinc_table();
    // Kernel half-width measured in input samples.
    let half_width = SINC_ZERO_CROSSINGS as f64 / cutoff;
    let out_len = ((input.len() as f64) * ratio).round() as usize;
    let step = from_rate as f64 / to_rate as f64;

    (0..out_len)
        .map(|n| {
            let center = n as f64 * step;
            let lo = (center - half_width).ceil().max(0.0) as usize;
            let hi = ((center + half_width).floor() as usize).min(input.len() - 1);
            let mut acc = 0.0f64;
            for (k, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
                let d = (center - k as f64).abs() * cutoff;
                acc += x as f64 * table_lookup(&table, d);
            }
            (acc * cutoff) as f32
        })
        .collect()
}

fn sinc_table() -> Vec<f64> {
    let n = SINC_ZERO_CROSSINGS * SINC_TABLE_RESOLUTION + 2;
    (0..n)
        .map(|i| {
            let x = i as f64 / SINC_TABLE_RESOLUTION as f64;
            if x >= SINC_ZERO_CROSSINGS as f64 {
                return 0.0;
            }
            let sinc = if x == 0.0 {
                1.0
            } else {
                (PI * x).sin() / (PI * x)
            };
            // Blackman window over [-Z, Z], evaluated at the right half.
            let t = 0.5 + x / (2.0 * SINC_ZERO_CROSSINGS as f64);
            let w = 0.42 - 0.5 * (2.0 * PI * t).cos() + 0.08 * (4.0 * PI * t).cos();
            sinc * w
        })
        .collect()
}

fn table_lookup(table: &[f64], x: f64) -> f64 {
    let pos = x * SINC_TABLE_RESOLUTION as f64;
    let i = pos as usize;
    if i + 1 >= table.len() {
        return 0.0;
    }
    let frac = pos - i as f64;
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

/// Cut the fixed analysis window `[60 s, 120 s)` out of a song.
pub fn sample_window(clip: &AudioClip) -> Result<AudioClip> {
    let rate = clip.sample_rate as usize;
    if clip.samples.len() < MIN_SONG_SECS as usize * rate {
        return Err(Error::ClipTooShort {
            seconds: clip.duration_secs(),
        });
    }
    let start = WINDOW_START_SECS as usize * rate;
    let end = start + WINDOW_SECS as usize * rate;
    Ok(AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate: clip.sample_rate,
        source_path: clip.source_path.clone(),
    })
}

/// Storage format for [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Int16,
    Int24,
    Float32,
}

/// Write a mono clip as RIFF/WAVE.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>, format: WavFormat) -> Result<()> {
    let path = path.as_ref();
    let (bits, sample_format) = match format {
        WavFormat::Int16 => (16, hound::SampleFormat::Int),
        WavFormat::Int24 => (24, hound::SampleFormat::Int),
        WavFormat::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: bits,
        sample_format,
    };
    write_interleaved(path, spec, &clip.samples)
}

/// Write interleaved samples with an explicit header; used for multi-channel fixtures.
pub fn write_interleaved(path: &Path, spec: hound::WavSpec, interleaved: &[f32]) -> Result<()> {
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    let result = match spec.sample_format {
        hound::SampleFormat::Float => interleaved.iter().try_for_each(|&s| writer.write_sample(s)),
        hound::SampleFormat::Int => {
            let full = (1i64 << (spec.bits_per_sample - 1)) as f64;
            interleaved.iter().try_for_each(|&s| {
                let v = (s as f64 * full).round().clamp(-full, full - 1.0) as i32;
                writer.write_sample(v)
            })
        }
    };
    result.map_err(|e| wav_error(path, e))?;
    writer.finalize().map_err(|e| wav_error(path, e))
}

/// Path helper used by batch commands: resolve `rel` against `root` unless absolute.
pub fn resolve_audio_path(root: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}
