//! Synthetic drum loops with known ground truth, for tests, demos and
//! benchmarks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioClip;
use crate::clustering::Role;
use crate::consensus::{ConsensusPattern, PATTERN_STEPS};

/// Four timbres occupying separate frequency regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Voice {
    /// Low sine sweep with a low-passed noise thump.
    Kick,
    /// Band-passed noise around 2.5 kHz.
    Snare,
    /// Band-passed noise around 600 Hz over a decaying 250 Hz tone.
    Tom,
    /// Noise band-limited to 5 to 9 kHz.
    Hat,
}

/// RBJ biquad, direct form I.
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
}

impl Biquad {
    fn new(kind: FilterKind, freq: f64, q: f64, rate: f64) -> Self {
        let w0 = 2.0 * PI * freq / rate;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        let (b, a0, a) = match kind {
            FilterKind::LowPass => (
                [(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0],
                1.0 + alpha,
                [-2.0 * c, 1.0 - alpha],
            ),
            FilterKind::HighPass => (
                [(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0],
                1.0 + alpha,
                [-2.0 * c, 1.0 - alpha],
            ),
            FilterKind::BandPass => ([alpha, 0.0, -alpha], 1.0 + alpha, [-2.0 * c, 1.0 - alpha]),
        };
        Self {
            b: b.map(|v| v / a0),
            a: a.map(|v| v / a0),
            x: [0.0; 2],
            y: [0.0; 2],
        }
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.b[1] * self.x[0] + self.b[2] * self.x[1]
            - self.a[0] * self.y[0]
            - self.a[1] * self.y[1];
        self.x = [x, self.x[0]];
        self.y = [y, self.y[0]];
        y
    }
}

#[allow(clippy::enum_variant_names)]
#[derive(Clone, Copy)]
enum FilterKind {
    LowPass,
    HighPass,
    BandPass,
}

fn noise(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn filtered(mut x: Vec<f64>, stages: &[(FilterKind, f64, f64)], rate: f64) -> Vec<f64> {
    for &(kind, f, q) in stages {
        let mut bq = Biquad::new(kind, f, q, rate);
        x.iter_mut().for_each(|v| *v = bq.process(*v));
    }
    x
}

fn normalize(mut x: Vec<f64>) -> Vec<f32> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v /= peak);
    }
    x.into_iter().map(|v| v as f32).collect()
}

impl Voice {
    /// One hit at full velocity, peak-normalised.
    pub fn render(self, rate: u32, seed: u64) -> Vec<f32> {
        let r = rate as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((self as u64 + 1) * 0x9e37_79b9));
        let env = |len: usize, decay: f64| -> Vec<f64> {
            (0..len).map(|i| (-(i as f64 / r) / decay).exp()).collect()
        };
        match self {
            Voice::Kick => {
                let len = (0.12 * r) as usize;
                let e = env(len, 0.035);
                let mut phase = 0.0;
                let thump = filtered(
                    noise(len, &mut rng),
                    &[(FilterKind::LowPass, 150.0, 0.7)],
                    r,
                );
                let body: Vec<f64> = (0..len)
                    .map(|i| {
                        let t = i as f64 / r;
                        let f = 45.0 + 75.0 * (-t / 0.03).exp();
                        phase += 2.0 * PI * f / r;
                        (phase.sin() + 0.5 * thump[i]) * e[i]
                    })
                    .collect();
                normalize(body)
            }
            Voice::Snare => {
                let len = (0.08 * r) as usize;
                let e = env(len, 0.02);
                let band = filtered(
                    noise(len, &mut rng),
                    &[
                        (FilterKind::BandPass, 2500.0, 1.2),
                        (FilterKind::BandPass, 2500.0, 1.2),
                    ],
                    r,
                );
                normalize(band.iter().zip(&e).map(|(n, e)| n * e).collect())
            }
            Voice::Tom => {
                let len = (0.10 * r) as usize;
                let e = env(len, 0.03);
                let band = filtered(
                    noise(len, &mut rng),
                    &[
                        (FilterKind::BandPass, 600.0, 1.5),
                        (FilterKind::BandPass, 600.0, 1.5),
                    ],
                    r,
                );
                let peak = band.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
                normalize(
                    (0..len)
                        .map(|i| {
                            let t = i as f64 / r;
                            ((2.0 * PI * 250.0 * t).sin() * 0.6 + band[i] / peak) * e[i]
                        })
                        .collect(),
                )
            }
            Voice::Hat => {
                let len = (0.05 * r) as usize;
                let e = env(len, 0.012);
                let hp = filtered(
                    noise(len, &mut rng),
                    &[
                        (FilterKind::HighPass, 5000.0, 0.7),
                        (FilterKind::HighPass, 5000.0, 0.7),
                        (FilterKind::LowPass, 9000.0, 0.7),
                        (FilterKind::LowPass, 9000.0, 0.7),
                    ],
                    r,
                );
                normalize(hp.iter().zip(&e).map(|(n, e)| n * e).collect())
            }
        }
    }
}

/// Description of a synthetic song: a 2-bar pattern looped at a fixed tempo.
#[derive(Debug, Clone)]
pub struct LoopSpec {
    pub pattern: ConsensusPattern,
    pub bpm: f64,
    pub duration_secs: f64,
    pub sample_rate: u32,
    /// Voice and base gain per role, indexed by [`Role::index`].
    pub voices: [(Voice, f32); 4],
    /// Extra gain for hits on step 0 of the loop.
    pub accent: f32,
    /// Uniform per-hit velocity jitter (± fraction).
    pub humanize: f32,
    /// Time of the first loop start, in seconds.
    pub offset_secs: f64,
    pub seed: u64,
}

impl LoopSpec {
    pub fn new(pattern: ConsensusPattern, bpm: f64) -> Self {
        Self {
            pattern,
            bpm,
            duration_secs: 180.0,
            sample_rate: crate::audio::PIPELINE_RATE,
            voices: default_voices(),
            accent: 1.0,
            humanize: 0.08,
            offset_secs: 0.0,
            seed: 1,
        }
    }
}

/// Voice and gain per role (snare, kick, other, hi-hat), chosen so median
/// onset strength increases in role order.
pub fn default_voices() -> [(Voice, f32); 4] {
    [
        (Voice::Snare, 0.12),
        (Voice::Kick, 0.7),
        (Voice::Tom, 0.55),
        (Voice::Hat, 0.5),
    ]
}

/// Render the loop described by `spec`.
pub fn render_loop(spec: &LoopSpec) -> AudioClip {
    let rate = spec.sample_rate;
    let n = (spec.duration_secs * rate as f64).round() as usize;
    let mut out = vec![0.0f64; n];
    let step_secs = 15.0 / spec.bpm;
    let loop_secs = step_secs * PATTERN_STEPS as f64;
    let hits: Vec<Vec<f32>> = spec
        .voices
        .iter()
        .map(|(v, _)| v.render(rate, spec.seed))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut loop_start = spec.offset_secs.rem_euclid(loop_secs) - loop_secs;
    while loop_start < spec.duration_secs {
        for step in 0..PATTERN_STEPS {
            for role in Role::ALL {
                if spec.pattern.track(role)[step] == 0 {
                    continue;
                }
                let jitter = 1.0 + spec.humanize * rng.gen_range(-1.0f32..1.0);
                let t = loop_start + step as f64 * step_secs;
                if t < 0.0 {
                    continue;
                }
                let (_, gain) = spec.voices[role.index()];
                let accent = if step == 0 { spec.accent } else { 1.0 };
                let g = (gain * accent * jitter) as f64;
                let start = (t * rate as f64).round() as usize;
                for (i, &s) in hits[role.index()].iter().enumerate() {
                    match out.get_mut(start + i) {
                        Some(o) => *o += g * s as f64,
                        None => break,
                    }
                }
            }
        }
        loop_start += loop_secs;
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.99 { 0.99 / peak } else { 1.0 };
    AudioClip::new(out.into_iter().map(|v| (v * scale) as f32).collect(), rate)
}

/// Kick, snare and tom on the beat, hi-hat on every off-beat eighth. No two
/// instruments share a step, so every hit is a separate onset, and the
/// pattern is already in canonical rotation.
pub fn reference_pattern(tempo_bpm: u32) -> ConsensusPattern {
    ConsensusPattern::from_steps(
        tempo_bpm,
        &[
            (Role::Kick, &[0, 8, 20]),
            (Role::Snare, &[4, 12, 28]),
            (Role::OtherPercussion, &[16, 24]),
            (Role::Hihat, &[2, 6, 10, 14, 18, 22, 26, 30]),
        ],
    )
}
