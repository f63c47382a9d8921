//! Sliding-window consensus over the four instrument tracks, and the
//! 129-value rhythm vector layout.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::clustering::Role;
use crate::error::{Error, Result};

/// Two bars of 16th notes.
pub const PATTERN_STEPS: usize = 32;
/// Tempo plus four 32-step tracks.
pub const VECTOR_DIM: usize = 1 + 4 * PATTERN_STEPS;
/// Windows advance one bar at a time.
pub const WINDOW_STRIDE: usize = 16;

pub type Track = [u8; PATTERN_STEPS];

/// Tempo and four binary tracks, stored in role order snare, kick, other
/// percussion, hi-hat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PatternJson", try_from = "PatternJson")]
pub struct ConsensusPattern {
    pub tempo_bpm: u32,
    pub tracks: [Track; 4],
    pub source_window: usize,
}

impl ConsensusPattern {
    pub fn empty(tempo_bpm: u32) -> Self {
        Self {
            tempo_bpm,
            tracks: [[0; PATTERN_STEPS]; 4],
            source_window: 0,
        }
    }

    pub fn track(&self, role: Role) -> &Track {
        &self.tracks[role.index()]
    }

    pub fn track_mut(&mut self, role: Role) -> &mut Track {
        &mut self.tracks[role.index()]
    }

    pub fn beat_count(&self) -> usize {
        self.tracks.iter().flatten().filter(|&&b| b != 0).count()
    }

    /// Number of tracks with at least one beat.
    pub fn active_instruments(&self) -> usize {
        self.tracks
            .iter()
            .filter(|t| t.iter().any(|&b| b != 0))
            .count()
    }

    /// Pattern built from explicit beat steps per role.
    pub fn from_steps(tempo_bpm: u32, steps: &[(Role, &[usize])]) -> Self {
        let mut p = Self::empty(tempo_bpm);
        for (role, list) in steps {
            for &s in list.iter() {
                p.track_mut(*role)[s] = 1;
            }
        }
        p
    }

    pub fn steps_of(&self, role: Role) -> Vec<usize> {
        self.track(role)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PatternJson {
    #[serde(default = "schema_version")]
    schema_version: u32,
    tempo: u32,
    tracks: TracksJson,
    source_window: usize,
}

fn schema_version() -> u32 {
    crate::SCHEMA_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TracksJson {
    snare: Vec<u8>,
    kick: Vec<u8>,
    other: Vec<u8>,
    hihat: Vec<u8>,
}

impl From<ConsensusPattern> for PatternJson {
    fn from(p: ConsensusPattern) -> Self {
        PatternJson {
            schema_version: crate::SCHEMA_VERSION,
            tempo: p.tempo_bpm,
            tracks: TracksJson {
                snare: p.tracks[0].to_vec(),
                kick: p.tracks[1].to_vec(),
                other: p.tracks[2].to_vec(),
                hihat: p.tracks[3].to_vec(),
            },
            source_window: p.source_window,
        }
    }
}

impl TryFrom<PatternJson> for ConsensusPattern {
    type Error = String;

    fn try_from(j: PatternJson) -> std::result::Result<Self, Self::Error> {
        let conv = |name: &str, v: Vec<u8>| -> std::result::Result<Track, String> {
            if v.iter().any(|&b| b > 1) {
                return Err(format!("track {name} has non-binary entries"));
            }
            v.try_into()
                .map_err(|v: Vec<u8>| format!("track {name} has {} entries, expected 32", v.len()))
        };
        Ok(ConsensusPattern {
            tempo_bpm: j.tempo,
            tracks: [
                conv("snare", j.tracks.snare)?,
                conv("kick", j.tracks.kick)?,
                conv("other", j.tracks.other)?,
                conv("hihat", j.tracks.hihat)?,
            ],
            source_window: j.source_window,
        })
    }
}

/// Beat steps per role, indexed by [`Role::index`]; absent instruments are empty.
pub type RoleSteps = [BTreeSet<usize>; 4];

fn window_key(tracks: &RoleSteps, start: usize) -> [u32; 4] {
    let mut key = [0u32; 4];
    for (k, steps) in key.iter_mut().zip(tracks) {
        for &s in steps.range(start..start + PATTERN_STEPS) {
            *k |= 1 << (s - start);
        }
    }
    key
}

/// Most common 32-step window over bar-aligned starts (stride 16).
///
/// Ties go first to the window with beats in more instruments, then to the
/// earliest occurrence.
pub fn find_consensus(
    tracks: &RoleSteps,
    n_steps: usize,
    tempo_bpm: u32,
) -> Result<ConsensusPattern> {
    if n_steps < PATTERN_STEPS {
        return Err(Error::WindowTooShort { n_steps });
    }
    // key -> (count, first start)
    let mut counts: HashMap<[u32; 4], (usize, usize)> = HashMap::new();
    let mut start = 0;
    while start + PATTERN_STEPS <= n_steps {
        let entry = counts
            .entry(window_key(tracks, start))
            .or_insert((0, start));
        entry.0 += 1;
        start += WINDOW_STRIDE;
    }
    let instruments = |key: &[u32; 4]| key.iter().filter(|&&k| k != 0).count();
    let (key, (_, first)) = counts
        .into_iter()
        .max_by(|(ka, (ca, fa)), (kb, (cb, fb))| {
            ca.cmp(cb)
                .then(instruments(ka).cmp(&instruments(kb)))
                .then(fb.cmp(fa))
        })
        .expect("at least one window");

    let mut pattern = ConsensusPattern::empty(tempo_bpm);
    pattern.source_window = first;
    for (track, bits) in pattern.tracks.iter_mut().zip(key) {
        for (i, b) in track.iter_mut().enumerate() {
            *b = ((bits >> i) & 1) as u8;
        }
    }
    Ok(pattern)
}

/// Rotate every track left by `shift` steps (cyclically).
pub fn rotate(pattern: &ConsensusPattern, shift: usize) -> ConsensusPattern {
    let mut out = pattern.clone();
    for (dst, src) in out.tracks.iter_mut().zip(&pattern.tracks) {
        for (i, b) in dst.iter_mut().enumerate() {
            *b = src[(i + shift) % PATTERN_STEPS];
        }
    }
    out
}

/// Track priority when choosing the canonical loop start.
const CANONICAL_PRIORITY: [Role; 4] = [Role::Kick, Role::Snare, Role::OtherPercussion, Role::Hihat];

/// Cyclic rotation amount that [`canonical_rotation`] applies.
pub fn canonical_shift(pattern: &ConsensusPattern) -> usize {
    let key = |shift: usize| -> Vec<u8> {
        CANONICAL_PRIORITY
            .iter()
            .flat_map(|&r| {
                let t = pattern.track(r);
                (0..PATTERN_STEPS).map(move |i| t[(i + shift) % PATTERN_STEPS])
            })
            .collect()
    };
    // Lexicographic maximum; the smallest shift wins ties.
    (0..PATTERN_STEPS)
        .map(|s| (key(s), s))
        .max_by(|(ka, sa), (kb, sb)| ka.cmp(kb).then(sb.cmp(sa)))
        .map(|(_, s)| s)
        .unwrap_or(0)
}

/// Start the loop where its earliest kicks fall: the rotation whose tracks,
/// read kick, snare, other, hi-hat with step 0 first, form the
/// lexicographically largest bit string. A cyclic loop has no intrinsic
/// first step, so this makes every rotation of the same loop compare equal.
pub fn canonical_rotation(pattern: &ConsensusPattern) -> ConsensusPattern {
    rotate(pattern, canonical_shift(pattern))
}

/// `[tempo, snare[0..32], kick[0..32], other[0..32], hihat[0..32]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RhythmVector {
    pub values: Vec<f64>,
}

impl RhythmVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != VECTOR_DIM {
            return Err(Error::Dimension {
                what: "rhythm vector".into(),
                expected: VECTOR_DIM,
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn tempo(&self) -> f64 {
        self.values[0]
    }

    pub fn pattern(&self) -> &[f64] {
        &self.values[1..]
    }
}

pub fn to_vector(pattern: &ConsensusPattern) -> RhythmVector {
    let mut values = Vec::with_capacity(VECTOR_DIM);
    values.push(pattern.tempo_bpm as f64);
    for track in &pattern.tracks {
        values.extend(track.iter().map(|&b| b as f64));
    }
    RhythmVector { values }
}

/// Inverse of [`to_vector`]: tempo rounded to an integer, any nonzero
/// pattern entry read as a beat.
pub fn from_vector(v: &RhythmVector) -> ConsensusPattern {
    let mut p = ConsensusPattern::empty(v.tempo().round().max(0.0) as u32);
    for (r, track) in p.tracks.iter_mut().enumerate() {
        for (i, b) in track.iter_mut().enumerate() {
            *b = (v.values[1 + r * PATTERN_STEPS + i] != 0.0) as u8;
        }
    }
    p
}
