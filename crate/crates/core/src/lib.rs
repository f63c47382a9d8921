//! Consensus drum loop extraction from percussive audio, and a small
//! regression network that maps phrase embeddings to 2-bar drum patterns.
//!
//! The extraction pipeline runs, in order:
//!
//! 1. [`audio`]: decode to mono 22.05 kHz and cut the 60 s analysis window.
//! 2. [`spectral`]: STFT and median-filter harmonic/percussive separation.
//! 3. [`rhythm`]: onset envelope, onset picking, click-track tempo, 16th-note grid.
//! 4. [`clustering`]: k-means over onset spectra, instrument role assignment.
//! 5. [`consensus`]: most common 32-step window across the four tracks.
//!
//! [`extract::extract_file`] wires these together. [`model`] holds the
//! 768→400→129 network and its training harness, [`corpus`] the dataset
//! plumbing and [`codec`] the text/sequencer output formats.

pub mod audio;
pub mod clustering;
pub mod codec;
pub mod consensus;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod model;
pub mod rhythm;
pub mod spectral;
pub mod stats;
pub mod synth;

pub use audio::AudioClip;
pub use clustering::{InstrumentTrack, Role};
pub use consensus::{ConsensusPattern, RhythmVector, PATTERN_STEPS, VECTOR_DIM};
pub use corpus::{DatasetRecord, EmbeddingVector, SongAnnotation, EMBEDDING_DIM};
pub use error::{Error, Result};
pub use model::{ModelParams, TrainConfig};
pub use rhythm::{OnsetEvent, RhythmGrid, TempoEstimate};

/// Schema version written into every JSON/CSV artifact this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
