//! Annotated songs, phrase embeddings and the persisted training dataset.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::resolve_audio_path;
use crate::consensus::{self, RhythmVector};
use crate::error::{Error, Result};
use crate::extract::{self, ExtractConfig};

pub const EMBEDDING_DIM: usize = 768;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SongAnnotation {
    pub artist: String,
    pub title: String,
    pub phrases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
}

impl SongAnnotation {
    fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidAnnotation {
            artist: self.artist.clone(),
            title: self.title.clone(),
            reason: reason.into(),
        };
        if self.phrases.is_empty() {
            return Err(invalid("phrases list is empty"));
        }
        if self.phrases.iter().any(|p| p.trim().is_empty()) {
            return Err(invalid("blank phrase"));
        }
        Ok(())
    }
}

/// A 768-dimensional phrase embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != EMBEDDING_DIM {
            return Err(Error::Dimension {
                what: "embedding".into(),
                expected: EMBEDDING_DIM,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros() -> Self {
        Self {
            values: vec![0.0; EMBEDDING_DIM],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// SHA-256 over the little-endian bytes of the values, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.values {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(e: EmbeddingVector) -> Self {
        e.values
    }
}

/// Read JSON Lines annotations. Blank lines are skipped; duplicate
/// (artist, title) pairs and empty phrase lists are rejected.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<SongAnnotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text)
}

pub fn parse_annotations(text: &str) -> Result<Vec<SongAnnotation>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ann: SongAnnotation = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        ann.validate()?;
        if !seen.insert((ann.artist.clone(), ann.title.clone())) {
            return Err(Error::DuplicateSong {
                artist: ann.artist,
                title: ann.title,
            });
        }
        out.push(ann);
    }
    Ok(out)
}

/// Elementwise arithmetic mean.
pub fn average_embeddings(vectors: &[EmbeddingVector]) -> Result<EmbeddingVector> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot average an empty embedding list".into(),
        ));
    }
    let n = vectors.len() as f64;
    let values = (0..EMBEDDING_DIM)
        .map(|i| vectors.iter().map(|v| v.values[i]).sum::<f64>() / n)
        .collect();
    EmbeddingVector::new(values)
}

/// Deterministic stand-in for a language model: the phrase and seed are
/// hashed into an RNG seed and a Gaussian vector is drawn and normalised
/// to unit length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PseudoEmbedder {
    pub seed: u64,
}

impl PseudoEmbedder {
    pub fn embed(&self, phrase: &str) -> EmbeddingVector {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(phrase.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(digest);
        let raw: Vec<f64> = (0..EMBEDDING_DIM)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        EmbeddingVector {
            values: raw.iter().map(|v| v / norm).collect(),
        }
    }
}

/// Where phrase embeddings come from.
#[derive(Debug, Clone)]
pub enum EmbeddingSource {
    Table(BTreeMap<String, EmbeddingVector>),
    Pseudo(PseudoEmbedder),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EmbeddingFile {
    Wrapped {
        embeddings: BTreeMap<String, EmbeddingVector>,
    },
    Flat(BTreeMap<String, serde_json::Value>),
}

impl EmbeddingSource {
    /// Load a phrase → vector JSON object. The object may also be wrapped as
    /// `{"metadata": {...}, "embeddings": {...}}`; a top-level `metadata`
    /// object in the flat form is ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_str(text)?;
        let table = match file {
            EmbeddingFile::Wrapped { embeddings } => embeddings,
            EmbeddingFile::Flat(map) => {
                let mut table = BTreeMap::new();
                for (phrase, value) in map {
                    if phrase == "metadata" && value.is_object() {
                        continue;
                    }
                    let v: Vec<f64> = serde_json::from_value(value)?;
                    table.insert(phrase, EmbeddingVector::new(v)?);
                }
                table
            }
        };
        Ok(EmbeddingSource::Table(table))
    }

    pub fn lookup(&self, phrase: &str) -> Result<EmbeddingVector> {
        match self {
            EmbeddingSource::Table(t) => t
                .get(phrase)
                .cloned()
                .ok_or_else(|| Error::MissingEmbedding(phrase.to_string())),
            EmbeddingSource::Pseudo(p) => Ok(p.embed(phrase)),
        }
    }

    /// Mean embedding of `phrases`.
    pub fn embed_phrases<S: AsRef<str>>(&self, phrases: &[S]) -> Result<EmbeddingVector> {
        let vectors: Vec<EmbeddingVector> = phrases
            .iter()
            .map(|p| self.lookup(p.as_ref()))
            .collect::<Result<_>>()?;
        average_embeddings(&vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub annotation: SongAnnotation,
    pub embedding: EmbeddingVector,
    pub target: RhythmVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn new(records: Vec<DatasetRecord>) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            records,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ds: Dataset = serde_json::from_str(&text)?;
        if ds.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "dataset schema version {} is not supported",
                ds.schema_version
            )));
        }
        for r in &ds.records {
            RhythmVector::new(r.target.values.clone())?;
        }
        Ok(ds)
    }
}

/// A song left out of the dataset and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipReport {
    pub artist: String,
    pub title: String,
    pub reason: String,
}

impl std::fmt::Display for SkipReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SKIP {} - {}: {}", self.artist, self.title, self.reason)
    }
}

/// Extract a target pattern for every annotated song and pair it with the
/// song's averaged phrase embedding.
///
/// Missing embeddings and missing audio files are hard errors, checked
/// before any extraction runs. Songs whose extraction fails (unreadable
/// audio, too short, no usable onsets) are skipped and reported. Records
/// keep the annotation order.
pub fn build_dataset(
    annotations: &[SongAnnotation],
    embeddings: &EmbeddingSource,
    audio_root: &Path,
    cfg: &ExtractConfig,
) -> Result<(Dataset, Vec<SkipReport>)> {
    let mut jobs = Vec::with_capacity(annotations.len());
    for ann in annotations {
        let embedding = embeddings.embed_phrases(&ann.phrases)?;
        let rel = ann
            .audio_path
            .as_deref()
            .ok_or_else(|| Error::InvalidAnnotation {
                artist: ann.artist.clone(),
                title: ann.title.clone(),
                reason: "audio_path is required for extraction".into(),
            })?;
        let path = resolve_audio_path(audio_root, rel);
        if !path.is_file() {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "audio file not found"),
            ));
        }
        jobs.push((ann, embedding, path));
    }

    let results: Vec<std::result::Result<DatasetRecord, SkipReport>> = jobs
        .into_par_iter()
        .map(
            |(ann, embedding, path)| match extract::extract_file(&path, cfg) {
                Ok(ex) => Ok(DatasetRecord {
                    annotation: ann.clone(),
                    embedding,
                    target: consensus::to_vector(&ex.pattern),
                }),
                Err(e) => Err(SkipReport {
                    artist: ann.artist.clone(),
                    title: ann.title.clone(),
                    reason: e.to_string(),
                }),
            },
        )
        .collect();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(s) => skipped.push(s),
        }
    }
    Ok((Dataset::new(records), skipped))
}
