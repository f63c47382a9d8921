use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beatmine::audio::{self, WavFormat};
use beatmine::codec;
use beatmine::consensus;
use beatmine::corpus::{self, Dataset, DatasetRecord, PseudoEmbedder, SongAnnotation};
use beatmine::synth::{self, LoopSpec};

fn beatmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beatmine"))
        .args(args)
        .output()
        .expect("run beatmine")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_loop(path: &Path, bpm: u32, secs: f64) {
    let mut spec = LoopSpec::new(synth::reference_pattern(bpm), bpm as f64);
    spec.duration_secs = secs;
    spec.seed = 2;
    audio::write_wav(&synth::render_loop(&spec), path, WavFormat::Int16).unwrap();
}

fn write_dataset(path: &Path, n: usize) {
    let embedder = PseudoEmbedder { seed: 5 };
    let records = (0..n)
        .map(|i| {
            let phrase = format!("phrase {i}");
            let mut pattern = consensus::ConsensusPattern::empty(80 + i as u32);
            pattern.tracks[i % 4][i % 32] = 1;
            pattern.tracks[(i + 1) % 4][(3 * i) % 32] = 1;
            DatasetRecord {
                annotation: SongAnnotation {
                    artist: format!("artist {i}"),
                    title: format!("title {i}"),
                    phrases: vec![phrase.clone()],
                    audio_path: None,
                },
                embedding: embedder.embed(&phrase),
                target: consensus::to_vector(&pattern),
            }
        })
        .collect();
    Dataset::new(records).save(path).unwrap();
}

fn trained_model(dir: &Path) -> PathBuf {
    let data = dir.join("data.json");
    let model = dir.join("model.json");
    write_dataset(&data, 10);
    let o = beatmine(&[
        "train",
        "--dataset",
        p(&data),
        "--out",
        p(&model),
        "--epochs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    model
}

#[test]
fn help_exits_zero_and_unknown_command_exits_one() {
    assert_eq!(beatmine(&["--help"]).status.code(), Some(0));
    assert_eq!(beatmine(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn extract_recovers_a_synthetic_loop() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("loop.wav");
    let json = dir.path().join("pattern.json");
    write_loop(&wav, 120, 125.0);
    let o = beatmine(&["extract", p(&wav), "--out", p(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let printed = codec::parse_text(&stdout(&o)).unwrap();
    assert_eq!(printed.tracks, synth::reference_pattern(120).tracks);
    assert_eq!(printed.tempo_bpm, 120);
    let saved: consensus::ConsensusPattern =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(saved.tracks, printed.tracks);
}

#[test]
fn extract_rejects_short_song_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("short.wav");
    write_loop(&wav, 120, 90.0);
    let o = beatmine(&["extract", p(&wav)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("song shorter than 2 minutes"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn extract_missing_file_exits_one() {
    let o = beatmine(&["extract", "/definitely/not/here.wav"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("here.wav"));
}

fn annotation_line(artist: &str, title: &str, phrase: &str, audio: &str) -> String {
    serde_json::json!({"artist": artist, "title": title, "phrases": [phrase], "audio_path": audio})
        .to_string()
}

#[test]
fn build_corpus_skips_unreadable_audio() {
    let dir = tempfile::tempdir().unwrap();
    write_loop(&dir.path().join("a.wav"), 120, 125.0);
    write_loop(&dir.path().join("b.wav"), 100, 125.0);
    std::fs::write(dir.path().join("c.wav"), b"not audio at all").unwrap();
    let ann = dir.path().join("songs.jsonl");
    std::fs::write(
        &ann,
        [
            annotation_line("A", "One", "sunny day", "a.wav"),
            annotation_line("B", "Two", "rainy night", "b.wav"),
            annotation_line("C", "Three", "broken", "c.wav"),
        ]
        .join("\n"),
    )
    .unwrap();
    let out = dir.path().join("data.json");
    let o = beatmine(&[
        "build-corpus",
        "--annotations",
        p(&ann),
        "--pseudo-embeddings",
        "1",
        "--audio-root",
        p(dir.path()),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ds = Dataset::load(&out).unwrap();
    assert_eq!(ds.records.len(), 2);
    let skips: Vec<String> = stderr(&o)
        .lines()
        .filter(|l| l.starts_with("SKIP"))
        .map(String::from)
        .collect();
    assert_eq!(skips.len(), 1, "{skips:?}");
    assert!(skips[0].contains("C - Three"));
}

#[test]
fn build_corpus_missing_embedding_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.wav"), b"").unwrap();
    let ann = dir.path().join("songs.jsonl");
    std::fs::write(&ann, annotation_line("A", "One", "unknown phrase", "a.wav")).unwrap();
    let emb = dir.path().join("emb.json");
    std::fs::write(&emb, format!("{{\"other\": {:?}}}", vec![0.0; 768])).unwrap();
    let o = beatmine(&[
        "build-corpus",
        "--annotations",
        p(&ann),
        "--embeddings",
        p(&emb),
        "--audio-root",
        p(dir.path()),
        "--out",
        p(&dir.path().join("out.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown phrase"), "{}", stderr(&o));
}

#[test]
fn train_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = trained_model(dir.path());
    let first = std::fs::read(&a).unwrap();
    let b = trained_model(dir.path());
    assert_eq!(first, std::fs::read(b).unwrap());
}

#[test]
fn cv_writes_one_row_per_fold_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.json");
    let csv = dir.path().join("cv.csv");
    write_dataset(&data, 12);
    let args = [
        "cv",
        "--dataset",
        p(&data),
        "--out",
        p(&csv),
        "--folds",
        "4",
        "--repeats",
        "2",
        "--epochs",
        "2",
    ];
    let o = beatmine(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("repeat,fold,train_loss,val_loss"));
    assert_eq!(lines.count(), 8);

    let too_many = [
        "cv",
        "--dataset",
        p(&data),
        "--out",
        p(&csv),
        "--folds",
        "13",
        "--epochs",
        "1",
    ];
    assert_eq!(beatmine(&too_many).status.code(), Some(1));
}

#[test]
fn generate_prints_a_parseable_loop() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained_model(dir.path());
    let o = beatmine(&[
        "generate",
        "--model",
        p(&model),
        "--pseudo-embeddings",
        "5",
        "phrase 3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let diagram: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    let pattern = codec::parse_text(&diagram).unwrap();
    assert!(pattern.beat_count() <= 32);
    let seq = text.lines().nth(5).unwrap();
    let (id, entries) = codec::parse_sequencer(seq).unwrap();
    assert_eq!(id, codec::DEFAULT_SEQUENCE_ID);
    assert_eq!(entries.len(), pattern.beat_count());
}

#[test]
fn generate_rejects_wrong_embedding_length() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained_model(dir.path());
    let short = format!("{:?}", vec![0.5; 767]);
    let o = beatmine(&["generate", "--model", p(&model), "--embedding-json", &short]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generate_averages_phrase_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained_model(dir.path());
    let o = beatmine(&[
        "generate",
        "--model",
        p(&model),
        "--pseudo-embeddings",
        "5",
        "--print-embedding-hash",
        "first phrase",
        "second phrase",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let e = PseudoEmbedder { seed: 5 };
    let mean =
        corpus::average_embeddings(&[e.embed("first phrase"), e.embed("second phrase")]).unwrap();
    let line = format!("embedding sha256: {}", mean.fingerprint());
    assert!(stderr(&o).lines().any(|l| l == line), "{}", stderr(&o));
}
