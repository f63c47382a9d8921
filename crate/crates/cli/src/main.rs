use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beatmine::audio::{self, WavFormat};
use beatmine::clustering::parse_role_order;
use beatmine::codec::{self, SequencerNoteMap};
use beatmine::corpus::{self, Dataset, EmbeddingSource, EmbeddingVector, PseudoEmbedder};
use beatmine::extract::{self, ExtractConfig};
use beatmine::model::{self, Model, OutputGradient, TrainConfig};
use beatmine::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "beatmine",
    version,
    about = "Consensus drum-loop extraction and phrase-to-pattern generation"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Seed for k-means, weight initialisation and shuffling.
    #[arg(long, global = true, default_value_t = beatmine::clustering::DEFAULT_SEED)]
    seed: u64,
    /// Pipeline sample rate in Hz.
    #[arg(long, global = true, default_value_t = audio::PIPELINE_RATE)]
    sample_rate: u32,
    /// Median filter lengths as TIMExFREQ (odd frame and bin counts).
    #[arg(long, global = true, default_value = "75x75", value_parser = parse_kernel)]
    hpss_kernel: (usize, usize),
    /// Tempo scaling used in training, or `off` to train on raw BPM.
    #[arg(long, global = true, default_value = "0.005", value_parser = parse_tempo_scale)]
    tempo_scale: f64,
    /// Online Sequencer sequence id.
    #[arg(long, global = true, default_value_t = codec::DEFAULT_SEQUENCE_ID)]
    sequence_id: u64,
    /// Override a role's sequencer note, e.g. `kick=C2`. Repeatable.
    #[arg(long, global = true, value_name = "ROLE=NOTE")]
    note_map: Vec<String>,
    /// Roles assigned by increasing median onset strength.
    #[arg(long, global = true, default_value = "snare,kick,other,hihat")]
    role_order: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract the consensus drum loop of one song.
    Extract(ExtractArgs),
    /// Build a training dataset from annotated songs.
    BuildCorpus(BuildCorpusArgs),
    /// Train the network and write a model file.
    Train(TrainArgs),
    /// Repeated k-fold cross-validation, written as CSV.
    Cv(CvArgs),
    /// Generate a drum loop for a phrase.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct ExtractArgs {
    audio: PathBuf,
    /// Write the pattern as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the strong-onset click track as WAV.
    #[arg(long)]
    clicks_out: Option<PathBuf>,
    /// Write every detected onset as JSON.
    #[arg(long)]
    onsets_out: Option<PathBuf>,
    /// Write the instrument clusters as JSON.
    #[arg(long)]
    clusters_out: Option<PathBuf>,
    /// Keep the consensus window as found instead of rotating it to start on the kick.
    #[arg(long)]
    no_rotate: bool,
}

#[derive(Args, Debug)]
struct EmbeddingOpts {
    /// Phrase → 768-vector JSON file.
    #[arg(long, conflicts_with = "pseudo_embeddings")]
    embeddings: Option<PathBuf>,
    /// Use the built-in deterministic pseudo-embeddings with this seed.
    #[arg(long, value_name = "SEED")]
    pseudo_embeddings: Option<u64>,
}

impl EmbeddingOpts {
    fn source(&self) -> Result<Option<EmbeddingSource>, Error> {
        match (&self.embeddings, self.pseudo_embeddings) {
            (Some(path), _) => EmbeddingSource::load(path).map(Some),
            (None, Some(seed)) => Ok(Some(EmbeddingSource::Pseudo(PseudoEmbedder { seed }))),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
struct BuildCorpusArgs {
    /// JSON Lines file, one {artist, title, phrases, audio_path} per line.
    #[arg(long)]
    annotations: PathBuf,
    #[command(flatten)]
    embeddings: EmbeddingOpts,
    /// Directory that relative audio paths are resolved against.
    #[arg(long, default_value = ".")]
    audio_root: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainOpts {
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.001)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    huber_delta: f64,
    /// Early-stopping patience in epochs (with a validation split).
    #[arg(long, default_value_t = 50)]
    patience: usize,
    /// Pass loss gradients through outputs zeroed by the top-32 activation.
    #[arg(long)]
    straight_through: bool,
}

impl TrainOpts {
    fn config(&self, g: &GlobalOpts) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.epochs,
            patience: self.patience,
            huber_delta: self.huber_delta,
            seed: g.seed,
            tempo_scale: g.tempo_scale,
            output_gradient: if self.straight_through {
                OutputGradient::StraightThrough
            } else {
                OutputGradient::Masked
            },
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    opts: TrainOpts,
    /// Hold out this fraction of records (seeded shuffle) for early stopping.
    #[arg(long, default_value_t = 0.0)]
    val_fraction: f64,
    /// Write the per-epoch loss history as CSV.
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    opts: TrainOpts,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Phrases; several are averaged.
    phrases: Vec<String>,
    #[command(flatten)]
    embeddings: EmbeddingOpts,
    /// A raw 768-number JSON array, inline or as a file path.
    #[arg(long, conflicts_with_all = ["embeddings", "pseudo_embeddings", "phrases"])]
    embedding_json: Option<String>,
    /// Print the SHA-256 of the input embedding to standard error.
    #[arg(long)]
    print_embedding_hash: bool,
    /// Write the pattern as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_domain_rejection() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn parse_kernel(s: &str) -> Result<(usize, usize), String> {
    let (t, f) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected TIMExFREQ, got {s:?}"))?;
    let parse = |v: &str| -> Result<usize, String> {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("bad kernel size {v:?}"))?;
        if n == 0 || n.is_multiple_of(2) {
            return Err(format!("kernel size {n} must be odd and positive"));
        }
        Ok(n)
    };
    Ok((parse(t)?, parse(f)?))
}

fn parse_tempo_scale(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("off") {
        return Ok(1.0);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected a number or `off`, got {s:?}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("tempo scale must be positive".into());
    }
    Ok(v)
}

fn note_map(g: &GlobalOpts) -> Result<SequencerNoteMap, Error> {
    let mut map = SequencerNoteMap::default();
    map.sequence_id = g.sequence_id;
    for o in &g.note_map {
        map.apply_override(o)?;
    }
    Ok(map)
}

fn extract_config(g: &GlobalOpts) -> Result<ExtractConfig, Error> {
    if g.sample_rate < 8_000 {
        return Err(Error::InvalidArgument(format!(
            "sample rate {} Hz is too low",
            g.sample_rate
        )));
    }
    let mut cfg = ExtractConfig::default().with_seed(g.seed);
    cfg.sample_rate = g.sample_rate;
    cfg.kernel_time = g.hpss_kernel.0;
    cfg.kernel_freq = g.hpss_kernel.1;
    cfg.role_order = parse_role_order(&g.role_order)?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    write_file(path, &serde_json::to_string_pretty(value)?)
}

fn cmd_extract(g: &GlobalOpts, a: &ExtractArgs) -> CmdResult {
    let mut cfg = extract_config(g)?;
    cfg.canonical_rotation = !a.no_rotate;
    note_map(g)?;
    let ex = extract::extract_file(&a.audio, &cfg)?;
    if let Some(p) = &a.out {
        write_json(p, &ex.pattern)?;
    }
    if let Some(p) = &a.clicks_out {
        audio::write_wav(&ex.clicks, p, WavFormat::Int16)?;
    }
    if let Some(p) = &a.onsets_out {
        write_json(
            p,
            &serde_json::json!({
                "schema_version": beatmine::SCHEMA_VERSION,
                "strong_threshold": ex.strong_threshold,
                "onsets": ex.onset_records(),
            }),
        )?;
    }
    if let Some(p) = &a.clusters_out {
        write_json(
            p,
            &serde_json::json!({
                "schema_version": beatmine::SCHEMA_VERSION,
                "degenerate": ex.clustering_degenerate,
                "clusters": ex.cluster_records(),
            }),
        )?;
    }
    print!("{}", codec::render_text(&ex.pattern));
    Ok(())
}

fn cmd_build_corpus(g: &GlobalOpts, a: &BuildCorpusArgs) -> CmdResult {
    let cfg = extract_config(g)?;
    let source = a
        .embeddings
        .source()?
        .ok_or_else(|| usage("one of --embeddings or --pseudo-embeddings is required"))?;
    let annotations = corpus::load_annotations(&a.annotations)?;
    let (dataset, skipped) = corpus::build_dataset(&annotations, &source, &a.audio_root, &cfg)?;
    for s in &skipped {
        eprintln!("{s}");
    }
    dataset.save(&a.out)?;
    eprintln!(
        "wrote {} records to {} ({} skipped)",
        dataset.records.len(),
        a.out.display(),
        skipped.len()
    );
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    let ds = Dataset::load(path)?;
    if ds.records.is_empty() {
        return Err(usage(format!("dataset {} has no records", path.display())));
    }
    Ok(ds)
}

fn cmd_train(g: &GlobalOpts, a: &TrainArgs) -> CmdResult {
    let cfg = a.opts.config(g);
    cfg.validate()?;
    let ds = load_dataset(&a.dataset)?;
    if !(0.0..1.0).contains(&a.val_fraction) {
        return Err(usage("--val-fraction must be in [0, 1)"));
    }
    let n_val = (a.val_fraction * ds.records.len() as f64).round() as usize;
    let report = if n_val == 0 {
        model::train(&ds.records, &cfg)?
    } else {
        if n_val >= ds.records.len() {
            return Err(usage("validation split leaves no training records"));
        }
        let (train, val) = model::holdout_split(&ds.records, n_val, g.seed);
        model::train_with_validation(&train, &val, &cfg)?
    };
    let m = Model {
        params: report.params,
        seed: g.seed,
        tempo_scale: g.tempo_scale,
    };
    m.save(&a.out)?;
    if let Some(p) = &a.history_out {
        let mut csv = String::from("epoch,train_loss,val_loss\n");
        for (e, t) in report.train_loss.iter().enumerate() {
            let v = report
                .val_loss
                .get(e)
                .map(|v| format!("{v:?}"))
                .unwrap_or_default();
            csv.push_str(&format!("{e},{t:?},{v}\n"));
        }
        write_file(p, &csv)?;
    }
    eprintln!(
        "trained {} epochs (best epoch {}), final training loss {:.6}",
        report.train_loss.len(),
        report.best_epoch,
        report.train_loss.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_cv(g: &GlobalOpts, a: &CvArgs) -> CmdResult {
    let cfg = TrainConfig {
        folds: a.folds,
        repeats: a.repeats,
        ..a.opts.config(g)
    };
    cfg.validate()?;
    let ds = load_dataset(&a.dataset)?;
    let rows = model::cross_validate(&ds.records, &cfg)?;
    write_file(&a.out, &model::cv_to_csv(&rows))?;
    let mean = rows.iter().map(|r| r.val_loss).sum::<f64>() / rows.len() as f64;
    eprintln!("{} folds, mean validation loss {mean:.6}", rows.len());
    Ok(())
}

fn read_embedding_json(arg: &str) -> Result<EmbeddingVector, Error> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        let path = Path::new(arg);
        fs::read_to_string(path).map_err(|e| Error::io(path, e))?
    };
    let values: Vec<f64> = serde_json::from_str(&text)?;
    EmbeddingVector::new(values)
}

fn cmd_generate(g: &GlobalOpts, a: &GenerateArgs) -> CmdResult {
    let map = note_map(g)?;
    let model = Model::load(&a.model)?;
    let embedding = match &a.embedding_json {
        Some(arg) => read_embedding_json(arg)?,
        None => {
            if a.phrases.is_empty() {
                return Err(usage("give at least one phrase or --embedding-json"));
            }
            let source = a.embeddings.source()?.ok_or_else(|| {
                usage("phrases need --embeddings <file> or --pseudo-embeddings <seed>")
            })?;
            source.embed_phrases(&a.phrases)?
        }
    };
    if a.print_embedding_hash {
        eprintln!("embedding sha256: {}", embedding.fingerprint());
    }
    let pattern = model.predict(&embedding)?;
    if let Some(p) = &a.out {
        write_json(p, &pattern)?;
    }
    print!("{}", codec::render_text(&pattern));
    println!("{}", codec::render_sequencer(&pattern, &map));
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Extract(a) => cmd_extract(g, a),
        Command::BuildCorpus(a) => cmd_build_corpus(g, a),
        Command::Train(a) => cmd_train(g, a),
        Command::Cv(a) => cmd_cv(g, a),
        Command::Generate(a) => cmd_generate(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
