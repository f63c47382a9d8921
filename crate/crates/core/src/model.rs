//! The 768→400→129 regression network.
//!
//! Output index 0 is the tempo, trained in scaled units (`bpm · tempo_scale`);
//! indices 1..129 are the four 32-step tracks. Only the 32 largest pattern
//! outputs survive the output activation, the rest are set to zero.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::{self, ConsensusPattern, RhythmVector, VECTOR_DIM};
use crate::corpus::{DatasetRecord, EmbeddingVector, EMBEDDING_DIM};
use crate::error::{Error, Result};
use crate::stats;

pub const INPUT_DIM: usize = EMBEDDING_DIM;
pub const HIDDEN_DIM: usize = 400;
pub const OUTPUT_DIM: usize = VECTOR_DIM;
/// Pattern outputs kept by the output activation (the top quartile of 128).
pub const PATTERN_KEEP: usize = 32;
pub const DEFAULT_TEMPO_SCALE: f64 = 1.0 / 200.0;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Weights are row-major: `w1[i * HIDDEN_DIM + j]` connects input `i` to
/// hidden unit `j`, `w2[j * OUTPUT_DIM + k]` hidden `j` to output `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ModelParams {
    pub fn zeros() -> Self {
        Self {
            w1: vec![0.0; INPUT_DIM * HIDDEN_DIM],
            b1: vec![0.0; HIDDEN_DIM],
            w2: vec![0.0; HIDDEN_DIM * OUTPUT_DIM],
            b2: vec![0.0; OUTPUT_DIM],
        }
    }

    fn tensors(&self) -> [&Vec<f64>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = [
            ("w1", INPUT_DIM * HIDDEN_DIM),
            ("b1", HIDDEN_DIM),
            ("w2", HIDDEN_DIM * OUTPUT_DIM),
            ("b2", OUTPUT_DIM),
        ];
        for ((name, len), t) in expected.iter().zip(self.tensors()) {
            if t.len() != *len {
                return Err(Error::Dimension {
                    what: (*name).into(),
                    expected: *len,
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("{name} has non-finite entries")));
            }
        }
        Ok(())
    }
}

/// He-uniform weights, `U(−√(6/fan_in), √(6/fan_in))`, and zero biases.
pub fn init_params(seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ModelParams::zeros();
    let b1 = (6.0 / INPUT_DIM as f64).sqrt();
    p.w1.iter_mut().for_each(|w| *w = rng.gen_range(-b1..=b1));
    let b2 = (6.0 / HIDDEN_DIM as f64).sqrt();
    p.w2.iter_mut().for_each(|w| *w = rng.gen_range(-b2..=b2));
    p
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub hidden_pre: Vec<f64>,
    pub hidden: Vec<f64>,
    /// Output before the top-32 activation.
    pub output_pre: Vec<f64>,
    /// Output after the activation; index 0 in scaled tempo units.
    pub output: Vec<f64>,
    /// Whether each output passes through the activation.
    pub kept: Vec<bool>,
}

/// Mask over the 129 outputs: tempo always kept, top 32 pattern values kept.
pub fn output_mask(pre: &[f64]) -> Vec<bool> {
    let mut kept = vec![false; pre.len()];
    kept[0] = true;
    for i in stats::top_k_indices(&pre[1..], PATTERN_KEEP) {
        kept[i + 1] = true;
    }
    kept
}

pub fn forward_activations(params: &ModelParams, x: &[f64]) -> Result<Activations> {
    if x.len() != INPUT_DIM {
        return Err(Error::Dimension {
            what: "embedding".into(),
            expected: INPUT_DIM,
            got: x.len(),
        });
    }
    let mut hidden_pre = params.b1.clone();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &params.w1[i * HIDDEN_DIM..(i + 1) * HIDDEN_DIM];
        hidden_pre
            .iter_mut()
            .zip(row)
            .for_each(|(h, w)| *h += xi * w);
    }
    let hidden: Vec<f64> = hidden_pre.iter().map(|&v| v.max(0.0)).collect();
    let mut output_pre = params.b2.clone();
    for (j, &hj) in hidden.iter().enumerate() {
        if hj == 0.0 {
            continue;
        }
        let row = &params.w2[j * OUTPUT_DIM..(j + 1) * OUTPUT_DIM];
        output_pre
            .iter_mut()
            .zip(row)
            .for_each(|(o, w)| *o += hj * w);
    }
    if output_pre.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("network output".into()));
    }
    let kept = output_mask(&output_pre);
    let output = output_pre
        .iter()
        .zip(&kept)
        .map(|(&v, &k)| if k { v } else { 0.0 })
        .collect();
    Ok(Activations {
        hidden_pre,
        hidden,
        output_pre,
        output,
        kept,
    })
}

/// Forward pass reported in vector units: tempo in BPM, pattern values as
/// produced by the activation.
pub fn forward(
    params: &ModelParams,
    x: &EmbeddingVector,
    tempo_scale: f64,
) -> Result<RhythmVector> {
    let act = forward_activations(params, x.values())?;
    let mut values = act.output;
    values[0] /= tempo_scale;
    RhythmVector::new(values)
}

/// Binarised prediction: integer BPM and the kept pattern positions.
pub fn predict(
    params: &ModelParams,
    x: &EmbeddingVector,
    tempo_scale: f64,
) -> Result<ConsensusPattern> {
    let act = forward_activations(params, x.values())?;
    let mut values = act.output;
    values[0] = (values[0] / tempo_scale).round().max(0.0);
    for (v, &k) in values.iter_mut().zip(&act.kept).skip(1) {
        *v = if k && *v != 0.0 { 1.0 } else { 0.0 };
    }
    Ok(consensus::from_vector(&RhythmVector::new(values)?))
}

/// Elementwise Huber value.
pub fn huber(r: f64, delta: f64) -> f64 {
    let a = r.abs();
    if a <= delta {
        0.5 * r * r
    } else {
        delta * (a - 0.5 * delta)
    }
}

/// Derivative of [`huber`] with respect to the residual.
pub fn huber_grad(r: f64, delta: f64) -> f64 {
    r.clamp(-delta, delta)
}

/// Mean Huber loss over the 129 dims, tempo scaled by `tempo_scale` in
/// both prediction and target.
pub fn huber_loss(pred: &RhythmVector, target: &RhythmVector, delta: f64, tempo_scale: f64) -> f64 {
    let n = pred.values.len();
    pred.values
        .iter()
        .zip(&target.values)
        .enumerate()
        .map(|(i, (&p, &t))| {
            let r = if i == 0 { (p - t) * tempo_scale } else { p - t };
            huber(r, delta)
        })
        .sum::<f64>()
        / n as f64
}

fn scaled_target(target: &RhythmVector, tempo_scale: f64) -> Vec<f64> {
    let mut t = target.values.clone();
    t[0] *= tempo_scale;
    t
}

/// How the backward pass treats outputs zeroed by the top-32 activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputGradient {
    /// Zeroed outputs are constant and receive no gradient; kept outputs
    /// pass it through. This is the exact gradient wherever the mask is
    /// locally constant.
    #[default]
    Masked,
    /// Every output receives the loss gradient of its activated value, as
    /// if the mask were the identity. A beat stuck below the top 32 is
    /// pulled up instead of being ignored.
    StraightThrough,
}

/// Loss of one sample and, if `grad` is given, accumulate `scale · ∂loss/∂θ`
/// using the given output-gradient convention.
pub fn sample_loss_grad(
    params: &ModelParams,
    x: &[f64],
    target: &[f64],
    delta: f64,
    mode: OutputGradient,
    grad: Option<(&mut ModelParams, f64)>,
) -> Result<f64> {
    let act = forward_activations(params, x)?;
    let n = OUTPUT_DIM as f64;
    let loss = act
        .output
        .iter()
        .zip(target)
        .map(|(o, t)| huber(o - t, delta))
        .sum::<f64>()
        / n;
    let Some((g, scale)) = grad else {
        return Ok(loss);
    };

    let d_out: Vec<f64> = act
        .output
        .iter()
        .zip(target)
        .zip(&act.kept)
        .map(|((o, t), &k)| {
            if k || mode == OutputGradient::StraightThrough {
                scale * huber_grad(o - t, delta) / n
            } else {
                0.0
            }
        })
        .collect();
    g.b2.iter_mut().zip(&d_out).for_each(|(g, d)| *g += d);

    let mut d_hidden = vec![0.0; HIDDEN_DIM];
    for (j, &hj) in act.hidden.iter().enumerate() {
        let row = &params.w2[j * OUTPUT_DIM..(j + 1) * OUTPUT_DIM];
        let grow = &mut g.w2[j * OUTPUT_DIM..(j + 1) * OUTPUT_DIM];
        let mut acc = 0.0;
        for k in 0..OUTPUT_DIM {
            grow[k] += hj * d_out[k];
            acc += row[k] * d_out[k];
        }
        if act.hidden_pre[j] > 0.0 {
            d_hidden[j] = acc;
        }
    }
    g.b1.iter_mut().zip(&d_hidden).for_each(|(g, d)| *g += d);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let grow = &mut g.w1[i * HIDDEN_DIM..(i + 1) * HIDDEN_DIM];
        grow.iter_mut()
            .zip(&d_hidden)
            .for_each(|(g, d)| *g += xi * d);
    }
    Ok(loss)
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: ModelParams,
    pub second_moment: ModelParams,
    pub step_count: u64,
}

impl Default for AdamState {
    fn default() -> Self {
        Self::new()
    }
}

impl AdamState {
    pub fn new() -> Self {
        Self {
            first_moment: ModelParams::zeros(),
            second_moment: ModelParams::zeros(),
            step_count: 0,
        }
    }

    /// One bias-corrected Adam update.
    pub fn step(&mut self, params: &mut ModelParams, grad: &ModelParams, lr: f64) {
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        let moments = self
            .first_moment
            .tensors_mut()
            .into_iter()
            .zip(self.second_moment.tensors_mut());
        for ((p, g), (m, v)) in params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(moments)
        {
            for i in 0..p.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping. Only used when
    /// a validation set is supplied.
    pub patience: usize,
    pub huber_delta: f64,
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub tempo_scale: f64,
    pub output_gradient: OutputGradient,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 5,
            max_epochs: 500,
            patience: 50,
            huber_delta: 1.0,
            seed: 7_067_265,
            folds: 10,
            repeats: 3,
            tempo_scale: DEFAULT_TEMPO_SCALE,
            output_gradient: OutputGradient::Masked,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.huber_delta.is_nan() || self.huber_delta <= 0.0 {
            return bad("huber delta must be positive");
        }
        if !(self.tempo_scale > 0.0 && self.tempo_scale.is_finite()) {
            return bad("tempo scale must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: ModelParams,
    /// Mean mini-batch loss per epoch.
    pub train_loss: Vec<f64>,
    /// Validation loss per epoch, empty without a validation set.
    pub val_loss: Vec<f64>,
    /// Epoch (0-based) whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn samples(records: &[&DatasetRecord], tempo_scale: f64) -> Vec<Sample> {
    records
        .iter()
        .map(|r| Sample {
            x: r.embedding.values().to_vec(),
            y: scaled_target(&r.target, tempo_scale),
        })
        .collect()
}

fn mean_loss(params: &ModelParams, data: &[Sample], delta: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in data {
        total += sample_loss_grad(params, &s.x, &s.y, delta, OutputGradient::Masked, None)?;
    }
    Ok(total / data.len() as f64)
}

/// Mean Huber loss of `params` over `records`.
pub fn evaluate(params: &ModelParams, records: &[DatasetRecord], cfg: &TrainConfig) -> Result<f64> {
    let refs: Vec<&DatasetRecord> = records.iter().collect();
    mean_loss(params, &samples(&refs, cfg.tempo_scale), cfg.huber_delta)
}

/// Train from `init_params(cfg.seed)` on the whole dataset for `max_epochs`.
pub fn train(dataset: &[DatasetRecord], cfg: &TrainConfig) -> Result<TrainReport> {
    let refs: Vec<&DatasetRecord> = dataset.iter().collect();
    fit(&refs, &[], cfg)
}

/// Train with early stopping on `validation` (patience `cfg.patience`); the
/// parameters of the best validation epoch are returned.
pub fn train_with_validation(
    dataset: &[DatasetRecord],
    validation: &[DatasetRecord],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    let refs: Vec<&DatasetRecord> = dataset.iter().collect();
    let val: Vec<&DatasetRecord> = validation.iter().collect();
    fit(&refs, &val, cfg)
}

fn fit(
    train_set: &[&DatasetRecord],
    val_set: &[&DatasetRecord],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let data = samples(train_set, cfg.tempo_scale);
    let val = samples(val_set, cfg.tempo_scale);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init_params(cfg.seed);
    let mut adam = AdamState::new();
    let mut grad = ModelParams::zeros();
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut train_loss = Vec::new();
    let mut val_loss = Vec::new();
    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut stopped_early = false;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
            let scale = 1.0 / batch.len() as f64;
            let mut loss = 0.0;
            for &i in batch {
                let s = &data[i];
                loss += scale
                    * sample_loss_grad(
                        &params,
                        &s.x,
                        &s.y,
                        cfg.huber_delta,
                        cfg.output_gradient,
                        Some((&mut grad, scale)),
                    )?;
            }
            if !loss.is_finite() {
                return Err(Error::NanLoss { epoch, batch: b });
            }
            adam.step(&mut params, &grad, cfg.learning_rate);
            epoch_loss += loss;
            batches += 1;
        }
        train_loss.push(epoch_loss / batches as f64);

        if !val.is_empty() {
            let v = mean_loss(&params, &val, cfg.huber_delta)?;
            val_loss.push(v);
            if v < best.0 {
                best = (v, epoch, params.clone());
            } else if epoch - best.1 >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (params, best_epoch) = if val.is_empty() {
        (params, train_loss.len().saturating_sub(1))
    } else {
        (best.2, best.1)
    };
    Ok(TrainReport {
        params,
        train_loss,
        val_loss,
        best_epoch,
        stopped_early,
    })
}

/// Seeded shuffle of `records` split into `(training, held_out)` with
/// `n_held` held-out records.
pub fn holdout_split(
    records: &[DatasetRecord],
    n_held: usize,
    seed: u64,
) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_held = n_held.min(records.len());
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    (pick(&order[n_held..]), pick(&order[..n_held]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Sizes of `folds` contiguous folds over `n` items; the first `n % folds`
/// folds get one extra item.
pub fn fold_sizes(n: usize, folds: usize) -> Vec<usize> {
    (0..folds)
        .map(|f| n / folds + usize::from(f < n % folds))
        .collect()
}

/// Repeated k-fold cross-validation. Each repeat reshuffles the records with
/// its own seed and splits them into contiguous folds; each fold trains for
/// `max_epochs` on the remaining folds and reports the final training and
/// held-out losses. Rows come back in (repeat, fold) order.
pub fn cross_validate(dataset: &[DatasetRecord], cfg: &TrainConfig) -> Result<Vec<FoldResult>> {
    cfg.validate()?;
    if dataset.len() < cfg.folds {
        return Err(Error::DatasetTooSmall {
            size: dataset.len(),
            folds: cfg.folds,
        });
    }
    let sizes = fold_sizes(dataset.len(), cfg.folds);
    let jobs: Vec<(usize, usize)> = (0..cfg.repeats)
        .flat_map(|r| (0..cfg.folds).map(move |f| (r, f)))
        .collect();

    let orders: Vec<Vec<usize>> = (0..cfg.repeats)
        .map(|r| {
            let mut order: Vec<usize> = (0..dataset.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            order.shuffle(&mut rng);
            order
        })
        .collect();

    jobs.par_iter()
        .map(|&(repeat, fold)| {
            let order = &orders[repeat];
            let start: usize = sizes[..fold].iter().sum();
            let end = start + sizes[fold];
            let held: Vec<&DatasetRecord> =
                order[start..end].iter().map(|&i| &dataset[i]).collect();
            let rest: Vec<&DatasetRecord> = order[..start]
                .iter()
                .chain(&order[end..])
                .map(|&i| &dataset[i])
                .collect();
            let fold_cfg = TrainConfig {
                seed: cfg
                    .seed
                    .wrapping_add(1_000 * (repeat as u64 + 1))
                    .wrapping_add(fold as u64),
                ..cfg.clone()
            };
            let report = fit(&rest, &[], &fold_cfg)?;
            let train_loss = mean_loss(
                &report.params,
                &samples(&rest, cfg.tempo_scale),
                cfg.huber_delta,
            )?;
            let val_loss = mean_loss(
                &report.params,
                &samples(&held, cfg.tempo_scale),
                cfg.huber_delta,
            )?;
            Ok(FoldResult {
                repeat,
                fold,
                train_loss,
                val_loss,
            })
        })
        .collect()
}

pub fn cv_to_csv(rows: &[FoldResult]) -> String {
    let mut out = String::from("repeat,fold,train_loss,val_loss\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?}",
            r.repeat, r.fold, r.train_loss, r.val_loss
        );
    }
    out
}

const MODEL_FORMAT: &str = "beatmine-model";
const MODEL_VERSION: u32 = 1;

/// Trained network plus what inference needs to decode its output.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub seed: u64,
    pub tempo_scale: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    seed: u64,
    tempo_scale: f64,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Model {
    pub fn predict(&self, x: &EmbeddingVector) -> Result<ConsensusPattern> {
        predict(&self.params, x, self.tempo_scale)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            input_dim: INPUT_DIM,
            hidden_dim: HIDDEN_DIM,
            output_dim: OUTPUT_DIM,
            seed: self.seed,
            tempo_scale: self.tempo_scale,
            w1: self.params.w1.clone(),
            b1: self.params.b1.clone(),
            w2: self.params.w2.clone(),
            b2: self.params.b2.clone(),
        };
        Ok(serde_json::to_string(&f)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported model format {} v{}",
                f.format, f.version
            )));
        }
        if (f.input_dim, f.hidden_dim, f.output_dim) != (INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM) {
            return Err(Error::ModelFile(format!(
                "shape {}x{}x{} does not match {INPUT_DIM}x{HIDDEN_DIM}x{OUTPUT_DIM}",
                f.input_dim, f.hidden_dim, f.output_dim
            )));
        }
        let params = ModelParams {
            w1: f.w1,
            b1: f.b1,
            w2: f.w2,
            b2: f.b2,
        };
        params
            .validate()
            .map_err(|e| Error::ModelFile(e.to_string()))?;
        if f.tempo_scale.is_nan() || f.tempo_scale <= 0.0 {
            return Err(Error::ModelFile("tempo_scale must be positive".into()));
        }
        Ok(Self {
            params,
            seed: f.seed,
            tempo_scale: f.tempo_scale,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
