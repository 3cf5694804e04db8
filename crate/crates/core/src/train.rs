//! One end-to-end training step: aggregation (fused or baseline), a
//! concat-then-MLP head, softmax cross-entropy and AdamW.
//!
//! The head computes `ReLU([x_seed | x_agg] W1 + b1) W2 + b2`. Features are
//! treated as fixed inputs by default; with [`StepOptions::feature_grad`]
//! the step also runs the aggregation backward and returns the feature
//! gradient.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{FeatureMatrix, SeedBatch};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::meter::{MemoryMeter, MeterScope};
use crate::ops::{
    baseline_1hop_forward, baseline_backward, baseline_forward, fused_1hop_backward, fused_1hop_forward,
    fused_2hop_backward, fused_2hop_forward, AggregatedOutput, GradBuffer,
};
use crate::scalar::Scalar;

pub const DEFAULT_HIDDEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 3e-3,
            weight_decay: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Which aggregation pipeline a step runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Fused,
    Baseline,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Fused => "fused",
            Variant::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fused" => Ok(Variant::Fused),
            "baseline" => Ok(Variant::Baseline),
            _ => Err(Error::invalid(format!("unknown variant `{s}` (fused|baseline)"))),
        }
    }
}

/// Per-hop sample caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fanout {
    OneHop(usize),
    TwoHop(usize, usize),
}

impl Fanout {
    /// `(k1, k2)` with `k2 = 0` for one hop.
    pub fn pair(self) -> (usize, usize) {
        match self {
            Fanout::OneHop(k) => (k, 0),
            Fanout::TwoHop(k1, k2) => (k1, k2),
        }
    }

    pub fn from_pair(k1: usize, k2: usize) -> Self {
        if k2 == 0 {
            Fanout::OneHop(k1)
        } else {
            Fanout::TwoHop(k1, k2)
        }
    }
}

/// Head parameter tensors (also used for their gradients and moments).
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams<T> {
    /// `2D x H`
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    /// `H x C`
    pub w2: Array2<T>,
    pub b2: Array1<T>,
}

impl<T: Scalar> HeadParams<T> {
    pub fn zeros(dim: usize, hidden: usize, classes: usize) -> Self {
        HeadParams {
            w1: Array2::zeros((2 * dim, hidden)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, classes)),
            b2: Array1::zeros(classes),
        }
    }

    pub fn num_values(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn slices(&self) -> [&[T]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    fn slices_mut(&mut self) -> [&mut [T]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// Flattened copy of all values, in `w1, b1, w2, b2` order.
    pub fn flatten(&self) -> Vec<T> {
        self.slices().concat()
    }
}

/// Head parameters plus AdamW state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState<T> {
    pub params: HeadParams<T>,
    pub m: HeadParams<T>,
    pub v: HeadParams<T>,
    pub step_count: u64,
    pub config: AdamWConfig,
}

impl<T: Scalar> TrainState<T> {
    /// Glorot-uniform weights and zero biases, deterministic in `seed`.
    pub fn new(dim: usize, hidden: usize, classes: usize, seed: u64, config: AdamWConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || T::from_f64_lossy(rng.random_range(-a..a)))
        };
        let w1 = glorot(2 * dim, hidden);
        let w2 = glorot(hidden, classes);
        TrainState {
            params: HeadParams {
                w1,
                b1: Array1::zeros(hidden),
                w2,
                b2: Array1::zeros(classes),
            },
            m: HeadParams::zeros(dim, hidden, classes),
            v: HeadParams::zeros(dim, hidden, classes),
            step_count: 0,
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.params.w1.nrows() / 2
    }

    pub fn hidden(&self) -> usize {
        self.params.w1.ncols()
    }

    pub fn classes(&self) -> usize {
        self.params.w2.ncols()
    }
}

/// Activations kept for the head backward, registered with the meter.
#[derive(Debug)]
pub struct HeadCache<T> {
    input: Array2<T>,
    hidden: Array2<T>,
    _bytes: MeterScope,
}

fn array_bytes<T: Scalar>(a: &Array2<T>) -> u64 {
    (a.len() * T::BYTES) as u64
}

/// `logits = ReLU([x_seed | x_agg] W1 + b1) W2 + b2`.
pub fn head_forward<T: Scalar>(
    x_seed: ArrayView2<'_, T>,
    x_agg: ArrayView2<'_, T>,
    state: &TrainState<T>,
    meter: &MemoryMeter,
) -> Result<(Array2<T>, HeadCache<T>)> {
    let p = &state.params;
    if x_seed.dim() != x_agg.dim() {
        return Err(Error::DimensionMismatch {
            what: "x_agg rows",
            expected: x_seed.nrows(),
            got: x_agg.nrows(),
        });
    }
    if 2 * x_seed.ncols() != p.w1.nrows() {
        return Err(Error::DimensionMismatch {
            what: "head input width",
            expected: p.w1.nrows(),
            got: 2 * x_seed.ncols(),
        });
    }
    let input = concatenate(Axis(1), &[x_seed, x_agg]).expect("row counts checked");
    let input_bytes = meter.scope(array_bytes(&input));
    let mut hidden = input.dot(&p.w1) + &p.b1;
    hidden.mapv_inplace(|v| v.max(T::zero()));
    let hidden_bytes = meter.scope(array_bytes(&hidden));
    let logits = hidden.dot(&p.w2) + &p.b2;
    let bytes = meter.scope(input_bytes.bytes() + hidden_bytes.bytes());
    drop((input_bytes, hidden_bytes));
    Ok((
        logits,
        HeadCache {
            input,
            hidden,
            _bytes: bytes,
        },
    ))
}

/// Mean softmax cross-entropy and its gradient `(softmax - onehot) / B`.
pub fn cross_entropy<T: Scalar>(logits: ArrayView2<'_, T>, labels: &[u32]) -> Result<(T, Array2<T>)> {
    let (batch, classes) = logits.dim();
    if labels.len() != batch {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: batch,
            got: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(Error::LabelOutOfRange {
            label: bad as usize,
            classes,
        });
    }
    let inv_batch = T::one() / T::from_count(batch);
    let mut grad = Array2::zeros((batch, classes));
    let mut loss = T::zero();
    for ((row, mut grow), &label) in logits.outer_iter().zip(grad.outer_iter_mut()).zip(labels) {
        let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
        let sum: T = row.iter().map(|&v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        loss = loss + (log_z - row[label as usize]);
        for (g, &v) in grow.iter_mut().zip(row.iter()) {
            *g = (v - log_z).exp() * inv_batch;
        }
        grow[label as usize] = grow[label as usize] - inv_batch;
    }
    Ok((loss * inv_batch, grad))
}

/// Parameter gradients and, when requested, the gradient w.r.t. `x_agg`.
pub fn head_backward<T: Scalar>(
    cache: &HeadCache<T>,
    dlogits: &Array2<T>,
    state: &TrainState<T>,
    want_agg_grad: bool,
    meter: &MemoryMeter,
) -> (HeadParams<T>, Option<Array2<T>>) {
    let p = &state.params;
    let grad_w2 = cache.hidden.t().dot(dlogits);
    let grad_b2 = dlogits.sum_axis(Axis(0));
    let mut dhidden = dlogits.dot(&p.w2.t());
    let _dhidden_bytes = meter.scope(array_bytes(&dhidden));
    ndarray::Zip::from(&mut dhidden)
        .and(&cache.hidden)
        .for_each(|d, &h| {
            if h <= T::zero() {
                *d = T::zero();
            }
        });
    let grad_w1 = cache.input.t().dot(&dhidden);
    let grad_b1 = dhidden.sum_axis(Axis(0));
    let dim = p.w1.nrows() / 2;
    let dagg = want_agg_grad.then(|| dhidden.dot(&p.w1.slice(s![dim.., ..]).t()));
    (
        HeadParams {
            w1: grad_w1,
            b1: grad_b1,
            w2: grad_w2,
            b2: grad_b2,
        },
        dagg,
    )
}

/// One AdamW update over a flat parameter slice.
///
/// Decoupled decay `p -= lr * wd * p`, then the bias-corrected Adam step
/// `p -= lr * m_hat / (sqrt(v_hat) + eps)` where `t` is the 1-based step.
pub fn adamw_update<T: Scalar>(param: &mut [T], grad: &[T], m: &mut [T], v: &mut [T], t: u64, cfg: &AdamWConfig) {
    let lr = T::from_f64_lossy(cfg.lr);
    let wd = T::from_f64_lossy(cfg.weight_decay);
    let b1 = T::from_f64_lossy(cfg.beta1);
    let b2 = T::from_f64_lossy(cfg.beta2);
    let eps = T::from_f64_lossy(cfg.eps);
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let bc1 = T::one() - b1.powi(t);
    let bc2 = T::one() - b2.powi(t);
    for (((p, &g), m), v) in param.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
        *p = *p - lr * wd * *p;
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Apply AdamW to every head tensor. Non-finite gradients reject the step
/// and leave the state untouched.
pub fn adamw_step<T: Scalar>(state: &mut TrainState<T>, grads: &HeadParams<T>) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradients"));
    }
    state.step_count += 1;
    let t = state.step_count;
    let cfg = state.config;
    let grads = grads.slices();
    let params = state.params.slices_mut();
    let ms = state.m.slices_mut();
    let vs = state.v.slices_mut();
    for (((p, g), m), v) in params.into_iter().zip(grads).zip(ms).zip(vs) {
        if p.len() != g.len() {
            return Err(Error::DimensionMismatch {
                what: "gradient tensor",
                expected: p.len(),
                got: g.len(),
            });
        }
        adamw_update(p, g, m, v, t, &cfg);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOptions {
    pub variant: Variant,
    pub fanout: Fanout,
    pub base_seed: u64,
    /// Baseline only: gather each distinct node once.
    pub dedup: bool,
    /// Also back-propagate into the features and return their gradient.
    pub feature_grad: bool,
}

#[derive(Debug)]
pub struct StepResult<T> {
    pub loss: f64,
    pub grads_applied: bool,
    pub sampled_pairs: u64,
    pub feature_grad: Option<GradBuffer<T>>,
}

enum Replay<T> {
    Fused1(Option<crate::ops::SampledIndices1>),
    Fused2(Option<crate::ops::SampledIndices2>),
    Baseline(crate::ops::MaterializedBlock<T>),
}

/// Forward, backward and optimizer update for one seed batch.
///
/// Only the seeds' own outputs are trained. Every transient tensor is
/// registered with `meter`; after the call nothing stays registered unless
/// the returned feature gradient is held.
pub fn train_step<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    batch: &SeedBatch,
    opts: &StepOptions,
    state: &mut TrainState<T>,
    meter: &MemoryMeter,
) -> Result<StepResult<T>> {
    let labels = batch.labels().ok_or(Error::MissingLabels)?;
    let dim = x.dim();
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            what: "head feature width",
            expected: state.dim(),
            got: dim,
        });
    }
    let b = batch.len();

    let mut x_seed = meter.filled(b * dim, T::zero());
    for (row, &s) in x_seed.chunks_mut(dim).zip(batch.seeds()) {
        row.copy_from_slice(x.row(s));
    }

    let (agg, replay): (AggregatedOutput<T>, Replay<T>) = match (opts.variant, opts.fanout) {
        (Variant::Fused, Fanout::OneHop(k)) => {
            let (o, i) = fused_1hop_forward(graph, x, batch, k, opts.base_seed, true, meter)?;
            (o, Replay::Fused1(i))
        }
        (Variant::Fused, Fanout::TwoHop(k1, k2)) => {
            let (o, i) = fused_2hop_forward(graph, x, batch, k1, k2, opts.base_seed, true, meter)?;
            (o, Replay::Fused2(i))
        }
        (Variant::Baseline, Fanout::OneHop(k)) => {
            let (o, mut block) = baseline_1hop_forward(graph, x, batch, k, opts.base_seed, meter)?;
            block.release_features();
            (o, Replay::Baseline(block))
        }
        (Variant::Baseline, Fanout::TwoHop(k1, k2)) => {
            let (o, mut block) = baseline_forward(graph, x, batch, k1, k2, opts.base_seed, meter, opts.dedup)?;
            block.release_features();
            (o, Replay::Baseline(block))
        }
    };
    let sampled_pairs = match &replay {
        Replay::Fused1(i) => i.as_ref().map_or(0, |i| i.sampled_pairs()),
        Replay::Fused2(i) => i.as_ref().map_or(0, |i| i.sampled_pairs()),
        Replay::Baseline(block) => block.sampled_pairs(),
    };

    let seed_view = ArrayView2::from_shape((b, dim), &x_seed).expect("b x dim");
    let agg_view = ArrayView2::from_shape((b, dim), agg.values()).expect("b x dim");
    let (logits, cache) = head_forward(seed_view, agg_view, state, meter)?;
    let _logits_bytes = meter.scope(array_bytes(&logits));
    let (loss, dlogits) = cross_entropy(logits.view(), labels)?;
    let _dlogits_bytes = meter.scope(array_bytes(&dlogits));
    let (grads, dagg) = head_backward(&cache, &dlogits, state, opts.feature_grad, meter);
    let _grad_bytes = meter.scope((grads.num_values() * T::BYTES) as u64);
    drop(cache);
    drop(agg);
    drop(x_seed);

    let feature_grad = match dagg {
        None => None,
        Some(dagg) => {
            let _dagg_bytes = meter.scope(array_bytes(&dagg));
            let up = dagg.as_slice().expect("standard layout");
            let n = graph.num_nodes();
            Some(match &replay {
                Replay::Fused1(i) => fused_1hop_backward(up, i.as_ref(), b, n, meter)?,
                Replay::Fused2(i) => fused_2hop_backward(up, i.as_ref(), b, n, meter)?,
                Replay::Baseline(block) => baseline_backward(up, block, n, meter)?,
            })
        }
    };
    drop(replay);

    let grads_applied = adamw_step(state, &grads).is_ok();
    Ok(StepResult {
        loss: loss.as_f64(),
        grads_applied,
        sampled_pairs,
        feature_grad,
    })
}
