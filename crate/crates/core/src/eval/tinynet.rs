//! Reward oracle that actually trains a network: a genotype is instantiated
//! as a small cell-based convolutional classifier, trained adversarially for
//! a few epochs on the synthetic bar/noise data, and scored by validation
//! accuracy.
//!
//! The whole pipeline is pure given `(genotype, seed, spec)`: the dataset is
//! keyed by its own seed, weight initialization and attack draws come from
//! per-purpose derived streams, and examples are visited in a fixed order.

use crate::error::{Error, Result};
use crate::eval::dataset::{make_synthetic_dataset, Dataset, IMAGE_CHANNELS, IMAGE_SIDE};
use crate::eval::Evaluator;
use crate::ops::{
    self, conv, fgsm_random_init, op_backward, op_forward, AttackConfig, GradientOracle,
    OpWeights,
};
use crate::rng;
use crate::space::{EdgeId, Genotype, OperationKind};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

/// Number of output classes (bar vs noise).
const CLASSES: usize = 2;
/// Attack-stream index base for validation-time perturbations, far above any
/// realistic training step count so the streams never collide.
const VALIDATION_ATTACK_BASE: u64 = 1 << 48;

/// Configuration of the trained-network evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TinyNetSpec {
    /// Stacked cell count (kept small; one or two).
    pub cells: usize,
    /// Intermediate nodes per cell.
    pub nodes: usize,
    /// Channel width of every feature map.
    pub channels: usize,
    /// Adversarial-training epochs per evaluation.
    pub train_epochs: usize,
    /// Total examples generated; two thirds train, one third validates.
    pub dataset_size: usize,
    /// Seed of the dataset generator (shared across trials).
    pub data_seed: u64,
    /// Threat model used for training perturbations.
    pub attack: AttackConfig,
    pub learning_rate: f64,
    /// Score on perturbed instead of clean validation examples.
    pub adversarial_validation: bool,
}

impl Default for TinyNetSpec {
    fn default() -> Self {
        TinyNetSpec {
            cells: 1,
            nodes: 2,
            channels: 4,
            train_epochs: 1,
            dataset_size: 768,
            data_seed: 0,
            attack: AttackConfig::fgsm(0.1),
            learning_rate: 0.05,
            adversarial_validation: false,
        }
    }
}

impl TinyNetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 || self.nodes == 0 || self.channels == 0 {
            return Err(Error::Config(
                "cells, nodes and channels must all be positive".into(),
            ));
        }
        if self.dataset_size < 2 {
            return Err(Error::Config(format!(
                "dataset_size must be at least 2, got {}",
                self.dataset_size
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        self.attack.validate()
    }

    /// Edges of one cell in canonical order: `(from, to)` for every
    /// `from < to ≤ nodes`.
    fn cell_edges(&self, cell: usize) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        for from in 0..self.nodes {
            for to in (from + 1)..=self.nodes {
                edges.push(EdgeId::new(cell, from, to));
            }
        }
        edges.sort();
        edges
    }
}

/// One operation instance on one edge.
#[derive(Debug, Clone, PartialEq)]
struct EdgeOp {
    edge: EdgeId,
    kind: OperationKind,
    weights: OpWeights,
}

/// Weights of one cell: its edge operations plus the 1×1 projection that
/// maps the concatenated node outputs back to `channels`.
#[derive(Debug, Clone, PartialEq)]
struct CellWeights {
    edges: Vec<EdgeOp>,
    /// `[channels, nodes·channels, 1, 1]`
    projection: Tensor,
}

/// A fully materialized network for one genotype: a 3×3 stem lifting the
/// single input channel, the stacked cells, and a linear head on globally
/// averaged features.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyNet {
    channels: usize,
    nodes: usize,
    /// `[channels, 1, 3, 3]`
    stem: Tensor,
    cells: Vec<CellWeights>,
    /// `[CLASSES, channels]`
    head_weight: Tensor,
    /// `[CLASSES]`
    head_bias: Tensor,
}

/// Parameter gradients in the same layout as [`TinyNet`].
#[derive(Debug, Clone)]
pub struct TinyNetGrads {
    stem: Tensor,
    cells: Vec<(Vec<OpWeights>, Tensor)>,
    head_weight: Tensor,
    head_bias: Tensor,
}

impl TinyNetGrads {
    /// Gradients flattened in [`TinyNet::flat_parameters`] order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.stem.data());
        for (edges, projection) in &self.cells {
            for weights in edges {
                weights.append_flat(&mut out);
            }
            out.extend_from_slice(projection.data());
        }
        out.extend_from_slice(self.head_weight.data());
        out.extend_from_slice(self.head_bias.data());
        out
    }

    pub fn all_finite(&self) -> bool {
        self.stem.all_finite()
            && self.head_weight.all_finite()
            && self.head_bias.all_finite()
            && self.cells.iter().all(|(edges, projection)| {
                projection.all_finite() && edges.iter().all(OpWeights::all_finite)
            })
    }
}

struct CellTrace {
    /// Node values; index 0 is the cell input.
    nodes: Vec<Tensor>,
    concat: Tensor,
}

struct Trace {
    cells: Vec<CellTrace>,
    pooled: Vec<f64>,
    probs: Vec<f64>,
}

impl TinyNet {
    /// Initializes fresh weights for `genotype`. The genotype must cover
    /// exactly the canonical edge set of `(spec.cells, spec.nodes)`.
    pub fn init<R: rand::Rng>(spec: &TinyNetSpec, genotype: &Genotype, rng: &mut R) -> Result<TinyNet> {
        spec.validate()?;
        let c = spec.channels;
        let mut expected = Vec::new();
        for cell in 0..spec.cells {
            expected.extend(spec.cell_edges(cell));
        }
        let actual: Vec<EdgeId> = genotype.iter().map(|(e, _)| e).collect();
        if actual != expected {
            return Err(Error::InvalidArgument(format!(
                "genotype edges {actual:?} do not form {} cells of {} nodes",
                spec.cells, spec.nodes
            )));
        }

        let stem = gaussian_weight(&[c, IMAGE_CHANNELS, 3, 3], (IMAGE_CHANNELS * 9) as f64, rng);
        let mut cells = Vec::with_capacity(spec.cells);
        for cell in 0..spec.cells {
            let edges = spec
                .cell_edges(cell)
                .into_iter()
                .map(|edge| {
                    let kind = genotype.get(edge).expect("edge set checked above");
                    EdgeOp { edge, kind, weights: OpWeights::init(kind, c, rng) }
                })
                .collect();
            let projection =
                gaussian_weight(&[c, spec.nodes * c, 1, 1], (spec.nodes * c) as f64, rng);
            cells.push(CellWeights { edges, projection });
        }
        let head_weight = gaussian_weight(&[CLASSES, c], c as f64, rng);
        let head_bias = Tensor::zeros(&[CLASSES]);
        Ok(TinyNet { channels: c, nodes: spec.nodes, stem, cells, head_weight, head_bias })
    }

    fn forward_trace(&self, x: &Tensor) -> Result<Trace> {
        let mut current = conv::conv2d_forward(x, &self.stem, 1)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for cell in &self.cells {
            let mut nodes: Vec<Tensor> = vec![current];
            for to in 1..=self.nodes {
                let mut sum: Option<Tensor> = None;
                for op in cell.edges.iter().filter(|op| op.edge.to == to) {
                    let value = op_forward(op.kind, &nodes[op.edge.from], &op.weights)?;
                    sum = Some(match sum {
                        None => value,
                        Some(acc) => acc.add(&value)?,
                    });
                }
                nodes.push(sum.ok_or_else(|| {
                    Error::Invariant(format!("node {to} has no incoming edges"))
                })?);
            }
            let concat = concat_channels(&nodes[1..])?;
            current = conv::conv2d_forward(&concat, &cell.projection, 1)?;
            cells.push(CellTrace { nodes, concat });
        }

        let pooled = global_average(&current)?;
        let mut logits = vec![0.0; CLASSES];
        for (k, logit) in logits.iter_mut().enumerate() {
            let mut acc = self.head_bias.data()[k];
            for (c, &g) in pooled.iter().enumerate() {
                acc += self.head_weight.data()[k * self.channels + c] * g;
            }
            *logit = acc;
        }
        let probs = softmax(&logits);
        Ok(Trace { cells, pooled, probs })
    }

    /// Class probabilities for one input.
    pub fn probabilities(&self, x: &Tensor) -> Result<Vec<f64>> {
        Ok(self.forward_trace(x)?.probs)
    }

    pub fn predict(&self, x: &Tensor) -> Result<usize> {
        let probs = self.probabilities(x)?;
        // strict comparison: ties resolve to the lower class index
        Ok(probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &p)| if p > best.1 { (k, p) } else { best })
            .0)
    }

    /// Cross-entropy loss together with all parameter gradients and the
    /// gradient with respect to the input (feeding the attack).
    pub fn loss_and_gradients(
        &self,
        x: &Tensor,
        label: usize,
    ) -> Result<(f64, TinyNetGrads, Tensor)> {
        if label >= CLASSES {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range for {CLASSES} classes"
            )));
        }
        let trace = self.forward_trace(x)?;
        let loss = -trace.probs[label].max(f64::MIN_POSITIVE).ln();

        // head: d logits = p − onehot(label)
        let d_logits: Vec<f64> = trace
            .probs
            .iter()
            .enumerate()
            .map(|(k, &p)| if k == label { p - 1.0 } else { p })
            .collect();
        let mut d_head_weight = Tensor::zeros(&[CLASSES, self.channels]);
        for k in 0..CLASSES {
            for c in 0..self.channels {
                d_head_weight.data_mut()[k * self.channels + c] =
                    d_logits[k] * trace.pooled[c];
            }
        }
        let d_head_bias = Tensor::from_vec(&[CLASSES], d_logits.clone())?;
        let mut d_pooled = vec![0.0; self.channels];
        for (c, slot) in d_pooled.iter_mut().enumerate() {
            for k in 0..CLASSES {
                *slot += d_logits[k] * self.head_weight.data()[k * self.channels + c];
            }
        }

        // spread the pooled gradient uniformly back over the feature map
        let area = (IMAGE_SIDE * IMAGE_SIDE) as f64;
        let mut d_current = Tensor::zeros(&[self.channels, IMAGE_SIDE, IMAGE_SIDE]);
        for c in 0..self.channels {
            let g = d_pooled[c] / area;
            for h in 0..IMAGE_SIDE {
                for w in 0..IMAGE_SIDE {
                    d_current.set3(c, h, w, g);
                }
            }
        }

        // cells in reverse
        let mut cell_grads: Vec<(Vec<OpWeights>, Tensor)> = Vec::with_capacity(self.cells.len());
        for (cell, trace_cell) in self.cells.iter().zip(&trace.cells).rev() {
            let (d_concat, d_projection) =
                conv::conv2d_backward(&trace_cell.concat, &cell.projection, 1, &d_current)?;
            let mut d_nodes = split_channels(&d_concat, self.nodes)?;
            // node 0 (the cell input) accumulates only through edges
            d_nodes.insert(0, Tensor::zeros(trace_cell.nodes[0].shape()));
            let mut edge_grads = vec![OpWeights::None; cell.edges.len()];
            // higher nodes first: node i's gradient is complete once every
            // edge leaving it (towards j > i) has been processed
            for (slot, op) in cell.edges.iter().enumerate().rev() {
                let (d_in, d_w) =
                    op_backward(op.kind, &trace_cell.nodes[op.edge.from], &op.weights, &d_nodes[op.edge.to])?;
                d_nodes[op.edge.from] = d_nodes[op.edge.from].add(&d_in)?;
                edge_grads[slot] = d_w;
            }
            d_current = d_nodes.swap_remove(0);
            cell_grads.push((edge_grads, d_projection));
        }
        cell_grads.reverse();

        let (d_input, d_stem) = conv::conv2d_backward(x, &self.stem, 1, &d_current)?;
        let grads = TinyNetGrads {
            stem: d_stem,
            cells: cell_grads,
            head_weight: d_head_weight,
            head_bias: d_head_bias,
        };
        Ok((loss, grads, d_input))
    }

    /// One SGD step; Gabor scale parameters are floored inside
    /// [`OpWeights::sgd_step`].
    pub fn sgd_step(&mut self, grads: &TinyNetGrads, learning_rate: f64) -> Result<()> {
        ops::step_tensor(&mut self.stem, &grads.stem, learning_rate)?;
        if grads.cells.len() != self.cells.len() {
            return Err(Error::Shape("cell gradient count mismatch".into()));
        }
        for (cell, (edge_grads, d_projection)) in self.cells.iter_mut().zip(&grads.cells) {
            if edge_grads.len() != cell.edges.len() {
                return Err(Error::Shape("edge gradient count mismatch".into()));
            }
            for (op, grad) in cell.edges.iter_mut().zip(edge_grads) {
                op.weights.sgd_step(grad, learning_rate)?;
            }
            ops::step_tensor(&mut cell.projection, d_projection, learning_rate)?;
        }
        ops::step_tensor(&mut self.head_weight, &grads.head_weight, learning_rate)?;
        ops::step_tensor(&mut self.head_bias, &grads.head_bias, learning_rate)
    }

    /// Every weight as one flat vector: stem, then per cell each edge's
    /// operation parameters followed by the projection, then the head.
    /// [`TinyNetGrads::flat_parameters`] uses the same order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.stem.data());
        for cell in &self.cells {
            for edge in &cell.edges {
                edge.weights.append_flat(&mut out);
            }
            out.extend_from_slice(cell.projection.data());
        }
        out.extend_from_slice(self.head_weight.data());
        out.extend_from_slice(self.head_bias.data());
        out
    }

    /// Writes weights back in [`TinyNet::flat_parameters`] order; `values`
    /// must have exactly the flattened length.
    pub fn set_flat_parameters(&mut self, values: &[f64]) -> Result<()> {
        let mut cursor = values;
        ops::read_tensor_flat(&mut self.stem, &mut cursor)?;
        for cell in &mut self.cells {
            for edge in &mut cell.edges {
                edge.weights.read_flat(&mut cursor)?;
            }
            ops::read_tensor_flat(&mut cell.projection, &mut cursor)?;
        }
        ops::read_tensor_flat(&mut self.head_weight, &mut cursor)?;
        ops::read_tensor_flat(&mut self.head_bias, &mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Shape(format!(
                "{} unused values in parameter vector",
                cursor.len()
            )));
        }
        Ok(())
    }
}

impl GradientOracle for (&TinyNet,) {
    fn loss_and_input_grad(&self, input: &Tensor, label: usize) -> Result<(f64, Tensor)> {
        let (loss, _, d_input) = self.0.loss_and_gradients(input, label)?;
        Ok((loss, d_input))
    }
}

fn gaussian_weight<R: rand::Rng>(shape: &[usize], fan_in: f64, rng: &mut R) -> Tensor {
    let len: usize = shape.iter().product();
    let scale = 1.0 / fan_in.sqrt();
    Tensor::from_vec(shape, (0..len).map(|_| scale * rng::gaussian(rng)).collect())
        .expect("length matches shape")
}

fn concat_channels(parts: &[Tensor]) -> Result<Tensor> {
    let [c, h, w] = match parts.first().map(|t| t.shape()) {
        Some([c, h, w]) => [*c, *h, *w],
        _ => return Err(Error::Shape("nothing to concatenate".into())),
    };
    let mut data = Vec::with_capacity(parts.len() * c * h * w);
    for part in parts {
        if part.shape() != [c, h, w] {
            return Err(Error::Shape("concatenation parts disagree on shape".into()));
        }
        data.extend_from_slice(part.data());
    }
    Tensor::from_vec(&[parts.len() * c, h, w], data)
}

fn split_channels(stacked: &Tensor, parts: usize) -> Result<Vec<Tensor>> {
    let [total, h, w] = match stacked.shape() {
        [c, h, w] => [*c, *h, *w],
        other => return Err(Error::Shape(format!("expected [C, H, W], got {other:?}"))),
    };
    if parts == 0 || total % parts != 0 {
        return Err(Error::Shape(format!("cannot split {total} channels into {parts} parts")));
    }
    let c = total / parts;
    let chunk = c * h * w;
    (0..parts)
        .map(|i| Tensor::from_vec(&[c, h, w], stacked.data()[i * chunk..(i + 1) * chunk].to_vec()))
        .collect()
}

fn global_average(features: &Tensor) -> Result<Vec<f64>> {
    let [c, h, w] = match features.shape() {
        [c, h, w] => [*c, *h, *w],
        other => return Err(Error::Shape(format!("expected [C, H, W], got {other:?}"))),
    };
    let area = (h * w) as f64;
    Ok((0..c)
        .map(|ch| features.data()[ch * h * w..(ch + 1) * h * w].iter().sum::<f64>() / area)
        .collect())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Outcome details of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// A non-finite loss or gradient appeared; the trial scores zero.
    pub diverged: bool,
    pub validation_correct: usize,
    pub validation_total: usize,
}

/// Trains a fresh network for `genotype` under `spec`. Weight and attack
/// randomness derive from `seed`; the dataset comes from `spec.data_seed`.
pub fn train_network(
    spec: &TinyNetSpec,
    genotype: &Genotype,
    seed: u64,
) -> Result<(TinyNet, Dataset, bool)> {
    spec.validate()?;
    let dataset = make_synthetic_dataset(spec.dataset_size, spec.data_seed)?;
    let mut weight_rng = rng::stream(seed, rng::domain::WEIGHTS, 0);
    let mut net = TinyNet::init(spec, genotype, &mut weight_rng)?;

    let mut global_step: u64 = 0;
    let mut diverged = false;
    'training: for _ in 0..spec.train_epochs {
        for (x, label) in dataset.train() {
            let x_train = if spec.attack.epsilon > 0.0 {
                let mut attack_rng = rng::stream(seed, rng::domain::ATTACK, global_step);
                // the config was validated upfront, so an attack error here
                // means the weights already carry non-finite values
                match fgsm_random_init(&(&net,), x, label as usize, &spec.attack, &mut attack_rng)
                {
                    Ok(delta) => x.add(&delta)?,
                    Err(Error::Attack(_)) => {
                        diverged = true;
                        break 'training;
                    }
                    Err(other) => return Err(other),
                }
            } else {
                x.clone()
            };
            let (loss, grads, _) = net.loss_and_gradients(&x_train, label as usize)?;
            if !loss.is_finite() || !grads.all_finite() {
                diverged = true;
                break 'training;
            }
            net.sgd_step(&grads, spec.learning_rate)?;
            global_step += 1;
        }
    }
    Ok((net, dataset, diverged))
}

/// Trains and scores one genotype; the accuracy is measured on clean
/// validation data unless `adversarial_validation` is set.
pub fn tinynet_evaluate(
    spec: &TinyNetSpec,
    genotype: &Genotype,
    seed: u64,
) -> Result<(f64, TrainReport)> {
    let (net, dataset, diverged) = train_network(spec, genotype, seed)?;
    if diverged {
        return Ok((
            0.0,
            TrainReport {
                diverged: true,
                validation_correct: 0,
                validation_total: dataset.validation_count(),
            },
        ));
    }
    let mut correct = 0;
    for (index, (x, label)) in dataset.validation().enumerate() {
        let x_eval = if spec.adversarial_validation && spec.attack.epsilon > 0.0 {
            let mut attack_rng =
                rng::stream(seed, rng::domain::ATTACK, VALIDATION_ATTACK_BASE + index as u64);
            let delta =
                fgsm_random_init(&(&net,), x, label as usize, &spec.attack, &mut attack_rng)?;
            x.add(&delta)?
        } else {
            x.clone()
        };
        if net.predict(&x_eval)? == label as usize {
            correct += 1;
        }
    }
    let total = dataset.validation_count();
    let report =
        TrainReport { diverged: false, validation_correct: correct, validation_total: total };
    Ok((correct as f64 / total as f64, report))
}

impl Evaluator for TinyNetSpec {
    fn evaluate(&self, genotype: &Genotype, seed: u64) -> Result<f64> {
        let (accuracy, _) = tinynet_evaluate(self, genotype, seed)?;
        Ok(accuracy)
    }
}
