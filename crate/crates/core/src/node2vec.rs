//! Node2Vec: biased second-order random walks feeding a skip-gram model
//! trained with a full softmax over the vocabulary.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{config_digest, EmbeddingSet, Provenance};
use crate::error::{Error, Result};
use crate::graph::{ColexGraph, ConceptId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    /// Maximum number of nodes in a walk.
    pub walk_length: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 5,
            walk_length: 10,
            p: 1.0,
            q: 1.0,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node == 0 || self.walk_length == 0 {
            return Err(Error::Argument("walk counts must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::Argument("p and q must be positive".into()));
        }
        Ok(())
    }
}

/// Samples `walks_per_node` walks from every non-isolated node, grouped by
/// start node in sorted concept order. Each start node draws from its own
/// stream of the seeded generator, so the corpus does not depend on thread
/// scheduling.
pub fn sample_walks(g: &ColexGraph, cfg: &WalkConfig) -> Result<Vec<Vec<ConceptId>>> {
    cfg.validate()?;
    if g.is_directed() {
        return Err(Error::Argument("walks are sampled on undirected graphs".into()));
    }
    let adj = g.adjacency();
    let walks: Vec<Vec<Vec<usize>>> = (0..adj.len())
        .into_par_iter()
        .map(|start| {
            if adj.is_isolated(start) {
                return Vec::new();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(start as u64);
            (0..cfg.walks_per_node)
                .map(|_| walk_from(&adj.out, start, cfg, &mut rng))
                .collect()
        })
        .collect();
    Ok(walks
        .into_iter()
        .flatten()
        .map(|w| w.into_iter().map(|i| adj.nodes[i].clone()).collect())
        .collect())
}

fn walk_from(out: &[Vec<(usize, f64)>], start: usize, cfg: &WalkConfig, rng: &mut impl Rng) -> Vec<usize> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start);
    while walk.len() < cfg.walk_length {
        let cur = *walk.last().expect("walk is non-empty");
        let neighbors = &out[cur];
        if neighbors.is_empty() {
            break;
        }
        let prev = (walk.len() >= 2).then(|| walk[walk.len() - 2]);
        let weights = neighbors.iter().map(|&(x, w)| match prev {
            None => w,
            Some(t) if x == t => w / cfg.p,
            Some(t) if out[t].binary_search_by_key(&x, |&(k, _)| k).is_ok() => w,
            Some(_) => w / cfg.q,
        });
        let dist = WeightedIndex::new(weights).expect("positive edge weights");
        walk.push(neighbors[dist.sample(rng)].0);
    }
    walk
}

/// Skip-gram (center, context) pairs within `window` positions.
pub fn extract_pairs<T: Clone>(walks: &[Vec<T>], window: usize) -> Vec<(T, T)> {
    let mut pairs = Vec::new();
    for walk in walks {
        for (i, center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len().saturating_sub(1));
            for (j, context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((center.clone(), context.clone()));
                }
            }
        }
    }
    pairs
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub learning_rate: f64,
    /// Passes over the training pairs.
    pub epochs: usize,
    /// Fraction of pairs held out for loss monitoring.
    pub validation_split: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 128,
            window: 2,
            learning_rate: 0.001,
            epochs: 1500,
            validation_split: 0.2,
            batch_size: 512,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.batch_size == 0 {
            return Err(Error::Argument("dim, window and batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return Err(Error::Argument("validation split must be in [0, 1)".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Argument("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Center vectors (rows of `input`) and context vectors (columns of `output`).
#[derive(Clone, Debug, PartialEq)]
pub struct SkipGramModel {
    pub input: DMatrix<f64>,
    pub output: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkipGramGradients {
    pub input: DMatrix<f64>,
    pub output: DMatrix<f64>,
}

impl SkipGramModel {
    /// Center vectors start uniform in ±0.5/dim, context vectors uniform in
    /// ±1/√dim.
    pub fn new(vocab_size: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = 0.5 / dim as f64;
        let input = DMatrix::from_fn(vocab_size, dim, |_, _| rng.random_range(-a..a));
        let b = 1.0 / (dim as f64).sqrt();
        let output = DMatrix::from_fn(dim, vocab_size, |_, _| rng.random_range(-b..b));
        SkipGramModel { input, output }
    }

    pub fn vocab_size(&self) -> usize {
        self.input.nrows()
    }

    fn centers(&self, batch: &[(usize, usize)]) -> DMatrix<f64> {
        let dim = self.input.ncols();
        DMatrix::from_fn(batch.len(), dim, |r, k| self.input[(batch[r].0, k)])
    }

    /// Row-wise softmax of center-vector × context-matrix logits.
    pub fn softmax(&self, batch: &[(usize, usize)]) -> DMatrix<f64> {
        let mut logits = self.centers(batch) * &self.output;
        for mut row in logits.row_iter_mut() {
            let max = row.max();
            row.apply(|x| *x = (*x - max).exp());
            let total = row.sum();
            row /= total;
        }
        logits
    }

    /// Mean cross-entropy of the observed contexts.
    pub fn loss(&self, batch: &[(usize, usize)]) -> f64 {
        let probs = self.softmax(batch);
        batch
            .iter()
            .enumerate()
            .map(|(r, &(_, ctx))| -probs[(r, ctx)].max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / batch.len() as f64
    }

    /// Mean loss and its exact gradient over the batch.
    pub fn gradients(&self, batch: &[(usize, usize)]) -> (f64, SkipGramGradients) {
        let n = batch.len() as f64;
        let centers = self.centers(batch);
        let mut delta = self.softmax(batch);
        let mut loss = 0.0;
        for (r, &(_, ctx)) in batch.iter().enumerate() {
            loss -= delta[(r, ctx)].max(f64::MIN_POSITIVE).ln();
            delta[(r, ctx)] -= 1.0;
        }
        delta /= n;
        let grad_output = centers.transpose() * &delta;
        let grad_centers = &delta * self.output.transpose();
        let mut grad_input = DMatrix::zeros(self.input.nrows(), self.input.ncols());
        for (r, &(c, _)) in batch.iter().enumerate() {
            let mut row = grad_input.row_mut(c);
            row += grad_centers.row(r);
        }
        (
            loss / n,
            SkipGramGradients {
                input: grad_input,
                output: grad_output,
            },
        )
    }

    /// One SGD update; returns the batch loss before the update.
    pub fn step(&mut self, batch: &[(usize, usize)], learning_rate: f64) -> f64 {
        let (loss, grads) = self.gradients(batch);
        self.input -= grads.input * learning_rate;
        self.output -= grads.output * learning_rate;
        loss
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Mean batch loss per epoch on the training split.
    pub train_loss: Vec<f64>,
    /// Loss on the held-out split after each epoch; empty without a split.
    pub validation_loss: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SkipGramOutput {
    pub embedding: EmbeddingSet,
    pub model: SkipGramModel,
    pub history: TrainingHistory,
}

/// Trains skip-gram vectors on (center, context) pairs. The returned
/// embedding holds the center vectors of every vocabulary entry.
pub fn train_skipgram(
    pairs: &[(ConceptId, ConceptId)],
    vocab: &[ConceptId],
    cfg: &SkipGramConfig,
) -> Result<SkipGramOutput> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Argument("no training pairs".into()));
    }
    let index: BTreeMap<&ConceptId, usize> = vocab.iter().enumerate().map(|(i, c)| (c, i)).collect();
    if index.len() != vocab.len() {
        return Err(Error::Argument("vocabulary has duplicates".into()));
    }
    let mut indexed = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let ia = *index.get(a).ok_or_else(|| Error::Lookup(a.to_string()))?;
        let ib = *index.get(b).ok_or_else(|| Error::Lookup(b.to_string()))?;
        indexed.push((ia, ib));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    indexed.shuffle(&mut rng);
    let n_val = (indexed.len() as f64 * cfg.validation_split).floor() as usize;
    if cfg.validation_split > 0.0 && (n_val == 0 || n_val == indexed.len()) {
        return Err(Error::Argument(format!(
            "{} pairs cannot be split {:.2}/{:.2}",
            indexed.len(),
            1.0 - cfg.validation_split,
            cfg.validation_split
        )));
    }
    let validation = indexed[..n_val].to_vec();
    let mut train = indexed[n_val..].to_vec();

    let mut model = SkipGramModel::new(vocab.len(), cfg.dim, rng.random());
    let mut history = TrainingHistory::default();
    for epoch in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train.chunks(cfg.batch_size) {
            total += model.step(batch, cfg.learning_rate) * batch.len() as f64;
        }
        history.train_loss.push(total / train.len() as f64);
        if !validation.is_empty() {
            let val = validation
                .chunks(cfg.batch_size)
                .map(|b| model.loss(b) * b.len() as f64)
                .sum::<f64>()
                / validation.len() as f64;
            history.validation_loss.push(val);
        }
        log::debug!(
            "epoch {epoch}: train loss {:.6}, validation loss {:?}",
            history.train_loss[epoch],
            history.validation_loss.last()
        );
    }

    let vectors = vocab
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), model.input.row(i).iter().copied().collect()))
        .collect();
    let provenance = Provenance {
        method: "skipgram".into(),
        colex_types: Vec::new(),
        config_digest: config_digest(cfg),
        seed: Some(cfg.seed),
        notes: Vec::new(),
    };
    Ok(SkipGramOutput {
        embedding: EmbeddingSet::new(cfg.dim, vectors, provenance)?,
        model,
        history,
    })
}

#[derive(Clone, Debug)]
pub struct Node2VecOutput {
    pub embedding: EmbeddingSet,
    pub history: TrainingHistory,
    /// Nodes without edges, which receive no vector.
    pub uncovered: Vec<ConceptId>,
}

/// Walks, pair extraction and skip-gram training in one call.
pub fn node2vec(g: &ColexGraph, walks: &WalkConfig, skipgram: &SkipGramConfig) -> Result<Node2VecOutput> {
    let corpus = sample_walks(g, walks)?;
    let pairs = extract_pairs(&corpus, skipgram.window);
    let adj = g.adjacency();
    let mut vocab = Vec::new();
    let mut uncovered = Vec::new();
    for (i, c) in adj.nodes.iter().enumerate() {
        if adj.is_isolated(i) {
            uncovered.push(c.clone());
        } else {
            vocab.push(c.clone());
        }
    }
    let mut out = train_skipgram(&pairs, &vocab, skipgram)?;
    out.embedding.provenance = Provenance {
        method: "node2vec".into(),
        colex_types: vec![g.colex_type()],
        config_digest: config_digest(&(walks, skipgram)),
        seed: Some(walks.seed),
        notes: Vec::new(),
    };
    Ok(Node2VecOutput {
        embedding: out.embedding,
        history: out.history,
        uncovered,
    })
}
