//! Linear probe over hashed character n-gram features.
//!
//! A softmax regression trained by mini-batch SGD, used to check that
//! generated datasets carry learnable label signal (and that shuffled
//! labels do not). Features are character n-grams of each text, tagged
//! with the side and language, hashed by FNV-1a 64 into 2^B buckets. The
//! hash is pinned; `tests/rng_vectors.rs` freezes its test vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Language;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single label; nothing to learn")]
    DegenerateDataset,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelMismatch { label: usize, num_classes: usize },
    #[error("feature index {index} exceeds model dimension {dim}")]
    DimensionMismatch { index: u32, dim: usize },
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a 64-bit. Pinned so feature vectors are stable across platforms
/// and implementations.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Sparse count vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub indices: Vec<u32>,
    pub values: Vec<f32>,
}

impl FeatureVector {
    pub fn from_counts(mut counts: Vec<(u32, f32)>) -> Self {
        counts.sort_unstable_by_key(|(i, _)| *i);
        let mut indices = Vec::with_capacity(counts.len());
        let mut values = Vec::with_capacity(counts.len());
        for (index, value) in counts {
            match indices.last() {
                Some(&last) if last == index => *values.last_mut().unwrap() += value,
                _ => {
                    indices.push(index);
                    values.push(value);
                }
            }
        }
        FeatureVector { indices, values }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// One training or evaluation example.
#[derive(Debug, Clone)]
pub struct Example {
    pub features: FeatureVector,
    pub label: usize,
}

fn accumulate_ngrams(
    counts: &mut Vec<(u32, f32)>,
    text: &str,
    tag: &str,
    lang: Language,
    hash_bits: u8,
    ngram_range: (usize, usize),
) {
    let mask = (1u64 << hash_bits) - 1;
    let chars: Vec<char> = text.chars().collect();
    let mut key = String::new();
    for n in ngram_range.0..=ngram_range.1 {
        if n == 0 || n > chars.len() {
            continue;
        }
        for window in chars.windows(n) {
            key.clear();
            key.push_str(tag);
            key.push(':');
            key.push_str(lang.code());
            key.push(':');
            key.extend(window.iter());
            let index = (fnv1a64(key.as_bytes()) & mask) as u32;
            counts.push((index, 1.0));
        }
    }
}

/// Hash both texts' character n-grams into one sparse count vector.
/// Side tags keep text_a and text_b features distinct.
pub fn featurize(
    text_a: &str,
    lang_a: Language,
    text_b: &str,
    lang_b: Language,
    hash_bits: u8,
    ngram_range: (usize, usize),
) -> FeatureVector {
    debug_assert!((10..=24).contains(&hash_bits));
    let mut counts = Vec::new();
    accumulate_ngrams(&mut counts, text_a, "a", lang_a, hash_bits, ngram_range);
    accumulate_ngrams(&mut counts, text_b, "b", lang_b, hash_bits, ngram_range);
    FeatureVector::from_counts(counts)
}

/// Degenerate featurizer that sees only text lengths. Used to verify that
/// generators do not leak labels through length alone.
pub fn featurize_length_only(text_a: &str, text_b: &str, hash_bits: u8) -> FeatureVector {
    let mask = (1u64 << hash_bits) - 1;
    let counts = [("len_a", text_a), ("len_b", text_b)]
        .into_iter()
        .map(|(tag, text)| {
            let bucket = text.chars().count() / 4;
            let key = format!("{tag}:{bucket}");
            ((fnv1a64(key.as_bytes()) & mask) as u32, 1.0)
        })
        .collect();
    FeatureVector::from_counts(counts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeModel {
    pub version: u32,
    pub hash_bits: u8,
    pub ngram_range: (usize, usize),
    pub num_classes: usize,
    /// Row-major (num_classes x 2^hash_bits).
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ProbeModel {
    pub fn zeroed(num_classes: usize, hash_bits: u8, ngram_range: (usize, usize)) -> Self {
        let dim = 1usize << hash_bits;
        ProbeModel {
            version: 1,
            hash_bits,
            ngram_range,
            num_classes,
            weights: vec![0.0; num_classes * dim],
            bias: vec![0.0; num_classes],
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.hash_bits
    }

    /// Fill weights and biases with seeded uniform noise in [-scale, scale].
    pub fn randomize(&mut self, seed: u64, scale: f32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            *w = rng.gen_range(-scale..=scale);
        }
    }

    pub fn scores(&self, features: &FeatureVector) -> Vec<f64> {
        let dim = self.dim();
        let mut scores: Vec<f64> = self.bias.iter().map(|b| f64::from(*b)).collect();
        for (index, value) in features.indices.iter().zip(&features.values) {
            let index = *index as usize;
            for (c, score) in scores.iter_mut().enumerate() {
                *score += f64::from(self.weights[c * dim + index]) * f64::from(*value);
            }
        }
        scores
    }

    pub fn probabilities(&self, features: &FeatureVector) -> Vec<f64> {
        softmax(&self.scores(features))
    }

    /// Predicted class; ties break toward the lowest class index.
    pub fn predict(&self, features: &FeatureVector) -> usize {
        let scores = self.scores(features);
        let mut best = 0;
        for (c, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = c;
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.bias.iter()).all(|w| w.is_finite())
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy loss of one example under the model.
pub fn sample_loss(model: &ProbeModel, example: &Example) -> f64 {
    let probs = model.probabilities(&example.features);
    -probs[example.label].max(1e-300).ln()
}

/// Analytic gradient of the cross-entropy loss of one example, as sparse
/// per-class weight gradients plus the dense bias gradient.
pub fn sample_gradient(model: &ProbeModel, example: &Example) -> (Vec<Vec<(u32, f64)>>, Vec<f64>) {
    let probs = model.probabilities(&example.features);
    let residual: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(c, p)| p - if c == example.label { 1.0 } else { 0.0 })
        .collect();
    let weight_grads = residual
        .iter()
        .map(|r| {
            example
                .features
                .indices
                .iter()
                .zip(&example.features.values)
                .map(|(i, v)| (*i, r * f64::from(*v)))
                .collect()
        })
        .collect();
    (weight_grads, residual)
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub num_classes: usize,
    pub hash_bits: u8,
    pub ngram_range: (usize, usize),
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_classes: 2,
            hash_bits: 18,
            ngram_range: (1, 3),
            learning_rate: 0.1,
            epochs: 5,
            l2: 1e-6,
            batch_size: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ProbeModel,
    /// Mean training loss of each epoch, in order.
    pub epoch_losses: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.epoch_losses.last().unwrap()
    }
}

/// Mini-batch SGD on average cross-entropy with L2 penalty. Learning rate
/// decays as 1/sqrt(t) over batches. Deterministic under the seed.
pub fn train(examples: &[Example], config: &TrainConfig) -> Result<TrainOutcome, ProbeError> {
    if examples.is_empty() {
        return Err(ProbeError::EmptyDataset);
    }
    for e in examples {
        if e.label >= config.num_classes {
            return Err(ProbeError::LabelMismatch {
                label: e.label,
                num_classes: config.num_classes,
            });
        }
    }
    let first = examples[0].label;
    if examples.iter().all(|e| e.label == first) {
        return Err(ProbeError::DegenerateDataset);
    }

    let mut model = ProbeModel::zeroed(config.num_classes, config.hash_bits, config.ngram_range);
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut step = 0u64;
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            step += 1;
            let lr = config.learning_rate / (step as f64).sqrt();
            let scale = lr / batch.len() as f64;
            // accumulate the batch gradient sparsely
            let mut weight_updates: Vec<(usize, f64)> = Vec::new();
            let mut bias_updates = vec![0.0f64; config.num_classes];
            for &i in batch {
                let example = &examples[i];
                epoch_loss += sample_loss(&model, example);
                let (wg, bg) = sample_gradient(&model, example);
                for (c, grads) in wg.iter().enumerate() {
                    for (index, g) in grads {
                        weight_updates.push((c * dim + *index as usize, *g));
                    }
                }
                for (acc, g) in bias_updates.iter_mut().zip(&bg) {
                    *acc += g;
                }
            }
            for (flat, g) in weight_updates {
                let w = &mut model.weights[flat];
                *w -= (scale * (g + config.l2 * f64::from(*w))) as f32;
            }
            for (b, g) in model.bias.iter_mut().zip(&bias_updates) {
                *b -= (scale * g) as f32;
            }
        }
        epoch_losses.push(epoch_loss / examples.len() as f64);
    }
    debug_assert!(model.is_finite());
    Ok(TrainOutcome { model, epoch_losses })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class_accuracy: Vec<f64>,
    pub mean_loss: f64,
}

pub fn evaluate(model: &ProbeModel, examples: &[Example]) -> Result<EvalReport, ProbeError> {
    if examples.is_empty() {
        return Err(ProbeError::EmptyDataset);
    }
    let mut correct = 0usize;
    let mut class_total = vec![0usize; model.num_classes];
    let mut class_correct = vec![0usize; model.num_classes];
    let mut loss = 0.0;
    for e in examples {
        if e.label >= model.num_classes {
            return Err(ProbeError::LabelMismatch {
                label: e.label,
                num_classes: model.num_classes,
            });
        }
        if let Some(&index) = e.features.indices.last() {
            if index as usize >= model.dim() {
                return Err(ProbeError::DimensionMismatch {
                    index,
                    dim: model.dim(),
                });
            }
        }
        let predicted = model.predict(&e.features);
        class_total[e.label] += 1;
        if predicted == e.label {
            correct += 1;
            class_correct[e.label] += 1;
        }
        loss += sample_loss(model, e);
    }
    Ok(EvalReport {
        accuracy: correct as f64 / examples.len() as f64,
        per_class_accuracy: class_correct
            .iter()
            .zip(&class_total)
            .map(|(c, t)| if *t == 0 { 0.0 } else { *c as f64 / *t as f64 })
            .collect(),
        mean_loss: loss / examples.len() as f64,
    })
}

/// Compare the analytic cross-entropy gradient against central finite
/// differences on up to 32 randomly chosen active coordinates (plus
/// biases). Returns the maximum relative error observed.
pub fn grad_check(model: &ProbeModel, example: &Example, epsilon: f64, seed: u64) -> f64 {
    let dim = model.dim();
    let (weight_grads, bias_grad) = sample_gradient(model, example);

    // candidate coordinates: every (class, active feature) plus every bias
    let mut candidates: Vec<(usize, Option<f64>)> = Vec::new();
    for (c, grads) in weight_grads.iter().enumerate() {
        for (index, g) in grads {
            candidates.push((c * dim + *index as usize, Some(*g)));
        }
    }
    let bias_base = model.num_classes * dim;
    for (c, g) in bias_grad.iter().enumerate() {
        candidates.push((bias_base + c, Some(*g)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(32);

    let mut scratch = model.clone();
    let mut max_rel = 0.0f64;
    for (flat, analytic) in candidates {
        let analytic = analytic.unwrap();
        // weights are f32, so the nominal step quantizes; measure the
        // delta that was actually applied
        let probe_at = |m: &mut ProbeModel, delta: f64| -> (f64, f64) {
            let slot = if flat < bias_base {
                &mut m.weights[flat]
            } else {
                &mut m.bias[flat - bias_base]
            };
            let old = *slot;
            *slot = (f64::from(old) + delta) as f32;
            let applied = f64::from(*slot) - f64::from(old);
            let loss = sample_loss(m, example);
            let slot = if flat < bias_base {
                &mut m.weights[flat]
            } else {
                &mut m.bias[flat - bias_base]
            };
            *slot = old;
            (loss, applied)
        };
        let (loss_plus, delta_plus) = probe_at(&mut scratch, epsilon);
        let (loss_minus, delta_minus) = probe_at(&mut scratch, -epsilon);
        let numeric = (loss_plus - loss_minus) / (delta_plus - delta_minus);
        let denom = (analytic.abs() + numeric.abs()).max(1e-8);
        max_rel = max_rel.max((analytic - numeric).abs() / denom);
    }
    max_rel
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_test_vectors() {
        // published FNV-1a 64 vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn featurize_is_deterministic_and_side_tagged() {
        let a = featurize("abc", Language::En, "xyz", Language::Ja, 12, (1, 3));
        let b = featurize("abc", Language::En, "xyz", Language::Ja, 12, (1, 3));
        assert_eq!(a, b);
        let swapped = featurize("xyz", Language::Ja, "abc", Language::En, 12, (1, 3));
        assert_ne!(a, swapped);
        // strictly increasing indices, positive values
        assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
        assert!(a.values.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn empty_texts_give_empty_vector() {
        let v = featurize("", Language::En, "", Language::Ja, 12, (1, 3));
        assert!(v.is_empty());
    }

    fn separable_fixture(n: usize) -> Vec<Example> {
        // two disjoint vocabularies
        (0..n)
            .map(|i| {
                let label = i % 2;
                let text = if label == 0 {
                    format!("alpha beta gamma {i}")
                } else {
                    format!("zeta eta theta {i}")
                };
                Example {
                    features: featurize(&text, Language::En, "", Language::Ja, 14, (1, 3)),
                    label,
                }
            })
            .collect()
    }

    #[test]
    fn learns_separable_fixture() {
        let examples = separable_fixture(200);
        let config = TrainConfig {
            hash_bits: 14,
            ..TrainConfig::default()
        };
        let outcome = train(&examples, &config).unwrap();
        let report = evaluate(&outcome.model, &examples).unwrap();
        assert!(report.accuracy >= 0.99, "accuracy {}", report.accuracy);
        assert!(outcome.model.is_finite());
    }

    #[test]
    fn loss_decreases_per_epoch_on_separable_fixture() {
        let examples = separable_fixture(200);
        for seed in 0..5 {
            let config = TrainConfig {
                hash_bits: 14,
                seed,
                ..TrainConfig::default()
            };
            let outcome = train(&examples, &config).unwrap();
            for pair in outcome.epoch_losses.windows(2) {
                assert!(pair[1] < pair[0], "losses {:?}", outcome.epoch_losses);
            }
        }
    }

    #[test]
    fn single_label_is_degenerate() {
        let mut examples = separable_fixture(10);
        for e in &mut examples {
            e.label = 0;
        }
        assert!(matches!(
            train(&examples, &TrainConfig { hash_bits: 14, ..TrainConfig::default() }),
            Err(ProbeError::DegenerateDataset)
        ));
    }

    #[test]
    fn training_is_bit_reproducible() {
        let examples = separable_fixture(100);
        let config = TrainConfig {
            hash_bits: 14,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train(&examples, &config).unwrap();
        let b = train(&examples, &config).unwrap();
        assert_eq!(a.model.weights, b.model.weights);
        assert_eq!(a.model.bias, b.model.bias);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn evaluate_empty_errors() {
        let model = ProbeModel::zeroed(2, 12, (1, 3));
        assert!(matches!(evaluate(&model, &[]), Err(ProbeError::EmptyDataset)));
    }

    #[test]
    fn constant_model_on_balanced_binary_is_half() {
        let model = ProbeModel::zeroed(2, 14, (1, 3));
        let examples = separable_fixture(100);
        let report = evaluate(&model, &examples).unwrap();
        assert!((report.accuracy - 0.5).abs() < 1e-9);
        // ties break toward class 0
        assert!((report.per_class_accuracy[0] - 1.0).abs() < 1e-9);
        assert!(report.per_class_accuracy[1].abs() < 1e-9);
    }

    #[test]
    fn label_mismatch_detected() {
        let examples = vec![Example {
            features: FeatureVector::default(),
            label: 7,
        }];
        let model = ProbeModel::zeroed(2, 12, (1, 3));
        assert!(matches!(
            evaluate(&model, &examples),
            Err(ProbeError::LabelMismatch { label: 7, .. })
        ));
    }

    #[test]
    fn zero_weight_gradient_matches_closed_form() {
        // at the origin all probabilities are 1/C, so the bias gradient is
        // 1/C - 1 for the true class and 1/C elsewhere
        let model = ProbeModel::zeroed(4, 12, (1, 3));
        let example = Example {
            features: featurize("abc", Language::En, "def", Language::Ja, 12, (1, 2)),
            label: 2,
        };
        let (wg, bg) = sample_gradient(&model, &example);
        for (c, g) in bg.iter().enumerate() {
            let expected = if c == 2 { 0.25 - 1.0 } else { 0.25 };
            assert!((g - expected).abs() < 1e-12);
        }
        // weight gradient is residual times count
        let count = example.features.values[0];
        assert!((wg[0][0].1 - 0.25 * f64::from(count)).abs() < 1e-12);
    }

    #[test]
    fn grad_check_small_at_random_points() {
        let example = Example {
            features: featurize("some text", Language::En, "別の文", Language::Ja, 12, (1, 3)),
            label: 1,
        };
        let mut model = ProbeModel::zeroed(2, 12, (1, 3));
        model.randomize(3, 0.5);
        let err = grad_check(&model, &example, 1e-5, 0);
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn grad_check_negative_control_with_large_epsilon() {
        // repeated characters give large feature counts, which amplifies
        // the O(eps^2) truncation error of the central difference
        let example = Example {
            features: featurize("aaaaaaaabbbbbbbb", Language::En, "ののののののの", Language::Ja, 12, (1, 3)),
            label: 0,
        };
        let mut model = ProbeModel::zeroed(2, 12, (1, 3));
        model.randomize(11, 0.4);
        let err = grad_check(&model, &example, 1e-1, 0);
        assert!(err > 1e-4, "relative error {err} unexpectedly small");
    }

    #[test]
    fn model_serialization_round_trip() {
        let mut model = ProbeModel::zeroed(2, 10, (1, 3));
        model.randomize(1, 0.1);
        let json = serde_json::to_string(&model).unwrap();
        let back: ProbeModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back.weights, model.weights);
        assert_eq!(back.hash_bits, model.hash_bits);
    }
}
