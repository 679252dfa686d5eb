//! Multi-modal summarization: mean word-embedding features, a single-hidden-
//! layer multi-label tag predictor (with trainer), pluggable icon
//! classification, and per-tag visual-hashtag selection.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::imaging::RasterImage;
use crate::proposals::Detection;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ordered tag list with O(log n) reverse lookup. Duplicates are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocabulary {
    tags: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl TagVocabulary {
    pub fn new(tags: Vec<String>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::InvalidVocabulary {
                reason: "vocabulary is empty",
            });
        }
        let mut index = BTreeMap::new();
        for (i, tag) in tags.iter().enumerate() {
            if index.insert(tag.clone(), i).is_some() {
                return Err(Error::InvalidVocabulary {
                    reason: "duplicate tag",
                });
            }
        }
        Ok(TagVocabulary { tags, index })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tag(&self, i: usize) -> &str {
        &self.tags[i]
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }
}

/// Lowercase and strip non-alphanumeric characters; vocabulary and embedding
/// lookups go through this so OCR tokens like "Health," match "health".
pub fn normalize_word(word: &str) -> String {
    word.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(|c| c.to_lowercase())
        .collect()
}

/// Word -> dense vector table with case-folded lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParams {
                reason: "embedding dimension must be >= 1",
            });
        }
        Ok(EmbeddingTable {
            dimension,
            entries: BTreeMap::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams {
                reason: "embedding vectors must be finite",
            });
        }
        self.entries.insert(normalize_word(word), vector);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(&normalize_word(word)).map(|v| v.as_slice())
    }
}

/// Arithmetic mean of the vectors of in-vocabulary words (duplicates kept:
/// the bag weights frequent words). Returns the mean and the count of
/// skipped out-of-vocabulary words; all-OOV input is an error carrying that
/// count.
pub fn mean_embed(words: &[&str], table: &EmbeddingTable) -> Result<(Vec<f64>, usize)> {
    let mut sum = vec![0.0f64; table.dimension()];
    let mut found = 0usize;
    let mut skipped = 0usize;
    for word in words {
        match table.get(word) {
            Some(v) => {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                found += 1;
            }
            None => skipped += 1,
        }
    }
    if found == 0 {
        return Err(Error::NoWordsEmbedded { skipped });
    }
    for s in sum.iter_mut() {
        *s /= found as f64;
    }
    Ok((sum, skipped))
}

/// Single-hidden-layer multi-label network:
/// scores = sigmoid(W2 relu(W1 x + b1) + b2).
///
/// `w1` is hidden x input row-major; `w2` is output x hidden row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TagPredictor {
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl TagPredictor {
    /// Xavier-uniform initialization, deterministic in `seed`; biases zero.
    pub fn init(input_dim: usize, hidden: usize, output_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lim1 = libm::sqrt(6.0 / (input_dim + hidden) as f64);
        let lim2 = libm::sqrt(6.0 / (hidden + output_dim) as f64);
        let w1 = (0..hidden * input_dim)
            .map(|_| rng.random_range(-lim1..=lim1))
            .collect();
        let w2 = (0..output_dim * hidden)
            .map(|_| rng.random_range(-lim2..=lim2))
            .collect();
        TagPredictor {
            input_dim,
            hidden,
            output_dim,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; output_dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.output_dim == 0 {
            return Err(Error::InvalidParams {
                reason: "model dimensions must be >= 1",
            });
        }
        if self.w1.len() != self.hidden * self.input_dim
            || self.b1.len() != self.hidden
            || self.w2.len() != self.output_dim * self.hidden
            || self.b2.len() != self.output_dim
        {
            return Err(Error::InvalidParams {
                reason: "weight shapes do not match model dimensions",
            });
        }
        let finite = self
            .w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams {
                reason: "weights must be finite",
            });
        }
        Ok(())
    }

    /// Hidden activations after relu.
    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0f64; self.hidden];
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let mut acc = self.b1[j];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *hj = acc.max(0.0);
        }
        h
    }

    /// Pre-sigmoid output logits.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let h = self.hidden_activations(x);
        let mut z = vec![0.0f64; self.output_dim];
        for (t, zt) in z.iter_mut().enumerate() {
            let row = &self.w2[t * self.hidden..(t + 1) * self.hidden];
            let mut acc = self.b2[t];
            for (w, hj) in row.iter().zip(&h) {
                acc += w * hj;
            }
            *zt = acc;
        }
        Ok(z)
    }

    /// Per-tag scores in (0,1).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.logits(x)?.into_iter().map(sigmoid).collect())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// Top-k tags by score, descending; ties keep vocabulary order.
pub fn predict_tags(
    feature: &[f64],
    model: &TagPredictor,
    vocab: &TagVocabulary,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    if vocab.len() != model.output_dim {
        return Err(Error::DimensionMismatch {
            expected: model.output_dim,
            actual: vocab.len(),
        });
    }
    let scores = model.forward(feature)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| (vocab.tag(i).to_string(), scores[i]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 10,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Parameter gradients in the same layout as the model fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// One training example: feature vector plus multi-hot target.
pub type TrainExample = (Vec<f64>, Vec<u8>);

fn validate_dataset(data: &[TrainExample], model: &TagPredictor) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidTrainingData {
            reason: "dataset is empty",
        });
    }
    for (x, y) in data {
        if x.len() != model.input_dim {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim,
                actual: x.len(),
            });
        }
        if y.len() != model.output_dim {
            return Err(Error::DimensionMismatch {
                expected: model.output_dim,
                actual: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrainingData {
                reason: "features must be finite",
            });
        }
        if y.iter().any(|&t| t > 1) {
            return Err(Error::InvalidTrainingData {
                reason: "targets must be 0 or 1",
            });
        }
    }
    Ok(())
}

/// Numerically stable binary cross-entropy against a logit.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + libm::log(1.0 + libm::exp(-libm::fabs(z)))
}

/// Mean per-tag binary cross-entropy of `model` over `batch`.
pub fn bce_loss(model: &TagPredictor, batch: &[TrainExample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidTrainingData {
            reason: "batch is empty",
        });
    }
    let mut total = 0.0f64;
    for (x, y) in batch {
        let z = model.logits(x)?;
        for (zt, &yt) in z.iter().zip(y) {
            total += bce_with_logit(*zt, yt as f64);
        }
    }
    Ok(total / (batch.len() * model.output_dim) as f64)
}

/// Analytic loss and gradients over `batch` (mean per-tag BCE).
pub fn gradients(model: &TagPredictor, batch: &[TrainExample]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidTrainingData {
            reason: "batch is empty",
        });
    }
    let mut g = Gradients {
        w1: vec![0.0; model.w1.len()],
        b1: vec![0.0; model.b1.len()],
        w2: vec![0.0; model.w2.len()],
        b2: vec![0.0; model.b2.len()],
    };
    let norm = 1.0 / (batch.len() * model.output_dim) as f64;
    let mut loss = 0.0f64;
    for (x, y) in batch {
        if x.len() != model.input_dim || y.len() != model.output_dim {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim,
                actual: x.len(),
            });
        }
        let h = model.hidden_activations(x);
        // dL/dz per output, including the 1/(B*T) normalization.
        let mut dz = vec![0.0f64; model.output_dim];
        for t in 0..model.output_dim {
            let row = &model.w2[t * model.hidden..(t + 1) * model.hidden];
            let mut z = model.b2[t];
            for (w, hj) in row.iter().zip(&h) {
                z += w * hj;
            }
            loss += bce_with_logit(z, y[t] as f64);
            dz[t] = (sigmoid(z) - y[t] as f64) * norm;
        }
        let mut dh = vec![0.0f64; model.hidden];
        #[allow(clippy::needless_range_loop)]
        for t in 0..model.output_dim {
            for j in 0..model.hidden {
                g.w2[t * model.hidden + j] += dz[t] * h[j];
                dh[j] += model.w2[t * model.hidden + j] * dz[t];
            }
            g.b2[t] += dz[t];
        }
        for j in 0..model.hidden {
            if h[j] > 0.0 {
                for (i, xi) in x.iter().enumerate() {
                    g.w1[j * model.input_dim + i] += dh[j] * xi;
                }
                g.b1[j] += dh[j];
            }
        }
    }
    Ok((loss * norm, g))
}

/// Mini-batch SGD on mean per-tag BCE. Deterministic in the config seed
/// (initialization and epoch shuffles both derive from it). Returns the
/// trained model and its final full-dataset loss.
pub fn train_tag_predictor(
    data: &[TrainExample],
    input_dim: usize,
    hidden: usize,
    output_dim: usize,
    config: &TrainConfig,
) -> Result<(TagPredictor, f64)> {
    if config.batch_size == 0 {
        return Err(Error::InvalidParams {
            reason: "batch_size must be >= 1",
        });
    }
    if !config.learning_rate.is_finite() || config.learning_rate < 0.0 {
        return Err(Error::InvalidParams {
            reason: "learning_rate must be nonnegative",
        });
    }
    let mut model = TagPredictor::init(input_dim, hidden, output_dim, config.seed);
    validate_dataset(data, &model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        // Fisher-Yates, deterministic across platforms.
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<TrainExample> = chunk.iter().map(|&i| data[i].clone()).collect();
            let (loss, g) = gradients(&model, &batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            let lr = config.learning_rate;
            for (w, gw) in model.w1.iter_mut().zip(&g.w1) {
                *w -= lr * gw;
            }
            for (b, gb) in model.b1.iter_mut().zip(&g.b1) {
                *b -= lr * gb;
            }
            for (w, gw) in model.w2.iter_mut().zip(&g.w2) {
                *w -= lr * gw;
            }
            for (b, gb) in model.b2.iter_mut().zip(&g.b2) {
                *b -= lr * gb;
            }
        }
    }
    let final_loss = bce_loss(&model, data)?;
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            epoch: config.epochs,
        });
    }
    Ok((model, final_loss))
}

/// 4x4x4 RGB histogram (64 bins, channel-major: r*16 + g*4 + b), normalized
/// over the counted pixels. RGBA images count only pixels with alpha > 0.
pub fn color_histogram(img: &RasterImage) -> Result<[f64; 64]> {
    let ch = img.channels() as usize;
    if ch < 3 {
        return Err(Error::UnsupportedChannels(img.channels()));
    }
    let mut hist = [0f64; 64];
    let mut count = 0usize;
    for px in img.pixels().chunks_exact(ch) {
        if ch == 4 && px[3] == 0 {
            continue;
        }
        let bin = (px[0] as usize / 64) * 16 + (px[1] as usize / 64) * 4 + px[2] as usize / 64;
        hist[bin] += 1.0;
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoOpaquePixels);
    }
    for h in hist.iter_mut() {
        *h /= count as f64;
    }
    Ok(hist)
}

/// Produces a per-tag probability vector for a proposal crop. Backends may
/// key off the proposal id (external classifier files) or the pixels
/// (the built-in histogram baseline).
pub trait IconClassifier {
    fn classify(&self, proposal_id: &str, crop: &RasterImage) -> Result<Vec<f64>>;
    /// Length of returned probability vectors.
    fn num_tags(&self) -> usize;
}

/// Nearest-neighbor baseline over an icon pool: L1 distance between 4x4x4
/// color histograms, probabilities = softmax of negated per-tag nearest
/// distances. Tags without exemplars get probability 0.
#[derive(Debug, Clone)]
pub struct HistogramClassifier {
    /// Per vocabulary tag: smallest-distance exemplar histogram set.
    exemplars: Vec<Vec<[f64; 64]>>,
    num_tags: usize,
}

impl HistogramClassifier {
    pub fn from_pool(pool: &[IconAsset], vocab: &TagVocabulary) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyIconPool);
        }
        let mut exemplars = vec![Vec::new(); vocab.len()];
        for icon in pool {
            let Some(t) = vocab.index_of(&icon.tag) else {
                return Err(Error::InvalidIcon {
                    id: icon.id.clone(),
                    reason: "icon tag missing from vocabulary",
                });
            };
            exemplars[t].push(color_histogram(&icon.image)?);
        }
        Ok(HistogramClassifier {
            exemplars,
            num_tags: vocab.len(),
        })
    }
}

fn l1(a: &[f64; 64], b: &[f64; 64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum()
}

impl IconClassifier for HistogramClassifier {
    fn classify(&self, _proposal_id: &str, crop: &RasterImage) -> Result<Vec<f64>> {
        let hist = color_histogram(crop)?;
        // Negated nearest distance per tag; absent tags stay at -inf and
        // drop out of the softmax.
        let neg: Vec<f64> = self
            .exemplars
            .iter()
            .map(|ex| {
                ex.iter()
                    .map(|e| -l1(&hist, e))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let m = neg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::EmptyIconPool);
        }
        let mut probs: Vec<f64> = neg
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    libm::exp(v - m)
                } else {
                    0.0
                }
            })
            .collect();
        let sum: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(probs)
    }

    fn num_tags(&self) -> usize {
        self.num_tags
    }
}

use crate::synthgen::IconAsset;

/// A selected visual hashtag: the proposal chosen for one predicted tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Hashtag {
    pub tag: String,
    pub bbox: BBox,
    pub class_prob: f64,
    pub score: f64,
    /// Index into the proposal list the hashtag was drawn from.
    pub proposal_index: usize,
}

/// For each predicted tag, pick the classified proposal with the highest
/// probability for that tag (ties: higher detection score, then input
/// order). Tags absent from the vocabulary are skipped; an empty proposal
/// list yields an empty selection.
pub fn select_hashtags(
    tags: &[(String, f64)],
    proposals: &[Detection],
    vocab: &TagVocabulary,
) -> Result<Vec<Hashtag>> {
    for d in proposals {
        let probs = d.class_probs.as_ref().ok_or(Error::InvalidDetection {
            reason: "proposal lacks class_probs",
        })?;
        if probs.len() != vocab.len() {
            return Err(Error::ProbsLength {
                expected: vocab.len(),
                actual: probs.len(),
            });
        }
    }
    let mut out = Vec::new();
    for (tag, _) in tags {
        let Some(t) = vocab.index_of(tag) else { continue };
        let mut best: Option<usize> = None;
        for (i, d) in proposals.iter().enumerate() {
            let p = d.class_probs.as_ref().expect("validated above")[t];
            let better = match best {
                None => true,
                Some(b) => {
                    let bp = proposals[b].class_probs.as_ref().expect("validated")[t];
                    p > bp || (p == bp && d.score > proposals[b].score)
                }
            };
            if better {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            out.push(Hashtag {
                tag: tag.clone(),
                bbox: proposals[i].bbox,
                class_prob: proposals[i].class_probs.as_ref().expect("validated")[t],
                score: proposals[i].score,
                proposal_index: i,
            });
        }
    }
    Ok(out)
}

/// Full text + hashtag summary for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub image_id: String,
    pub tags: Vec<(String, f64)>,
    pub hashtags: Vec<Hashtag>,
    pub warnings: Vec<String>,
}

/// Compose the pipeline: mean-embed the OCR bag, predict top-k tags, then
/// select a hashtag per tag from the classified proposals. Degenerate inputs
/// (all words out-of-vocabulary, no proposals) produce warnings instead of
/// errors.
pub fn summarize(
    image_id: &str,
    words: &[&str],
    table: &EmbeddingTable,
    model: &TagPredictor,
    vocab: &TagVocabulary,
    top_k: usize,
    classified_proposals: &[Detection],
) -> Result<Summary> {
    let mut warnings = Vec::new();
    let (tags, skipped) = match mean_embed(words, table) {
        Ok((feature, skipped)) => (predict_tags(&feature, model, vocab, top_k)?, skipped),
        Err(Error::NoWordsEmbedded { skipped }) => {
            warnings.push(alloc::format!(
                "no usable words: all {skipped} out of vocabulary"
            ));
            (Vec::new(), 0)
        }
        Err(e) => return Err(e),
    };
    if skipped > 0 {
        warnings.push(alloc::format!("{skipped} words out of vocabulary"));
    }
    let hashtags = if classified_proposals.is_empty() {
        if !tags.is_empty() {
            warnings.push("no proposals supplied; hashtag set is empty".to_string());
        }
        Vec::new()
    } else {
        select_hashtags(&tags, classified_proposals, vocab)?
    };
    Ok(Summary {
        image_id: image_id.to_string(),
        tags,
        hashtags,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn vocab(tags: &[&str]) -> TagVocabulary {
        TagVocabulary::new(tags.iter().map(|t| t.to_string()).collect()).unwrap()
    }

    fn table(dim: usize, entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(dim).unwrap();
        for (w, v) in entries {
            t.insert(w, v.to_vec()).unwrap();
        }
        t
    }

    #[test]
    fn vocabulary_rejects_duplicates_and_indexes() {
        assert!(TagVocabulary::new(vec!["a".into(), "a".into()]).is_err());
        assert!(TagVocabulary::new(vec![]).is_err());
        let v = vocab(&["health", "money", "cat"]);
        assert_eq!(v.index_of("money"), Some(1));
        assert_eq!(v.index_of("dog"), None);
        assert_eq!(v.tag(2), "cat");
    }

    #[test]
    fn word_normalization_folds_case_and_punctuation() {
        assert_eq!(normalize_word("Health,"), "health");
        assert_eq!(normalize_word("  CO2!"), "co2");
        assert_eq!(normalize_word("don't"), "dont");
        assert_eq!(normalize_word("?!"), "");
    }

    #[test]
    fn embedding_lookup_is_case_folded() {
        let t = table(3, &[("health", &[1.0, 2.0, 3.0])]);
        assert_eq!(t.get("HEALTH."), Some(&[1.0, 2.0, 3.0][..]));
        assert_eq!(t.get("wealth"), None);
        let mut t2 = EmbeddingTable::new(3).unwrap();
        assert!(t2.insert("x", vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn single_word_mean_is_its_vector() {
        let t = table(3, &[("sun", &[0.5, -1.0, 2.0])]);
        let (m, skipped) = mean_embed(&["sun"], &t).unwrap();
        assert_eq!(m, vec![0.5, -1.0, 2.0]);
        assert_eq!(skipped, 0);
    }

    #[test]
    fn mean_is_order_free_and_counts_oov() {
        let t = table(
            2,
            &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[4.0, 4.0])],
        );
        let (m1, s1) = mean_embed(&["a", "zzz", "b"], &t).unwrap();
        let (m2, s2) = mean_embed(&["b", "a", "qqq"], &t).unwrap();
        assert_eq!(m1, vec![0.5, 0.5]);
        assert_eq!(m1, m2);
        assert_eq!((s1, s2), (1, 1));
    }

    #[test]
    fn componentwise_two_word_mean() {
        let t = table(2, &[("u", &[2.0, -2.0]), ("v", &[4.0, 6.0])]);
        let (m, _) = mean_embed(&["u", "v"], &t).unwrap();
        assert_eq!(m, vec![3.0, 2.0]);
    }

    #[test]
    fn all_oov_is_an_error_with_count() {
        let t = table(2, &[("a", &[1.0, 0.0])]);
        assert_eq!(
            mean_embed(&["x", "y", "z"], &t),
            Err(Error::NoWordsEmbedded { skipped: 3 })
        );
    }

    #[test]
    fn duplicates_weight_the_mean() {
        let t = table(1, &[("a", &[0.0]), ("b", &[3.0])]);
        let (m, _) = mean_embed(&["a", "b", "b"], &t).unwrap();
        assert_eq!(m, vec![2.0]);
    }

    #[test]
    fn zero_model_scores_half_everywhere() {
        let model = TagPredictor {
            input_dim: 2,
            hidden: 3,
            output_dim: 4,
            w1: vec![0.0; 6],
            b1: vec![0.0; 3],
            w2: vec![0.0; 12],
            b2: vec![0.0; 4],
        };
        let v = vocab(&["t0", "t1", "t2", "t3"]);
        let out = predict_tags(&[1.0, -1.0], &model, &v, 2).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], ("t0".to_string(), 0.5));
        assert_eq!(out[1], ("t1".to_string(), 0.5));
    }

    #[test]
    fn scaling_output_weights_preserves_ranking() {
        let model = TagPredictor::init(4, 5, 6, 123);
        let v = vocab(&["a", "b", "c", "d", "e", "f"]);
        let x = [0.3, -0.7, 1.2, 0.05];
        let base = predict_tags(&x, &model, &v, 6).unwrap();
        let mut scaled = model.clone();
        for w in scaled.w2.iter_mut() {
            *w *= 3.5;
        }
        for b in scaled.b2.iter_mut() {
            *b *= 3.5;
        }
        let got = predict_tags(&x, &scaled, &v, 6).unwrap();
        let base_order: Vec<&String> = base.iter().map(|(t, _)| t).collect();
        let got_order: Vec<&String> = got.iter().map(|(t, _)| t).collect();
        assert_eq!(base_order, got_order);
    }

    #[test]
    fn hand_computed_forward_pass() {
        // x = [1, 2]; W1 rows [1, -1], [0.5, 0.5]; b1 = [0.5, -2].
        // h_pre = [-0.5, -0.5] -> relu h = [0, 0]... use b1 = [0.5, 0] so
        // h = [0, 1.5] wait: row0 . x = 1 - 2 = -1 + 0.5 = -0.5 -> 0;
        // row1 . x = 0.5 + 1.0 = 1.5 + 0 = 1.5.
        // z = W2 h + b2 with W2 rows [2, 1], [-1, 0.5]; b2 = [0.1, -0.1]:
        // z0 = 2*0 + 1*1.5 + 0.1 = 1.6; z1 = -0 + 0.75 - 0.1 = 0.65.
        let model = TagPredictor {
            input_dim: 2,
            hidden: 2,
            output_dim: 2,
            w1: vec![1.0, -1.0, 0.5, 0.5],
            b1: vec![0.5, 0.0],
            w2: vec![2.0, 1.0, -1.0, 0.5],
            b2: vec![0.1, -0.1],
        };
        let scores = model.forward(&[1.0, 2.0]).unwrap();
        assert!((scores[0] - sigmoid(1.6)).abs() < 1e-12);
        assert!((scores[1] - sigmoid(0.65)).abs() < 1e-12);
        let v = vocab(&["first", "second"]);
        let ranked = predict_tags(&[1.0, 2.0], &model, &v, 1).unwrap();
        assert_eq!(ranked[0].0, "first");
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let data: Vec<TrainExample> = (0..5)
            .map(|_| {
                (
                    (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    (0..2).map(|_| u8::from(rng.random_range(0.0..1.0) > 0.5)).collect(),
                )
            })
            .collect();
        let model = TagPredictor::init(4, 3, 2, 99);
        let (_, g) = gradients(&model, &data).unwrap();

        let eps = 1e-4;
        let mut max_rel = 0.0f64;
        let mut check = |select: &dyn Fn(&mut TagPredictor) -> &mut Vec<f64>, grad: &[f64]| {
            #[allow(clippy::needless_range_loop)]
            for i in 0..grad.len() {
                let mut plus = model.clone();
                select(&mut plus)[i] += eps;
                let mut minus = model.clone();
                select(&mut minus)[i] -= eps;
                let fd = (bce_loss(&plus, &data).unwrap() - bce_loss(&minus, &data).unwrap())
                    / (2.0 * eps);
                let denom = libm::fabs(grad[i]).max(libm::fabs(fd)).max(1e-6);
                let rel = libm::fabs(grad[i] - fd) / denom;
                if rel > max_rel {
                    max_rel = rel;
                }
            }
        };
        check(&|m| &mut m.w1, &g.w1);
        check(&|m| &mut m.b1, &g.b1);
        check(&|m| &mut m.w2, &g.w2);
        check(&|m| &mut m.b2, &g.b2);
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn single_example_is_memorized() {
        let data = vec![(vec![1.0, -0.5, 0.25, 0.8], vec![1u8, 0])];
        let config = TrainConfig {
            learning_rate: 0.1,
            epochs: 2000,
            batch_size: 1,
            seed: 5,
        };
        let (_, loss) = train_tag_predictor(&data, 4, 8, 2, &config).unwrap();
        assert!(loss < 0.01, "loss {loss}");
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let data = vec![
            (vec![1.0, 0.0], vec![1u8, 0, 1]),
            (vec![0.0, 1.0], vec![0u8, 1, 0]),
        ];
        let config = TrainConfig {
            learning_rate: 0.0,
            epochs: 7,
            batch_size: 2,
            seed: 3,
        };
        let (trained, _) = train_tag_predictor(&data, 2, 4, 3, &config).unwrap();
        assert_eq!(trained, TagPredictor::init(2, 4, 3, 3));
    }

    #[test]
    fn training_is_deterministic() {
        let data = vec![
            (vec![1.0, 0.0, -1.0], vec![1u8, 0]),
            (vec![0.0, 1.0, 0.5], vec![0u8, 1]),
            (vec![-0.5, 0.25, 0.1], vec![1u8, 1]),
        ];
        let config = TrainConfig {
            learning_rate: 0.05,
            epochs: 20,
            batch_size: 2,
            seed: 11,
        };
        let (m1, l1) = train_tag_predictor(&data, 3, 4, 2, &config).unwrap();
        let (m2, l2) = train_tag_predictor(&data, 3, 4, 2, &config).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(l1, l2);
    }

    #[test]
    fn dataset_validation_errors() {
        let config = TrainConfig::default();
        assert!(train_tag_predictor(&[], 2, 2, 2, &config).is_err());
        let bad_target = vec![(vec![0.0, 0.0], vec![2u8, 0])];
        assert!(train_tag_predictor(&bad_target, 2, 2, 2, &config).is_err());
        let bad_dim = vec![(vec![0.0], vec![1u8, 0])];
        assert!(train_tag_predictor(&bad_dim, 2, 2, 2, &config).is_err());
    }

    fn rgba(color: [u8; 4], side: u32) -> RasterImage {
        RasterImage::filled(side, side, &color).unwrap()
    }

    #[test]
    fn histogram_counts_opaque_pixels_only() {
        let mut img = rgba([255, 0, 0, 255], 2);
        img.put_pixel(0, 0, &[0, 255, 0, 0]);
        let h = color_histogram(&img).unwrap();
        // Red bin (3,0,0) -> 3*16 = 48 holds all counted mass.
        assert_eq!(h[48], 1.0);
        assert_eq!(h.iter().sum::<f64>(), 1.0);
        assert!(color_histogram(&rgba([1, 1, 1, 0], 2)).is_err());
    }

    fn pool_icon(id: &str, tag: &str, color: [u8; 3]) -> IconAsset {
        let mut img = RasterImage::filled(8, 8, &[color[0], color[1], color[2], 255]).unwrap();
        img.put_pixel(7, 7, &[0, 0, 0, 0]);
        IconAsset::new(id, tag, img).unwrap()
    }

    #[test]
    fn identical_exemplar_wins_classification() {
        let v = vocab(&["red", "green", "blue"]);
        let pool = vec![
            pool_icon("r", "red", [250, 10, 10]),
            pool_icon("g", "green", [10, 250, 10]),
            pool_icon("b", "blue", [10, 10, 250]),
        ];
        let clf = HistogramClassifier::from_pool(&pool, &v).unwrap();
        let crop = rgba([250, 10, 10, 255], 6);
        let probs = clf.classify("p0", &crop).unwrap();
        assert_eq!(probs.len(), 3);
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(probs.iter().all(|&p| p >= 0.0));
        let argmax = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(v.tag(argmax), "red");
    }

    #[test]
    fn tags_without_exemplars_get_zero_probability() {
        let v = vocab(&["red", "empty"]);
        let pool = vec![pool_icon("r", "red", [250, 10, 10])];
        let clf = HistogramClassifier::from_pool(&pool, &v).unwrap();
        let probs = clf.classify("p", &rgba([250, 10, 10, 255], 4)).unwrap();
        assert_eq!(probs[1], 0.0);
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_is_rejected() {
        let v = vocab(&["a"]);
        assert_eq!(
            HistogramClassifier::from_pool(&[], &v).err(),
            Some(Error::EmptyIconPool)
        );
    }

    fn classified(x: f64, score: f64, probs: &[f64]) -> Detection {
        Detection::with_probs(BBox::new(x, 0.0, 10.0, 10.0), score, probs.to_vec())
    }

    #[test]
    fn lone_proposal_serves_every_tag() {
        let v = vocab(&["a", "b"]);
        let props = vec![classified(0.0, 0.9, &[0.6, 0.4])];
        let tags = vec![("a".to_string(), 0.9), ("b".to_string(), 0.8)];
        let hs = select_hashtags(&tags, &props, &v).unwrap();
        assert_eq!(hs.len(), 2);
        assert!(hs.iter().all(|h| h.proposal_index == 0));
        assert_eq!(hs[0].class_prob, 0.6);
        assert_eq!(hs[1].class_prob, 0.4);
    }

    #[test]
    fn argmax_picks_stronger_probability() {
        let v = vocab(&["health", "other"]);
        let props = vec![
            classified(0.0, 0.5, &[0.7, 0.3]),
            classified(20.0, 0.9, &[0.2, 0.8]),
        ];
        let tags = vec![("health".to_string(), 0.99)];
        let hs = select_hashtags(&tags, &props, &v).unwrap();
        assert_eq!(hs[0].proposal_index, 0);
        assert_eq!(hs[0].class_prob, 0.7);
    }

    #[test]
    fn selection_matches_exhaustive_argmax_table() {
        let v = vocab(&["t0", "t1", "t2"]);
        let props = vec![
            classified(0.0, 0.50, &[0.5, 0.2, 0.3]),
            classified(20.0, 0.90, &[0.5, 0.3, 0.2]),
            classified(40.0, 0.10, &[0.1, 0.3, 0.6]),
            classified(60.0, 0.95, &[0.2, 0.3, 0.5]),
        ];
        let tags: Vec<(String, f64)> = (0..3).map(|i| (format!("t{i}"), 0.9)).collect();
        let hs = select_hashtags(&tags, &props, &v).unwrap();
        // Brute-force expectations: t0 ties 0.5/0.5 -> higher score wins (p1);
        // t1 triple tie 0.3 -> scores 0.9 vs 0.1 vs 0.95 -> p3; t2 -> p2.
        assert_eq!(hs[0].proposal_index, 1);
        assert_eq!(hs[1].proposal_index, 3);
        assert_eq!(hs[2].proposal_index, 2);
        for h in &hs {
            let t = v.index_of(&h.tag).unwrap();
            for p in &props {
                assert!(h.class_prob >= p.class_probs.as_ref().unwrap()[t]);
            }
        }
    }

    #[test]
    fn missing_probs_are_rejected() {
        let v = vocab(&["a"]);
        let props = vec![Detection::new(BBox::new(0.0, 0.0, 5.0, 5.0), 0.4)];
        assert!(select_hashtags(&[("a".to_string(), 0.5)], &props, &v).is_err());
    }

    #[test]
    fn summary_degrades_gracefully_without_vocabulary_words() {
        let v = vocab(&["a", "b"]);
        let t = table(2, &[("known", &[1.0, 0.0])]);
        let model = TagPredictor::init(2, 3, 2, 1);
        let s = summarize("img9", &["zz", "yy"], &t, &model, &v, 3, &[]).unwrap();
        assert!(s.tags.is_empty());
        assert!(s.hashtags.is_empty());
        assert!(!s.warnings.is_empty());
        assert_eq!(s.image_id, "img9");
    }

    #[test]
    fn toy_summary_composes_the_pieces() {
        let v = vocab(&["sun", "sea"]);
        let t = table(2, &[("beach", &[1.0, 0.0]), ("waves", &[0.0, 1.0])]);
        // Identity-ish model: z = 4x - 1 per tag via W2 = 4 I on a relu
        // passthrough hidden layer.
        let model = TagPredictor {
            input_dim: 2,
            hidden: 2,
            output_dim: 2,
            w1: vec![1.0, 0.0, 0.0, 1.0],
            b1: vec![0.0, 0.0],
            w2: vec![4.0, 0.0, 0.0, 4.0],
            b2: vec![-1.0, -1.0],
        };
        let props = vec![
            classified(0.0, 0.9, &[0.8, 0.2]),
            classified(30.0, 0.8, &[0.1, 0.9]),
        ];
        let s = summarize("toy", &["beach", "waves"], &t, &model, &v, 2, &props).unwrap();
        // Feature = (0.5, 0.5); z = 4*0.5 - 1 = 1 for both tags; scores
        // sigmoid(1) with the tie broken by vocabulary order.
        assert_eq!(s.tags.len(), 2);
        assert_eq!(s.tags[0].0, "sun");
        assert!((s.tags[0].1 - sigmoid(1.0)).abs() < 1e-12);
        assert_eq!(s.hashtags.len(), 2);
        assert_eq!(s.hashtags[0].proposal_index, 0);
        assert_eq!(s.hashtags[1].proposal_index, 1);
        let again = summarize("toy", &["beach", "waves"], &t, &model, &v, 2, &props).unwrap();
        assert_eq!(s, again);
    }
}
