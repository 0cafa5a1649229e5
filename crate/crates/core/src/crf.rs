//! Linear-chain CRF: log-partition, Viterbi decoding, NLL gradients via
//! forward-backward, structural transition masks, and the per-token softmax
//! fallback used by the no-CRF ablations.
//!
//! All computations run in log space. Masked transitions are hard (-inf)
//! during decoding but a large negative constant during partition and
//! gradient computation so that gradients stay finite.

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{CoarseLabel, Label, LabelScheme};

/// Default stand-in for -inf inside partition/gradient computations.
pub const DEFAULT_SOFT_FLOOR: f64 = -1e4;

#[derive(Debug, Error, PartialEq)]
pub enum CrfError {
    #[error("transition mask admits no label path")]
    NoValidPath,
    #[error("gold path uses a masked transition at position {position}")]
    InvalidGold { position: usize },
    #[error("emission matrix has {got} columns, scheme has {expected} labels")]
    DimensionMismatch { got: usize, expected: usize },
}

/// Label-to-label scores over the inventory plus virtual START/STOP states.
///
/// Row is the source, column the target. START never receives and STOP never
/// emits a transition; the mask encodes that along with any structural
/// constraints such as the BIO rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    scores: Array2<f64>,
    mask: Array2<bool>,
    num_labels: usize,
    soft_floor: f64,
}

impl TransitionMatrix {
    /// All label-to-label transitions allowed; scores zero.
    pub fn new(num_labels: usize) -> Self {
        let size = num_labels + 2;
        let mut mask = Array2::from_elem((size, size), false);
        for from in 0..num_labels {
            for to in 0..num_labels {
                mask[[from, to]] = true;
            }
            mask[[num_labels, from]] = true; // START -> label
            mask[[from, num_labels + 1]] = true; // label -> STOP
        }
        TransitionMatrix {
            scores: Array2::zeros((size, size)),
            mask,
            num_labels,
            soft_floor: DEFAULT_SOFT_FLOOR,
        }
    }

    /// Structurally impossible BIO transitions masked out for `scheme`.
    pub fn with_bio_mask(scheme: &LabelScheme) -> Self {
        let mut matrix = Self::new(scheme.len());
        matrix.mask = bio_mask(scheme);
        matrix
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn start(&self) -> usize {
        self.num_labels
    }

    pub fn stop(&self) -> usize {
        self.num_labels + 1
    }

    pub fn soft_floor(&self) -> f64 {
        self.soft_floor
    }

    pub fn set_soft_floor(&mut self, floor: f64) {
        self.soft_floor = floor;
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn is_allowed(&self, from: usize, to: usize) -> bool {
        self.mask[[from, to]]
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn scores_mut(&mut self) -> &mut Array2<f64> {
        &mut self.scores
    }

    /// Score used inside sums: masked entries read as the soft floor.
    pub fn sum_score(&self, from: usize, to: usize) -> f64 {
        if self.mask[[from, to]] {
            self.scores[[from, to]]
        } else {
            self.soft_floor
        }
    }

    /// Score used inside maxima: masked entries read as -inf.
    pub fn max_score(&self, from: usize, to: usize) -> f64 {
        if self.mask[[from, to]] {
            self.scores[[from, to]]
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn init_uniform<R: Rng>(&mut self, rng: &mut R, half_width: f64) {
        let dist = Uniform::new_inclusive(-half_width, half_width);
        for v in self.scores.iter_mut() {
            *v = dist.sample(rng);
        }
    }
}

/// Transition mask enforcing BIO structure for a scheme: nothing enters an
/// inside label except a begin or inside label of the same group, and START
/// never enters an inside label.
pub fn bio_mask(scheme: &LabelScheme) -> Array2<bool> {
    let n = scheme.len();
    let size = n + 2;
    let mut mask = Array2::from_elem((size, size), false);
    let allowed_into = |from: Label, to: Label| -> bool {
        if to.indicator() != CoarseLabel::I {
            return true;
        }
        match from.indicator() {
            CoarseLabel::O => false,
            CoarseLabel::B | CoarseLabel::I => from.group() == to.group(),
        }
    };
    for from in 0..n {
        for to in 0..n {
            mask[[from, to]] = allowed_into(scheme.label(from), scheme.label(to));
        }
        // label -> STOP always allowed; START -> label unless it is inside.
        mask[[from, size - 2]] = false;
        mask[[from, size - 1]] = true;
        mask[[size - 2, from]] = scheme.label(from).indicator() != CoarseLabel::I;
    }
    mask
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_dims(emissions: &Array2<f64>, transitions: &TransitionMatrix) {
    assert!(emissions.nrows() >= 1, "emission matrix must cover at least one token");
    assert_eq!(
        emissions.ncols(),
        transitions.num_labels(),
        "emission width must equal the label count"
    );
}

/// Forward-pass quantities shared by the partition and gradient paths.
struct Forward {
    alpha: Array2<f64>,
    log_z: f64,
}

fn forward(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> Forward {
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    let mut alpha = Array2::zeros((n, num_labels));
    for y in 0..num_labels {
        alpha[[0, y]] = transitions.sum_score(transitions.start(), y) + emissions[[0, y]];
    }
    let mut scratch = vec![0.0; num_labels];
    for t in 1..n {
        for y in 0..num_labels {
            for (p, slot) in scratch.iter_mut().enumerate() {
                *slot = alpha[[t - 1, p]] + transitions.sum_score(p, y);
            }
            alpha[[t, y]] = log_sum_exp(&scratch) + emissions[[t, y]];
        }
    }
    let final_scores: Vec<f64> = (0..num_labels)
        .map(|y| alpha[[n - 1, y]] + transitions.sum_score(y, transitions.stop()))
        .collect();
    Forward { alpha, log_z: log_sum_exp(&final_scores) }
}

/// log of the summed exponentiated path scores over all label sequences.
pub fn log_partition(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> f64 {
    check_dims(emissions, transitions);
    forward(emissions, transitions).log_z
}

fn backward(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> Array2<f64> {
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    let mut beta = Array2::zeros((n, num_labels));
    for y in 0..num_labels {
        beta[[n - 1, y]] = transitions.sum_score(y, transitions.stop());
    }
    let mut scratch = vec![0.0; num_labels];
    for t in (0..n - 1).rev() {
        for p in 0..num_labels {
            for (y, slot) in scratch.iter_mut().enumerate() {
                *slot = transitions.sum_score(p, y) + emissions[[t + 1, y]] + beta[[t + 1, y]];
            }
            beta[[t, p]] = log_sum_exp(&scratch);
        }
    }
    beta
}

/// Per-position label marginals and the log-partition.
pub fn marginals(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> (Array2<f64>, f64) {
    check_dims(emissions, transitions);
    let fwd = forward(emissions, transitions);
    let beta = backward(emissions, transitions);
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    let mut probs = Array2::zeros((n, num_labels));
    for t in 0..n {
        for y in 0..num_labels {
            probs[[t, y]] = (fwd.alpha[[t, y]] + beta[[t, y]] - fwd.log_z).exp();
        }
    }
    (probs, fwd.log_z)
}

/// Highest-scoring label path and its score. Ties resolve toward the lowest
/// label index at every backtracking step.
pub fn viterbi(
    emissions: &Array2<f64>,
    transitions: &TransitionMatrix,
) -> Result<(Vec<usize>, f64), CrfError> {
    check_dims(emissions, transitions);
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    let mut delta = Array2::from_elem((n, num_labels), f64::NEG_INFINITY);
    let mut back = Array2::zeros((n, num_labels));
    for y in 0..num_labels {
        delta[[0, y]] = transitions.max_score(transitions.start(), y) + emissions[[0, y]];
    }
    for t in 1..n {
        for y in 0..num_labels {
            let mut best = f64::NEG_INFINITY;
            let mut best_prev = 0;
            for p in 0..num_labels {
                let score = delta[[t - 1, p]] + transitions.max_score(p, y);
                if score > best {
                    best = score;
                    best_prev = p;
                }
            }
            delta[[t, y]] = best + emissions[[t, y]];
            back[[t, y]] = best_prev;
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for y in 0..num_labels {
        let score = delta[[n - 1, y]] + transitions.max_score(y, transitions.stop());
        if score > best {
            best = score;
            last = y;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(CrfError::NoValidPath);
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[[t, path[t]]];
    }
    Ok((path, best))
}

/// Explicit score of one label path under the sum-mode transition view.
pub fn path_score(emissions: &Array2<f64>, transitions: &TransitionMatrix, path: &[usize]) -> f64 {
    let n = emissions.nrows();
    assert_eq!(path.len(), n);
    let mut score = transitions.sum_score(transitions.start(), path[0]);
    for (t, &y) in path.iter().enumerate() {
        score += emissions[[t, y]];
        if t + 1 < n {
            score += transitions.sum_score(y, path[t + 1]);
        }
    }
    score + transitions.sum_score(path[n - 1], transitions.stop())
}

/// Negative log-likelihood of the gold path plus gradients with respect to
/// the emissions and the transition scores.
///
/// Emission gradients are `marginal - gold indicator`; transition gradients
/// are expected minus observed transition counts, zero on masked entries.
pub fn nll_and_gradients(
    emissions: &Array2<f64>,
    transitions: &TransitionMatrix,
    gold: &[usize],
) -> Result<NllResult, CrfError> {
    check_dims(emissions, transitions);
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    assert_eq!(gold.len(), n, "gold path length must match the sentence");

    if !transitions.is_allowed(transitions.start(), gold[0]) {
        return Err(CrfError::InvalidGold { position: 0 });
    }
    for t in 1..n {
        if !transitions.is_allowed(gold[t - 1], gold[t]) {
            return Err(CrfError::InvalidGold { position: t });
        }
    }
    if !transitions.is_allowed(gold[n - 1], transitions.stop()) {
        return Err(CrfError::InvalidGold { position: n - 1 });
    }

    let fwd = forward(emissions, transitions);
    let beta = backward(emissions, transitions);
    let size = num_labels + 2;
    let mut d_emissions = Array2::zeros((n, num_labels));
    let mut d_transitions = Array2::zeros((size, size));

    for t in 0..n {
        for y in 0..num_labels {
            let marginal = (fwd.alpha[[t, y]] + beta[[t, y]] - fwd.log_z).exp();
            d_emissions[[t, y]] = marginal - f64::from(gold[t] == y);
        }
    }

    // Expected transition counts, computed only on unmasked entries (masked
    // entries read a constant, so their gradient is exactly zero).
    let start = transitions.start();
    let stop = transitions.stop();
    for y in 0..num_labels {
        if transitions.is_allowed(start, y) {
            let expected =
                (transitions.sum_score(start, y) + emissions[[0, y]] + beta[[0, y]] - fwd.log_z).exp();
            d_transitions[[start, y]] = expected - f64::from(gold[0] == y);
        }
        if transitions.is_allowed(y, stop) {
            let expected =
                (fwd.alpha[[n - 1, y]] + transitions.sum_score(y, stop) - fwd.log_z).exp();
            d_transitions[[y, stop]] = expected - f64::from(gold[n - 1] == y);
        }
    }
    for t in 0..n - 1 {
        for p in 0..num_labels {
            for y in 0..num_labels {
                if !transitions.is_allowed(p, y) {
                    continue;
                }
                let expected = (fwd.alpha[[t, p]]
                    + transitions.sum_score(p, y)
                    + emissions[[t + 1, y]]
                    + beta[[t + 1, y]]
                    - fwd.log_z)
                    .exp();
                d_transitions[[p, y]] +=
                    expected - f64::from(gold[t] == p && gold[t + 1] == y);
            }
        }
    }

    let loss = fwd.log_z - path_score(emissions, transitions, gold);
    Ok(NllResult { loss, d_emissions, d_transitions })
}

#[derive(Debug)]
pub struct NllResult {
    pub loss: f64,
    pub d_emissions: Array2<f64>,
    pub d_transitions: Array2<f64>,
}

/// Per-token argmax over the emission rows (ties toward the lowest index),
/// followed by the documented repair: an inside label at the sentence start
/// or after an outside label is promoted to the matching begin label.
pub fn softmax_decode(emissions: &Array2<f64>, scheme: &LabelScheme) -> Vec<usize> {
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    assert_eq!(num_labels, scheme.len());
    let mut decoded = Vec::with_capacity(n);
    for t in 0..n {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for y in 0..num_labels {
            if emissions[[t, y]] > best {
                best = emissions[[t, y]];
                arg = y;
            }
        }
        decoded.push(arg);
    }
    repair_leading_inside(&mut decoded, scheme);
    decoded
}

fn repair_leading_inside(decoded: &mut [usize], scheme: &LabelScheme) {
    let mut prev_outside = true;
    for index in decoded.iter_mut() {
        let label = scheme.label(*index);
        if label.indicator() == CoarseLabel::I && prev_outside {
            let begin = match label.group() {
                None => Label::Plain(CoarseLabel::B),
                Some(group) => Label::Tagged { indicator: CoarseLabel::B, group },
            };
            *index = scheme.index_of(&begin).expect("every inside label has a begin twin");
        }
        prev_outside = scheme.label(*index).indicator() == CoarseLabel::O;
    }
}

/// Token-level cross-entropy and its emission gradient (softmax - one-hot);
/// the training loss for the no-CRF ablations.
pub fn token_cross_entropy(emissions: &Array2<f64>, gold: &[usize]) -> (f64, Array2<f64>) {
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    assert_eq!(gold.len(), n);
    let mut loss = 0.0;
    let mut grad = Array2::zeros((n, num_labels));
    for t in 0..n {
        let row: Vec<f64> = (0..num_labels).map(|y| emissions[[t, y]]).collect();
        let lse = log_sum_exp(&row);
        loss += lse - emissions[[t, gold[t]]];
        for y in 0..num_labels {
            grad[[t, y]] = (emissions[[t, y]] - lse).exp() - f64::from(gold[t] == y);
        }
    }
    (loss, grad)
}

/// Gold-path score helper exposed for confidence filtering: the Viterbi path
/// probability is `exp(path_score - log_partition)`.
pub fn path_log_probability(
    emissions: &Array2<f64>,
    transitions: &TransitionMatrix,
    path: &[usize],
) -> f64 {
    path_score(emissions, transitions, path) - log_partition(emissions, transitions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "crf")]
    Crf,
    #[serde(rename = "softmax")]
    Softmax,
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecoderKind::Crf => f.write_str("crf"),
            DecoderKind::Softmax => f.write_str("softmax"),
        }
    }
}
