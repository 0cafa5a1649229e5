//! Corpus construction: parsed papers in, labeled sentence datasets out.
//!
//! A [`RawPaper`] arrives as structured JSON (sections plus method tags with
//! first-appearance years). The build pipeline selects the report-style
//! sections, segments and tokenizes them, projects the paper's tag list onto
//! the token stream as BIO labels, stamps every sentence with the paper's
//! timestamp (the most recent first-appearance year among its tags), and
//! assembles the result into a [`Corpus`] that can be split chronologically
//! or at random.

mod build;
mod io;
mod sections;
mod split;
mod text;
mod weak;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{Category, CoarseLabel};

pub use build::{build_corpus, BuildConfig, BuildStats};
pub use io::{
    read_dataset, read_papers_jsonl, read_tag_index, write_dataset, write_tag_index, JsonlReport,
};
pub use sections::{select_sections, SectionFilter};
pub use split::{assign_timestamp, chronological_split, percentage_split};
pub use text::{normalize_heading, normalize_phrase, normalize_token, segment_sentences, tokenize};
pub use weak::{weak_label, TagMatcher};

/// A methodology name from the knowledge base with the year it first appeared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTag {
    pub surface: String,
    pub first_year: i32,
}

/// One section of a parsed paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
}

/// A parsed article as it arrives on the JSON-lines input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPaper {
    pub paper_id: String,
    pub title: String,
    pub sections: Vec<Section>,
    pub tags: Vec<MethodTag>,
    pub category: Category,
}

impl RawPaper {
    /// Checks the structural invariants the pipeline relies on.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.paper_id.trim().is_empty() {
            return Err(CorpusError::EmptyPaperId);
        }
        for tag in &self.tags {
            if tag.surface.trim().is_empty() {
                return Err(CorpusError::EmptyTagSurface { paper_id: self.paper_id.clone() });
            }
            if !(1950..=2100).contains(&tag.first_year) {
                return Err(CorpusError::TagYearOutOfRange {
                    paper_id: self.paper_id.clone(),
                    year: tag.first_year,
                });
            }
        }
        Ok(())
    }
}

/// A tokenized sentence with gold BIO labels; the unit of training and
/// evaluation.
///
/// `sentence_index` is the sentence's 0-based position among the emitted
/// sentences of its paper; together with `paper_id` it keys externally
/// computed per-token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    pub labels: Vec<CoarseLabel>,
    pub category: Category,
    pub paper_year: i32,
    pub paper_id: String,
    pub sentence_index: usize,
}

impl LabeledSentence {
    pub fn new(
        tokens: Vec<String>,
        labels: Vec<CoarseLabel>,
        category: Category,
        paper_year: i32,
        paper_id: String,
        sentence_index: usize,
    ) -> Result<Self, CorpusError> {
        if tokens.len() != labels.len() {
            return Err(CorpusError::LengthMismatch { tokens: tokens.len(), labels: labels.len() });
        }
        if tokens.iter().any(|t| t.is_empty()) {
            return Err(CorpusError::EmptyToken);
        }
        if !bio_valid(&labels) {
            return Err(CorpusError::InvalidBio);
        }
        Ok(LabeledSentence { tokens, labels, category, paper_year, paper_id, sentence_index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Splits sentences longer than `max_len` into valid-BIO chunks.
    ///
    /// The cut goes after the last outside-labeled token that fits; if a
    /// window contains none, the cut is hard and a leading inside label on
    /// the next chunk is promoted to a begin label.
    pub fn split_to_max_len(&self, max_len: usize) -> Vec<LabeledSentence> {
        assert!(max_len > 0, "max_len must be positive");
        if self.len() <= max_len {
            return vec![self.clone()];
        }
        let mut chunks = Vec::new();
        let mut start = 0;
        while start < self.len() {
            let window_end = (start + max_len).min(self.len());
            let mut cut = window_end;
            if window_end < self.len() {
                if let Some(o_pos) = (start..window_end)
                    .rev()
                    .find(|&i| self.labels[i] == CoarseLabel::O)
                {
                    cut = o_pos + 1;
                }
            }
            let mut labels = self.labels[start..cut].to_vec();
            if labels.first() == Some(&CoarseLabel::I) {
                labels[0] = CoarseLabel::B;
            }
            chunks.push(LabeledSentence {
                tokens: self.tokens[start..cut].to_vec(),
                labels,
                category: self.category,
                paper_year: self.paper_year,
                paper_id: self.paper_id.clone(),
                sentence_index: self.sentence_index,
            });
            start = cut;
        }
        chunks
    }
}

/// Returns true when the label sequence is BIO-valid: no inside label at the
/// start and none directly after an outside label.
pub fn bio_valid(labels: &[CoarseLabel]) -> bool {
    let mut prev = CoarseLabel::O;
    for (i, &label) in labels.iter().enumerate() {
        if label == CoarseLabel::I && (i == 0 || prev == CoarseLabel::O) {
            return false;
        }
        prev = label;
    }
    true
}

/// A labeled sentence collection plus the tag knowledge base it was built
/// from (normalized surface form mapped to first-appearance year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<LabeledSentence>,
    pub tag_index: BTreeMap<String, i32>,
}

impl Corpus {
    pub fn new(sentences: Vec<LabeledSentence>, tag_index: BTreeMap<String, i32>) -> Self {
        Corpus { sentences, tag_index }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Applies [`LabeledSentence::split_to_max_len`] to every sentence.
    pub fn split_to_max_len(&self, max_len: usize) -> Corpus {
        let sentences = self
            .sentences
            .iter()
            .flat_map(|s| s.split_to_max_len(max_len))
            .collect();
        Corpus { sentences, tag_index: self.tag_index.clone() }
    }

    /// All distinct tokens, sorted; the deterministic vocabulary source.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut tokens: Vec<String> = self
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().cloned())
            .collect();
        tokens.sort();
        tokens.dedup();
        tokens
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("paper has an empty paper_id")]
    EmptyPaperId,
    #[error("paper `{paper_id}` has a tag with an empty surface")]
    EmptyTagSurface { paper_id: String },
    #[error("paper `{paper_id}` has a tag year {year} outside [1950, 2100]")]
    TagYearOutOfRange { paper_id: String, year: i32 },
    #[error("paper has no method tags")]
    EmptyTags,
    #[error("token/label length mismatch: {tokens} tokens vs {labels} labels")]
    LengthMismatch { tokens: usize, labels: usize },
    #[error("sentence contains an empty token")]
    EmptyToken,
    #[error("label sequence is not BIO-valid")]
    InvalidBio,
    #[error("split ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
