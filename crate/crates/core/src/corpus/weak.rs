//! Distant supervision: project knowledge-base tag surfaces onto token
//! streams as BIO labels.

use std::collections::HashMap;

use super::text::{normalize_token, tokenize};
use super::MethodTag;
use crate::labels::CoarseLabel;

/// A tag list compiled for matching: each surface tokenized and normalized,
/// grouped by first token, longest surface first.
#[derive(Debug, Clone, Default)]
pub struct TagMatcher {
    by_first: HashMap<String, Vec<Vec<String>>>,
}

impl TagMatcher {
    pub fn compile(tags: &[MethodTag]) -> Self {
        let mut sequences: Vec<Vec<String>> = tags
            .iter()
            .map(|tag| {
                tokenize(&tag.surface)
                    .iter()
                    .map(|t| normalize_token(t))
                    .filter(|t| !t.is_empty())
                    .collect::<Vec<_>>()
            })
            .filter(|seq| !seq.is_empty())
            .collect();
        // Longest first so the greedy scan prefers the widest span; ties
        // ordered lexicographically for determinism.
        sequences.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        sequences.dedup();

        let mut by_first: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        for seq in sequences {
            by_first.entry(seq[0].clone()).or_default().push(seq);
        }
        TagMatcher { by_first }
    }

    /// Length of the longest tag surface matching at `pos`, if any.
    fn match_len(&self, normalized: &[String], pos: usize) -> Option<usize> {
        let candidates = self.by_first.get(&normalized[pos])?;
        candidates
            .iter()
            .find(|seq| {
                pos + seq.len() <= normalized.len()
                    && seq.iter().zip(&normalized[pos..]).all(|(a, b)| a == b)
            })
            .map(|seq| seq.len())
    }

    /// Greedy longest-match labeling, left to right, without overlaps.
    pub fn label(&self, tokens: &[String]) -> Vec<CoarseLabel> {
        let normalized: Vec<String> = tokens.iter().map(|t| normalize_token(t)).collect();
        let mut labels = vec![CoarseLabel::O; tokens.len()];
        let mut i = 0;
        while i < tokens.len() {
            match self.match_len(&normalized, i) {
                Some(len) => {
                    labels[i] = CoarseLabel::B;
                    for label in labels.iter_mut().take(i + len).skip(i + 1) {
                        *label = CoarseLabel::I;
                    }
                    i += len;
                }
                None => i += 1,
            }
        }
        labels
    }
}

/// Labels `tokens` against `tags` by greedy longest match under the shared
/// normalization. Tokens outside every match come out as `O`.
pub fn weak_label(tokens: &[String], tags: &[MethodTag]) -> Vec<CoarseLabel> {
    TagMatcher::compile(tags).label(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bio_valid;
    use CoarseLabel::{B, I, O};

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn tags(surfaces: &[&str]) -> Vec<MethodTag> {
        surfaces
            .iter()
            .map(|s| MethodTag { surface: s.to_string(), first_year: 2015 })
            .collect()
    }

    #[test]
    fn single_exact_match() {
        let labels = weak_label(&toks(&["We", "use", "BERT", "embeddings"]), &tags(&["BERT"]));
        assert_eq!(labels, vec![O, O, B, O]);
    }

    #[test]
    fn longest_match_wins() {
        let labels = weak_label(
            &toks(&["a", "Graph", "Attention", "Network", "model"]),
            &tags(&["Graph Attention Network", "Graph"]),
        );
        assert_eq!(labels, vec![O, B, I, I, O]);
    }

    #[test]
    fn no_match_is_all_outside() {
        let labels = weak_label(&toks(&["no", "mentions", "here"]), &tags(&["BERT"]));
        assert_eq!(labels, vec![O, O, O]);
    }

    #[test]
    fn matching_is_case_and_punctuation_insensitive() {
        let labels = weak_label(&toks(&["using", "bert", ",", "too"]), &tags(&["BERT"]));
        assert_eq!(labels, vec![O, B, O, O]);
    }

    #[test]
    fn matches_do_not_overlap() {
        // After consuming "Graph Attention", the scan resumes at "Network".
        let labels = weak_label(
            &toks(&["Graph", "Attention", "Network"]),
            &tags(&["Graph Attention", "Attention Network"]),
        );
        assert_eq!(labels, vec![B, I, B]);
    }

    #[test]
    fn adjacent_matches_start_fresh_spans() {
        let labels = weak_label(&toks(&["BERT", "GPT-2"]), &tags(&["BERT", "GPT-2"]));
        assert_eq!(labels, vec![B, B]);
        assert!(bio_valid(&labels));
    }

    #[test]
    fn empty_tag_surfaces_are_ignored() {
        let labels = weak_label(&toks(&["a", "b"]), &tags(&["...", ""]));
        assert_eq!(labels, vec![O, O]);
    }

    #[test]
    fn multi_token_tag_via_tokenizer() {
        // The tag surface runs through the same tokenizer as the sentence.
        let labels = weak_label(
            &toks(&["the", "Mask", "R-CNN", "detector"]),
            &tags(&["Mask R-CNN"]),
        );
        assert_eq!(labels, vec![O, B, I, O]);
    }
}
