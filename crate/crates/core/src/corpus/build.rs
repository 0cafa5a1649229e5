//! The end-to-end corpus build: papers to labeled sentences.

use std::collections::BTreeMap;
use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sections::{select_sections, SectionFilter};
use super::split::assign_timestamp;
use super::text::{normalize_phrase, segment_sentences, tokenize};
use super::weak::TagMatcher;
use super::{Corpus, CorpusError, LabeledSentence, RawPaper};
use crate::labels::CoarseLabel;

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub section_filter: SectionFilter,
    /// Probability of keeping a sentence with no matched tag; 1.0 keeps all.
    pub negative_keep_rate: f64,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { section_filter: SectionFilter::default(), negative_keep_rate: 1.0, seed: 0 }
    }
}

/// Counters reported after a build.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct BuildStats {
    pub papers_total: usize,
    pub papers_kept: usize,
    pub papers_dropped_no_tags: usize,
    pub papers_dropped_duplicate_id: usize,
    pub papers_without_matching_sections: usize,
    pub sentences: usize,
    pub negative_sentences_dropped: usize,
    pub spans: usize,
}

/// Runs section selection, segmentation, tokenization, weak labeling, and
/// timestamp assignment over every paper.
///
/// Papers without tags are dropped (they carry no timestamp); duplicate
/// paper ids after the first are dropped. The tag index maps each normalized
/// tag surface to its earliest first-appearance year across the input.
pub fn build_corpus(papers: &[RawPaper], config: &BuildConfig) -> (Corpus, BuildStats) {
    let mut stats = BuildStats { papers_total: papers.len(), ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen_ids: HashSet<&str> = HashSet::new();
    let mut sentences = Vec::new();
    let mut tag_index: BTreeMap<String, i32> = BTreeMap::new();

    for paper in papers {
        if !seen_ids.insert(&paper.paper_id) {
            stats.papers_dropped_duplicate_id += 1;
            continue;
        }
        let year = match assign_timestamp(paper) {
            Ok(year) => year,
            Err(_) => {
                stats.papers_dropped_no_tags += 1;
                continue;
            }
        };
        stats.papers_kept += 1;
        for tag in &paper.tags {
            let key = normalize_phrase(&tokenize(&tag.surface));
            if key.is_empty() {
                continue;
            }
            tag_index
                .entry(key)
                .and_modify(|y| *y = (*y).min(tag.first_year))
                .or_insert(tag.first_year);
        }

        let matcher = TagMatcher::compile(&paper.tags);
        let blocks = select_sections(paper, &config.section_filter);
        if blocks.is_empty() {
            stats.papers_without_matching_sections += 1;
            continue;
        }
        let mut sentence_index = 0;
        for block in blocks {
            for raw_sentence in segment_sentences(block) {
                let tokens = tokenize(&raw_sentence);
                if tokens.is_empty() {
                    continue;
                }
                let labels = matcher.label(&tokens);
                let has_span = labels.contains(&CoarseLabel::B);
                if !has_span
                    && config.negative_keep_rate < 1.0
                    && rng.gen::<f64>() >= config.negative_keep_rate
                {
                    stats.negative_sentences_dropped += 1;
                    continue;
                }
                stats.spans += labels.iter().filter(|&&l| l == CoarseLabel::B).count();
                let sentence = LabeledSentence::new(
                    tokens,
                    labels,
                    paper.category,
                    year,
                    paper.paper_id.clone(),
                    sentence_index,
                )
                .expect("pipeline emits structurally valid sentences");
                sentence_index += 1;
                sentences.push(sentence);
            }
        }
        stats.sentences = sentences.len();
    }
    stats.sentences = sentences.len();
    (Corpus::new(sentences, tag_index), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MethodTag, Section};
    use crate::labels::Category;

    fn paper(id: &str, body: &str, tags: &[(&str, i32)]) -> RawPaper {
        RawPaper {
            paper_id: id.to_string(),
            title: "t".into(),
            sections: vec![Section { heading: "Abstract".into(), body: body.to_string() }],
            tags: tags
                .iter()
                .map(|(s, y)| MethodTag { surface: s.to_string(), first_year: *y })
                .collect(),
            category: Category::Nlp,
        }
    }

    #[test]
    fn builds_labeled_sentences_with_timestamps() {
        let papers = vec![paper("p1", "We use BERT. It works.", &[("BERT", 2018)])];
        let (corpus, stats) = build_corpus(&papers, &BuildConfig::default());
        assert_eq!(corpus.len(), 2);
        assert_eq!(stats.spans, 1);
        assert_eq!(corpus.sentences[0].paper_year, 2018);
        assert_eq!(corpus.sentences[0].sentence_index, 0);
        assert_eq!(corpus.sentences[1].sentence_index, 1);
        assert_eq!(corpus.tag_index.get("bert"), Some(&2018));
    }

    #[test]
    fn papers_without_tags_are_dropped() {
        let papers = vec![paper("p1", "Some text.", &[])];
        let (corpus, stats) = build_corpus(&papers, &BuildConfig::default());
        assert!(corpus.is_empty());
        assert_eq!(stats.papers_dropped_no_tags, 1);
        assert_eq!(stats.papers_kept, 0);
    }

    #[test]
    fn duplicate_ids_are_dropped() {
        let papers = vec![
            paper("p1", "We use BERT.", &[("BERT", 2018)]),
            paper("p1", "We use BERT.", &[("BERT", 2018)]),
        ];
        let (corpus, stats) = build_corpus(&papers, &BuildConfig::default());
        assert_eq!(corpus.len(), 1);
        assert_eq!(stats.papers_dropped_duplicate_id, 1);
    }

    #[test]
    fn tag_index_keeps_earliest_year() {
        let papers = vec![
            paper("p1", "We use BERT.", &[("BERT", 2019)]),
            paper("p2", "We use BERT.", &[("bert", 2018)]),
        ];
        let (corpus, _) = build_corpus(&papers, &BuildConfig::default());
        assert_eq!(corpus.tag_index.get("bert"), Some(&2018));
    }

    #[test]
    fn negative_sampling_drops_all_o_sentences_only() {
        let papers = vec![paper(
            "p1",
            "We use BERT. Nothing here at all. Nothing here either.",
            &[("BERT", 2018)],
        )];
        let config = BuildConfig { negative_keep_rate: 0.0, ..Default::default() };
        let (corpus, stats) = build_corpus(&papers, &config);
        assert_eq!(corpus.len(), 1);
        assert_eq!(stats.negative_sentences_dropped, 2);
        assert!(corpus.sentences[0].labels.contains(&CoarseLabel::B));
    }

    #[test]
    fn paper_without_matching_sections_contributes_tags_only() {
        let mut p = paper("p1", "ignored", &[("BERT", 2018)]);
        p.sections[0].heading = "Related Work".into();
        let (corpus, stats) = build_corpus(&[p], &BuildConfig::default());
        assert!(corpus.is_empty());
        assert_eq!(stats.papers_without_matching_sections, 1);
        assert_eq!(corpus.tag_index.get("bert"), Some(&2018));
    }
}
