//! Timestamp assignment and train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, CorpusError, RawPaper};

/// The paper's timestamp: the most recent first-appearance year among its
/// method tags. Papers without tags carry no timestamp and are excluded
/// upstream.
pub fn assign_timestamp(paper: &RawPaper) -> Result<i32, CorpusError> {
    paper
        .tags
        .iter()
        .map(|t| t.first_year)
        .max()
        .ok_or(CorpusError::EmptyTags)
}

/// Partitions by paper year: sentences stamped `<= cutoff` train, the rest
/// test. Both halves keep the full tag index.
pub fn chronological_split(corpus: &Corpus, cutoff: i32) -> (Corpus, Corpus) {
    let (train, test) = corpus
        .sentences
        .iter()
        .cloned()
        .partition(|s| s.paper_year <= cutoff);
    (
        Corpus::new(train, corpus.tag_index.clone()),
        Corpus::new(test, corpus.tag_index.clone()),
    )
}

/// Seeded random split. The train side gets `round(ratio * n)` sentences;
/// selection is shuffled but each side preserves corpus order.
pub fn percentage_split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::InvalidRatio(ratio));
    }
    let n = corpus.len();
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_len = ((ratio * n as f64).round() as usize).min(n);
    let mut train_idx = indices[..train_len].to_vec();
    let mut test_idx = indices[train_len..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let take = |idx: &[usize]| {
        idx.iter()
            .map(|&i| corpus.sentences[i].clone())
            .collect::<Vec<_>>()
    };
    Ok((
        Corpus::new(take(&train_idx), corpus.tag_index.clone()),
        Corpus::new(take(&test_idx), corpus.tag_index.clone()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabeledSentence, MethodTag};
    use crate::labels::{Category, CoarseLabel};

    fn paper_with_years(years: &[i32]) -> RawPaper {
        RawPaper {
            paper_id: "p".into(),
            title: String::new(),
            sections: vec![],
            tags: years
                .iter()
                .map(|&y| MethodTag { surface: "x".into(), first_year: y })
                .collect(),
            category: Category::Gen,
        }
    }

    fn corpus_with_years(years: &[i32]) -> Corpus {
        let sentences = years
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                LabeledSentence::new(
                    vec![format!("tok{i}")],
                    vec![CoarseLabel::O],
                    Category::Gen,
                    y,
                    format!("p{i}"),
                    0,
                )
                .unwrap()
            })
            .collect();
        Corpus::new(sentences, Default::default())
    }

    #[test]
    fn timestamp_is_max_tag_year() {
        assert_eq!(assign_timestamp(&paper_with_years(&[2015, 2018])).unwrap(), 2018);
        assert_eq!(assign_timestamp(&paper_with_years(&[2010])).unwrap(), 2010);
        assert_eq!(assign_timestamp(&paper_with_years(&[2017, 2017, 2016])).unwrap(), 2017);
    }

    #[test]
    fn timestamp_requires_tags() {
        assert!(matches!(
            assign_timestamp(&paper_with_years(&[])),
            Err(CorpusError::EmptyTags)
        ));
    }

    #[test]
    fn chronological_split_is_a_partition() {
        let corpus = corpus_with_years(&[2016, 2017, 2018]);
        let (train, test) = chronological_split(&corpus, 2017);
        assert_eq!(train.sentences.iter().map(|s| s.paper_year).collect::<Vec<_>>(), vec![2016, 2017]);
        assert_eq!(test.sentences.iter().map(|s| s.paper_year).collect::<Vec<_>>(), vec![2018]);
        assert_eq!(train.len() + test.len(), corpus.len());
    }

    #[test]
    fn chronological_split_boundaries() {
        let corpus = corpus_with_years(&[2016, 2017]);
        let (train, test) = chronological_split(&corpus, 2010);
        assert!(train.is_empty());
        assert_eq!(test.len(), 2);
        let (train, test) = chronological_split(&corpus, 2020);
        assert_eq!(train.len(), 2);
        assert!(test.is_empty());
    }

    #[test]
    fn percentage_split_sizes_and_determinism() {
        let corpus = corpus_with_years(&(0..10).map(|i| 2000 + i).collect::<Vec<_>>());
        let (train, test) = percentage_split(&corpus, 0.9, 7).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);
        let (train2, test2) = percentage_split(&corpus, 0.9, 7).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }

    #[test]
    fn percentage_split_rounds_single_sentence_up() {
        let corpus = corpus_with_years(&[2001]);
        let (train, test) = percentage_split(&corpus, 0.9, 0).unwrap();
        assert_eq!(train.len(), 1);
        assert_eq!(test.len(), 0);
    }

    #[test]
    fn percentage_split_rejects_bad_ratio() {
        let corpus = corpus_with_years(&[2001]);
        assert!(percentage_split(&corpus, 0.0, 0).is_err());
        assert!(percentage_split(&corpus, 1.0, 0).is_err());
    }
}
