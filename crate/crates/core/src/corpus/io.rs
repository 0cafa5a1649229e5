//! File formats: JSON-lines paper input, the column dataset, and the tag
//! index sidecar.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{bio_valid, Corpus, CorpusError, LabeledSentence, RawPaper};
use crate::labels::{Category, CoarseLabel};

/// Outcome of reading a JSON-lines paper file: the good papers plus a note
/// for every line that was skipped.
#[derive(Debug, Default)]
pub struct JsonlReport {
    pub papers: Vec<RawPaper>,
    pub skipped: Vec<(usize, String)>,
}

/// Reads one `RawPaper` JSON object per line. Malformed or invariant-breaking
/// lines are skipped and reported, not fatal.
pub fn read_papers_jsonl(path: &Path) -> Result<JsonlReport, CorpusError> {
    let file = File::open(path)?;
    let mut report = JsonlReport::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawPaper>(&line) {
            Ok(paper) => match paper.validate() {
                Ok(()) => report.papers.push(paper),
                Err(e) => report.skipped.push((lineno + 1, e.to_string())),
            },
            Err(e) => report.skipped.push((lineno + 1, e.to_string())),
        }
    }
    Ok(report)
}

/// Writes the column dataset: one token per line with tab-separated columns
/// `token, label, category, paper_year, paper_id`, sentences separated by a
/// blank line.
pub fn write_dataset(path: &Path, sentences: &[LabeledSentence]) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (i, sentence) in sentences.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        for (token, label) in sentence.tokens.iter().zip(&sentence.labels) {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                token, label, sentence.category, sentence.paper_year, sentence.paper_id
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a column dataset back into a corpus (with an empty tag index; the
/// sidecar is loaded separately). Sentence indices are reassigned per paper
/// in file order.
pub fn read_dataset(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path)?;
    let path_str = path.display().to_string();
    let parse_err = |line: usize, message: String| CorpusError::Parse {
        path: path_str.clone(),
        line,
        message,
    };

    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut labels: Vec<CoarseLabel> = Vec::new();
    let mut meta: Option<(Category, i32, String)> = None;
    let mut first_line = 0usize;
    let mut per_paper: HashMap<String, usize> = HashMap::new();

    let mut flush = |tokens: &mut Vec<String>,
                     labels: &mut Vec<CoarseLabel>,
                     meta: &mut Option<(Category, i32, String)>,
                     first_line: usize,
                     per_paper: &mut HashMap<String, usize>,
                     sentences: &mut Vec<LabeledSentence>|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let (category, year, paper_id) = meta.take().expect("meta set with tokens");
        if !bio_valid(labels) {
            return Err(parse_err(first_line, "label sequence is not BIO-valid".into()));
        }
        let index = per_paper.entry(paper_id.clone()).or_insert(0);
        let sentence = LabeledSentence::new(
            std::mem::take(tokens),
            std::mem::take(labels),
            category,
            year,
            paper_id,
            *index,
        )
        .map_err(|e| parse_err(first_line, e.to_string()))?;
        *index += 1;
        sentences.push(sentence);
        Ok(())
    };

    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, &mut meta, first_line, &mut per_paper, &mut sentences)?;
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(parse_err(lineno, format!("expected 5 tab-separated columns, got {}", cols.len())));
        }
        if cols[0].is_empty() {
            return Err(parse_err(lineno, "empty token".into()));
        }
        let label: CoarseLabel = cols[1].parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
        let category: Category = cols[2].parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
        let year: i32 = cols[3]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid year `{}`", cols[3])))?;
        let paper_id = cols[4].to_string();

        match &meta {
            None => {
                meta = Some((category, year, paper_id));
                first_line = lineno;
            }
            Some((c, y, p)) => {
                if *c != category || *y != year || *p != paper_id {
                    return Err(parse_err(
                        lineno,
                        "category/year/paper_id change inside a sentence".into(),
                    ));
                }
            }
        }
        tokens.push(cols[0].to_string());
        labels.push(label);
    }
    flush(&mut tokens, &mut labels, &mut meta, first_line, &mut per_paper, &mut sentences)?;
    Ok(Corpus::new(sentences, BTreeMap::new()))
}

/// Writes the tag index sidecar: `normalized_surface<TAB>first_year`, sorted.
pub fn write_tag_index(path: &Path, index: &BTreeMap<String, i32>) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (surface, year) in index {
        writeln!(out, "{surface}\t{year}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_tag_index(path: &Path) -> Result<BTreeMap<String, i32>, CorpusError> {
    let file = File::open(path)?;
    let path_str = path.display().to_string();
    let mut index = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (surface, year) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
            path: path_str.clone(),
            line: lineno + 1,
            message: "expected `surface<TAB>year`".into(),
        })?;
        let year: i32 = year.parse().map_err(|_| CorpusError::Parse {
            path: path_str.clone(),
            line: lineno + 1,
            message: format!("invalid year `{year}`"),
        })?;
        index.insert(surface.to_string(), year);
    }
    Ok(index)
}
