//! Rule-based selection of the report-style sections of a paper.

use super::text::normalize_heading;
use super::RawPaper;

/// Heading patterns deciding which section bodies enter the corpus.
///
/// A normalized heading matches a pattern when it equals the pattern or
/// starts with it at a word boundary, so `appendix` catches `Appendix A` and
/// `results` catches `Results and Discussion`. A section is kept when its
/// heading matches the keep list and none of the exclude list.
#[derive(Debug, Clone)]
pub struct SectionFilter {
    keep: Vec<String>,
    exclude: Vec<String>,
}

impl Default for SectionFilter {
    fn default() -> Self {
        SectionFilter {
            keep: [
                "abstract",
                "introduction",
                "methodology",
                "method",
                "methods",
                "approach",
                "experiments",
                "experimental setup",
                "results",
            ]
            .map(String::from)
            .to_vec(),
            exclude: [
                "background",
                "related work",
                "conclusions",
                "conclusions and future work",
                "acknowledgements",
                "references",
                "appendix",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

impl SectionFilter {
    pub fn new(keep: Vec<String>, exclude: Vec<String>) -> Self {
        SectionFilter {
            keep: keep.iter().map(|p| normalize_heading(p)).collect(),
            exclude: exclude.iter().map(|p| normalize_heading(p)).collect(),
        }
    }

    pub fn keeps(&self, heading: &str) -> bool {
        let normalized = normalize_heading(heading);
        self.keep.iter().any(|p| matches_pattern(&normalized, p))
            && !self.exclude.iter().any(|p| matches_pattern(&normalized, p))
    }
}

fn matches_pattern(heading: &str, pattern: &str) -> bool {
    heading == pattern
        || (heading.len() > pattern.len()
            && heading.starts_with(pattern)
            && heading.as_bytes()[pattern.len()] == b' ')
}

/// Returns the bodies of the sections the filter keeps, in document order.
/// Papers without any matching section yield an empty list.
pub fn select_sections<'a>(paper: &'a RawPaper, filter: &SectionFilter) -> Vec<&'a str> {
    paper
        .sections
        .iter()
        .filter(|s| filter.keeps(&s.heading))
        .map(|s| s.body.as_str())
        .collect()
}
