//! Token embedding lookup with a shared UNK row.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EncoderError;

pub const UNK_TOKEN: &str = "<unk>";

/// Vocabulary plus one embedding row per token.
///
/// The UNK row is always trainable; the rest of the matrix only when
/// `trainable` is set. Lookup is case-sensitive: method names distinguish
/// `BERT` from `bert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EmbeddingTableData", into = "EmbeddingTableData")]
pub struct EmbeddingTable {
    tokens: Vec<String>,
    vectors: Array2<f64>,
    unk: usize,
    trainable: bool,
    lookup: HashMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EmbeddingTableData {
    tokens: Vec<String>,
    vectors: Array2<f64>,
    unk: usize,
    trainable: bool,
}

impl From<EmbeddingTableData> for EmbeddingTable {
    fn from(d: EmbeddingTableData) -> Self {
        EmbeddingTable::from_rows(d.tokens, d.vectors, d.unk, d.trainable)
    }
}

impl From<EmbeddingTable> for EmbeddingTableData {
    fn from(t: EmbeddingTable) -> Self {
        EmbeddingTableData { tokens: t.tokens, vectors: t.vectors, unk: t.unk, trainable: t.trainable }
    }
}

impl EmbeddingTable {
    fn from_rows(tokens: Vec<String>, vectors: Array2<f64>, unk: usize, trainable: bool) -> Self {
        assert_eq!(tokens.len(), vectors.nrows());
        assert!(unk < tokens.len());
        let lookup = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        EmbeddingTable { tokens, vectors, unk, trainable, lookup }
    }

    /// A fresh table over `vocabulary` (UNK prepended), entries uniform in
    /// [-init, init] under the seed.
    pub fn random<I, S>(vocabulary: I, dim: usize, seed: u64, trainable: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens = vec![UNK_TOKEN.to_string()];
        tokens.extend(vocabulary.into_iter().map(Into::into).filter(|t| t != UNK_TOKEN));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-0.1, 0.1);
        let vectors = Array2::from_shape_fn((tokens.len(), dim), |_| dist.sample(&mut rng));
        Self::from_rows(tokens, vectors, 0, trainable)
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn unk_index(&self) -> usize {
        self.unk
    }

    pub fn is_trainable(&self) -> bool {
        self.trainable
    }

    pub fn set_trainable(&mut self, trainable: bool) {
        self.trainable = trainable;
    }

    pub fn index_of(&self, token: &str) -> usize {
        self.lookup.get(token).copied().unwrap_or(self.unk)
    }

    pub fn row(&self, index: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(index)
    }

    /// One embedding row per token; unknown tokens read the UNK row.
    pub fn embed(&self, tokens: &[String]) -> Array2<f64> {
        let mut out = Array2::zeros((tokens.len(), self.dim()));
        for (i, token) in tokens.iter().enumerate() {
            out.row_mut(i).assign(&self.vectors.row(self.index_of(token)));
        }
        out
    }

    /// Number of trainable parameters: the whole matrix, or just the UNK row.
    pub fn param_len(&self) -> usize {
        if self.trainable {
            self.vectors.len()
        } else {
            self.dim()
        }
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        if self.trainable {
            out.extend(self.vectors.iter());
        } else {
            out.extend(self.vectors.row(self.unk).iter());
        }
    }

    pub fn read_params(&mut self, src: &[f64]) {
        assert_eq!(src.len(), self.param_len());
        if self.trainable {
            for (v, s) in self.vectors.iter_mut().zip(src) {
                *v = *s;
            }
        } else {
            for (v, s) in self.vectors.row_mut(self.unk).iter_mut().zip(src) {
                *v = *s;
            }
        }
    }

    /// Scatters per-token input gradients back onto the trainable rows.
    pub fn accumulate_grads(&self, tokens: &[String], d_inputs: &Array2<f64>, out: &mut [f64]) {
        assert_eq!(out.len(), self.param_len());
        let dim = self.dim();
        for (i, token) in tokens.iter().enumerate() {
            let index = self.index_of(token);
            if self.trainable {
                for k in 0..dim {
                    out[index * dim + k] += d_inputs[[i, k]];
                }
            } else if index == self.unk {
                for k in 0..dim {
                    out[k] += d_inputs[[i, k]];
                }
            }
        }
    }
}

/// Loads the text vector format: a `<count> <dim>` header line, then one
/// `<token> v1 .. vd` row per line. Duplicate tokens are rejected. When the
/// file has no `<unk>` row, one is appended as the mean of all vectors.
pub fn load_vectors(path: &Path) -> Result<EmbeddingTable, EncoderError> {
    let file = File::open(path).map_err(EncoderError::Io)?;
    let path_str = path.display().to_string();
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| EncoderError::Parse {
        path: path_str.clone(),
        line: 1,
        message: "empty vector file".into(),
    })?;
    let header = header.map_err(EncoderError::Io)?;
    let mut parts = header.split_whitespace();
    let parse_header = |field: Option<&str>, what: &str| -> Result<usize, EncoderError> {
        field
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| EncoderError::Parse {
                path: path_str.clone(),
                line: 1,
                message: format!("header must be `<count> <dim>`, bad {what}"),
            })
    };
    let count = parse_header(parts.next(), "count")?;
    let dim = parse_header(parts.next(), "dim")?;

    let mut tokens: Vec<String> = Vec::with_capacity(count);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut seen = HashMap::new();
    for (lineno, line) in lines {
        let line = line.map_err(EncoderError::Io)?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .expect("non-empty line has a first field")
            .to_string();
        if seen.insert(token.clone(), lineno).is_some() {
            return Err(EncoderError::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("duplicate token `{token}`"),
            });
        }
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = values.map_err(|e| EncoderError::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("bad value: {e}"),
        })?;
        if values.len() != dim {
            return Err(EncoderError::Dimension {
                path: path_str.clone(),
                line: lineno,
                expected: dim,
                got: values.len(),
            });
        }
        tokens.push(token);
        rows.push(values);
    }
    if tokens.len() != count {
        return Err(EncoderError::Parse {
            path: path_str.clone(),
            line: 1,
            message: format!("header declares {count} rows, file has {}", tokens.len()),
        });
    }

    let unk = match tokens.iter().position(|t| t == UNK_TOKEN) {
        Some(i) => i,
        None => {
            let mut mean = vec![0.0; dim];
            for row in &rows {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            let n = rows.len().max(1) as f64;
            mean.iter_mut().for_each(|m| *m /= n);
            tokens.push(UNK_TOKEN.to_string());
            rows.push(mean);
            tokens.len() - 1
        }
    };

    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let vectors = Array2::from_shape_vec((tokens.len(), dim), flat).expect("row shapes checked");
    Ok(EmbeddingTable::from_rows(tokens, vectors, unk, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn known_token_reads_its_row_unknown_reads_unk() {
        let table = EmbeddingTable::random(vec!["alpha".to_string(), "beta".to_string()], 4, 1, false);
        let embedded = table.embed(&["alpha".into(), "nope".into()]);
        assert_eq!(embedded.row(0), table.row(table.index_of("alpha")));
        assert_eq!(embedded.row(1), table.row(table.unk_index()));
    }

    #[test]
    fn loads_well_formed_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 3\nalpha 1 2 3\nbeta 0.5 -1 0\n").unwrap();
        let table = load_vectors(&path).unwrap();
        assert_eq!(table.dim(), 3);
        // UNK appended as the mean row.
        assert_eq!(table.vocab_size(), 3);
        let unk = table.row(table.unk_index());
        assert_eq!(unk.to_vec(), vec![0.75, 0.5, 1.5]);
        assert_eq!(table.row(table.index_of("alpha")).to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn short_row_is_a_dimension_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "1 3\nalpha 1 2\n").unwrap();
        match load_vectors(&path).unwrap_err() {
            EncoderError::Dimension { line, expected, got, .. } => {
                assert_eq!((line, expected, got), (2, 3, 2));
            }
            other => panic!("expected dimension error, got {other}"),
        }
    }

    #[test]
    fn duplicate_token_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 2\nalpha 1 2\nalpha 3 4\n").unwrap();
        let err = load_vectors(&path).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn row_count_must_match_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "3 2\nalpha 1 2\n").unwrap();
        assert!(load_vectors(&path).is_err());
    }

    #[test]
    fn explicit_unk_row_is_used() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 2\n<unk> 9 9\nalpha 1 2\n").unwrap();
        let table = load_vectors(&path).unwrap();
        assert_eq!(table.vocab_size(), 2);
        assert_eq!(table.row(table.unk_index()).to_vec(), vec![9.0, 9.0]);
    }

    #[test]
    fn frozen_table_exposes_only_unk_params() {
        let table = EmbeddingTable::random(vec!["a".to_string()], 4, 1, false);
        assert_eq!(table.param_len(), 4);
        let mut trainable = table.clone();
        trainable.set_trainable(true);
        assert_eq!(trainable.param_len(), 8);
    }
}
