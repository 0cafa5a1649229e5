//! Reference implementations used by the test suites.
//!
//! Everything here recomputes results by explicit enumeration or numeric
//! differentiation, deliberately sharing no code with the dynamic-programming
//! and analytic paths it is used to check.

use ndarray::Array2;

use crate::crf::TransitionMatrix;

fn all_paths(n: usize, num_labels: usize) -> Vec<Vec<usize>> {
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(paths.len() * num_labels);
        for path in &paths {
            for y in 0..num_labels {
                let mut p = path.clone();
                p.push(y);
                next.push(p);
            }
        }
        paths = next;
    }
    paths
}

fn explicit_sum_score(emissions: &Array2<f64>, transitions: &TransitionMatrix, path: &[usize]) -> f64 {
    let mut score = transitions.sum_score(transitions.start(), path[0]);
    for (t, &y) in path.iter().enumerate() {
        score += emissions[[t, y]];
        if t + 1 < path.len() {
            score += transitions.sum_score(y, path[t + 1]);
        }
    }
    score + transitions.sum_score(path[path.len() - 1], transitions.stop())
}

fn explicit_max_score(
    emissions: &Array2<f64>,
    transitions: &TransitionMatrix,
    path: &[usize],
) -> f64 {
    let mut score = transitions.max_score(transitions.start(), path[0]);
    for (t, &y) in path.iter().enumerate() {
        score += emissions[[t, y]];
        if t + 1 < path.len() {
            score += transitions.max_score(y, path[t + 1]);
        }
    }
    score + transitions.max_score(path[path.len() - 1], transitions.stop())
}

/// Log-partition by summing over every label path explicitly.
pub fn brute_force_log_partition(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> f64 {
    let scores: Vec<f64> = all_paths(emissions.nrows(), emissions.ncols())
        .iter()
        .map(|p| explicit_sum_score(emissions, transitions, p))
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Best path by exhaustive search; `None` when the mask kills every path.
pub fn brute_force_viterbi(
    emissions: &Array2<f64>,
    transitions: &TransitionMatrix,
) -> Option<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for path in all_paths(emissions.nrows(), emissions.ncols()) {
        let score = explicit_max_score(emissions, transitions, &path);
        if score == f64::NEG_INFINITY {
            continue;
        }
        match &best {
            Some((_, s)) if *s >= score => {}
            _ => best = Some((path, score)),
        }
    }
    best
}

/// Per-position marginals by explicit enumeration.
pub fn brute_force_marginals(emissions: &Array2<f64>, transitions: &TransitionMatrix) -> Array2<f64> {
    let (n, num_labels) = (emissions.nrows(), emissions.ncols());
    let log_z = brute_force_log_partition(emissions, transitions);
    let mut probs = Array2::zeros((n, num_labels));
    for path in all_paths(n, num_labels) {
        let weight = (explicit_sum_score(emissions, transitions, &path) - log_z).exp();
        for (t, &y) in path.iter().enumerate() {
            probs[[t, y]] += weight;
        }
    }
    probs
}

/// Central finite difference of `loss` along coordinate `index` of `params`.
pub fn central_difference<F>(params: &[f64], index: usize, step: f64, mut loss: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut plus = params.to_vec();
    plus[index] += step;
    let mut minus = params.to_vec();
    minus[index] -= step;
    (loss(&plus) - loss(&minus)) / (2.0 * step)
}

/// Checks `analytic` against a central difference for every coordinate.
///
/// A coordinate passes when the difference is within `rel_tol` relatively or
/// below a small absolute floor (finite differences bottom out near 1e-9 for
/// well-scaled losses). Returns the first failing coordinate.
pub fn check_gradient<F>(
    params: &[f64],
    analytic: &[f64],
    step: f64,
    rel_tol: f64,
    mut loss: F,
) -> Result<(), GradientMismatch>
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len());
    for index in 0..params.len() {
        let numeric = central_difference(params, index, step, &mut loss);
        let diff = (analytic[index] - numeric).abs();
        let scale = analytic[index].abs().max(numeric.abs());
        if diff > rel_tol * scale && diff > 1e-7 {
            return Err(GradientMismatch { index, analytic: analytic[index], numeric });
        }
    }
    Ok(())
}

#[derive(Debug)]
pub struct GradientMismatch {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl std::fmt::Display for GradientMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "gradient mismatch at parameter {}: analytic {} vs numeric {}",
            self.index, self.analytic, self.numeric
        )
    }
}

impl std::error::Error for GradientMismatch {}
