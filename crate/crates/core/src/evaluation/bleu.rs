use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("candidate has no tokens")]
pub struct EmptyCandidate;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram precision as (matches, candidate n-grams).
pub fn modified_precision(candidate: &[&str], reference: &[&str], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, candidate.len().saturating_sub(n - 1))
}

/// BLEU-4 with uniform weights and brevity penalty.
///
/// A zero precision is replaced by `1 / (2 * candidate_len)`.
pub fn bleu4(candidate: &[&str], reference: &[&str]) -> Result<f64, EmptyCandidate> {
    if candidate.is_empty() {
        return Err(EmptyCandidate);
    }
    let c = candidate.len() as f64;
    let floor = 1.0 / (2.0 * c);
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let (hits, total) = modified_precision(candidate, reference, n);
        let p = if hits == 0 {
            floor
        } else {
            hits as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let r = reference.len() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    Ok(bp * (log_sum / 4.0).exp())
}

/// [`bleu4`] over whitespace tokens.
pub fn bleu4_text(candidate: &str, reference: &str) -> Result<f64, EmptyCandidate> {
    let c: Vec<&str> = candidate.split_whitespace().collect();
    let r: Vec<&str> = reference.split_whitespace().collect();
    bleu4(&c, &r)
}
