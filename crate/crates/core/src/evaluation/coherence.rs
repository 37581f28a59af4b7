//! Windowed NPMI topic coherence over a reference corpus.
//!
//! Each document contributes every window of `window` consecutive tokens
//! (one window when the document is shorter). `P(w)` is the fraction of
//! windows containing `w` and `P(a, b)` the fraction containing both.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Result, TdamError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceConfig {
    pub window: usize,
    pub top_m: usize,
    /// Smoothing added to the joint probability inside the logarithms.
    pub epsilon: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self {
            window: 10,
            top_m: 10,
            epsilon: 1e-12,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(TdamError::invalid("coherence window must be at least 1"));
        }
        if self.top_m < 2 {
            return Err(TdamError::invalid("coherence needs at least 2 words per topic"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(TdamError::invalid("epsilon must be non-negative"));
        }
        Ok(())
    }
}

/// Window counts for a fixed set of words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowCounts {
    pub windows: usize,
    words: BTreeMap<String, usize>,
    single: Vec<usize>,
    pair: BTreeMap<(usize, usize), usize>,
}

impl WindowCounts {
    /// Counts windows over `docs` for the words in `vocabulary`.
    pub fn count<S: AsRef<str> + Sync>(docs: &[Vec<S>], vocabulary: &BTreeSet<String>, window: usize) -> Self {
        let words: BTreeMap<String, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let w = window.max(1);
        let partial: Vec<(usize, Vec<usize>, BTreeMap<(usize, usize), usize>)> = docs
            .par_iter()
            .map(|doc| {
                let ids: Vec<Option<usize>> = doc.iter().map(|t| words.get(t.as_ref()).copied()).collect();
                let mut single = vec![0; words.len()];
                let mut pair = BTreeMap::new();
                let starts = if ids.len() <= w { 1 } else { ids.len() - w + 1 };
                for s in 0..starts {
                    let present: BTreeSet<usize> = ids[s..(s + w).min(ids.len())].iter().flatten().copied().collect();
                    let present: Vec<usize> = present.into_iter().collect();
                    for (i, &a) in present.iter().enumerate() {
                        single[a] += 1;
                        for &b in &present[i + 1..] {
                            *pair.entry((a, b)).or_insert(0) += 1;
                        }
                    }
                }
                (starts, single, pair)
            })
            .collect();
        let mut out = Self {
            windows: 0,
            single: vec![0; words.len()],
            pair: BTreeMap::new(),
            words,
        };
        for (n, single, pair) in partial {
            out.windows += n;
            out.single.iter_mut().zip(single).for_each(|(a, b)| *a += b);
            for (k, v) in pair {
                *out.pair.entry(k).or_insert(0) += v;
            }
        }
        out
    }

    pub fn windows_with(&self, word: &str) -> usize {
        self.words.get(word).map_or(0, |&i| self.single[i])
    }

    pub fn windows_with_both(&self, a: &str, b: &str) -> usize {
        match (self.words.get(a), self.words.get(b)) {
            (Some(&i), Some(&j)) if i == j => self.single[i],
            (Some(&i), Some(&j)) => *self.pair.get(&(i.min(j), i.max(j))).unwrap_or(&0),
            _ => 0,
        }
    }

    /// NPMI of a word pair; `None` when either word never occurs.
    pub fn npmi(&self, a: &str, b: &str, epsilon: f64) -> Option<f64> {
        let (ca, cb) = (self.windows_with(a), self.windows_with(b));
        if ca == 0 || cb == 0 || self.windows == 0 {
            return None;
        }
        let n = self.windows as f64;
        let (pa, pb) = (ca as f64 / n, cb as f64 / n);
        let pab = self.windows_with_both(a, b) as f64 / n;
        if pab >= 1.0 {
            // both words fill every window
            return Some(1.0);
        }
        let joint = pab + epsilon;
        Some((joint / (pa * pb)).ln() / -joint.ln())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCoherence {
    /// Mean NPMI over the scored pairs; `None` when every pair was skipped.
    pub score: Option<f64>,
    pub pairs_scored: usize,
    /// Pairs with a word absent from the reference corpus.
    pub pairs_skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub topics: Vec<TopicCoherence>,
    /// Mean over topics with a defined score.
    pub mean: Option<f64>,
    /// Topics whose score is undefined.
    pub undefined_topics: usize,
}

/// Coherence of each word list (truncated to `top_m`) against `reference`.
pub fn topic_coherence<S: AsRef<str> + Sync>(
    word_lists: &[Vec<String>],
    reference: &[Vec<S>],
    config: &CoherenceConfig,
) -> Result<CoherenceReport> {
    config.validate()?;
    if reference.iter().all(Vec::is_empty) {
        return Err(TdamError::Empty("reference corpus"));
    }
    let lists: Vec<&[String]> = word_lists.iter().map(|l| &l[..l.len().min(config.top_m)]).collect();
    let vocabulary: BTreeSet<String> = lists.iter().flat_map(|l| l.iter().cloned()).collect();
    let counts = WindowCounts::count(reference, &vocabulary, config.window);
    let topics: Vec<TopicCoherence> = lists
        .iter()
        .map(|words| {
            let mut scores = Vec::new();
            let mut skipped = 0;
            for (i, a) in words.iter().enumerate() {
                for b in &words[i + 1..] {
                    match counts.npmi(a, b, config.epsilon) {
                        Some(s) => scores.push(s),
                        None => skipped += 1,
                    }
                }
            }
            TopicCoherence {
                score: (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64),
                pairs_scored: scores.len(),
                pairs_skipped: skipped,
            }
        })
        .collect();
    let defined: Vec<f64> = topics.iter().filter_map(|t| t.score).collect();
    let undefined_topics = topics.len() - defined.len();
    if undefined_topics > 0 {
        log::warn!("{undefined_topics} topic(s) have no scorable word pair");
    }
    Ok(CoherenceReport {
        mean: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        topics,
        undefined_topics,
    })
}
