//! Aspect and aspect-polarity purity of sentence clusters.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Result, TdamError};

pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Gold `(aspect, polarity)` of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AspectLabel {
    pub aspect: String,
    pub polarity: String,
}

#[derive(Debug, Clone)]
pub struct AspectClusterEval {
    /// Sentence ids per cluster.
    pub clusters: Vec<Vec<String>>,
    pub gold: HashMap<String, AspectLabel>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRatios {
    pub threshold: f64,
    /// Share of clusters whose modal aspect covers at least `threshold` of the labeled members.
    pub aspect: f64,
    /// The same for the modal (aspect, polarity) pair.
    pub aspect_polarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectCoherence {
    pub ratios: Vec<ThresholdRatios>,
    /// Clusters with at least one labeled member.
    pub clusters_counted: usize,
    pub clusters_dropped: usize,
}

fn modal_count<K: Ord>(keys: impl Iterator<Item = K>) -> usize {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

pub fn aspect_polarity_coherence(eval: &AspectClusterEval) -> Result<AspectCoherence> {
    if eval.thresholds.is_empty() {
        return Err(TdamError::Empty("threshold list"));
    }
    if let Some(t) = eval.thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(TdamError::invalid(format!("threshold {t} outside (0, 1]")));
    }
    if eval.clusters.is_empty() || eval.clusters.iter().any(Vec::is_empty) {
        return Err(TdamError::Empty("cluster"));
    }
    // (members, modal aspect count, modal pair count) per counted cluster
    let mut purity = Vec::new();
    for cluster in &eval.clusters {
        let labels: Vec<&AspectLabel> = cluster.iter().filter_map(|id| eval.gold.get(id)).collect();
        if labels.is_empty() {
            continue;
        }
        purity.push((
            labels.len(),
            modal_count(labels.iter().map(|l| &l.aspect)),
            modal_count(labels.iter().copied()),
        ));
    }
    let counted = purity.len();
    let share = |x: f64, pick: fn(&(usize, usize, usize)) -> usize| {
        if counted == 0 {
            return 0.0;
        }
        let ok = purity.iter().filter(|p| pick(p) as f64 / p.0 as f64 >= x).count();
        ok as f64 / counted as f64
    };
    Ok(AspectCoherence {
        ratios: eval
            .thresholds
            .iter()
            .map(|&x| ThresholdRatios {
                threshold: x,
                aspect: share(x, |p| p.1),
                aspect_polarity: share(x, |p| p.2),
            })
            .collect(),
        clusters_counted: counted,
        clusters_dropped: eval.clusters.len() - counted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(a: &str, p: &str) -> AspectLabel {
        AspectLabel {
            aspect: a.into(),
            polarity: p.into(),
        }
    }

    #[test]
    fn unlabeled_members_leave_the_denominator() {
        let gold = HashMap::from([("s1".to_string(), label("food", "positive")), ("s2".to_string(), label("food", "positive"))]);
        let eval = AspectClusterEval {
            clusters: vec![vec!["s1".into(), "s2".into(), "u".into()], vec!["u2".into()]],
            gold,
            thresholds: vec![1.0],
        };
        let r = aspect_polarity_coherence(&eval).unwrap();
        assert_eq!(r.clusters_counted, 1);
        assert_eq!(r.clusters_dropped, 1);
        assert_eq!(r.ratios[0].aspect_polarity, 1.0);
    }

    #[test]
    fn bad_inputs_rejected() {
        let eval = AspectClusterEval {
            clusters: vec![vec!["a".into()]],
            gold: HashMap::new(),
            thresholds: vec![],
        };
        assert!(aspect_polarity_coherence(&eval).is_err());
        let eval = AspectClusterEval {
            thresholds: vec![0.0],
            ..eval
        };
        assert!(aspect_polarity_coherence(&eval).is_err());
        let eval = AspectClusterEval {
            thresholds: vec![0.5],
            clusters: vec![vec![]],
            ..eval
        };
        assert!(aspect_polarity_coherence(&eval).is_err());
    }
}
