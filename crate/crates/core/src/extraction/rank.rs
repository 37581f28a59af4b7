use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::dump::{Level, LocalEmbeddingDump};
use super::kmeans::{squared_distance, KMeans};
use crate::error::{Result, TdamError};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMember {
    /// Index into the clustered point set (and the dump).
    pub entry: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Members of each cluster, ascending by distance to the centroid.
    pub members: Vec<Vec<RankedMember>>,
    pub inertia: f64,
}

impl ClusterReport {
    /// Ranks the members of each cluster of `km` over the clustered `points`.
    pub fn new(km: &KMeans, points: &[Vec<f64>]) -> Self {
        let mut members: Vec<Vec<RankedMember>> = vec![Vec::new(); km.k];
        for (entry, (&c, p)) in km.assignments.iter().zip(points).enumerate() {
            members[c].push(RankedMember {
                entry,
                distance: squared_distance(p, &km.centroids[c]).sqrt(),
            });
        }
        for m in &mut members {
            m.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.entry.cmp(&b.entry)));
        }
        Self {
            k: km.k,
            assignments: km.assignments.clone(),
            centroids: km.centroids.clone(),
            members,
            inertia: km.inertia(),
        }
    }
}

/// Word types of each cluster ranked by their closest occurrence to the centroid.
pub fn rank_topics(report: &ClusterReport, dump: &LocalEmbeddingDump, top_m: usize) -> Result<Vec<Vec<(String, f64)>>> {
    if top_m == 0 {
        return Err(TdamError::invalid("top_m must be at least 1"));
    }
    if dump.level != Level::Word {
        return Err(TdamError::invalid("topic ranking needs a word-level dump"));
    }
    if report.assignments.len() != dump.entries.len() {
        return Err(TdamError::Shape {
            op: "rank_topics",
            left: vec![report.assignments.len()],
            right: vec![dump.entries.len()],
        });
    }
    Ok(report
        .members
        .iter()
        .map(|members| {
            let mut best: BTreeMap<&str, f64> = BTreeMap::new();
            for m in members {
                let word = dump.entries[m.entry].member.as_str();
                let d = best.entry(word).or_insert(f64::INFINITY);
                *d = d.min(m.distance);
            }
            let mut ranked: Vec<(String, f64)> = best.into_iter().map(|(w, d)| (w.to_string(), d)).collect();
            ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(top_m);
            ranked
        })
        .collect())
}

/// `cluster_id<TAB>rank<TAB>member<TAB>distance` lines, rank starting at 1.
pub fn ranked_lines(lists: &[Vec<(String, f64)>]) -> String {
    let mut s = String::new();
    for (c, list) in lists.iter().enumerate() {
        for (r, (member, d)) in list.iter().enumerate() {
            let _ = writeln!(s, "{c}\t{}\t{member}\t{d}", r + 1);
        }
    }
    s
}

/// Report lines listing every member of every cluster.
pub fn member_lines(report: &ClusterReport, dump: &LocalEmbeddingDump) -> String {
    let lists: Vec<Vec<(String, f64)>> = report
        .members
        .iter()
        .map(|ms| ms.iter().map(|m| (dump.entries[m.entry].member.clone(), m.distance)).collect())
        .collect();
    ranked_lines(&lists)
}
