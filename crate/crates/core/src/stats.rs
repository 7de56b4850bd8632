//! Per-group answer histograms and the entropy-based imbalance filter.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::QuestionCorpus;
use crate::error::{Error, Result};

/// Gold-answer histogram of one question group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDistribution {
    pub group_key: String,
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl AnswerDistribution {
    /// Builds a histogram from `(answer, count)` pairs; zero counts are
    /// dropped and repeated answers are summed.
    pub fn from_counts<S: Into<String>>(
        group_key: impl Into<String>,
        counts: impl IntoIterator<Item = (S, u64)>,
    ) -> Result<Self> {
        let group_key = group_key.into();
        let mut map: BTreeMap<String, u64> = BTreeMap::new();
        for (answer, count) in counts {
            if count > 0 {
                *map.entry(answer.into()).or_default() += count;
            }
        }
        let total = map.values().sum();
        if total == 0 {
            return Err(Error::Data(format!("group `{group_key}` has no answers")));
        }
        Ok(AnswerDistribution {
            group_key,
            counts: map,
            total,
        })
    }

    pub fn from_answers<'a>(
        group_key: impl Into<String>,
        answers: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        Self::from_counts(group_key, answers.into_iter().map(|a| (a, 1)))
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Count of `answer` in this group; 0 when never observed.
    pub fn count(&self, answer: &str) -> u64 {
        self.counts.get(answer).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct answers.
    pub fn dimension(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Mean count per answer class, `total / d`, kept exact.
    pub fn mean_count(&self) -> Ratio<u64> {
        Ratio::new(self.total, self.dimension())
    }

    pub fn probability(&self, answer: &str) -> f64 {
        self.count(answer) as f64 / self.total as f64
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (&str, f64)> {
        let total = self.total as f64;
        self.counts
            .iter()
            .map(move |(a, &c)| (a.as_str(), c as f64 / total))
    }

    /// Most frequent answer; ties go to the lexicographically smallest.
    pub fn modal_answer(&self) -> &str {
        let mut best: Option<(&str, u64)> = None;
        // BTreeMap order is lexicographic, so strict `>` keeps the first.
        for (answer, &count) in &self.counts {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((answer, count));
            }
        }
        best.map(|(a, _)| a).unwrap_or_default()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn min_count(&self) -> u64 {
        self.counts.values().copied().min().unwrap_or(0)
    }

    pub fn is_uniform(&self) -> bool {
        self.max_count() == self.min_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyScore {
    pub entropy_nats: f64,
    pub normalized: f64,
    pub d: u64,
}

/// Shannon entropy in nats, `-sum p ln p`.
pub fn shannon_entropy(dist: &AnswerDistribution) -> f64 {
    let total = dist.total as f64;
    let h: f64 = dist
        .counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    // Exact zero for a single class; also clears -0.0.
    if dist.counts.len() <= 1 {
        0.0
    } else {
        h.max(0.0)
    }
}

/// Entropy divided by `ln d`. A one-class group has no defined value and
/// yields [`Error::SingleClass`].
pub fn normalized_entropy(dist: &AnswerDistribution) -> Result<EntropyScore> {
    let d = dist.dimension();
    if d < 2 {
        return Err(Error::SingleClass(dist.group_key.clone()));
    }
    let entropy_nats = shannon_entropy(dist);
    let normalized = if dist.is_uniform() {
        1.0
    } else {
        (entropy_nats / (d as f64).ln()).clamp(0.0, 1.0)
    };
    Ok(EntropyScore {
        entropy_nats,
        normalized,
        d,
    })
}

/// Histogram of one local group of `corpus`.
pub fn answer_distribution(corpus: &QuestionCorpus, group_key: &str) -> Result<AnswerDistribution> {
    let qids = corpus
        .group(group_key)
        .ok_or_else(|| Error::UnknownGroup(group_key.to_string()))?;
    AnswerDistribution::from_answers(
        group_key,
        qids.iter()
            .filter_map(|q| corpus.get(q))
            .map(|r| r.answer.as_str()),
    )
}

/// Histograms of every local group, in key order.
pub fn group_distributions(corpus: &QuestionCorpus) -> BTreeMap<String, AnswerDistribution> {
    corpus
        .groups()
        .filter_map(|(key, _)| {
            answer_distribution(corpus, key)
                .ok()
                .map(|d| (key.to_string(), d))
        })
        .collect()
}

/// Whether a distribution passes the imbalance filter: at least two answer
/// classes and normalized entropy strictly below `threshold`.
pub fn is_imbalanced(dist: &AnswerDistribution, threshold: f64) -> bool {
    normalized_entropy(dist).is_ok_and(|score| score.normalized < threshold)
}

pub fn filter_imbalanced_groups(corpus: &QuestionCorpus, threshold: f64) -> BTreeSet<String> {
    select_imbalanced(group_distributions(corpus).values(), threshold)
}

pub fn select_imbalanced<'a>(
    dists: impl IntoIterator<Item = &'a AnswerDistribution>,
    threshold: f64,
) -> BTreeSet<String> {
    dists
        .into_iter()
        .filter(|d| is_imbalanced(d, threshold))
        .map(|d| d.group_key.clone())
        .collect()
}

/// One row of the per-group statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStatsRow {
    pub group_key: String,
    pub total: u64,
    pub d: u64,
    pub entropy: f64,
    /// `None` for single-class groups.
    pub normalized_entropy: Option<f64>,
    pub selected: bool,
}

pub fn group_stats(corpus: &QuestionCorpus, threshold: f64) -> Vec<GroupStatsRow> {
    group_distributions(corpus)
        .into_values()
        .map(|dist| {
            let normalized = normalized_entropy(&dist).ok().map(|s| s.normalized);
            GroupStatsRow {
                total: dist.total(),
                d: dist.dimension(),
                entropy: shannon_entropy(&dist),
                normalized_entropy: normalized,
                selected: normalized.is_some_and(|n| n < threshold),
                group_key: dist.group_key,
            }
        })
        .collect()
}

/// Writes `group_key,total,d,entropy,normalized_entropy,selected` rows.
pub fn write_stats_csv<W: Write>(rows: &[GroupStatsRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "group_key,total,d,entropy,normalized_entropy,selected")?;
    for row in rows {
        let normalized = row
            .normalized_entropy
            .map(|n| format!("{n:.6}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.6},{},{}",
            csv_field(&row.group_key),
            row.total,
            row.d,
            row.entropy,
            normalized,
            row.selected
        )?;
    }
    Ok(())
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Question counts per structural and semantic type over `qids`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TypeHistogram {
    pub structural: BTreeMap<String, u64>,
    pub semantic: BTreeMap<String, u64>,
}

pub fn type_histogram<'a>(
    corpus: &QuestionCorpus,
    qids: impl IntoIterator<Item = &'a str>,
) -> TypeHistogram {
    let mut hist = TypeHistogram::default();
    for record in qids.into_iter().filter_map(|q| corpus.get(q)) {
        *hist
            .structural
            .entry(record.structural_type.clone())
            .or_default() += 1;
        *hist
            .semantic
            .entry(record.semantic_type.clone())
            .or_default() += 1;
    }
    hist
}
