//! Head/tail labelling and construction of the OOD benchmark.
//!
//! A group is kept when its normalized entropy is below the threshold. Inside
//! a kept group an answer class is *tail* when `count <= alpha * mean`, and a
//! question inherits the class of its gold answer.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::QuestionCorpus;
use crate::error::{Error, Result};
use crate::rational::Decimal;
use crate::stats::{group_distributions, normalized_entropy, AnswerDistribution, EntropyScore};

/// Binary head/tail class of an answer inside its group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerClass {
    Head,
    Tail,
}

/// Three-way rareness with a borderline band between the two thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rareness {
    Head,
    Borderline,
    Tail,
}

impl Rareness {
    pub const ALL: [Rareness; 3] = [Rareness::Head, Rareness::Borderline, Rareness::Tail];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rareness::Head => "head",
            Rareness::Borderline => "borderline",
            Rareness::Tail => "tail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDistribution {
    /// Histograms come from the split being built.
    SelfSplit,
    /// Histograms come from a training split passed alongside.
    TrainSplit,
    /// Histograms come from an arbitrary corpus file.
    External(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RarenessThresholds {
    pub low: Decimal,
    pub high: Decimal,
}

impl Default for RarenessThresholds {
    fn default() -> Self {
        RarenessThresholds {
            low: Decimal::from_parts(7, 1).unwrap(),
            high: Decimal::from_parts(12, 1).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub alpha: Decimal,
    pub entropy_threshold: f64,
    pub base: BaseDistribution,
    pub rareness: RarenessThresholds,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            alpha: Decimal::from_parts(12, 1).unwrap(),
            entropy_threshold: 0.9,
            base: BaseDistribution::SelfSplit,
            rareness: RarenessThresholds::default(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_zero() {
            return Err(Error::Config("alpha must be positive".into()));
        }
        let t = self.entropy_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Config(format!(
                "entropy threshold must lie in (0, 1], got {t}"
            )));
        }
        if self.rareness.low >= self.rareness.high {
            return Err(Error::Config(format!(
                "rareness thresholds need low < high, got {} and {}",
                self.rareness.low, self.rareness.high
            )));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: Decimal) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Head/tail class of `answer` at `alpha`: tail iff `count <= alpha * mean`.
/// Answers never seen in the group have count zero and are tail.
pub fn answer_class(dist: &AnswerDistribution, answer: &str, alpha: Decimal) -> AnswerClass {
    // count <= alpha * total / d  <=>  count * d <= alpha * total
    let lhs = dist.count(answer) * dist.dimension();
    match alpha.cmp_scaled(lhs, dist.total()) {
        Ordering::Greater => AnswerClass::Head,
        _ => AnswerClass::Tail,
    }
}

pub fn classify_answers(
    dist: &AnswerDistribution,
    alpha: Decimal,
) -> BTreeMap<String, AnswerClass> {
    dist.counts()
        .keys()
        .map(|a| (a.clone(), answer_class(dist, a, alpha)))
        .collect()
}

/// Three-way label from `r = count / mean`: head when `r > high`, tail when
/// `r < low`, borderline otherwise (both boundary points included).
pub fn rareness_label(
    dist: &AnswerDistribution,
    answer: &str,
    thresholds: RarenessThresholds,
) -> Rareness {
    let lhs = dist.count(answer) * dist.dimension();
    let total = dist.total();
    if thresholds.high.cmp_scaled(lhs, total) == Ordering::Greater {
        Rareness::Head
    } else if thresholds.low.cmp_scaled(lhs, total) == Ordering::Less {
        Rareness::Tail
    } else {
        Rareness::Borderline
    }
}

/// An alpha at which every class of every group is tail.
pub fn saturating_alpha<'a>(dists: impl IntoIterator<Item = &'a AnswerDistribution>) -> Decimal {
    // count / mean <= d for every class, so d itself always saturates.
    let d = dists.into_iter().map(|d| d.dimension()).max().unwrap_or(1);
    Decimal::from_parts(d, 0).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedGroup {
    pub distribution: AnswerDistribution,
    pub entropy: EntropyScore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub group: String,
    pub answer: String,
    pub label: AnswerClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OodBenchmark {
    pub config: BuildConfig,
    pub split_name: String,
    pub created: Option<String>,
    pub groups: BTreeMap<String, SelectedGroup>,
    pub assignment: BTreeMap<String, Assignment>,
    /// Non-fatal observations from the build (unmatched groups, empty result).
    pub notes: Vec<String>,
}

impl OodBenchmark {
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn qids_with(&self, label: AnswerClass) -> impl Iterator<Item = &str> {
        self.assignment
            .iter()
            .filter(move |(_, a)| a.label == label)
            .map(|(q, _)| q.as_str())
    }

    pub fn head_qids(&self) -> BTreeSet<&str> {
        self.qids_with(AnswerClass::Head).collect()
    }

    pub fn tail_qids(&self) -> BTreeSet<&str> {
        self.qids_with(AnswerClass::Tail).collect()
    }

    pub fn distribution(&self, group: &str) -> Option<&AnswerDistribution> {
        self.groups.get(group).map(|g| &g.distribution)
    }

    /// Same questions and groups, labels recomputed at another alpha.
    pub fn relabeled(&self, alpha: Decimal) -> OodBenchmark {
        let mut out = self.clone();
        out.config.alpha = alpha;
        for assignment in out.assignment.values_mut() {
            let dist = &self.groups[&assignment.group].distribution;
            assignment.label = answer_class(dist, &assignment.answer, alpha);
        }
        out
    }

    pub fn summary(&self) -> BenchmarkSummary {
        let per_group = self.group_counts();
        BenchmarkSummary {
            questions: self.len(),
            groups: self.groups.len(),
            head: self.qids_with(AnswerClass::Head).count(),
            tail: self.qids_with(AnswerClass::Tail).count(),
            groups_with_head: per_group.values().filter(|c| c.head > 0).count(),
            groups_with_tail: per_group.values().filter(|c| c.tail > 0).count(),
        }
    }

    /// Head/tail question counts per selected group.
    pub fn group_counts(&self) -> BTreeMap<&str, HeadTailCount> {
        let mut counts: BTreeMap<&str, HeadTailCount> = self
            .groups
            .keys()
            .map(|k| (k.as_str(), HeadTailCount::default()))
            .collect();
        for a in self.assignment.values() {
            let c = counts.entry(a.group.as_str()).or_default();
            match a.label {
                AnswerClass::Head => c.head += 1,
                AnswerClass::Tail => c.tail += 1,
            }
        }
        counts
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.to_writer(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> io::Result<()> {
        serde_json::to_writer(writer, &BenchmarkFile::from(self)).map_err(io::Error::other)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<OodBenchmark> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let wire: BenchmarkFile =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                offset: 0,
                message: e.to_string(),
            })?;
        wire.into_benchmark()
    }

    pub fn from_reader<R: io::Read>(reader: R) -> Result<OodBenchmark> {
        let wire: BenchmarkFile = serde_json::from_reader(reader).map_err(|e| Error::Parse {
            path: "<input>".into(),
            offset: 0,
            message: e.to_string(),
        })?;
        wire.into_benchmark()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HeadTailCount {
    pub head: usize,
    pub tail: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BenchmarkSummary {
    pub questions: usize,
    pub groups: usize,
    pub head: usize,
    pub tail: usize,
    pub groups_with_head: usize,
    pub groups_with_tail: usize,
}

/// Builds the benchmark from `corpus`. Group histograms come from `corpus`
/// itself or from `base`, according to `config.base`.
pub fn build_ood_split(
    corpus: &QuestionCorpus,
    config: &BuildConfig,
    base: Option<&QuestionCorpus>,
) -> Result<OodBenchmark> {
    config.validate()?;
    let mut notes = Vec::new();
    let dists = match (&config.base, base) {
        (BaseDistribution::SelfSplit, _) => group_distributions(corpus),
        (_, None) => {
            return Err(Error::Config(
                "a base corpus is required for the train/external distribution source".into(),
            ))
        }
        (_, Some(base)) => {
            let base_dists = group_distributions(base);
            let shared: BTreeMap<_, _> = base_dists
                .into_iter()
                .filter(|(k, _)| corpus.group(k).is_some())
                .collect();
            if shared.is_empty() {
                return Err(Error::Config(format!(
                    "base corpus `{}` shares no group keys with `{}`",
                    base.split_name(),
                    corpus.split_name()
                )));
            }
            let unmatched = corpus.group_count() - shared.len();
            if unmatched > 0 {
                notes.push(format!(
                    "{unmatched} group(s) of `{}` are absent from the base distribution and cannot be selected",
                    corpus.split_name()
                ));
            }
            shared
        }
    };

    let mut groups = BTreeMap::new();
    let mut assignment = BTreeMap::new();
    for (key, dist) in dists {
        let Ok(entropy) = normalized_entropy(&dist) else {
            continue;
        };
        if entropy.normalized >= config.entropy_threshold {
            continue;
        }
        for qid in corpus.group(&key).unwrap_or_default() {
            let Some(record) = corpus.get(qid) else {
                continue;
            };
            assignment.insert(
                qid.clone(),
                Assignment {
                    group: key.clone(),
                    answer: record.answer.clone(),
                    label: answer_class(&dist, &record.answer, config.alpha),
                },
            );
        }
        groups.insert(
            key,
            SelectedGroup {
                distribution: dist,
                entropy,
            },
        );
    }
    if groups.is_empty() {
        let note = "no groups selected: every group is balanced or single-class".to_string();
        log::warn!("{note}");
        notes.push(note);
    }
    Ok(OodBenchmark {
        config: config.clone(),
        split_name: corpus.split_name().to_string(),
        created: None,
        groups,
        assignment,
        notes,
    })
}

#[derive(Serialize, Deserialize)]
struct BenchmarkMeta {
    alpha: Decimal,
    entropy_threshold: f64,
    base: BaseDistribution,
    rareness: RarenessThresholds,
    split: String,
    created: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct GroupEntry {
    counts: BTreeMap<String, u64>,
    entropy: f64,
    normalized_entropy: f64,
}

#[derive(Serialize, Deserialize)]
struct QuestionEntry {
    group: String,
    label: AnswerClass,
    answer: String,
}

#[derive(Serialize, Deserialize)]
struct BenchmarkFile {
    meta: BenchmarkMeta,
    groups: BTreeMap<String, GroupEntry>,
    questions: BTreeMap<String, QuestionEntry>,
}

impl From<&OodBenchmark> for BenchmarkFile {
    fn from(b: &OodBenchmark) -> Self {
        BenchmarkFile {
            meta: BenchmarkMeta {
                alpha: b.config.alpha,
                entropy_threshold: b.config.entropy_threshold,
                base: b.config.base.clone(),
                rareness: b.config.rareness,
                split: b.split_name.clone(),
                created: b.created.clone(),
            },
            groups: b
                .groups
                .iter()
                .map(|(k, g)| {
                    (
                        k.clone(),
                        GroupEntry {
                            counts: g.distribution.counts().clone(),
                            entropy: g.entropy.entropy_nats,
                            normalized_entropy: g.entropy.normalized,
                        },
                    )
                })
                .collect(),
            questions: b
                .assignment
                .iter()
                .map(|(q, a)| {
                    (
                        q.clone(),
                        QuestionEntry {
                            group: a.group.clone(),
                            label: a.label,
                            answer: a.answer.clone(),
                        },
                    )
                })
                .collect(),
        }
    }
}

impl BenchmarkFile {
    fn into_benchmark(self) -> Result<OodBenchmark> {
        let config = BuildConfig {
            alpha: self.meta.alpha,
            entropy_threshold: self.meta.entropy_threshold,
            base: self.meta.base,
            rareness: self.meta.rareness,
        };
        config.validate()?;
        let mut groups = BTreeMap::new();
        for (key, entry) in self.groups {
            let distribution = AnswerDistribution::from_counts(key.clone(), entry.counts)?;
            // Recomputed rather than trusted, so a round trip is bit-identical.
            let entropy = normalized_entropy(&distribution)?;
            groups.insert(
                key,
                SelectedGroup {
                    distribution,
                    entropy,
                },
            );
        }
        let mut assignment = BTreeMap::new();
        for (qid, q) in self.questions {
            if !groups.contains_key(&q.group) {
                return Err(Error::Data(format!(
                    "question `{qid}` refers to unknown group `{}`",
                    q.group
                )));
            }
            assignment.insert(
                qid,
                Assignment {
                    group: q.group,
                    answer: q.answer,
                    label: q.label,
                },
            );
        }
        Ok(OodBenchmark {
            config,
            split_name: self.meta.split,
            created: self.meta.created,
            groups,
            assignment,
            notes: Vec::new(),
        })
    }
}

/// Group-level comparison of a built benchmark against a reference one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BenchmarkDiff {
    pub only_ours: Vec<String>,
    pub only_reference: Vec<String>,
    /// `(group, ours, reference)` for shared groups whose counts differ.
    pub count_mismatches: Vec<(String, HeadTailCount, HeadTailCount)>,
}

impl BenchmarkDiff {
    pub fn is_empty(&self) -> bool {
        self.only_ours.is_empty()
            && self.only_reference.is_empty()
            && self.count_mismatches.is_empty()
    }
}

pub fn diff_benchmarks(ours: &OodBenchmark, reference: &OodBenchmark) -> BenchmarkDiff {
    let a = ours.group_counts();
    let b = reference.group_counts();
    let mut diff = BenchmarkDiff::default();
    for (key, count) in &a {
        match b.get(key) {
            None => diff.only_ours.push(key.to_string()),
            Some(other) if other != count => {
                diff.count_mismatches
                    .push((key.to_string(), *count, *other));
            }
            Some(_) => {}
        }
    }
    diff.only_reference = b
        .keys()
        .filter(|k| !a.contains_key(*k))
        .map(|k| k.to_string())
        .collect();
    diff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::QuestionRecord;

    fn alpha(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn dist(counts: &[(&str, u64)]) -> AnswerDistribution {
        AnswerDistribution::from_counts("g", counts.iter().map(|&(a, c)| (a, c))).unwrap()
    }

    fn corpus_from_counts(groups: &[(&str, &[(&str, u64)])]) -> QuestionCorpus {
        let mut records = Vec::new();
        let mut n = 0;
        for (group, counts) in groups {
            for (answer, count) in counts.iter() {
                for _ in 0..*count {
                    records.push(
                        QuestionRecord::new(format!("q{n:04}"), answer).with_local_group(*group),
                    );
                    n += 1;
                }
            }
        }
        QuestionCorpus::new("test", records).unwrap()
    }

    #[test]
    fn classify_threshold_example() {
        // mu = 6, alpha * mu = 7.2
        let labels = classify_answers(&dist(&[("a", 10), ("b", 5), ("c", 3)]), alpha("1.2"));
        assert_eq!(labels["a"], AnswerClass::Head);
        assert_eq!(labels["b"], AnswerClass::Tail);
        assert_eq!(labels["c"], AnswerClass::Tail);
    }

    #[test]
    fn symmetric_group_is_all_tail() {
        for a in ["1", "1.2", "3"] {
            let labels = classify_answers(&dist(&[("a", 4), ("b", 4)]), alpha(a));
            assert!(labels.values().all(|&l| l == AnswerClass::Tail));
        }
    }

    #[test]
    fn tail_boundary_is_inclusive() {
        // counts {6, 4}: mu = 5, 1.2 * 5 = 6 exactly.
        let d = dist(&[("a", 6), ("b", 4)]);
        assert_eq!(answer_class(&d, "a", alpha("1.2")), AnswerClass::Tail);
        assert_eq!(answer_class(&d, "a", alpha("1.19")), AnswerClass::Head);
    }

    #[test]
    fn rareness_examples() {
        let d = dist(&[("a", 10), ("b", 5), ("c", 3)]);
        let th = RarenessThresholds::default();
        assert_eq!(rareness_label(&d, "a", th), Rareness::Head);
        assert_eq!(rareness_label(&d, "b", th), Rareness::Borderline);
        assert_eq!(rareness_label(&d, "c", th), Rareness::Tail);
        assert_eq!(rareness_label(&d, "zebra", th), Rareness::Tail);
    }

    #[test]
    fn rareness_boundaries_are_borderline() {
        // counts {6, 4}: r(6) = 1.2, r(4) = 0.8
        let th = RarenessThresholds::default();
        assert_eq!(
            rareness_label(&dist(&[("a", 6), ("b", 4)]), "a", th),
            Rareness::Borderline
        );
        // counts {13, 7}: mu = 10, r(7) = 0.7
        assert_eq!(
            rareness_label(&dist(&[("a", 13), ("b", 7)]), "b", th),
            Rareness::Borderline
        );
    }

    #[test]
    fn build_single_group_example() {
        let corpus = corpus_from_counts(&[("g", &[("a", 10), ("b", 5), ("c", 3)])]);
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        assert_eq!(bench.groups.len(), 1);
        assert_eq!(bench.head_qids().len(), 10);
        assert_eq!(bench.tail_qids().len(), 8);
    }

    #[test]
    fn uniform_corpus_gives_empty_benchmark() {
        let corpus =
            corpus_from_counts(&[("g1", &[("a", 3), ("b", 3)]), ("g2", &[("x", 5), ("y", 5)])]);
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        assert!(bench.is_empty());
        assert!(bench.notes.iter().any(|n| n.contains("no groups selected")));
    }

    #[test]
    fn single_class_groups_never_selected() {
        let corpus = corpus_from_counts(&[("g", &[("a", 10)])]);
        let cfg = BuildConfig {
            entropy_threshold: 1.0,
            ..BuildConfig::default()
        };
        assert!(build_ood_split(&corpus, &cfg, None).unwrap().is_empty());
    }

    #[test]
    fn base_distribution_errors() {
        let corpus = corpus_from_counts(&[("g", &[("a", 10), ("b", 1)])]);
        let cfg = BuildConfig {
            base: BaseDistribution::TrainSplit,
            ..BuildConfig::default()
        };
        assert!(build_ood_split(&corpus, &cfg, None)
            .unwrap_err()
            .is_config());
        let other = corpus_from_counts(&[("h", &[("a", 10), ("b", 1)])]);
        assert!(build_ood_split(&corpus, &cfg, Some(&other))
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn base_distribution_drives_labels() {
        // In the target split "b" dominates, but the base says it is rare.
        let target = corpus_from_counts(&[
            ("g", &[("a", 1), ("b", 9)]),
            ("only-here", &[("x", 9), ("y", 1)]),
        ]);
        let base = corpus_from_counts(&[("g", &[("a", 20), ("b", 2), ("c", 1)])]);
        let cfg = BuildConfig {
            base: BaseDistribution::TrainSplit,
            ..BuildConfig::default()
        };
        let bench = build_ood_split(&target, &cfg, Some(&base)).unwrap();
        assert_eq!(bench.groups.len(), 1);
        assert_eq!(bench.len(), 10);
        assert_eq!(bench.tail_qids().len(), 9);
        assert_eq!(bench.notes.len(), 1);
    }

    #[test]
    fn unseen_answers_in_base_are_tail() {
        let target = corpus_from_counts(&[("g", &[("zebra", 2)])]);
        let base = corpus_from_counts(&[("g", &[("a", 20), ("b", 2)])]);
        let cfg = BuildConfig {
            base: BaseDistribution::External("train.json".into()),
            ..BuildConfig::default()
        };
        let bench = build_ood_split(&target, &cfg, Some(&base)).unwrap();
        assert_eq!(bench.tail_qids().len(), 2);
    }

    #[test]
    fn invalid_configs() {
        let corpus = corpus_from_counts(&[("g", &[("a", 10), ("b", 1)])]);
        let cfg = BuildConfig::default().with_alpha(alpha("0"));
        assert!(build_ood_split(&corpus, &cfg, None).is_err());
        let cfg = BuildConfig {
            entropy_threshold: 1.5,
            ..BuildConfig::default()
        };
        assert!(build_ood_split(&corpus, &cfg, None).is_err());
        let mut cfg = BuildConfig::default();
        cfg.rareness.low = alpha("1.2");
        assert!(build_ood_split(&corpus, &cfg, None).is_err());
    }

    #[test]
    fn export_import_round_trip() {
        let corpus = corpus_from_counts(&[
            ("g1", &[("a", 10), ("b", 5), ("c", 3)]),
            ("g2", &[("x", 30), ("y", 2), ("z", 1)]),
        ]);
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        let mut buf = Vec::new();
        bench.to_writer(&mut buf).unwrap();
        let back = OodBenchmark::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back.assignment, bench.assignment);
        assert_eq!(back.groups, bench.groups);
        assert_eq!(back.config, bench.config);
        let mut again = Vec::new();
        back.to_writer(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn empty_benchmark_exports() {
        let corpus = corpus_from_counts(&[("g", &[("a", 3), ("b", 3)])]);
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        let mut buf = Vec::new();
        bench.to_writer(&mut buf).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(value["questions"].as_object().unwrap().len(), 0);
        assert_eq!(value["meta"]["alpha"], 1.2);
        assert!(OodBenchmark::from_reader(buf.as_slice())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn diff_reports_group_level_changes() {
        let corpus = corpus_from_counts(&[
            ("g1", &[("a", 10), ("b", 5), ("c", 3)]),
            ("g2", &[("x", 30), ("y", 2), ("z", 1)]),
        ]);
        let ours = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        assert!(diff_benchmarks(&ours, &ours).is_empty());
        let other = ours.relabeled(alpha("0.5"));
        let diff = diff_benchmarks(&ours, &other);
        assert_eq!(diff.count_mismatches.len(), 1);
        assert_eq!(diff.count_mismatches[0].0, "g1");
    }
}
