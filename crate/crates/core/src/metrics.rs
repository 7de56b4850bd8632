//! Accuracy metrics over a built benchmark.
//!
//! All accuracies are percentages computed from integer tallies at full
//! precision; `None` marks a subset with no questions.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{PredictionSet, QuestionCorpus};
use crate::error::{Error, Result};
use crate::rational::Decimal;
use crate::split::{
    answer_class, build_ood_split, rareness_label, AnswerClass, BuildConfig, OodBenchmark, Rareness,
};
use crate::stats::csv_field;

fn percent(correct: u64, n: u64) -> Option<f64> {
    (n > 0).then(|| correct as f64 / n as f64 * 100.0)
}

/// Relative gap `(acc_head - acc_tail) / acc_tail`, in percent.
pub fn delta(acc_head: f64, acc_tail: f64) -> Option<f64> {
    (acc_tail != 0.0 && acc_tail.is_finite() && acc_head.is_finite())
        .then(|| (acc_head - acc_tail) / acc_tail * 100.0)
}

/// Relative change of `value` with respect to `reference`, in percent.
pub fn relative_difference(reference: f64, value: f64) -> Option<f64> {
    (reference != 0.0).then(|| (value - reference) / reference * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub source_label: String,
    pub acc_all: Option<f64>,
    pub acc_tail: Option<f64>,
    pub acc_head: Option<f64>,
    pub delta: Option<f64>,
    pub n_all: u64,
    pub n_tail: u64,
    pub n_head: u64,
    pub correct_all: u64,
    pub correct_tail: u64,
    pub correct_head: u64,
    pub missing_predictions: u64,
    pub alpha: Decimal,
    pub entropy_threshold: f64,
}

fn is_correct(preds: &PredictionSet, qid: &str, gold: &str) -> bool {
    preds.get(qid) == Some(gold)
}

/// Scores `preds` against every question of `bench`. Questions without a
/// prediction count as wrong and are tallied in `missing_predictions`.
pub fn evaluate(bench: &OodBenchmark, preds: &PredictionSet) -> Result<MetricsReport> {
    if bench.is_empty() {
        return Err(Error::EmptyBenchmark(format!(
            "`{}` has no selected questions",
            bench.split_name
        )));
    }
    let (mut n_tail, mut n_head, mut c_tail, mut c_head, mut missing) =
        (0u64, 0u64, 0u64, 0u64, 0u64);
    for (qid, a) in &bench.assignment {
        let predicted = preds.get(qid);
        if predicted.is_none() {
            missing += 1;
        }
        let hit = predicted == Some(a.answer.as_str());
        match a.label {
            AnswerClass::Tail => {
                n_tail += 1;
                c_tail += hit as u64;
            }
            AnswerClass::Head => {
                n_head += 1;
                c_head += hit as u64;
            }
        }
    }
    let acc_tail = percent(c_tail, n_tail);
    let acc_head = percent(c_head, n_head);
    Ok(MetricsReport {
        source_label: preds.source_label.clone(),
        acc_all: percent(c_tail + c_head, n_tail + n_head),
        acc_tail,
        acc_head,
        delta: acc_head.zip(acc_tail).and_then(|(h, t)| delta(h, t)),
        n_all: n_tail + n_head,
        n_tail,
        n_head,
        correct_all: c_tail + c_head,
        correct_tail: c_tail,
        correct_head: c_head,
        missing_predictions: missing,
        alpha: bench.config.alpha,
        entropy_threshold: bench.config.entropy_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(MeanStd {
        mean,
        std: var.sqrt(),
    })
}

/// Mean and spread of several runs (e.g. different training seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub acc_all: Option<MeanStd>,
    pub acc_tail: Option<MeanStd>,
    pub acc_head: Option<MeanStd>,
    pub delta: Option<MeanStd>,
}

/// Undefined entries in any run make that metric undefined in the aggregate.
pub fn aggregate(reports: &[MetricsReport]) -> AggregateReport {
    let collect = |f: fn(&MetricsReport) -> Option<f64>| -> Option<MeanStd> {
        let values: Option<Vec<f64>> = reports.iter().map(f).collect();
        values.and_then(|v| mean_std(&v))
    };
    AggregateReport {
        runs: reports.len(),
        acc_all: collect(|r| r.acc_all),
        acc_tail: collect(|r| r.acc_tail),
        acc_head: collect(|r| r.acc_head),
        delta: collect(|r| r.delta),
    }
}

/// 20 log-spaced points over [0.2, 5.0], rounded to four decimals.
pub fn default_alpha_grid() -> Vec<Decimal> {
    log_grid(0.2, 5.0, 20)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<Decimal> {
    let (a, b) = (lo.ln(), hi.ln());
    let steps = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|i| {
            let x = (a + (b - a) * i as f64 / steps).exp();
            format!("{x:.4}").parse().expect("formatted decimal")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: Decimal,
    pub n_tail: u64,
    pub correct_tail: u64,
    pub acc_tail: Option<f64>,
    /// Head/tail confusion at this alpha, as a fraction in [0, 1].
    pub confusion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    /// Alpha that fixes the head set used for confusion.
    pub reference_alpha: Decimal,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn alphas(&self) -> impl Iterator<Item = Decimal> + '_ {
        self.points.iter().map(|p| p.alpha)
    }

    /// Writes `alpha,n_tail,acc_tail,confusion`; undefined cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "alpha,n_tail,acc_tail,confusion")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{}",
                p.alpha,
                p.n_tail,
                p.acc_tail.map(|a| format!("{a:.6}")).unwrap_or_default(),
                p.confusion.map(|c| format!("{c:.6}")).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

fn validate_alphas(alphas: &[Decimal]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if alphas.iter().any(Decimal::is_zero) {
        return Err(Error::Config("alpha values must be positive".into()));
    }
    if alphas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(
            "alpha values must be sorted ascending".into(),
        ));
    }
    Ok(())
}

/// Tail accuracy and confusion for each alpha. Group selection and group
/// histograms stay those of `bench`; only the tail boundary moves.
pub fn sweep_benchmark(
    bench: &OodBenchmark,
    preds: &PredictionSet,
    alphas: &[Decimal],
) -> Result<SweepCurve> {
    validate_alphas(alphas)?;
    let points = alphas
        .iter()
        .map(|&alpha| {
            let mut n_tail = 0;
            let mut correct = 0;
            for (qid, a) in &bench.assignment {
                let dist = &bench.groups[&a.group].distribution;
                if answer_class(dist, &a.answer, alpha) == AnswerClass::Tail {
                    n_tail += 1;
                    correct += is_correct(preds, qid, &a.answer) as u64;
                }
            }
            let confusion = confusion_in(bench, preds, alpha);
            SweepPoint {
                alpha,
                n_tail,
                correct_tail: correct,
                acc_tail: percent(correct, n_tail),
                confusion: confusion.rate(),
            }
        })
        .collect();
    Ok(SweepCurve {
        reference_alpha: bench.config.alpha,
        points,
    })
}

pub fn alpha_sweep(
    corpus: &QuestionCorpus,
    config: &BuildConfig,
    base: Option<&QuestionCorpus>,
    preds: &PredictionSet,
    alphas: &[Decimal],
) -> Result<SweepCurve> {
    let bench = build_ood_split(corpus, config, base)?;
    sweep_benchmark(&bench, preds, alphas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCount {
    /// Questions whose gold answer is tail at the swept alpha.
    pub n_tail: u64,
    /// Of those, questions answered with a head class of the same group.
    pub confused: u64,
}

impl ConfusionCount {
    pub fn rate(&self) -> Option<f64> {
        (self.n_tail > 0).then(|| self.confused as f64 / self.n_tail as f64)
    }
}

/// Head/tail confusion at `alpha`. The head set is fixed at the benchmark's
/// own alpha and the tail set is the tail at `alpha` minus that head set, so
/// the two never overlap and the rate stays flat above the benchmark alpha.
/// A missing prediction is not a head answer.
pub fn confusion_in(bench: &OodBenchmark, preds: &PredictionSet, alpha: Decimal) -> ConfusionCount {
    let reference = bench.config.alpha;
    let mut count = ConfusionCount {
        n_tail: 0,
        confused: 0,
    };
    for (qid, a) in &bench.assignment {
        let dist = &bench.groups[&a.group].distribution;
        if answer_class(dist, &a.answer, alpha) != AnswerClass::Tail
            || answer_class(dist, &a.answer, reference) != AnswerClass::Tail
        {
            continue;
        }
        count.n_tail += 1;
        if let Some(predicted) = preds.get(qid) {
            if answer_class(dist, predicted, reference) == AnswerClass::Head {
                count.confused += 1;
            }
        }
    }
    count
}

pub fn head_tail_confusion(
    corpus: &QuestionCorpus,
    config: &BuildConfig,
    base: Option<&QuestionCorpus>,
    preds: &PredictionSet,
    alpha: Decimal,
) -> Result<Option<f64>> {
    let bench = build_ood_split(corpus, config, base)?;
    Ok(confusion_in(&bench, preds, alpha).rate())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningLabel {
    Reason,
    Bias,
    Other,
}

impl ReasoningLabel {
    pub fn classify(predicted: Rareness, gold: Rareness, correct: bool) -> Self {
        match (predicted, gold, correct) {
            (Rareness::Tail, _, true) => ReasoningLabel::Reason,
            (Rareness::Head, Rareness::Tail, false) => ReasoningLabel::Bias,
            _ => ReasoningLabel::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionLabel {
    pub label: ReasoningLabel,
    pub predicted: Rareness,
    pub gold: Rareness,
    pub correct: bool,
    /// Binary tail membership at the benchmark alpha.
    pub tail: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub reason: u64,
    pub bias: u64,
    pub other: u64,
}

impl LabelCounts {
    fn add(&mut self, label: ReasoningLabel) {
        match label {
            ReasoningLabel::Reason => self.reason += 1,
            ReasoningLabel::Bias => self.bias += 1,
            ReasoningLabel::Other => self.other += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.reason + self.bias + self.other
    }

    /// `(reason, bias, other)` as percentages of the total.
    pub fn percentages(&self) -> Option<(f64, f64, f64)> {
        let n = self.total();
        Some((
            percent(self.reason, n)?,
            percent(self.bias, n)?,
            percent(self.other, n)?,
        ))
    }
}

/// Counts indexed `[predicted][gold][0 = correct, 1 = wrong]`.
pub type JointMatrix = [[[u64; 2]; 3]; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningLabelReport {
    pub joint: JointMatrix,
    pub total: u64,
    pub counts: LabelCounts,
    pub per_question: BTreeMap<String, QuestionLabel>,
}

impl ReasoningLabelReport {
    pub fn cell(&self, predicted: Rareness, gold: Rareness, correct: bool) -> u64 {
        self.joint[predicted.index()][gold.index()][usize::from(!correct)]
    }

    pub fn cell_percent(&self, predicted: Rareness, gold: Rareness, correct: bool) -> Option<f64> {
        percent(self.cell(predicted, gold, correct), self.total)
    }

    /// Rows are predicted labels, column pairs are gold labels split into
    /// correct/wrong; cells are percentages of all evaluated questions.
    pub fn write_matrix_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "predicted")?;
        for gold in Rareness::ALL {
            write!(out, ",{0}_correct,{0}_wrong", gold.as_str())?;
        }
        writeln!(out)?;
        for predicted in Rareness::ALL {
            write!(out, "{}", predicted.as_str())?;
            for gold in Rareness::ALL {
                for correct in [true, false] {
                    let p = self.cell_percent(predicted, gold, correct).unwrap_or(0.0);
                    write!(out, ",{p:.6}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn reasoning_labels_for(bench: &OodBenchmark, preds: &PredictionSet) -> ReasoningLabelReport {
    let thresholds = bench.config.rareness;
    let mut joint: JointMatrix = Default::default();
    let mut counts = LabelCounts::default();
    let mut per_question = BTreeMap::new();
    for (qid, a) in &bench.assignment {
        let dist = &bench.groups[&a.group].distribution;
        let gold = rareness_label(dist, &a.answer, thresholds);
        let (predicted, correct) = match preds.get(qid) {
            Some(p) => (rareness_label(dist, p, thresholds), p == a.answer),
            None => (Rareness::Tail, false),
        };
        let label = ReasoningLabel::classify(predicted, gold, correct);
        joint[predicted.index()][gold.index()][usize::from(!correct)] += 1;
        counts.add(label);
        per_question.insert(
            qid.clone(),
            QuestionLabel {
                label,
                predicted,
                gold,
                correct,
                tail: a.label == AnswerClass::Tail,
            },
        );
    }
    ReasoningLabelReport {
        joint,
        total: bench.len() as u64,
        counts,
        per_question,
    }
}

pub fn reasoning_labels(
    corpus: &QuestionCorpus,
    config: &BuildConfig,
    base: Option<&QuestionCorpus>,
    preds: &PredictionSet,
) -> Result<ReasoningLabelReport> {
    let bench = build_ood_split(corpus, config, base)?;
    Ok(reasoning_labels_for(&bench, preds))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeBreakdown {
    pub questions: u64,
    pub tail_questions: u64,
    pub counts: LabelCounts,
    pub reason_pct: Option<f64>,
    pub bias_pct: Option<f64>,
    pub other_pct: Option<f64>,
    /// Set when the type has no tail question at the benchmark alpha.
    pub no_tail: bool,
}

/// Reasoning-label distribution per structural question type.
pub fn breakdown_by_type(
    report: &ReasoningLabelReport,
    corpus: &QuestionCorpus,
) -> BTreeMap<String, TypeBreakdown> {
    let mut out: BTreeMap<String, TypeBreakdown> = BTreeMap::new();
    for (qid, q) in &report.per_question {
        let ty = corpus
            .get(qid)
            .map(|r| r.structural_type.clone())
            .unwrap_or_default();
        let entry = out.entry(ty).or_default();
        entry.questions += 1;
        entry.tail_questions += q.tail as u64;
        entry.counts.add(q.label);
    }
    for entry in out.values_mut() {
        let pct = entry.counts.percentages();
        entry.reason_pct = pct.map(|p| p.0);
        entry.bias_pct = pct.map(|p| p.1);
        entry.other_pct = pct.map(|p| p.2);
        entry.no_tail = entry.tail_questions == 0;
    }
    out
}

/// `structural_type,questions,tail_questions,reason,bias,other` as counts.
pub fn write_breakdown_csv<W: Write>(
    breakdown: &BTreeMap<String, TypeBreakdown>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "structural_type,questions,tail_questions,reason,bias,other"
    )?;
    for (ty, b) in breakdown {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(ty),
            b.questions,
            b.tail_questions,
            b.counts.reason,
            b.counts.bias,
            b.counts.other
        )?;
    }
    Ok(())
}
