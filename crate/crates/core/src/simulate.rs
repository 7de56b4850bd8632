//! Prediction-set generators with a controllable amount of bias.
//!
//! Every generator implements [`Predictor`] and is registered by name in a
//! [`PredictorRegistry`], so the CLI (or any caller) picks one at runtime:
//!
//! | name     | behaviour                                                    |
//! |----------|--------------------------------------------------------------|
//! | `gold`   | answers every question correctly                             |
//! | `prior`  | answers the modal answer of the question's group in a base   |
//! | `knob`   | with probability `beta` the group's modal answer, else gold  |

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{PredictionSet, QuestionCorpus, QuestionRecord};
use crate::error::{Error, Result};
use crate::stats::AnswerDistribution;

pub trait Predictor: Send + Sync {
    fn name(&self) -> &str;

    fn predict(&self, target: &QuestionCorpus) -> Result<PredictionSet>;
}

impl fmt::Debug for dyn Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predictor({})", self.name())
    }
}

/// Which group key the prior is estimated over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorScope {
    #[default]
    Local,
    Global,
}

impl PriorScope {
    fn key<'r>(&self, record: &'r QuestionRecord) -> Option<&'r str> {
        match self {
            PriorScope::Local => record.local_group.as_deref(),
            PriorScope::Global => record.global_group.as_deref(),
        }
    }
}

impl std::str::FromStr for PriorScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(PriorScope::Local),
            "global" => Ok(PriorScope::Global),
            other => Err(Error::Config(format!(
                "unknown prior scope `{other}` (expected local or global)"
            ))),
        }
    }
}

/// Modal answer per group of a base corpus, plus a corpus-wide fallback
/// for questions whose group the base never saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPrior {
    scope: PriorScope,
    by_group: BTreeMap<String, String>,
    fallback: Option<String>,
}

impl GroupPrior {
    pub fn estimate(base: &QuestionCorpus, scope: PriorScope) -> Self {
        let mut per_group: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
        let mut overall: BTreeMap<&str, u64> = BTreeMap::new();
        for record in base.records() {
            *overall.entry(record.answer.as_str()).or_default() += 1;
            if let Some(key) = scope.key(record) {
                *per_group
                    .entry(key)
                    .or_default()
                    .entry(record.answer.as_str())
                    .or_default() += 1;
            }
        }
        let modal = |counts: BTreeMap<&str, u64>| {
            AnswerDistribution::from_counts("", counts)
                .ok()
                .map(|d| d.modal_answer().to_string())
        };
        GroupPrior {
            scope,
            by_group: per_group
                .into_iter()
                .filter_map(|(k, counts)| modal(counts).map(|m| (k.to_string(), m)))
                .collect(),
            fallback: modal(overall),
        }
    }

    pub fn answer_for(&self, record: &QuestionRecord) -> Option<&str> {
        self.scope
            .key(record)
            .and_then(|k| self.by_group.get(k))
            .or(self.fallback.as_ref())
            .map(String::as_str)
    }
}

/// Returns the gold answer for every question.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldPredictor;

impl Predictor for GoldPredictor {
    fn name(&self) -> &str {
        "gold"
    }

    fn predict(&self, target: &QuestionCorpus) -> Result<PredictionSet> {
        let mut set = PredictionSet::new(self.name());
        for r in target.records() {
            set.insert(r.qid.clone(), &r.answer);
        }
        Ok(set)
    }
}

/// Blind baseline: the most frequent base answer of the question's group.
#[derive(Debug, Clone)]
pub struct QuestionPriorPredictor {
    prior: Option<GroupPrior>,
    scope: PriorScope,
}

impl QuestionPriorPredictor {
    /// Prior estimated from `base`.
    pub fn from_base(base: &QuestionCorpus, scope: PriorScope) -> Self {
        QuestionPriorPredictor {
            prior: Some(GroupPrior::estimate(base, scope)),
            scope,
        }
    }

    /// Prior estimated from whatever corpus is being predicted.
    pub fn self_prior(scope: PriorScope) -> Self {
        QuestionPriorPredictor { prior: None, scope }
    }
}

impl Predictor for QuestionPriorPredictor {
    fn name(&self) -> &str {
        "prior"
    }

    fn predict(&self, target: &QuestionCorpus) -> Result<PredictionSet> {
        let own;
        let prior = match &self.prior {
            Some(p) => p,
            None => {
                own = GroupPrior::estimate(target, self.scope);
                &own
            }
        };
        let mut set = PredictionSet::new(self.name());
        for r in target.records() {
            if let Some(answer) = prior.answer_for(r) {
                set.insert(r.qid.clone(), answer);
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasKnob {
    /// Probability of answering the group prior instead of the gold answer.
    pub beta: f64,
    pub seed: u64,
}

impl BiasKnob {
    pub fn new(beta: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Config(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(BiasKnob { beta, seed })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Uniform draw in `[0, 1)` keyed on `(seed, qid)` only, so the outcome for
/// a question does not depend on iteration order or on other questions.
pub fn question_uniform(seed: u64, qid: &str) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(qid.as_bytes()));
    rng.gen::<f64>()
}

/// Mixes gold answers with the group prior at rate `beta`.
#[derive(Debug, Clone)]
pub struct KnobPredictor {
    knob: BiasKnob,
    scope: PriorScope,
    prior: Option<GroupPrior>,
}

impl KnobPredictor {
    pub fn new(knob: BiasKnob, scope: PriorScope) -> Self {
        KnobPredictor {
            knob,
            scope,
            prior: None,
        }
    }

    pub fn with_base(mut self, base: &QuestionCorpus) -> Self {
        self.prior = Some(GroupPrior::estimate(base, self.scope));
        self
    }
}

impl Predictor for KnobPredictor {
    fn name(&self) -> &str {
        "knob"
    }

    fn predict(&self, target: &QuestionCorpus) -> Result<PredictionSet> {
        BiasKnob::new(self.knob.beta, self.knob.seed)?;
        let own;
        let prior = match &self.prior {
            Some(p) => p,
            None => {
                own = GroupPrior::estimate(target, self.scope);
                &own
            }
        };
        let mut set = PredictionSet::new(format!("knob-beta{}", self.knob.beta));
        for r in target.records() {
            let biased = question_uniform(self.knob.seed, &r.qid) < self.knob.beta;
            let answer = match prior.answer_for(r) {
                Some(modal) if biased => modal,
                _ => r.answer.as_str(),
            };
            set.insert(r.qid.clone(), answer);
        }
        Ok(set)
    }
}

pub fn question_prior_predictor(
    base: &QuestionCorpus,
    target: &QuestionCorpus,
    scope: PriorScope,
) -> PredictionSet {
    QuestionPriorPredictor::from_base(base, scope)
        .predict(target)
        .expect("prior prediction is infallible")
}

pub fn knob_predictor(
    corpus: &QuestionCorpus,
    knob: BiasKnob,
    scope: PriorScope,
) -> Result<PredictionSet> {
    KnobPredictor::new(knob, scope).predict(corpus)
}

/// Everything a registered factory may draw on.
#[derive(Debug, Clone, Default)]
pub struct PredictorParams {
    pub beta: f64,
    pub seed: u64,
    pub scope: PriorScope,
    /// Corpus the prior is estimated from; the target itself when absent.
    pub base: Option<Arc<QuestionCorpus>>,
}

pub type PredictorFactory = fn(&PredictorParams) -> Result<Box<dyn Predictor>>;

struct Registration {
    description: &'static str,
    factory: PredictorFactory,
}

/// Name-indexed table of predictor factories.
#[derive(Default)]
pub struct PredictorRegistry {
    entries: BTreeMap<&'static str, Registration>,
}

impl PredictorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::new();
        registry.register(
            "gold",
            "returns the gold answer (perfect predictor)",
            |_| Ok(Box::new(GoldPredictor)),
        );
        registry.register(
            "prior",
            "returns the modal answer of the question's group in the base corpus",
            |p| {
                Ok(Box::new(match &p.base {
                    Some(base) => QuestionPriorPredictor::from_base(base, p.scope),
                    None => QuestionPriorPredictor::self_prior(p.scope),
                }))
            },
        );
        registry.register(
            "knob",
            "returns the group prior with probability beta, the gold answer otherwise",
            |p| {
                let predictor = KnobPredictor::new(BiasKnob::new(p.beta, p.seed)?, p.scope);
                Ok(Box::new(match &p.base {
                    Some(base) => predictor.with_base(base),
                    None => predictor,
                }))
            },
        );
        registry
    }

    /// Adds or replaces a factory under `name`.
    pub fn register(
        &mut self,
        name: &'static str,
        description: &'static str,
        factory: PredictorFactory,
    ) {
        self.entries.insert(
            name,
            Registration {
                description,
                factory,
            },
        );
    }

    pub fn create(&self, name: &str, params: &PredictorParams) -> Result<Box<dyn Predictor>> {
        let entry = self.entries.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown predictor `{name}` (available: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        (entry.factory)(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn describe(&self) -> impl Iterator<Item = (&'static str, &'static str)> + '_ {
        self.entries.iter().map(|(k, r)| (*k, r.description))
    }
}
