//! Seeded synthetic corpora with a controllable per-group skew.
//!
//! Within a group, answer class `k` receives weight `skew^k`, and the
//! group's questions are split across classes in proportion to those
//! weights (largest remainder, one question minimum per class). `skew = 1`
//! therefore gives a uniform histogram and small skews a peaked one.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{QuestionCorpus, QuestionRecord};
use crate::error::{Error, Result};

pub const STRUCTURAL_TYPES: [&str; 5] = ["verify", "choose", "compare", "query", "logical"];
pub const SEMANTIC_TYPES: [&str; 5] = ["attr", "cat", "global", "obj", "rel"];

const ANSWER_WORDS: [&str; 24] = [
    "red", "blue", "green", "white", "black", "brown", "yellow", "pink", "gray", "orange",
    "purple", "wood", "metal", "glass", "left", "right", "yes", "no", "picture", "clock", "star",
    "shelf", "mirror", "poster",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_groups: u32,
    pub answers_per_group: RangeInclusive<u32>,
    /// Geometric decay ratio between consecutive answer classes, in (0, 1].
    pub skew: f64,
    pub questions_per_group: RangeInclusive<u32>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 {
            return Err(Error::Config("n_groups must be positive".into()));
        }
        for (name, range) in [
            ("answers_per_group", &self.answers_per_group),
            ("questions_per_group", &self.questions_per_group),
        ] {
            if range.is_empty() || *range.start() == 0 {
                return Err(Error::Config(format!(
                    "{name} must be a non-empty range of positive integers, got {}..={}",
                    range.start(),
                    range.end()
                )));
            }
        }
        if !(self.skew > 0.0 && self.skew <= 1.0) {
            return Err(Error::Config(format!(
                "skew must lie in (0, 1], got {}",
                self.skew
            )));
        }
        Ok(())
    }
}

/// Splits `n` items over classes with weights `skew^k` by largest remainder,
/// giving each class at least one item when `n >= classes`.
pub fn skewed_counts(n: u32, classes: u32, skew: f64) -> Vec<u32> {
    let classes = classes.min(n).max(1) as usize;
    // Repeated multiplication rather than `powi`: every step is a correctly
    // rounded IEEE operation, so counts are identical on every platform.
    let weights: Vec<f64> = std::iter::successors(Some(1.0f64), |w| Some(w * skew))
        .take(classes)
        .collect();
    let weight_sum: f64 = weights.iter().sum();
    let spare = n as usize - classes;
    let shares: Vec<f64> = weights
        .iter()
        .map(|w| w / weight_sum * spare as f64)
        .collect();
    let mut counts: Vec<u32> = shares.iter().map(|s| 1 + s.floor() as u32).collect();
    let assigned: u32 = counts.iter().sum();
    let mut order: Vec<usize> = (0..classes).collect();
    // Larger fractional part first; earlier (heavier) class on ties.
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().take((n - assigned) as usize) {
        counts[k] += 1;
    }
    counts
}

pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<QuestionCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = (config.n_groups.max(1) - 1).to_string().len();
    let mut records = Vec::new();
    let mut next_qid = 0u64;
    for g in 0..config.n_groups {
        let n_questions = rng.gen_range(config.questions_per_group.clone());
        let n_answers = rng.gen_range(config.answers_per_group.clone());
        let counts = skewed_counts(n_questions, n_answers, config.skew);
        let mut vocab: Vec<String> = if counts.len() <= ANSWER_WORDS.len() {
            ANSWER_WORDS.iter().map(|w| w.to_string()).collect()
        } else {
            (0..counts.len()).map(|i| format!("answer{i}")).collect()
        };
        vocab.shuffle(&mut rng);
        let group_key = format!("group{g:0width$}");
        let global_key = format!("family{}", g % 7);
        let mut answers: Vec<&str> = counts
            .iter()
            .zip(&vocab)
            .flat_map(|(&c, a)| std::iter::repeat_n(a.as_str(), c as usize))
            .collect();
        answers.shuffle(&mut rng);
        for answer in answers {
            let structural = STRUCTURAL_TYPES[rng.gen_range(0..STRUCTURAL_TYPES.len())];
            let semantic = SEMANTIC_TYPES[rng.gen_range(0..SEMANTIC_TYPES.len())];
            let qid = format!("s{next_qid:08}");
            next_qid += 1;
            records.push(
                QuestionRecord::new(qid, answer)
                    .with_text(format!("synthetic question about {group_key}"))
                    .with_image(format!("img{}", rng.gen_range(0..10_000u32)))
                    .with_local_group(group_key.clone())
                    .with_global_group(global_key.clone())
                    .with_types(structural, semantic),
            );
        }
    }
    QuestionCorpus::new(format!("synthetic-{}", config.seed), records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::answer_distribution;

    fn config(skew: f64) -> SynthConfig {
        SynthConfig {
            n_groups: 1,
            answers_per_group: 4..=4,
            skew,
            questions_per_group: 100..=100,
            seed: 7,
        }
    }

    #[test]
    fn uniform_skew() {
        let corpus = generate_synthetic_corpus(&config(1.0)).unwrap();
        let (key, _) = corpus.groups().next().unwrap();
        let dist = answer_distribution(&corpus, key).unwrap();
        assert_eq!(dist.dimension(), 4);
        assert!(dist.counts().values().all(|&c| c == 25));
    }

    #[test]
    fn peaked_skew_exceeds_head_threshold() {
        let corpus = generate_synthetic_corpus(&config(0.25)).unwrap();
        let (key, _) = corpus.groups().next().unwrap();
        let dist = answer_distribution(&corpus, key).unwrap();
        // 1.2 * mean = 1.2 * 100 / 4 = 30
        assert!(dist.max_count() * 10 > 12 * dist.total() / dist.dimension());
        assert!(dist.max_count() > 30);
    }

    #[test]
    fn seed_determinism() {
        let a = generate_synthetic_corpus(&config(0.25)).unwrap();
        let b = generate_synthetic_corpus(&config(0.25)).unwrap();
        let (mut ja, mut jb) = (Vec::new(), Vec::new());
        a.to_writer(&mut ja).unwrap();
        b.to_writer(&mut jb).unwrap();
        assert_eq!(ja, jb);
        let mut other = config(0.25);
        other.seed = 8;
        let c = generate_synthetic_corpus(&other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_configs_rejected() {
        let mut c = config(0.5);
        #[allow(clippy::reversed_empty_ranges)]
        {
            c.answers_per_group = 5..=4;
        }
        assert!(generate_synthetic_corpus(&c).unwrap_err().is_config());
        let mut c = config(0.5);
        c.questions_per_group = 0..=0;
        assert!(generate_synthetic_corpus(&c).is_err());
        assert!(generate_synthetic_corpus(&config(0.0)).is_err());
        assert!(generate_synthetic_corpus(&config(1.5)).is_err());
        let mut c = config(0.5);
        c.n_groups = 0;
        assert!(generate_synthetic_corpus(&c).is_err());
    }

    #[test]
    fn skewed_counts_sum_and_floor() {
        for n in 1..60 {
            for classes in 1..8 {
                for skew in [0.1, 0.5, 1.0] {
                    let counts = skewed_counts(n, classes, skew);
                    assert_eq!(counts.iter().sum::<u32>(), n);
                    assert!(counts.iter().all(|&c| c >= 1));
                    assert_eq!(counts.len() as u32, classes.min(n));
                }
            }
        }
    }
}
