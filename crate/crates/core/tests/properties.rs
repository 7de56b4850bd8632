use std::collections::BTreeSet;

use oodbench::corpus::{read_question_corpus, PredictionSet, QuestionRecord};
use oodbench::metrics::{
    breakdown_by_type, confusion_in, delta, evaluate, reasoning_labels_for, sweep_benchmark,
};
use oodbench::simulate::{question_prior_predictor, GoldPredictor, Predictor, PriorScope};
use oodbench::split::{
    answer_class, build_ood_split, rareness_label, saturating_alpha, AnswerClass, BuildConfig,
    Rareness, RarenessThresholds,
};
use oodbench::stats::{
    filter_imbalanced_groups, normalized_entropy, shannon_entropy, AnswerDistribution,
};
use oodbench::synth::{generate_synthetic_corpus, SynthConfig};
use oodbench::{Decimal, QuestionCorpus};
use proptest::prelude::*;

const TYPES: [&str; 3] = ["query", "verify", "choose"];

fn corpus_from(groups: &[Vec<u64>], prefix: &str) -> QuestionCorpus {
    let mut records = Vec::new();
    let mut n = 0u32;
    for (g, counts) in groups.iter().enumerate() {
        for (i, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                records.push(
                    QuestionRecord::new(format!("{prefix}{n:05}"), &format!("ans{i}"))
                        .with_local_group(format!("{prefix}group{g:03}"))
                        .with_types(TYPES[n as usize % 3], "attr"),
                );
                n += 1;
            }
        }
    }
    QuestionCorpus::new("prop", records).unwrap()
}

fn groups_strategy() -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(1u64..40, 1..7), 1..12)
}

fn decimal_strategy() -> impl Strategy<Value = Decimal> {
    (1u64..600).prop_map(|n| Decimal::from_parts(n, 2).unwrap())
}

/// Per question: 0 gold, 1 another group answer, 2 unseen answer, 3 missing.
fn predictions(corpus: &QuestionCorpus, choices: &[u8]) -> PredictionSet {
    let mut set = PredictionSet::new("random");
    for (i, r) in corpus.records().enumerate() {
        match choices[i % choices.len()] % 4 {
            0 => {
                set.insert(r.qid.clone(), &r.answer);
            }
            1 => {
                set.insert(r.qid.clone(), "ans0");
            }
            2 => {
                set.insert(r.qid.clone(), "never-seen");
            }
            _ => {}
        }
    }
    set
}

fn oracle_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let sum: f64 = counts.iter().map(|&c| c as f64 * (c as f64).ln()).sum();
    (n as f64).ln() - sum / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalized_entropy_bounds(counts in prop::collection::vec(1u64..50, 2..10)) {
        let d = AnswerDistribution::from_counts("g", counts.iter().enumerate().map(|(i, &c)| (i.to_string(), c))).unwrap();
        let score = normalized_entropy(&d).unwrap();
        prop_assert!((0.0..=1.0).contains(&score.normalized));
        let uniform = counts.iter().all(|&c| c == counts[0]);
        prop_assert_eq!(score.normalized == 1.0, uniform);
        prop_assert!((score.entropy_nats - oracle_entropy(&counts)).abs() < 1e-9);
    }

    #[test]
    fn entropy_permutation_invariant(counts in prop::collection::vec(1u64..50, 1..10), rot in 0usize..10) {
        let a = AnswerDistribution::from_counts("g", counts.iter().enumerate().map(|(i, &c)| (format!("{i}"), c))).unwrap();
        let n = counts.len();
        let b = AnswerDistribution::from_counts("g", counts.iter().enumerate().map(|(i, &c)| (format!("{}", (i + rot) % n), c))).unwrap();
        prop_assert!((shannon_entropy(&a) - shannon_entropy(&b)).abs() < 1e-12);
    }

    #[test]
    fn moving_mass_to_the_majority_lowers_entropy(counts in prop::collection::vec(1u64..50, 2..8), pick in any::<prop::sample::Index>()) {
        let major = (0..counts.len()).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).unwrap();
        let minor = pick.index(counts.len());
        prop_assume!(minor != major && counts[minor] >= 2);
        let mut moved = counts.clone();
        moved[minor] -= 1;
        moved[major] += 1;
        let mk = |c: &[u64]| AnswerDistribution::from_counts("g", c.iter().enumerate().map(|(i, &c)| (i.to_string(), c))).unwrap();
        let before = normalized_entropy(&mk(&counts)).unwrap().normalized;
        let after = normalized_entropy(&mk(&moved)).unwrap().normalized;
        prop_assert!(after < before, "{counts:?} -> {moved:?}: {before} vs {after}");
        prop_assert!(oracle_entropy(&moved) < oracle_entropy(&counts));
    }

    #[test]
    fn threshold_one_selects_all_non_uniform(groups in groups_strategy()) {
        let corpus = corpus_from(&groups, "t");
        let selected = filter_imbalanced_groups(&corpus, 1.0);
        let expected: BTreeSet<String> = groups.iter().enumerate()
            .filter(|(_, c)| c.len() >= 2 && c.iter().any(|&x| x != c[0]))
            .map(|(g, _)| format!("tgroup{g:03}"))
            .collect();
        prop_assert_eq!(selected, expected);
    }

    #[test]
    fn partition_and_alpha_monotonicity(groups in groups_strategy(), a1 in decimal_strategy(), a2 in decimal_strategy()) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let corpus = corpus_from(&groups, "p");
        let bench = build_ood_split(&corpus, &BuildConfig::default().with_alpha(lo), None).unwrap();
        let head = bench.head_qids();
        let tail = bench.tail_qids();
        prop_assert!(head.is_disjoint(&tail));
        let selected: BTreeSet<&str> = bench.groups.keys()
            .flat_map(|g| corpus.group(g).unwrap().iter().map(String::as_str))
            .collect();
        let union: BTreeSet<&str> = head.union(&tail).copied().collect();
        prop_assert_eq!(union, selected);
        let wider = bench.relabeled(hi);
        prop_assert!(tail.is_subset(&wider.tail_qids()));
        // alpha >= 1 leaves at least one tail question in every group.
        if lo >= Decimal::from_parts(1, 0).unwrap() {
            let counts = bench.group_counts();
            prop_assert!(counts.values().all(|c| c.tail >= 1));
        }
    }

    #[test]
    fn alpha_extremes(groups in groups_strategy()) {
        let corpus = corpus_from(&groups, "e");
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        let all = bench.relabeled(saturating_alpha(bench.groups.values().map(|g| &g.distribution)));
        prop_assert_eq!(all.tail_qids().len(), bench.len());
        for (key, group) in &bench.groups {
            let d = &group.distribution;
            // Any alpha below min_count / mu leaves the group without tail.
            let hundredths = (d.min_count() * d.dimension() * 100).div_ceil(d.total());
            if let Some(below) = hundredths.checked_sub(1).filter(|&h| h > 0) {
                let below = Decimal::from_parts(below, 2).unwrap();
                prop_assert_eq!(bench.relabeled(below).group_counts()[key.as_str()].tail, 0);
            }
        }
    }

    #[test]
    fn three_way_refines_binary(counts in prop::collection::vec(0u64..40, 2..8), alpha in decimal_strategy(), low in decimal_strategy()) {
        let counts: Vec<u64> = counts.into_iter().map(|c| c + 1).collect();
        let d = AnswerDistribution::from_counts("g", counts.iter().enumerate().map(|(i, &c)| (i.to_string(), c))).unwrap();
        prop_assume!(low < alpha);
        let th = RarenessThresholds { low, high: alpha };
        for i in 0..=counts.len() {
            let a = i.to_string(); // i == len is an unseen answer
            let binary = answer_class(&d, &a, alpha);
            let three = rareness_label(&d, &a, th);
            prop_assert_eq!(binary == AnswerClass::Tail, three != Rareness::Head);
            if three == Rareness::Tail {
                prop_assert_eq!(binary, AnswerClass::Tail);
            }
        }
    }

    #[test]
    fn weighted_mean_identity(groups in groups_strategy(), choices in prop::collection::vec(any::<u8>(), 1..20)) {
        let corpus = corpus_from(&groups, "w");
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        prop_assume!(!bench.is_empty());
        let r = evaluate(&bench, &predictions(&corpus, &choices)).unwrap();
        prop_assert_eq!(r.n_all, r.n_head + r.n_tail);
        let lhs = r.acc_all.unwrap() * r.n_all as f64;
        let rhs = r.acc_head.unwrap_or(0.0) * r.n_head as f64 + r.acc_tail.unwrap_or(0.0) * r.n_tail as f64;
        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
        if let (Some(h), Some(t), Some(d)) = (r.acc_head, r.acc_tail, r.delta) {
            prop_assert_eq!(h > t, d > 0.0);
            prop_assert_eq!(d, delta(h, t).unwrap());
        }
    }

    #[test]
    fn sweep_invariants(groups in groups_strategy(), choices in prop::collection::vec(any::<u8>(), 1..20)) {
        let corpus = corpus_from(&groups, "s");
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        prop_assume!(!bench.is_empty());
        let preds = predictions(&corpus, &choices);
        let mut grid = oodbench::metrics::default_alpha_grid();
        let top = saturating_alpha(bench.groups.values().map(|g| &g.distribution));
        if top > *grid.last().unwrap() {
            grid.push(top);
        }
        let curve = sweep_benchmark(&bench, &preds, &grid).unwrap();
        prop_assert!(curve.points.windows(2).all(|w| w[0].n_tail <= w[1].n_tail));
        let last = curve.points.last().unwrap();
        let report = evaluate(&bench, &preds).unwrap();
        prop_assert_eq!(last.n_tail, report.n_all);
        prop_assert_eq!(last.acc_tail, report.acc_all);
        for p in &curve.points {
            if let Some(c) = p.confusion {
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
        let gold = GoldPredictor.predict(&corpus).unwrap();
        for &a in &grid {
            prop_assert!(confusion_in(&bench, &gold, a).rate().is_none_or(|c| c == 0.0));
        }
    }

    #[test]
    fn joint_matrix_conservation(groups in groups_strategy(), choices in prop::collection::vec(any::<u8>(), 1..20)) {
        let corpus = corpus_from(&groups, "j");
        let bench = build_ood_split(&corpus, &BuildConfig::default(), None).unwrap();
        let report = reasoning_labels_for(&bench, &predictions(&corpus, &choices));
        let cells: u64 = report.joint.iter().flatten().flatten().sum();
        prop_assert_eq!(cells, bench.len() as u64);
        prop_assert_eq!(report.counts.total(), bench.len() as u64);
        for p in Rareness::ALL {
            for g in Rareness::ALL {
                if p != g {
                    prop_assert_eq!(report.cell(p, g, true), 0);
                }
            }
        }
        let by_type = breakdown_by_type(&report, &corpus);
        prop_assert_eq!(by_type.values().map(|b| b.questions).sum::<u64>(), bench.len() as u64);
    }

    #[test]
    fn metrics_invariant_under_relabeling(groups in groups_strategy(), choices in prop::collection::vec(any::<u8>(), 1..20)) {
        let a = corpus_from(&groups, "a");
        let b = corpus_from(&groups, "z");
        let ba = build_ood_split(&a, &BuildConfig::default(), None).unwrap();
        let bb = build_ood_split(&b, &BuildConfig::default(), None).unwrap();
        prop_assume!(!ba.is_empty());
        let ra = evaluate(&ba, &predictions(&a, &choices)).unwrap();
        let rb = evaluate(&bb, &predictions(&b, &choices)).unwrap();
        prop_assert_eq!((ra.n_tail, ra.correct_tail, ra.n_head, ra.correct_head), (rb.n_tail, rb.correct_tail, rb.n_head, rb.correct_head));
        let la = reasoning_labels_for(&ba, &predictions(&a, &choices));
        let lb = reasoning_labels_for(&bb, &predictions(&b, &choices));
        prop_assert_eq!(la.joint, lb.joint);
    }

    #[test]
    fn corpus_round_trip(groups in groups_strategy()) {
        let corpus = corpus_from(&groups, "r");
        let mut buf = Vec::new();
        corpus.to_writer(&mut buf).unwrap();
        let (back, report) = read_question_corpus(buf.as_slice(), "prop").unwrap();
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(report.loaded, corpus.len());
        let (again, _) = read_question_corpus(buf.as_slice(), "prop").unwrap();
        prop_assert!(again.groups().eq(back.groups()));
    }

    #[test]
    fn synthetic_sizes_and_ids(seed in any::<u64>(), n_groups in 1u32..30, skew in 0.05f64..=1.0) {
        let corpus = generate_synthetic_corpus(&SynthConfig {
            n_groups,
            answers_per_group: 1..=8,
            skew,
            questions_per_group: 1..=50,
            seed,
        }).unwrap();
        let grouped: usize = corpus.groups().map(|(_, q)| q.len()).sum();
        prop_assert_eq!(grouped, corpus.len());
        prop_assert_eq!(corpus.group_count(), n_groups as usize);
        let ids: BTreeSet<&str> = corpus.records().map(|r| r.qid.as_str()).collect();
        prop_assert_eq!(ids.len(), corpus.len());
    }

    #[test]
    fn prior_tie_break_stable_under_reordering(groups in groups_strategy()) {
        let corpus = corpus_from(&groups, "o");
        // Same records, inserted in reverse order.
        let reversed = QuestionCorpus::new("prop", corpus.records().rev().cloned().collect::<Vec<_>>()).unwrap();
        let a = question_prior_predictor(&corpus, &corpus, PriorScope::Local);
        let b = question_prior_predictor(&reversed, &reversed, PriorScope::Local);
        prop_assert!(a.iter().eq(b.iter()));
    }
}
