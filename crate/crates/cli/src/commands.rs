use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use oodbench::corpus::{parse_predictions, parse_question_corpus};
use oodbench::metrics::{
    aggregate, breakdown_by_type, default_alpha_grid, delta, evaluate, reasoning_labels_for,
    relative_difference, sweep_benchmark, write_breakdown_csv, AggregateReport, MeanStd,
};
use oodbench::simulate::{PredictorParams, PredictorRegistry, PriorScope};
use oodbench::split::{build_ood_split, diff_benchmarks, BaseDistribution, BuildConfig};
use oodbench::stats::{group_stats, type_histogram, write_stats_csv};
use oodbench::synth::{generate_synthetic_corpus, SynthConfig};
use oodbench::MetricsReport;
use oodbench::{Error, OodBenchmark, PredictionSet, QuestionCorpus, Result};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    BenchSource, BuildArgs, Command, CorpusArgs, EvalArgs, Format, LabelsArgs, PriorArg, StatsArgs,
    SweepArgs, SynthArgs, SynthPredsArgs, TableMode,
};

pub fn run(command: Command, format: Option<Format>) -> Result<()> {
    let or = |default| format.unwrap_or(default);
    match command {
        Command::Stats(a) => stats(a, or(Format::Csv)),
        Command::Build(a) => build(a, or(Format::Json)),
        Command::Eval(a) if a.table_mode.is_some() => eval(a, or(Format::Csv)),
        Command::Eval(a) => eval(a, or(Format::Json)),
        Command::Sweep(a) => sweep(a, or(Format::Csv)),
        Command::Labels(a) => labels(a, or(Format::Csv)),
        Command::Synth(a) => json_only(format, "synth").and_then(|_| synth(a)),
        Command::SynthPreds(a) => json_only(format, "synth-preds").and_then(|_| synth_preds(a)),
    }
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    match format {
        Some(Format::Csv) => Err(Error::Config(format!("{command} writes JSON only"))),
        _ => Ok(()),
    }
}

fn cell(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn to_value(value: &impl Serialize) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::Data(e.to_string()))
}

/// Destination for an artifact: a file when a path is given, stdout otherwise.
struct Sink {
    path: Option<PathBuf>,
    out: Box<dyn Write>,
}

impl Sink {
    fn open(path: Option<&Path>) -> Result<Sink> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink {
            path: path.map(Path::to_path_buf),
            out,
        })
    }

    fn write_with(mut self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        let path = self.path.clone().unwrap_or_else(|| "<stdout>".into());
        f(&mut self.out)
            .and_then(|_| self.out.flush())
            .map_err(|e| io_err(&path, e))
    }

    fn json(self, value: &impl Serialize) -> Result<()> {
        self.write_with(|w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
            writeln!(w)
        })
    }
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// CSV artifacts cannot carry their configuration inline, so it goes to a
/// `<file>.meta.json` sidecar next to them.
fn write_sidecar(csv_path: Option<&Path>, meta: serde_json::Value) -> Result<()> {
    let Some(path) = csv_path else { return Ok(()) };
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    Sink::open(Some(Path::new(&name)))?.json(&meta)
}

fn split_name(path: &Path, explicit: Option<&str>) -> String {
    explicit.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into())
    })
}

fn load_corpus(path: &Path, split: Option<&str>) -> Result<QuestionCorpus> {
    let (corpus, report) = parse_question_corpus(path, &split_name(path, split))?;
    log::info!("{}: {report}", path.display());
    Ok(corpus)
}

fn load_preds(path: &Path) -> Result<PredictionSet> {
    let (preds, report) = parse_predictions(path)?;
    log::info!("{}: {report}", path.display());
    Ok(preds)
}

fn load_base(config: &BuildConfig, base_corpus: Option<&Path>) -> Result<Option<QuestionCorpus>> {
    match (&config.base, base_corpus) {
        (BaseDistribution::SelfSplit, Some(_)) => {
            log::warn!("--base-corpus is ignored with --base self");
            Ok(None)
        }
        (BaseDistribution::SelfSplit, None) => Ok(None),
        (_, Some(path)) => load_corpus(path, None).map(Some),
        (_, None) => Err(Error::Config("--base-corpus is required".into())),
    }
}

fn build_from(corpus: &CorpusArgs, options: &crate::args::BuildOptions) -> Result<OodBenchmark> {
    let config = options.config()?;
    let base = load_base(&config, options.base_corpus.as_deref())?;
    let corpus = load_corpus(&corpus.corpus, corpus.split.as_deref())?;
    build_ood_split(&corpus, &config, base.as_ref())
}

/// Loads `--bench`, or builds from `--corpus`. The corpus is returned too
/// when it was read, for callers that need question types.
fn resolve_bench(source: &BenchSource) -> Result<(OodBenchmark, Option<QuestionCorpus>)> {
    match (&source.bench, &source.corpus) {
        (Some(path), _) => Ok((OodBenchmark::read_json(path)?, None)),
        (None, Some(path)) => {
            let config = source.options.config()?;
            let base = load_base(&config, source.options.base_corpus.as_deref())?;
            let corpus = load_corpus(path, None)?;
            let bench = build_ood_split(&corpus, &config, base.as_ref())?;
            Ok((bench, Some(corpus)))
        }
        (None, None) => Err(Error::Config(
            "one of --bench or --corpus is required".into(),
        )),
    }
}

fn stats(args: StatsArgs, format: Format) -> Result<()> {
    if !(args.entropy_threshold > 0.0 && args.entropy_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "--entropy-threshold must lie in (0, 1], got {}",
            args.entropy_threshold
        )));
    }
    let corpus = load_corpus(&args.corpus.corpus, args.corpus.split.as_deref())?;
    let rows = group_stats(&corpus, args.entropy_threshold);
    let meta = json!({"entropy_threshold": args.entropy_threshold, "split": corpus.split_name()});
    match format {
        Format::Csv => {
            Sink::open(args.out.as_deref())?.write_with(|w| write_stats_csv(&rows, w))?;
            write_sidecar(args.out.as_deref(), meta)?;
        }
        Format::Json => {
            Sink::open(args.out.as_deref())?.json(&json!({"config": meta, "groups": rows}))?
        }
    }
    if let Some(path) = &args.types_out {
        let selected: Vec<&str> = rows
            .iter()
            .filter(|r| r.selected)
            .flat_map(|r| corpus.group(&r.group_key).unwrap_or_default())
            .map(String::as_str)
            .collect();
        let all = type_histogram(&corpus, corpus.records().map(|r| r.qid.as_str()));
        let sel = type_histogram(&corpus, selected);
        Sink::open(Some(path))?.json(&json!({
            "entropy_threshold": args.entropy_threshold,
            "split": corpus.split_name(),
            "all": all,
            "selected": sel,
        }))?;
    }
    Ok(())
}

fn build(args: BuildArgs, format: Format) -> Result<()> {
    let bench = build_from(&args.corpus, &args.options)?;
    bench.write_json(&args.out)?;
    let summary = bench.summary();
    eprintln!(
        "{}: {} questions in {} groups ({} head, {} tail)",
        args.out.display(),
        summary.questions,
        summary.groups,
        summary.head,
        summary.tail
    );

    let mut report = json!({ "summary": summary, "notes": bench.notes });
    if let Some(expected) = &args.expect_counts {
        if expected.len() != 4 {
            return Err(Error::Config(
                "--expect-counts takes exactly four values: questions,groups,head,tail".into(),
            ));
        }
        let actual = [
            summary.questions,
            summary.groups,
            summary.head,
            summary.tail,
        ];
        let names = ["questions", "groups", "head", "tail"];
        let mut divergence = serde_json::Map::new();
        for ((name, &e), &a) in names.iter().zip(expected).zip(&actual) {
            let rel = relative_difference(e as f64, a as f64);
            if a != e {
                log::warn!("{name}: expected {e}, got {a}");
            }
            divergence.insert(
                name.to_string(),
                json!({"expected": e, "actual": a, "relative_difference": rel}),
            );
        }
        report["expected"] = divergence.into();
    }
    if let Some(path) = &args.reference {
        let reference = OodBenchmark::read_json(path)?;
        let diff = diff_benchmarks(&bench, &reference);
        if !diff.is_empty() {
            log::warn!(
                "differs from {}: {} groups only here, {} only there, {} count mismatches",
                path.display(),
                diff.only_ours.len(),
                diff.only_reference.len(),
                diff.count_mismatches.len()
            );
        }
        report["reference_diff"] = to_value(&diff)?;
    }
    match format {
        Format::Json => Sink::open(None)?.json(&report),
        Format::Csv => Sink::open(None)?.write_with(|w| {
            writeln!(
                w,
                "questions,groups,head,tail,groups_with_head,groups_with_tail"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                summary.questions,
                summary.groups,
                summary.head,
                summary.tail,
                summary.groups_with_head,
                summary.groups_with_tail
            )
        }),
    }
}

fn eval(args: EvalArgs, format: Format) -> Result<()> {
    if let Some(mode) = args.table_mode {
        return table(mode, &args.pairs, args.out.as_deref(), format);
    }
    let bench_path = args
        .bench
        .as_deref()
        .ok_or_else(|| Error::Config("--bench is required".into()))?;
    let bench = OodBenchmark::read_json(bench_path)?;
    let mut reports = Vec::with_capacity(args.preds.len());
    for path in &args.preds {
        let report = evaluate(&bench, &load_preds(path)?)?;
        if report.missing_predictions > 0 {
            log::warn!(
                "{}: {} benchmark questions have no prediction and count as wrong",
                path.display(),
                report.missing_predictions
            );
        }
        reports.push(report);
    }
    let summary = (reports.len() > 1).then(|| aggregate(&reports));
    if format == Format::Csv {
        Sink::open(args.out.as_deref())?
            .write_with(|w| write_reports_csv(&reports, summary.as_ref(), w))?;
        return write_sidecar(
            args.out.as_deref(),
            json!({"config": bench.config, "split": bench.split_name}),
        );
    }
    let mut out = json!({
        "config": bench.config,
        "split": bench.split_name,
        "reports": reports,
    });
    if let Some(agg) = summary {
        out["aggregate"] = to_value(&agg)?;
    }
    Sink::open(args.out.as_deref())?.json(&out)
}

/// One row per run, then `mean` and `std` rows when several runs were scored.
fn write_reports_csv(
    reports: &[MetricsReport],
    summary: Option<&AggregateReport>,
    w: &mut dyn Write,
) -> io::Result<()> {
    writeln!(
        w,
        "source,n_all,n_head,n_tail,acc_all,acc_head,acc_tail,delta,missing_predictions"
    )?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.source_label,
            r.n_all,
            r.n_head,
            r.n_tail,
            cell(r.acc_all),
            cell(r.acc_head),
            cell(r.acc_tail),
            cell(r.delta),
            r.missing_predictions
        )?;
    }
    let Some(agg) = summary else { return Ok(()) };
    for (name, use_mean) in [("mean", true), ("std", false)] {
        let f = |m: &Option<MeanStd>| cell(m.map(|m| if use_mean { m.mean } else { m.std }));
        writeln!(
            w,
            "{name},,,,{},{},{},{},",
            f(&agg.acc_all),
            f(&agg.acc_head),
            f(&agg.acc_tail),
            f(&agg.delta)
        )?;
    }
    Ok(())
}

fn parse_pair(pair: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("malformed pair `{pair}` (expected a:b)"));
    let (a, b) = pair.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn table(mode: TableMode, pairs: &[String], out: Option<&Path>, format: Format) -> Result<()> {
    let parsed = pairs
        .iter()
        .map(|p| parse_pair(p))
        .collect::<Result<Vec<_>>>()?;
    if format == Format::Json {
        let rows: Vec<_> = parsed
            .iter()
            .map(|&(a, b)| match mode {
                TableMode::Delta => json!({"acc_head": a, "acc_tail": b, "delta": delta(a, b)}),
                TableMode::Relative => json!({
                    "reference": a,
                    "value": b,
                    "relative_difference": relative_difference(a, b),
                }),
            })
            .collect();
        return Sink::open(out)?.json(&rows);
    }
    Sink::open(out)?.write_with(|w| {
        match mode {
            TableMode::Delta => writeln!(w, "acc_head,acc_tail,delta")?,
            TableMode::Relative => writeln!(w, "reference,value,relative_difference")?,
        }
        for (a, b) in parsed {
            let value = match mode {
                TableMode::Delta => delta(a, b),
                TableMode::Relative => relative_difference(a, b),
            };
            let cell = value.map(|v| format!("{v:.4}")).unwrap_or_default();
            writeln!(w, "{a},{b},{cell}")?;
        }
        Ok(())
    })
}

fn sweep(args: SweepArgs, format: Format) -> Result<()> {
    let (bench, _) = resolve_bench(&args.source)?;
    let preds = load_preds(&args.preds)?;
    let alphas = if args.alphas.is_empty() {
        default_alpha_grid()
    } else {
        args.alphas
    };
    let curve = sweep_benchmark(&bench, &preds, &alphas)?;
    let meta = json!({"config": bench.config, "split": bench.split_name, "predictions": preds.source_label});
    match format {
        Format::Csv => {
            Sink::open(args.out.as_deref())?.write_with(|w| curve.write_csv(w))?;
            write_sidecar(args.out.as_deref(), meta)
        }
        Format::Json => {
            Sink::open(args.out.as_deref())?.json(&json!({"meta": meta, "curve": curve}))
        }
    }
}

fn labels(args: LabelsArgs, format: Format) -> Result<()> {
    let (bench, built_from) = resolve_bench(&args.source)?;
    let preds = load_preds(&args.preds)?;
    let report = reasoning_labels_for(&bench, &preds);
    let meta = json!({"config": bench.config, "split": bench.split_name, "predictions": preds.source_label});
    match format {
        Format::Csv => {
            Sink::open(args.out.as_deref())?.write_with(|w| report.write_matrix_csv(w))?;
            write_sidecar(args.out.as_deref(), meta)?;
        }
        Format::Json => Sink::open(args.out.as_deref())?.json(&json!({
            "meta": meta,
            "total": report.total,
            "counts": report.counts,
            "joint": report.joint,
        }))?,
    }

    let Some(types_out) = &args.types_out else {
        return Ok(());
    };
    let corpus = match (built_from, &args.types_corpus) {
        (_, Some(path)) => load_corpus(path, None)?,
        (Some(corpus), None) => corpus,
        (None, None) => {
            return Err(Error::Config(
                "--types-out with --bench needs --types-corpus for question types".into(),
            ))
        }
    };
    let breakdown = breakdown_by_type(&report, &corpus);
    for (ty, b) in &breakdown {
        if b.no_tail {
            log::warn!(
                "type `{ty}` has no tail question at alpha {}",
                bench.config.alpha
            );
        }
    }
    if types_out.extension().is_some_and(|e| e == "csv") {
        Sink::open(Some(types_out))?.write_with(|w| write_breakdown_csv(&breakdown, w))
    } else {
        Sink::open(Some(types_out))?.json(&json!({
            "config": bench.config,
            "counts": report.counts,
            "by_type": breakdown,
        }))
    }
}

fn parse_range(text: &str, flag: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let bad = || {
        Error::Config(format!(
            "{flag}: expected `min-max` or a number, got `{text}`"
        ))
    };
    let (lo, hi) = text.split_once('-').unwrap_or((text, text));
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn synth(args: SynthArgs) -> Result<()> {
    let config = SynthConfig {
        n_groups: args.groups,
        answers_per_group: parse_range(&args.answers, "--answers")?,
        skew: args.skew,
        questions_per_group: parse_range(&args.questions, "--questions")?,
        seed: args.seed,
    };
    let corpus = generate_synthetic_corpus(&config)?;
    corpus.write_json(&args.out)?;
    log::info!(
        "{}: {} questions in {} groups",
        args.out.display(),
        corpus.len(),
        corpus.group_count()
    );
    Ok(())
}

fn synth_preds(args: SynthPredsArgs) -> Result<()> {
    let registry = PredictorRegistry::with_builtins();
    let base = args
        .base
        .as_deref()
        .map(|p| load_corpus(p, None).map(Arc::new))
        .transpose()?;
    let params = PredictorParams {
        beta: args.beta,
        seed: args.seed,
        scope: match args.prior {
            PriorArg::Local => PriorScope::Local,
            PriorArg::Global => PriorScope::Global,
        },
        base,
    };
    let predictor = registry.create(&args.strategy, &params)?;
    let corpus = load_corpus(&args.corpus, None)?;
    let preds = predictor.predict(&corpus)?;
    preds.write_json(&args.out)
}
