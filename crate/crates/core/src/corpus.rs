//! Annotation corpora and prediction files.
//!
//! Corpus files are a single JSON object `qid -> record`. The top-level
//! object is walked entry by entry so only one record is materialized at a
//! time; the full GQA train split does not fit comfortably otherwise.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::de::{DeserializeSeed, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// Canonical form used for every answer comparison: surrounding whitespace
/// trimmed, lowercased.
pub fn normalize_answer(answer: &str) -> String {
    answer.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRecord {
    pub qid: String,
    pub text: String,
    /// Gold answer, already normalized.
    pub answer: String,
    pub image_id: String,
    pub local_group: Option<String>,
    pub global_group: Option<String>,
    pub structural_type: String,
    pub semantic_type: String,
}

impl QuestionRecord {
    pub fn new(qid: impl Into<String>, answer: &str) -> Self {
        QuestionRecord {
            qid: qid.into(),
            text: String::new(),
            answer: normalize_answer(answer),
            image_id: String::new(),
            local_group: None,
            global_group: None,
            structural_type: String::new(),
            semantic_type: String::new(),
        }
    }

    pub fn with_local_group(mut self, group: impl Into<String>) -> Self {
        self.local_group = Some(group.into());
        self
    }

    pub fn with_global_group(mut self, group: impl Into<String>) -> Self {
        self.global_group = Some(group.into());
        self
    }

    pub fn with_types(
        mut self,
        structural: impl Into<String>,
        semantic: impl Into<String>,
    ) -> Self {
        self.structural_type = structural.into();
        self.semantic_type = semantic.into();
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    pub fn with_image(mut self, image_id: impl Into<String>) -> Self {
        self.image_id = image_id.into();
        self
    }
}

/// An immutable, key-ordered set of question records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionCorpus {
    split_name: String,
    records: BTreeMap<String, QuestionRecord>,
    group_index: BTreeMap<String, Vec<String>>,
}

impl QuestionCorpus {
    pub fn new(
        split_name: impl Into<String>,
        records: impl IntoIterator<Item = QuestionRecord>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for record in records {
            validate_record(&record)?;
            match map.entry(record.qid.clone()) {
                Entry::Occupied(_) => {
                    return Err(Error::Data(format!("duplicate qid `{}`", record.qid)));
                }
                Entry::Vacant(slot) => {
                    slot.insert(record);
                }
            }
        }
        Ok(Self::from_map(split_name.into(), map))
    }

    fn from_map(split_name: String, records: BTreeMap<String, QuestionRecord>) -> Self {
        let mut group_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        // `records` iterates in qid order, so every member list is sorted.
        for record in records.values() {
            if let Some(group) = &record.local_group {
                group_index
                    .entry(group.clone())
                    .or_default()
                    .push(record.qid.clone());
            }
        }
        QuestionCorpus {
            split_name,
            records,
            group_index,
        }
    }

    pub fn split_name(&self) -> &str {
        &self.split_name
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, qid: &str) -> Option<&QuestionRecord> {
        self.records.get(qid)
    }

    /// Records in qid order.
    pub fn records(&self) -> impl DoubleEndedIterator<Item = &QuestionRecord> + ExactSizeIterator {
        self.records.values()
    }

    /// Local groups in key order with their (sorted) member qids.
    pub fn groups(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.group_index
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn group(&self, key: &str) -> Option<&[String]> {
        self.group_index.get(key).map(Vec::as_slice)
    }

    pub fn group_count(&self) -> usize {
        self.group_index.len()
    }

    pub fn groupless_count(&self) -> usize {
        self.records
            .values()
            .filter(|r| r.local_group.is_none())
            .count()
    }

    pub fn image_count(&self) -> usize {
        self.records
            .values()
            .map(|r| r.image_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Returns a corpus restricted to `qids` (unknown ids are ignored).
    pub fn subset<'a>(&self, qids: impl IntoIterator<Item = &'a str>) -> QuestionCorpus {
        let records = qids
            .into_iter()
            .filter_map(|q| self.records.get(q))
            .map(|r| (r.qid.clone(), r.clone()))
            .collect();
        Self::from_map(self.split_name.clone(), records)
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
        serde_json::to_writer(writer, self).map_err(io::Error::other)
    }
}

fn validate_record(record: &QuestionRecord) -> Result<()> {
    if record.qid.is_empty() {
        return Err(Error::Data("record with empty qid".into()));
    }
    if record.answer.is_empty() {
        return Err(Error::Data(format!(
            "record `{}` has an empty answer",
            record.qid
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct WireGroups<'a> {
    local: Option<&'a str>,
    global: Option<&'a str>,
}

#[derive(Serialize)]
struct WireTypes<'a> {
    structural: &'a str,
    semantic: &'a str,
}

#[derive(Serialize)]
struct WireRecord<'a> {
    question: &'a str,
    answer: &'a str,
    #[serde(rename = "imageId")]
    image_id: &'a str,
    groups: WireGroups<'a>,
    types: WireTypes<'a>,
}

impl<'a> From<&'a QuestionRecord> for WireRecord<'a> {
    fn from(r: &'a QuestionRecord) -> Self {
        WireRecord {
            question: &r.text,
            answer: &r.answer,
            image_id: &r.image_id,
            groups: WireGroups {
                local: r.local_group.as_deref(),
                global: r.global_group.as_deref(),
            },
            types: WireTypes {
                structural: &r.structural_type,
                semantic: &r.semantic_type,
            },
        }
    }
}

impl Serialize for QuestionCorpus {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.records.len()))?;
        for (qid, record) in &self.records {
            map.serialize_entry(qid, &WireRecord::from(record))?;
        }
        map.end()
    }
}

/// Tally of what an ingest kept and dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub loaded: usize,
    pub skipped: usize,
    pub groupless: usize,
    pub duplicates: usize,
    pub warnings: Vec<String>,
}

impl IngestReport {
    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "loaded {}, skipped {}, groupless {}, duplicates {}",
            self.loaded, self.skipped, self.groupless, self.duplicates
        )
    }
}

/// Byte counter sitting under the JSON reader. serde_json pulls input one
/// byte at a time, so the count is the exact position of the failure.
struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.offset += n as u64;
        Ok(n)
    }
}

pub fn parse_question_corpus(
    path: impl AsRef<Path>,
    split_name: &str,
) -> Result<(QuestionCorpus, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_question_corpus(BufReader::new(file), split_name).map_err(|e| with_path(e, path))
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse {
            offset, message, ..
        } => Error::Parse {
            path: path.to_path_buf(),
            offset,
            message,
        },
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Streaming corpus reader over any byte source.
pub fn read_question_corpus<R: Read>(
    reader: R,
    split_name: &str,
) -> Result<(QuestionCorpus, IngestReport)> {
    let mut sink = CorpusSink {
        records: BTreeMap::new(),
        report: IngestReport::default(),
    };
    stream_object(reader, |qid, value| sink.accept(qid, value))?;
    let mut report = sink.report;
    report.loaded = sink.records.len();
    let corpus = QuestionCorpus::from_map(split_name.to_string(), sink.records);
    report.groupless = corpus.groupless_count();
    if report.groupless > 0 {
        let n = report.groupless;
        report.warn(format!(
            "{n} record(s) carry no local group; they are kept but excluded from grouping"
        ));
    }
    Ok((corpus, report))
}

struct CorpusSink {
    records: BTreeMap<String, QuestionRecord>,
    report: IngestReport,
}

impl CorpusSink {
    fn accept(&mut self, qid: String, value: Value) {
        match record_from_value(&qid, &value) {
            Ok(record) => match self.records.entry(qid) {
                Entry::Occupied(slot) => {
                    self.report.duplicates += 1;
                    self.report.skipped += 1;
                    let qid = slot.key().clone();
                    self.report
                        .warn(format!("duplicate qid `{qid}`: keeping the first record"));
                }
                Entry::Vacant(slot) => {
                    slot.insert(record);
                }
            },
            Err(reason) => {
                self.report.skipped += 1;
                self.report
                    .warn(format!("record `{qid}` skipped: {reason}"));
            }
        }
    }
}

fn string_field<'a>(value: &'a Value, path: &[&str]) -> Option<&'a str> {
    path.iter()
        .try_fold(value, |v, key| v.get(key))
        .and_then(Value::as_str)
}

fn record_from_value(qid: &str, value: &Value) -> std::result::Result<QuestionRecord, String> {
    if qid.is_empty() {
        return Err("empty qid".into());
    }
    if !value.is_object() {
        return Err("record is not a JSON object".into());
    }
    let answer = match value.get("answer") {
        Some(Value::String(s)) => normalize_answer(s),
        Some(Value::Array(_)) => return Err("multiple gold answers are not supported".into()),
        Some(Value::Null) | None => return Err("missing `answer`".into()),
        Some(_) => return Err("`answer` is not a string".into()),
    };
    if answer.is_empty() {
        return Err("empty `answer`".into());
    }
    Ok(QuestionRecord {
        qid: qid.to_string(),
        text: string_field(value, &["question"])
            .unwrap_or_default()
            .to_string(),
        answer,
        image_id: string_field(value, &["imageId"])
            .unwrap_or_default()
            .to_string(),
        local_group: string_field(value, &["groups", "local"]).map(str::to_string),
        global_group: string_field(value, &["groups", "global"]).map(str::to_string),
        structural_type: string_field(value, &["types", "structural"])
            .unwrap_or_default()
            .to_string(),
        semantic_type: string_field(value, &["types", "semantic"])
            .unwrap_or_default()
            .to_string(),
    })
}

/// Walks a top-level JSON object, handing each `(key, value)` to `on_entry`
/// as soon as it is parsed. Duplicate keys are delivered as they appear.
fn stream_object<R: Read>(reader: R, on_entry: impl FnMut(String, Value)) -> Result<()> {
    let mut counting = CountingReader {
        inner: reader,
        offset: 0,
    };
    let outcome = {
        let mut de = serde_json::Deserializer::from_reader(&mut counting);
        EntryVisitor(on_entry)
            .deserialize(&mut de)
            .and_then(|_| de.end())
    };
    outcome.map_err(|err| Error::Parse {
        path: "<input>".into(),
        offset: counting.offset,
        message: err.to_string(),
    })
}

struct EntryVisitor<F>(F);

impl<'de, F: FnMut(String, Value)> DeserializeSeed<'de> for EntryVisitor<F> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(
        self,
        deserializer: D,
    ) -> std::result::Result<(), D::Error> {
        deserializer.deserialize_map(self)
    }
}

impl<'de, F: FnMut(String, Value)> Visitor<'de> for EntryVisitor<F> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON object keyed by question id")
    }

    fn visit_map<A: MapAccess<'de>>(mut self, mut map: A) -> std::result::Result<(), A::Error> {
        while let Some(key) = map.next_key::<String>()? {
            let value: Value = map.next_value()?;
            (self.0)(key, value);
        }
        Ok(())
    }
}

/// Mapping from qid to a (normalized) predicted answer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    pub source_label: String,
    entries: BTreeMap<String, String>,
}

impl PredictionSet {
    pub fn new(source_label: impl Into<String>) -> Self {
        PredictionSet {
            source_label: source_label.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Inserts a prediction, returning the previous answer for that qid.
    pub fn insert(&mut self, qid: impl Into<String>, answer: &str) -> Option<String> {
        self.entries.insert(qid.into(), normalize_answer(answer))
    }

    pub fn get(&self, qid: &str) -> Option<&str> {
        self.entries.get(qid).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Writes the object form `{"qid": "answer", ...}`.
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, &self.entries)
            .map_err(io::Error::other)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

impl<K: Into<String>, V: AsRef<str>> FromIterator<(K, V)> for PredictionSet {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut set = PredictionSet::default();
        for (k, v) in iter {
            set.insert(k, v.as_ref());
        }
        set
    }
}

#[derive(Deserialize)]
struct PredictionLine {
    #[serde(rename = "questionId")]
    question_id: Value,
    prediction: String,
}

fn qid_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PredictionFormat {
    Object,
    Lines,
    Array,
}

fn detect_prediction_format<R: BufRead>(reader: &mut R) -> io::Result<Option<PredictionFormat>> {
    let mut first_line = String::new();
    loop {
        first_line.clear();
        if reader.read_line(&mut first_line)? == 0 {
            return Ok(None);
        }
        if !first_line.trim().is_empty() {
            break;
        }
    }
    let trimmed = first_line.trim();
    if trimmed.starts_with('[') {
        return Ok(Some(PredictionFormat::Array));
    }
    // Both layouts start with `{`; a first line that is a complete
    // questionId/prediction object means JSON-lines.
    let is_line = serde_json::from_str::<PredictionLine>(trimmed).is_ok();
    Ok(Some(if is_line {
        PredictionFormat::Lines
    } else {
        PredictionFormat::Object
    }))
}

/// Reads a prediction file in either the object form or JSON-lines form.
/// A JSON array of `{"questionId", "prediction"}` objects (the layout GQA
/// tooling emits) is accepted too.
pub fn parse_predictions(path: impl AsRef<Path>) -> Result<(PredictionSet, IngestReport)> {
    let path = path.as_ref();
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let format = {
        let mut probe = BufReader::new(&mut file);
        detect_prediction_format(&mut probe).map_err(|e| Error::io(path, e))?
    };
    file.seek(SeekFrom::Start(0))
        .map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut set = PredictionSet::new(label);
    let mut report = IngestReport::default();
    let Some(format) = format else {
        report.warn(format!("{}: prediction file is empty", path.display()));
        return Ok((set, report));
    };
    read_predictions_as(reader, format, &mut set, &mut report).map_err(|e| with_path(e, path))?;
    report.loaded = set.len();
    Ok((set, report))
}

/// Same as [`parse_predictions`] over an in-memory or streamed source.
pub fn read_predictions<R: Read>(reader: R, label: &str) -> Result<(PredictionSet, IngestReport)> {
    let mut reader = BufReader::new(reader);
    let mut buffered = Vec::new();
    reader
        .read_to_end(&mut buffered)
        .map_err(|e| Error::io("<input>", e))?;
    let mut set = PredictionSet::new(label);
    let mut report = IngestReport::default();
    let format =
        detect_prediction_format(&mut buffered.as_slice()).map_err(|e| Error::io("<input>", e))?;
    let Some(format) = format else {
        report.warn("prediction input is empty".into());
        return Ok((set, report));
    };
    read_predictions_as(buffered.as_slice(), format, &mut set, &mut report)?;
    report.loaded = set.len();
    Ok((set, report))
}

fn read_predictions_as<R: BufRead>(
    reader: R,
    format: PredictionFormat,
    set: &mut PredictionSet,
    report: &mut IngestReport,
) -> Result<()> {
    let mut record = |qid: String, answer: &str, report: &mut IngestReport| {
        if set.insert(qid.clone(), answer).is_some() {
            report.duplicates += 1;
            report.warn(format!(
                "duplicate prediction for `{qid}`: last occurrence wins"
            ));
        }
    };
    match format {
        PredictionFormat::Lines => {
            let mut offset = 0u64;
            for line in reader.lines() {
                let line = line.map_err(|e| Error::io("<input>", e))?;
                let len = line.len() as u64 + 1;
                if !line.trim().is_empty() {
                    let parsed: PredictionLine =
                        serde_json::from_str(&line).map_err(|e| Error::Parse {
                            path: "<input>".into(),
                            offset: offset + e.column().saturating_sub(1) as u64,
                            message: e.to_string(),
                        })?;
                    match qid_string(&parsed.question_id) {
                        Some(qid) => record(qid, &parsed.prediction, report),
                        None => {
                            report.skipped += 1;
                            report.warn(format!("line at byte {offset}: invalid questionId"));
                        }
                    }
                }
                offset += len;
            }
        }
        PredictionFormat::Object => {
            stream_object(reader, |qid, answer| match answer.as_str() {
                Some(a) if !qid.is_empty() => record(qid, a, report),
                _ => {
                    report.skipped += 1;
                    report.warn(format!(
                        "prediction `{qid}` is not a non-empty string entry"
                    ));
                }
            })?;
        }
        PredictionFormat::Array => {
            let mut counting = CountingReader {
                inner: reader,
                offset: 0,
            };
            let parsed: std::result::Result<Vec<Value>, _> = {
                let mut de = serde_json::Deserializer::from_reader(&mut counting);
                Vec::<Value>::deserialize(&mut de).and_then(|v| de.end().map(|_| v))
            };
            let items = parsed.map_err(|e| Error::Parse {
                path: "<input>".into(),
                offset: counting.offset,
                message: e.to_string(),
            })?;
            for (i, item) in items.into_iter().enumerate() {
                match serde_json::from_value::<PredictionLine>(item) {
                    Ok(line) => match qid_string(&line.question_id) {
                        Some(qid) => record(qid, &line.prediction, report),
                        None => {
                            report.skipped += 1;
                            report.warn(format!("array item {i}: invalid questionId"));
                        }
                    },
                    Err(e) => {
                        report.skipped += 1;
                        report.warn(format!("array item {i}: {e}"));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_json(entries: &[(&str, &str)]) -> String {
        entries
            .iter()
            .map(|(qid, body)| format!("\"{qid}\": {body}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn rec(answer: &str, local: Option<&str>) -> String {
        let local = match local {
            Some(l) => format!("\"{l}\""),
            None => "null".into(),
        };
        format!(
            r#"{{"question":"What color is the rose?","answer":"{answer}","imageId":"img1",
               "groups":{{"local":{local},"global":"color"}},
               "types":{{"structural":"query","semantic":"attr"}},"extra":[1,2,3]}}"#
        )
    }

    #[test]
    fn two_records_one_group() {
        let body = corpus_json(&[
            ("q1", &rec("red", Some("color-rose"))),
            ("q2", &rec("Red ", Some("color-rose"))),
        ]);
        let (corpus, report) =
            read_question_corpus(format!("{{{body}}}").as_bytes(), "val").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.group_count(), 1);
        assert_eq!(corpus.group("color-rose").unwrap(), ["q1", "q2"]);
        assert_eq!(corpus.get("q2").unwrap().answer, "red");
        assert_eq!(report.loaded, 2);
        assert_eq!(report.skipped, 0);
        let q1 = corpus.get("q1").unwrap();
        assert_eq!(q1.structural_type, "query");
        assert_eq!(q1.global_group.as_deref(), Some("color"));
    }

    #[test]
    fn null_local_group_is_loaded_but_not_indexed() {
        let body = corpus_json(&[("q1", &rec("red", None)), ("q2", &rec("red", Some("g")))]);
        let (corpus, report) =
            read_question_corpus(format!("{{{body}}}").as_bytes(), "val").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.group_count(), 1);
        assert_eq!(report.groupless, 1);
        assert!(corpus
            .groups()
            .all(|(_, qids)| !qids.contains(&"q1".to_string())));
    }

    #[test]
    fn bad_records_are_skipped_and_tallied() {
        let body = corpus_json(&[
            ("q1", r#"{"question":"x"}"#),
            ("q2", r#"{"answer":["a","b"]}"#),
            ("q3", r#"{"answer":"  "}"#),
            ("q4", &rec("blue", Some("g"))),
            ("", &rec("blue", Some("g"))),
        ]);
        let (corpus, report) =
            read_question_corpus(format!("{{{body}}}").as_bytes(), "val").unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.skipped, 4);
        assert_eq!(report.warnings.len(), 4);
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("multiple gold answers")));
    }

    #[test]
    fn malformed_top_level_reports_offset() {
        let input = br#"{"q1": {"answer": "red"}, "q2": {"answer": "#;
        let err = read_question_corpus(&input[..], "val").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert!(offset >= 30, "offset {offset}"),
            other => panic!("unexpected {other:?}"),
        }
        let err = read_question_corpus(&b"[1, 2]"[..], "val").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 1, .. }), "{err:?}");
        let err = read_question_corpus(&b"{} trailing"[..], "val").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn duplicate_qid_in_corpus_keeps_first() {
        let input = format!(
            "{{\"q1\": {}, \"q1\": {}}}",
            rec("red", Some("g")),
            rec("blue", Some("g"))
        );
        let (corpus, report) = read_question_corpus(input.as_bytes(), "val").unwrap();
        assert_eq!(corpus.get("q1").unwrap().answer, "red");
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn constructor_rejects_invalid_records() {
        assert!(QuestionCorpus::new("x", [QuestionRecord::new("", "a")]).is_err());
        assert!(QuestionCorpus::new("x", [QuestionRecord::new("q", " ")]).is_err());
        assert!(QuestionCorpus::new(
            "x",
            [QuestionRecord::new("q", "a"), QuestionRecord::new("q", "b")]
        )
        .is_err());
    }

    #[test]
    fn predictions_object_form() {
        let (set, report) = read_predictions(&br#"{"q1":"red","q2":"Blue"}"#[..], "m").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get("q2"), Some("blue"));
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn predictions_duplicate_last_wins() {
        let (set, report) =
            read_predictions(&br#"{"q1":"red","q2":"blue","q1":"green"}"#[..], "m").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get("q1"), Some("green"));
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn predictions_json_lines_form() {
        let input = b"{\"questionId\": \"q1\", \"prediction\": \"red\"}\n\n{\"questionId\": 42, \"prediction\": \"no\"}\n{\"questionId\": \"q1\", \"prediction\": \"pink\"}\n";
        let (set, report) = read_predictions(&input[..], "m").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get("42"), Some("no"));
        assert_eq!(set.get("q1"), Some("pink"));
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn predictions_array_form() {
        let input = br#"[{"questionId": "q1", "prediction": "red"}, {"questionId": "q2", "prediction": "yes"}]"#;
        let (set, _) = read_predictions(&input[..], "m").unwrap();
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn empty_prediction_input_warns() {
        let (set, report) = read_predictions(&b"  \n "[..], "m").unwrap();
        assert!(set.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn corpus_export_round_trip() {
        let records = vec![
            QuestionRecord::new("q1", "red")
                .with_local_group("g")
                .with_global_group("color")
                .with_types("query", "attr")
                .with_text("What \"color\"?")
                .with_image("i1"),
            QuestionRecord::new("q2", "blue"),
        ];
        let corpus = QuestionCorpus::new("val", records).unwrap();
        let mut buf = Vec::new();
        corpus.to_writer(&mut buf).unwrap();
        let (back, _) = read_question_corpus(buf.as_slice(), "val").unwrap();
        assert_eq!(back, corpus);
    }
}
