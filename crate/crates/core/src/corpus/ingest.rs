use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{parse_date, Corpus, Document, DATE_FORMAT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(Self::Jsonl),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

/// Maps record fields onto [`Document`] fields. `label` and `date` are only
/// read when mapped; `source_tag` falls back to `default_source_tag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
    pub date: Option<String>,
    pub source_tag: Option<String>,
    pub default_source_tag: String,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            text: "text".into(),
            label: Some("label".into()),
            date: Some("date".into()),
            source_tag: None,
            default_source_tag: String::new(),
        }
    }
}

impl Schema {
    pub fn unlabeled_undated() -> Self {
        Self {
            label: None,
            date: None,
            ..Self::default()
        }
    }
}

fn record_error(line: usize, message: impl Into<String>) -> Error {
    Error::Record {
        line,
        message: message.into(),
    }
}

fn optional(value: Option<String>) -> Option<String> {
    value.filter(|v| !v.trim().is_empty())
}

fn build_document(
    line: usize,
    schema: &Schema,
    mut get: impl FnMut(&str) -> Option<Option<String>>,
) -> Result<Document> {
    let mut required = |field: &str| -> Result<Option<String>> {
        get(field).ok_or_else(|| record_error(line, format!("missing field `{field}`")))
    };
    let id = required(&schema.id)?
        .filter(|s| !s.is_empty())
        .ok_or_else(|| record_error(line, format!("empty id field `{}`", schema.id)))?;
    let text = required(&schema.text)?.unwrap_or_default();
    let label = match &schema.label {
        Some(f) => optional(required(f)?),
        None => None,
    };
    let date = match &schema.date {
        Some(f) => match optional(required(f)?) {
            Some(s) => Some(parse_date(&s).map_err(|e| record_error(line, e.to_string()))?),
            None => None,
        },
        None => None,
    };
    let source_tag = match &schema.source_tag {
        Some(f) => optional(required(f)?).unwrap_or_else(|| schema.default_source_tag.clone()),
        None => schema.default_source_tag.clone(),
    };
    Ok(Document {
        id,
        text,
        label,
        date,
        source_tag,
    })
}

fn json_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<Option<String>> {
    obj.get(key).map(|v| match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    })
}

/// Reads a jsonl or csv file into a [`Corpus`], preserving record order.
///
/// Errors name the offending line (1-based; for csv the header is line 1).
pub fn ingest_corpus(path: &Path, format: InputFormat, schema: &Schema) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    match format {
        InputFormat::Jsonl => {
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line_no = n + 1;
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: Value =
                    serde_json::from_str(&line).map_err(|e| record_error(line_no, format!("malformed json: {e}")))?;
                let obj = value
                    .as_object()
                    .ok_or_else(|| record_error(line_no, "expected a json object"))?;
                documents.push(build_document(line_no, schema, |k| json_field(obj, k))?);
            }
        }
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
            let headers = reader
                .headers()
                .map_err(|e| record_error(1, format!("malformed csv header: {e}")))?
                .clone();
            for record in reader.records() {
                let record = record.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    record_error(line, format!("malformed csv record: {e}"))
                })?;
                let line_no = record.position().map_or(0, |p| p.line() as usize);
                documents.push(build_document(line_no, schema, |k| {
                    headers
                        .iter()
                        .position(|h| h == k)
                        .and_then(|i| record.get(i))
                        .map(|s| Some(s.to_string()))
                })?);
            }
        }
    }
    Corpus::new(documents)
}

/// Writes a corpus in the format [`ingest_corpus`] reads with the default schema.
pub fn write_corpus(corpus: &Corpus, path: &Path, format: InputFormat) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut file = std::io::BufWriter::new(File::create(path).map_err(io)?);
    match format {
        InputFormat::Jsonl => {
            for d in corpus.documents() {
                let mut obj = serde_json::Map::new();
                obj.insert("id".into(), Value::String(d.id.clone()));
                obj.insert("text".into(), Value::String(d.text.clone()));
                obj.insert("label".into(), d.label.clone().map_or(Value::Null, Value::String));
                obj.insert(
                    "date".into(),
                    d.date
                        .map_or(Value::Null, |dt| Value::String(dt.format(DATE_FORMAT).to_string())),
                );
                obj.insert("source".into(), Value::String(d.source_tag.clone()));
                writeln!(file, "{}", Value::Object(obj)).map_err(io)?;
            }
        }
        InputFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            w.write_record(["id", "text", "label", "date", "source"])
                .map_err(|e| Error::io(path, e.into()))?;
            for d in corpus.documents() {
                let date = d.date.map(|dt| dt.format(DATE_FORMAT).to_string()).unwrap_or_default();
                w.write_record([
                    d.id.as_str(),
                    d.text.as_str(),
                    d.label.as_deref().unwrap_or(""),
                    date.as_str(),
                    d.source_tag.as_str(),
                ])
                .map_err(|e| Error::io(path, e.into()))?;
            }
            w.flush().map_err(io)?;
            return Ok(());
        }
    }
    file.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::File::create(&path)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        path
    }

    #[test]
    fn jsonl_with_dates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            &dir,
            "c.jsonl",
            concat!(
                "{\"id\":\"a\",\"text\":\"one\",\"label\":\"X\",\"date\":\"2012-01-01\"}\n",
                "\n",
                "{\"id\":\"b\",\"text\":\"two\",\"label\":\"Y\",\"date\":\"2012-01-05\"}\n",
                "{\"id\":3,\"text\":\"three\",\"label\":\"X\",\"date\":\"2012-01-10\"}\n",
            ),
        );
        let corpus = ingest_corpus(&path, InputFormat::Jsonl, &Schema::default()).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.day_index().unwrap(), &[1, 5, 10]);
        assert_eq!(corpus.ids(), vec!["a", "b", "3"]);
        assert_eq!(corpus.classes(), vec!["X", "Y"]);
    }

    #[test]
    fn missing_id_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "c.jsonl", "{\"id\":\"a\",\"text\":\"one\"}\n{\"text\":\"two\"}\n");
        let err = ingest_corpus(&path, InputFormat::Jsonl, &Schema::unlabeled_undated()).unwrap_err();
        assert!(matches!(err, Error::Record { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_json_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "c.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{oops\n");
        let err = ingest_corpus(&path, InputFormat::Jsonl, &Schema::unlabeled_undated()).unwrap_err();
        assert!(matches!(err, Error::Record { line: 2, .. }));
    }

    #[test]
    fn duplicate_id_in_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "c.csv", "id,text\na,x\na,y\n");
        let err = ingest_corpus(&path, InputFormat::Csv, &Schema::unlabeled_undated()).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn csv_custom_schema_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            &dir,
            "c.csv",
            "doc,body,group,when\nd1,\"hello, world\",A,2010-05-01\nd2,bye,B,2010-05-03\n",
        );
        let schema = Schema {
            id: "doc".into(),
            text: "body".into(),
            label: Some("group".into()),
            date: Some("when".into()),
            source_tag: None,
            default_source_tag: "news".into(),
        };
        let corpus = ingest_corpus(&path, InputFormat::Csv, &schema).unwrap();
        assert_eq!(corpus.documents()[0].text, "hello, world");
        assert_eq!(corpus.documents()[1].source_tag, "news");
        assert_eq!(corpus.day_index().unwrap(), &[1, 3]);

        for format in [InputFormat::Csv, InputFormat::Jsonl] {
            let out = dir.path().join("out");
            write_corpus(&corpus, &out, format).unwrap();
            let schema = Schema {
                source_tag: Some("source".into()),
                ..Schema::default()
            };
            let back = ingest_corpus(&out, format, &schema).unwrap();
            assert_eq!(back, corpus);
        }
    }

    #[test]
    fn csv_missing_mapped_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "c.csv", "id,body\na,x\n");
        let err = ingest_corpus(&path, InputFormat::Csv, &Schema::unlabeled_undated()).unwrap_err();
        assert!(matches!(err, Error::Record { line: 2, .. }), "{err}");
    }

    #[test]
    fn bad_date_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            &dir,
            "c.csv",
            "id,text,label,date\na,x,A,2010-01-01\nb,y,B,2010-13-01\n",
        );
        let err = ingest_corpus(&path, InputFormat::Csv, &Schema::default()).unwrap_err();
        assert!(matches!(err, Error::Record { line: 3, .. }), "{err}");
    }
}
