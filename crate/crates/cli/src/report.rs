//! Report emission. Every report opens with a comment record naming the
//! library version and the settings that shape it; reruns with the same
//! settings are byte-identical.
//!
//! CSV reports carry the record as `# key=value ...` lines; JSON has no
//! comments, so a JSON report is `{"meta": {...}, "rows": [...]}` with an
//! optional `"footer"`.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;
use crate::Failure;

/// Ordered key/value record for headers and footers.
#[derive(Debug, Clone, Default)]
pub struct Record(Vec<(&'static str, Value)>);

impl Record {
    pub fn new(command: &'static str) -> Self {
        Record(vec![
            ("version", winners::VERSION.into()),
            ("command", command.into()),
        ])
    }

    pub fn empty() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    pub fn with_opt<T: Into<Value>>(self, key: &'static str, value: Option<T>) -> Self {
        match value {
            Some(v) => self.with(key, v),
            None => self,
        }
    }

    fn line(&self) -> String {
        let fields: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        format!("# {}\n", fields.join(" "))
    }

    fn object(&self) -> Value {
        Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect::<Map<_, _>>(),
        )
    }
}

pub struct Sink {
    out: Option<PathBuf>,
    format: Format,
    written: usize,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, format: Format) -> Self {
        Self {
            out,
            format,
            written: 0,
        }
    }

    /// Writes `rows` as report `name`: to `<out>/<name>.<ext>`, or to
    /// standard output with a blank line between reports.
    pub fn emit<T: Serialize>(
        &mut self,
        name: &str,
        meta: &Record,
        rows: &[T],
        footer: &Record,
    ) -> Result<(), Failure> {
        let bytes = match self.format {
            Format::Csv => csv_bytes(meta, rows, footer)?,
            Format::Json => json_bytes(meta, rows, footer)?,
        };
        let io = |e: std::io::Error| Failure::Input(format!("writing {name}: {e}"));
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(io)?;
                let ext = match self.format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                };
                std::fs::write(dir.join(format!("{name}.{ext}")), bytes).map_err(io)?;
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                if self.written > 0 {
                    stdout.write_all(b"\n").map_err(io)?;
                }
                stdout.write_all(&bytes).map_err(io)?;
            }
        }
        self.written += 1;
        Ok(())
    }
}

fn csv_bytes<T: Serialize>(meta: &Record, rows: &[T], footer: &Record) -> Result<Vec<u8>, Failure> {
    let mut buf = meta.line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r).map_err(|e| Failure::Input(e.to_string()))?;
        }
        w.flush().map_err(|e| Failure::Input(e.to_string()))?;
    }
    if !footer.0.is_empty() {
        buf.extend(footer.line().into_bytes());
    }
    Ok(buf)
}

fn json_bytes<T: Serialize>(meta: &Record, rows: &[T], footer: &Record) -> Result<Vec<u8>, Failure> {
    let mut doc = Map::new();
    doc.insert("meta".into(), meta.object());
    doc.insert(
        "rows".into(),
        serde_json::to_value(rows).map_err(|e| Failure::Input(e.to_string()))?,
    );
    if !footer.0.is_empty() {
        doc.insert("footer".into(), footer.object());
    }
    let mut bytes =
        serde_json::to_vec_pretty(&Value::Object(doc)).map_err(|e| Failure::Input(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}
