use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Binding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// One held-out prediction; `id` is the structure index in the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: usize,
    pub y: f64,
    #[serde(with = "nan_as_null")]
    pub yhat: f64,
}

/// Outcome of one model on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub model: String,
    pub family: String,
    pub split: String,
    pub fraction: f64,
    pub n_train: usize,
    pub hyper: Binding,
    pub metrics: BTreeMap<String, Option<f64>>,
    pub pred: Vec<Prediction>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchmarkRecord {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied().flatten()
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub(crate) fn sort_records(records: &mut [BenchmarkRecord]) {
    records.sort_by(|a, b| (&a.model, &a.split).cmp(&(&b.model, &b.split)));
}

/// Writes gzip-compressed JSON lines sorted by (model, split). The gzip
/// header carries no timestamp, so equal records give equal bytes.
pub fn write_results(records: &[BenchmarkRecord], path: &Path) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let file = File::create(path)?;
    let mut gz = GzBuilder::new().mtime(0).write(BufWriter::new(file), Compression::default());
    for r in &sorted {
        serde_json::to_writer(&mut gz, r)?;
        gz.write_all(b"\n")?;
    }
    gz.finish()?.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<BenchmarkRecord>> {
    let reader = BufReader::new(GzDecoder::new(File::open(path)?));
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
