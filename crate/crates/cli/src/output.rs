//! CSV output. The first line is a comment carrying the schema version and
//! build id; the header follows even when there are no rows.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use brochette::nearcritical::EstimateRecord;

pub const SCHEMA_VERSION: u32 = 1;

pub fn build_id() -> String {
    format!("brochette-{}", env!("CARGO_PKG_VERSION"))
}

pub const HEADER: [&str; 19] = [
    "experiment_id",
    "event",
    "n",
    "p",
    "q",
    "rho",
    "eta",
    "samples",
    "successes",
    "p_hat",
    "stderr",
    "seed",
    "wall_time_ms",
    "command",
    "columns",
    "stream_key",
    "quantity",
    "value",
    "build",
];

/// One output line. Fields that do not apply to a command stay empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub experiment_id: String,
    pub event: String,
    pub n: Option<u32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub samples: u64,
    pub successes: Option<u64>,
    pub p_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub seed: u64,
    pub wall_time_ms: Option<u64>,
    pub command: String,
    pub columns: String,
    pub stream_key: String,
    pub quantity: String,
    pub value: String,
    pub build: String,
}

impl Row {
    pub fn from_record(rec: &EstimateRecord) -> Self {
        Row {
            event: rec.event.to_string(),
            n: rec.event.scale(),
            p: Some(rec.params.p),
            q: Some(rec.params.q),
            rho: Some(rec.params.rho),
            samples: rec.n_samples,
            successes: Some(rec.successes),
            p_hat: Some(rec.p_hat),
            stderr: Some(rec.stderr),
            seed: rec.master_seed,
            wall_time_ms: Some(rec.wall_time_ms),
            columns: rec.columns.clone(),
            stream_key: rec.stream_key.clone(),
            ..Row::default()
        }
    }
}

pub fn write_rows(mut sink: impl Write, rows: &[Row]) -> Result<()> {
    writeln!(sink, "# schema={SCHEMA_VERSION} build={}", build_id())?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[Row], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_rows(std::io::BufWriter::new(file), rows)
        }
        None => write_rows(std::io::stdout().lock(), rows),
    }
}
