//! Versioned JSON / CSV writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::Context;
use serde::Serialize;

use crate::config::{Format, Output};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// Row-oriented document: `{schema_version, kind, <meta>, rows}`.
#[derive(Debug, Serialize)]
pub struct Table<'a, M: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub kind: &'a str,
    #[serde(flatten)]
    pub meta: M,
    pub rows: &'a [R],
}

fn sink(out: &Output) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &out.path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes `doc` as JSON, or `rows` as CSV after a `# schema_version` comment line.
pub fn emit<D: Serialize, R: Serialize>(out: &Output, doc: &D, rows: &[R]) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    match out.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, doc)?;
            writeln!(w)?;
        }
        Format::Csv => {
            writeln!(w, "# schema_version: {OUTPUT_SCHEMA_VERSION}")?;
            let mut c = csv::Writer::from_writer(&mut w);
            for r in rows {
                c.serialize(r)?;
            }
            c.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}
