//! Record collection and emission. Every record carries a schema_version
//! field; the byte output is deterministic apart from the optional
//! timestamp header.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One key=value record per line.
    Lines,
    Csv,
}

#[derive(Default)]
pub struct Report {
    records: Vec<Vec<(String, String)>>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, fields: &[(&str, String)]) {
        let mut rec = vec![("schema_version".into(), SCHEMA_VERSION.to_string())];
        rec.extend(fields.iter().map(|(k, v)| (k.to_string(), v.clone())));
        self.records.push(rec);
    }

    pub fn write(&self, format: Format, timestamp: bool, out: &mut dyn Write) -> io::Result<()> {
        if timestamp {
            let now = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(out, "# generated_unix={now}")?;
        }
        match format {
            Format::Lines => {
                for rec in &self.records {
                    let line: Vec<String> =
                        rec.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
            Format::Csv => {
                if let Some(first) = self.records.first() {
                    let header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
                    writeln!(out, "{}", header.join(","))?;
                    for rec in &self.records {
                        let row: Vec<String> =
                            rec.iter().map(|(_, v)| csv_field(v)).collect();
                        writeln!(out, "{}", row.join(","))?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn csv_field(v: &str) -> String {
    if v.contains(',') || v.contains('"') || v.contains('\n') {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}
