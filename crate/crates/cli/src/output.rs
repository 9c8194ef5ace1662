//! JSON records and CSV files with a `# config:` header line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use siegellab::count::{self, SlopeFit};
use siegellab::rootsys::IntegrabilityReport;
use siegellab::Error;

/// One experiment result with enough configuration to replay it.
#[derive(Debug, Serialize)]
pub struct Record {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub workers: usize,
    pub wall_time_s: f64,
    pub result: serde_json::Value,
}

pub fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn print_integrability(r: &IntegrabilityReport) {
    println!("{:<8} {:>5} {:>5} {:>12} {:>8} {:>8}", "group", "L1", "Linf", "L2-neighbor", "L2-full", "witness");
    let full = r.l2_full.map_or("-", flag);
    let group = format!("{}{}/a{}", r.cartan_type, r.rank, r.alpha);
    println!(
        "{:<8} {:>5} {:>5} {:>12} {:>8} {:>8}",
        group,
        flag(r.l1),
        flag(r.linf),
        flag(r.l2_neighbor),
        full,
        r.witness.as_deref().unwrap_or("-")
    );
    if let Some(w) = &r.warning {
        eprintln!("warning: {w}");
    }
}

/// `# config: command=... key=value ... workers=N version=...`, keys sorted.
pub fn config_line<T: Serialize>(command: &str, args: &T, workers: usize) -> String {
    let mut parts = vec![format!("command={command}")];
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(args) {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            parts.push(format!("{k}={text}"));
        }
    }
    parts.push(format!("workers={workers}"));
    parts.push(format!("version={}", siegellab::VERSION));
    format!("# config: {}", parts.join(" "))
}

/// A CSV sink on a file or stdout (`-`).
pub struct Csv {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Csv {
    pub fn open(path: &str, config: &str) -> anyhow::Result<Self> {
        Self::open_with(path, config, b',')
    }

    pub fn open_with(path: &str, config: &str, delimiter: u8) -> anyhow::Result<Self> {
        let mut sink: Box<dyn Write> = if path == "-" {
            Box::new(io::stdout())
        } else {
            Box::new(io::BufWriter::new(File::create(path).with_context(|| format!("cannot create {path}"))?))
        };
        writeln!(sink, "{config}")?;
        Ok(Csv { writer: csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink) })
    }

    pub fn row<I, S>(&mut self, fields: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Reads `member,lnT,N` rows and fits the ensemble mean against `ln T`.
pub fn fit_count_csv(path: &Path) -> anyhow::Result<SlopeFit> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["member", "lnT", "N"] {
        return Err(Error::Invalid(format!("expected columns member,lnT,N in {}", path.display())).into());
    }
    // ln T is keyed by its exact text so that rows of one grid point group together
    let mut by_t: BTreeMap<String, (f64, f64, u64)> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let bad = || Error::Invalid(format!("malformed row {:?}", rec.iter().collect::<Vec<_>>()));
        let ln_t: f64 = rec[1].parse().map_err(|_| bad())?;
        let n: f64 = rec[2].parse().map_err(|_| bad())?;
        let e = by_t.entry(rec[1].to_string()).or_insert((ln_t, 0.0, 0));
        e.1 += n;
        e.2 += 1;
    }
    let mut points: Vec<(f64, f64)> = by_t.into_values().map(|(l, s, k)| (l, s / k as f64)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(count::slope_fit(&points)?)
}
