//! CSV emission and parsing. Floats are written with 17 significant digits in
//! scientific notation, which round-trips every `f64` and ignores locale.

use std::collections::BTreeMap;
use std::path::Path;

use super::run::{AggregateRow, Checkpoint, RunRecord};
use crate::error::{Error, Result};

pub const RUN_HEADER: [&str; 4] = ["algorithm", "seed", "episode", "cumulative_regret"];
pub const AGGREGATE_HEADER: [&str; 5] = [
    "algorithm",
    "episode",
    "mean_cumulative_regret",
    "std_cumulative_regret",
    "num_seeds",
];
pub const BPI_HEADER: [&str; 4] = ["algorithm", "seed", "certified_episode", "certified_regret"];
pub const MISTAKE_HEADER: [&str; 5] = [
    "algorithm",
    "seed",
    "episodes",
    "uncertified",
    "unsound_certified",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

/// Per-run rows in (algorithm, seed, episode) order. A `certified` column is
/// added when any record carries certification flags.
pub fn runs_to_csv(records: &[RunRecord]) -> Result<String> {
    let pac = records
        .iter()
        .any(|r| r.checkpoints.iter().any(|c| c.certified.is_some()));
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|x, y| (&x.algorithm, x.seed).cmp(&(&y.algorithm, y.seed)));
    let mut w = writer();
    let mut header = RUN_HEADER.to_vec();
    if pac {
        header.push("certified");
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in sorted {
        for c in &r.checkpoints {
            let mut row = vec![
                r.algorithm.clone(),
                r.seed.to_string(),
                c.episode.to_string(),
                fmt_f64(c.cumulative_regret),
            ];
            if pac {
                row.push(u8::from(c.certified.unwrap_or(false)).to_string());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    finish(w)
}

fn field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column {}", i + 1),
    })
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = field(rec, i, line)?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse '{raw}' in column {}", i + 1),
    })
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = found.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

/// Parses a per-run CSV, with or without the `certified` column.
pub fn parse_runs(text: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?.clone();
    let pac = header.len() == RUN_HEADER.len() + 1;
    let mut expected = RUN_HEADER.to_vec();
    if pac {
        expected.push("certified");
    }
    check_header(&header, &expected)?;
    let mut runs: BTreeMap<(String, u64), Vec<Checkpoint>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let certified = if pac {
            match field(&rec, 4, line)? {
                "0" => Some(false),
                "1" => Some(true),
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("certified must be 0 or 1, got '{other}'"),
                    })
                }
            }
        } else {
            None
        };
        let key = (
            field(&rec, 0, line)?.to_string(),
            parse_field(&rec, 1, line)?,
        );
        let cps = runs.entry(key).or_default();
        let cp = Checkpoint {
            episode: parse_field(&rec, 2, line)?,
            cumulative_regret: parse_field(&rec, 3, line)?,
            certified,
        };
        if cps.last().is_some_and(|prev| prev.episode >= cp.episode) {
            return Err(Error::Parse {
                line,
                message: "episodes must increase within a run".into(),
            });
        }
        cps.push(cp);
    }
    Ok(runs
        .into_iter()
        .map(|((algorithm, seed), checkpoints)| RunRecord {
            algorithm,
            seed,
            checkpoints,
            pac: None,
        })
        .collect())
}

pub fn aggregate_to_csv(rows: &[AggregateRow]) -> Result<String> {
    let mut w = writer();
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.episode.to_string(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            r.num_seeds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_aggregate(text: &str) -> Result<Vec<AggregateRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    check_header(rdr.headers().map_err(csv_err)?, &AGGREGATE_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            Ok(AggregateRow {
                algorithm: field(&rec, 0, line)?.to_string(),
                episode: parse_field(&rec, 1, line)?,
                mean: parse_field(&rec, 2, line)?,
                std: parse_field(&rec, 3, line)?,
                num_seeds: parse_field(&rec, 4, line)?,
            })
        })
        .collect()
}

/// One line per BPI run; runs that never certified leave both fields empty.
pub fn bpi_summary_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = writer();
    w.write_record(BPI_HEADER).map_err(csv_err)?;
    for r in records {
        let Some(s) = &r.pac else { continue };
        w.write_record([
            r.algorithm.clone(),
            r.seed.to_string(),
            s.certified_episode.map_or(String::new(), |k| k.to_string()),
            s.certified_regret.map_or(String::new(), fmt_f64),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn mistake_summary_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = writer();
    w.write_record(MISTAKE_HEADER).map_err(csv_err)?;
    for r in records {
        let Some(s) = &r.pac else { continue };
        w.write_record([
            r.algorithm.clone(),
            r.seed.to_string(),
            s.episodes_run.to_string(),
            s.uncertified.to_string(),
            s.unsound.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
