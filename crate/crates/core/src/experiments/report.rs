use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::curve::fmt_num;
use crate::error::{Error, Result};
use crate::fractal::ScaleCounts;

/// One prediction checked against one estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub id: String,
    /// `dimension`, `exponent`, `verdict`, `envelope` or `continuity`.
    pub quantity: String,
    /// Parameters as `key=value` pairs separated by spaces.
    pub spec: String,
    pub predicted: f64,
    /// NaN when the estimate could not be produced.
    pub estimated: f64,
    pub band: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported but excluded from the gated totals.
    pub experimental: bool,
    pub note: String,
    pub counts: Option<ScaleCounts>,
}

impl Row {
    pub fn new(
        id: impl Into<String>,
        quantity: &str,
        spec: impl Into<String>,
        predicted: f64,
        estimated: f64,
        band: f64,
        tolerance: f64,
    ) -> Row {
        Row {
            id: id.into(),
            quantity: quantity.into(),
            spec: spec.into(),
            predicted,
            estimated,
            band,
            tolerance,
            pass: passes(predicted, estimated, band, tolerance),
            experimental: false,
            note: String::new(),
            counts: None,
        }
    }

    /// Row whose estimate failed; it never passes.
    pub fn failed(
        id: impl Into<String>,
        quantity: &str,
        spec: impl Into<String>,
        predicted: f64,
        tolerance: f64,
        err: &Error,
    ) -> Row {
        Row::new(id, quantity, spec, predicted, f64::NAN, 0.0, tolerance).with_note(err.to_string())
    }

    /// Verdict rows compare integer codes exactly.
    pub fn verdict(id: impl Into<String>, spec: impl Into<String>, predicted: u8, estimated: u8) -> Row {
        Row::new(id, "verdict", spec, predicted as f64, estimated as f64, 0.0, 0.0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Row {
        self.note = note.into();
        self
    }

    pub fn with_counts(mut self, counts: ScaleCounts) -> Row {
        self.counts = Some(counts);
        self
    }

    pub fn experimental(mut self) -> Row {
        self.experimental = true;
        self
    }

    /// Recomputes `pass` from the stored numbers.
    pub fn consistent(&self) -> bool {
        self.pass == passes(self.predicted, self.estimated, self.band, self.tolerance)
    }
}

/// `|predicted − estimated| ≤ max(band, tolerance)`; NaN never passes.
pub fn passes(predicted: f64, estimated: f64, band: f64, tolerance: f64) -> bool {
    (predicted - estimated).abs() <= band.max(tolerance)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub suite_id: String,
    pub rows: Vec<Row>,
    /// Wall time; kept out of every file so reports stay byte-identical.
    pub runtime: Duration,
}

impl SuiteResult {
    pub fn gated(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.experimental)
    }

    pub fn passed(&self) -> usize {
        self.gated().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.gated().filter(|r| !r.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn row(&self, id: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.id == id)
    }
}

const HEADER: [&str; 10] = [
    "id",
    "quantity",
    "spec",
    "predicted",
    "estimated",
    "band",
    "tolerance",
    "pass",
    "experimental",
    "note",
];

pub fn write_suite_csv<W: Write>(result: &SuiteResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    out.write_record(HEADER).map_err(csv_err)?;
    for r in &result.rows {
        out.write_record([
            r.id.as_str(),
            r.quantity.as_str(),
            r.spec.as_str(),
            &fmt_num(r.predicted),
            &fmt_num(r.estimated),
            &fmt_num(r.band),
            &fmt_num(r.tolerance),
            if r.pass { "true" } else { "false" },
            if r.experimental { "true" } else { "false" },
            r.note.as_str(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a suite CSV, rejecting rows whose `pass` disagrees with their numbers.
pub fn read_suite_csv<R: Read>(suite_id: &str, r: R) -> Result<SuiteResult> {
    let mut rdr = csv::Reader::from_reader(r);
    let parse_err = |e: csv::Error| Error::Parse(e.to_string());
    let headers = rdr.headers().map_err(parse_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse(format!(
            "unexpected header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
    };
    let flag = |s: &str, line: usize| -> Result<bool> {
        match s {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(Error::Parse(format!("line {line}: bad flag {s:?}"))),
        }
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(parse_err)?;
        let line = i + 2;
        if rec.len() != HEADER.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected {} fields",
                HEADER.len()
            )));
        }
        let row = Row {
            id: rec[0].to_string(),
            quantity: rec[1].to_string(),
            spec: rec[2].to_string(),
            predicted: num(&rec[3], line)?,
            estimated: num(&rec[4], line)?,
            band: num(&rec[5], line)?,
            tolerance: num(&rec[6], line)?,
            pass: flag(&rec[7], line)?,
            experimental: flag(&rec[8], line)?,
            note: rec[9].to_string(),
            counts: None,
        };
        if !row.consistent() {
            return Err(Error::Parse(format!(
                "line {line}: pass flag disagrees with |predicted - estimated|"
            )));
        }
        rows.push(row);
    }
    Ok(SuiteResult {
        suite_id: suite_id.to_string(),
        rows,
        runtime: Duration::ZERO,
    })
}

pub fn write_summary_csv<W: Write>(results: &[SuiteResult], mut w: W) -> Result<()> {
    writeln!(w, "suite,rows,gated,passed,failed,experimental")?;
    for r in results {
        let gated = r.gated().count();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.suite_id,
            r.rows.len(),
            gated,
            r.passed(),
            r.failed(),
            r.rows.len() - gated
        )?;
    }
    Ok(())
}

/// Writes `<suite>.csv`, `<suite>/<row>.counts.csv` for rows with box counts,
/// and `summary.csv`. Returns the written paths in order.
pub fn emit_report(results: &[SuiteResult], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for r in results {
        let path = out_dir.join(format!("{}.csv", r.suite_id));
        write_suite_csv(r, fs::File::create(&path)?)?;
        written.push(path);
        let with_counts: Vec<&Row> = r.rows.iter().filter(|row| row.counts.is_some()).collect();
        if !with_counts.is_empty() {
            let dir = out_dir.join(&r.suite_id);
            fs::create_dir_all(&dir)?;
            for row in with_counts {
                let path = dir.join(format!("{}.counts.csv", row.id));
                row.counts.as_ref().unwrap().write_csv(fs::File::create(&path)?)?;
                written.push(path);
            }
        }
    }
    let path = out_dir.join("summary.csv");
    write_summary_csv(results, fs::File::create(&path)?)?;
    written.push(path);
    Ok(written)
}

/// Reads every `<suite>.csv` present in `dir`, in the standard suite order.
pub fn load_report(dir: &Path) -> Result<Vec<SuiteResult>> {
    let mut out = Vec::new();
    for id in super::SUITE_IDS {
        let path = dir.join(format!("{id}.csv"));
        if path.exists() {
            out.push(read_suite_csv(id, fs::File::open(&path)?)?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid(
            "report",
            format!("no suite CSVs in {}", dir.display()),
        ));
    }
    Ok(out)
}
