//! Report emitters. CSV rows follow the report order (architecture, then
//! UE count) and print every number with 6 significant digits; missing
//! values print as `NA`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ucran_core::{Architecture, MetricsReport, MetricsRow};

use crate::AppError;

pub const CSV_HEADER: [&str; 9] = [
    "architecture",
    "ue_count",
    "seed_count",
    "avg_e2e_delay_s",
    "delay_ci",
    "blocking_prob",
    "blocking_ci",
    "total_power_w",
    "power_ci",
];

pub const NA: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Txt,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Txt => "txt",
        }
    }
}

/// `%g`-style rendering with 6 significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), sig6)
}

fn fields(r: &MetricsRow) -> [String; 9] {
    [
        r.architecture.label().to_string(),
        r.ue_count.to_string(),
        r.seed_count.to_string(),
        cell(r.avg_e2e_delay_s),
        cell(r.delay_ci),
        cell(r.blocking_probability),
        cell(r.blocking_ci),
        cell(r.total_power_w),
        cell(r.power_ci),
    ]
}

pub fn to_csv(report: &MetricsReport) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record(fields(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Aligned plain-text table with the same columns as the CSV.
pub fn to_txt(report: &MetricsReport) -> String {
    let rows: Vec<[String; 9]> = report.rows.iter().map(fields).collect();
    let mut width = CSV_HEADER.map(str::len);
    for r in &rows {
        for (w, f) in width.iter_mut().zip(r) {
            *w = (*w).max(f.len());
        }
    }
    let mut out = String::new();
    let mut line = |cols: &[&str]| {
        let mut l = String::new();
        for (i, c) in cols.iter().enumerate() {
            if i == 0 {
                let _ = write!(l, "{c:<w$}", w = width[i]);
            } else {
                let _ = write!(l, "  {c:>w$}", w = width[i]);
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(&CSV_HEADER);
    for r in &rows {
        line(&r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

pub fn render(report: &MetricsReport, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::Txt => to_txt(report),
    }
}

/// Write `<dir>/<stem>.<ext>` and return its path. Empty reports are refused.
pub fn emit_results(report: &MetricsReport, format: Format, dir: &Path, stem: &str) -> Result<PathBuf, AppError> {
    if report.rows.is_empty() {
        return Err(AppError::Usage("refusing to write an empty report".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    std::fs::write(&path, render(report, format)).map_err(|e| AppError::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Bad { line: usize, message: String },
    #[error("unexpected header")]
    Header,
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s == NA {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("not a number: {s}"))
    }
}

/// Read a CSV written by [`to_csv`] back into report rows.
pub fn parse_csv(text: &str) -> Result<MetricsReport, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|_| ParseError::Header)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(ParseError::Header);
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |message: String| ParseError::Bad { line, message };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected {} fields", CSV_HEADER.len())));
        }
        let architecture = Architecture::from_label(&rec[0]).ok_or_else(|| bad(format!("unknown architecture {}", &rec[0])))?;
        let int = |s: &str| s.parse::<u32>().map_err(|_| bad(format!("not a count: {s}")));
        let opt = |s: &str| parse_opt(s).map_err(bad);
        rows.push(MetricsRow {
            architecture,
            ue_count: int(&rec[1])?,
            seed_count: int(&rec[2])?,
            avg_e2e_delay_s: opt(&rec[3])?,
            delay_ci: opt(&rec[4])?,
            blocking_probability: opt(&rec[5])?,
            blocking_ci: opt(&rec[6])?,
            total_power_w: opt(&rec[7])?,
            power_ci: opt(&rec[8])?,
        });
    }
    Ok(MetricsReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.000123456789, "0.000123457"),
            (0.0000123456789, "1.23457e-05"),
            (279.5712345, "279.571"),
            (-2.5, "-2.5"),
            (999999.7, "1e+06"),
            (0.0952380952, "0.0952381"),
        ];
        for (v, s) in cases {
            assert_eq!(sig6(v), s, "{v}");
        }
    }

    fn row(arch: Architecture, ue: u32, d: Option<f64>) -> MetricsRow {
        MetricsRow {
            architecture: arch,
            ue_count: ue,
            seed_count: 1,
            avg_e2e_delay_s: d,
            delay_ci: None,
            blocking_probability: Some(0.0),
            blocking_ci: None,
            total_power_w: Some(300.123456789),
            power_ci: None,
        }
    }

    #[test]
    fn csv_shape() {
        let report = MetricsReport {
            rows: vec![row(Architecture::MacroOnly, 100, None), row(Architecture::UCRAN, 100, Some(0.0123))],
        };
        let csv = to_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "macro,100,1,NA,NA,0,NA,300.123,NA");
        assert_eq!(lines.len(), 3);
        let back = parse_csv(&csv).unwrap();
        assert_eq!(back.rows[1].avg_e2e_delay_s, Some(0.0123));
        assert_eq!(back.rows[0].total_power_w, Some(300.123));
    }

    #[test]
    fn txt_has_header_and_rows() {
        let report = MetricsReport {
            rows: vec![row(Architecture::CRAN, 500, Some(0.05))],
        };
        let t = to_txt(&report);
        assert_eq!(t.lines().count(), 2);
        assert!(t.lines().next().unwrap().starts_with("architecture"));
    }

    #[test]
    fn bad_csv_rejected() {
        assert_eq!(parse_csv("a,b\n"), Err(ParseError::Header));
        let text = format!("{}\nmacro,x,1,NA,NA,NA,NA,NA,NA\n", CSV_HEADER.join(","));
        assert!(matches!(parse_csv(&text), Err(ParseError::Bad { line: 2, .. })));
    }
}
