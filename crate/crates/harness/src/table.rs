//! Result tables and their CSV form.
//!
//! Floats are written as `{:.11e}` (12 significant digits), integers as
//! integers, text verbatim. Output is a pure function of the table, so equal
//! tables give equal bytes.

use crate::config::ExperimentKind;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(s) => s.trim().parse().ok(),
            Cell::Empty => None,
        }
    }

    /// Equality used by fit filters: numeric when both sides parse as numbers.
    pub fn matches(&self, want: &str) -> bool {
        match (self.as_f64(), want.trim().parse::<f64>()) {
            (Some(a), Ok(b)) => a == b,
            _ => self.to_string() == want.trim(),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x:.11e}"),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::to_string)).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }
}

pub fn write_results(table: &Table, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, table.to_csv_bytes()).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Read a CSV written by [`write_results`]; every cell comes back as text
/// (empty cells as [`Cell::Empty`]).
pub fn read_table(path: &Path) -> std::io::Result<Table> {
    let wrap = |e: csv::Error| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.iter().map(str::to_string).collect();
    let mut rows = vec![];
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        rows.push(rec.iter().map(|s| if s.is_empty() { Cell::Empty } else { Cell::Text(s.to_string()) }).collect());
    }
    Ok(Table { header, rows })
}

/// Trotter step count or drive period, depending on the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    None,
    Steps(usize),
    Period(f64),
}

impl Control {
    fn sort_key(self) -> f64 {
        match self {
            Control::None => f64::NEG_INFINITY,
            Control::Steps(t) => t as f64,
            Control::Period(u) => u,
        }
    }

    fn cell(self) -> Cell {
        match self {
            Control::None => Cell::Empty,
            Control::Steps(t) => Cell::Int(t as i64),
            Control::Period(u) => Cell::Float(u),
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 10] = ["experiment", "case", "N", "p_order", "control", "noise", "observable_sim", "observable_target", "abs_error", "t_sim"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: ExperimentKind,
    pub case: String,
    pub n: usize,
    pub p_order: usize,
    pub control: Control,
    pub noise: f64,
    pub observable_sim: f64,
    pub observable_target: f64,
    pub abs_error: f64,
    pub t_sim: f64,
}

impl SweepRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(experiment: ExperimentKind, case: &str, n: usize, p_order: usize, control: Control, noise: f64, sim: f64, target: f64, t_sim: f64) -> Self {
        SweepRow {
            experiment,
            case: case.to_string(),
            n,
            p_order,
            control,
            noise,
            observable_sim: sim,
            observable_target: target,
            abs_error: (sim - target).abs(),
            t_sim,
        }
    }

    /// Canonical order: case, N, p_order, control, noise.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.case
            .cmp(&other.case)
            .then(self.n.cmp(&other.n))
            .then(self.p_order.cmp(&other.p_order))
            .then(self.control.sort_key().total_cmp(&other.control.sort_key()))
            .then(self.noise.total_cmp(&other.noise))
    }
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            Cell::Text(r.experiment.name().to_string()),
            Cell::Text(r.case.clone()),
            Cell::Int(r.n as i64),
            Cell::Int(r.p_order as i64),
            r.control.cell(),
            Cell::Float(r.noise),
            Cell::Float(r.observable_sim),
            Cell::Float(r.observable_target),
            Cell::Float(r.abs_error),
            Cell::Float(r.t_sim),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = sweep_table(&[]);
        assert_eq!(String::from_utf8(t.to_csv_bytes()).unwrap(), SWEEP_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn floats_have_twelve_significant_digits() {
        assert_eq!(Cell::Float(1.0 / 3.0).to_string(), "3.33333333333e-1");
        assert_eq!(Cell::Float(0.0).to_string(), "0.00000000000e0");
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            SweepRow::new(ExperimentKind::TrotterSweep, "open", 8, 2, Control::Steps(4), 1e-3, 0.123456789012345, 0.1, 4.0),
            SweepRow::new(ExperimentKind::FloquetSweep, "ring", 16, 1, Control::Period(0.05), 0.0, 2.0, 2.5, 100.0),
        ];
        write_results(&sweep_table(&rows), &path).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back.header, SWEEP_COLUMNS);
        for (r, b) in rows.iter().zip(&back.rows) {
            assert_eq!(b[0].to_string(), r.experiment.name());
            let sim = b[6].as_f64().unwrap();
            assert!((sim - r.observable_sim).abs() <= 1e-11 * r.observable_sim.abs());
            let (s, t, a) = (b[6].as_f64().unwrap(), b[7].as_f64().unwrap(), b[8].as_f64().unwrap());
            assert!((a - (s - t).abs()).abs() <= 1e-11 * s.abs().max(t.abs()));
        }
        assert_eq!(back.rows[0][4].as_f64(), Some(4.0));
    }

    #[test]
    fn write_error_names_path() {
        let e = write_results(&Table::new(&["a"]), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
