use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// One CSV record with a fixed header.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    /// Columns holding wall-clock measurements; everything else is seed-determined.
    const TIMING: &'static [usize];
    fn cells(&self) -> Vec<String>;
}

/// Scientific notation with 17 significant digits, enough to round-trip an f64.
pub fn sci(x: f64) -> String {
    format!("{:.16e}", x)
}

fn render<R: CsvRow>(rows: &[R], keep: impl Fn(usize) -> bool) -> String {
    let mut out = String::new();
    let header: Vec<&str> = R::HEADER.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, h)| *h).collect();
    writeln!(out, "{}", header.join(",")).expect("string write");
    for r in rows {
        let cells: Vec<String> = r.cells().into_iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, c)| c).collect();
        writeln!(out, "{}", cells.join(",")).expect("string write");
    }
    out
}

pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    render(rows, |_| true)
}

/// The CSV with timing columns dropped; identical across reruns with one seed.
pub fn to_csv_untimed<R: CsvRow>(rows: &[R]) -> String {
    render(rows, |i| !R::TIMING.contains(&i))
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    std::fs::write(path, to_csv(rows))?;
    Ok(())
}
