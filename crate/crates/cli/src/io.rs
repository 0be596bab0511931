//! Dataset files.
//!
//! `trace.csv`: a `# <axis kind>,<unit>` comment line, an `x,power` header,
//! then one row per sample. `map.csv`: a `field_T,freq_Hz,power` header and
//! one row per grid point, field-major. Floats are written with Rust's
//! shortest round-trip formatting; lines end in LF. Readers optionally take
//! the power column in dB and convert it to linear power.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use spinres::spincore::{AxisKind, FieldMap2D, Spectrum1D};

use crate::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 2] = ["x", "power"];
pub const MAP_HEADER: [&str; 3] = ["field_T", "freq_Hz", "power"];

fn writer(path: &Path, preamble: &str) -> CliResult<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(preamble.as_bytes()).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// Writes rows of already formatted fields under `header`.
pub fn write_table<R, S>(path: &Path, header: &[&str], rows: R) -> CliResult<()>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    let mut w = writer(path, "")?;
    let err = |e: csv::Error| CliError::io(path, e);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_trace(path: &Path, trace: &Spectrum1D) -> CliResult<()> {
    let kind = trace.kind();
    let mut w = writer(path, &format!("# {},{}\n", kind.name(), kind.unit()))?;
    let err = |e: csv::Error| CliError::io(path, e);
    w.write_record(TRACE_HEADER).map_err(err)?;
    for (x, y) in trace.axis().iter().zip(trace.values()) {
        w.write_record([x.to_string(), y.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_map(path: &Path, map: &FieldMap2D) -> CliResult<()> {
    let rows = map.fields().iter().enumerate().flat_map(|(i, b)| {
        map.freqs()
            .iter()
            .zip(map.row(i))
            .map(move |(f, p)| vec![b.to_string(), f.to_string(), p.to_string()])
    });
    write_table(path, &MAP_HEADER, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_float(path: &Path, line: u64, field: &str, what: &str) -> CliResult<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::usage(format!(
            "{}: line {line}: {what} '{field}' is not a finite number",
            path.display()
        ))),
    }
}

fn to_linear(p: f64, db: bool) -> f64 {
    if db {
        10f64.powf(p / 10.0)
    } else {
        p
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(path: &Path, line: u64, found: &csv::StringRecord, want: &[&str]) -> CliResult<()> {
    if found.iter().ne(want.iter().copied()) {
        return Err(CliError::usage(format!(
            "{}: line {line}: expected header '{}', found '{}'",
            path.display(),
            want.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn read_trace(path: &Path, db: bool) -> CliResult<Spectrum1D> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let kind = first
        .trim()
        .strip_prefix('#')
        .and_then(|c| c.split(',').next())
        .and_then(AxisKind::parse)
        .ok_or_else(|| {
            CliError::usage(format!(
                "{}: line 1: expected '# <frequency|time|field>,<unit>', found '{}'",
                path.display(),
                first.trim()
            ))
        })?;
    let mut rdr = reader(rest);
    let header = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    check_header(path, 2, &header, &TRACE_HEADER)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line()) + 1;
        xs.push(parse_float(path, line, &rec[0], "x")?);
        ys.push(to_linear(parse_float(path, line, &rec[1], "power")?, db));
    }
    Spectrum1D::new(kind, xs, ys).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Reads a long-format map. Rows may come in any order but must cover the
/// full field × frequency grid exactly once.
pub fn read_map(path: &Path, db: bool) -> CliResult<FieldMap2D> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = reader(&text);
    let header = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    check_header(path, 1, &header, &MAP_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((
            parse_float(path, line, &rec[0], "field_T")?,
            parse_float(path, line, &rec[1], "freq_Hz")?,
            to_linear(parse_float(path, line, &rec[2], "power")?, db),
            line,
        ));
    }
    let mut fields: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut freqs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    for v in [&mut fields, &mut freqs] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let nf = freqs.len();
    if fields.len() * nf != rows.len() {
        return Err(CliError::usage(format!(
            "{}: {} rows do not form a {} × {} field-frequency grid",
            path.display(),
            rows.len(),
            fields.len(),
            nf
        )));
    }
    let mut power = vec![f64::NAN; rows.len()];
    for &(b, f, p, line) in &rows {
        let i = fields.binary_search_by(|x| x.total_cmp(&b)).expect("field present");
        let j = freqs.binary_search_by(|x| x.total_cmp(&f)).expect("freq present");
        let slot = &mut power[i * nf + j];
        if !slot.is_nan() {
            return Err(CliError::usage(format!(
                "{}: line {line}: duplicate grid point ({b} T, {f} Hz)",
                path.display()
            )));
        }
        *slot = p;
    }
    FieldMap2D::new(fields, freqs, power).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}
