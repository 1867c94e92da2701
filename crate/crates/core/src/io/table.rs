//! Sweep tables as CSV: one row per (parameter, mode).

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::{format_f64, IoError};
use crate::linalg::C64;
use crate::nonorth::ExtReal;
use crate::sweep::{Field, ModeDiagnostics, SweepRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    /// Name of the first column, `delta` or `epsilon`.
    pub param_name: String,
    /// Prepend a `# generated at` comment line.
    pub timestamp: bool,
}

impl CsvOptions {
    pub fn new(param_name: &str) -> Self {
        Self { param_name: param_name.into(), timestamp: false }
    }
}

const LEADING: [Field; 14] = [
    Field::EigenRe,
    Field::EigenIm,
    Field::R1,
    Field::LobeImbalance,
    Field::R2,
    Field::RigidityAbs,
    Field::Petermann,
    Field::Linewidth,
    Field::SFolded,
    Field::SFoldedDifferential,
    Field::SUnfolded,
    Field::SValue,
    Field::UncertaintySum,
    Field::BoundGap,
];
const TRAILING: [Field; 2] = [Field::ChiSquared, Field::DeltaL2];
const IN_MEMORY: &str = "writing to memory cannot fail";
const FLAGS: [&str; 3] = ["degenerate_alignment", "ambiguous_tracking", "error"];

fn columns(records: &[SweepRecord]) -> Vec<Field> {
    let alphas: Vec<f64> = records
        .iter()
        .find_map(|r| r.modes.first())
        .map(|d| d.renyi.iter().map(|(a, _)| *a).collect())
        .unwrap_or_default();
    LEADING.into_iter().chain(alphas.into_iter().map(Field::Renyi)).chain(TRAILING).collect()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn cell(field: Field, d: &ModeDiagnostics) -> String {
    match field {
        Field::Linewidth if d.linewidth.is_none() => String::new(),
        f => format_f64(f.value(d)),
    }
}

/// The CSV text of a sweep.
pub fn render_sweep_csv(records: &[SweepRecord], opts: &CsvOptions) -> Result<String, IoError> {
    if records.is_empty() {
        return Err(IoError::Empty("sweep has no records".into()));
    }
    let cols = columns(records);
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec![opts.param_name.clone(), "mode".into()];
    header.extend(cols.iter().map(Field::name));
    header.extend(FLAGS.iter().map(|s| s.to_string()));
    w.write_record(&header).expect(IN_MEMORY);
    for r in records {
        let param = format_f64(r.param);
        if r.modes.is_empty() {
            let mut row = vec![param, String::new()];
            row.extend(cols.iter().map(|_| String::new()));
            row.extend([String::new(), flag(r.tracking_ambiguous), r.error.clone().unwrap_or_default()]);
            w.write_record(&row).expect(IN_MEMORY);
            continue;
        }
        for (i, d) in r.modes.iter().enumerate() {
            let mut row = vec![param.clone(), i.to_string()];
            row.extend(cols.iter().map(|f| cell(*f, d)));
            row.extend([flag(d.degenerate_alignment), flag(r.tracking_ambiguous), r.error.clone().unwrap_or_default()]);
            w.write_record(&row).expect(IN_MEMORY);
        }
    }
    let body = String::from_utf8(w.into_inner().expect(IN_MEMORY))
        .expect("csv output is valid UTF-8");
    if opts.timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Ok(format!("# generated at unix time {secs}\n{body}"))
    } else {
        Ok(body)
    }
}

pub fn write_sweep_csv(records: &[SweepRecord], path: &Path, opts: &CsvOptions) -> Result<(), IoError> {
    let text = render_sweep_csv(records, opts)?;
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

fn num(path: &Path, line: usize, col: &str, s: &str) -> Result<f64, IoError> {
    s.parse::<f64>().map_err(|_| IoError::Format {
        path: path.to_path_buf(),
        line,
        message: format!("column {col}: cannot parse `{s}`"),
    })
}

/// Parses CSV text produced by [`render_sweep_csv`]. Returns the parameter
/// column name and the records.
pub fn parse_sweep_csv(text: &str, path: &Path) -> Result<(String, Vec<SweepRecord>), IoError> {
    let mut rdr = ::csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let fmt_err = |line: usize, message: String| IoError::Format { path: path.to_path_buf(), line, message };
    let header: Vec<String> =
        rdr.headers().map_err(|e| fmt_err(1, e.to_string()))?.iter().map(str::to_string).collect();
    if header.len() < 2 + FLAGS.len() || header[1] != "mode" {
        return Err(fmt_err(1, "not a sweep table".into()));
    }
    let param_name = header[0].clone();
    let fields: Vec<Field> = header[2..header.len() - FLAGS.len()]
        .iter()
        .map(|h| Field::parse(h).ok_or_else(|| fmt_err(1, format!("unknown column {h}"))))
        .collect::<Result<_, _>>()?;
    let pos = |f: Field| fields.iter().position(|g| *g == f);

    let mut records: Vec<SweepRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| fmt_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != header.len() {
            return Err(fmt_err(line, format!("expected {} columns, found {}", header.len(), row.len())));
        }
        let param = num(path, line, &param_name, &row[0])?;
        let n = row.len();
        let ambiguous = &row[n - 2] == "1";
        let error = Some(row[n - 1].to_string()).filter(|s| !s.is_empty());
        let same = records.last().is_some_and(|r| r.param.to_bits() == param.to_bits());
        if !same {
            records.push(SweepRecord { param, modes: Vec::new(), tracking_ambiguous: ambiguous, error: error.clone() });
        }
        if row[1].is_empty() {
            continue;
        }
        let get = |f: Field| -> Result<f64, IoError> {
            match pos(f) {
                Some(i) => num(path, line, &f.name(), &row[2 + i]),
                None => Ok(f64::NAN),
            }
        };
        let linewidth = match pos(Field::Linewidth) {
            Some(i) if !row[2 + i].is_empty() => Some(ExtReal::from_f64(num(path, line, "linewidth", &row[2 + i])?)),
            _ => None,
        };
        let renyi = fields
            .iter()
            .filter_map(|f| match f {
                Field::Renyi(a) => Some(*a),
                _ => None,
            })
            .map(|a| Ok((a, get(Field::Renyi(a))?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let d = ModeDiagnostics {
            eigenvalue: C64::new(get(Field::EigenRe)?, get(Field::EigenIm)?),
            r1: get(Field::R1)?,
            lobe_imbalance: get(Field::LobeImbalance)?,
            r2: get(Field::R2)?,
            rigidity_abs: get(Field::RigidityAbs)?,
            petermann: ExtReal::from_f64(get(Field::Petermann)?),
            linewidth,
            s_folded: get(Field::SFolded)?,
            s_folded_differential: get(Field::SFoldedDifferential)?,
            s_unfolded: get(Field::SUnfolded)?,
            s_value: get(Field::SValue)?,
            uncertainty_sum: get(Field::UncertaintySum)?,
            bound_gap: get(Field::BoundGap)?,
            renyi,
            chi_squared: get(Field::ChiSquared)?,
            delta_l2: get(Field::DeltaL2)?,
            degenerate_alignment: &row[n - 3] == "1",
        };
        records.last_mut().expect("record pushed above").modes.push(d);
    }
    if records.is_empty() {
        return Err(fmt_err(1, "table has no rows".into()));
    }
    Ok((param_name, records))
}

pub fn read_sweep_csv(path: &Path) -> Result<(String, Vec<SweepRecord>), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_sweep_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, ModelSpec, ParamGrid, SweepConfig};

    fn ep_records() -> Vec<SweepRecord> {
        let cfg = SweepConfig::new(
            ParamGrid::Range { start: -0.1, stop: 0.1, step: 0.05 },
            ModelSpec::TwoLevel { g: 1.0, gamma: 2.0 },
            2,
        );
        run_sweep(&cfg).unwrap()
    }

    #[test]
    fn single_mode_is_two_lines() {
        let mut r = ep_records();
        r.truncate(1);
        r[0].modes.truncate(1);
        let text = render_sweep_csv(&r, &CsvOptions::new("delta")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("delta,mode,eig_re,eig_im,"));
        assert!(header.contains(",renyi_1,renyi_1.5,renyi_2,"));
        assert!(header.ends_with(",degenerate_alignment,ambiguous_tracking,error"));
    }

    #[test]
    fn infinite_petermann_prints_inf() {
        let r = ep_records();
        let text = render_sweep_csv(&r, &CsvOptions::new("delta")).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        let k = header.iter().position(|h| *h == "petermann").unwrap();
        let at_ep: Vec<&str> = text.lines().find(|l| l.starts_with("0,")).unwrap().split(',').collect();
        assert_eq!(at_ep[k], "inf");
    }

    #[test]
    fn round_trip_is_exact() {
        let r = ep_records();
        let text = render_sweep_csv(&r, &CsvOptions::new("delta")).unwrap();
        let (name, back) = parse_sweep_csv(&text, Path::new("mem.csv")).unwrap();
        assert_eq!(name, "delta");
        assert_eq!(back.len(), r.len());
        for (a, b) in r.iter().zip(&back) {
            assert_eq!(a.param.to_bits(), b.param.to_bits());
            for (x, y) in a.modes.iter().zip(&b.modes) {
                for f in columns(&r) {
                    let (u, v) = (f.value(x), f.value(y));
                    assert!(u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()), "{f}: {u} vs {v}");
                }
                assert_eq!(x.degenerate_alignment, y.degenerate_alignment);
            }
        }
    }

    #[test]
    fn failed_rows_and_timestamp() {
        let mut r = ep_records();
        r[1] = SweepRecord { param: r[1].param, modes: vec![], tracking_ambiguous: false, error: Some("no, converge".into()) };
        let opts = CsvOptions { param_name: "delta".into(), timestamp: true };
        let text = render_sweep_csv(&r, &opts).unwrap();
        assert!(text.starts_with("# generated at"));
        let (_, back) = parse_sweep_csv(&text, Path::new("mem.csv")).unwrap();
        assert_eq!(back[1].error.as_deref(), Some("no, converge"));
        assert!(back[1].modes.is_empty());
        assert_eq!(back[2].modes.len(), 2);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(render_sweep_csv(&[], &CsvOptions::new("delta")), Err(IoError::Empty(_))));
    }

    #[test]
    fn write_failure_names_the_path() {
        let p = Path::new("/nonexistent-dir/x.csv");
        let e = write_sweep_csv(&ep_records(), p, &CsvOptions::new("delta")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
