//! Result files: `#`-prefixed `key: value` metadata, one tab-separated
//! header of `name[unit]` (or `name[unit;percent]`) cells, then rows of
//! numbers with 17 significant digits. A `.json` path selects the single
//! object form instead.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_NAME: &str = "gspin-result";
/// Bumped whenever a recipe's column set or header layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    /// Fractions intended for display in percent.
    pub percent: bool,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    /// Ordered `key: value` pairs.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<Column>,
}

impl ResultFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    fn check(&self) -> Result<(), CliError> {
        let n = self.rows();
        for c in &self.columns {
            if c.values.len() != n {
                return Err(CliError::Format(format!("column '{}' has {} rows, expected {n}", c.name, c.values.len())));
            }
            if c.unit.is_empty() {
                return Err(CliError::Format(format!("column '{}' has no unit", c.name)));
            }
            if c.name.is_empty() || c.name.contains(['\t', '[', ']', '\n']) || c.unit.contains(['\t', '[', ']', ';', '\n']) {
                return Err(CliError::Format(format!("column '{}' has an unrepresentable name or unit", c.name)));
            }
        }
        for (k, v) in &self.metadata {
            if k.contains([':', '\n']) || v.contains('\n') {
                return Err(CliError::Format(format!("metadata entry '{k}' is not representable")));
            }
        }
        Ok(())
    }

    /// Header and data rows; the data block alone is what determinism and
    /// golden comparisons look at.
    pub fn to_text(&self) -> Result<String, CliError> {
        self.check()?;
        let mut s = String::new();
        for (k, v) in &self.metadata {
            writeln!(s, "# {k}: {v}").unwrap();
        }
        s.push_str(&self.data_text());
        Ok(s)
    }

    pub fn data_text(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| if c.percent { format!("{}[{};percent]", c.name, c.unit) } else { format!("{}[{}]", c.name, c.unit) })
            .collect();
        s.push_str(&header.join("\t"));
        s.push('\n');
        for i in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format!("{:.16e}", c.values[i])).collect();
            s.push_str(&row.join("\t"));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<ResultFile, CliError> {
        let at = |line: usize, msg: &str| CliError::Format(format!("line {line}: {msg}"));
        let mut metadata = Vec::new();
        let mut columns: Option<Vec<Column>> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if columns.is_some() {
                    return Err(at(n, "metadata after the column header"));
                }
                let (k, v) = rest.trim_start().split_once(": ").ok_or_else(|| at(n, "metadata must be '# key: value'"))?;
                metadata.push((k.to_string(), v.to_string()));
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match &mut columns {
                None => {
                    let mut cols = Vec::new();
                    for cell in line.split('\t') {
                        let (name, rest) = cell.split_once('[').ok_or_else(|| at(n, &format!("column '{cell}' lacks a [unit]")))?;
                        let inner = rest.strip_suffix(']').ok_or_else(|| at(n, &format!("column '{cell}' lacks a closing ]")))?;
                        let (unit, percent) = match inner.split_once(';') {
                            Some((u, "percent")) => (u, true),
                            Some((_, h)) => return Err(at(n, &format!("unknown display hint '{h}'"))),
                            None => (inner, false),
                        };
                        if unit.is_empty() {
                            return Err(at(n, &format!("column '{name}' has an empty unit")));
                        }
                        cols.push(Column { name: name.to_string(), unit: unit.to_string(), percent, values: Vec::new() });
                    }
                    columns = Some(cols);
                }
                Some(cols) => {
                    let cells: Vec<&str> = line.split('\t').collect();
                    if cells.len() != cols.len() {
                        return Err(at(n, &format!("expected {} values, found {}", cols.len(), cells.len())));
                    }
                    for (c, (col, cell)) in cols.iter_mut().zip(cells).enumerate() {
                        let v = cell.trim().parse::<f64>().map_err(|_| at(n, &format!("column {}: '{cell}' is not a number", c + 1)))?;
                        col.values.push(v);
                    }
                }
            }
        }
        let columns = columns.ok_or_else(|| CliError::Format("no column header".into()))?;
        Ok(ResultFile { metadata, columns })
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes next to the destination and renames over it.
pub fn write_result(path: &Path, result: &ResultFile) -> Result<(), CliError> {
    let body = if is_json(path) {
        result.check()?;
        serde_json::to_string_pretty(result).map_err(|e| CliError::Format(e.to_string()))? + "\n"
    } else {
        result.to_text()?
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ResultFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let r = if is_json(path) {
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))?
    } else {
        ResultFile::parse(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?
    };
    r.check()?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDeviation {
    pub name: String,
    pub max_abs: f64,
    /// max |a − b| / max(|a|, |b|) over rows where either is non-zero.
    pub max_rel: f64,
}

/// Per-column deviations between two files with the same columns and rows.
pub fn compare(a: &ResultFile, b: &ResultFile) -> Result<Vec<ColumnDeviation>, CliError> {
    if a.columns.len() != b.columns.len() || a.rows() != b.rows() {
        return Err(CliError::Format(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.rows(),
            a.columns.len(),
            b.rows(),
            b.columns.len()
        )));
    }
    let mut out = Vec::new();
    for (x, y) in a.columns.iter().zip(&b.columns) {
        if x.name != y.name || x.unit != y.unit {
            return Err(CliError::Format(format!("column '{}[{}]' vs '{}[{}]'", x.name, x.unit, y.name, y.unit)));
        }
        let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
        for (u, v) in x.values.iter().zip(&y.values) {
            let d = (u - v).abs();
            max_abs = max_abs.max(d);
            let s = u.abs().max(v.abs());
            if s > 0.0 {
                max_rel = max_rel.max(d / s);
            }
        }
        out.push(ColumnDeviation { name: x.name.clone(), max_abs, max_rel });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultFile {
        ResultFile {
            metadata: vec![("recipe".into(), "odmr".into()), ("summary.peak_1_center".into(), "6.9e2 MHz".into())],
            columns: vec![
                Column { name: "frequency".into(), unit: "MHz".into(), percent: false, values: vec![400.0, 405.0, 0.1 + 0.2] },
                Column { name: "contrast".into(), unit: "1".into(), percent: true, values: vec![1e-300, -3.0e-3, f64::MIN_POSITIVE] },
            ],
        }
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let r = sample();
        let text = r.to_text().unwrap();
        assert!(text.contains("contrast[1;percent]"));
        assert_eq!(ResultFile::parse(&text).unwrap(), r);
    }

    #[test]
    fn file_round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["r.tsv", "r.json"] {
            let p = dir.path().join(name);
            write_result(&p, &sample()).unwrap();
            assert_eq!(read_result(&p).unwrap(), sample());
        }
    }

    #[test]
    fn malformed_files_report_a_line() {
        let e = ResultFile::parse("# a: b\nx[MHz]\ty[1]\n1.0\t2.0\n3.0\n").unwrap_err();
        assert!(e.to_string().contains("line 4"), "{e}");
        let e = ResultFile::parse("x\ty[1]\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = ResultFile::parse("x[MHz]\n1.0\nabc\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(ResultFile::parse("# only: metadata\n").is_err());
    }

    #[test]
    fn missing_unit_is_rejected() {
        let mut r = sample();
        r.columns[0].unit.clear();
        assert!(r.to_text().is_err());
    }

    #[test]
    fn compare_reports_abs_and_rel() {
        let a = sample();
        let mut b = sample();
        b.columns[0].values[1] = 405.5;
        let d = compare(&a, &b).unwrap();
        assert_eq!(d[0].max_abs, 0.5);
        assert!((d[0].max_rel - 0.5 / 405.5).abs() < 1e-15);
        assert_eq!(d[1].max_abs, 0.0);
        b.columns.pop();
        assert!(compare(&a, &b).is_err());
    }
}
