use std::collections::BTreeMap;
use std::path::Path;

use crate::config::Measure;
use crate::error::HarnessError;

/// A CSV table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ParsedTable {
    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
        let hash_col = header.iter().position(|h| h == "config_hash");
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let row = rec
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != hash_col)
                .map(|(_, f)| f.trim().parse::<f64>().map_err(|_| format!("non-numeric field `{f}`")))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let header = header.into_iter().filter(|h| h != "config_hash").collect();
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn is_measure_column(name: &str) -> bool {
    name.starts_with("pairing_re_")
        || name.starts_with("pairing_im_")
        || Measure::ALL.iter().any(|m| name.strip_prefix(m.name()).is_some_and(|r| r.starts_with('_')))
}

/// Tolerances keyed by full column name or by measure prefix, with an
/// optional default, e.g. `1e-6` or `log_negativity=2e-2,purity=1e-3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceSpec {
    default: Option<f64>,
    by_key: BTreeMap<String, f64>,
}

impl ToleranceSpec {
    pub fn parse(spec: &str) -> Result<Self, HarnessError> {
        let mut t = ToleranceSpec { default: None, by_key: BTreeMap::new() };
        let num = |s: &str| -> Result<f64, HarnessError> {
            match s.trim().parse::<f64>() {
                Ok(v) if v >= 0.0 => Ok(v),
                _ => Err(HarnessError::Config(format!("bad tolerance `{s}`"))),
            }
        };
        for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
            match part.split_once('=') {
                Some((k, v)) if k.trim() == "*" => t.default = Some(num(v)?),
                Some((k, v)) => {
                    t.by_key.insert(k.trim().to_string(), num(v)?);
                }
                None => t.default = Some(num(part)?),
            }
        }
        if t.default.is_none() && t.by_key.is_empty() {
            return Err(HarnessError::Config("empty tolerance spec".into()));
        }
        Ok(t)
    }

    pub fn for_column(&self, name: &str) -> Option<f64> {
        if let Some(v) = self.by_key.get(name) {
            return Some(*v);
        }
        self.by_key
            .iter()
            .filter(|(k, _)| name.starts_with(k.as_str()))
            .max_by_key(|(k, _)| k.len())
            .map(|(_, v)| *v)
            .or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnReport {
    pub column_a: String,
    pub column_b: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: usize,
    pub columns: Vec<ColumnReport>,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.columns.iter().all(|c| c.pass)
    }
}

fn key_string(row: &[f64], idx: &[usize]) -> String {
    idx.iter().map(|&i| format!("{:.9e}", row[i])).collect::<Vec<_>>().join("|")
}

fn deviation(a: f64, b: f64) -> f64 {
    if a.is_nan() && b.is_nan() {
        0.0
    } else if a == b {
        0.0
    } else {
        let d = (a - b).abs();
        if d.is_nan() { f64::INFINITY } else { d }
    }
}

/// Aligns rows on the shared key columns (everything that is not a measure
/// column) and reports the largest absolute deviation per compared column.
/// `pairs` selects explicit `(column_a, column_b)` pairs; when empty every
/// measure column present in both tables is compared.
pub fn compare_tables(
    a: &ParsedTable,
    b: &ParsedTable,
    tol: &ToleranceSpec,
    pairs: &[(String, String)],
) -> Result<CompareReport, HarnessError> {
    let keys_a: Vec<&String> = a.header.iter().filter(|h| !is_measure_column(h)).collect();
    let keys_b: Vec<&String> = b.header.iter().filter(|h| !is_measure_column(h)).collect();
    let mut sorted_a = keys_a.clone();
    let mut sorted_b = keys_b.clone();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Err(HarnessError::Config(format!("key columns differ: {keys_a:?} vs {keys_b:?}")));
    }
    let idx_a: Vec<usize> = sorted_a.iter().map(|k| a.column(k).unwrap()).collect();
    let idx_b: Vec<usize> = sorted_a.iter().map(|k| b.column(k).unwrap()).collect();
    let mut lookup = BTreeMap::new();
    for (i, row) in b.rows.iter().enumerate() {
        if lookup.insert(key_string(row, &idx_b), i).is_some() {
            return Err(HarnessError::Config("duplicate key rows in second table".into()));
        }
    }
    if a.rows.len() != b.rows.len() {
        return Err(HarnessError::Config(format!("row counts differ: {} vs {}", a.rows.len(), b.rows.len())));
    }
    let matched: Vec<(usize, usize)> = a
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            lookup
                .get(&key_string(row, &idx_a))
                .map(|&j| (i, j))
                .ok_or_else(|| HarnessError::Config(format!("row {} of the first table has no match", i + 1)))
        })
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(String, String)> = if pairs.is_empty() {
        a.header
            .iter()
            .filter(|h| is_measure_column(h) && b.column(h).is_some())
            .map(|h| (h.clone(), h.clone()))
            .collect()
    } else {
        pairs.to_vec()
    };
    if pairs.is_empty() {
        return Err(HarnessError::Config("no common measure columns to compare".into()));
    }
    let mut columns = Vec::new();
    for (ca, cb) in pairs {
        let ia = a.column(&ca).ok_or_else(|| HarnessError::Config(format!("no column `{ca}` in first table")))?;
        let ib = b.column(&cb).ok_or_else(|| HarnessError::Config(format!("no column `{cb}` in second table")))?;
        let tolerance = tol
            .for_column(&ca)
            .ok_or_else(|| HarnessError::Config(format!("no tolerance given for `{ca}`")))?;
        let max_deviation = matched
            .iter()
            .map(|&(i, j)| deviation(a.rows[i][ia], b.rows[j][ib]))
            .fold(0.0, f64::max);
        columns.push(ColumnReport { column_a: ca, column_b: cb, max_deviation, tolerance, pass: max_deviation <= tolerance });
    }
    Ok(CompareReport { rows: matched.len(), columns })
}
