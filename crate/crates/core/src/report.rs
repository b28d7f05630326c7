//! Report documents, their json/csv/text renderings, and the embedded
//! fixtures for the three published tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{scan_consecutive_imaginary, scan_real_family, ImaginaryRow, RealFamilyRow, Variant};

/// Significant digits kept in real-valued cells.
pub const SIGNIFICANT_DIGITS: usize = 6;

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn real(x: f64) -> Self {
        Cell::Real(round_significant(x))
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Cell::Int(n) => Some(*n),
            _ => None,
        }
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Real(x) => serde_json::to_string(x).unwrap_or_default(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Null => f.write_str("-"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Real(x) => f.write_str(&serde_json::to_string(x).map_err(|_| fmt::Error)?),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

macro_rules! cell_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(n: $t) -> Self {
                Cell::Int(n as i64)
            }
        }
    )*};
}
cell_from_int!(i8, u8, i32, u32, i64, u64, usize);

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::real(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

pub type Record = IndexMap<String, Cell>;

/// Builds a record from `(key, value)` pairs, keeping their order.
pub fn record<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Cell)>) -> Record {
    pairs.into_iter().map(|(k, v)| (k.into(), v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(Error::Precondition(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub parameters: Record,
    pub rows: Vec<Record>,
    pub summary: Record,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.insert(key.into(), value.into());
    }

    /// Row keys in first-seen order.
    pub fn columns(&self) -> Vec<&str> {
        let mut seen = IndexMap::new();
        for row in &self.rows {
            for k in row.keys() {
                seen.entry(k.as_str()).or_insert(());
            }
        }
        seen.into_keys().collect()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => Ok(self.to_text()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    /// The rows only, one line per record.
    pub fn to_csv(&self) -> Result<String> {
        let columns = self.columns();
        if columns.is_empty() {
            return Ok(String::new());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Internal(e.to_string());
        w.write_record(&columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(columns.iter().map(|c| row.get(*c).map(Cell::csv_field).unwrap_or_default()))
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = self.command.clone();
        for (k, v) in &self.parameters {
            out.push_str(&format!(" {k}={v}"));
        }
        out.push('\n');
        let columns = self.columns();
        if !columns.is_empty() {
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| columns.iter().map(|c| r.get(*c).map_or_else(String::new, Cell::to_string)).collect())
                .collect();
            let widths: Vec<usize> = columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let left: Vec<bool> = columns
                .iter()
                .map(|c| self.rows.iter().any(|r| matches!(r.get(*c), Some(Cell::Text(_)))))
                .collect();
            let line = |fields: Vec<&str>| {
                let padded: Vec<String> = fields
                    .iter()
                    .zip(widths.iter().zip(&left))
                    .map(|(f, (w, l))| if *l { format!("{f:<w$}") } else { format!("{f:>w$}") })
                    .collect();
                padded.join("  ").trim_end().to_owned() + "\n"
            };
            out.push_str(&line(columns.clone()));
            for r in &cells {
                out.push_str(&line(r.iter().map(String::as_str).collect()));
            }
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }
}

/// One record per `(p, j)` with the scan-imaginary column set.
pub fn imaginary_scan_records(rows: &[ImaginaryRow]) -> Vec<Record> {
    rows.iter()
        .flat_map(|row| {
            row.entries.iter().map(move |e| {
                record([
                    ("p", row.p.into()),
                    ("j", e.j.into()),
                    ("radicand", e.radicand.into()),
                    ("kernel", e.kernel.into()),
                    ("h", e.h.into()),
                    ("louboutin_bound", e.louboutin_bound.into()),
                    ("p_divides_h", e.p_divides_h.into()),
                    ("simultaneous", row.simultaneous.into()),
                ])
            })
        })
        .collect()
}

/// One record per `(p, offset)`.
pub fn real_scan_records(rows: &[RealFamilyRow]) -> Vec<Record> {
    rows.iter()
        .flat_map(|row| {
            row.members.iter().map(move |m| {
                let verdict = m.verdict.as_ref();
                record([
                    ("p", row.p.into()),
                    ("offset", m.offset.into()),
                    ("value", m.value.into()),
                    ("squarefree", m.squarefree.into()),
                    ("h", m.h().into()),
                    ("fibonacci_residue", verdict.and_then(|v| v.fibonacci()).map(|f| f.residue).into()),
                    ("outcome", verdict.map(|v| v.outcome.to_string()).into()),
                    ("all_squarefree", row.all_squarefree.into()),
                    ("simultaneous", row.simultaneous.into()),
                ])
            })
        })
        .collect()
}

/// The three published tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Table {
    One,
    Two,
    Three,
}

impl Table {
    pub const ALL: [Table; 3] = [Table::One, Table::Two, Table::Three];

    pub fn number(self) -> u8 {
        match self {
            Table::One => 1,
            Table::Two => 2,
            Table::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Table::One),
            2 => Ok(Table::Two),
            3 => Ok(Table::Three),
            _ => Err(Error::Precondition(format!("there is no table {n}"))),
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Table::One => &["h(-(p-1))", "h(-(p-2))", "h(-(p-3))", "h(-(p-4))", "h(-(p-5))"],
            Table::Two => &["h(-p(p-1))", "h(-p(p-2))", "h(-p(p-3))", "h(-p(p-4))", "h(-p(p-5))"],
            Table::Three => &["p^2+1", "p^2-2", "p^2+2", "p^2+4"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub p: u64,
    pub values: Vec<i64>,
}

/// The published tables as shipped in `data/tables.csv`.
pub const FIXTURE_CSV: &str = include_str!("../data/tables.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSet {
    pub table1: Vec<FixtureRow>,
    pub table2: Vec<FixtureRow>,
    pub table3: Vec<FixtureRow>,
}

impl FixtureSet {
    pub fn embedded() -> Self {
        Self::parse(FIXTURE_CSV).expect("embedded fixture parses")
    }

    /// Parses `table,p,v1,...` lines; trailing empty cells are dropped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tables: BTreeMap<u8, Vec<FixtureRow>> = BTreeMap::new();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
            let bad = |what: &str| Error::Schema(format!("fixture row {}: {what}", line + 1));
            let mut fields = rec.iter().map(str::trim);
            let table: u8 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("table"))?;
            let p: u64 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("p"))?;
            let values = fields
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| bad(s)))
                .collect::<Result<Vec<i64>>>()?;
            let t = Table::from_number(table).map_err(|_| bad("table number"))?;
            if values.len() != t.columns().len() {
                return Err(bad("column count"));
            }
            tables.entry(table).or_default().push(FixtureRow { p, values });
        }
        let mut take = |n| tables.remove(&n).unwrap_or_default();
        Ok(Self {
            table1: take(1),
            table2: take(2),
            table3: take(3),
        })
    }

    pub fn table(&self, table: Table) -> &[FixtureRow] {
        match table {
            Table::One => &self.table1,
            Table::Two => &self.table2,
            Table::Three => &self.table3,
        }
    }

    pub fn primes(&self, table: Table) -> Vec<u64> {
        self.table(table).iter().map(|r| r.p).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub p: u64,
    pub column: String,
    /// `None` when the fixture has no row for `p`.
    pub expected: Option<i64>,
    /// `None` when the computation produced no row for `p`.
    pub computed: Option<i64>,
}

/// Cell-by-cell comparison of computed rows against a fixture, keyed by `p`.
pub fn compare_with_fixture(table: Table, rows: &[FixtureRow], fixture: &[FixtureRow]) -> Result<Vec<Mismatch>> {
    let width = table.columns().len();
    let index = |rs: &[FixtureRow], what: &str| -> Result<BTreeMap<u64, Vec<i64>>> {
        let mut m = BTreeMap::new();
        for r in rs {
            if r.values.len() != width {
                return Err(Error::Schema(format!(
                    "{what} row p={} has {} columns, table {} has {width}",
                    r.p,
                    r.values.len(),
                    table.number()
                )));
            }
            if m.insert(r.p, r.values.clone()).is_some() {
                return Err(Error::Schema(format!("{what} repeats p={}", r.p)));
            }
        }
        Ok(m)
    };
    let computed = index(rows, "computed")?;
    let expected = index(fixture, "fixture")?;
    let primes: BTreeSet<u64> = computed.keys().chain(expected.keys()).copied().collect();
    let mut out = Vec::new();
    for p in primes {
        match (expected.get(&p), computed.get(&p)) {
            (Some(e), Some(c)) => {
                for (i, (a, b)) in e.iter().zip(c).enumerate() {
                    if a != b {
                        out.push(Mismatch {
                            p,
                            column: table.columns()[i].into(),
                            expected: Some(*a),
                            computed: Some(*b),
                        });
                    }
                }
            }
            (e, c) => out.push(Mismatch {
                p,
                column: "p".into(),
                expected: e.map(|_| p as i64),
                computed: c.map(|_| p as i64),
            }),
        }
    }
    Ok(out)
}

/// Upper end of the prime range whose Table 3 membership is checked.
pub const TABLE3_RANGE: u64 = 100;

/// Recomputes a table: class numbers at the fixture's primes for Tables 1
/// and 2, the full membership scan up to [`TABLE3_RANGE`] for Table 3.
pub fn regenerate(table: Table, fixture: &FixtureSet) -> Result<Vec<FixtureRow>> {
    let imaginary = |variant| -> Result<Vec<FixtureRow>> {
        fixture
            .primes(table)
            .par_iter()
            .map(|&p| {
                let row = scan_consecutive_imaginary(5, variant, p, p)?
                    .pop()
                    .ok_or_else(|| Error::Internal(format!("{p} is not prime")))?;
                Ok(FixtureRow {
                    p,
                    values: row.entries.iter().map(|e| e.h as i64).collect(),
                })
            })
            .collect()
    };
    match table {
        Table::One => imaginary(Variant::Shifted),
        Table::Two => imaginary(Variant::PMultiplied),
        Table::Three => Ok(scan_real_family(3, TABLE3_RANGE)?
            .into_iter()
            .filter(|r| r.all_squarefree)
            .map(|r| FixtureRow {
                p: r.p,
                values: r.members.iter().map(|m| m.value).collect(),
            })
            .collect()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub table: Table,
    pub rows: Vec<FixtureRow>,
    pub entries_checked: usize,
    pub mismatches: Vec<Mismatch>,
}

pub fn verify_table(table: Table, fixture: &FixtureSet) -> Result<TableCheck> {
    let rows = regenerate(table, fixture)?;
    let mismatches = compare_with_fixture(table, &rows, fixture.table(table))?;
    Ok(TableCheck {
        table,
        entries_checked: fixture.table(table).iter().map(|r| r.values.len()).sum(),
        rows,
        mismatches,
    })
}
