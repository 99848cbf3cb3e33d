use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::features::PACKET_COLUMNS;
use crate::flow::{biflow_columns, uniflow_columns};
use crate::label::AttackClass;
use crate::scalar::Scalar;

pub const IS_ATTACK_COLUMN: &str = "is_attack";
pub const CLASS_COLUMN: &str = "class";

const TEXT_COLUMNS: [&str; 3] = ["ip_src", "ip_dest", "protocol"];
const IP_COLUMNS: [&str; 2] = ["ip_src", "ip_dest"];
const MQTT_FLAG_COLUMNS: [&str; 7] = [
    "mqtt_flag_uname",
    "mqtt_flag_passwd",
    "mqtt_flag_retain",
    "mqtt_flag_qos",
    "mqtt_flag_willflag",
    "mqtt_flag_clean",
    "mqtt_flag_reserved",
];
const MQTT_HEADER_COLUMNS: [&str; 2] = ["mqtt_messagetype", "mqtt_messagelength"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureLevel {
    Packet,
    Uniflow,
    Biflow,
}

impl FeatureLevel {
    pub const ALL: [FeatureLevel; 3] = [FeatureLevel::Packet, FeatureLevel::Uniflow, FeatureLevel::Biflow];

    /// Full feature column list, in output order.
    pub fn feature_columns(self) -> Vec<String> {
        match self {
            FeatureLevel::Packet => PACKET_COLUMNS.iter().map(|s| s.to_string()).collect(),
            FeatureLevel::Uniflow => uniflow_columns(),
            FeatureLevel::Biflow => biflow_columns(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureLevel::Packet => "packet",
            FeatureLevel::Uniflow => "uniflow",
            FeatureLevel::Biflow => "biflow",
        }
    }
}

impl fmt::Display for FeatureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for FeatureLevel {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| DatasetError::InvalidRules(format!("unknown feature level {s:?}")))
    }
}

/// Which columns [`drop_leaky_columns`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropPolicy {
    /// Keep `mqtt_messagetype` and `mqtt_messagelength` on packet tables.
    pub keep_mqtt_header: bool,
}

impl Default for DropPolicy {
    fn default() -> Self {
        DropPolicy { keep_mqtt_header: true }
    }
}

impl DropPolicy {
    pub fn leaky_columns(self, level: FeatureLevel) -> Vec<&'static str> {
        let mut cols = IP_COLUMNS.to_vec();
        if level == FeatureLevel::Packet {
            cols.push("protocol");
            cols.extend(MQTT_FLAG_COLUMNS);
            if !self.keep_mqtt_header {
                cols.extend(MQTT_HEADER_COLUMNS);
            }
        }
        cols
    }
}

/// One cell of a record before it lands in a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
}

/// A record type that maps onto a feature table row.
pub trait FeatureRow {
    const LEVEL: FeatureLevel;
    fn values(&self) -> Vec<Value>;
    fn label(&self) -> (u8, AttackClass);
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData<T> {
    Numeric(Vec<T>),
    Text(Vec<String>),
}

impl<T> ColumnData<T> {
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }
}

impl<T: Clone> ColumnData<T> {
    fn select(&self, rows: &[usize]) -> Self {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r].clone()).collect()),
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }
}

/// Column-oriented feature table with `is_attack` and `class` label columns.
#[derive(Debug, Clone)]
pub struct FeatureTable<T> {
    level: FeatureLevel,
    /// Where the rows came from (capture or CSV path).
    pub source: String,
    names: Vec<String>,
    columns: Vec<ColumnData<T>>,
    is_attack: Vec<u8>,
    class: Vec<AttackClass>,
}

/// Equality ignores `source`.
impl<T: PartialEq> PartialEq for FeatureTable<T> {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.names == other.names
            && self.columns == other.columns
            && self.is_attack == other.is_attack
            && self.class == other.class
    }
}

fn is_text_column(name: &str) -> bool {
    TEXT_COLUMNS.contains(&name)
}

impl<T: Scalar> FeatureTable<T> {
    /// Empty table with the level's full schema.
    pub fn empty(level: FeatureLevel, source: impl Into<String>) -> Self {
        Self::with_columns(level, source, level.feature_columns())
    }

    fn with_columns(level: FeatureLevel, source: impl Into<String>, names: Vec<String>) -> Self {
        let columns = names
            .iter()
            .map(|n| if is_text_column(n) { ColumnData::Text(Vec::new()) } else { ColumnData::Numeric(Vec::new()) })
            .collect();
        FeatureTable { level, source: source.into(), names, columns, is_attack: Vec::new(), class: Vec::new() }
    }

    pub fn from_records<R: FeatureRow>(source: impl Into<String>, records: &[R]) -> Self {
        let mut t = Self::empty(R::LEVEL, source);
        for r in records {
            let (is_attack, class) = r.label();
            t.push_values(r.values(), is_attack, class).expect("record matches its level schema");
        }
        t
    }

    /// Appends one row given in column order.
    pub fn push_values(&mut self, values: Vec<Value>, is_attack: u8, class: AttackClass) -> Result<(), DatasetError> {
        if values.len() != self.columns.len() {
            return Err(DatasetError::RaggedRow { row: self.n_rows(), expected: self.columns.len(), found: values.len() });
        }
        if let Some(i) = self
            .columns
            .iter()
            .zip(&values)
            .position(|(c, v)| matches!((c, v), (ColumnData::Numeric(_), Value::Text(_))))
        {
            let value = match &values[i] {
                Value::Text(s) => s.clone(),
                Value::Num(x) => x.to_string(),
            };
            return Err(DatasetError::Parse { row: self.n_rows(), column: self.names[i].clone(), value });
        }
        for (col, v) in self.columns.iter_mut().zip(values) {
            match (col, v) {
                (ColumnData::Numeric(c), Value::Num(x)) => c.push(T::lit(x)),
                (ColumnData::Text(c), Value::Text(s)) => c.push(s),
                (ColumnData::Text(c), Value::Num(x)) => c.push(x.to_string()),
                (ColumnData::Numeric(_), Value::Text(_)) => unreachable!("checked above"),
            }
        }
        self.is_attack.push(is_attack);
        self.class.push(class);
        Ok(())
    }

    pub fn level(&self) -> FeatureLevel {
        self.level
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.class.len()
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn classes(&self) -> &[AttackClass] {
        &self.class
    }

    pub fn is_attack(&self) -> &[u8] {
        &self.is_attack
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData<T>> {
        self.names.iter().position(|n| n == name).map(|i| &self.columns[i])
    }

    pub fn numeric_column(&self, name: &str) -> Result<&[T], DatasetError> {
        match self.column(name) {
            Some(ColumnData::Numeric(v)) => Ok(v),
            Some(ColumnData::Text(_)) => Err(DatasetError::NonNumericColumn(name.to_string())),
            None => Err(DatasetError::MissingColumn(name.to_string())),
        }
    }

    pub fn has_text_columns(&self) -> bool {
        self.first_text_column().is_some()
    }

    pub fn first_text_column(&self) -> Option<&str> {
        self.names
            .iter()
            .zip(&self.columns)
            .find(|(_, c)| matches!(c, ColumnData::Text(_)))
            .map(|(n, _)| n.as_str())
    }

    /// Row-major numeric matrix of all feature columns.
    pub fn feature_matrix(&self) -> Result<Vec<Vec<T>>, DatasetError> {
        let mut cols = Vec::with_capacity(self.columns.len());
        for (name, c) in self.names.iter().zip(&self.columns) {
            match c {
                ColumnData::Numeric(v) => cols.push(v),
                ColumnData::Text(_) => return Err(DatasetError::NonNumericColumn(name.clone())),
            }
        }
        Ok((0..self.n_rows()).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        FeatureTable {
            level: self.level,
            source: self.source.clone(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            is_attack: rows.iter().map(|&r| self.is_attack[r]).collect(),
            class: rows.iter().map(|&r| self.class[r]).collect(),
        }
    }

    /// Stacks tables with identical level and columns.
    pub fn concat(tables: &[&FeatureTable<T>]) -> Result<Self, DatasetError> {
        let first = tables.first().ok_or_else(|| DatasetError::Incompatible("no tables to concatenate".into()))?;
        let mut out = FeatureTable::with_columns(first.level, first.source.clone(), first.names.clone());
        let mut sources = Vec::new();
        for t in tables {
            if t.level != first.level || t.names != first.names {
                return Err(DatasetError::Incompatible(format!("{} vs {}", t.source, first.source)));
            }
            sources.push(t.source.clone());
            for (dst, src) in out.columns.iter_mut().zip(&t.columns) {
                match (dst, src) {
                    (ColumnData::Numeric(d), ColumnData::Numeric(s)) => d.extend_from_slice(s),
                    (ColumnData::Text(d), ColumnData::Text(s)) => d.extend_from_slice(s),
                    _ => return Err(DatasetError::Incompatible("column kinds differ".into())),
                }
            }
            out.is_attack.extend_from_slice(&t.is_attack);
            out.class.extend_from_slice(&t.class);
        }
        out.source = sources.join("+");
        Ok(out)
    }

    /// Replaces every numeric column through `f(column_index, value)`.
    pub(crate) fn map_numeric(&self, mut f: impl FnMut(usize, T) -> T) -> Self {
        let mut out = self.clone();
        for (i, c) in out.columns.iter_mut().enumerate() {
            if let ColumnData::Numeric(v) = c {
                for x in v.iter_mut() {
                    *x = f(i, *x);
                }
            }
        }
        out
    }

    fn drop_columns(&self, drop: &[&str]) -> Result<Self, DatasetError> {
        for d in drop {
            if !self.names.iter().any(|n| n == d) {
                return Err(DatasetError::MissingColumn(d.to_string()));
            }
        }
        let keep: Vec<usize> = (0..self.names.len()).filter(|&i| !drop.contains(&self.names[i].as_str())).collect();
        Ok(FeatureTable {
            level: self.level,
            source: self.source.clone(),
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
            is_attack: self.is_attack.clone(),
            class: self.class.clone(),
        })
    }
}

/// Removes identifying columns: addresses everywhere, plus the protocol label
/// and MQTT connect flags on packet tables.
pub fn drop_leaky_columns<T: Scalar>(t: &FeatureTable<T>, policy: DropPolicy) -> Result<FeatureTable<T>, DatasetError> {
    t.drop_columns(&policy.leaky_columns(t.level))
}

/// Column layouts accepted on read, per level: full, and after each drop policy.
fn known_layouts(level: FeatureLevel) -> Vec<Vec<String>> {
    let full = level.feature_columns();
    let mut layouts = vec![full.clone()];
    for keep in [true, false] {
        let drop = DropPolicy { keep_mqtt_header: keep }.leaky_columns(level);
        let l: Vec<String> = full.iter().filter(|c| !drop.contains(&c.as_str())).cloned().collect();
        if !layouts.contains(&l) {
            layouts.push(l);
        }
    }
    layouts
}

fn resolve_layout(header: &[String]) -> Result<(FeatureLevel, Vec<String>), DatasetError> {
    let mut missing_labels = Vec::new();
    for c in [IS_ATTACK_COLUMN, CLASS_COLUMN] {
        if !header.iter().any(|h| h == c) {
            missing_labels.push(c.to_string());
        }
    }
    let features: BTreeSet<&str> =
        header.iter().map(String::as_str).filter(|h| *h != IS_ATTACK_COLUMN && *h != CLASS_COLUMN).collect();
    if features.len() + 2 - missing_labels.len() != header.len() {
        return Err(DatasetError::SchemaMismatch { unknown: vec!["<duplicate column>".into()], missing: missing_labels });
    }
    let mut best: Option<(usize, Vec<String>, Vec<String>)> = None;
    for level in FeatureLevel::ALL {
        for layout in known_layouts(level) {
            let set: BTreeSet<&str> = layout.iter().map(String::as_str).collect();
            if set == features && missing_labels.is_empty() {
                return Ok((level, layout));
            }
            let unknown: Vec<String> = features.difference(&set).map(|s| s.to_string()).collect();
            let missing: Vec<String> = set.difference(&features).map(|s| s.to_string()).collect();
            let score = unknown.len() + missing.len();
            if best.as_ref().is_none_or(|b| score < b.0) {
                best = Some((score, unknown, missing));
            }
        }
    }
    let (_, unknown, mut missing) = best.expect("at least one layout");
    missing.extend(missing_labels);
    Err(DatasetError::SchemaMismatch { unknown, missing })
}

pub fn write_feature_csv_to<T: Scalar, W: Write>(t: &FeatureTable<T>, w: W) -> Result<(), DatasetError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let mut header: Vec<&str> = t.names.iter().map(String::as_str).collect();
    header.push(IS_ATTACK_COLUMN);
    header.push(CLASS_COLUMN);
    out.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in 0..t.n_rows() {
        row.clear();
        for c in &t.columns {
            row.push(match c {
                ColumnData::Numeric(v) => v[r].to_string(),
                ColumnData::Text(v) => v[r].clone(),
            });
        }
        row.push(t.is_attack[r].to_string());
        row.push(t.class[r].as_str().to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_feature_csv<T: Scalar>(t: &FeatureTable<T>, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    write_feature_csv_to(t, std::io::BufWriter::new(File::create(path)?))
}

/// Reads a feature CSV; the level is inferred from the header, and columns
/// are reordered canonically.
pub fn read_feature_csv_from<T: Scalar, R: Read>(r: R, source: &str) -> Result<FeatureTable<T>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let (level, layout) = resolve_layout(&header)?;
    let pos = |name: &str| header.iter().position(|h| h == name).expect("resolved column present");
    let col_pos: Vec<usize> = layout.iter().map(|c| pos(c)).collect();
    let attack_pos = pos(IS_ATTACK_COLUMN);
    let class_pos = pos(CLASS_COLUMN);

    let mut t = FeatureTable::<T>::with_columns(level, source, layout);
    for (row_idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(DatasetError::RaggedRow { row: row_idx, expected: header.len(), found: rec.len() });
        }
        for (ci, &p) in col_pos.iter().enumerate() {
            let cell = &rec[p];
            match &mut t.columns[ci] {
                ColumnData::Numeric(v) => v.push(cell.trim().parse::<T>().map_err(|_| DatasetError::Parse {
                    row: row_idx,
                    column: t.names[ci].clone(),
                    value: cell.to_string(),
                })?),
                ColumnData::Text(v) => v.push(cell.to_string()),
            }
        }
        let parse_err = |column: &str, value: &str| DatasetError::Parse {
            row: row_idx,
            column: column.to_string(),
            value: value.to_string(),
        };
        let attack: u8 = match rec[attack_pos].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(IS_ATTACK_COLUMN, other)),
        };
        let class: AttackClass = rec[class_pos].trim().parse().map_err(|_| parse_err(CLASS_COLUMN, &rec[class_pos]))?;
        t.is_attack.push(attack);
        t.class.push(class);
    }
    Ok(t)
}

pub fn read_feature_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<FeatureTable<T>, DatasetError> {
    let path = path.as_ref();
    read_feature_csv_from(std::io::BufReader::new(File::open(path)?), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniflow_table(rows: &[(f64, AttackClass)]) -> FeatureTable<f64> {
        let mut t = FeatureTable::<f64>::empty(FeatureLevel::Uniflow, "test");
        for &(x, c) in rows {
            let mut vals = vec![Value::Text("10.0.0.1".into()), Value::Text("10.0.0.2".into())];
            vals.extend((0..t.n_columns() - 2).map(|i| Value::Num(x + i as f64)));
            t.push_values(vals, u8::from(c.is_attack()), c).unwrap();
        }
        t
    }

    #[test]
    fn packet_table_drop_counts() {
        let t = FeatureTable::<f64>::empty(FeatureLevel::Packet, "p");
        assert_eq!(t.n_columns(), 29);
        let d = drop_leaky_columns(&t, DropPolicy::default()).unwrap();
        assert_eq!(d.n_columns(), 29 - 2 - 1 - 7);
        assert!(d.column("mqtt_messagetype").is_some());
        assert!(!d.has_text_columns());
        let d2 = drop_leaky_columns(&t, DropPolicy { keep_mqtt_header: false }).unwrap();
        assert_eq!(d2.n_columns(), 17);
        assert!(matches!(drop_leaky_columns(&d, DropPolicy::default()), Err(DatasetError::MissingColumn(_))));
    }

    #[test]
    fn uniflow_drop_keeps_proto() {
        let t = uniflow_table(&[(1.0, AttackClass::Benign)]);
        let d = drop_leaky_columns(&t, DropPolicy::default()).unwrap();
        assert_eq!(d.n_columns(), t.n_columns() - 2);
        assert!(d.column("proto").is_some());
        assert!(d.column("ip_src").is_none());
    }

    #[test]
    fn empty_table_round_trip() {
        let t = FeatureTable::<f64>::empty(FeatureLevel::Biflow, "b");
        let mut buf = Vec::new();
        write_feature_csv_to(&t, &mut buf).unwrap();
        let back: FeatureTable<f64> = read_feature_csv_from(&buf[..], "b").unwrap();
        assert_eq!(back.n_rows(), 0);
        assert_eq!(back.column_names(), t.column_names());
        assert_eq!(back.level(), FeatureLevel::Biflow);
    }

    #[test]
    fn shuffled_columns_reordered() {
        let t = drop_leaky_columns(&uniflow_table(&[(1.5, AttackClass::Benign), (2.0, AttackClass::MqttBf)]), DropPolicy::default()).unwrap();
        let mut buf = Vec::new();
        write_feature_csv_to(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
        let n = rows[0].len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let shuffled: String =
            rows.iter().map(|r| perm.iter().map(|&i| r[i]).collect::<Vec<_>>().join(",") + "\n").collect();
        let back: FeatureTable<f64> = read_feature_csv_from(shuffled.as_bytes(), "x").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn unknown_or_missing_columns_rejected() {
        let csv = "ip_src,ip_dest,bogus,is_attack,class\n";
        assert!(matches!(read_feature_csv_from::<f64, _>(csv.as_bytes(), "x"), Err(DatasetError::SchemaMismatch { .. })));
        let t = uniflow_table(&[]);
        let header: Vec<&str> = t.column_names().iter().map(String::as_str).collect();
        let csv = header.join(",") + ",class\n";
        match read_feature_csv_from::<f64, _>(csv.as_bytes(), "x") {
            Err(DatasetError::SchemaMismatch { missing, .. }) => assert_eq!(missing, vec!["is_attack".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_cells_rejected() {
        let t = uniflow_table(&[(1.0, AttackClass::Benign)]);
        let mut buf = Vec::new();
        write_feature_csv_to(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",Benign", ",Evil");
        assert!(matches!(read_feature_csv_from::<f64, _>(text.as_bytes(), "x"), Err(DatasetError::Parse { .. })));
    }

    #[test]
    fn feature_matrix_requires_numeric() {
        let t = uniflow_table(&[(1.0, AttackClass::Benign)]);
        assert!(matches!(t.feature_matrix(), Err(DatasetError::NonNumericColumn(_))));
        let d = drop_leaky_columns(&t, DropPolicy::default()).unwrap();
        let m = d.feature_matrix().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].len(), d.n_columns());
    }

    #[test]
    fn concat_checks_schema() {
        let a = uniflow_table(&[(1.0, AttackClass::Benign)]);
        let b = uniflow_table(&[(2.0, AttackClass::Sparta)]);
        let c = FeatureTable::concat(&[&a, &b]).unwrap();
        assert_eq!(c.n_rows(), 2);
        assert_eq!(c.classes(), &[AttackClass::Benign, AttackClass::Sparta]);
        let p = FeatureTable::<f64>::empty(FeatureLevel::Packet, "p");
        assert!(FeatureTable::concat(&[&a, &p]).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec((any::<f64>().prop_filter("finite", |x| x.is_finite()), 0usize..5), 0..100)) {
            let mut t = FeatureTable::<f64>::empty(FeatureLevel::Uniflow, "r");
            for (x, c) in &rows {
                let class = AttackClass::ALL[*c];
                let mut vals = vec![Value::Text("1.2.3.4".into()), Value::Text("5.6.7.8".into())];
                vals.extend((0..t.n_columns() - 2).map(|i| Value::Num(x * (i as f64 + 0.5))));
                t.push_values(vals, u8::from(class.is_attack()), class).unwrap();
            }
            let mut buf = Vec::new();
            write_feature_csv_to(&t, &mut buf).unwrap();
            let back: FeatureTable<f64> = read_feature_csv_from(&buf[..], "r").unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn csv_round_trip_f32(xs in prop::collection::vec(any::<f32>().prop_filter("finite", |x| x.is_finite()), 1..50)) {
            let mut t = FeatureTable::<f32>::empty(FeatureLevel::Uniflow, "r");
            for x in &xs {
                let mut vals = vec![Value::Text("1.2.3.4".into()), Value::Text("5.6.7.8".into())];
                vals.extend((0..t.n_columns() - 2).map(|_| Value::Num(f64::from(*x))));
                t.push_values(vals, 0, AttackClass::Benign).unwrap();
            }
            let mut buf = Vec::new();
            write_feature_csv_to(&t, &mut buf).unwrap();
            let back: FeatureTable<f32> = read_feature_csv_from(&buf[..], "r").unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
