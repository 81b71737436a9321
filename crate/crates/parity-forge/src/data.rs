//! Typed tabular data: column schema, CSV ingestion, and role validation.
//!
//! A `Dataset` is immutable after load. Categorical level sets are collected
//! and frozen at load time; all later stages (designs, replicates, exports)
//! see the same ordering.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Continuous,
    Count,
    Binary,
    Categorical,
}

impl Scale {
    /// Atomic scales require the stochastic transform branch.
    pub fn is_atomic(&self) -> bool {
        !matches!(self, Scale::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Feature,
    Protected,
    Response,
    Excluded,
}

/// Invertible pre-transform applied to a continuous column at load time and
/// inverted at export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreTransform {
    #[default]
    None,
    Log,
}

impl PreTransform {
    pub fn apply(&self, v: f64) -> Result<f64> {
        match self {
            PreTransform::None => Ok(v),
            PreTransform::Log => {
                if v <= 0.0 {
                    Err(Error::Domain(format!("log pre-transform of non-positive value {v}")))
                } else {
                    Ok(v.ln())
                }
            }
        }
    }

    pub fn invert(&self, v: f64) -> f64 {
        match self {
            PreTransform::None => v,
            PreTransform::Log => v.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub scale: Scale,
    pub role: Role,
    #[serde(default)]
    pub pre_transform: PreTransform,
}

impl ColumnSpec {
    pub fn new(name: &str, scale: Scale, role: Role) -> Self {
        ColumnSpec {
            name: name.to_string(),
            scale,
            role,
            pre_transform: PreTransform::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    Count(Vec<u64>),
    Binary(Vec<u8>),
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Count(v) => v.len(),
            ColumnData::Binary(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Numeric view of the column. Categorical columns yield their level
    /// codes; use one-hot encoding for design matrices instead.
    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            ColumnData::Continuous(v) => v.clone(),
            ColumnData::Count(v) => v.iter().map(|&x| x as f64).collect(),
            ColumnData::Binary(v) => v.iter().map(|&x| x as f64).collect(),
            ColumnData::Categorical { codes, .. } => codes.iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn levels(&self) -> Option<&[String]> {
        match self {
            ColumnData::Categorical { levels, .. } => Some(levels),
            _ => None,
        }
    }

    /// Render one value for CSV export, inverting any pre-transform.
    pub fn render(&self, i: usize, pre: PreTransform) -> String {
        match self {
            ColumnData::Continuous(v) => format!("{}", pre.invert(v[i])),
            ColumnData::Count(v) => format!("{}", v[i]),
            ColumnData::Binary(v) => format!("{}", v[i]),
            ColumnData::Categorical { codes, levels } => levels[codes[i] as usize].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    specs: Vec<ColumnSpec>,
    columns: Vec<ColumnData>,
    n: usize,
}

impl Dataset {
    pub fn new(specs: Vec<ColumnSpec>, columns: Vec<ColumnData>) -> Result<Self> {
        if specs.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} column specs but {} data columns",
                specs.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::Schema("dataset has no columns".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::Validation("dataset has no rows".into()));
        }
        for (spec, col) in specs.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Validation(format!(
                    "column `{}` has {} rows, expected {n}",
                    spec.name,
                    col.len()
                )));
            }
        }
        Ok(Dataset { specs, columns, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn specs(&self) -> &[ColumnSpec] {
        &self.specs
    }

    pub fn spec(&self, name: &str) -> Result<&ColumnSpec> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData> {
        let idx = self
            .specs
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))?;
        Ok(&self.columns[idx])
    }

    pub fn columns_with_role(&self, role: Role) -> Vec<&ColumnSpec> {
        self.specs.iter().filter(|s| s.role == role).collect()
    }

    pub fn protected(&self) -> Vec<&ColumnSpec> {
        self.columns_with_role(Role::Protected)
    }

    pub fn features(&self) -> Vec<&ColumnSpec> {
        self.columns_with_role(Role::Feature)
    }

    pub fn response(&self) -> Result<&ColumnSpec> {
        let mut it = self.specs.iter().filter(|s| s.role == Role::Response);
        match (it.next(), it.next()) {
            (Some(s), None) => Ok(s),
            (None, _) => Err(Error::Role("no response column declared".into())),
            (Some(_), Some(_)) => Err(Error::Role("more than one response column declared".into())),
        }
    }

    /// Protected-group label per row, formed by joining the protected
    /// columns' rendered values. Used for group-wise diagnostics.
    pub fn protected_labels(&self) -> Result<Vec<String>> {
        let prot = self.protected();
        if prot.is_empty() {
            return Err(Error::Role("no protected columns declared".into()));
        }
        let mut labels = vec![String::new(); self.n];
        for (k, spec) in prot.iter().enumerate() {
            let col = self.column(&spec.name)?;
            for (i, label) in labels.iter_mut().enumerate() {
                if k > 0 {
                    label.push('|');
                }
                label.push_str(&col.render(i, PreTransform::None));
            }
        }
        Ok(labels)
    }

    pub fn write_csv<W: Write>(&self, w: W, names: &[&str]) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(names)?;
        let cols: Vec<(&ColumnSpec, &ColumnData)> = names
            .iter()
            .map(|n| {
                let spec = self.spec(n)?;
                Ok((spec, self.column(n)?))
            })
            .collect::<Result<_>>()?;
        for i in 0..self.n {
            let record: Vec<String> = cols
                .iter()
                .map(|(spec, col)| col.render(i, spec.pre_transform))
                .collect();
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Load and validate a CSV file against `schema`. Columns present in the file
/// but absent from the schema are ignored; schema columns missing from the
/// header are a schema error.
pub fn load_csv(path: &Path, schema: &[ColumnSpec]) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Schema(format!("cannot open `{}`: {e}", path.display()))
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let mut header_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        header_index.insert(h, i);
    }
    let mut missing: Vec<&str> = Vec::new();
    let mut field_of: Vec<usize> = Vec::with_capacity(schema.len());
    for spec in schema {
        match header_index.get(spec.name.as_str()) {
            Some(&i) => field_of.push(i),
            None => missing.push(&spec.name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "header of `{}` is missing schema column(s): {}",
            path.display(),
            missing.join(", ")
        )));
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        for (j, &field) in field_of.iter().enumerate() {
            let value = record.get(field).unwrap_or("").trim();
            if value.is_empty() {
                return Err(Error::Validation(format!(
                    "missing value in column `{}` at row {row_idx}",
                    schema[j].name
                )));
            }
            raw[j].push(value.to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(Error::Validation(format!("`{}` contains no data rows", path.display())));
    }

    let mut columns = Vec::with_capacity(schema.len());
    for (spec, values) in schema.iter().zip(raw) {
        columns.push(parse_column(spec, &values)?);
    }
    Dataset::new(schema.to_vec(), columns)
}

fn parse_column(spec: &ColumnSpec, values: &[String]) -> Result<ColumnData> {
    match spec.scale {
        Scale::Continuous => {
            let mut out = Vec::with_capacity(values.len());
            for (row, v) in values.iter().enumerate() {
                let x: f64 = v.parse().map_err(|_| Error::ColumnType {
                    column: spec.name.clone(),
                    row,
                    message: format!("`{v}` is not a real number"),
                })?;
                if !x.is_finite() {
                    return Err(Error::ColumnType {
                        column: spec.name.clone(),
                        row,
                        message: format!("non-finite value `{v}`"),
                    });
                }
                out.push(spec.pre_transform.apply(x)?);
            }
            Ok(ColumnData::Continuous(out))
        }
        Scale::Count => {
            let mut out = Vec::with_capacity(values.len());
            for (row, v) in values.iter().enumerate() {
                let x: u64 = v.parse().map_err(|_| Error::ColumnType {
                    column: spec.name.clone(),
                    row,
                    message: format!("`{v}` is not a non-negative integer"),
                })?;
                out.push(x);
            }
            Ok(ColumnData::Count(out))
        }
        Scale::Binary => {
            let mut out = Vec::with_capacity(values.len());
            for (row, v) in values.iter().enumerate() {
                match v.as_str() {
                    "0" => out.push(0),
                    "1" => out.push(1),
                    _ => {
                        return Err(Error::ColumnType {
                            column: spec.name.clone(),
                            row,
                            message: format!("`{v}` is not in {{0,1}}"),
                        })
                    }
                }
            }
            Ok(ColumnData::Binary(out))
        }
        Scale::Categorical => {
            let mut levels: Vec<String> = values.to_vec();
            levels.sort();
            levels.dedup();
            let index: BTreeMap<&str, u32> = levels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i as u32))
                .collect();
            let codes = values.iter().map(|v| index[v.as_str()]).collect();
            Ok(ColumnData::Categorical { codes, levels })
        }
    }
}

/// Confirm the role invariants: exactly one response column, and at least one
/// protected column when a transform is requested.
pub fn validate_roles(ds: &Dataset, require_protected: bool) -> Result<()> {
    ds.response()?;
    if require_protected && ds.protected().is_empty() {
        return Err(Error::Role(
            "a transform requires at least one protected column".into(),
        ));
    }
    Ok(())
}
