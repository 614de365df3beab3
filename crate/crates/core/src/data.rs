//! CSV ingestion, train/test splitting and synthetic data.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::rng::{stream_rng, Stream};

/// Ordered distinct values of a column. Numeric when every value parses as
/// a number, ordered numerically; otherwise ordered as strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Levels {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

impl Levels {
    fn learn(values: &[&str]) -> Self {
        let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite())).collect();
        match numeric {
            Some(mut v) => {
                v.sort_by(f64::total_cmp);
                v.dedup();
                Levels::Numeric(v)
            }
            None => {
                let mut v: Vec<String> = values.iter().map(|s| s.to_string()).collect();
                v.sort();
                v.dedup();
                Levels::Text(v)
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Levels::Numeric(v) => v.len(),
            Levels::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 0-based rank of a raw cell value.
    pub fn index_of(&self, value: &str) -> Option<usize> {
        match self {
            Levels::Numeric(v) => {
                let x: f64 = value.parse().ok()?;
                v.iter().position(|&l| l == x)
            }
            Levels::Text(v) => v.iter().position(|l| l == value),
        }
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            Levels::Numeric(v) => v.iter().map(|x| x.to_string()).collect(),
            Levels::Text(v) => v.clone(),
        }
    }
}

/// Where the protected attribute comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeSource {
    /// Categorical column; values become groups in sorted order.
    Column(String),
    /// Numeric column; group 1 when the value is at least the column median.
    MedianSplit(String),
}

impl AttributeSource {
    pub fn column(&self) -> &str {
        match self {
            AttributeSource::Column(c) | AttributeSource::MedianSplit(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSpec {
    pub label_column: String,
    pub attribute: AttributeSource,
    /// Feature columns; all other columns when `None`.
    pub features: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeSchema {
    Column { name: String, levels: Levels },
    MedianSplit { name: String, median: f64 },
}

/// Column roles and value encodings learned from one file, reusable for
/// others (e.g. a test file encoded like its training file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    pub label_levels: Levels,
    pub attribute: AttributeSchema,
    pub features: Vec<String>,
}

impl CsvSchema {
    pub fn attribute_names(&self) -> Vec<String> {
        match &self.attribute {
            AttributeSchema::Column { levels, .. } => levels.names(),
            AttributeSchema::MedianSplit { name, median } => vec![format!("{name} < {median}"), format!("{name} >= {median}")],
        }
    }
}

struct Table {
    headers: Vec<String>,
    /// (line number, cells)
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        if rows.is_empty() {
            return Err(Error::Data(format!("{} has no data rows", path.display())));
        }
        Ok(Self { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}' (available: {})", self.headers.join(", "))))
    }

    fn cells(&self, col: usize) -> Vec<&str> {
        self.rows.iter().map(|(_, r)| r[col].as_str()).collect()
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let (line, cells) = &self.rows[row];
        cells[col]
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                Error::Data(format!(
                    "row {line}, column '{}': '{}' is not a finite number",
                    self.headers[col], cells[col]
                ))
            })
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Reads a CSV file with a header row. Labels are rank-mapped to `1..=k`.
/// Features are not normalized here.
pub fn load_csv(path: impl AsRef<Path>, spec: &CsvSpec) -> Result<(Dataset, CsvSchema)> {
    let table = Table::read(path.as_ref())?;
    let label_col = table.column(&spec.label_column)?;
    let attr_name = spec.attribute.column();
    let attr_col = table.column(attr_name)?;
    let label_levels = Levels::learn(&table.cells(label_col));
    if label_levels.len() < 2 {
        return Err(Error::Data(format!(
            "label column '{}' needs at least 2 distinct values, found {}",
            spec.label_column,
            label_levels.len()
        )));
    }
    let attribute = match &spec.attribute {
        AttributeSource::Column(name) => AttributeSchema::Column {
            name: name.clone(),
            levels: Levels::learn(&table.cells(attr_col)),
        },
        AttributeSource::MedianSplit(name) => {
            let mut values = (0..table.rows.len())
                .map(|r| table.number(r, attr_col))
                .collect::<Result<Vec<_>>>()?;
            AttributeSchema::MedianSplit {
                name: name.clone(),
                median: median(&mut values),
            }
        }
    };
    let features = match &spec.features {
        Some(f) => f.clone(),
        None => table
            .headers
            .iter()
            .filter(|h| **h != spec.label_column && *h != attr_name)
            .cloned()
            .collect(),
    };
    if features.is_empty() {
        return Err(Error::Data("no feature columns selected".into()));
    }
    for f in &features {
        if *f == spec.label_column || f == attr_name {
            return Err(Error::Data(format!("column '{f}' cannot be both a feature and the label or attribute")));
        }
    }
    let schema = CsvSchema {
        label_column: spec.label_column.clone(),
        label_levels,
        attribute,
        features,
    };
    let data = encode(&table, &schema)?;
    Ok((data, schema))
}

/// Reads a CSV file using an existing schema.
pub fn load_csv_with_schema(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    encode(&Table::read(path.as_ref())?, schema)
}

fn encode(table: &Table, schema: &CsvSchema) -> Result<Dataset> {
    let label_col = table.column(&schema.label_column)?;
    let feature_cols = schema
        .features
        .iter()
        .map(|f| table.column(f))
        .collect::<Result<Vec<_>>>()?;
    let n = table.rows.len();
    let mut labels = Vec::with_capacity(n);
    let mut attrs = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n * feature_cols.len());
    let (attr_col, attr_name) = match &schema.attribute {
        AttributeSchema::Column { name, .. } | AttributeSchema::MedianSplit { name, .. } => (table.column(name)?, name),
    };
    for (r, (line, cells)) in table.rows.iter().enumerate() {
        let y = schema.label_levels.index_of(&cells[label_col]).ok_or_else(|| {
            Error::Data(format!(
                "row {line}, column '{}': unknown label value '{}'",
                schema.label_column, cells[label_col]
            ))
        })?;
        labels.push(y + 1);
        let a = match &schema.attribute {
            AttributeSchema::Column { levels, .. } => levels.index_of(&cells[attr_col]).ok_or_else(|| {
                Error::Data(format!(
                    "row {line}, column '{attr_name}': unknown attribute value '{}'",
                    cells[attr_col]
                ))
            })?,
            AttributeSchema::MedianSplit { median, .. } => usize::from(table.number(r, attr_col)? >= *median),
        };
        attrs.push(a);
        for &c in &feature_cols {
            features.push(table.number(r, c)?);
        }
    }
    Dataset::from_flat(
        feature_cols.len(),
        features,
        labels,
        attrs,
        schema.label_levels.len(),
        schema.attribute_names(),
    )
}

/// Seeded uniform split; both parts keep the input order. The test part has
/// `round(n · test_fraction)` samples, at least one and leaving at least one.
pub fn train_test_split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidDataset("need at least 2 samples to split".into()));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Split, 0));
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((data.subset(&train)?, data.subset(&test)?))
}

/// Synthetic data with a planted group–label correlation: the first feature
/// is shifted by `group_shift` for group 1, and labels are quantile bins of a
/// noisy sum of all features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub dim: usize,
    pub k: usize,
    pub group_shift: f64,
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 200,
            dim: 3,
            k: 4,
            group_shift: 1.5,
            noise: 0.5,
        }
    }
}

pub fn synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    if spec.n < spec.k || spec.dim == 0 || spec.k < 2 {
        return Err(Error::InvalidConfig("synthetic data needs n >= k >= 2 and dim >= 1".into()));
    }
    let mut rng = stream_rng(seed, Stream::Synthetic, 0);
    let mut rows = Vec::with_capacity(spec.n);
    let mut attrs = Vec::with_capacity(spec.n);
    let mut latent = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = usize::from(rng.gen_bool(0.5));
        let mut x: Vec<f64> = (0..spec.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        x[0] += spec.group_shift * a as f64;
        let z = x.iter().sum::<f64>() + spec.noise * rng.sample::<f64, _>(StandardNormal);
        rows.push(x);
        attrs.push(a);
        latent.push(z);
    }
    let mut order: Vec<usize> = (0..spec.n).collect();
    order.sort_by(|&i, &j| latent[i].total_cmp(&latent[j]));
    let mut labels = vec![0; spec.n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = 1 + rank * spec.k / spec.n;
    }
    Dataset::new(rows, labels, attrs, spec.k, vec!["group 0".into(), "group 1".into()])
}
