//! Built-in tables, copula-synthesised datasets, baseline candidate
//! functions and CSV ingestion/emission.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::copula::{xor_f, CopulaParam, UnitValue};
use crate::fmt::g17;
use crate::linalg::{self, LinalgError, Matrix};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown dataset `{name}`; known datasets: {}", known.join(", "))]
    Unknown { name: String, known: Vec<&'static str> },
    #[error("unknown baseline `{name}`; known baselines: {}", known.join(", "))]
    UnknownBaseline { name: String, known: Vec<&'static str> },
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("line {line}: column `{column}` value {value} is outside [0, 1]")]
    Domain { line: u64, column: String, value: f64 },
    #[error("dataset has no samples")]
    Empty,
    #[error("sample {index} has {actual} values, expected {expected}")]
    Arity { index: usize, expected: usize, actual: usize },
    #[error("dataset `{name}` has target columns [{}]; select one explicitly", columns.join(", "))]
    MultiTarget { name: String, columns: Vec<String> },
    #[error("dataset has no target column named `{0}`")]
    NoSuchTarget(String),
    #[error("value {0} is outside [0, 1]")]
    OutOfUnit(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub inputs: Vec<UnitValue>,
    pub targets: Vec<UnitValue>,
}

impl Sample {
    pub fn input_values(&self) -> Vec<f64> {
        self.inputs.iter().map(|v| v.get()).collect()
    }

    pub fn target_values(&self) -> Vec<f64> {
        self.targets.iter().map(|v| v.get()).collect()
    }
}

/// A named table of samples. Equality ignores `reconstructed`.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    inputs: Vec<String>,
    targets: Vec<String>,
    samples: Vec<Sample>,
    reconstructed: Vec<usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.inputs == other.inputs
            && self.targets == other.targets
            && self.samples == other.samples
    }
}

impl Dataset {
    pub fn new(name: &str, inputs: Vec<String>, targets: Vec<String>, samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(DatasetError::Empty);
        }
        for (index, s) in samples.iter().enumerate() {
            if s.inputs.len() != inputs.len() {
                return Err(DatasetError::Arity {
                    index,
                    expected: inputs.len(),
                    actual: s.inputs.len(),
                });
            }
            if s.targets.len() != targets.len() {
                return Err(DatasetError::Arity {
                    index,
                    expected: targets.len(),
                    actual: s.targets.len(),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            inputs,
            targets,
            samples,
            reconstructed: Vec::new(),
        })
    }

    /// Builds a dataset from raw rows laid out as inputs then targets.
    pub fn from_rows(name: &str, inputs: &[&str], targets: &[&str], rows: &[&[f64]]) -> Result<Self> {
        let k = inputs.len();
        let samples = rows
            .iter()
            .enumerate()
            .map(|(index, row)| {
                if row.len() != k + targets.len() {
                    return Err(DatasetError::Arity {
                        index,
                        expected: k + targets.len(),
                        actual: row.len(),
                    });
                }
                let unit = |v: f64| UnitValue::new(v).map_err(|_| DatasetError::OutOfUnit(v));
                Ok(Sample {
                    inputs: row[..k].iter().map(|&v| unit(v)).collect::<Result<_>>()?,
                    targets: row[k..].iter().map(|&v| unit(v)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            name,
            inputs.iter().map(|s| s.to_string()).collect(),
            targets.iter().map(|s| s.to_string()).collect(),
            samples,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_names(&self) -> &[String] {
        &self.inputs
    }

    pub fn target_names(&self) -> &[String] {
        &self.targets
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Row indices that were completed rather than read from a printed table.
    pub fn reconstructed_rows(&self) -> &[usize] {
        &self.reconstructed
    }

    /// `(inputs, target)` pairs for single-target datasets.
    pub fn pairs(&self) -> Result<Vec<(Vec<f64>, f64)>> {
        if self.targets.len() != 1 {
            return Err(DatasetError::MultiTarget {
                name: self.name.clone(),
                columns: self.targets.clone(),
            });
        }
        Ok(self
            .samples
            .iter()
            .map(|s| (s.input_values(), s.targets[0].get()))
            .collect())
    }

    /// Keeps only the named target column.
    pub fn select_target(&self, column: &str) -> Result<Dataset> {
        let idx = self
            .targets
            .iter()
            .position(|t| t == column)
            .ok_or_else(|| DatasetError::NoSuchTarget(column.to_string()))?;
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                inputs: s.inputs.clone(),
                targets: vec![s.targets[idx]],
            })
            .collect();
        let mut ds = Dataset::new(&self.name, self.inputs.clone(), vec![column.to_string()], samples)?;
        ds.reconstructed = self.reconstructed.clone();
        Ok(ds)
    }

    /// Whether every input and target is exactly 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.samples
            .iter()
            .flat_map(|s| s.inputs.iter().chain(&s.targets))
            .all(|v| v.get() == 0.0 || v.get() == 1.0)
    }

    /// All columns as name list and raw rows, inputs first.
    pub fn columns_and_rows(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let names = self.inputs.iter().chain(&self.targets).cloned().collect();
        let rows = self
            .samples
            .iter()
            .map(|s| s.inputs.iter().chain(&s.targets).map(|v| v.get()).collect())
            .collect();
        (names, rows)
    }
}

pub const BUILTIN_NAMES: [&str; 9] = [
    "boolean_xor",
    "boolean_and",
    "boolean_or",
    "fig2_1",
    "fig2_4",
    "analog",
    "copula_s1",
    "all",
    "outsample_fig7_2",
];

const X: [&str; 2] = ["x1", "x2"];

fn logic_table(name: &str, rows: &[[f64; 5]]) -> Dataset {
    let rows: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
    Dataset::from_rows(name, &X, &["target_and", "target_or", "target_xor"], &rows).expect("static table")
}

fn single(name: &str, rows: &[[f64; 3]]) -> Dataset {
    let rows: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
    Dataset::from_rows(name, &X, &["target"], &rows).expect("static table")
}

/// Looks up a built-in table by name.
pub fn builtin(name: &str) -> Result<Dataset> {
    let ds = match name {
        "boolean_xor" => single(name, &[[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]),
        "boolean_and" => single(name, &[[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0]]),
        "boolean_or" => single(name, &[[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]]),
        "fig2_1" => logic_table(
            name,
            &[
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 1.0, 1.0],
                [1.0, 1.0, 1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [1.0, 0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [1.0, 1.0, 1.0, 1.0, 0.0],
                [1.0, 1.0, 1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
            ],
        ),
        "fig2_4" => logic_table(
            name,
            &[
                [1.0, 0.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [1.0, 0.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [1.0, 1.0, 1.0, 1.0, 0.0],
                [1.0, 0.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
                [0.0, 1.0, 0.0, 1.0, 1.0],
            ],
        ),
        "analog" => single(
            name,
            &[[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.75, 0.75], [0.0, 1.0, 1.0], [0.5, 0.0, 0.5]],
        ),
        "copula_s1" => single(
            name,
            &[
                [0.25, 0.25, 0.375],
                [0.25, 0.5, 0.5],
                [0.25, 0.75, 0.625],
                [0.5, 0.25, 0.5],
                [0.5, 0.5, 0.5],
            ],
        ),
        "all" => {
            let mut ds = single(
                name,
                &[
                    [0.0, 0.0, 0.0],
                    [0.0, 0.5, 0.5],
                    [0.0, 1.0, 1.0],
                    [0.5, 0.0, 0.5],
                    [0.5, 0.5, 0.5],
                    [0.5, 1.0, 0.5],
                    [1.0, 0.0, 1.0],
                    [1.0, 0.5, 0.5],
                    [1.0, 1.0, 0.0],
                ],
            );
            // Only the first five rows are printed; the rest complete the
            // {0, 0.5, 1} lattice with the s = 1 xor targets.
            ds.reconstructed = vec![5, 6, 7, 8];
            ds
        }
        "outsample_fig7_2" => {
            let rows: [[f64; 5]; 5] = [
                [0.5, 1.0, 0.5, 0.5, 0.5],
                [0.5, 0.5, 0.0, 0.5, 1.0],
                [0.75, 0.25, 0.5, 0.625, 1.0],
                [0.75, 0.5, 0.25, 0.5, 0.75],
                [0.75, 0.75, 0.0, 0.375, 0.5],
            ];
            let rows: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
            Dataset::from_rows(name, &X, &["target_s0", "target_s1", "target_sinf"], &rows).expect("static table")
        }
        _ => {
            return Err(DatasetError::Unknown {
                name: name.to_string(),
                known: BUILTIN_NAMES.to_vec(),
            })
        }
    };
    Ok(ds)
}

/// Inputs of a `steps x steps` lattice over `[0, 1]^2`, x1-major.
pub fn grid_inputs(steps: usize) -> Vec<(f64, f64)> {
    let at = |i: usize| if steps <= 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
    (0..steps)
        .flat_map(|i| (0..steps).map(move |j| (at(i), at(j))))
        .collect()
}

/// Dataset whose targets are `F_s(x1, x2)`.
pub fn synth_copula(s: CopulaParam, inputs: &[(f64, f64)]) -> Result<Dataset> {
    let unit = |v: f64| UnitValue::new(v).map_err(|_| DatasetError::OutOfUnit(v));
    let samples = inputs
        .iter()
        .map(|&(x1, x2)| {
            let (a, b) = (unit(x1)?, unit(x2)?);
            Ok(Sample {
                inputs: vec![a, b],
                targets: vec![xor_f(s, a, b)],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        &format!("copula_s{s}"),
        X.iter().map(|s| s.to_string()).collect(),
        vec!["target".into()],
        samples,
    )
}

/// Named candidate functions for the xor approximation and the
/// regression-plus-rounding discriminants for and/or.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Fa,
    Fb,
    Fc,
    Fd,
    Fe,
    Fg,
    Rand,
    Ror,
    OutAnd,
    OutOr,
}

impl Baseline {
    pub const ALL: [Baseline; 10] = [
        Baseline::Fa,
        Baseline::Fb,
        Baseline::Fc,
        Baseline::Fd,
        Baseline::Fe,
        Baseline::Fg,
        Baseline::Rand,
        Baseline::Ror,
        Baseline::OutAnd,
        Baseline::OutOr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Fa => "Fa",
            Baseline::Fb => "Fb",
            Baseline::Fc => "Fc",
            Baseline::Fd => "Fd",
            Baseline::Fe => "Fe",
            Baseline::Fg => "Fg",
            Baseline::Rand => "Rand",
            Baseline::Ror => "Ror",
            Baseline::OutAnd => "outAnd",
            Baseline::OutOr => "outOr",
        }
    }

    pub fn eval(self, x1: f64, x2: f64) -> f64 {
        let round = |v: f64| if v > 0.5 { 1.0 } else { 0.0 };
        match self {
            Baseline::Fa => 1.0,
            Baseline::Fb => 0.0,
            Baseline::Fc => 0.5,
            Baseline::Fd => 2.0 * x1 + 2.0 * x2 - 1.0,
            Baseline::Fe => x1 + x2 - 2.0 * x1 * x2,
            Baseline::Fg => x1 + x2 - 2.0 * (x1 * x2),
            Baseline::Rand => 0.5 * x1 + 0.5 * x2 - 0.25,
            Baseline::Ror => 0.5 * x1 + 0.5 * x2 + 0.25,
            Baseline::OutAnd => round(Baseline::Rand.eval(x1, x2)),
            Baseline::OutOr => round(Baseline::Ror.eval(x1, x2)),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| DatasetError::UnknownBaseline {
                name: s.to_string(),
                known: Baseline::ALL.iter().map(|b| b.name()).collect(),
            })
    }
}

pub fn baseline(name: &str, x1: UnitValue, x2: UnitValue) -> Result<f64> {
    Ok(name.parse::<Baseline>()?.eval(x1.get(), x2.get()))
}

/// Sum of squared errors of `predict` over a single-target dataset.
pub fn sse<F: Fn(&[f64]) -> f64>(predict: F, data: &Dataset) -> Result<f64> {
    Ok(data
        .pairs()?
        .iter()
        .map(|(x, t)| {
            let e = predict(x) - t;
            e * e
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regression {
    /// Input weights, then the product weight if requested, then the bias.
    pub weights: Vec<f64>,
    pub feature_names: Vec<String>,
    pub sse: f64,
}

/// Least-squares fit of `w . [x; (x1 * x2); 1]` to a single-target dataset.
pub fn regress(data: &Dataset, product_feature: bool) -> Result<Regression> {
    let pairs = data.pairs()?;
    let features = |x: &[f64]| {
        let mut f = x.to_vec();
        if product_feature {
            f.push(x.iter().product());
        }
        f.push(1.0);
        f
    };
    let rows: Vec<Vec<f64>> = pairs.iter().map(|(x, _)| features(x)).collect();
    let design = Matrix::from_rows(&rows)?.transpose();
    let targets = Matrix::from_rows(&[pairs.iter().map(|(_, t)| *t).collect::<Vec<_>>()])?;
    let w = linalg::least_squares(&design, &targets)?;
    let weights = w.row(0).to_vec();
    let sse = rows
        .iter()
        .zip(&pairs)
        .map(|(f, (_, t))| {
            let e = f.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() - t;
            e * e
        })
        .sum();
    let mut feature_names = data.input_names().to_vec();
    if product_feature {
        feature_names.push(data.input_names().join("*"));
    }
    feature_names.push("bias".into());
    Ok(Regression {
        weights,
        feature_names,
        sse,
    })
}

/// CSV text: input columns then target column(s), 17 significant digits.
pub fn to_csv_string(data: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let (names, rows) = data.columns_and_rows();
    w.write_record(&names)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| g17(v)))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn emit_csv(data: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(data)?)?;
    Ok(())
}

/// Parses CSV text. Columns named `target` or `target_*` are targets and
/// must follow the inputs.
pub fn parse_csv(name: &str, text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let is_target = |h: &str| h == "target" || h.starts_with("target_");
    let k = header.iter().position(|h| is_target(h)).ok_or(DatasetError::Parse {
        line: 1,
        reason: "header has no `target` or `target_*` column".into(),
    })?;
    if k == 0 || !header[k..].iter().all(|h| is_target(h)) {
        return Err(DatasetError::Parse {
            line: 1,
            reason: "header must list input columns first, then target columns".into(),
        });
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DatasetError::Parse {
                line,
                reason: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(DatasetError::Parse {
                line,
                reason: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(record.len());
        for (field, column) in record.iter().zip(&header) {
            let v: f64 = field.parse().map_err(|_| DatasetError::Parse {
                line,
                reason: format!("column `{column}`: `{field}` is not a number"),
            })?;
            let u = UnitValue::new(v).map_err(|_| DatasetError::Domain {
                line,
                column: column.clone(),
                value: v,
            })?;
            values.push(u);
        }
        let targets = values.split_off(k);
        samples.push(Sample {
            inputs: values,
            targets,
        });
    }
    Dataset::new(name, header[..k].to_vec(), header[k..].to_vec(), samples)
}

/// Loads a CSV file; the dataset takes the file stem as its name.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    parse_csv(name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problogic::{check_consistency, empirical_frequencies};
    use proptest::prelude::*;

    fn u(v: f64) -> UnitValue {
        UnitValue::new(v).unwrap()
    }

    #[test]
    fn builtin_examples() {
        let xor = builtin("boolean_xor").unwrap();
        assert_eq!(
            xor.pairs().unwrap(),
            vec![
                (vec![0.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![1.0, 0.0], 1.0),
                (vec![1.0, 1.0], 0.0)
            ]
        );
        let c = builtin("copula_s1").unwrap();
        assert_eq!(c.pairs().unwrap()[0], (vec![0.25, 0.25], 0.375));
        let o = builtin("outsample_fig7_2").unwrap();
        assert_eq!(o.samples()[1].input_values(), vec![0.5, 0.5]);
        assert_eq!(o.samples()[1].target_values(), vec![0.0, 0.5, 1.0]);
        assert!(matches!(o.pairs(), Err(DatasetError::MultiTarget { .. })));
        let all = builtin("all").unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(all.reconstructed_rows(), [5, 6, 7, 8]);
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name(), name);
        }
        match builtin("nope") {
            Err(DatasetError::Unknown { known, .. }) => assert_eq!(known.len(), 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_agrees_with_its_parts_and_s1() {
        let all = builtin("all").unwrap();
        for name in ["analog", "copula_s1"] {
            for pair in builtin(name).unwrap().pairs().unwrap() {
                if let Some(row) = all.pairs().unwrap().iter().find(|r| r.0 == pair.0) {
                    assert_eq!(row.1, pair.1);
                }
            }
        }
        for (x, t) in all.pairs().unwrap() {
            assert_eq!(xor_f(CopulaParam::One, u(x[0]), u(x[1])).get(), t);
        }
    }

    #[test]
    fn outsample_matches_xor_family() {
        let o = builtin("outsample_fig7_2").unwrap();
        let params = [CopulaParam::Zero, CopulaParam::One, CopulaParam::Infinity];
        for s in o.samples() {
            for (t, &p) in s.targets.iter().zip(&params) {
                let v = xor_f(p, s.inputs[0], s.inputs[1]).get();
                assert!((v - t.get()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boolean_tables_are_consistent() {
        for name in ["boolean_xor", "boolean_and", "boolean_or", "fig2_1", "fig2_4"] {
            let ds = builtin(name).unwrap();
            assert!(ds.is_boolean());
            let rows: Vec<Vec<f64>> = ds
                .samples()
                .iter()
                .map(|s| {
                    let (a, b) = (s.inputs[0].get(), s.inputs[1].get());
                    vec![a, b, a * b, a.max(b)]
                })
                .collect();
            let cols: Vec<String> = ["x1", "x2", "and", "or"].iter().map(|s| s.to_string()).collect();
            let f = empirical_frequencies(&cols, &rows).unwrap();
            let verdict = check_consistency(f["x1"].get(), f["x2"].get(), f["and"].get(), f["or"].get());
            assert!(verdict.consistent(), "{name}: {verdict:?}");
        }
    }

    #[test]
    fn logic_tables_follow_their_inputs() {
        for name in ["fig2_1", "fig2_4"] {
            for s in builtin(name).unwrap().samples() {
                let (a, b) = (s.inputs[0].get() == 1.0, s.inputs[1].get() == 1.0);
                let expect = [a && b, a || b, a ^ b].map(|v| if v { 1.0 } else { 0.0 });
                assert_eq!(s.target_values(), expect);
            }
        }
    }

    #[test]
    fn synth_copula_examples() {
        let c = builtin("copula_s1").unwrap();
        let inputs: Vec<(f64, f64)> = c.samples().iter().map(|s| (s.inputs[0].get(), s.inputs[1].get())).collect();
        let synth = synth_copula(CopulaParam::One, &inputs).unwrap();
        assert_eq!(synth.samples(), c.samples());
        let corners = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
        for s in [0.0, 0.5, 1.0, 2.0, 20.0, f64::INFINITY] {
            let ds = synth_copula(CopulaParam::new(s).unwrap(), &corners).unwrap();
            assert_eq!(ds.pairs().unwrap(), builtin("boolean_xor").unwrap().pairs().unwrap());
        }
        let ds = synth_copula(CopulaParam::new(2.0).unwrap(), &grid_inputs(5)).unwrap();
        assert_eq!(ds.len(), 25);
        for (x, t) in ds.pairs().unwrap() {
            let lo = xor_f(CopulaParam::Zero, u(x[0]), u(x[1])).get();
            let hi = xor_f(CopulaParam::Infinity, u(x[0]), u(x[1])).get();
            assert!(lo - 1e-12 <= t && t <= hi + 1e-12);
        }
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(Baseline::Fd.eval(1.0, 1.0), 3.0);
        assert_eq!(baseline("outOr", u(0.2), u(0.4)).unwrap(), 1.0);
        assert_eq!(baseline("outAnd", u(0.2), u(0.4)).unwrap(), 0.0);
        assert_eq!(baseline("outOr", u(0.2), u(0.0)).unwrap(), 0.0);
        assert_eq!(baseline("outAnd", u(0.8), u(0.9)).unwrap(), 1.0);
        for x in [0.0, 1.0] {
            assert_eq!(Baseline::Fe.eval(x, x), 0.0);
        }
        assert!(matches!(baseline("Fz", u(0.0), u(0.0)), Err(DatasetError::UnknownBaseline { .. })));
        for b in Baseline::ALL {
            assert_eq!(b.name().parse::<Baseline>().unwrap(), b);
        }
    }

    #[test]
    fn discriminants_reproduce_truth_tables() {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            assert_eq!(Baseline::OutAnd.eval(a, b), a * b);
            assert_eq!(Baseline::OutOr.eval(a, b), f64::max(a, b));
        }
    }

    #[test]
    fn goodness_of_fit_table() {
        let xor = builtin("boolean_xor").unwrap();
        let got: Vec<f64> = [Baseline::Fa, Baseline::Fb, Baseline::Fc, Baseline::Fd, Baseline::Fe]
            .iter()
            .map(|b| sse(|x| b.eval(x[0], x[1]), &xor).unwrap())
            .collect();
        assert_eq!(got, [2.0, 2.0, 1.0, 10.0, 0.0]);
        let exact = sse(|x| f64::from(x[0] != x[1]), &xor).unwrap();
        assert_eq!(exact, 0.0);
    }

    #[test]
    fn regressions() {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
        let xor = builtin("boolean_xor").unwrap();
        let r = regress(&xor, false).unwrap();
        assert!(close(&r.weights, &[0.0, 0.0, 0.5]), "{:?}", r.weights);
        assert!((r.sse - 1.0).abs() < 1e-9);
        let r = regress(&xor, true).unwrap();
        assert!(close(&r.weights, &[1.0, 1.0, -2.0, 0.0]), "{:?}", r.weights);
        assert!(r.sse.abs() < 1e-9);
        assert_eq!(r.feature_names, ["x1", "x2", "x1*x2", "bias"]);
        let r = regress(&builtin("boolean_and").unwrap(), false).unwrap();
        assert!(close(&r.weights, &[0.5, 0.5, -0.25]));
        let r = regress(&builtin("boolean_or").unwrap(), false).unwrap();
        assert!(close(&r.weights, &[0.5, 0.5, 0.25]));
    }

    #[test]
    fn csv_emit_shape() {
        let text = to_csv_string(&builtin("boolean_xor").unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x1,x2,target");
        assert_eq!(lines[2], "0,1,1");
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        for name in BUILTIN_NAMES {
            let ds = builtin(name).unwrap();
            let path = dir.path().join(format!("{name}.csv"));
            emit_csv(&ds, &path).unwrap();
            assert_eq!(load_csv(&path).unwrap(), ds);
        }
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match parse_csv("t", "x1,x2,target\n0,0,0\n0.5,1.5,1\n") {
            Err(DatasetError::Domain { line: 3, column, value }) => {
                assert_eq!(column, "x2");
                assert_eq!(value, 1.5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_csv("t", "x1,x2,target\n0,abc,0\n"),
            Err(DatasetError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_csv("t", "x1,x2,target\n0,0,0\n1,1\n"),
            Err(DatasetError::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_csv("t", "x1,x2\n0,0\n"), Err(DatasetError::Parse { line: 1, .. })));
        assert!(matches!(parse_csv("t", "x1,x2,target\n"), Err(DatasetError::Empty)));
    }

    proptest! {
        #[test]
        fn csv_round_trip_arbitrary(rows in prop::collection::vec(prop::array::uniform3(0.0f64..=1.0), 1..20)) {
            let rows: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
            let ds = Dataset::from_rows("r", &X, &["target"], &rows).unwrap();
            let back = parse_csv("r", &to_csv_string(&ds).unwrap()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
