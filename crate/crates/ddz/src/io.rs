//! JSON file formats.
//!
//! Dual matrix: `{"rows":r,"cols":c,"std":[[[re,im],...],...],"inf":[...]}`
//! with `inf` optional. Dual vector: `{"std":[[re,im],...],"inf":[...]}`.
//! Dual scalar: `{"std":[re,im],"inf":[re,im]}`. Floats are written in the
//! shortest form that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ddz_core::blocks::{BlockInstance, Theorem};
use ddz_core::digraphs::{AdjacencyBuild, DLinkedStars, DoubleStar, DutchWindmill, GraphSpec};
use ddz_core::{Complex64, ComplexMatrix, DualMatrix, DualScalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::Instance;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("schema error: {0}")]
    Schema(String),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Schema(e.to_string())
    }
}

type Entry = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub std: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_to_bipartite: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartite_split: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<Entry>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn parse_part(rows: usize, cols: usize, data: &[Vec<Entry>], what: &str) -> Result<ComplexMatrix, IoError> {
    if data.len() != rows {
        return Err(IoError::Schema(format!("{what}: expected {rows} rows, found {}", data.len())));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(IoError::Schema(format!("{what}: row {i} has {} entries, expected {cols}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            if !e[0].is_finite() || !e[1].is_finite() {
                return Err(IoError::Schema(format!("{what}: non-finite entry at ({i}, {j})")));
            }
            m[(i, j)] = Complex64::new(e[0], e[1]);
        }
    }
    Ok(m)
}

impl MatrixJson {
    pub fn from_dual(x: &DualMatrix) -> Self {
        Self {
            rows: x.nrows(),
            cols: x.ncols(),
            std: rows_of(&x.std),
            inf: Some(rows_of(&x.inf)),
            vertex_order: None,
            permutation_to_bipartite: None,
            bipartite_split: None,
            kappa: None,
        }
    }

    pub fn from_complex(x: &ComplexMatrix) -> Self {
        let mut out = Self::from_dual(&DualMatrix::from_std(x.clone()));
        out.inf = None;
        out
    }

    pub fn from_build(b: &AdjacencyBuild) -> Self {
        Self {
            vertex_order: Some(b.vertex_order.clone()),
            permutation_to_bipartite: b.permutation_to_bipartite.clone(),
            bipartite_split: b.bipartite_split,
            kappa: b.kappa,
            ..Self::from_dual(&b.matrix)
        }
    }

    pub fn to_dual(&self) -> Result<DualMatrix, IoError> {
        let std = parse_part(self.rows, self.cols, &self.std, "std")?;
        let inf = match &self.inf {
            Some(d) => parse_part(self.rows, self.cols, d, "inf")?,
            None => ComplexMatrix::zeros(self.rows, self.cols),
        };
        Ok(DualMatrix { std, inf })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub std: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf: Option<Vec<Entry>>,
}

impl VectorJson {
    pub fn from_dual(v: &DualMatrix) -> Self {
        let col = |m: &ComplexMatrix| (0..m.nrows()).map(|i| [m[(i, 0)].re, m[(i, 0)].im]).collect();
        Self { std: col(&v.std), inf: Some(col(&v.inf)) }
    }

    pub fn to_dual(&self) -> Result<DualMatrix, IoError> {
        let wrap = |v: &[Entry]| v.iter().map(|e| vec![*e]).collect::<Vec<_>>();
        let n = self.std.len();
        let std = parse_part(n, 1, &wrap(&self.std), "vector std")?;
        let inf = match &self.inf {
            Some(d) => parse_part(n, 1, &wrap(d), "vector inf")?,
            None => ComplexMatrix::zeros(n, 1),
        };
        Ok(DualMatrix { std, inf })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScalarJson {
    pub std: Entry,
    #[serde(default)]
    pub inf: Entry,
}

impl ScalarJson {
    pub fn from_dual(s: DualScalar) -> Self {
        Self { std: [s.std.re, s.std.im], inf: [s.inf.re, s.inf.im] }
    }

    pub fn to_dual(self) -> Result<DualScalar, IoError> {
        DualScalar::new(Complex64::new(self.std[0], self.std[1]), Complex64::new(self.inf[0], self.inf[1]))
            .map_err(|e| IoError::Schema(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BlockInstanceJson {
    pub theorem: String,
    pub blocks: BTreeMap<String, MatrixJson>,
}

impl BlockInstanceJson {
    pub fn from_instance(inst: &BlockInstance) -> Self {
        Self {
            theorem: inst.theorem.name().to_string(),
            blocks: inst.blocks.iter().map(|(k, v)| (k.clone(), MatrixJson::from_dual(v))).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<BlockInstance, IoError> {
        let theorem: Theorem = self.theorem.parse().map_err(|e: ddz_core::Error| IoError::Schema(e.to_string()))?;
        let mut blocks = BTreeMap::new();
        for name in theorem.block_names() {
            let m = self
                .blocks
                .get(*name)
                .ok_or_else(|| IoError::Schema(format!("{} instance is missing block {name}", theorem.name())))?;
            blocks.insert(name.to_string(), m.to_dual()?);
        }
        if let Some(extra) = self.blocks.keys().find(|k| !theorem.block_names().contains(&k.as_str())) {
            return Err(IoError::Schema(format!("unexpected block {extra} for {}", theorem.name())));
        }
        Ok(BlockInstance { theorem, blocks })
    }
}

/// Graph spec files, tagged by `family`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphJson {
    DoubleStar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        x: VectorJson,
        y: VectorJson,
        w: VectorJson,
        v: VectorJson,
        a: ScalarJson,
        b: ScalarJson,
    },
    DLinkedStars {
        base: MatrixJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<Vec<usize>>,
        x: Vec<VectorJson>,
        y: Vec<VectorJson>,
    },
    DutchWindmill {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        half: usize,
        blades: Vec<MatrixJson>,
        x: Vec<VectorJson>,
        y: Vec<VectorJson>,
    },
    /// Bipartite form `[[0, E], [F, 0]]`.
    Bipartite {
        #[serde(rename = "E")]
        e: MatrixJson,
        #[serde(rename = "F")]
        f: MatrixJson,
    },
}

fn vectors(v: &[VectorJson]) -> Result<Vec<DualMatrix>, IoError> {
    v.iter().map(VectorJson::to_dual).collect()
}

fn check_count(what: &str, declared: Option<usize>, actual: usize) -> Result<(), IoError> {
    match declared {
        Some(d) if d != actual => Err(IoError::Schema(format!("{what} = {d} but the data has {actual}"))),
        _ => Ok(()),
    }
}

impl GraphJson {
    pub fn from_spec(spec: &GraphSpec) -> Self {
        let vs = |v: &[DualMatrix]| v.iter().map(VectorJson::from_dual).collect();
        match spec {
            GraphSpec::DoubleStar(s) => GraphJson::DoubleStar {
                m: Some(s.m()),
                n: Some(s.n()),
                x: VectorJson::from_dual(&s.x),
                y: VectorJson::from_dual(&s.y),
                w: VectorJson::from_dual(&s.w),
                v: VectorJson::from_dual(&s.v),
                a: ScalarJson::from_dual(s.a),
                b: ScalarJson::from_dual(s.b),
            },
            GraphSpec::DLinkedStars(s) => GraphJson::DLinkedStars {
                base: MatrixJson::from_dual(&s.base),
                r: Some(s.x.iter().map(|v| v.nrows()).collect()),
                x: vs(&s.x),
                y: vs(&s.y),
            },
            GraphSpec::DutchWindmill(s) => GraphJson::DutchWindmill {
                m: Some(s.m()),
                half: s.half,
                blades: s.blades.iter().map(MatrixJson::from_dual).collect(),
                x: vs(&s.x),
                y: vs(&s.y),
            },
        }
    }

    pub fn to_instance(&self) -> Result<Instance, IoError> {
        Ok(match self {
            GraphJson::DoubleStar { m, n, x, y, w, v, a, b } => {
                let s = DoubleStar {
                    x: x.to_dual()?,
                    y: y.to_dual()?,
                    w: w.to_dual()?,
                    v: v.to_dual()?,
                    a: a.to_dual()?,
                    b: b.to_dual()?,
                };
                check_count("m", *m, s.m())?;
                check_count("n", *n, s.n())?;
                Instance::Graph(GraphSpec::DoubleStar(s))
            }
            GraphJson::DLinkedStars { base, r, x, y } => {
                let s = DLinkedStars { base: base.to_dual()?, x: vectors(x)?, y: vectors(y)? };
                if let Some(r) = r {
                    let actual: Vec<usize> = s.x.iter().map(|v| v.nrows()).collect();
                    if *r != actual {
                        return Err(IoError::Schema(format!("r = {r:?} but the leaf vectors have lengths {actual:?}")));
                    }
                }
                Instance::Graph(GraphSpec::DLinkedStars(s))
            }
            GraphJson::DutchWindmill { m, half, blades, x, y } => {
                let s = DutchWindmill {
                    half: *half,
                    blades: blades.iter().map(MatrixJson::to_dual).collect::<Result<_, _>>()?,
                    x: vectors(x)?,
                    y: vectors(y)?,
                };
                check_count("m", *m, s.m())?;
                Instance::Graph(GraphSpec::DutchWindmill(s))
            }
            GraphJson::Bipartite { e, f } => Instance::BipartiteDual { e: e.to_dual()?, f: f.to_dual()? },
        })
    }
}

/// Any instance file: a block instance (has `theorem`) or a graph spec (has `family`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum InstanceJson {
    Block(BlockInstanceJson),
    Graph(GraphJson),
}

impl InstanceJson {
    pub fn from_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Block(b) => InstanceJson::Block(BlockInstanceJson::from_instance(b)),
            Instance::Graph(g) => InstanceJson::Graph(GraphJson::from_spec(g)),
            Instance::BipartiteDual { e, f } => {
                InstanceJson::Graph(GraphJson::Bipartite { e: MatrixJson::from_dual(e), f: MatrixJson::from_dual(f) })
            }
        }
    }

    pub fn to_instance(&self) -> Result<Instance, IoError> {
        match self {
            InstanceJson::Block(b) => Ok(Instance::Block(b.to_instance()?)),
            InstanceJson::Graph(g) => g.to_instance(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

pub fn parse_matrix(text: &str) -> Result<DualMatrix, IoError> {
    serde_json::from_str::<MatrixJson>(text)?.to_dual()
}

pub fn read_matrix(path: &Path) -> Result<DualMatrix, IoError> {
    parse_matrix(&read_text(path)?)
}

pub fn write_matrix(path: &Path, x: &DualMatrix) -> Result<(), IoError> {
    write_json(path, &MatrixJson::from_dual(x))
}

pub fn matrix_to_string(x: &DualMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_dual(x)).expect("finite matrix serializes")
}

/// Block instance files and graph spec files, distinguished by their keys.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| IoError::Schema("instance must be a JSON object".into()))?;
    let parsed = if obj.contains_key("theorem") {
        InstanceJson::Block(serde_json::from_value(value)?)
    } else if obj.contains_key("family") {
        InstanceJson::Graph(serde_json::from_value(value)?)
    } else {
        return Err(IoError::Schema("instance needs a \"theorem\" or \"family\" key".into()));
    };
    parsed.to_instance()
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&read_text(path)?)
}

pub fn instance_to_string(inst: &Instance) -> String {
    serde_json::to_string(&InstanceJson::from_instance(inst)).expect("finite instance serializes")
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<(), IoError> {
    write_json(path, &InstanceJson::from_instance(inst))
}

/// Reads any JSON document, for weight files with optional fields.
pub fn read_value(path: &Path) -> Result<serde_json::Value, IoError> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}
