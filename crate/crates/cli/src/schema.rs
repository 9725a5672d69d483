//! On-disk formats. Every file carries `"format": 1`; complex numbers are
//! `[re, im]` pairs and matrices are lists of rows.

use std::path::Path;

use corners::geometry::{Chart, FaceEmbedding, Partition, PolyMap};
use corners::localization::{GridSpace, ParamFamily};
use corners::operators::CMatrix;
use corners::symbols::{CornerModel, SymbolExpr, SymbolTuple};
use corners::{CornerComplex, FaceId, Polytope};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT: u32 = 1;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn to_matrix(m: &JsonMatrix) -> Result<CMatrix, CliError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input("matrix rows have different lengths".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(m[i][j][0], m[i][j][1])
    }))
}

pub fn from_matrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn check_format(found: Option<u32>, path: &str) -> Result<(), CliError> {
    match found {
        Some(FORMAT) | None => Ok(()),
        Some(v) => Err(CliError::Input(format!(
            "{path}: unsupported format {v}, expected {FORMAT}"
        ))),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{path}: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// A complex given as a builtin name (`builtin:cube`), a polytope file or a complex file.
pub fn load_complex(spec: &str) -> Result<CornerComplex, CliError> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin_complex(name);
    }
    let value: serde_json::Value = read_json(spec)?;
    check_format(
        value
            .get("format")
            .and_then(|v| v.as_u64())
            .map(|v| v as u32),
        spec,
    )?;
    if value.get("facets").is_some() {
        let p: Polytope = serde_json::from_value(value)
            .map_err(|e| CliError::Input(format!("{spec}: polytope: {e}")))?;
        Ok(CornerComplex::from_polytope(&p)?)
    } else {
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{spec}: complex: {e}")))
    }
}

pub fn builtin_polytope(name: &str) -> Option<Polytope> {
    use corners::polytopes::*;
    Some(match name {
        "interval" => interval(),
        "square" => square(),
        "cube" => cube(),
        "tetrahedron" => tetrahedron(),
        "dodecahedron" => dodecahedron(),
        "icosahedron" => icosahedron(),
        _ => return None,
    })
}

fn builtin_complex(name: &str) -> Result<CornerComplex, CliError> {
    if name == "one-gon" {
        return Ok(CornerComplex::one_gon());
    }
    let p = builtin_polytope(name)
        .ok_or_else(|| CliError::Input(format!("unknown builtin complex {name:?}")))?;
    Ok(CornerComplex::from_polytope(&p)?)
}

pub fn model(name: &str) -> Result<CornerModel, CliError> {
    Ok(match name {
        "point" => CornerModel::point(),
        "interval" => CornerModel::unit_box(1)?,
        "square" => CornerModel::unit_box(2)?,
        "cube" => CornerModel::unit_box(3)?,
        "one-gon" => CornerModel::one_gon()?,
        _ => {
            return Err(CliError::Input(format!(
                "unknown model {name:?}; use point, interval, square, cube or one-gon"
            )))
        }
    })
}

/// A glued exponential map of one face.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceMapSpec {
    pub face: FaceId,
    pub base: Vec<(f64, f64)>,
    pub immersion: PolyMap,
    pub charts: Vec<Chart>,
    #[serde(default = "normalized")]
    pub partition: Partition,
}

fn normalized() -> Partition {
    Partition::Normalized
}

/// `face ≻ into`, checked on `base × [0, eps]` of the larger face.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub face: FaceId,
    pub into: FaceId,
    #[serde(flatten)]
    pub embedding: FaceEmbedding,
    pub base: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtlasFile {
    #[serde(default)]
    pub format: Option<u32>,
    pub maps: Vec<FaceMapSpec>,
    #[serde(default)]
    pub embeddings: Vec<EmbeddingSpec>,
}

pub fn load_atlas(spec: &str) -> Result<AtlasFile, CliError> {
    let atlas = match spec.strip_prefix("builtin:") {
        Some("square") => crate::examples::square_atlas(),
        Some("one-gon") => crate::examples::one_gon_atlas(),
        Some(other) => return Err(CliError::Input(format!("unknown builtin atlas {other:?}"))),
        None => read_json(spec)?,
    };
    check_format(atlas.format, spec)?;
    Ok(atlas)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalRepSpec {
    pub center: usize,
    /// Ball radius; ignored when `hood` is given.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub hood: Option<Vec<usize>>,
    pub family: Vec<JsonMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default)]
    pub format: Option<u32>,
    pub space: GridSpace,
    pub q_nodes: Vec<Vec<f64>>,
    /// One matrix per parameter node.
    pub family: Vec<JsonMatrix>,
    #[serde(default)]
    pub local: Vec<LocalRepSpec>,
    /// Node set for the restricted norm (all nodes when absent).
    #[serde(default)]
    pub set: Option<Vec<usize>>,
    /// Center node of the ideal-membership profile.
    #[serde(default)]
    pub node: Option<usize>,
}

impl FamilyFile {
    fn family_of(&self, mats: &[JsonMatrix], what: &str) -> Result<ParamFamily, CliError> {
        if mats.len() != self.q_nodes.len() {
            return Err(CliError::Input(format!(
                "{what}: {} matrices for {} parameter nodes",
                mats.len(),
                self.q_nodes.len()
            )));
        }
        let mats = mats.iter().map(to_matrix).collect::<Result<Vec<_>, _>>()?;
        let dim = self.space.dim();
        if mats.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(CliError::Input(format!(
                "{what}: matrices must be {dim}×{dim}"
            )));
        }
        Ok(ParamFamily {
            q_nodes: self.q_nodes.clone(),
            mats,
        })
    }

    pub fn global(&self) -> Result<ParamFamily, CliError> {
        self.family_of(&self.family, "family")
    }

    pub fn local_reps(&self) -> Result<corners::localization::LocalRepFamily, CliError> {
        if self.local.is_empty() {
            return Err(CliError::Input(
                "the check needs local representatives (\"local\")".into(),
            ));
        }
        let mut centers = Vec::new();
        let mut reps = Vec::new();
        let mut hoods = Vec::new();
        for (i, l) in self.local.iter().enumerate() {
            if l.center >= self.space.len() {
                return Err(CliError::Input(format!("local[{i}]: no node {}", l.center)));
            }
            centers.push(l.center);
            reps.push(self.family_of(&l.family, &format!("local[{i}]"))?);
            hoods.push(match (&l.hood, l.radius) {
                (Some(h), _) => h.clone(),
                (None, Some(r)) => self.space.ball(l.center, r),
                (None, None) => {
                    return Err(CliError::Input(format!(
                        "local[{i}]: give \"hood\" or \"radius\""
                    )))
                }
            });
        }
        Ok(corners::localization::LocalRepFamily::new(
            centers, reps, hoods,
        )?)
    }
}

/// A multiplier symbol on the lattice `Z_N^d`, one matrix per flat frequency index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolFile {
    #[serde(default)]
    pub format: Option<u32>,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub base_dim: usize,
    #[serde(default = "unit")]
    pub h: f64,
    pub values: Vec<JsonMatrix>,
}

fn unit() -> f64 {
    1.0
}

pub fn load_symbol_file(path: &str) -> Result<SymbolFile, CliError> {
    let s: SymbolFile = read_json(path)?;
    check_format(s.format, path)?;
    Ok(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExprFile {
    #[serde(default)]
    pub format: Option<u32>,
    pub model: String,
    #[serde(default = "one")]
    pub param_dim: usize,
    pub symbol: SymbolExpr,
}

fn one() -> usize {
    1
}

pub fn load_expr(path: &str) -> Result<ExprFile, CliError> {
    let e: ExprFile = match path.strip_prefix("builtin:") {
        Some(name) => crate::examples::expr(name)
            .ok_or_else(|| CliError::Input(format!("unknown builtin symbol {name:?}")))?,
        None => read_json(path)?,
    };
    check_format(e.format, path)?;
    Ok(e)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleFile {
    #[serde(default)]
    pub format: Option<u32>,
    pub model: String,
    pub tuple: SymbolTuple,
}

pub fn load_tuple(path: &str) -> Result<TupleFile, CliError> {
    let t: TupleFile = read_json(path)?;
    check_format(t.format, path)?;
    Ok(t)
}
