//! Ready-made input files, printed by `corners example <name>`.

use corners::geometry::{examples as geo, FaceEmbedding, GlueOptions, GluedExpMap};
use corners::localization::{parameter_grid, GridSpace};
use corners::operators::{CMatrix, LatticeModel, MultiplierSymbol};
use corners::symbols::SymbolExpr;
use corners::FaceId;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::schema::{from_matrix, AtlasFile, EmbeddingSpec, ExprFile, FaceMapSpec, FORMAT};

pub const NAMES: &[&str] = &[
    "cube",
    "tetrahedron",
    "dodecahedron",
    "icosahedron",
    "square-atlas",
    "one-gon-atlas",
    "interval-symbol",
    "interval-positive-symbol",
    "square-symbol",
    "one-gon-symbol",
    "frozen-family",
    "shift-symbol",
];

fn spec_of(map: GluedExpMap) -> FaceMapSpec {
    FaceMapSpec {
        face: map.face,
        base: map.base,
        immersion: map.immersion,
        charts: map.charts,
        partition: map.partition,
    }
}

fn cheap() -> GlueOptions {
    GlueOptions {
        grid: 2,
        ..GlueOptions::default()
    }
}

pub fn square_atlas() -> AtlasFile {
    let maps = vec![
        geo::square_edge_map(&cheap())
            .expect("square edge charts glue")
            .map,
        geo::square_vertex_00_map(&cheap())
            .expect("vertex chart")
            .map,
        geo::square_vertex_10_map(&cheap())
            .expect("vertex chart")
            .map,
    ];
    let embedding = |into: FaceId, base: (f64, f64)| EmbeddingSpec {
        face: geo::SQUARE_EDGE,
        into,
        embedding: FaceEmbedding {
            normal_slots: vec![1],
        },
        base: vec![base],
    };
    AtlasFile {
        format: Some(FORMAT),
        maps: maps.into_iter().map(spec_of).collect(),
        embeddings: vec![
            embedding(geo::SQUARE_VERTEX_00, (0.0, 0.25)),
            embedding(geo::SQUARE_VERTEX_10, (0.75, 1.0)),
        ],
    }
}

pub fn one_gon_atlas() -> AtlasFile {
    let map = geo::one_gon_edge_map(&cheap())
        .expect("1-gon charts glue")
        .map;
    AtlasFile {
        format: Some(FORMAT),
        maps: vec![spec_of(map)],
        embeddings: Vec::new(),
    }
}

pub fn expr(name: &str) -> Option<ExprFile> {
    let (model, symbol) = match name {
        "interval" => ("interval", SymbolExpr::interval_example()),
        "interval-positive" => ("interval", SymbolExpr::positive_real(1, 1, &[1.0])),
        "square" => ("square", SymbolExpr::square_example()),
        "one-gon" => ("one-gon", SymbolExpr::one_gon_example()),
        _ => return None,
    };
    Some(ExprFile {
        format: Some(FORMAT),
        model: model.into(),
        param_dim: 1,
        symbol,
    })
}

/// `A(q) = a(x) + iq` with `a(x) = 1 + x` on 16 midpoints of `[0, 1]`, with
/// frozen local representatives at four centers.
fn frozen_family() -> Value {
    let n = 16;
    let space = GridSpace::interval(0.0, 1.0, n);
    let q_nodes = parameter_grid(1, 4.0, 5, 16.0, 0);
    let a: Vec<f64> = space.nodes.iter().map(|x| 1.0 + x[0]).collect();
    let diag = |f: &dyn Fn(usize) -> Complex64| {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = f(i);
        }
        from_matrix(&m)
    };
    let family: Vec<_> = q_nodes
        .iter()
        .map(|q| diag(&|i| Complex64::new(a[i], q[0])))
        .collect();
    let local: Vec<Value> = [0, 5, 10, 15]
        .iter()
        .map(|&c| {
            let fam: Vec<_> = q_nodes
                .iter()
                .map(|q| diag(&|_| Complex64::new(a[c], q[0])))
                .collect();
            json!({ "center": c, "radius": 0.35, "family": fam })
        })
        .collect();
    json!({
        "format": FORMAT,
        "space": space,
        "q_nodes": q_nodes,
        "family": family,
        "local": local,
        "set": [0, 1, 2, 3],
        "node": 8,
    })
}

/// The unit lattice shift `e^{−iqh}` on `Z_16`.
fn shift_symbol() -> Value {
    let model = LatticeModel::new(1, 16, 1, 1.0).expect("valid lattice");
    let sym = MultiplierSymbol::from_fn(model, |q| {
        CMatrix::from_element(1, 1, Complex64::from_polar(1.0, -q[0]))
    });
    json!({
        "format": FORMAT,
        "d": 1,
        "N": 16,
        "base_dim": 1,
        "h": 1.0,
        "values": sym.values.iter().map(from_matrix).collect::<Vec<_>>(),
    })
}

pub fn example(name: &str) -> Option<Value> {
    if let Some(mut p) = crate::schema::builtin_polytope(name).map(|p| json!(p)) {
        p["format"] = json!(FORMAT);
        return Some(p);
    }
    Some(match name {
        "square-atlas" => json!(square_atlas()),
        "one-gon-atlas" => json!(one_gon_atlas()),
        "frozen-family" => frozen_family(),
        "shift-symbol" => shift_symbol(),
        _ => json!(expr(name.strip_suffix("-symbol")?)?),
    })
}
