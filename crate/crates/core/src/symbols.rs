//! Symbol tuples `(σ_0, {σ_F})` of parameter-dependent operators, their
//! compatibility conditions, composition and the recursive ellipticity test.
//!
//! A global symbol is a [`SymbolExpr`] in base coordinates `x` and the joint
//! covariable/parameter vector `w = (ξ, q)`. Near a face the normal
//! covariables are read in logarithmic coordinates, so the face symbol of
//! `F` is the family obtained by freezing the coordinates fixed on `F` and
//! renaming the normal covariables as the new parameters `p`: its variables
//! are `(ξ_F, p, q)`. Interior symbols are stored as samples on a sphere grid
//! of the joint variables; face symbols keep both their family and their own
//! (recursive) tuple on the closed face.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{CornerComplex, FaceId};
use crate::error::{CornerError, Result};
use crate::localization::{
    glue, singular_values, GlueResult, GridSpace, LocalRepFamily, ParamFamily,
};
use crate::operators::{
    quantize, CMatrix, GroupAction, GroupElement, LatticeModel, MultiplierSymbol,
};
use crate::perm::Perm;
use crate::polytopes;

type C = Complex64;

/// `coef · ‖(w_v)_{v ∈ vars}‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTerm {
    pub coef: C,
    pub vars: Vec<usize>,
}

impl NormTerm {
    pub fn new(coef: impl Into<C>, vars: Vec<usize>) -> Self {
        NormTerm {
            coef: coef.into(),
            vars,
        }
    }

    fn eval(&self, w: &[f64]) -> C {
        self.coef * self.vars.iter().map(|&v| w[v] * w[v]).sum::<f64>().sqrt()
    }
}

/// Substitution for one old base coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XSub {
    Fixed(f64),
    Var(usize),
}

/// Order-zero symbols built from ratios of linear-plus-norm expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolExpr {
    Const {
        value: C,
    },
    /// `(n_0 + Σ c_j w_j + Σ norm terms) / (d_0 + Σ norm terms)`.
    Ratio {
        num_const: C,
        num_lin: Vec<C>,
        #[serde(default)]
        num_norms: Vec<NormTerm>,
        den_const: C,
        den_norms: Vec<NormTerm>,
    },
    /// `c_0 + Σ c_i x_i`, a coefficient depending on the base point only.
    Base {
        c0: f64,
        coeffs: Vec<f64>,
    },
    Product {
        factors: Vec<SymbolExpr>,
    },
    Sum {
        terms: Vec<SymbolExpr>,
    },
}

impl SymbolExpr {
    pub fn constant(value: impl Into<C>) -> Self {
        SymbolExpr::Const {
            value: value.into(),
        }
    }

    /// `(iξ + q + 1) / (|ξ| + |q| + 1)` on the interval, `w = (ξ, q)`.
    pub fn interval_example() -> Self {
        SymbolExpr::Ratio {
            num_const: C::new(1.0, 0.0),
            num_lin: vec![C::i(), C::new(1.0, 0.0)],
            num_norms: Vec::new(),
            den_const: C::new(1.0, 0.0),
            den_norms: vec![NormTerm::new(1.0, vec![0]), NormTerm::new(1.0, vec![1])],
        }
    }

    /// `(1 + |w| + i c·ξ) / (1 + |w|)` with `|w|` the sum of `|ξ|` and `|q|`;
    /// its real part is positive, so every member of the tuple is invertible.
    pub fn positive_real(xi_dim: usize, param_dim: usize, xi_coefs: &[f64]) -> Self {
        let norms = vec![
            NormTerm::new(1.0, (0..xi_dim).collect()),
            NormTerm::new(1.0, (xi_dim..xi_dim + param_dim).collect()),
        ];
        let mut num_lin = vec![C::new(0.0, 0.0); xi_dim + param_dim];
        for (j, &c) in xi_coefs.iter().enumerate() {
            num_lin[j] = C::new(0.0, c);
        }
        SymbolExpr::Ratio {
            num_const: C::new(1.0, 0.0),
            num_lin,
            num_norms: norms.clone(),
            den_const: C::new(1.0, 0.0),
            den_norms: norms,
        }
    }

    /// The square example: `(1 + 0.25 x_0) · (1 + |ξ| + |q| + iξ_1 + 0.5 iξ_2) / (1 + |ξ| + |q|)`.
    pub fn square_example() -> Self {
        SymbolExpr::Product {
            factors: vec![
                SymbolExpr::Base {
                    c0: 1.0,
                    coeffs: vec![0.25, 0.0],
                },
                SymbolExpr::positive_real(2, 1, &[1.0, 0.5]),
            ],
        }
    }

    /// A 1-gon symbol, symmetric under exchanging the two covariables.
    pub fn one_gon_example() -> Self {
        SymbolExpr::positive_real(2, 1, &[0.5, 0.5])
    }

    pub fn eval(&self, x: &[f64], w: &[f64]) -> C {
        match self {
            SymbolExpr::Const { value } => *value,
            SymbolExpr::Ratio {
                num_const,
                num_lin,
                num_norms,
                den_const,
                den_norms,
            } => {
                let num = num_const
                    + num_lin.iter().zip(w).map(|(c, v)| c * v).sum::<C>()
                    + num_norms.iter().map(|t| t.eval(w)).sum::<C>();
                let den = den_const + den_norms.iter().map(|t| t.eval(w)).sum::<C>();
                num / den
            }
            SymbolExpr::Base { c0, coeffs } => C::new(
                c0 + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
                0.0,
            ),
            SymbolExpr::Product { factors } => factors.iter().map(|f| f.eval(x, w)).product(),
            SymbolExpr::Sum { terms } => terms.iter().map(|f| f.eval(x, w)).sum(),
        }
    }

    /// The homogeneous limit `lim_{λ→∞} a(x, λw)`.
    pub fn principal(&self) -> SymbolExpr {
        match self {
            SymbolExpr::Ratio {
                num_lin,
                num_norms,
                den_norms,
                ..
            } if !den_norms.is_empty() => SymbolExpr::Ratio {
                num_const: C::new(0.0, 0.0),
                num_lin: num_lin.clone(),
                num_norms: num_norms.clone(),
                den_const: C::new(0.0, 0.0),
                den_norms: den_norms.clone(),
            },
            SymbolExpr::Product { factors } => SymbolExpr::Product {
                factors: factors.iter().map(|f| f.principal()).collect(),
            },
            SymbolExpr::Sum { terms } => SymbolExpr::Sum {
                terms: terms.iter().map(|f| f.principal()).collect(),
            },
            other => other.clone(),
        }
    }

    /// Substitutes old base coordinate `i` by `xsub[i]` and moves covariable `j` to slot `wmap[j]`.
    pub fn restrict(&self, xsub: &[XSub], new_xdim: usize, wmap: &[usize]) -> SymbolExpr {
        let move_vars = |vars: &[usize]| vars.iter().map(|&v| wmap[v]).collect::<Vec<_>>();
        let move_norms = |ts: &[NormTerm]| {
            ts.iter()
                .map(|t| NormTerm {
                    coef: t.coef,
                    vars: move_vars(&t.vars),
                })
                .collect::<Vec<_>>()
        };
        match self {
            SymbolExpr::Const { .. } => self.clone(),
            SymbolExpr::Ratio {
                num_const,
                num_lin,
                num_norms,
                den_const,
                den_norms,
            } => {
                let mut lin = vec![C::new(0.0, 0.0); wmap.len()];
                for (j, c) in num_lin.iter().enumerate() {
                    lin[wmap[j]] = *c;
                }
                SymbolExpr::Ratio {
                    num_const: *num_const,
                    num_lin: lin,
                    num_norms: move_norms(num_norms),
                    den_const: *den_const,
                    den_norms: move_norms(den_norms),
                }
            }
            SymbolExpr::Base { c0, coeffs } => {
                let mut c = *c0;
                let mut out = vec![0.0; new_xdim];
                for (i, &a) in coeffs.iter().enumerate() {
                    match xsub.get(i) {
                        Some(XSub::Fixed(v)) => c += a * v,
                        Some(XSub::Var(k)) => out[*k] += a,
                        None => {}
                    }
                }
                SymbolExpr::Base { c0: c, coeffs: out }
            }
            SymbolExpr::Product { factors } => SymbolExpr::Product {
                factors: factors
                    .iter()
                    .map(|f| f.restrict(xsub, new_xdim, wmap))
                    .collect(),
            },
            SymbolExpr::Sum { terms } => SymbolExpr::Sum {
                terms: terms
                    .iter()
                    .map(|f| f.restrict(xsub, new_xdim, wmap))
                    .collect(),
            },
        }
    }

    /// Pointwise product, flattening nested products.
    pub fn times(&self, other: &SymbolExpr) -> SymbolExpr {
        let mut factors = Vec::new();
        for e in [self, other] {
            match e {
                SymbolExpr::Product { factors: f } => factors.extend(f.iter().cloned()),
                e => factors.push(e.clone()),
            }
        }
        SymbolExpr::Product { factors }
    }
}

/// Points of the sphere `S^{k-1}` obtained by normalizing the integer points
/// on the boundary of the cube `[-m, m]^k`. The grid is invariant under
/// coordinate permutations and sign changes, and every coordinate great
/// circle carries `8m` points.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub k: usize,
    pub level: usize,
    keys: Vec<Vec<i64>>,
    points: Vec<Vec<f64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.level == other.level
    }
}

#[derive(Serialize, Deserialize)]
struct SphereRepr {
    k: usize,
    level: usize,
}

impl Serialize for SphereGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SphereRepr {
            k: self.k,
            level: self.level,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SphereGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SphereRepr::deserialize(d)?;
        SphereGrid::new(r.k, r.level).map_err(serde::de::Error::custom)
    }
}

/// Default level: 32 points on each coordinate great circle.
pub const SPHERE_LEVEL: usize = 4;

impl SphereGrid {
    pub fn new(k: usize, level: usize) -> Result<Self> {
        if k == 0 || level == 0 {
            return Err(CornerError::Domain(format!(
                "sphere grid needs k ≥ 1 and level ≥ 1, got k = {k}, level = {level}"
            )));
        }
        if (2 * level + 1).pow(k as u32) > 200_000 {
            return Err(CornerError::Domain(format!(
                "sphere grid of dimension {k} at level {level} is too large"
            )));
        }
        let m = level as i64;
        let mut keys = vec![Vec::new()];
        for _ in 0..k {
            keys = keys
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    (-m..=m).map(move |c| {
                        let mut v = v.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        keys.retain(|v| v.iter().any(|c| c.abs() == m));
        let points = keys
            .iter()
            .map(|v| {
                let n = v.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
                v.iter().map(|&c| c as f64 / n).collect()
            })
            .collect();
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(SphereGrid {
            k,
            level,
            keys,
            points,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Index of the grid point in direction `w`: exact when `w` points along a
    /// grid direction, otherwise the nearest direction.
    pub fn lookup(&self, w: &[f64]) -> Option<usize> {
        let sup = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if w.len() != self.k || !(sup > 0.0) {
            return None;
        }
        let scaled: Vec<f64> = w.iter().map(|v| v / sup * self.level as f64).collect();
        if scaled.iter().all(|v| (v - v.round()).abs() < 1e-9) {
            let key: Vec<i64> = scaled.iter().map(|v| v.round() as i64).collect();
            if let Some(&i) = self.index.get(&key) {
                return Some(i);
            }
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        (0..self.points.len()).max_by(|&a, &b| {
            let da: f64 = self.points[a]
                .iter()
                .zip(w)
                .map(|(p, v)| p * v / norm)
                .sum();
            let db: f64 = self.points[b]
                .iter()
                .zip(w)
                .map(|(p, v)| p * v / norm)
                .sum();
            da.partial_cmp(&db).unwrap()
        })
    }

    /// The index of the point `i` with its coordinates moved by `map` (`new[map[j]] = old[j]`).
    pub fn permuted(&self, i: usize, map: &[usize]) -> Option<usize> {
        let key = &self.keys[i];
        let mut out = vec![0; key.len()];
        for (j, &c) in key.iter().enumerate() {
            out[map[j]] = c;
        }
        self.index.get(&out).copied()
    }
}

fn move_coords(v: &[f64], map: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (j, &c) in v.iter().enumerate() {
        out[map[j]] = c;
    }
    out
}

/// Sample coordinates per axis for box models.
pub const BOX_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// A local face `Γ` of a closed face and the face of the parent model it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFaceMap {
    /// Face of the closed face's own complex.
    pub local: FaceId,
    /// Face of the parent complex covered by `local`.
    pub target: FaceId,
    /// For each normal direction of `target`, its slot in `(normals of Γ in F̄) ++ (normals of F)`.
    pub slots: Vec<usize>,
}

/// How a face sits in its model: which coordinates it fixes, which remain,
/// and which covariables become its normal parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceModel {
    pub face: FaceId,
    pub fixed: Vec<(usize, f64)>,
    pub free: Vec<usize>,
    /// Covariable index of each normal direction, in the order of the defining functions.
    pub normal: Vec<usize>,
    pub closed: CornerModel,
    pub local_faces: Vec<LocalFaceMap>,
}

impl FaceModel {
    fn contains(&self, x: &[f64]) -> bool {
        self.fixed.iter().all(|&(i, v)| (x[i] - v).abs() <= 1e-12)
    }

    fn xsub(&self, dim: usize) -> Vec<XSub> {
        (0..dim)
            .map(|i| match self.fixed.iter().find(|(j, _)| *j == i) {
                Some(&(_, v)) => XSub::Fixed(v),
                None => XSub::Var(
                    self.free
                        .iter()
                        .position(|&f| f == i)
                        .expect("free or fixed"),
                ),
            })
            .collect()
    }

    /// Where covariable `j` of the parent goes in the face variables `(ξ_F, p, q)`
    /// on the sheet with deck permutation `g`.
    fn wmap(&self, dim: usize, params: usize, g: &Perm) -> Vec<usize> {
        let nf = self.free.len();
        let d = self.normal.len();
        (0..dim + params)
            .map(|j| {
                if j >= dim {
                    nf + d + (j - dim)
                } else if let Some(k) = self.free.iter().position(|&f| f == j) {
                    k
                } else {
                    let a = self
                        .normal
                        .iter()
                        .position(|&f| f == j)
                        .expect("covariable is tangent or normal");
                    nf + g.apply(a)
                }
            })
            .collect()
    }
}

/// Coordinates, samples and face structure used to restrict and check symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerModel {
    pub complex: CornerComplex,
    pub dim: usize,
    pub samples: Vec<Vec<f64>>,
    pub faces: Vec<FaceModel>,
    /// Covariable permutations between overlapping charts; the symbol must be invariant.
    pub chart_changes: Vec<Vec<usize>>,
}

impl CornerModel {
    pub fn point() -> Self {
        CornerModel {
            complex: CornerComplex::closed_manifold(0),
            dim: 0,
            samples: vec![Vec::new()],
            faces: Vec::new(),
            chart_changes: Vec::new(),
        }
    }

    /// `[0,1]^n` with faces labelled by facet sets (facet `2i` is `x_i = 0`, `2i+1` is `x_i = 1`).
    pub fn unit_box(n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(Self::point());
        }
        if n > 3 {
            return Err(CornerError::Domain(format!(
                "box models are supported up to dimension 3, got {n}"
            )));
        }
        let complex = CornerComplex::from_polytope(&polytopes::unit_box(n))?;
        let mut samples = vec![Vec::new()];
        for _ in 0..n {
            samples = samples
                .into_iter()
                .flat_map(|s: Vec<f64>| {
                    BOX_SAMPLES.iter().map(move |&v| {
                        let mut s = s.clone();
                        s.push(v);
                        s
                    })
                })
                .collect();
        }
        let facets_of =
            |c: &CornerComplex, id: usize| c.faces[id].facets.clone().unwrap_or_default();
        let mut faces = Vec::new();
        for face in complex.boundary_faces() {
            let s = face.facets.clone().unwrap_or_default();
            let normal: Vec<usize> = s.iter().map(|f| f / 2).collect();
            let fixed: Vec<(usize, f64)> = s.iter().map(|f| (f / 2, (f % 2) as f64)).collect();
            let free: Vec<usize> = (0..n).filter(|i| !normal.contains(i)).collect();
            let closed = Self::unit_box(free.len())?;
            let mut local_faces = Vec::new();
            for lf in closed.complex.boundary_faces() {
                let local = facets_of(&closed.complex, lf.id.0);
                let lifted: Vec<usize> = local.iter().map(|f| 2 * free[f / 2] + f % 2).collect();
                let mut target_set: Vec<usize> = s.iter().chain(&lifted).copied().collect();
                target_set.sort_unstable();
                let target = complex
                    .faces
                    .iter()
                    .find(|g| g.facets.as_ref() == Some(&target_set))
                    .ok_or_else(|| CornerError::NoCoveringTriangle {
                        parent: face.id.0,
                        target: usize::MAX,
                    })?
                    .id;
                let slots = target_set
                    .iter()
                    .map(|f| match s.iter().position(|g| g == f) {
                        Some(a) => local.len() + a,
                        None => lifted
                            .iter()
                            .position(|g| g == f)
                            .expect("target facet comes from Γ or F"),
                    })
                    .collect();
                local_faces.push(LocalFaceMap {
                    local: lf.id,
                    target,
                    slots,
                });
            }
            faces.push(FaceModel {
                face: face.id,
                fixed,
                free,
                normal,
                closed,
                local_faces,
            });
        }
        Ok(CornerModel {
            complex,
            dim: n,
            samples,
            faces,
            chart_changes: Vec::new(),
        })
    }

    /// The 1-gon in the coordinates `(u, r)` of its edge: the closed edge is
    /// an interval both of whose endpoints cover the corner, with the two
    /// normal directions exchanged between the endpoints.
    pub fn one_gon() -> Result<Self> {
        let complex = CornerComplex::one_gon();
        let mut samples = vec![vec![0.5, 0.5]];
        samples.extend(BOX_SAMPLES.iter().map(|&u| vec![u, 0.0]));
        let interval = Self::unit_box(1)?;
        let edge = FaceModel {
            face: FaceId(1),
            fixed: vec![(1, 0.0)],
            free: vec![0],
            normal: vec![1],
            local_faces: vec![
                LocalFaceMap {
                    local: FaceId(1),
                    target: FaceId(2),
                    slots: vec![0, 1],
                },
                LocalFaceMap {
                    local: FaceId(2),
                    target: FaceId(2),
                    slots: vec![1, 0],
                },
            ],
            closed: interval,
        };
        let corner = FaceModel {
            face: FaceId(2),
            fixed: vec![(0, 0.0), (1, 0.0)],
            free: Vec::new(),
            normal: vec![0, 1],
            closed: Self::point(),
            local_faces: Vec::new(),
        };
        Ok(CornerModel {
            complex,
            dim: 2,
            samples,
            faces: vec![edge, corner],
            chart_changes: vec![vec![1, 0]],
        })
    }

    fn face_index(&self, id: FaceId) -> Option<usize> {
        self.faces.iter().position(|f| f.face == id)
    }
}

/// A face symbol on one sheet of `F̃ = G × F̄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetSymbol {
    pub deck: Perm,
    pub family: SymbolExpr,
    pub tuple: SymbolTuple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceSymbol {
    pub face: FaceId,
    /// Number of parameters `(p, q)` of the family.
    pub param_dim: usize,
    pub sheets: Vec<SheetSymbol>,
}

/// `(σ_0, {σ_F})`: interior symbol samples and one face symbol per boundary face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTuple {
    pub base_dim: usize,
    pub param_dim: usize,
    pub sphere: SphereGrid,
    pub base_samples: Vec<Vec<f64>>,
    /// `sigma0[i][k]` is the interior symbol at base sample `i` and sphere point `k`.
    pub sigma0: Vec<Vec<C>>,
    pub faces: Vec<FaceSymbol>,
}

impl SymbolTuple {
    /// The tuple of a face symbol reached along `chain`, on sheet 0 at each step.
    pub fn face_tuple_mut(&mut self, chain: &[FaceId]) -> Option<&mut SymbolTuple> {
        let mut t = self;
        for id in chain {
            let f = t.faces.iter_mut().find(|f| f.face == *id)?;
            t = &mut f.sheets.first_mut()?.tuple;
        }
        Some(t)
    }

    pub fn face_tuple(&self, chain: &[FaceId]) -> Option<&SymbolTuple> {
        let mut t = self;
        for id in chain {
            t = &t
                .faces
                .iter()
                .find(|f| f.face == *id)?
                .sheets
                .first()?
                .tuple;
        }
        Some(t)
    }

    /// The interior symbol at sample `i` in direction `w`. At `w = 0` the
    /// homogeneous function is extended by its mean over the sphere.
    pub fn interior_value(&self, i: usize, w: &[f64]) -> C {
        match self.sphere.lookup(w) {
            Some(k) => self.sigma0[i][k],
            None => self.sigma0[i].iter().sum::<C>() / self.sigma0[i].len() as f64,
        }
    }

    fn same_shape(&self, other: &SymbolTuple) -> Result<()> {
        let ok = self.base_dim == other.base_dim
            && self.param_dim == other.param_dim
            && self.sphere == other.sphere
            && self.base_samples.len() == other.base_samples.len()
            && self.faces.len() == other.faces.len()
            && self
                .faces
                .iter()
                .zip(&other.faces)
                .all(|(a, b)| a.face == b.face && a.sheets.len() == b.sheets.len());
        if ok {
            Ok(())
        } else {
            Err(CornerError::Shape(
                "symbol tuples have different shapes".into(),
            ))
        }
    }
}

/// Evaluates the principal part of `expr` on the sample grid and restricts
/// the family to every face, recursively. Fails when the symbol differs
/// between overlapping charts.
pub fn build_restricted_tuple(
    expr: &SymbolExpr,
    model: &CornerModel,
    param_dim: usize,
) -> Result<SymbolTuple> {
    let k = model.dim + param_dim;
    let sphere = SphereGrid::new(k, SPHERE_LEVEL)?;
    for change in &model.chart_changes {
        let map: Vec<usize> = (0..k)
            .map(|j| if j < change.len() { change[j] } else { j })
            .collect();
        let mut worst = 0.0f64;
        for x in &model.samples {
            for w in sphere.points() {
                for r in [0.5, 1.0, 4.0] {
                    let w: Vec<f64> = w.iter().map(|v| v * r).collect();
                    worst =
                        worst.max((expr.eval(x, &w) - expr.eval(x, &move_coords(&w, &map))).norm());
                }
            }
        }
        if worst > 1e-9 {
            return Err(CornerError::OverlapDiscrepancy {
                face: 0,
                discrepancy: worst,
            });
        }
    }
    build_tuple(expr, model, param_dim, sphere)
}

fn build_tuple(
    expr: &SymbolExpr,
    model: &CornerModel,
    param_dim: usize,
    sphere: SphereGrid,
) -> Result<SymbolTuple> {
    let principal = expr.principal();
    let sigma0 = model
        .samples
        .iter()
        .map(|x| {
            sphere
                .points()
                .iter()
                .map(|w| principal.eval(x, w))
                .collect()
        })
        .collect();
    let mut faces = Vec::with_capacity(model.faces.len());
    for fm in &model.faces {
        let group = &model.complex.face(fm.face)?.structure_group;
        let xsub = fm.xsub(model.dim);
        let fparams = fm.normal.len() + param_dim;
        let mut sheets = Vec::with_capacity(group.order());
        for g in group.elements() {
            let family = expr.restrict(&xsub, fm.free.len(), &fm.wmap(model.dim, param_dim, g));
            let tuple = build_tuple(&family, &fm.closed, fparams, sphere.clone())?;
            sheets.push(SheetSymbol {
                deck: g.clone(),
                family,
                tuple,
            });
        }
        faces.push(FaceSymbol {
            face: fm.face,
            param_dim: fparams,
            sheets,
        });
    }
    Ok(SymbolTuple {
        base_dim: model.dim,
        param_dim,
        sphere,
        base_samples: model.samples.clone(),
        sigma0,
        faces,
    })
}

/// Location of the largest violation found by a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Faces traversed from the top-level tuple, outermost first.
    pub chain: Vec<FaceId>,
    pub sheet: usize,
    pub sample: Vec<f64>,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub pass: bool,
    pub tol: f64,
    pub max_discrepancy: f64,
    pub comparisons: usize,
    pub witness: Option<Witness>,
}

#[derive(Default)]
struct Tracker {
    max: f64,
    count: usize,
    witness: Option<Witness>,
}

impl Tracker {
    fn record(&mut self, value: f64, make: impl FnOnce() -> Witness) {
        self.count += 1;
        if value > self.max || (value.is_nan() && !self.max.is_nan()) {
            self.max = value;
            let mut w = make();
            w.value = value;
            self.witness = Some(w);
        }
    }

    fn report(self, tol: f64) -> CheckReport {
        let pass = self.max <= tol;
        CheckReport {
            pass,
            tol,
            max_discrepancy: self.max,
            comparisons: self.count,
            witness: self.witness,
        }
    }
}

fn sample_index(samples: &[Vec<f64>], x: &[f64]) -> Option<usize> {
    samples
        .iter()
        .position(|s| s.len() == x.len() && s.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-12))
}

/// `σ_0|_F = σ_0(σ_F)` under `T*M|_F ⊕ R^s = T*F ⊕ R^{d+s}`, on every sheet
/// and at every level of the tuple.
pub fn check_comp1(tuple: &SymbolTuple, model: &CornerModel, tol: f64) -> Result<CheckReport> {
    let mut tr = Tracker::default();
    comp1_rec(tuple, model, &[], &mut tr)?;
    Ok(tr.report(tol))
}

fn comp1_rec(
    tuple: &SymbolTuple,
    model: &CornerModel,
    chain: &[FaceId],
    tr: &mut Tracker,
) -> Result<()> {
    if tuple.faces.len() != model.faces.len() {
        return Err(CornerError::Shape(format!(
            "tuple has {} face symbols, model has {} faces",
            tuple.faces.len(),
            model.faces.len()
        )));
    }
    for (fs, fm) in tuple.faces.iter().zip(&model.faces) {
        let mut sub_chain = chain.to_vec();
        sub_chain.push(fm.face);
        for (si, sheet) in fs.sheets.iter().enumerate() {
            let map = fm.wmap(model.dim, tuple.param_dim, &sheet.deck);
            let ft = &sheet.tuple;
            for (i, x) in tuple.base_samples.iter().enumerate() {
                if !fm.contains(x) {
                    continue;
                }
                let xf: Vec<f64> = fm.free.iter().map(|&c| x[c]).collect();
                let j = sample_index(&ft.base_samples, &xf).ok_or_else(|| {
                    CornerError::Shape(format!("face {} has no sample at {xf:?}", fm.face))
                })?;
                for k in 0..tuple.sphere.len() {
                    let kf = ft.sphere.permuted(k, &map).ok_or_else(|| {
                        CornerError::Shape(format!("sphere grids of {} do not match", fm.face))
                    })?;
                    let d = (tuple.sigma0[i][k] - ft.sigma0[j][kf]).norm();
                    tr.record(d, || Witness {
                        chain: sub_chain.clone(),
                        sheet: si,
                        sample: x.clone(),
                        point: tuple.sphere.points()[k].clone(),
                        value: 0.0,
                    });
                }
            }
            comp1_rec(ft, &fm.closed, &sub_chain, tr)?;
        }
    }
    Ok(())
}

/// Evaluation points for comparing families: the origin and scaled sphere points.
fn probe_points(sphere: &SphereGrid) -> Vec<Vec<f64>> {
    let stride = sphere.len().div_ceil(128).max(1);
    let mut out = vec![vec![0.0; sphere.k]];
    for w in sphere.points().iter().step_by(stride) {
        for r in [0.5, 2.0, 8.0] {
            out.push(w.iter().map(|v| v * r).collect());
        }
    }
    out
}

/// Compression of `diag(values)` to the sheet-permutation invariant subspace.
fn compress(values: &[C]) -> C {
    let m = values.len();
    let d = CMatrix::from_diagonal(&DVector::from_column_slice(values));
    let e = DVector::from_element(m, C::new(1.0 / (m as f64).sqrt(), 0.0));
    (e.adjoint() * d * e)[(0, 0)]
}

/// `σ_Γ(σ_{F1}) = σ_{F2}` for every local face `Γ` of every closed face,
/// with the symbols of all sheets over one target compressed to the
/// sheet-permutation invariant subspace.
pub fn check_comp2(tuple: &SymbolTuple, model: &CornerModel, tol: f64) -> Result<CheckReport> {
    let mut tr = Tracker::default();
    comp2_rec(tuple, model, &[], &mut tr)?;
    Ok(tr.report(tol))
}

fn comp2_rec(
    tuple: &SymbolTuple,
    model: &CornerModel,
    chain: &[FaceId],
    tr: &mut Tracker,
) -> Result<()> {
    if tuple.faces.len() != model.faces.len() {
        return Err(CornerError::Shape(
            "tuple and model disagree on faces".into(),
        ));
    }
    for (fs1, fm1) in tuple.faces.iter().zip(&model.faces) {
        let s1 = &fs1.sheets.first().ok_or(CornerError::EmptySet)?.tuple;
        let mut targets: Vec<FaceId> = fm1.local_faces.iter().map(|l| l.target).collect();
        targets.sort();
        targets.dedup();
        for f2 in targets {
            let missing = || CornerError::NoCoveringTriangle {
                parent: fm1.face.0,
                target: f2.0,
            };
            let i2 = model.face_index(f2).ok_or_else(missing)?;
            let fm2 = &model.faces[i2];
            let sigma_f2 = tuple.faces[i2].sheets.first().ok_or_else(missing)?;
            let mut over = Vec::new();
            for lf in fm1.local_faces.iter().filter(|l| l.target == f2) {
                let li = fm1.closed.face_index(lf.local).ok_or_else(missing)?;
                let sym = s1
                    .faces
                    .get(li)
                    .and_then(|f| f.sheets.first())
                    .ok_or_else(missing)?;
                if lf.slots.len() != fm2.normal.len() {
                    return Err(missing());
                }
                // Variables of σ_{F2} are (ξ_{F2}, p_{F2}, q); those of σ_Γ(σ_{F1}) are (ξ_Γ, p_Γ, p_{F1}, q).
                let nf = fm2.free.len();
                let map: Vec<usize> = (0..tuple.sphere.k)
                    .map(|j| {
                        if j >= nf && j < nf + lf.slots.len() {
                            nf + lf.slots[j - nf]
                        } else {
                            j
                        }
                    })
                    .collect();
                over.push((sym, map));
            }
            let t2 = &sigma_f2.tuple;
            let mut sub_chain = chain.to_vec();
            sub_chain.push(f2);
            for (j, x2) in t2.base_samples.iter().enumerate() {
                for w in probe_points(&t2.sphere) {
                    let v2 = sigma_f2.family.eval(x2, &w);
                    let vals: Vec<C> = over
                        .iter()
                        .map(|(s, map)| {
                            s.family
                                .eval(&s.tuple.base_samples[j], &move_coords(&w, map))
                        })
                        .collect();
                    tr.record((compress(&vals) - v2).norm(), || Witness {
                        chain: sub_chain.clone(),
                        sheet: 0,
                        sample: x2.clone(),
                        point: w.clone(),
                        value: 0.0,
                    });
                }
                for k in 0..t2.sphere.len() {
                    let mut vals = Vec::with_capacity(over.len());
                    for (s, map) in &over {
                        let kk = s.tuple.sphere.permuted(k, map).ok_or_else(missing)?;
                        vals.push(s.tuple.sigma0[j][kk]);
                    }
                    tr.record((compress(&vals) - t2.sigma0[j][k]).norm(), || Witness {
                        chain: sub_chain.clone(),
                        sheet: 0,
                        sample: x2.clone(),
                        point: t2.sphere.points()[k].clone(),
                        value: 0.0,
                    });
                }
            }
        }
    }
    for (fs, fm) in tuple.faces.iter().zip(&model.faces) {
        let mut sub_chain = chain.to_vec();
        sub_chain.push(fm.face);
        for sheet in &fs.sheets {
            comp2_rec(&sheet.tuple, &fm.closed, &sub_chain, tr)?;
        }
    }
    Ok(())
}

/// `A(p) = S_g^{-1} A(σ_g p) S_g` for the face symbol of `face`, with the
/// group acting on the normal parameters and by left translation on sheets.
pub fn face_equivariance(
    tuple: &SymbolTuple,
    model: &CornerModel,
    face: FaceId,
    tol: f64,
) -> Result<crate::operators::EquivarianceReport> {
    let fi = model
        .face_index(face)
        .ok_or(CornerError::UnknownFace(face.0))?;
    let fm = &model.faces[fi];
    let fs = &tuple.faces[fi];
    let group = &model.complex.face(face)?.structure_group;
    let d = fm.normal.len();
    let nf = fm.free.len();
    let nparams = fs.param_dim;
    let m = fs.sheets.len();
    let elements = group
        .elements()
        .iter()
        .map(|h| {
            let mut s = CMatrix::zeros(m, m);
            for (gi, sh) in fs.sheets.iter().enumerate() {
                let hg = h.compose(&sh.deck);
                let target = fs
                    .sheets
                    .iter()
                    .position(|x| x.deck == hg)
                    .expect("sheets form the group");
                s[(target, gi)] = C::new(1.0, 0.0);
            }
            let mut images: Vec<usize> = h.images().to_vec();
            images.extend(d..nparams);
            Ok(GroupElement {
                sigma: Perm::new(images)?,
                s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let action = GroupAction {
        d: nparams,
        base_dim: m,
        elements,
    };
    let x = fs.sheets[0].tuple.base_samples[0].clone();
    let a_of_p = |p: &[f64]| {
        let mut w = vec![0.25; nf];
        w.extend_from_slice(p);
        let vals: Vec<C> = fs.sheets.iter().map(|s| s.family.eval(&x, &w)).collect();
        CMatrix::from_diagonal(&DVector::from_vec(vals))
    };
    let sphere = SphereGrid::new(nparams, 2)?;
    let points: Vec<Vec<f64>> = sphere
        .points()
        .iter()
        .flat_map(|w| [0.5, 3.0].map(|r| w.iter().map(|v| v * r).collect()))
        .collect();
    crate::operators::equivariance_check(&a_of_p, &action, &points, None, tol)
}

/// Pointwise product of two tuples of the same shape.
pub fn compose(a: &SymbolTuple, b: &SymbolTuple) -> Result<SymbolTuple> {
    a.same_shape(b)?;
    let sigma0 = a
        .sigma0
        .iter()
        .zip(&b.sigma0)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).collect())
        .collect();
    let faces = a
        .faces
        .iter()
        .zip(&b.faces)
        .map(|(fa, fb)| {
            let sheets = fa
                .sheets
                .iter()
                .zip(&fb.sheets)
                .map(|(sa, sb)| {
                    Ok(SheetSymbol {
                        deck: sa.deck.clone(),
                        family: sa.family.times(&sb.family),
                        tuple: compose(&sa.tuple, &sb.tuple)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FaceSymbol {
                face: fa.face,
                param_dim: fa.param_dim,
                sheets,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolTuple {
        sigma0,
        faces,
        ..a.clone()
    })
}

/// Largest sample-wise difference between two tuples: interior samples and
/// face families at probe points, at every level.
pub fn tuple_distance(a: &SymbolTuple, b: &SymbolTuple) -> Result<f64> {
    a.same_shape(b)?;
    let mut worst = 0.0f64;
    for (ra, rb) in a.sigma0.iter().zip(&b.sigma0) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).norm());
        }
    }
    for (fa, fb) in a.faces.iter().zip(&b.faces) {
        for (sa, sb) in fa.sheets.iter().zip(&fb.sheets) {
            for x in &sa.tuple.base_samples {
                for w in probe_points(&sa.tuple.sphere) {
                    worst = worst.max((sa.family.eval(x, &w) - sb.family.eval(x, &w)).norm());
                }
            }
            worst = worst.max(tuple_distance(&sa.tuple, &sb.tuple)?);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticOptions {
    /// Minimal admissible singular value.
    pub tol: f64,
    /// Tolerance for the compatibility checks that must pass first.
    pub compat_tol: f64,
    pub param_radius: f64,
    pub param_step: f64,
    /// Radius of the outer parameter shell.
    pub annulus: f64,
    /// Lattice points per axis for the truncated quantization of one-dimensional faces.
    pub section_points: usize,
    /// Half-length of the logarithmic coordinate window of truncated faces.
    pub section_length: f64,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        EllipticOptions {
            tol: 1e-6,
            compat_tol: 1e-9,
            param_radius: 4.0,
            param_step: 0.25,
            annulus: 8.0,
            section_points: 128,
            section_length: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMargin {
    pub chain: Vec<FaceId>,
    /// `interior` for `σ_0`, `family` for the invertibility of a face family.
    pub kind: String,
    pub min_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticReport {
    pub elliptic: bool,
    pub min_value: f64,
    pub witness: Option<Witness>,
    pub levels: Vec<LevelMargin>,
}

/// Ellipticity of a compatible tuple: `σ_0` is invertible on the sphere and
/// every face family is invertible for all parameters, recursively. Point
/// faces are evaluated on a parameter grid; faces of positive dimension are
/// quantized on a truncated lattice in logarithmic coordinates.
pub fn is_elliptic(
    tuple: &SymbolTuple,
    model: &CornerModel,
    opts: &EllipticOptions,
) -> Result<EllipticReport> {
    let c1 = check_comp1(tuple, model, opts.compat_tol)?;
    let c2 = check_comp2(tuple, model, opts.compat_tol)?;
    for (name, r) in [("first", &c1), ("second", &c2)] {
        if !r.pass {
            return Err(CornerError::Incompatible(format!(
                "{name} compatibility condition fails by {:.3e}",
                r.max_discrepancy
            )));
        }
    }
    let mut report = EllipticReport {
        elliptic: true,
        min_value: f64::INFINITY,
        witness: None,
        levels: Vec::new(),
    };
    elliptic_rec(tuple, model, &[], opts, &mut report)?;
    report.elliptic = report.min_value >= opts.tol;
    if report.elliptic {
        report.witness = None;
    }
    Ok(report)
}

fn note(
    report: &mut EllipticReport,
    chain: &[FaceId],
    kind: &str,
    value: f64,
    make: impl FnOnce() -> Witness,
) {
    report.levels.push(LevelMargin {
        chain: chain.to_vec(),
        kind: kind.into(),
        min_value: value,
    });
    if value < report.min_value || value.is_nan() {
        report.min_value = value;
        let mut w = make();
        w.value = value;
        report.witness = Some(w);
    }
}

fn elliptic_rec(
    tuple: &SymbolTuple,
    model: &CornerModel,
    chain: &[FaceId],
    opts: &EllipticOptions,
    report: &mut EllipticReport,
) -> Result<()> {
    let mut best = (f64::INFINITY, 0, 0);
    for (i, row) in tuple.sigma0.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if v.norm() < best.0 || v.norm().is_nan() {
                best = (v.norm(), i, k);
            }
        }
    }
    note(report, chain, "interior", best.0, || Witness {
        chain: chain.to_vec(),
        sheet: 0,
        sample: tuple.base_samples[best.1].clone(),
        point: tuple.sphere.points()[best.2].clone(),
        value: 0.0,
    });
    for (fs, fm) in tuple.faces.iter().zip(&model.faces) {
        let mut sub = chain.to_vec();
        sub.push(fm.face);
        for (si, sheet) in fs.sheets.iter().enumerate() {
            let (value, sample, point) =
                family_margin(&sheet.family, &fm.closed, fs.param_dim, opts)?;
            note(report, &sub, "family", value, || Witness {
                chain: sub.clone(),
                sheet: si,
                sample,
                point,
                value: 0.0,
            });
            elliptic_rec(&sheet.tuple, &fm.closed, &sub, opts, report)?;
        }
    }
    Ok(())
}

fn axis(radius: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if n == 1 {
                0.0
            } else {
                -radius + 2.0 * radius * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn product_grid(axis: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..k {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    pts
}

/// Parameter points: a box grid with at most `budget` nodes (odd count per
/// axis so that the origin is included) and a shell of sphere points.
fn family_params(
    k: usize,
    opts: &EllipticOptions,
    budget: usize,
    step: f64,
) -> Result<Vec<Vec<f64>>> {
    let full = (2.0 * opts.param_radius / step).round() as usize + 1;
    let mut n = full
        .min((budget as f64).powf(1.0 / k as f64).floor() as usize)
        .max(1);
    if n % 2 == 0 {
        n -= 1;
    }
    let mut pts = product_grid(&axis(opts.param_radius, n), k);
    let shell = SphereGrid::new(k, if k <= 3 { SPHERE_LEVEL } else { 2 })?;
    pts.extend(
        shell
            .points()
            .iter()
            .map(|w| w.iter().map(|v| v * opts.annulus).collect()),
    );
    Ok(pts)
}

/// Smallest singular value of the family over the parameter grid, with its location.
fn family_margin(
    family: &SymbolExpr,
    closed: &CornerModel,
    nparams: usize,
    opts: &EllipticOptions,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    if closed.dim == 0 {
        for p in family_params(nparams, opts, 40_000, opts.param_step)? {
            let v = family.eval(&[], &p).norm();
            if v < best.0 || v.is_nan() {
                best = (v, Vec::new(), p);
            }
        }
        return Ok(best);
    }
    let m = closed.dim;
    let n = match m {
        1 => opts.section_points,
        2 => 16,
        _ => 8,
    };
    let h = 2.0 * opts.section_length / n as f64;
    let lattice = LatticeModel::new(m, n, 1, h)?;
    let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
    let nodes: Vec<Vec<f64>> = (0..lattice.nodes())
        .map(|j| {
            lattice
                .multi_index(j)
                .iter()
                .map(|&i| -opts.section_length + (i as f64 + 0.5) * h)
                .collect()
        })
        .collect();
    for p in family_params(nparams, opts, 300, 1.0)? {
        let mut a = CMatrix::zeros(lattice.nodes(), lattice.nodes());
        for (j, t) in nodes.iter().enumerate() {
            let x: Vec<f64> = t.iter().map(|&v| logistic(v)).collect();
            let sym = MultiplierSymbol::from_fn(lattice, |xi| {
                let mut w = xi.to_vec();
                w.extend_from_slice(&p);
                CMatrix::from_element(1, 1, family.eval(&x, &w))
            });
            let op = quantize(&sym)?;
            let jj = lattice.multi_index(j);
            for l in 0..lattice.nodes() {
                let ll = lattice.multi_index(l);
                let diff: Vec<usize> = jj.iter().zip(&ll).map(|(a, b)| (a + n - b) % n).collect();
                a[(j, l)] = op.kernel[lattice.flat_index(&diff)][(0, 0)];
            }
        }
        let s = singular_values(&a).last().copied().unwrap_or(0.0);
        if s < best.0 || s.is_nan() {
            best = (s, Vec::new(), p);
        }
    }
    Ok(best)
}

/// The frozen-coefficient interior representative at base sample `sample`:
/// the multiplier `ξ ↦ σ_0(x, ξ, q)` on a lattice, for every `q`.
pub fn quantize_interior(
    tuple: &SymbolTuple,
    sample: usize,
    n: usize,
    h: f64,
    q_nodes: Vec<Vec<f64>>,
) -> Result<ParamFamily> {
    if sample >= tuple.base_samples.len() {
        return Err(CornerError::Domain(format!("no base sample {sample}")));
    }
    if q_nodes.iter().any(|q| q.len() != tuple.param_dim) {
        return Err(CornerError::Domain(format!(
            "parameters must have {} entries",
            tuple.param_dim
        )));
    }
    let model = LatticeModel::new(tuple.base_dim, n, 1, h)?;
    let mut mats = Vec::with_capacity(q_nodes.len());
    for q in &q_nodes {
        let sym = MultiplierSymbol::from_fn(model, |xi| {
            let mut w = xi.to_vec();
            w.extend_from_slice(q);
            CMatrix::from_element(1, 1, tuple.interior_value(sample, &w))
        });
        mats.push(quantize(&sym)?.to_dense());
    }
    Ok(ParamFamily { q_nodes, mats })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScvReport {
    pub pass: bool,
    /// Largest number of singular values of `A(q) − A(q_0)` above the threshold.
    pub max_rank: usize,
    pub rank_budget: usize,
    /// Largest `‖A(q) − A(q')‖` over pairs with `|q − q'| < window` and `|q| > radius`.
    pub slow_variation: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
}

/// Compact variation (every `A(q) − A(q_0)` is numerically of rank at most
/// `rank_budget`) and slow variation (`‖A(q) − A(q')‖ ≤ eps` for nearby
/// parameters outside the ball of the given radius).
pub fn scv_check(
    a: &ParamFamily,
    window: f64,
    eps: f64,
    radius: f64,
    rank_budget: usize,
) -> Result<ScvReport> {
    let first = a.mats.first().ok_or(CornerError::EmptySet)?;
    let mut max_rank = 0;
    for m in &a.mats[1..] {
        let sv = singular_values(&(m - first));
        max_rank = max_rank.max(sv.iter().filter(|&&s| s > eps).count());
    }
    let mut slow = 0.0f64;
    let mut worst_pair = None;
    for (i, qi) in a.q_nodes.iter().enumerate() {
        if ParamFamily::q_norm(qi) <= radius {
            continue;
        }
        for (j, qj) in a.q_nodes.iter().enumerate() {
            let dq: Vec<f64> = qi.iter().zip(qj).map(|(x, y)| x - y).collect();
            if i == j || ParamFamily::q_norm(&dq) >= window || ParamFamily::q_norm(qj) <= radius {
                continue;
            }
            let v = singular_values(&(&a.mats[i] - &a.mats[j]))[0];
            if v > slow {
                slow = v;
                worst_pair = Some((qi.clone(), qj.clone()));
            }
        }
    }
    Ok(ScvReport {
        pass: max_rank <= rank_budget && slow <= eps,
        max_rank,
        rank_budget,
        slow_variation: slow,
        worst_pair,
    })
}

/// The interval as a cylinder `t = log(x / (1 − x))`, truncated to `[-L, L]`,
/// with local representatives at evenly spaced centers and their glued operator.
#[derive(Clone, Debug)]
pub struct CylinderQuantization {
    pub space: GridSpace,
    pub reps: LocalRepFamily,
    pub psi: Vec<Vec<f64>>,
    pub glued: GlueResult,
}

/// Local representatives for a tuple on the unit interval model: near
/// `t = -L` the face family at `x = 0`, near `t = L` the one at `x = 1`,
/// in between the frozen interior symbol at the nearest base sample.
pub fn interval_cylinder(
    tuple: &SymbolTuple,
    n: usize,
    length: f64,
    centers: usize,
    q_nodes: Vec<Vec<f64>>,
) -> Result<CylinderQuantization> {
    if tuple.base_dim != 1 || tuple.faces.len() != 2 {
        return Err(CornerError::Domain(
            "cylinder quantization needs a tuple on the interval".into(),
        ));
    }
    if centers < 3 {
        return Err(CornerError::Domain("need at least three centers".into()));
    }
    let space = GridSpace::interval(-length, length, n);
    let h = 2.0 * length / n as f64;
    let lattice = LatticeModel::new(1, n, 1, h)?;
    let spacing = 2.0 * length / centers as f64;
    let center_t: Vec<f64> = (0..centers)
        .map(|i| -length + (i as f64 + 0.5) * spacing)
        .collect();
    let center_nodes: Vec<usize> = center_t
        .iter()
        .map(|&t| (((t + length) / h - 0.5).round() as usize).min(n - 1))
        .collect();
    let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
    let mut reps = Vec::with_capacity(centers);
    for &t in &center_t {
        let rep = if t.abs() > length / 2.0 {
            let face = &tuple.faces[if t < 0.0 { 0 } else { 1 }].sheets[0];
            let mats = q_nodes
                .iter()
                .map(|q| {
                    let sym = MultiplierSymbol::from_fn(lattice, |xi| {
                        let mut w = xi.to_vec();
                        w.extend_from_slice(q);
                        CMatrix::from_element(1, 1, face.family.eval(&[], &w))
                    });
                    Ok(quantize(&sym)?.to_dense())
                })
                .collect::<Result<Vec<_>>>()?;
            ParamFamily {
                q_nodes: q_nodes.clone(),
                mats,
            }
        } else {
            let x = logistic(t);
            let nearest = (0..tuple.base_samples.len())
                .min_by(|&a, &b| {
                    (tuple.base_samples[a][0] - x)
                        .abs()
                        .partial_cmp(&(tuple.base_samples[b][0] - x).abs())
                        .unwrap()
                })
                .ok_or(CornerError::EmptySet)?;
            quantize_interior(tuple, nearest, n, h, q_nodes.clone())?
        };
        reps.push(rep);
    }
    let radius = 1.5 * spacing;
    let reps = LocalRepFamily::with_balls(&space, center_nodes, reps, radius)?;
    let bumps: Vec<Vec<f64>> = center_t
        .iter()
        .map(|&c| {
            space
                .nodes
                .iter()
                .map(|t| (1.0 - (t[0] - c).abs() / (1.2 * spacing)).max(0.0))
                .collect()
        })
        .collect();
    let psi: Vec<Vec<f64>> = (0..centers)
        .map(|i| {
            (0..n)
                .map(|v| {
                    let total: f64 = bumps.iter().map(|b| b[v]).sum();
                    (bumps[i][v] / total).sqrt()
                })
                .collect()
        })
        .collect();
    let glued = glue(&reps, &space, &psi, 1.0)?;
    Ok(CylinderQuantization {
        space,
        reps,
        psi,
        glued,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::PermGroup;

    fn interval_tuple(expr: &SymbolExpr) -> (CornerModel, SymbolTuple) {
        let model = CornerModel::unit_box(1).unwrap();
        let tuple = build_restricted_tuple(expr, &model, 1).unwrap();
        (model, tuple)
    }

    #[test]
    fn sphere_grid_counts_and_lookup() {
        let g = SphereGrid::new(2, SPHERE_LEVEL).unwrap();
        assert_eq!(g.len(), 32);
        let g3 = SphereGrid::new(3, SPHERE_LEVEL).unwrap();
        assert_eq!(g3.len(), 9usize.pow(3) - 7usize.pow(3));
        for (i, p) in g3.points().iter().enumerate() {
            let scaled: Vec<f64> = p.iter().map(|v| 7.5 * v).collect();
            assert_eq!(g3.lookup(&scaled), Some(i));
            let back = g3
                .permuted(g3.permuted(i, &[2, 0, 1]).unwrap(), &[1, 2, 0])
                .unwrap();
            assert_eq!(back, i);
        }
        assert_eq!(g.lookup(&[0.0, 0.0]), None);
    }

    #[test]
    fn principal_part_is_the_homogeneous_limit() {
        let a = SymbolExpr::interval_example();
        let p = a.principal();
        let w = [0.3, -0.7];
        let big: Vec<f64> = w.iter().map(|v| v * 1e9).collect();
        assert!((a.eval(&[], &big) - p.eval(&[], &w)).norm() < 1e-8);
        assert!((p.eval(&[], &w) - p.eval(&[], &[3.0, -7.0])).norm() < 1e-15);
    }

    #[test]
    fn endpoint_family_renames_the_normal_covariable() {
        let (_, t) = interval_tuple(&SymbolExpr::interval_example());
        let b = &t.faces[0].sheets[0].family;
        for (p, q) in [(0.5, 2.0), (-3.0, 0.25), (0.0, 0.0)] {
            let expected = (C::new(q + 1.0, p)) / (p.abs() + q.abs() + 1.0);
            assert!((b.eval(&[], &[p, q]) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn restricted_interval_tuple_is_compatible() {
        let (model, t) = interval_tuple(&SymbolExpr::interval_example());
        assert!(check_comp1(&t, &model, 1e-9).unwrap().pass);
        assert!(check_comp2(&t, &model, 1e-9).unwrap().pass);
    }

    #[test]
    fn perturbed_face_sample_breaks_comp1() {
        let (model, mut t) = interval_tuple(&SymbolExpr::interval_example());
        let ft = t.face_tuple_mut(&[FaceId(2)]).unwrap();
        ft.sigma0[0][5] += C::new(0.5, 0.0);
        let r = check_comp1(&t, &model, 1e-9).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        assert_eq!(w.chain, vec![FaceId(2)]);
        assert_eq!(w.sample, vec![1.0]);
        assert!((w.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_gon_two_sheets_compress_to_the_corner() {
        let model = CornerModel::one_gon().unwrap();
        let mut t = build_restricted_tuple(&SymbolExpr::one_gon_example(), &model, 1).unwrap();
        assert!(check_comp1(&t, &model, 1e-9).unwrap().pass);
        assert!(check_comp2(&t, &model, 1e-9).unwrap().pass);
        // Perturb the symbol on one sheet only.
        let gamma = t.face_tuple_mut(&[FaceId(1), FaceId(2)]).unwrap();
        for v in gamma.sigma0[0].iter_mut() {
            *v += C::new(0.2, 0.0);
        }
        let r = check_comp2(&t, &model, 1e-9).unwrap();
        assert!(!r.pass);
        assert!((r.max_discrepancy - 0.1).abs() < 1e-12);
        assert_eq!(r.witness.unwrap().chain, vec![FaceId(2)]);
    }

    #[test]
    fn asymmetric_one_gon_symbol_is_rejected() {
        let model = CornerModel::one_gon().unwrap();
        let err = build_restricted_tuple(&SymbolExpr::positive_real(2, 1, &[1.0, 0.0]), &model, 1)
            .unwrap_err();
        assert!(matches!(err, CornerError::OverlapDiscrepancy { .. }));
    }

    #[test]
    fn composition_matches_restriction_of_product() {
        let model = CornerModel::unit_box(1).unwrap();
        let a = SymbolExpr::interval_example();
        let b = SymbolExpr::Product {
            factors: vec![
                SymbolExpr::Base {
                    c0: 2.0,
                    coeffs: vec![-1.0],
                },
                SymbolExpr::positive_real(1, 1, &[0.3]),
            ],
        };
        let ta = build_restricted_tuple(&a, &model, 1).unwrap();
        let tb = build_restricted_tuple(&b, &model, 1).unwrap();
        let tab = build_restricted_tuple(&a.times(&b), &model, 1).unwrap();
        assert!(tuple_distance(&compose(&ta, &tb).unwrap(), &tab).unwrap() < 1e-12);
    }

    #[test]
    fn interval_example_is_not_elliptic() {
        let (model, t) = interval_tuple(&SymbolExpr::interval_example());
        let r = is_elliptic(&t, &model, &EllipticOptions::default()).unwrap();
        assert!(!r.elliptic);
        let w = r.witness.unwrap();
        assert_eq!(w.point, vec![0.0, -1.0]);
        assert!(w.value < 1e-15);
    }

    #[test]
    fn positive_real_symbol_is_elliptic_on_the_interval() {
        let (model, t) = interval_tuple(&SymbolExpr::positive_real(1, 1, &[1.0]));
        let r = is_elliptic(&t, &model, &EllipticOptions::default()).unwrap();
        assert!(r.elliptic, "{r:?}");
        assert!(r.min_value > 0.3);
    }

    #[test]
    fn incompatible_tuple_is_not_classified() {
        let (model, mut t) = interval_tuple(&SymbolExpr::positive_real(1, 1, &[1.0]));
        t.face_tuple_mut(&[FaceId(1)]).unwrap().sigma0[0][0] += C::new(1.0, 0.0);
        assert!(matches!(
            is_elliptic(&t, &model, &EllipticOptions::default()),
            Err(CornerError::Incompatible(_))
        ));
    }

    #[test]
    fn quantized_interior_symbol_round_trips() {
        let expr = SymbolExpr::Ratio {
            num_const: C::new(0.0, 0.0),
            num_lin: vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
            num_norms: Vec::new(),
            den_const: C::new(0.0, 0.0),
            den_norms: vec![NormTerm::new(1.0, vec![0]), NormTerm::new(1.0, vec![1])],
        };
        let (_, t) = interval_tuple(&expr);
        let fam = quantize_interior(&t, 2, 16, 0.5, vec![vec![1.0], vec![-2.0]]).unwrap();
        let model = LatticeModel::new(1, 16, 1, 0.5).unwrap();
        for (q, m) in fam.q_nodes.iter().zip(&fam.mats) {
            let op = crate::operators::TranslationInvariantOp::from_dense(model, m, 1e-10).unwrap();
            let sym = crate::operators::extract_symbol(&op).unwrap();
            for k in 0..model.nodes() {
                let mut w = model.frequency(k);
                w.push(q[0]);
                assert!((sym.values[k][(0, 0)] - t.interior_value(2, &w)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn scv_separates_arctan_from_sine() {
        let k = CMatrix::from_fn(6, 6, |i, j| {
            C::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        let qs: Vec<Vec<f64>> = (0..=80).map(|i| vec![-20.0 + 0.5 * i as f64]).collect();
        let base = CMatrix::identity(6, 6);
        let good =
            ParamFamily::from_fn(qs.clone(), |q| &base + &k * C::new(q[0].abs().atan(), 0.0));
        let bad = ParamFamily::from_fn(qs, |q| &base + &k * C::new(q[0].abs().sin(), 0.0));
        assert!(scv_check(&good, 1.0, 0.05, 10.0, 1).unwrap().pass);
        let r = scv_check(&bad, 1.0, 0.05, 10.0, 1).unwrap();
        assert!(!r.pass && r.slow_variation > 0.05);
    }

    #[test]
    fn nontrivial_structure_group_gives_equivariant_sheets() {
        let mut model = CornerModel::unit_box(3).unwrap();
        let edge = model
            .faces
            .iter()
            .find(|f| f.normal.len() == 2)
            .unwrap()
            .face;
        model.complex.faces[edge.0].structure_group =
            PermGroup::generated(2, vec![Perm::swap(2, 0, 1)]).unwrap();
        let expr = SymbolExpr::positive_real(3, 1, &[1.0, 0.4, -0.7]);
        let t = build_restricted_tuple(&expr, &model, 1).unwrap();
        let fi = model.face_index(edge).unwrap();
        assert_eq!(t.faces[fi].sheets.len(), 2);
        assert!(check_comp1(&t, &model, 1e-9).unwrap().pass);
        let r = face_equivariance(&t, &model, edge, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn tuples_serialize_round_trip() {
        let (_, t) = interval_tuple(&SymbolExpr::interval_example());
        let s = serde_json::to_string(&t).unwrap();
        let back: SymbolTuple = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.sphere.len(), 32);
    }
}
