//! Chart-level geometry near faces: transition factorization, the conormal
//! pairing, logarithmic coordinates and the partition-of-unity gluing of
//! exponential maps with its sampled certificates.
//!
//! Local maps are polynomial in `(u, r)`, where `u` are coordinates on the
//! closed face (a parameter box) and `r` the values of the defining functions.
//! The glued map is evaluated in displacement form
//! `f(u, r) = i(u) + Σ_k φ_k(u) (X_k(u, r) − X_k(u, 0))`, which coincides with
//! the convex combination `Σ φ_k X_k` whenever the charts agree on the zero
//! section, and makes `f(u, 0) = i(u)` hold bit for bit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::FaceId;
use crate::error::{CornerError, Result};
use crate::perm::Perm;

/// Defining functions of a chart are valid where they stay below this bound.
pub const DOMAIN_BOUND: f64 = 1.5;

/// `A = Π Λ` with `Π` a permutation matrix and `Λ` positive diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Column `j` of `A` is supported in row `perm(j)`.
    pub perm: Perm,
    pub lambda: Vec<f64>,
}

impl Transition {
    pub fn pi_matrix(&self) -> DMatrix<f64> {
        let d = self.lambda.len();
        DMatrix::from_fn(d, d, |i, j| if self.perm.apply(j) == i { 1.0 } else { 0.0 })
    }

    pub fn lambda_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.lambda))
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.pi_matrix() * self.lambda_matrix()
    }
}

/// Splits the normal block of a transition into permutation and positive diagonal.
pub fn decompose_transition(a: &DMatrix<f64>, tol: f64) -> Result<Transition> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(CornerError::Shape(format!(
            "{}×{} transition block is not square",
            d,
            a.ncols()
        )));
    }
    for i in 0..d {
        let k = (0..d).filter(|&j| a[(i, j)].abs() > tol).count();
        if k != 1 {
            return Err(CornerError::NotPermutationDiagonal(format!(
                "row {i} has {k} significant entries"
            )));
        }
    }
    let mut images = vec![0; d];
    let mut lambda = vec![0.0; d];
    for j in 0..d {
        let rows: Vec<usize> = (0..d).filter(|&i| a[(i, j)].abs() > tol).collect();
        if rows.len() != 1 {
            return Err(CornerError::NotPermutationDiagonal(format!(
                "column {j} has {} significant entries",
                rows.len()
            )));
        }
        let v = a[(rows[0], j)];
        if v <= 0.0 {
            return Err(CornerError::NotPermutationDiagonal(format!(
                "entry ({}, {j}) = {v} is not positive",
                rows[0]
            )));
        }
        images[j] = rows[0];
        lambda[j] = v;
    }
    Ok(Transition {
        perm: Perm::new(images)?,
        lambda,
    })
}

/// `⟨ω, ξ⟩ = Σ a_j b_j` for `ω = Σ a_j ρ_j^{-1} dρ_j` and `ξ = Σ b_j ρ_j ∂/∂ρ_j`.
pub fn pairing(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CornerError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

/// `t = −ln ρ`.
pub fn log_coords(rho: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = rho.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(CornerError::NonPositive { index, value });
    }
    Ok(rho.iter().map(|r| -r.ln()).collect())
}

/// `ρ = exp(−t)`.
pub fn exp_coords(t: &[f64]) -> Vec<f64> {
    t.iter().map(|v| (-v).exp()).collect()
}

/// A real polynomial as a list of `(coefficient, exponents)` terms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial {
            terms: vec![(c, Vec::new())],
        }
    }

    pub fn term(c: f64, exps: &[u32]) -> Self {
        Polynomial {
            terms: vec![(c, exps.to_vec())],
        }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * e
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| v[i].powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn add(mut self, other: Polynomial) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, e1) in &self.terms {
            for (c2, e2) in &other.terms {
                let n = e1.len().max(e2.len());
                let e = (0..n)
                    .map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0))
                    .collect();
                terms.push((c1 * c2, e));
            }
        }
        Polynomial { terms }
    }

    pub fn scale(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= s;
        }
        self
    }

    fn max_var(&self) -> usize {
        self.terms.iter().map(|(_, e)| e.len()).max().unwrap_or(0)
    }
}

/// A vector-valued polynomial map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyMap(pub Vec<Polynomial>);

impl PolyMap {
    pub fn eval(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().map(|p| p.eval(v)).collect()
    }

    pub fn output_dim(&self) -> usize {
        self.0.len()
    }

    pub fn input_dim(&self) -> usize {
        self.0.iter().map(Polynomial::max_var).max().unwrap_or(0)
    }
}

/// The C² bump `(1 − (|u − c| / R)²)³` on the ball of radius `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, u: &[f64]) -> f64 {
        let s: f64 = u
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / self.radius.powi(2);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(3)
        }
    }
}

/// A chart straddling a face, with its local exponential map `ρ = r`
/// expressed as a polynomial map `X(u, r)` into ambient coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub face: FaceId,
    /// `(d, n − d)`: model `R̄₊^d × R^{n−d}`.
    pub model: (usize, usize),
    pub defining_labels: Vec<String>,
    #[serde(default = "domain_bound")]
    pub domain_bound: f64,
    /// Variables `(u_1, …, u_{n−d}, r_1, …, r_d)`.
    pub map: PolyMap,
    pub bump: Bump,
    /// Identification of the global fiber ordering with this chart's defining functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_order: Option<Perm>,
}

fn domain_bound() -> f64 {
    DOMAIN_BOUND
}

impl Chart {
    pub fn new(face: FaceId, model: (usize, usize), map: PolyMap, bump: Bump) -> Self {
        Chart {
            face,
            model,
            defining_labels: (0..model.0).map(|i| format!("rho{i}")).collect(),
            domain_bound: DOMAIN_BOUND,
            map,
            bump,
            fiber_order: None,
        }
    }

    fn eval(&self, u: &[f64], r: &[f64]) -> Vec<f64> {
        let r = match &self.fiber_order {
            Some(p) => p.permute(r),
            None => r.to_vec(),
        };
        let mut v = u.to_vec();
        v.extend(r);
        self.map.eval(&v)
    }
}

/// How chart weights are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// `φ_k = b_k / Σ b` from the charts' bumps.
    Normalized,
    /// One explicit polynomial weight per chart (must sum to 1).
    Explicit(Vec<Polynomial>),
}

/// Anything that can be evaluated as an exponential map `(u, r) ↦ M`.
pub trait ExpMapping {
    fn base_box(&self) -> &[(f64, f64)];
    fn fiber_dim(&self) -> usize;
    fn eval(&self, u: &[f64], r: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedExpMap {
    pub face: FaceId,
    pub base: Vec<(f64, f64)>,
    pub fiber_dim: usize,
    pub immersion: PolyMap,
    pub charts: Vec<Chart>,
    pub partition: Partition,
}

impl GluedExpMap {
    pub fn weights(&self, u: &[f64]) -> Vec<f64> {
        match &self.partition {
            Partition::Normalized => {
                let b: Vec<f64> = self.charts.iter().map(|c| c.bump.eval(u)).collect();
                let s: f64 = b.iter().sum();
                if s > 0.0 {
                    b.iter().map(|v| v / s).collect()
                } else {
                    b
                }
            }
            Partition::Explicit(ws) => ws.iter().map(|w| w.eval(u)).collect(),
        }
    }
}

impl ExpMapping for GluedExpMap {
    fn base_box(&self) -> &[(f64, f64)] {
        &self.base
    }

    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    fn eval(&self, u: &[f64], r: &[f64]) -> Vec<f64> {
        let mut out = self.immersion.eval(u);
        let zero = vec![0.0; r.len()];
        for (c, w) in self.charts.iter().zip(self.weights(u)) {
            if w == 0.0 {
                continue;
            }
            let a = c.eval(u, r);
            let b = c.eval(u, &zero);
            for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(&b)) {
                *o += w * (x - y);
            }
        }
        out
    }
}

/// An exponential map with `coef · r_slot²` added to one output component.
pub struct PerturbedMap<'a, M: ExpMapping> {
    pub inner: &'a M,
    pub component: usize,
    pub slot: usize,
    pub coef: f64,
}

impl<M: ExpMapping> ExpMapping for PerturbedMap<'_, M> {
    fn base_box(&self) -> &[(f64, f64)] {
        self.inner.base_box()
    }

    fn fiber_dim(&self) -> usize {
        self.inner.fiber_dim()
    }

    fn eval(&self, u: &[f64], r: &[f64]) -> Vec<f64> {
        let mut v = self.inner.eval(u, r);
        v[self.component] += self.coef * r[self.slot].powi(2);
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueOptions {
    pub eps: f64,
    /// Grid points per axis on `base × [0, eps]^d`.
    pub grid: usize,
    pub det_tol: f64,
    /// Grid points per axis for the injectivity ladder.
    pub injectivity_grid: usize,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions {
            eps: 0.25,
            grid: 50,
            det_tol: 1e-8,
            injectivity_grid: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSample {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub point: Vec<f64>,
    pub det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMapGrid {
    pub map: GluedExpMap,
    pub eps: f64,
    pub samples: Vec<ExpSample>,
    /// `max |f(u, 0) − i(u)|` over the base samples.
    pub zero_section_error: f64,
    pub min_abs_det: f64,
    /// Largest `κ` in the dyadic ladder for which the samples with
    /// `r ≤ κ · dist(u, ∂base)` map injectively (bi-Lipschitz ratio above the
    /// determinant tolerance), if any.
    pub injectivity_kappa: Option<f64>,
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Cartesian product of per-axis point lists.
fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Central finite-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let n_out = f(x).len();
    let mut j = DMatrix::zeros(n_out, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        for i in 0..n_out {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

fn det_at(map: &dyn ExpMapping, u: &[f64], r: &[f64]) -> f64 {
    let m = u.len();
    let f = |v: &[f64]| map.eval(&v[..m], &v[m..]);
    let mut x = u.to_vec();
    x.extend_from_slice(r);
    let j = fd_jacobian(&f, &x, 1e-6);
    if j.nrows() != j.ncols() {
        return 0.0;
    }
    j.determinant()
}

/// Glues the charts' local maps into one exponential map for `face` and
/// certifies it on a sample grid.
pub fn glue_exp_maps(
    face: FaceId,
    base: Vec<(f64, f64)>,
    immersion: PolyMap,
    charts: Vec<Chart>,
    partition: Partition,
    opts: &GlueOptions,
) -> Result<ExpMapGrid> {
    let d = charts.first().map_or(0, |c| c.model.0);
    for (k, c) in charts.iter().enumerate() {
        if c.face != face || c.model.0 != d || c.model.1 != base.len() {
            return Err(CornerError::Shape(format!(
                "chart {k} models {:?} on face {}, expected ({d}, {}) on face {}",
                c.model,
                c.face.0,
                base.len(),
                face.0
            )));
        }
    }
    if charts.is_empty() {
        return Err(CornerError::Shape("no charts".into()));
    }
    if let Partition::Explicit(w) = &partition {
        if w.len() != charts.len() {
            return Err(CornerError::LengthMismatch {
                left: w.len(),
                right: charts.len(),
            });
        }
    }
    if !(opts.eps > 0.0 && opts.eps < DOMAIN_BOUND) {
        return Err(CornerError::Domain(format!(
            "eps = {} must lie in (0, {DOMAIN_BOUND})",
            opts.eps
        )));
    }
    let map = GluedExpMap {
        face,
        base: base.clone(),
        fiber_dim: d,
        immersion,
        charts,
        partition,
    };

    let base_axes: Vec<Vec<f64>> = base
        .iter()
        .map(|&(lo, hi)| grid_points(lo, hi, opts.grid))
        .collect();
    let base_pts = product(&base_axes);
    let zero = vec![0.0; d];
    let mut zero_section_error = 0.0f64;
    for u in &base_pts {
        let w = map.weights(u);
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-12 || w.iter().any(|&v| v < 0.0) {
            return Err(CornerError::Partition {
                deviation: (s - 1.0).abs(),
                location: format!("u = {u:?}"),
            });
        }
        let iu = map.immersion.eval(u);
        for (c, &wk) in map.charts.iter().zip(&w) {
            if wk > 0.0 {
                let x0 = c.eval(u, &zero);
                let gap = x0
                    .iter()
                    .zip(&iu)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if gap > 1e-12 {
                    return Err(CornerError::ChartMismatch(gap));
                }
            }
        }
        let f0 = map.eval(u, &zero);
        let err = f0
            .iter()
            .zip(&iu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        zero_section_error = zero_section_error.max(err);
    }

    let mut axes = base_axes.clone();
    axes.extend((0..d).map(|_| grid_points(0.0, opts.eps, opts.grid)));
    let m = base.len();
    let mut samples = Vec::new();
    let mut min_abs_det = f64::INFINITY;
    for p in product(&axes) {
        let (u, r) = p.split_at(m);
        let det = det_at(&map, u, r);
        if !(det.abs() > opts.det_tol) {
            return Err(CornerError::SingularJacobian {
                det,
                location: format!("u = {u:?}, r = {r:?}"),
            });
        }
        min_abs_det = min_abs_det.min(det.abs());
        samples.push(ExpSample {
            u: u.to_vec(),
            r: r.to_vec(),
            point: map.eval(u, r),
            det,
        });
    }

    let injectivity_kappa = injectivity_ladder(&map, opts);
    Ok(ExpMapGrid {
        map,
        eps: opts.eps,
        samples,
        zero_section_error,
        min_abs_det,
        injectivity_kappa,
    })
}

fn injectivity_ladder(map: &GluedExpMap, opts: &GlueOptions) -> Option<f64> {
    let m = map.base.len();
    let d = map.fiber_dim;
    let mut axes: Vec<Vec<f64>> = map
        .base
        .iter()
        .map(|&(lo, hi)| grid_points(lo, hi, opts.injectivity_grid))
        .collect();
    axes.extend((0..d).map(|_| grid_points(0.0, opts.eps, opts.injectivity_grid)));
    let pts = product(&axes);
    let dist_to_boundary = |u: &[f64]| {
        u.iter()
            .zip(&map.base)
            .map(|(&v, &(lo, hi))| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    };
    for i in 0..8 {
        let kappa = 0.5f64.powi(i);
        let kept: Vec<(&Vec<f64>, Vec<f64>)> = pts
            .iter()
            .filter(|p| {
                let (u, r) = p.split_at(m);
                r.iter().all(|&v| v <= kappa * dist_to_boundary(u))
            })
            .map(|p| (p, map.eval(&p[..m], &p[m..])))
            .collect();
        let mut ok = true;
        'pairs: for a in 0..kept.len() {
            for b in a + 1..kept.len() {
                let dx: f64 = kept[a]
                    .0
                    .iter()
                    .zip(kept[b].0)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let dy: f64 = kept[a]
                    .1
                    .iter()
                    .zip(&kept[b].1)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dy <= opts.det_tol * dx {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if ok {
            return Some(kappa);
        }
    }
    None
}

/// Solves `f(u, r) = x` by damped Newton iteration from `start`.
pub fn invert(
    map: &dyn ExpMapping,
    x: &[f64],
    start: &[f64],
    max_steps: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let m = map.base_box().len();
    let f = |v: &[f64]| map.eval(&v[..m], &v[m..]);
    let resid = |v: &[f64]| -> (Vec<f64>, f64) {
        let fx = f(v);
        let r: Vec<f64> = fx.iter().zip(x).map(|(a, b)| a - b).collect();
        let n = r.iter().map(|e| e * e).sum::<f64>().sqrt();
        (r, n)
    };
    let mut v = start.to_vec();
    let (mut r, mut norm) = resid(&v);
    for _ in 0..max_steps {
        if norm <= tol {
            return Ok(v);
        }
        let j = fd_jacobian(&f, &v, 1e-7);
        let Some(step) = j.lu().solve(&nalgebra::DVector::from_vec(r.clone())) else {
            break;
        };
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = v.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let (rc, nc) = resid(&cand);
            if nc < norm || t < 1e-6 {
                v = cand;
                r = rc;
                norm = nc;
                break;
            }
            t *= 0.5;
        }
    }
    if norm <= tol {
        Ok(v)
    } else {
        Err(CornerError::NoConvergence {
            location: format!("x = {x:?}"),
            residual: norm,
        })
    }
}

/// Where the fiber directions of `Γ_j` sit among the fiber coordinates of `Γ_l` (`Γ_j ≻ Γ_l`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceEmbedding {
    /// `normal_slots[a]` is the `Γ_l` fiber index of the `a`-th defining function of `Γ_j`.
    pub normal_slots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub max_residual: f64,
    pub worst: Option<(Vec<f64>, Vec<f64>)>,
    pub samples: usize,
    pub pass: bool,
}

/// Two-path comparison around the compatibility diagram: the components of
/// `g = f_l^{-1} ∘ f_j` transverse to the normal directions of `Γ_j` must not
/// depend on the fiber coordinate of `Γ_j`, i.e. `P g(u, r) = P g(u, 0)`.
pub fn check_compatibility_diagram(
    f_j: &dyn ExpMapping,
    f_l: &dyn ExpMapping,
    embedding: &FaceEmbedding,
    samples: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<DiagramReport> {
    let ml = f_l.base_box().len();
    let dl = f_l.fiber_dim();
    let start: Vec<f64> = f_l
        .base_box()
        .iter()
        .map(|&(lo, hi)| 0.5 * (lo + hi))
        .chain(std::iter::repeat(0.0).take(dl))
        .collect();
    let transverse: Vec<usize> = (0..ml + dl)
        .filter(|&k| k < ml || !embedding.normal_slots.contains(&(k - ml)))
        .collect();
    let mut max_residual = 0.0f64;
    let mut worst = None;
    for (u, r) in samples {
        let zero = vec![0.0; r.len()];
        let g1 = invert(f_l, &f_j.eval(u, r), &start, 100, 1e-12)?;
        let g0 = invert(f_l, &f_j.eval(u, &zero), &start, 100, 1e-12)?;
        let res = transverse
            .iter()
            .map(|&k| (g1[k] - g0[k]).abs())
            .fold(0.0, f64::max);
        if res > max_residual {
            max_residual = res;
            worst = Some((u.clone(), r.clone()));
        }
    }
    Ok(DiagramReport {
        max_residual,
        worst,
        samples: samples.len(),
        pass: max_residual <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConvexVerdict {
    Pass {
        min_abs_det: f64,
        radius: f64,
    },
    HypothesisViolated {
        pair: (usize, usize),
        detail: String,
    },
    ConclusionFailed {
        point: Vec<f64>,
        det: f64,
    },
}

/// Checks that `Σ λ_j g_j` is a local diffeomorphism at 0 for maps
/// `g_j: R₊^k → R₊^k` with `g_j(0) = 0` whose Jacobian ratios
/// `g_j'(0) g_i'(0)^{-1}` are diagonal.
pub fn convex_diffeo_check(
    maps: &[&dyn Fn(&[f64]) -> Vec<f64>],
    lambdas: &[f64],
    k: usize,
    samples_per_axis: usize,
    tol: f64,
) -> Result<ConvexVerdict> {
    if maps.len() != lambdas.len() {
        return Err(CornerError::LengthMismatch {
            left: maps.len(),
            right: lambdas.len(),
        });
    }
    if lambdas.iter().any(|&l| l < 0.0) || lambdas.iter().sum::<f64>() <= 0.0 {
        return Err(CornerError::Domain(
            "weights must be nonnegative and not all zero".into(),
        ));
    }
    let origin = vec![0.0; k];
    let forward_jacobian = |g: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]| {
        let h = 1e-7;
        let g0 = g(x);
        let mut jac = DMatrix::zeros(k, k);
        let mut xp = x.to_vec();
        for c in 0..k {
            xp[c] = x[c] + h;
            let gp = g(&xp);
            xp[c] = x[c];
            for i in 0..k {
                jac[(i, c)] = (gp[i] - g0[i]) / h;
            }
        }
        jac
    };
    let jacs: Vec<DMatrix<f64>> = maps.iter().map(|g| forward_jacobian(*g, &origin)).collect();
    for i in 0..jacs.len() {
        let Some(inv) = jacs[i].clone().try_inverse() else {
            return Ok(ConvexVerdict::HypothesisViolated {
                pair: (i, i),
                detail: format!("g_{i}'(0) is singular"),
            });
        };
        for j in 0..jacs.len() {
            let ratio = &jacs[j] * &inv;
            let scale = ratio.amax().max(1.0);
            let off = (0..k)
                .flat_map(|a| (0..k).map(move |b| (a, b)))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| ratio[(a, b)].abs())
                .fold(0.0, f64::max);
            if off > 1e-5 * scale {
                return Ok(ConvexVerdict::HypothesisViolated {
                    pair: (j, i),
                    detail: format!("ratio matrix has off-diagonal entry {off:e}"),
                });
            }
        }
    }
    let combo = |x: &[f64]| {
        let mut out = vec![0.0; k];
        for (g, &l) in maps.iter().zip(lambdas) {
            for (o, v) in out.iter_mut().zip(g(x)) {
                *o += l * v;
            }
        }
        out
    };
    let mut min_abs_det = f64::INFINITY;
    let mut radius = 0.0;
    for level in 0..4 {
        let delta = 0.5f64.powi(level) * 0.1;
        let axes: Vec<Vec<f64>> = (0..k)
            .map(|_| grid_points(0.0, delta, samples_per_axis))
            .collect();
        for p in product(&axes) {
            let det = forward_jacobian(&combo, &p).determinant();
            if det.abs() <= tol {
                return Ok(ConvexVerdict::ConclusionFailed { point: p, det });
            }
            min_abs_det = min_abs_det.min(det.abs());
        }
        if level == 0 {
            radius = delta;
        }
    }
    Ok(ConvexVerdict::Pass {
        min_abs_det,
        radius,
    })
}

/// Sample grid `base × [0, eps]^d` with `n` points per axis.
pub fn sample_grid(base: &[(f64, f64)], d: usize, eps: f64, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut axes: Vec<Vec<f64>> = base
        .iter()
        .map(|&(lo, hi)| grid_points(lo, hi, n))
        .collect();
    axes.extend((0..d).map(|_| grid_points(0.0, eps, n)));
    let m = base.len();
    product(&axes)
        .into_iter()
        .map(|p| (p[..m].to_vec(), p[m..].to_vec()))
        .collect()
}

/// Worked atlases: the square near its bottom edge and the 1-gon near its edge.
pub mod examples {
    use super::*;

    fn var(i: usize, nvars: usize) -> Polynomial {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial {
            terms: vec![(1.0, e)],
        }
    }

    fn affine(c: f64, terms: &[(f64, usize)], nvars: usize) -> Polynomial {
        let mut p = Polynomial::constant(c);
        for &(a, i) in terms {
            p = p.add(var(i, nvars).scale(a));
        }
        p
    }

    /// Bottom edge `{y = 0}` of the unit square (face 3 of the polytope complex).
    pub const SQUARE_EDGE: FaceId = FaceId(3);
    /// The vertices `(0, 0)` and `(1, 0)` (faces 5 and 7).
    pub const SQUARE_VERTEX_00: FaceId = FaceId(5);
    pub const SQUARE_VERTEX_10: FaceId = FaceId(7);

    /// Chart near `x = 0`: `(u, r) ↦ (u(1 + 0.3r), r(1 + 0.2r))`.
    pub fn square_chart_left() -> Chart {
        let u = var(0, 2);
        let r = var(1, 2);
        let x = u.mul(&affine(1.0, &[(0.3, 1)], 2));
        let y = r.mul(&affine(1.0, &[(0.2, 1)], 2));
        Chart::new(
            SQUARE_EDGE,
            (1, 1),
            PolyMap(vec![x, y]),
            Bump {
                center: vec![0.0],
                radius: 0.7,
            },
        )
    }

    /// Chart near `x = 1`: `(u, r) ↦ (1 − (1 − u)(1 + 0.1r), r(1 + 0.4r))`.
    pub fn square_chart_right() -> Chart {
        let r = var(1, 2);
        let one_minus_u = affine(1.0, &[(-1.0, 0)], 2);
        let x = Polynomial::constant(1.0)
            .add(one_minus_u.mul(&affine(1.0, &[(0.1, 1)], 2)).scale(-1.0));
        let y = r.mul(&affine(1.0, &[(0.4, 1)], 2));
        Chart::new(
            SQUARE_EDGE,
            (1, 1),
            PolyMap(vec![x, y]),
            Bump {
                center: vec![1.0],
                radius: 0.7,
            },
        )
    }

    pub fn square_edge_immersion() -> PolyMap {
        PolyMap(vec![var(0, 1), Polynomial::default()])
    }

    /// Glued exponential map of the bottom edge from the two charts.
    pub fn square_edge_map(opts: &GlueOptions) -> Result<ExpMapGrid> {
        glue_exp_maps(
            SQUARE_EDGE,
            vec![(0.0, 1.0)],
            square_edge_immersion(),
            vec![square_chart_left(), square_chart_right()],
            Partition::Normalized,
            opts,
        )
    }

    /// Exponential map of the vertex `(0, 0)`: `(ρ_x, ρ_y) ↦ (ρ_x(1 + 0.3ρ_y), ρ_y(1 + 0.2ρ_y))`.
    pub fn square_vertex_00_map(opts: &GlueOptions) -> Result<ExpMapGrid> {
        let rx = var(0, 2);
        let ry = var(1, 2);
        let x = rx.mul(&affine(1.0, &[(0.3, 1)], 2));
        let y = ry.mul(&affine(1.0, &[(0.2, 1)], 2));
        let chart = Chart::new(
            SQUARE_VERTEX_00,
            (2, 0),
            PolyMap(vec![x, y]),
            Bump {
                center: vec![],
                radius: 1.0,
            },
        );
        let immersion = PolyMap(vec![Polynomial::default(), Polynomial::default()]);
        glue_exp_maps(
            SQUARE_VERTEX_00,
            vec![],
            immersion,
            vec![chart],
            Partition::Normalized,
            opts,
        )
    }

    /// Exponential map of the vertex `(1, 0)`: `(ρ_x, ρ_y) ↦ (1 − ρ_x(1 + 0.1ρ_y), ρ_y(1 + 0.4ρ_y))`.
    pub fn square_vertex_10_map(opts: &GlueOptions) -> Result<ExpMapGrid> {
        let rx = var(0, 2);
        let ry = var(1, 2);
        let x = Polynomial::constant(1.0).add(rx.mul(&affine(1.0, &[(0.1, 1)], 2)).scale(-1.0));
        let y = ry.mul(&affine(1.0, &[(0.4, 1)], 2));
        let chart = Chart::new(
            SQUARE_VERTEX_10,
            (2, 0),
            PolyMap(vec![x, y]),
            Bump {
                center: vec![],
                radius: 1.0,
            },
        );
        let immersion = PolyMap(vec![Polynomial::constant(1.0), Polynomial::default()]);
        glue_exp_maps(
            SQUARE_VERTEX_10,
            vec![],
            immersion,
            vec![chart],
            Partition::Normalized,
            opts,
        )
    }

    /// The edge's defining function is the second vertex coordinate `ρ_y`.
    pub fn square_edge_in_vertex() -> FaceEmbedding {
        FaceEmbedding {
            normal_slots: vec![1],
        }
    }

    /// The 1-gon boundary: the cubic Bézier curve with control points
    /// `(0,0), (1,0), (0,1), (0,0)`, i.e. `γ(u) = (3u(1−u)², 3u²(1−u))`.
    pub fn one_gon_curve() -> PolyMap {
        let u = |c: f64, p: u32| Polynomial::term(c, &[p]);
        // 3u(1−u)² = 3u − 6u² + 3u³ ; 3u²(1−u) = 3u² − 3u³
        PolyMap(vec![
            u(3.0, 1).add(u(-6.0, 2)).add(u(3.0, 3)),
            u(3.0, 2).add(u(-3.0, 3)),
        ])
    }

    /// Inward normal `N = (−γ'_y, γ'_x)` with `γ' = (3 − 12u + 9u², 6u − 9u²)`.
    fn one_gon_normal() -> [Polynomial; 2] {
        let u = |c: f64, p: u32| Polynomial::term(c, &[p, 0]);
        let nx = u(-6.0, 1).add(u(9.0, 2));
        let ny = u(3.0, 0).add(u(-12.0, 1)).add(u(9.0, 2));
        [nx, ny]
    }

    /// Two charts of the 1-gon edge meeting at the corner: `γ + rN` and `γ + r(1 + u/5)N`.
    pub fn one_gon_charts() -> Vec<Chart> {
        let gamma = one_gon_curve();
        let lift = |p: &Polynomial| Polynomial {
            terms: p.terms.iter().map(|(c, e)| (*c, vec![e[0], 0])).collect(),
        };
        let r = Polynomial::term(1.0, &[0, 1]);
        let ru = Polynomial::term(1.0, &[0, 1]).add(Polynomial::term(0.2, &[1, 1]));
        let n = one_gon_normal();
        let make = |scale: &Polynomial, center: f64| {
            let comps = (0..2)
                .map(|i| lift(&gamma.0[i]).add(scale.mul(&n[i])))
                .collect();
            Chart::new(
                FaceId(1),
                (1, 1),
                PolyMap(comps),
                Bump {
                    center: vec![center],
                    radius: 0.6,
                },
            )
        };
        vec![make(&r, 0.25), make(&ru, 0.75)]
    }

    pub fn one_gon_edge_map(opts: &GlueOptions) -> Result<ExpMapGrid> {
        glue_exp_maps(
            FaceId(1),
            vec![(0.0, 1.0)],
            one_gon_curve(),
            one_gon_charts(),
            Partition::Normalized,
            opts,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_examples() {
        let t = decompose_transition(&DMatrix::identity(3, 3), 1e-12).unwrap();
        assert!(t.perm.is_identity() && t.lambda == vec![1.0; 3]);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
        let t = decompose_transition(&a, 1e-12).unwrap();
        assert_eq!(t.perm, Perm::swap(2, 0, 1));
        assert_eq!(t.lambda, vec![3.0, 2.0]);
        assert_eq!(t.matrix(), a);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let err = decompose_transition(&bad, 1e-12).unwrap_err();
        assert!(err.to_string().contains("row 0 has 2 significant entries"));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(pairing(&[0.0, 0.0], &[3.0, -4.0]).unwrap(), 0.0);
        assert_eq!(pairing(&[2.0, 1.0], &[4.0, 3.0]).unwrap(), 11.0);
        assert!(pairing(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn log_coords_examples() {
        assert_eq!(log_coords(&[1.0]).unwrap(), vec![0.0]);
        let t = log_coords(&[(-2f64).exp(), (-3f64).exp()]).unwrap();
        assert!((t[0] - 2.0).abs() < 1e-15 && (t[1] - 3.0).abs() < 1e-15);
        assert!(matches!(
            log_coords(&[0.5, 0.0]),
            Err(CornerError::NonPositive { index: 1, .. })
        ));
    }

    #[test]
    fn single_chart_glue_equals_chart() {
        let mut c = examples::square_chart_left();
        c.bump = Bump {
            center: vec![0.5],
            radius: 10.0,
        };
        let g = glue_exp_maps(
            examples::SQUARE_EDGE,
            vec![(0.0, 1.0)],
            examples::square_edge_immersion(),
            vec![c.clone()],
            Partition::Normalized,
            &GlueOptions {
                grid: 11,
                ..Default::default()
            },
        )
        .unwrap();
        for s in &g.samples {
            let direct = c.map.eval(&[s.u[0], s.r[0]]);
            let diff = direct
                .iter()
                .zip(&s.point)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn explicit_partition_must_sum_to_one() {
        let bad = Partition::Explicit(vec![Polynomial::constant(0.5), Polynomial::constant(0.4)]);
        let r = glue_exp_maps(
            examples::SQUARE_EDGE,
            vec![(0.0, 1.0)],
            examples::square_edge_immersion(),
            vec![
                examples::square_chart_left(),
                examples::square_chart_right(),
            ],
            bad,
            &GlueOptions {
                grid: 5,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(CornerError::Partition { .. })));
    }

    #[test]
    fn one_gon_zero_section_is_exact() {
        let g = examples::one_gon_edge_map(&GlueOptions {
            grid: 30,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(g.zero_section_error, 0.0);
        assert!(g.min_abs_det > 1e-3);
    }

    #[test]
    fn convex_diffeo_examples() {
        let id = |x: &[f64]| x.to_vec();
        let v = convex_diffeo_check(&[&id, &id], &[0.5, 0.5], 2, 5, 1e-9).unwrap();
        assert!(matches!(v, ConvexVerdict::Pass { .. }));

        let g1 = |x: &[f64]| vec![x[0], 2.0 * x[1]];
        let g2 = |x: &[f64]| vec![3.0 * x[0], x[1]];
        let ConvexVerdict::Pass { min_abs_det, .. } =
            convex_diffeo_check(&[&g1, &g2], &[1.0, 1.0], 2, 5, 1e-9).unwrap()
        else {
            panic!("expected pass");
        };
        assert!((min_abs_det - 12.0).abs() < 1e-5);

        let swap = |x: &[f64]| vec![x[1], x[0]];
        let v = convex_diffeo_check(&[&id, &swap], &[1.0, 1.0], 2, 5, 1e-9).unwrap();
        assert!(matches!(v, ConvexVerdict::HypothesisViolated { .. }));
    }
}
