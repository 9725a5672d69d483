//! Translation-invariant operators on periodic lattice models, their
//! Fourier-multiplier symbols, corner measures and group-invariant subspaces.
//!
//! Functions live on `Z_N^d × {0..b}` and are stored row-major in the lattice
//! index with the base index fastest. Frequencies use the convention
//! `(Ff)(k) = Σ_n f(n) e^{−2πi k·n/N}`; the frequency of index `k` is
//! `q = 2π k'/(N h)` with `k'` the signed representative of `k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{CornerError, Result};
use crate::perm::Perm;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel {
    pub d: usize,
    pub n: usize,
    pub base_dim: usize,
    pub h: f64,
}

impl LatticeModel {
    pub fn new(d: usize, n: usize, base_dim: usize, h: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(CornerError::Lattice(format!(
                "N = {n} must be even and at least 8"
            )));
        }
        if base_dim == 0 || !(h > 0.0) {
            return Err(CornerError::Lattice(format!(
                "base_dim = {base_dim}, h = {h}"
            )));
        }
        Ok(LatticeModel { d, n, base_dim, h })
    }

    pub fn nodes(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn dim(&self) -> usize {
        self.nodes() * self.base_dim
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for a in (0..self.d).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i % self.n)
    }

    pub fn signed(&self, k: usize) -> i64 {
        let k = k as i64;
        let n = self.n as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// The frequency vector `q` of flat frequency index `k`.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let scale = 2.0 * std::f64::consts::PI / (self.n as f64 * self.h);
        self.multi_index(flat)
            .iter()
            .map(|&k| scale * self.signed(k) as f64)
            .collect()
    }

    /// Flat index of `a − b` on the torus.
    fn difference(&self, a: usize, b: usize) -> usize {
        let ia = self.multi_index(a);
        let ib = self.multi_index(b);
        let diff: Vec<usize> = ia
            .iter()
            .zip(&ib)
            .map(|(x, y)| (x + self.n - y) % self.n)
            .collect();
        self.flat_index(&diff)
    }
}

/// An operator-valued function on the frequency grid, one matrix per flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSymbol {
    pub model: LatticeModel,
    pub values: Vec<CMatrix>,
}

impl MultiplierSymbol {
    pub fn from_fn(model: LatticeModel, f: impl Fn(&[f64]) -> CMatrix) -> Self {
        let values = (0..model.nodes()).map(|k| f(&model.frequency(k))).collect();
        MultiplierSymbol { model, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &MultiplierSymbol) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// A block-circulant operator `(Af)(n) = Σ_m K(n − m) f(m)`, stored by its kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationInvariantOp {
    pub model: LatticeModel,
    pub kernel: Vec<CMatrix>,
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// In-place multidimensional DFT over a row-major array of shape `[n; d]`.
fn fft_nd(
    planner: &mut FftPlanner<f64>,
    data: &mut [Complex64],
    n: usize,
    d: usize,
    inverse: bool,
) {
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for start in 0..total {
            if (start / stride) % n != 0 {
                continue;
            }
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[start + i * stride] = *v;
            }
        }
    }
}

fn transform_entries(model: &LatticeModel, src: &[CMatrix], inverse: bool) -> Vec<CMatrix> {
    let b = model.base_dim;
    let nodes = model.nodes();
    let mut planner = FftPlanner::new();
    let mut out = vec![CMatrix::zeros(b, b); nodes];
    let mut buf = vec![Complex64::new(0.0, 0.0); nodes];
    let scale = if inverse { 1.0 / nodes as f64 } else { 1.0 };
    for i in 0..b {
        for j in 0..b {
            for (k, m) in src.iter().enumerate() {
                buf[k] = m[(i, j)];
            }
            fft_nd(&mut planner, &mut buf, model.n, model.d, inverse);
            for (k, v) in buf.iter().enumerate() {
                out[k][(i, j)] = v * scale;
            }
        }
    }
    out
}

fn check_symbol_shape(model: &LatticeModel, values: &[CMatrix]) -> Result<()> {
    if values.len() != model.nodes() {
        return Err(CornerError::Shape(format!(
            "{} symbol values for {} frequencies",
            values.len(),
            model.nodes()
        )));
    }
    if let Some(m) = values
        .iter()
        .find(|m| m.nrows() != model.base_dim || m.ncols() != model.base_dim)
    {
        return Err(CornerError::Shape(format!(
            "symbol value of size {}×{} for base_dim {}",
            m.nrows(),
            m.ncols(),
            model.base_dim
        )));
    }
    Ok(())
}

/// `B(−i∂)`: inverse DFT of the symbol gives the convolution kernel.
pub fn quantize(symbol: &MultiplierSymbol) -> Result<TranslationInvariantOp> {
    check_symbol_shape(&symbol.model, &symbol.values)?;
    Ok(TranslationInvariantOp {
        model: symbol.model,
        kernel: transform_entries(&symbol.model, &symbol.values, true),
    })
}

/// The multiplier of a block-circulant operator.
pub fn extract_symbol(op: &TranslationInvariantOp) -> Result<MultiplierSymbol> {
    check_symbol_shape(&op.model, &op.kernel)?;
    Ok(MultiplierSymbol {
        model: op.model,
        values: transform_entries(&op.model, &op.kernel, false),
    })
}

impl TranslationInvariantOp {
    pub fn identity(model: LatticeModel) -> Self {
        let mut kernel = vec![CMatrix::zeros(model.base_dim, model.base_dim); model.nodes()];
        kernel[0] = CMatrix::identity(model.base_dim, model.base_dim);
        TranslationInvariantOp { model, kernel }
    }

    /// The dense matrix on `Z_N^d × {0..b}`.
    pub fn to_dense(&self) -> CMatrix {
        let b = self.model.base_dim;
        let nodes = self.model.nodes();
        let mut a = CMatrix::zeros(nodes * b, nodes * b);
        for n in 0..nodes {
            for m in 0..nodes {
                let k = &self.kernel[self.model.difference(n, m)];
                a.view_mut((n * b, m * b), (b, b)).copy_from(k);
            }
        }
        a
    }

    /// Recovers the kernel from a dense matrix, rejecting anything that does
    /// not commute with the lattice shifts.
    pub fn from_dense(model: LatticeModel, a: &CMatrix, tol: f64) -> Result<Self> {
        let b = model.base_dim;
        let nodes = model.nodes();
        if a.nrows() != nodes * b || a.ncols() != nodes * b {
            return Err(CornerError::Shape(format!(
                "{}×{} matrix for dimension {}",
                a.nrows(),
                a.ncols(),
                model.dim()
            )));
        }
        let mut worst = 0.0f64;
        for axis in 0..model.d {
            let s = shift_matrix(&model, axis);
            let comm = &s * a - a * &s;
            worst = worst.max(comm.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        if worst > tol {
            return Err(CornerError::NotShiftInvariant(worst));
        }
        let kernel = (0..nodes)
            .map(|n| a.view((n * b, 0), (b, b)).into_owned())
            .collect();
        Ok(TranslationInvariantOp { model, kernel })
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let b = self.model.base_dim;
        let nodes = self.model.nodes();
        let mut out = vec![Complex64::new(0.0, 0.0); nodes * b];
        for n in 0..nodes {
            for m in 0..nodes {
                let k = &self.kernel[self.model.difference(n, m)];
                for i in 0..b {
                    for j in 0..b {
                        out[n * b + i] += k[(i, j)] * f[m * b + j];
                    }
                }
            }
        }
        out
    }
}

/// Unit shift along `axis`: `(Sf)(n) = f(n − e_axis)`.
pub fn shift_matrix(model: &LatticeModel, axis: usize) -> CMatrix {
    let b = model.base_dim;
    let nodes = model.nodes();
    let mut s = CMatrix::zeros(nodes * b, nodes * b);
    for n in 0..nodes {
        let mut idx = model.multi_index(n);
        idx[axis] = (idx[axis] + model.n - 1) % model.n;
        let m = model.flat_index(&idx);
        for i in 0..b {
            s[(n * b + i, m * b + i)] = Complex64::new(1.0, 0.0);
        }
    }
    s
}

/// Weights `(ρ_1⋯ρ_k)^{-1} · cell volume` on a product grid whose first `k` axes are defining functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureWeights {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Per-axis cell widths: half the distance between neighbours, doubled at the ends.
fn voronoi_widths(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let lo = if i == 0 {
                axis[1] - axis[0]
            } else {
                axis[i] - axis[i - 1]
            };
            let hi = if i + 1 == n {
                axis[n - 1] - axis[n - 2]
            } else {
                axis[i + 1] - axis[i]
            };
            0.5 * (lo.abs() + hi.abs())
        })
        .collect()
}

/// Corner measure on the chart model `R̄₊^k × R^{n−k}` sampled on a product grid.
/// With `cell = Some(v)` every node gets cell volume `v`; otherwise per-axis
/// Voronoi widths are multiplied.
pub fn corner_measure(k: usize, axes: &[Vec<f64>], cell: Option<f64>) -> Result<MeasureWeights> {
    if k > axes.len() {
        return Err(CornerError::Shape(format!(
            "{k} defining functions on {} axes",
            axes.len()
        )));
    }
    for axis in &axes[..k] {
        if let Some((index, &value)) = axis.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(CornerError::NonPositive { index, value });
        }
    }
    let widths: Vec<Vec<f64>> = axes.iter().map(|a| voronoi_widths(a)).collect();
    let mut nodes = vec![Vec::new()];
    let mut vols = vec![1.0];
    for (axis, w) in axes.iter().zip(&widths) {
        let mut nn = Vec::with_capacity(nodes.len() * axis.len());
        let mut nv = Vec::with_capacity(nodes.len() * axis.len());
        for (p, v) in nodes.iter().zip(&vols) {
            for (x, wx) in axis.iter().zip(w) {
                let mut q = p.clone();
                q.push(*x);
                nn.push(q);
                nv.push(v * wx);
            }
        }
        nodes = nn;
        vols = nv;
    }
    let weights = nodes
        .iter()
        .zip(&vols)
        .map(|(p, v)| cell.unwrap_or(*v) / p[..k].iter().product::<f64>())
        .collect();
    Ok(MeasureWeights { nodes, weights })
}

/// `μ = Σ_j e_j μ_j`: blends chart measures on a common node set by partition weights.
pub fn blend_measures(
    measures: &[MeasureWeights],
    partition: &[Vec<f64>],
) -> Result<MeasureWeights> {
    let first = measures.first().ok_or(CornerError::EmptySet)?;
    if partition.len() != measures.len() {
        return Err(CornerError::LengthMismatch {
            left: partition.len(),
            right: measures.len(),
        });
    }
    let n = first.weights.len();
    let mut weights = vec![0.0; n];
    for (m, e) in measures.iter().zip(partition) {
        if m.weights.len() != n || e.len() != n {
            return Err(CornerError::Shape("measures on different node sets".into()));
        }
        for i in 0..n {
            weights[i] += e[i] * m.weights[i];
        }
    }
    Ok(MeasureWeights {
        nodes: first.nodes.clone(),
        weights,
    })
}

/// A group element acting by `[T_g f](p) = S_g f(σ_g^{-1} p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub sigma: Perm,
    pub s: CMatrix,
}

/// A finite group acting on `R^d × C^b`, stored as its full element list (identity first).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAction {
    pub d: usize,
    pub base_dim: usize,
    pub elements: Vec<GroupElement>,
}

fn mat_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    (a - b).iter().all(|z| z.norm() <= tol)
}

impl GroupAction {
    pub fn trivial(d: usize, base_dim: usize) -> Self {
        GroupAction {
            d,
            base_dim,
            elements: vec![GroupElement {
                sigma: Perm::identity(d),
                s: CMatrix::identity(base_dim, base_dim),
            }],
        }
    }

    /// Closes the generators under composition (`(g h)` acts by `σ_g σ_h`, `S_g S_h`).
    pub fn generated(d: usize, base_dim: usize, generators: Vec<GroupElement>) -> Result<Self> {
        let mut elements = Self::trivial(d, base_dim).elements;
        for g in &generators {
            if g.sigma.degree() != d || g.s.nrows() != base_dim || g.s.ncols() != base_dim {
                return Err(CornerError::GroupAction(
                    "generator of the wrong size".into(),
                ));
            }
            let u = g.s.adjoint() * &g.s;
            if !mat_close(&u, &CMatrix::identity(base_dim, base_dim), 1e-10) {
                return Err(CornerError::GroupAction("S is not unitary".into()));
            }
        }
        let mut k = 0;
        while k < elements.len() {
            for g in &generators {
                let prod = GroupElement {
                    sigma: g.sigma.compose(&elements[k].sigma),
                    s: &g.s * &elements[k].s,
                };
                if !elements
                    .iter()
                    .any(|e| e.sigma == prod.sigma && mat_close(&e.s, &prod.s, 1e-10))
                {
                    if elements.len() > 10_000 {
                        return Err(CornerError::GroupAction("group is too large".into()));
                    }
                    elements.push(prod);
                }
            }
            k += 1;
        }
        Ok(GroupAction {
            d,
            base_dim,
            elements,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Checks closure and the homomorphism property of `g ↦ (σ_g, S_g)`.
    pub fn check_homomorphism(&self) -> Result<()> {
        for a in &self.elements {
            for b in &self.elements {
                let sigma = a.sigma.compose(&b.sigma);
                let s = &a.s * &b.s;
                if !self
                    .elements
                    .iter()
                    .any(|e| e.sigma == sigma && mat_close(&e.s, &s, 1e-10))
                {
                    return Err(CornerError::GroupAction(
                        "element list is not closed under products".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Index of a non-identity element with `σ_g = id`, if `σ` is not faithful.
    pub fn kernel_element(&self) -> Option<usize> {
        self.elements
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, e)| e.sigma.is_identity())
            .map(|(i, _)| i)
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel_element().is_none()
    }

    /// Dense `T_g` on the lattice model: lattice axes are permuted by `σ_g`.
    pub fn lattice_operator(&self, g: usize, model: &LatticeModel) -> CMatrix {
        let b = model.base_dim;
        let e = &self.elements[g];
        let mut t = CMatrix::zeros(model.dim(), model.dim());
        for p in 0..model.nodes() {
            let src = e.sigma.inverse().permute(&model.multi_index(p));
            let m = model.flat_index(&src);
            t.view_mut((p * b, m * b), (b, b)).copy_from(&e.s);
        }
        t
    }
}

/// `P = |G|^{-1} Σ_g T_g`, the orthogonal projector onto `G`-invariant functions.
pub fn invariant_projector(group: &GroupAction, model: &LatticeModel) -> Result<CMatrix> {
    if group.d != model.d || group.base_dim != model.base_dim {
        return Err(CornerError::Shape(
            "group action does not match the lattice model".into(),
        ));
    }
    let mut p = CMatrix::zeros(model.dim(), model.dim());
    for g in 0..group.order() {
        p += group.lattice_operator(g, model);
    }
    Ok(p / Complex64::new(group.order() as f64, 0.0))
}

/// Numerical rank: singular values above `tol`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    m.singular_values().iter().filter(|&&s| s > tol).count()
}

/// A symmetric frequency grid `p = (k + offset)·step`, `k ∈ [−n/2, n/2)` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub d: usize,
    pub n: usize,
    pub step: f64,
    pub half_offset: bool,
}

impl FrequencyGrid {
    pub fn points(&self) -> Vec<Vec<f64>> {
        let off = if self.half_offset { 0.5 } else { 0.0 };
        let axis: Vec<f64> = (0..self.n)
            .map(|k| (k as f64 - (self.n / 2) as f64 + off) * self.step)
            .collect();
        let mut pts = vec![Vec::new()];
        for _ in 0..self.d {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessVerdict {
    /// Every constructed invariant function is annihilated.
    pub annihilates_all: bool,
    pub max_norm: f64,
    /// First `(node, basis vector)` whose invariant function is not annihilated.
    pub witness: Option<(Vec<f64>, usize)>,
    /// `annihilates_all ⇒ max_norm ≤ tol`, the conclusion of the lemma.
    pub consistent: bool,
    pub nodes_checked: usize,
    pub nodes_skipped: usize,
    pub bypassed: bool,
}

impl UniquenessVerdict {
    pub fn is_zero(&self) -> bool {
        self.annihilates_all && self.consistent
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Tests whether multiplication by `A(p)` annihilating all `G`-invariant
/// functions forces `A ≡ 0`, using the locally supported invariant functions
/// `f = Σ_g T_g (δ_{p₀} ⊗ v)`. Refuses a non-faithful `σ` unless `bypass`.
pub fn uniqueness_test(
    a_of_p: &dyn Fn(&[f64]) -> CMatrix,
    group: &GroupAction,
    grid: &FrequencyGrid,
    tol: f64,
    bypass: bool,
) -> Result<UniquenessVerdict> {
    if let Some(k) = group.kernel_element() {
        if !bypass {
            return Err(CornerError::NotFaithful(k));
        }
    }
    let b = group.base_dim;
    let pts = grid.points();
    let mut annihilates_all = true;
    let mut witness = None;
    let mut max_norm = 0.0f64;
    let mut checked = 0;
    let mut skipped = 0;
    for p0 in &pts {
        max_norm = max_norm.max(spectral_norm(&a_of_p(p0)));
        let on_fixed_set = group
            .elements
            .iter()
            .any(|e| !e.sigma.is_identity() && same_point(&e.sigma.permute(p0), p0));
        if on_fixed_set {
            skipped += 1;
            continue;
        }
        checked += 1;
        // Orbit nodes with the accumulated values of f.
        let mut orbit: Vec<(Vec<f64>, CMatrix)> = Vec::new();
        for e in &group.elements {
            let p = e.sigma.permute(p0);
            match orbit.iter_mut().find(|(q, _)| same_point(q, &p)) {
                Some((_, acc)) => *acc += &e.s,
                None => orbit.push((p, e.s.clone())),
            }
        }
        for v in 0..b {
            let resid = orbit
                .iter()
                .map(|(p, acc)| {
                    let fv = acc.column(v).into_owned();
                    (a_of_p(p) * fv).norm()
                })
                .fold(0.0, f64::max);
            if resid > tol {
                annihilates_all = false;
                if witness.is_none() {
                    witness = Some((p0.clone(), v));
                }
            }
        }
    }
    let consistent = !annihilates_all || max_norm <= tol;
    Ok(UniquenessVerdict {
        annihilates_all,
        max_norm,
        witness,
        consistent,
        nodes_checked: checked,
        nodes_skipped: skipped,
        bypassed: bypass && !group.is_faithful(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub pass: bool,
    pub max_residual: f64,
    /// `(node, group element)` of the largest violation.
    pub witness: Option<(Vec<f64>, usize)>,
    /// `‖(I − P) A P‖` for the quantized operator, when a lattice model is supplied.
    pub invariant_leak: Option<f64>,
    /// The lemma direction: preserving invariants implies the relation.
    pub lemma_consistent: Option<bool>,
}

/// Checks `A(p) = S_g^{-1} A(σ_g p) S_g` on `points`. With a lattice model the
/// symbol is also quantized and tested for preserving the invariant subspace.
pub fn equivariance_check(
    a_of_p: &dyn Fn(&[f64]) -> CMatrix,
    group: &GroupAction,
    points: &[Vec<f64>],
    model: Option<&LatticeModel>,
    tol: f64,
) -> Result<EquivarianceReport> {
    let mut max_residual = 0.0f64;
    let mut witness = None;
    for p in points {
        let a = a_of_p(p);
        for (gi, e) in group.elements.iter().enumerate() {
            let s_inv = e.s.adjoint();
            let rhs = &s_inv * a_of_p(&e.sigma.permute(p)) * &e.s;
            let r = (&a - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if r > max_residual {
                max_residual = r;
                witness = Some((p.clone(), gi));
            }
        }
    }
    let pass = max_residual <= tol;
    let (invariant_leak, lemma_consistent) = match model {
        Some(m) => {
            let op = quantize(&MultiplierSymbol::from_fn(*m, a_of_p))?.to_dense();
            let proj = invariant_projector(group, m)?;
            let eye = CMatrix::identity(m.dim(), m.dim());
            let leak = ((&eye - &proj) * &op * &proj)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let preserves = leak <= tol;
            // On the DFT grid the relation is checked at the model's own frequencies.
            let freq: Vec<Vec<f64>> = (0..m.nodes()).map(|k| m.frequency(k)).collect();
            let on_grid = equivariance_check(a_of_p, group, &freq, None, tol)?;
            (Some(leak), Some(!preserves || on_grid.pass))
        }
        None => (None, None),
    };
    Ok(EquivarianceReport {
        pass,
        max_residual,
        witness: if pass { None } else { witness },
        invariant_leak,
        lemma_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_symbol_quantizes_to_identity() {
        let m = LatticeModel::new(1, 8, 2, 1.0).unwrap();
        let b = MultiplierSymbol::from_fn(m, |_| CMatrix::identity(2, 2));
        let op = quantize(&b).unwrap();
        let dense = op.to_dense();
        assert!(mat_close(&dense, &CMatrix::identity(16, 16), 1e-14));
    }

    #[test]
    fn lattice_model_rejects_odd_sizes() {
        assert!(LatticeModel::new(1, 9, 1, 1.0).is_err());
        assert!(LatticeModel::new(1, 6, 1, 1.0).is_err());
    }

    #[test]
    fn non_circulant_matrix_is_rejected() {
        let m = LatticeModel::new(1, 8, 1, 1.0).unwrap();
        let mut a = CMatrix::identity(8, 8);
        a[(0, 0)] = c(2.0);
        assert!(matches!(
            TranslationInvariantOp::from_dense(m, &a, 1e-12),
            Err(CornerError::NotShiftInvariant(_))
        ));
    }

    #[test]
    fn corner_measure_example() {
        let w = corner_measure(1, &[vec![0.5, 0.25, 0.125]], Some(1.0)).unwrap();
        assert_eq!(w.weights, vec![2.0, 4.0, 8.0]);
        let flat = corner_measure(0, &[vec![0.0, 0.5, 1.0]], Some(0.5)).unwrap();
        assert_eq!(flat.weights, vec![0.5; 3]);
        assert!(corner_measure(1, &[vec![0.0, 0.5]], None).is_err());
    }

    #[test]
    fn faithfulness_gate() {
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let g = GroupAction::generated(
            1,
            2,
            vec![GroupElement {
                sigma: Perm::identity(1),
                s: swap,
            }],
        )
        .unwrap();
        assert_eq!(g.order(), 2);
        assert!(!g.is_faithful());
        let grid = FrequencyGrid {
            d: 1,
            n: 8,
            step: 1.0,
            half_offset: true,
        };
        let r = uniqueness_test(&|_| CMatrix::zeros(2, 2), &g, &grid, 1e-12, false);
        assert_eq!(r, Err(CornerError::NotFaithful(1)));
    }

    #[test]
    fn sign_action_has_zero_projector() {
        let m = LatticeModel::new(1, 8, 1, 1.0).unwrap();
        let g = GroupAction::generated(
            1,
            1,
            vec![GroupElement {
                sigma: Perm::identity(1),
                s: CMatrix::from_element(1, 1, c(-1.0)),
            }],
        )
        .unwrap();
        let p = invariant_projector(&g, &m).unwrap();
        assert!(p.iter().all(|z| z.norm() < 1e-15));
    }
}
