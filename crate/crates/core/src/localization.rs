//! Localization of parameter-dependent operator families on a discretized
//! metric measure space: restricted norms, ideal-membership profiles,
//! commutator locality, continuity of local-representative families, gluing,
//! and the localization-based Fredholm check.
//!
//! A function on the space has `fiber` complex components per node, stored
//! node-major. Norms are taken in the weighted space `L²(μ)`, so a matrix `A`
//! acting on coefficient vectors has operator norm `‖W^{1/2} A W^{-1/2}‖`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CornerError, Result};
use crate::operators::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpace {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(default = "one")]
    pub fiber: usize,
}

fn one() -> usize {
    1
}

impl GridSpace {
    pub fn new(nodes: Vec<Vec<f64>>, weights: Vec<f64>, fiber: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(CornerError::EmptySet);
        }
        if nodes.len() != weights.len() {
            return Err(CornerError::LengthMismatch {
                left: nodes.len(),
                right: weights.len(),
            });
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return Err(CornerError::NonPositive { index, value });
        }
        Ok(GridSpace {
            nodes,
            weights,
            fiber,
        })
    }

    /// Uniform grid on `[a, b]` with `n` midpoint nodes.
    pub fn interval(a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let nodes = (0..n).map(|i| vec![a + (i as f64 + 0.5) * h]).collect();
        GridSpace {
            nodes,
            weights: vec![h; n],
            fiber: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.len() * self.fiber
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.nodes[a]
            .iter()
            .zip(&self.nodes[b])
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Closed ball of radius `r` around node `x`.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(x, y) <= r).collect()
    }

    fn sqrt_weights(&self) -> Vec<f64> {
        self.weights
            .iter()
            .flat_map(|w| std::iter::repeat(w.sqrt()).take(self.fiber))
            .collect()
    }

    /// `W^{1/2} A W^{-1/2}`.
    pub fn weighted(&self, a: &CMatrix) -> CMatrix {
        let s = self.sqrt_weights();
        CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (s[i] / s[j]))
    }

    fn columns(&self, set: &[usize]) -> Vec<usize> {
        set.iter()
            .flat_map(|&x| (0..self.fiber).map(move |c| x * self.fiber + c))
            .collect()
    }

    /// Diagonal multiplication by a real node function.
    pub fn multiplication(&self, f: &[f64]) -> CMatrix {
        let diag: Vec<Complex64> = f
            .iter()
            .flat_map(|&v| std::iter::repeat(Complex64::new(v, 0.0)).take(self.fiber))
            .collect();
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
    }
}

/// An operator family sampled on a finite parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamFamily {
    pub q_nodes: Vec<Vec<f64>>,
    pub mats: Vec<CMatrix>,
}

impl ParamFamily {
    pub fn constant(q_nodes: Vec<Vec<f64>>, a: CMatrix) -> Self {
        let mats = vec![a; q_nodes.len()];
        ParamFamily { q_nodes, mats }
    }

    pub fn from_fn(q_nodes: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> CMatrix) -> Self {
        let mats = q_nodes.iter().map(|q| f(q)).collect();
        ParamFamily { q_nodes, mats }
    }

    pub fn sub(&self, other: &ParamFamily) -> Result<ParamFamily> {
        if self.mats.len() != other.mats.len() {
            return Err(CornerError::LengthMismatch {
                left: self.mats.len(),
                right: other.mats.len(),
            });
        }
        Ok(ParamFamily {
            q_nodes: self.q_nodes.clone(),
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn q_norm(q: &[f64]) -> f64 {
        q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Indices of the outermost parameter shell (`|q| ≥ 0.99 max |q|`).
    pub fn annulus(&self) -> Vec<usize> {
        let rmax = self
            .q_nodes
            .iter()
            .map(|q| Self::q_norm(q))
            .fold(0.0, f64::max);
        (0..self.q_nodes.len())
            .filter(|&i| Self::q_norm(&self.q_nodes[i]) >= 0.99 * rmax)
            .collect()
    }
}

/// Parameter grid: all points of `[-R, R]^s` on `n` nodes per axis plus a
/// ring of `ring` points at radius `annulus` (for `s ≤ 2`).
pub fn parameter_grid(s: usize, radius: f64, n: usize, annulus: f64, ring: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                0.0
            } else {
                -radius + 2.0 * radius * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let mut pts = vec![Vec::new()];
    for _ in 0..s {
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
    match s {
        1 => {
            pts.push(vec![annulus]);
            pts.push(vec![-annulus]);
        }
        2 => {
            for k in 0..ring {
                let a = 2.0 * std::f64::consts::PI * k as f64 / ring as f64;
                pts.push(vec![annulus * a.cos(), annulus * a.sin()]);
            }
        }
        _ => {}
    }
    pts
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn restrict_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    m.select_columns(cols.iter())
}

/// `‖A‖_U = max_q ‖A(q)|_{H_U}‖` in the weighted norm.
pub fn restricted_norm(a: &ParamFamily, space: &GridSpace, u: &[usize]) -> Result<f64> {
    if u.is_empty() {
        return Err(CornerError::EmptySet);
    }
    let cols = space.columns(u);
    Ok(a.mats
        .iter()
        .map(|m| singular_values(&restrict_columns(&space.weighted(m), &cols))[0])
        .fold(0.0, f64::max))
}

/// `Σ_k σ_k ‖v_k|_U‖`, an upper bound for `‖A‖_U` from the SVD `A = Σ σ_k u_k v_k^*`.
pub fn tail_norm_bound(a: &ParamFamily, space: &GridSpace, u: &[usize]) -> f64 {
    let cols = space.columns(u);
    a.mats
        .iter()
        .map(|m| {
            let svd = space.weighted(m).svd(false, true);
            let vt = svd.v_t.expect("requested right singular vectors");
            svd.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    s * cols
                        .iter()
                        .map(|&c| vt[(k, c)].norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `r_i = r_0 · 2^{-i}`, `i = 0..=k`.
pub fn dyadic_radii(r0: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| r0 * 0.5f64.powi(i as i32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealProfile {
    pub node: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub tail_bounds: Vec<f64>,
    pub in_ideal: bool,
}

/// Restricted norms over shrinking balls around `x`; the family lies in
/// `J_x` when the last value is below `tol`.
pub fn ideal_membership_profile(
    a: &ParamFamily,
    space: &GridSpace,
    x: usize,
    radii: &[f64],
    tol: f64,
) -> Result<IdealProfile> {
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CornerError::Domain(
            "radii must be strictly decreasing".into(),
        ));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut tail_bounds = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = space.ball(x, r);
        values.push(restricted_norm(a, space, &ball)?);
        tail_bounds.push(tail_norm_bound(a, space, &ball));
    }
    let in_ideal = values.last().is_some_and(|&v| v <= tol);
    Ok(IdealProfile {
        node: x,
        radii: radii.to_vec(),
        values,
        tail_bounds,
        in_ideal,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorEntry {
    pub annulus_norm: f64,
    /// Largest singular value past the rank budget, over all parameters.
    pub tail_singular_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub pass: bool,
    pub rank_budget: usize,
    pub entries: Vec<CommutatorEntry>,
}

/// `[A(q), φ]` must be small on the outer parameter shell and numerically of
/// low rank (singular values past `rank_budget` below `tol`).
pub fn commutator_locality_check(
    a: &ParamFamily,
    space: &GridSpace,
    test_functions: &[Vec<f64>],
    tol: f64,
    rank_budget: Option<usize>,
) -> CommutatorReport {
    let budget = rank_budget.unwrap_or(space.dim() / 4);
    let annulus = a.annulus();
    let entries: Vec<CommutatorEntry> = test_functions
        .iter()
        .map(|phi| {
            let m = space.multiplication(phi);
            let mut annulus_norm = 0.0f64;
            let mut tail = 0.0f64;
            for (i, am) in a.mats.iter().enumerate() {
                let c = space.weighted(&(am * &m - &m * am));
                let s = singular_values(&c);
                if annulus.contains(&i) {
                    annulus_norm = annulus_norm.max(s[0]);
                }
                tail = tail.max(s.get(budget).copied().unwrap_or(0.0));
            }
            CommutatorEntry {
                annulus_norm,
                tail_singular_value: tail,
            }
        })
        .collect();
    let pass = entries
        .iter()
        .all(|e| e.annulus_norm <= tol && e.tail_singular_value <= tol);
    CommutatorReport {
        pass,
        rank_budget: budget,
        entries,
    }
}

/// Local representatives `A_x` at nodes `centers[i]` with neighbourhoods `hoods[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRepFamily {
    pub centers: Vec<usize>,
    pub reps: Vec<ParamFamily>,
    pub hoods: Vec<Vec<usize>>,
}

impl LocalRepFamily {
    pub fn new(
        centers: Vec<usize>,
        reps: Vec<ParamFamily>,
        hoods: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if centers.len() != reps.len() || centers.len() != hoods.len() {
            return Err(CornerError::LengthMismatch {
                left: centers.len(),
                right: reps.len().min(hoods.len()),
            });
        }
        for (x, h) in centers.iter().zip(&hoods) {
            if !h.contains(x) {
                return Err(CornerError::Domain(format!(
                    "neighbourhood of node {x} does not contain it"
                )));
            }
        }
        Ok(LocalRepFamily {
            centers,
            reps,
            hoods,
        })
    }

    /// Balls of the given radius around each center.
    pub fn with_balls(
        space: &GridSpace,
        centers: Vec<usize>,
        reps: Vec<ParamFamily>,
        radius: f64,
    ) -> Result<Self> {
        let hoods = centers.iter().map(|&x| space.ball(x, radius)).collect();
        Self::new(centers, reps, hoods)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub worst_value: f64,
    /// Centers `(x, y)` of the worst pair.
    pub worst_pair: Option<(usize, usize)>,
}

/// `‖A_x − A_y‖_{U(ε,x) ∩ U(ε,y)} ≤ ε` for every pair with overlapping neighbourhoods.
pub fn family_continuity(
    family: &LocalRepFamily,
    space: &GridSpace,
    eps: f64,
) -> Result<ContinuityReport> {
    let mut worst_value = 0.0f64;
    let mut worst_pair = None;
    let mut pairs = 0;
    for a in 0..family.centers.len() {
        for b in a + 1..family.centers.len() {
            let common: Vec<usize> = family.hoods[a]
                .iter()
                .copied()
                .filter(|v| family.hoods[b].contains(v))
                .collect();
            if common.is_empty() {
                continue;
            }
            pairs += 1;
            let v = restricted_norm(&family.reps[a].sub(&family.reps[b])?, space, &common)?;
            if v > worst_value {
                worst_value = v;
                worst_pair = Some((family.centers[a], family.centers[b]));
            }
        }
    }
    Ok(ContinuityReport {
        pass: worst_value <= eps,
        pairs_checked: pairs,
        worst_value,
        worst_pair,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlueResult {
    pub family: ParamFamily,
    /// Maximal number of partition functions nonzero at one node.
    pub overlap: usize,
    /// `‖A_x − A‖_{U(ε,x)}` per center.
    pub local_errors: Vec<f64>,
    /// `max_x ‖A_x − A‖_{U(ε,x)} ≤ C ε`.
    pub bound_holds: bool,
    /// The family was constant and returned unchanged.
    pub exact: bool,
}

/// `A(q) = Σ_x ψ_x A_x(q) ψ_x` for a partition with `Σ ψ_x² = 1`.
pub fn glue(
    family: &LocalRepFamily,
    space: &GridSpace,
    psi: &[Vec<f64>],
    eps: f64,
) -> Result<GlueResult> {
    if psi.len() != family.reps.len() {
        return Err(CornerError::LengthMismatch {
            left: psi.len(),
            right: family.reps.len(),
        });
    }
    let n = space.len();
    for node in 0..n {
        let s: f64 = psi.iter().map(|p| p[node] * p[node]).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(CornerError::Partition {
                deviation: (s - 1.0).abs(),
                location: format!("node {node}"),
            });
        }
    }
    for (i, p) in psi.iter().enumerate() {
        if let Some(node) = (0..n).find(|&v| p[v] != 0.0 && !family.hoods[i].contains(&v)) {
            return Err(CornerError::Partition {
                deviation: p[node].abs(),
                location: format!(
                    "ψ_{} is nonzero at node {node} outside its neighbourhood",
                    family.centers[i]
                ),
            });
        }
    }
    let overlap = (0..n)
        .map(|v| psi.iter().filter(|p| p[v] != 0.0).count())
        .max()
        .unwrap_or(0);
    let first = family.reps.first().ok_or(CornerError::EmptySet)?;
    let exact = family.reps.iter().all(|r| r == first);
    let glued = if exact {
        first.clone()
    } else {
        let mats = (0..first.mats.len())
            .map(|qi| {
                let mut acc = CMatrix::zeros(space.dim(), space.dim());
                for (rep, p) in family.reps.iter().zip(psi) {
                    let m = space.multiplication(p);
                    acc += &m * &rep.mats[qi] * &m;
                }
                acc
            })
            .collect();
        ParamFamily {
            q_nodes: first.q_nodes.clone(),
            mats,
        }
    };
    let local_errors = family
        .reps
        .iter()
        .zip(&family.hoods)
        .map(|(rep, hood)| restricted_norm(&rep.sub(&glued)?, space, hood))
        .collect::<Result<Vec<f64>>>()?;
    let bound_holds = local_errors.iter().all(|&e| e <= overlap as f64 * eps);
    Ok(GlueResult {
        family: glued,
        overlap,
        local_errors,
        bound_holds,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredholmReport {
    pub fredholm: bool,
    pub min_singular_value: f64,
    /// `(center, parameter)` where the smallest singular value occurs.
    pub witness: (usize, Vec<f64>),
    pub per_center_min: Vec<f64>,
    /// `max_q ‖A A⁺ − I‖_F / √dim` with singular values below `truncation` deleted.
    pub finite_section_residual: f64,
    pub deleted: usize,
}

/// Fredholm with parameter iff every local representative is uniformly invertible.
pub fn fredholm_check(
    a: &ParamFamily,
    family: &LocalRepFamily,
    space: &GridSpace,
    tol: f64,
    truncation: f64,
) -> Result<FredholmReport> {
    let mut min_sv = f64::INFINITY;
    let mut witness = (family.centers.first().copied().unwrap_or(0), Vec::new());
    let mut per_center_min = Vec::with_capacity(family.reps.len());
    for (x, rep) in family.centers.iter().zip(&family.reps) {
        let mut local = f64::INFINITY;
        for (q, m) in rep.q_nodes.iter().zip(&rep.mats) {
            let s = singular_values(&space.weighted(m))
                .last()
                .copied()
                .unwrap_or(0.0);
            if s < local {
                local = s;
            }
            if s < min_sv {
                min_sv = s;
                witness = (*x, q.clone());
            }
        }
        per_center_min.push(local);
    }
    let dim = space.dim() as f64;
    let mut residual = 0.0f64;
    let mut deleted = 0;
    for m in &a.mats {
        let w = space.weighted(m);
        let svd = w.clone().svd(true, true);
        let u = svd.u.as_ref().expect("left vectors");
        let vt = svd.v_t.as_ref().expect("right vectors");
        let mut pinv = CMatrix::zeros(w.ncols(), w.nrows());
        let mut del = 0;
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s < truncation {
                del += 1;
                continue;
            }
            let vk = vt.row(k).adjoint();
            let uk = u.column(k).adjoint();
            pinv += (vk * uk) * Complex64::new(1.0 / s, 0.0);
        }
        let r = (&w * &pinv - CMatrix::identity(w.nrows(), w.nrows())).norm() / dim.sqrt();
        if r > residual {
            residual = r;
        }
        deleted = deleted.max(del);
    }
    Ok(FredholmReport {
        fredholm: min_sv >= tol,
        min_singular_value: min_sv,
        witness,
        per_center_min,
        finite_section_residual: residual,
        deleted,
    })
}

/// Real diagonal matrix helper.
pub fn real_diag(v: &[f64]) -> CMatrix {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        v.len(),
        v.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_grid() -> Vec<Vec<f64>> {
        parameter_grid(1, 4.0, 5, 32.0, 0)
    }

    #[test]
    fn identity_has_unit_restricted_norm() {
        let s = GridSpace::interval(0.0, 1.0, 10);
        let a = ParamFamily::constant(q_grid(), CMatrix::identity(10, 10));
        assert!((restricted_norm(&a, &s, &[2, 3]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(restricted_norm(&a, &s, &[]), Err(CornerError::EmptySet));
    }

    #[test]
    fn multiplication_norm_is_max_on_set() {
        let s = GridSpace::interval(0.0, 1.0, 10);
        let f: Vec<f64> = s.nodes.iter().map(|x| (3.0 * x[0]).sin()).collect();
        let a = ParamFamily::constant(q_grid(), s.multiplication(&f));
        let u = vec![1, 4, 7];
        let expected = u.iter().map(|&i| f[i].abs()).fold(0.0, f64::max);
        assert!((restricted_norm(&a, &s, &u).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn identity_profile_is_flat() {
        let s = GridSpace::interval(0.0, 1.0, 32);
        let a = ParamFamily::constant(q_grid(), CMatrix::identity(32, 32));
        let p = ideal_membership_profile(&a, &s, 5, &dyadic_radii(0.5, 8), 1e-3).unwrap();
        assert!(p.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert!(!p.in_ideal);
        assert!(ideal_membership_profile(&a, &s, 5, &[0.1, 0.2], 1e-3).is_err());
    }

    #[test]
    fn multiplication_commutes() {
        let s = GridSpace::interval(0.0, 1.0, 12);
        let f: Vec<f64> = s.nodes.iter().map(|x| x[0]).collect();
        let a = ParamFamily::constant(q_grid(), s.multiplication(&f));
        let r =
            commutator_locality_check(&a, &s, &[f.iter().map(|x| x * x).collect()], 1e-12, None);
        assert!(r.pass);
    }

    #[test]
    fn identity_is_fredholm() {
        let s = GridSpace::interval(0.0, 1.0, 8);
        let a = ParamFamily::constant(q_grid(), CMatrix::identity(8, 8));
        let fam =
            LocalRepFamily::with_balls(&s, vec![0, 4], vec![a.clone(), a.clone()], 0.3).unwrap();
        let r = fredholm_check(&a, &fam, &s, 1e-3, 1e-8).unwrap();
        assert!(r.fredholm && (r.min_singular_value - 1.0).abs() < 1e-13);
        assert!(r.finite_section_residual < 1e-13);
    }
}
