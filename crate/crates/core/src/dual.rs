//! The dual stratified space `M^#`, cone fibrations in logarithmic
//! coordinates, and the ray-limit test for the function algebra `C(k,m)`.
//!
//! Each face `F` of positive codimension `d` contributes one stratum, the open
//! `(d−1)`-simplex modulo the structure group of `F`. Stratum `j^#` lies in the
//! closure of `r^#` exactly when `Γ_j ≻ Γ_r`, so the stratum order is the
//! opposite of the face order.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{CornerComplex, FaceId};
use crate::error::{CornerError, Result};
use crate::perm::PermGroup;
use crate::polytopes::{self, LatticeFace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualStratum {
    pub source_face: FaceId,
    pub dim: usize,
    pub quotient_group: PermGroup,
    /// Number of orbits of the quotient group on the simplex vertices.
    pub vertex_orbits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualComplex {
    /// Dimension of the interior `M°`, the open dense stratum.
    pub interior_dim: usize,
    pub strata: Vec<DualStratum>,
    /// Pairs `(a, b)` of stratum indices with stratum `a` in the closure of stratum `b`.
    pub adjacency: BTreeSet<(usize, usize)>,
}

impl DualComplex {
    pub fn strata_of_dim(&self, dim: usize) -> usize {
        self.strata.iter().filter(|s| s.dim == dim).count()
    }

    pub fn stratum_of(&self, face: FaceId) -> Option<usize> {
        self.strata.iter().position(|s| s.source_face == face)
    }

    pub fn poset(&self) -> Poset {
        Poset {
            dims: self.strata.iter().map(|s| s.dim as i64).collect(),
            less: self.adjacency.clone(),
        }
    }
}

/// The dual space: one stratum per boundary face, with reversed adjacency.
pub fn dualize(complex: &CornerComplex) -> DualComplex {
    let faces: Vec<_> = complex.boundary_faces().collect();
    let index_of = |id: FaceId| faces.iter().position(|f| f.id == id);
    let strata = faces
        .iter()
        .map(|f| DualStratum {
            source_face: f.id,
            dim: f.codim - 1,
            quotient_group: f.structure_group.clone(),
            vertex_orbits: f.structure_group.orbits().len(),
        })
        .collect();
    let adjacency = complex
        .adjacency
        .iter()
        .filter_map(|&(j, r)| Some((index_of(j)?, index_of(r)?)))
        .collect();
    DualComplex {
        interior_dim: complex.ambient_dim,
        strata,
        adjacency,
    }
}

/// A finite graded poset: `less` holds the strict relation as pairs `(a, b)` with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    pub dims: Vec<i64>,
    pub less: BTreeSet<(usize, usize)>,
}

impl Poset {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// The proper nonempty faces of a polytope, ordered by inclusion.
    pub fn boundary_of(faces: &[LatticeFace], dim: usize) -> (Poset, Vec<LatticeFace>) {
        let kept: Vec<LatticeFace> = faces
            .iter()
            .filter(|f| f.dim >= 0 && f.dim < dim as i64)
            .cloned()
            .collect();
        let mut less = BTreeSet::new();
        for (a, fa) in kept.iter().enumerate() {
            for (b, fb) in kept.iter().enumerate() {
                if fa.vertices.len() < fb.vertices.len()
                    && fa
                        .vertices
                        .iter()
                        .all(|v| fb.vertices.binary_search(v).is_ok())
                {
                    less.insert((a, b));
                }
            }
        }
        (
            Poset {
                dims: kept.iter().map(|f| f.dim).collect(),
                less,
            },
            kept,
        )
    }

    /// The opposite order, with dimensions mirrored so grading is preserved.
    pub fn opposite(&self, top: i64) -> Poset {
        Poset {
            dims: self.dims.iter().map(|d| top - d).collect(),
            less: self.less.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    fn related(&self, a: usize, b: usize) -> bool {
        self.less.contains(&(a, b))
    }
}

/// Finds an order isomorphism `φ: a → b` (as an index map) by backtracking,
/// placing elements in breadth-first order over the comparability graph.
pub fn find_isomorphism(a: &Poset, b: &Poset) -> Option<Vec<usize>> {
    if a.len() != b.len() || a.less.len() != b.less.len() {
        return None;
    }
    let mut sa = a.dims.clone();
    let mut sb = b.dims.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let n = a.len();
    let degree = |p: &Poset, x: usize| {
        let below = p.less.iter().filter(|&&(_, y)| y == x).count();
        let above = p.less.iter().filter(|&&(y, _)| y == x).count();
        (p.dims[x], below, above)
    };
    let sig_a: Vec<_> = (0..n).map(|x| degree(a, x)).collect();
    let sig_b: Vec<_> = (0..n).map(|x| degree(b, x)).collect();

    let mut neighbours = vec![Vec::new(); n];
    for &(x, y) in &a.less {
        neighbours[x].push(y);
        neighbours[y].push(x);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut k = order.len();
        order.push(start);
        while k < order.len() {
            let x = order[k];
            for &y in &neighbours[x] {
                if !seen[y] {
                    seen[y] = true;
                    order.push(y);
                }
            }
            k += 1;
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn search(
        depth: usize,
        order: &[usize],
        a: &Poset,
        b: &Poset,
        sig_a: &[(i64, usize, usize)],
        sig_b: &[(i64, usize, usize)],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let x = order[depth];
        for cand in 0..b.len() {
            if used[cand] || sig_a[x] != sig_b[cand] {
                continue;
            }
            let consistent = order[..depth].iter().all(|&y| {
                let my = map[y];
                a.related(x, y) == b.related(cand, my) && a.related(y, x) == b.related(my, cand)
            });
            if !consistent {
                continue;
            }
            map[x] = cand;
            used[cand] = true;
            if search(depth + 1, order, a, b, sig_a, sig_b, map, used) {
                return true;
            }
            used[cand] = false;
            map[x] = usize::MAX;
        }
        false
    }
    if search(0, &order, a, b, &sig_a, &sig_b, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Certificate that the stratum poset is anti-isomorphic to the boundary face poset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosetCertificate {
    pub holds: bool,
    /// `(stratum index, face of M)` pairs of the order-reversing bijection.
    pub bijection: Vec<(usize, FaceId)>,
    /// For polytopal complexes: the vertex set in the polar polytope matched to each stratum.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub polar_faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// Checks the anti-isomorphism between the strata of `dual` and the boundary
/// faces of `complex` through the canonical bijection `F ↦ F^#`. For polytopal
/// complexes the strata are additionally matched with the proper faces of the
/// polar polytope, whose lattice is enumerated independently.
pub fn check_poset(complex: &CornerComplex, dual: &DualComplex) -> PosetCertificate {
    let bijection: Vec<(usize, FaceId)> = dual
        .strata
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.source_face))
        .collect();
    let fail = |msg: String| PosetCertificate {
        holds: false,
        bijection: bijection.clone(),
        polar_faces: Vec::new(),
        counterexample: Some(msg),
    };
    let boundary: Vec<FaceId> = complex.boundary_faces().map(|f| f.id).collect();
    if boundary.len() != dual.strata.len() {
        return fail(format!(
            "{} strata for {} boundary faces",
            dual.strata.len(),
            boundary.len()
        ));
    }
    for (i, s) in dual.strata.iter().enumerate() {
        let Ok(face) = complex.face(s.source_face) else {
            return fail(format!("stratum {i} has no source face"));
        };
        if face.codim == 0 || s.dim + 1 != face.codim {
            return fail(format!(
                "stratum {i} has dim {} over a codim-{} face",
                s.dim, face.codim
            ));
        }
    }
    for (a, sa) in dual.strata.iter().enumerate() {
        for (b, sb) in dual.strata.iter().enumerate() {
            // a in the closure of b  ⇔  closure of face(a) contains face(b)
            let dual_rel = dual.adjacency.contains(&(a, b));
            let face_rel = complex
                .adjacency
                .contains(&(sa.source_face, sb.source_face));
            if dual_rel != face_rel {
                return fail(format!(
                    "strata ({a}, {b}): dual relation {dual_rel}, face relation of ({}, {}) {face_rel}",
                    sa.source_face.0, sb.source_face.0
                ));
            }
        }
    }

    let mut polar_faces = Vec::new();
    if complex.faces.iter().all(|f| f.facets.is_some()) && complex.ambient_dim > 0 {
        let polytope = complex.to_polytope();
        let polar = polytopes::polar(&polytope);
        let lattice = polytopes::face_lattice(&polar);
        let (polar_poset, polar_list) = Poset::boundary_of(&lattice, polar.dim);
        // Facet indices of the complex may differ from the hyperface order used by to_polytope.
        let hyperfaces: Vec<&Vec<usize>> = complex
            .faces
            .iter()
            .filter(|f| f.codim == 1)
            .map(|f| f.facets.as_ref().unwrap())
            .collect();
        let mut matched = Vec::new();
        for s in &dual.strata {
            let facets = complex.faces[s.source_face.0].facets.as_ref().unwrap();
            let mut verts: Vec<usize> = facets
                .iter()
                .filter_map(|f| hyperfaces.iter().position(|h| h.as_slice() == [*f]))
                .collect();
            verts.sort_unstable();
            match polar_list.iter().position(|pf| pf.vertices == verts) {
                Some(k) if polar_list[k].dim == s.dim as i64 => matched.push(k),
                _ => {
                    return fail(format!(
                        "no polar face with vertex set {verts:?} of dim {}",
                        s.dim
                    ))
                }
            }
        }
        for a in 0..matched.len() {
            for b in 0..matched.len() {
                if dual.adjacency.contains(&(a, b))
                    != polar_poset.less.contains(&(matched[a], matched[b]))
                {
                    return fail(format!(
                        "strata ({a}, {b}) disagree with the polar face order"
                    ));
                }
            }
        }
        if matched.len() != polar_list.len() {
            return fail(format!(
                "{} strata but {} proper polar faces",
                matched.len(),
                polar_list.len()
            ));
        }
        polar_faces = matched
            .iter()
            .map(|&k| polar_list[k].vertices.clone())
            .collect();
    }
    PosetCertificate {
        holds: true,
        bijection,
        polar_faces,
        counterexample: None,
    }
}

/// `U^# ≅ F^# × K_{F̄^#}` for a face with trivial normal bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFibration {
    pub base: DualStratum,
    pub cone_base: DualComplex,
    pub product_form: bool,
}

pub fn cone_neighborhood(complex: &CornerComplex, j: FaceId) -> Result<ConeFibration> {
    let face = complex.face(j)?;
    if face.codim == 0 {
        return Err(CornerError::NotBoundaryFace(j.0));
    }
    if !face.structure_group.is_trivial() {
        return Err(CornerError::NontrivialNormalBundle(j.0));
    }
    let closed = complex.closed_face(j)?;
    Ok(ConeFibration {
        base: DualStratum {
            source_face: j,
            dim: face.codim - 1,
            quotient_group: face.structure_group.clone(),
            vertex_orbits: face.structure_group.orbits().len(),
        },
        cone_base: dualize(&closed.complex),
        product_form: true,
    })
}

/// A point of the logarithmic normal quadrant: `y = −ln ρ_F`, `x` log-coordinates
/// near a face of `F`, and remaining base coordinates `omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPoint {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Cone coordinates: `theta` in the open simplex, radial `r ∈ (0,1)`, base `(x, omega)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub theta: Vec<f64>,
    pub r: f64,
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// True when `min y > |x| + 1`.
pub fn in_region_u(p: &LogPoint) -> bool {
    !p.y.is_empty() && p.x.iter().all(|&v| v >= 0.0) && min_of(&p.y) > l1(&p.x) + 1.0
}

pub fn fibration_forward(p: &LogPoint) -> Result<ConePoint> {
    if !in_region_u(p) {
        return Err(CornerError::Domain(format!(
            "min y = {} must exceed |x| + 1 = {}",
            min_of(&p.y),
            l1(&p.x) + 1.0
        )));
    }
    let norm = l1(&p.y);
    Ok(ConePoint {
        theta: p.y.iter().map(|v| v / norm).collect(),
        r: (l1(&p.x) + 1.0) / min_of(&p.y),
        x: p.x.clone(),
        omega: p.omega.clone(),
    })
}

pub fn fibration_inverse(c: &ConePoint) -> Result<LogPoint> {
    if !(c.r > 0.0 && c.r < 1.0) {
        return Err(CornerError::Domain(format!(
            "r = {} must lie in (0, 1)",
            c.r
        )));
    }
    if c.theta.is_empty() || c.theta.iter().any(|&t| t <= 0.0) || (l1(&c.theta) - 1.0).abs() > 1e-12
    {
        return Err(CornerError::Domain(
            "theta must lie in the open simplex".into(),
        ));
    }
    if c.x.iter().any(|&v| v < 0.0) {
        return Err(CornerError::Domain("x must be nonnegative".into()));
    }
    let tmin = min_of(&c.theta);
    let scale = (l1(&c.x) + 1.0) / c.r;
    Ok(LogPoint {
        y: c.theta.iter().map(|t| t / tmin * scale).collect(),
        x: c.x.clone(),
        omega: c.omega.clone(),
    })
}

/// Linear inequality `Σ coeffs·(y, x) + constant > 0` over nonnegative variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictInequality {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub constant: f64,
}

impl StrictInequality {
    fn add(&self, other: &Self) -> Self {
        StrictInequality {
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            constant: self.constant + other.constant,
        }
    }

    /// Unsatisfiable over nonnegative variables: no positive coefficient and constant ≤ 0.
    fn is_contradiction(&self) -> bool {
        self.y.iter().chain(&self.x).all(|&c| c <= 0.0) && self.constant <= 0.0
    }

    fn eval(&self, y: &[f64], x: &[f64]) -> f64 {
        self.constant
            + self.y.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
            + self.x.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// `min y > |x| + 1` as one inequality per `y_i`.
fn original_system(k: usize, l: usize) -> Vec<StrictInequality> {
    (0..k)
        .map(|i| {
            let mut y = vec![0.0; k];
            y[i] = 1.0;
            StrictInequality {
                y,
                x: vec![-1.0; l],
                constant: -1.0,
            }
        })
        .collect()
}

/// `min(x_I, y_Ī) > |y_I| + |x_Ī| + 1` with `I` pairing `y_i ↔ x_i`.
fn swapped_system(k: usize, l: usize, set: &[usize]) -> Vec<StrictInequality> {
    let in_i = |i: usize| set.contains(&i);
    let rhs_y: Vec<f64> = (0..k).map(|i| if in_i(i) { -1.0 } else { 0.0 }).collect();
    let rhs_x: Vec<f64> = (0..l).map(|i| if in_i(i) { 0.0 } else { -1.0 }).collect();
    let mut out = Vec::new();
    for &i in set {
        let mut x = rhs_x.clone();
        x[i] += 1.0;
        out.push(StrictInequality {
            y: rhs_y.clone(),
            x,
            constant: -1.0,
        });
    }
    for i in (0..k).filter(|&i| !in_i(i)) {
        let mut y = rhs_y.clone();
        y[i] += 1.0;
        out.push(StrictInequality {
            y,
            x: rhs_x.clone(),
            constant: -1.0,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemCheck {
    pub index_set: Vec<usize>,
    /// Indices `(a, b)` of the inequalities whose sum has no positive coefficient and a negative constant.
    pub certificate: Option<(usize, usize)>,
    pub summed: Option<StrictInequality>,
    pub sampled: usize,
    pub joint_solutions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub face: FaceId,
    pub self_adjacent: bool,
    pub fiber_dim: usize,
    pub base_dim: usize,
    pub systems: Vec<SystemCheck>,
    pub pass: bool,
}

/// Checks that the region `U` meets each self-intersection branch of the
/// closed face of `j` in the empty set: the original and index-swapped
/// inequality systems admit no common solution.
pub fn check_u_injectivity(
    complex: &CornerComplex,
    j: FaceId,
    samples: usize,
    seed: u64,
) -> Result<InjectivityReport> {
    let face = complex.face(j)?;
    if face.codim == 0 {
        return Err(CornerError::NotBoundaryFace(j.0));
    }
    let closed = complex.closed_face(j)?;
    let self_target = closed
        .immersion
        .iter()
        .skip(1)
        .copied()
        .find(|&t| closed.sheets_over(t) >= 2);
    let Some(target) = self_target else {
        return Ok(InjectivityReport {
            face: j,
            self_adjacent: false,
            fiber_dim: face.codim,
            base_dim: 0,
            systems: Vec::new(),
            pass: true,
        });
    };
    let k = face.codim;
    let l = complex.face(target)?.codim - face.codim;
    let sys1 = original_system(k, l);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut systems = Vec::new();
    let m = k.min(l);
    for mask in 1u64..(1u64 << m) {
        let set: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let sys2 = swapped_system(k, l, &set);
        let mut certificate = None;
        let mut summed = None;
        'outer: for (a, ia) in sys1.iter().enumerate() {
            for (b, ib) in sys2.iter().enumerate() {
                let s = ia.add(ib);
                if s.is_contradiction() {
                    certificate = Some((a, b));
                    summed = Some(s);
                    break 'outer;
                }
            }
        }
        let mut joint = 0;
        for _ in 0..samples {
            let x: Vec<f64> = (0..l).map(|_| rng.gen_range(0.0..10.0)).collect();
            let floor = l1(&x) + 1.0;
            let y: Vec<f64> = (0..k).map(|_| floor + rng.gen_range(1e-9..10.0)).collect();
            debug_assert!(sys1.iter().all(|q| q.eval(&y, &x) > 0.0));
            if sys2.iter().all(|q| q.eval(&y, &x) > 0.0) {
                joint += 1;
            }
        }
        systems.push(SystemCheck {
            index_set: set,
            certificate,
            summed,
            sampled: samples,
            joint_solutions: joint,
        });
    }
    let pass = systems
        .iter()
        .all(|s| s.certificate.is_some() && s.joint_solutions == 0);
    Ok(InjectivityReport {
        face: j,
        self_adjacent: true,
        fiber_dim: k,
        base_dim: l,
        systems,
        pass,
    })
}

/// Parameters of the ray-limit test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySchedule {
    pub radii: Vec<f64>,
    pub tol: f64,
}

impl Default for RaySchedule {
    fn default() -> Self {
        RaySchedule {
            radii: (3..=16).map(|i| 2f64.powi(i)).collect(),
            tol: 1e-6,
        }
    }
}

/// Unit rays in `R^k` on a product angle grid (`per_angle` points per angle).
pub fn default_rays(k: usize, per_angle: usize) -> Vec<Vec<f64>> {
    match k {
        0 => vec![Vec::new()],
        1 => vec![vec![1.0], vec![-1.0]],
        _ => {
            let mut rays = vec![vec![1.0]];
            for level in 1..k {
                let full = level == 1;
                let steps = if full { per_angle } else { per_angle / 2 + 1 };
                let mut next = Vec::new();
                for r in &rays {
                    for s in 0..steps {
                        let a = if full {
                            2.0 * std::f64::consts::PI * s as f64 / steps as f64
                        } else {
                            std::f64::consts::PI * (s as f64 + 0.5) / steps as f64
                                - std::f64::consts::FRAC_PI_2
                        };
                        let mut v: Vec<f64> = r.iter().map(|c| c * a.cos()).collect();
                        v.push(a.sin());
                        next.push(v);
                    }
                }
                rays = next;
            }
            rays
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkmReport {
    pub accepted: bool,
    /// Largest tail oscillation of the accelerated ray sequences.
    pub modulus: f64,
    pub worst_ray: usize,
    pub rays: Vec<Vec<f64>>,
    /// Empirical boundary function `F(ω)` per ray (taken at the first x sample).
    pub boundary: Vec<f64>,
}

/// Aitken Δ² acceleration of a sequence, falling back to the raw term where
/// the second difference vanishes.
fn aitken(seq: &[f64]) -> Vec<f64> {
    (2..seq.len())
        .map(|i| {
            let d1 = seq[i - 1] - seq[i - 2];
            let d2 = seq[i] - seq[i - 1];
            let dd = d2 - d1;
            if dd.abs() <= 1e-300 || d2.abs() < 1e-15 {
                seq[i]
            } else {
                seq[i] - d2 * d2 / dd
            }
        })
        .collect()
}

/// Decides whether `f(ωR, x)` converges as `R → ∞` uniformly in `(ω, x)`.
///
/// For every ray and every `x` sample the values along the radius schedule are
/// accelerated and the oscillation over the last three accelerated terms must
/// stay below `tol`.
pub fn ckm_membership<F>(
    f: F,
    rays: &[Vec<f64>],
    x_samples: &[Vec<f64>],
    schedule: &RaySchedule,
) -> CkmReport
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let empty = [Vec::new()];
    let xs: &[Vec<f64>] = if x_samples.is_empty() {
        &empty
    } else {
        x_samples
    };
    let mut modulus = 0.0f64;
    let mut worst_ray = 0;
    let mut boundary = Vec::with_capacity(rays.len());
    for (ri, w) in rays.iter().enumerate() {
        let mut first_limit = None;
        for x in xs {
            let seq: Vec<f64> = schedule
                .radii
                .iter()
                .map(|&r| {
                    let t: Vec<f64> = w.iter().map(|c| c * r).collect();
                    f(&t, x)
                })
                .collect();
            let acc = aitken(&seq);
            let tail = &acc[acc.len().saturating_sub(3)..];
            let last = *tail.last().unwrap_or(&f64::NAN);
            let osc = tail.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
            let osc = if osc.is_finite() && last.is_finite() {
                osc
            } else {
                f64::INFINITY
            };
            if osc > modulus {
                modulus = osc;
                worst_ray = ri;
            }
            first_limit.get_or_insert(last);
        }
        boundary.push(first_limit.unwrap_or(f64::NAN));
    }
    CkmReport {
        accepted: modulus <= schedule.tol,
        modulus,
        worst_ray,
        rays: rays.to_vec(),
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytopes;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn forward_examples() {
        let c = fibration_forward(&LogPoint {
            y: vec![4.0, 6.0],
            x: vec![1.0],
            omega: vec![],
        })
        .unwrap();
        assert!(close(&c.theta, &[0.4, 0.6]));
        assert!((c.r - 0.5).abs() < 1e-15);
        let c = fibration_forward(&LogPoint {
            y: vec![2.0],
            x: vec![],
            omega: vec![],
        })
        .unwrap();
        assert!(close(&c.theta, &[1.0]) && (c.r - 0.5).abs() < 1e-15);
        let t = 1e6;
        let c = fibration_forward(&LogPoint {
            y: vec![t, t],
            x: vec![],
            omega: vec![],
        })
        .unwrap();
        assert!(close(&c.theta, &[0.5, 0.5]) && (c.r - 1.0 / t).abs() < 1e-18);
    }

    #[test]
    fn inverse_examples() {
        let p = fibration_inverse(&ConePoint {
            theta: vec![0.4, 0.6],
            r: 0.5,
            x: vec![1.0],
            omega: vec![],
        })
        .unwrap();
        assert!(close(&p.y, &[4.0, 6.0]));
        let p = fibration_inverse(&ConePoint {
            theta: vec![1.0],
            r: 0.5,
            x: vec![],
            omega: vec![],
        })
        .unwrap();
        assert!(close(&p.y, &[2.0]));
    }

    #[test]
    fn domain_errors() {
        let outside = LogPoint {
            y: vec![1.5],
            x: vec![1.0],
            omega: vec![],
        };
        assert!(matches!(
            fibration_forward(&outside),
            Err(CornerError::Domain(_))
        ));
        let bad_r = ConePoint {
            theta: vec![1.0],
            r: 1.0,
            x: vec![],
            omega: vec![],
        };
        assert!(matches!(
            fibration_inverse(&bad_r),
            Err(CornerError::Domain(_))
        ));
    }

    #[test]
    fn boundary_manifold_dualizes_to_points() {
        let d = dualize(&CornerComplex::with_boundary(3, 4));
        assert_eq!(d.strata.len(), 4);
        assert!(d
            .strata
            .iter()
            .all(|s| s.dim == 0 && s.quotient_group.is_trivial()));
    }

    #[test]
    fn square_vertex_cone_is_over_empty_set() {
        let sq = CornerComplex::from_polytope(&polytopes::square()).unwrap();
        let v = sq.faces.iter().find(|f| f.codim == 2).unwrap().id;
        let cone = cone_neighborhood(&sq, v).unwrap();
        assert!(cone.cone_base.strata.is_empty());
        assert_eq!(cone.base.dim, 1);
    }

    #[test]
    fn nontrivial_group_refuses_fibration() {
        let mut cube = CornerComplex::from_polytope(&polytopes::cube()).unwrap();
        let e = cube.faces.iter().position(|f| f.codim == 2).unwrap();
        cube.faces[e].structure_group =
            PermGroup::generated(2, vec![crate::perm::Perm::swap(2, 0, 1)]).unwrap();
        assert_eq!(
            cone_neighborhood(&cube, FaceId(e)),
            Err(CornerError::NontrivialNormalBundle(e))
        );
    }

    #[test]
    fn one_gon_edge_is_injective_on_u() {
        let r = check_u_injectivity(&CornerComplex::one_gon(), FaceId(1), 1000, 0).unwrap();
        assert!(r.self_adjacent && r.pass);
        let s = &r.systems[0];
        // y > x + 1 plus x > y + 1 sums to 0 > 2
        assert_eq!(s.summed.as_ref().unwrap().constant, -2.0);
    }

    #[test]
    fn square_edge_is_vacuously_injective() {
        let sq = CornerComplex::from_polytope(&polytopes::square()).unwrap();
        let r = check_u_injectivity(&sq, FaceId(1), 10, 0).unwrap();
        assert!(!r.self_adjacent && r.pass);
    }

    #[test]
    fn ckm_constant_and_oscillating() {
        let rays = default_rays(2, 32);
        let s = RaySchedule::default();
        let c = ckm_membership(|_, _| 3.0, &rays, &[], &s);
        assert!(c.accepted && c.boundary.iter().all(|&v| v == 3.0));
        let osc = ckm_membership(|t, _| t[0].sin(), &rays, &[], &s);
        assert!(!osc.accepted);
    }

    #[test]
    fn ckm_ray_limit_is_first_coordinate() {
        let rays = default_rays(2, 32);
        let norm = |t: &[f64]| t.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = ckm_membership(
            |t, _| t[0] / (norm(t) + 1.0),
            &rays,
            &[],
            &RaySchedule::default(),
        );
        assert!(r.accepted, "modulus {}", r.modulus);
        for (w, f) in r.rays.iter().zip(&r.boundary) {
            assert!((f - w[0]).abs() < 1e-6);
        }
    }
}
