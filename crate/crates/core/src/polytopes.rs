//! A small catalog of convex polytopes and a general face-lattice enumerator.
//!
//! Polytopes are given combinatorially by the vertex lists of their facets.
//! Boxes use the facet numbering `2i = {x_i = 0}`, `2i + 1 = {x_i = 1}` and
//! vertex `v` has coordinates given by the bits of `v`.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::Polytope;

pub fn interval() -> Polytope {
    unit_box(1)
}

pub fn square() -> Polytope {
    unit_box(2)
}

pub fn cube() -> Polytope {
    unit_box(3)
}

/// The unit box `[0,1]^n`.
pub fn unit_box(n: usize) -> Polytope {
    let vertices = 1usize << n;
    let mut facets = Vec::with_capacity(2 * n);
    for i in 0..n {
        for bit in 0..2 {
            facets.push((0..vertices).filter(|v| (v >> i) & 1 == bit).collect());
        }
    }
    Polytope {
        dim: n,
        vertices,
        facets,
    }
}

/// The `n`-simplex; facet `i` is opposite vertex `i`.
pub fn simplex(n: usize) -> Polytope {
    let facets = (0..=n)
        .map(|i| (0..=n).filter(|&v| v != i).collect())
        .collect();
    Polytope {
        dim: n,
        vertices: n + 1,
        facets,
    }
}

pub fn tetrahedron() -> Polytope {
    simplex(3)
}

/// Vertex coordinates of the regular icosahedron `(0, ±1, ±φ)` and cyclic shifts.
pub fn icosahedron_vertices() -> Vec<[f64; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(12);
    for shift in 0..3 {
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let base = [0.0, s1, s2 * phi];
                let mut v = [0.0; 3];
                for k in 0..3 {
                    v[(k + shift) % 3] = base[k];
                }
                out.push(v);
            }
        }
    }
    out
}

/// The icosahedron (not simple: every vertex lies on five facets).
pub fn icosahedron() -> Polytope {
    let verts = icosahedron_vertices();
    let adjacent = |a: usize, b: usize| {
        let d2: f64 = (0..3).map(|k| (verts[a][k] - verts[b][k]).powi(2)).sum();
        (d2 - 4.0).abs() < 1e-9
    };
    let mut facets = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(a, c) {
                    facets.push(vec![a, b, c]);
                }
            }
        }
    }
    Polytope {
        dim: 3,
        vertices: 12,
        facets,
    }
}

/// The dodecahedron, as the polar of the icosahedron.
pub fn dodecahedron() -> Polytope {
    polar(&icosahedron())
}

/// Combinatorial polar: vertices and facets exchange roles.
pub fn polar(p: &Polytope) -> Polytope {
    Polytope {
        dim: p.dim,
        vertices: p.facets.len(),
        facets: p.vertex_facets(),
    }
}

/// One face of a polytope, identified by its vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeFace {
    pub vertices: Vec<usize>,
    /// Dimension; `-1` for the empty face.
    pub dim: i64,
}

/// All faces of a (not necessarily simple) polytope, including the empty
/// face and the polytope itself. Vertex sets of faces are exactly the
/// intersections of facet vertex sets.
pub fn face_lattice(p: &Polytope) -> Vec<LatticeFace> {
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    sets.insert((0..p.vertices).collect());
    let mut frontier: Vec<Vec<usize>> = Vec::new();
    for f in &p.facets {
        let mut f = f.clone();
        f.sort_unstable();
        f.dedup();
        if sets.insert(f.clone()) {
            frontier.push(f);
        }
    }
    let facets: Vec<Vec<usize>> = frontier.clone();
    while let Some(s) = frontier.pop() {
        for f in &facets {
            let meet: Vec<usize> = s
                .iter()
                .copied()
                .filter(|v| f.binary_search(v).is_ok())
                .collect();
            if sets.insert(meet.clone()) {
                frontier.push(meet);
            }
        }
    }
    sets.insert(Vec::new());

    let mut by_size: Vec<Vec<usize>> = sets.into_iter().collect();
    by_size.sort_by_key(Vec::len);
    let mut dims: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for s in &by_size {
        let d = dims
            .iter()
            .filter(|(t, _)| t.len() < s.len() && t.iter().all(|v| s.binary_search(v).is_ok()))
            .map(|(_, &d)| d + 1)
            .max()
            .unwrap_or(-1);
        dims.insert(s.clone(), d);
    }
    let mut out: Vec<LatticeFace> = dims
        .into_iter()
        .map(|(vertices, dim)| LatticeFace { vertices, dim })
        .collect();
    out.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.vertices.cmp(&b.vertices)));
    out
}

/// Number of faces of each dimension `0..dim` (vertices, edges, ...), excluding the polytope itself.
pub fn face_counts(p: &Polytope) -> Vec<usize> {
    let lattice = face_lattice(p);
    (0..p.dim as i64)
        .map(|d| lattice.iter().filter(|f| f.dim == d).count())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts() {
        assert_eq!(face_counts(&cube()), vec![8, 12, 6]);
    }

    #[test]
    fn icosahedron_and_dodecahedron_counts() {
        assert_eq!(face_counts(&icosahedron()), vec![12, 30, 20]);
        assert_eq!(face_counts(&dodecahedron()), vec![20, 30, 12]);
    }

    #[test]
    fn polar_of_polar_is_identity() {
        let t = tetrahedron();
        let mut pp = polar(&polar(&t));
        for f in pp.facets.iter_mut() {
            f.sort_unstable();
        }
        assert_eq!(pp, t);
    }
}
