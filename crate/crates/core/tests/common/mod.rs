//! Independent oracles shared by the integration tests. None of these call
//! into the code paths they are used to check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use corners::dual::Poset;
use corners::operators::CMatrix;
use corners::Polytope;
use num_complex::Complex64;

/// Face counts by codimension from all facet subsets: `S` is a face when
/// its common vertex set is nonempty and no further facet contains it.
pub fn brute_face_counts(p: &Polytope) -> Vec<usize> {
    let m = p.facets.len();
    assert!(m <= 20, "brute force over 2^{m} subsets");
    let contains = |f: usize, v: usize| p.facets[f].contains(&v);
    let mut counts = vec![0; p.dim + 1];
    for mask in 0u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|f| mask >> f & 1 == 1).collect();
        let verts: Vec<usize> = (0..p.vertices)
            .filter(|&v| s.iter().all(|&f| contains(f, v)))
            .collect();
        if verts.is_empty() {
            continue;
        }
        let closure: Vec<usize> = (0..m)
            .filter(|&f| verts.iter().all(|&v| contains(f, v)))
            .collect();
        if closure == s && s.len() <= p.dim {
            counts[s.len()] += 1;
        }
    }
    counts
}

/// Boundary face poset of the octahedron `conv(±e_i)` from coordinates:
/// facets are the sign vectors `s` with vertex set `{v : s·v = 1}`.
pub fn octahedron_boundary_poset() -> Poset {
    let verts: Vec<[f64; 3]> = (0..3)
        .flat_map(|i| {
            [1.0, -1.0].map(|s| {
                let mut v = [0.0; 3];
                v[i] = s;
                v
            })
        })
        .collect();
    let mut facets: Vec<BTreeSet<usize>> = Vec::new();
    for signs in 0..8 {
        let s: Vec<f64> = (0..3)
            .map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let on: BTreeSet<usize> = (0..6)
            .filter(|&k| {
                (verts[k].iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() - 1.0).abs() < 1e-12
            })
            .collect();
        facets.push(on);
    }
    let mut faces: BTreeSet<BTreeSet<usize>> = facets.iter().cloned().collect();
    loop {
        let current: Vec<_> = faces.iter().cloned().collect();
        let mut grew = false;
        for a in &current {
            for b in &current {
                let c: BTreeSet<usize> = a.intersection(b).copied().collect();
                if !c.is_empty() && faces.insert(c) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let faces: Vec<_> = faces.into_iter().collect();
    let dims = faces.iter().map(|f| f.len() as i64 - 1).collect();
    let mut less = BTreeSet::new();
    for (a, fa) in faces.iter().enumerate() {
        for (b, fb) in faces.iter().enumerate() {
            if a != b && fa.is_subset(fb) {
                less.insert((a, b));
            }
        }
    }
    Poset { dims, less }
}

/// Dense quantization by the explicit inverse DFT sum
/// `A[j, l] = N^{-d} Σ_k B(q_k) e^{i q_k·(x_j − x_l)}` on a `d`-dimensional torus.
pub fn dense_dft_quantize(values: &[CMatrix], n: usize, d: usize) -> CMatrix {
    let b = values[0].nrows();
    let nodes = n.pow(d as u32);
    let idx = |mut flat: usize| {
        let mut out = vec![0usize; d];
        for a in (0..d).rev() {
            out[a] = flat % n;
            flat /= n;
        }
        out
    };
    let mut a = CMatrix::zeros(nodes * b, nodes * b);
    for j in 0..nodes {
        let xj = idx(j);
        for l in 0..nodes {
            let xl = idx(l);
            let mut acc = CMatrix::zeros(b, b);
            for (k, v) in values.iter().enumerate() {
                let kk = idx(k);
                let phase: f64 = kk
                    .iter()
                    .zip(xj.iter().zip(&xl))
                    .map(|(&kc, (&x1, &x2))| {
                        2.0 * std::f64::consts::PI * kc as f64 * (x1 as f64 - x2 as f64) / n as f64
                    })
                    .sum();
                acc += v * Complex64::from_polar(1.0, phase);
            }
            acc /= Complex64::new(nodes as f64, 0.0);
            a.view_mut((j * b, l * b), (b, b)).copy_from(&acc);
        }
    }
    a
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
