mod common;

use common::c;
use corners::localization::{
    commutator_locality_check, dyadic_radii, family_continuity, fredholm_check, glue,
    ideal_membership_profile, parameter_grid, real_diag, restricted_norm, GridSpace,
    LocalRepFamily, ParamFamily,
};
use corners::operators::CMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn q_nodes() -> Vec<Vec<f64>> {
    parameter_grid(1, 4.0, 9, 64.0, 0)
}

/// Hat functions of radius `r` around `centers`, normalized so that `Σ ψ² = 1`.
fn sqrt_partition(space: &GridSpace, centers: &[usize], r: f64) -> Vec<Vec<f64>> {
    let hats: Vec<Vec<f64>> = centers
        .iter()
        .map(|&x| {
            (0..space.len())
                .map(|v| (1.0 - space.dist(x, v) / r).max(0.0))
                .collect()
        })
        .collect();
    let total: Vec<f64> = (0..space.len())
        .map(|v| hats.iter().map(|h| h[v]).sum())
        .collect();
    hats.iter()
        .map(|h| h.iter().zip(&total).map(|(a, t)| (a / t).sqrt()).collect())
        .collect()
}

/// Frozen-coefficient family on the interval: `A(q) = a(x) + iq` with `a(x) = 1 + x`.
fn frozen_example(
    n: usize,
    stride: usize,
    r: f64,
) -> (GridSpace, ParamFamily, LocalRepFamily, Vec<Vec<f64>>) {
    let space = GridSpace::interval(0.0, 1.0, n);
    let a: Vec<f64> = space.nodes.iter().map(|x| 1.0 + x[0]).collect();
    let eye = CMatrix::identity(n, n);
    let global = ParamFamily::from_fn(q_nodes(), |q| {
        real_diag(&a) + &eye * Complex64::new(0.0, q[0])
    });
    let centers: Vec<usize> = (0..n).step_by(stride).chain([n - 1]).collect();
    let reps = centers
        .iter()
        .map(|&x| ParamFamily::from_fn(q_nodes(), |q| &eye * Complex64::new(a[x], q[0])))
        .collect();
    let psi = sqrt_partition(&space, &centers, r);
    let fam = LocalRepFamily::with_balls(&space, centers, reps, r).unwrap();
    (space, global, fam, psi)
}

#[test]
fn rank_one_restricted_norm() {
    let space = GridSpace::new(
        (0..5).map(|i| vec![i as f64]).collect(),
        vec![0.5, 1.0, 2.0, 1.5, 0.25],
        1,
    )
    .unwrap();
    let u = [1.0, -2.0, 0.5, 0.0, 3.0];
    let v = [0.5, 1.0, -1.0, 2.0, 1.0];
    let a = CMatrix::from_fn(5, 5, |i, j| c(u[i] * v[j]));
    let set = [0, 2, 3];
    // ‖W^{1/2} u v* W^{-1/2}|_U‖ = ‖W^{1/2} u‖ · ‖(W^{-1/2} v)|_U‖.
    let left = (0..5)
        .map(|i| space.weights[i] * u[i] * u[i])
        .sum::<f64>()
        .sqrt();
    let right = set
        .iter()
        .map(|&j| v[j] * v[j] / space.weights[j])
        .sum::<f64>()
        .sqrt();
    let fam = ParamFamily::constant(vec![vec![0.0]], a);
    assert!((restricted_norm(&fam, &space, &set).unwrap() - left * right).abs() < 1e-12);
}

#[test]
fn vanishing_multiplier_lies_in_the_ideal() {
    let space = GridSpace::interval(0.0, 1.0, 64);
    let x0 = 32;
    let f: Vec<f64> = (0..64).map(|v| space.dist(x0, v)).collect();
    let fam = ParamFamily::constant(q_nodes(), space.multiplication(&f));
    let p = ideal_membership_profile(&fam, &space, x0, &dyadic_radii(0.5, 5), 0.02).unwrap();
    for (v, r) in p.values.iter().zip(&p.radii) {
        assert!(*v <= *r + 1e-12);
    }
    assert!(p.in_ideal);
    let id = ParamFamily::constant(q_nodes(), CMatrix::identity(64, 64));
    assert!(
        !ideal_membership_profile(&id, &space, x0, &dyadic_radii(0.5, 5), 0.02)
            .unwrap()
            .in_ideal
    );
}

#[test]
fn reflection_is_not_local() {
    let space = GridSpace::interval(0.0, 1.0, 16);
    let flip = CMatrix::from_fn(16, 16, |i, j| if i + j == 15 { c(1.0) } else { c(0.0) });
    let fam = ParamFamily::constant(q_nodes(), flip);
    let phi: Vec<f64> = space.nodes.iter().map(|x| x[0]).collect();
    let r = commutator_locality_check(&fam, &space, &[phi], 1e-6, Some(2));
    assert!(!r.pass);
    assert!(r.entries[0].annulus_norm > 0.5);
}

#[test]
fn jump_in_local_representatives_breaks_continuity() {
    let space = GridSpace::interval(0.0, 1.0, 16);
    let level = |v: f64| ParamFamily::constant(q_nodes(), CMatrix::identity(16, 16) * c(v));
    let fam =
        LocalRepFamily::with_balls(&space, vec![6, 9], vec![level(1.0), level(2.0)], 0.25).unwrap();
    let r = family_continuity(&fam, &space, 0.1).unwrap();
    assert!(!r.pass && r.worst_pair == Some((6, 9)));
    assert!((r.worst_value - 1.0).abs() < 1e-12);
    let smooth =
        LocalRepFamily::with_balls(&space, vec![6, 9], vec![level(1.0), level(1.05)], 0.25)
            .unwrap();
    assert!(family_continuity(&smooth, &space, 0.1).unwrap().pass);
}

#[test]
fn glue_of_a_constant_family_is_exact() {
    let space = GridSpace::interval(0.0, 1.0, 12);
    let a = ParamFamily::from_fn(q_nodes(), |q| {
        CMatrix::from_fn(12, 12, |i, j| c((i + 2 * j) as f64 + q[0]))
    });
    let centers = vec![0, 4, 8, 11];
    let psi = sqrt_partition(&space, &centers, 0.4);
    let fam = LocalRepFamily::with_balls(&space, centers, vec![a.clone(); 4], 0.4).unwrap();
    let g = glue(&fam, &space, &psi, 0.0).unwrap();
    assert!(g.exact);
    assert_eq!(g.family, a);
    assert!(g.local_errors.iter().all(|&e| e == 0.0));
}

#[test]
fn glue_bound_on_frozen_coefficients() {
    let (space, _, fam, psi) = frozen_example(32, 8, 0.3);
    let eps = family_continuity(&fam, &space, f64::INFINITY)
        .unwrap()
        .worst_value;
    let g = glue(&fam, &space, &psi, eps).unwrap();
    assert!(!g.exact);
    assert!(g.overlap >= 2);
    assert!(
        g.bound_holds,
        "{:?} vs {} × {eps}",
        g.local_errors, g.overlap
    );
    // Every local error is a distance between coefficient values within 2r.
    assert!(g.local_errors.iter().all(|&e| e <= 0.6 + 1e-12));
}

#[test]
fn partitions_must_square_sum_to_one() {
    let (space, _, fam, mut psi) = frozen_example(16, 4, 0.3);
    psi[0][0] *= 0.5;
    assert!(glue(&fam, &space, &psi, 0.1).is_err());
}

#[test]
fn frozen_coefficient_family_is_fredholm() {
    let (space, global, fam, _) = frozen_example(32, 8, 0.3);
    let r = fredholm_check(&global, &fam, &space, 1e-3, 1e-8).unwrap();
    assert!(r.fredholm);
    // |a(x) + iq| ≥ a(x), smallest at the first midpoint x = 1/64 with q = 0.
    assert!((r.min_singular_value - (1.0 + 1.0 / 64.0)).abs() < 1e-12);
    assert_eq!(r.witness, (0, vec![0.0]));
    assert!(r.finite_section_residual < 1e-12 && r.deleted == 0);
}

#[test]
fn vanishing_local_representative_is_not_fredholm() {
    let space = GridSpace::interval(0.0, 1.0, 16);
    let a: Vec<f64> = space.nodes.iter().map(|x| x[0] - 0.5).collect();
    let global = ParamFamily::from_fn(q_nodes(), |q| real_diag(&a) * c(1.0 + q[0].abs()));
    let eye = CMatrix::identity(16, 16);
    let reps = [3, 8, 12]
        .iter()
        .map(|&x| ParamFamily::constant(q_nodes(), &eye * c(x as f64 / 16.0 - 0.5 + 1.0 / 32.0)))
        .collect();
    let fam = LocalRepFamily::with_balls(&space, vec![3, 8, 12], reps, 0.3).unwrap();
    let r = fredholm_check(&global, &fam, &space, 0.05, 1e-8).unwrap();
    assert!(!r.fredholm);
    assert_eq!(r.witness.0, 8);
    assert!(r.min_singular_value < 0.05);
}

fn instance() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<bool>, Vec<bool>)> {
    (2usize..=7).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(0.1f64..4.0, n),
            prop::collection::vec(-2.0f64..2.0, 2 * n * n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn restricted_norm_is_monotone((n, w, entries, in_u, extra) in instance()) {
        let space = GridSpace::new((0..n).map(|i| vec![i as f64]).collect(), w, 1).unwrap();
        let a = CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i * n + j], entries[n * n + i * n + j]));
        let fam = ParamFamily::constant(vec![vec![0.0]], a);
        let u: Vec<usize> = (0..n).filter(|&i| in_u[i]).collect();
        prop_assume!(!u.is_empty());
        let v: Vec<usize> = (0..n).filter(|&i| in_u[i] || extra[i]).collect();
        let nu = restricted_norm(&fam, &space, &u).unwrap();
        let nv = restricted_norm(&fam, &space, &v).unwrap();
        prop_assert!(nu <= nv * (1.0 + 1e-12), "{} > {}", nu, nv);
    }
}
