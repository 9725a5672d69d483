use corners::geometry::examples::{self, SQUARE_EDGE};
use corners::geometry::{
    check_compatibility_diagram, convex_diffeo_check, decompose_transition, exp_coords,
    glue_exp_maps, log_coords, pairing, sample_grid, ConvexVerdict, ExpMapping, FaceEmbedding,
    GlueOptions, Partition, PerturbedMap,
};
use corners::{CornerError, Perm};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn decompose_examples() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
    let t = decompose_transition(&a, 1e-12).unwrap();
    assert_eq!(t.perm, Perm::swap(2, 0, 1));
    assert_eq!(t.lambda, vec![3.0, 2.0]);
    assert_eq!(t.matrix(), a);
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let err = decompose_transition(&bad, 1e-12).unwrap_err();
    assert!(
        err.to_string().contains("row 0 has 2 significant entries"),
        "{err}"
    );
}

#[test]
fn pairing_and_log_examples() {
    assert_eq!(pairing(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    assert_eq!(pairing(&[0.0, 0.0], &[-7.0, 9.0]).unwrap(), 0.0);
    assert!(matches!(
        pairing(&[1.0], &[1.0, 2.0]),
        Err(CornerError::LengthMismatch { .. })
    ));
    assert_eq!(log_coords(&[1.0]).unwrap(), vec![0.0]);
    let t = log_coords(&[(-2f64).exp(), (-3f64).exp()]).unwrap();
    assert!((t[0] - 2.0).abs() < 1e-15 && (t[1] - 3.0).abs() < 1e-15);
}

#[test]
fn square_edge_map_certificates() {
    let opts = GlueOptions::default();
    let g = examples::square_edge_map(&opts).unwrap();
    assert_eq!(g.zero_section_error, 0.0);
    assert_eq!(g.samples.len(), 50 * 50);
    assert!(g.min_abs_det > 0.5);
    // Where only the left chart carries weight the Jacobian is
    // [[1 + 0.3r, 0.3u], [0, 1 + 0.4r]] of the chart (u(1 + 0.3r), r(1 + 0.2r)).
    for s in g.samples.iter().filter(|s| s.u[0] < 0.25) {
        let r = s.r[0];
        let exact = (1.0 + 0.3 * r) * (1.0 + 0.4 * r);
        assert!(
            (s.det - exact).abs() < 1e-5,
            "det {} vs {exact} at {:?}",
            s.det,
            s.u
        );
    }
}

#[test]
fn square_diagram_commutes_and_detects_perturbation() {
    let opts = GlueOptions::default();
    let edge = examples::square_edge_map(&opts).unwrap();
    let vertex = examples::square_vertex_00_map(&opts).unwrap();
    let samples: Vec<_> = sample_grid(&[(0.0, 0.25)], 1, 0.25, 20);
    let emb = examples::square_edge_in_vertex();
    let r = check_compatibility_diagram(&edge.map, &vertex.map, &emb, &samples, 1e-8).unwrap();
    assert!(r.pass, "residual {}", r.max_residual);
    let perturbed = PerturbedMap {
        inner: &edge.map,
        component: 0,
        slot: 0,
        coef: 0.05,
    };
    let bad = check_compatibility_diagram(&perturbed, &vertex.map, &emb, &samples, 1e-8).unwrap();
    assert!(!bad.pass);
    assert!(bad.max_residual > 1e-3);
}

#[test]
fn right_vertex_diagram_commutes() {
    let opts = GlueOptions::default();
    let edge = examples::square_edge_map(&opts).unwrap();
    let vertex = examples::square_vertex_10_map(&opts).unwrap();
    // Near u = 1 the edge coordinate runs against the vertex's first defining function.
    let samples = sample_grid(&[(0.75, 1.0)], 1, 0.25, 12);
    let r = check_compatibility_diagram(
        &edge.map,
        &vertex.map,
        &examples::square_edge_in_vertex(),
        &samples,
        1e-8,
    )
    .unwrap();
    assert!(r.pass, "residual {}", r.max_residual);
}

#[test]
fn product_chart_diagram_is_exact() {
    let opts = GlueOptions {
        grid: 6,
        ..Default::default()
    };
    let vertex = examples::square_vertex_00_map(&opts).unwrap();
    let samples = sample_grid(&[], 2, 0.2, 6);
    let r = check_compatibility_diagram(
        &vertex.map,
        &vertex.map,
        &FaceEmbedding {
            normal_slots: vec![0, 1],
        },
        &samples,
        1e-12,
    )
    .unwrap();
    assert_eq!(r.max_residual, 0.0);
}

#[test]
fn one_gon_edge_map_is_glued() {
    let g = examples::one_gon_edge_map(&GlueOptions {
        grid: 30,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(g.zero_section_error, 0.0);
    assert!(g.min_abs_det > 1e-3);
    let gamma = examples::one_gon_curve();
    for u in [0.0, 0.3, 0.5, 1.0] {
        assert_eq!(g.map.eval(&[u], &[0.0]), gamma.eval(&[u]));
    }
}

#[test]
fn charts_of_the_wrong_face_are_rejected() {
    let r = glue_exp_maps(
        corners::FaceId(4),
        vec![(0.0, 1.0)],
        examples::square_edge_immersion(),
        vec![examples::square_chart_left()],
        Partition::Normalized,
        &GlueOptions {
            grid: 4,
            ..Default::default()
        },
    );
    assert!(matches!(r, Err(CornerError::Shape(_))));
    assert_eq!(examples::square_chart_left().face, SQUARE_EDGE);
}

#[test]
fn convex_combination_lemma() {
    let g1 = |x: &[f64]| vec![x[0], 2.0 * x[1]];
    let g2 = |x: &[f64]| vec![3.0 * x[0], x[1]];
    // Direct differentiation: (g1 + g2)'(0) = diag(4, 3).
    match convex_diffeo_check(&[&g1, &g2], &[1.0, 1.0], 2, 6, 1e-9).unwrap() {
        ConvexVerdict::Pass { min_abs_det, .. } => assert!((min_abs_det - 12.0).abs() < 1e-5),
        v => panic!("{v:?}"),
    }
    let id = |x: &[f64]| x.to_vec();
    let swap = |x: &[f64]| vec![x[1], x[0]];
    assert!(matches!(
        convex_diffeo_check(&[&id, &swap], &[1.0, 1.0], 2, 6, 1e-9).unwrap(),
        ConvexVerdict::HypothesisViolated { .. }
    ));
}

fn transition() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|d| {
        (
            Just((0..d).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(0.01f64..100.0, d),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn decompose_round_trips((images, lambda) in transition()) {
        let d = lambda.len();
        let a = DMatrix::from_fn(d, d, |i, j| if images[j] == i { lambda[j] } else { 0.0 });
        let t = decompose_transition(&a, 1e-12).unwrap();
        prop_assert_eq!(t.perm.images(), images.as_slice());
        prop_assert!((t.pi_matrix() * t.lambda_matrix() - &a).amax() < 1e-12);
    }

    #[test]
    fn pairing_is_permutation_invariant(
        (images, a) in transition(),
        seed in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        let b: Vec<f64> = seed[..a.len()].to_vec();
        let p = Perm::new(images).unwrap();
        let v = pairing(&a, &b).unwrap();
        let w = pairing(&p.permute(&a), &p.permute(&b)).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn log_exp_round_trip(rho in prop::collection::vec(1e-6f64..1.0, 1..6)) {
        let back = exp_coords(&log_coords(&rho).unwrap());
        for (a, b) in back.iter().zip(&rho) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn glued_square_map_has_exact_zero_section(u in 0.0f64..1.0) {
        let g = examples::square_edge_map(&GlueOptions { grid: 3, ..Default::default() }).unwrap();
        prop_assert_eq!(g.map.eval(&[u], &[0.0]), vec![u, 0.0]);
    }
}
