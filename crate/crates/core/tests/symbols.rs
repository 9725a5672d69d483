use corners::symbols::{
    build_restricted_tuple, check_comp1, check_comp2, compose, is_elliptic, tuple_distance,
    CornerModel, EllipticOptions, SymbolExpr, SymbolTuple,
};
use corners::FaceId;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn square() -> CornerModel {
    CornerModel::unit_box(2).unwrap()
}

fn tuple(expr: &SymbolExpr, model: &CornerModel) -> SymbolTuple {
    build_restricted_tuple(expr, model, 1).unwrap()
}

/// `(a + b ξ_1) / (1 + |ξ| + |q|)`-type symbol with a base-dependent factor.
fn affine(c0: f64, c1: f64, xi: [f64; 2]) -> SymbolExpr {
    SymbolExpr::Product {
        factors: vec![
            SymbolExpr::Base {
                c0,
                coeffs: vec![0.0, c1],
            },
            SymbolExpr::positive_real(2, 1, &xi),
        ],
    }
}

#[test]
fn square_tuple_has_all_faces_and_is_compatible() {
    let model = square();
    let t = tuple(&SymbolExpr::square_example(), &model);
    let dims: Vec<usize> = t
        .faces
        .iter()
        .map(|f| model.complex.face(f.face).unwrap().dim)
        .collect();
    assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 4);
    assert_eq!(dims.iter().filter(|&&d| d == 0).count(), 4);
    assert!(t.faces.iter().all(|f| f.sheets.len() == 1));
    let c1 = check_comp1(&t, &model, 1e-9).unwrap();
    let c2 = check_comp2(&t, &model, 1e-9).unwrap();
    assert!(c1.pass && c1.comparisons > 0, "{c1:?}");
    assert!(c2.pass && c2.comparisons > 0, "{c2:?}");
}

#[test]
fn interior_samples_are_the_homogeneous_limit() {
    let model = square();
    let t = tuple(&SymbolExpr::square_example(), &model);
    // By hand: (1 + 0.25 x_0)(|ξ| + |q| + iξ_1 + 0.5 iξ_2) / (|ξ| + |q|).
    for (x, row) in t.base_samples.iter().zip(&t.sigma0) {
        for (w, v) in t.sphere.points().iter().zip(row) {
            let xi = (w[0] * w[0] + w[1] * w[1]).sqrt();
            let den = xi + w[2].abs();
            let expected = (1.0 + 0.25 * x[0]) * C::new(den, w[0] + 0.5 * w[1]) / den;
            assert!((v - expected).norm() < 1e-14);
        }
    }
}

#[test]
fn face_families_freeze_the_base_coefficient() {
    let model = square();
    let t = tuple(&SymbolExpr::square_example(), &model);
    let family = |id: usize| {
        &t.faces
            .iter()
            .find(|f| f.face == FaceId(id))
            .unwrap()
            .sheets[0]
            .family
    };
    let zero = [0.0; 3];
    // Facet 0 is x_0 = 0, facet 1 is x_0 = 1; on facets 2, 3 x_0 stays free.
    assert!((family(1).eval(&[0.7], &zero) - C::new(1.0, 0.0)).norm() < 1e-15);
    assert!((family(2).eval(&[0.7], &zero) - C::new(1.25, 0.0)).norm() < 1e-15);
    assert!((family(3).eval(&[0.4], &zero) - C::new(1.1, 0.0)).norm() < 1e-15);
}

#[test]
fn perturbed_vertex_symbol_is_located() {
    let model = square();
    let mut t = tuple(&SymbolExpr::square_example(), &model);
    let corner = t.face_tuple_mut(&[FaceId(5)]).unwrap();
    corner.sigma0[0][3] += C::new(0.5, 0.0);
    let r = check_comp1(&t, &model, 1e-9).unwrap();
    assert!(!r.pass);
    let w = r.witness.unwrap();
    assert_eq!(w.chain, vec![FaceId(5)]);
    assert!((w.value - 0.5).abs() < 1e-12);
}

#[test]
fn composition_is_a_homomorphism_on_the_square() {
    let model = square();
    let a = SymbolExpr::square_example();
    let b = affine(2.0, -0.5, [0.3, -1.0]);
    let lhs = compose(&tuple(&a, &model), &tuple(&b, &model)).unwrap();
    let rhs = tuple(&a.times(&b), &model);
    assert!(tuple_distance(&lhs, &rhs).unwrap() <= 1e-9);
    assert!(check_comp1(&lhs, &model, 1e-9).unwrap().pass);
    assert!(check_comp2(&lhs, &model, 1e-9).unwrap().pass);
}

#[test]
fn identity_and_zero_tuples() {
    let model = square();
    let a = tuple(&SymbolExpr::square_example(), &model);
    let one = tuple(&SymbolExpr::constant(1.0), &model);
    let zero = tuple(&SymbolExpr::constant(0.0), &model);
    assert_eq!(
        tuple_distance(&compose(&one, &a).unwrap(), &a).unwrap(),
        0.0
    );
    assert_eq!(
        tuple_distance(&compose(&a, &zero).unwrap(), &zero).unwrap(),
        0.0
    );
    assert!(
        is_elliptic(&one, &model, &EllipticOptions::default())
            .unwrap()
            .elliptic
    );
    assert!(
        !is_elliptic(&zero, &model, &EllipticOptions::default())
            .unwrap()
            .elliptic
    );
}

#[test]
fn tuples_of_different_shape_do_not_compose() {
    let a = tuple(&SymbolExpr::square_example(), &square());
    let b = tuple(
        &SymbolExpr::interval_example(),
        &CornerModel::unit_box(1).unwrap(),
    );
    assert!(compose(&a, &b).is_err());
}

#[test]
fn square_example_is_elliptic() {
    let model = square();
    let t = tuple(&SymbolExpr::square_example(), &model);
    let r = is_elliptic(&t, &model, &EllipticOptions::default()).unwrap();
    assert!(r.elliptic, "{r:?}");
    // The real part of the positive-real factor is 1 and the base factor is at least 1.
    assert!(r.min_value >= 1.0 - 1e-9, "{}", r.min_value);
}

#[test]
fn vanishing_interior_symbol_is_reported() {
    let model = CornerModel::unit_box(1).unwrap();
    let t = tuple(&SymbolExpr::interval_example(), &model);
    let r = is_elliptic(&t, &model, &EllipticOptions::default()).unwrap();
    assert!(!r.elliptic);
    let interior = r.levels.iter().find(|l| l.chain.is_empty()).unwrap();
    // (iξ + q)/(|ξ| + |q|) has modulus ≥ 1/√2.
    assert!((interior.min_value - 0.5f64.sqrt()).abs() < 1e-12);
}

fn coefs() -> impl Strategy<Value = (f64, f64, [f64; 2])> {
    (0.5f64..2.0, -0.4f64..0.4, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c, d)| (a, b, [c, d]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn composition_is_associative(a in coefs(), b in coefs(), c in coefs()) {
        let model = square();
        let ta = tuple(&affine(a.0, a.1, a.2), &model);
        let tb = tuple(&affine(b.0, b.1, b.2), &model);
        let tc = tuple(&affine(c.0, c.1, c.2), &model);
        let left = compose(&compose(&ta, &tb).unwrap(), &tc).unwrap();
        let right = compose(&ta, &compose(&tb, &tc).unwrap()).unwrap();
        prop_assert!(tuple_distance(&left, &right).unwrap() <= 1e-12);
    }
}
