use proptest::prelude::*;

use spectral_mesh::adjoint::{lagrange_check, realize, row_space_projector, Completion};
use spectral_mesh::models::dynamo::{self, DynamoDirection, DynamoParams, Profile};
use spectral_mesh::models::string::{self, StringParams};
use spectral_mesh::perturbation::semisimple_split;
use spectral_mesh::problem::{scalar_product, trace_vector, Eigenfunction, ParameterPoint};
use spectral_mesh::scalar::fnorm;
use spectral_mesh::{CMatrix, CVector, Complex64, Family};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Polynomial of degree 5 with `size`-vector coefficients.
fn poly(size: usize) -> impl Strategy<Value = Eigenfunction<f64>> {
    prop::collection::vec(complex(), 6 * size).prop_map(move |c| {
        Eigenfunction::polynomial(
            c.chunks(size)
                .map(|ch| CVector::from_column_slice(ch))
                .collect(),
        )
    })
}

fn string_setup() -> impl Strategy<Value = (Family, ParameterPoint<f64>)> {
    (
        -0.9..0.9f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        complex(),
    )
        .prop_map(|(o, k, d, mu, lam)| {
            let p = StringParams::new(o, k, d, mu);
            (
                string::string_problem(&p).unwrap(),
                ParameterPoint::new(lam * 6.0, p.to_vec()).unwrap(),
            )
        })
}

fn dynamo_setup() -> impl Strategy<Value = (Family, ParameterPoint<f64>)> {
    (-10.0..10.0f64, -5.0..5.0f64, 0.0..0.95f64, complex()).prop_map(|(a, g, b, lam)| {
        let p = DynamoParams::new(a, g, b, Profile::cosine(vec![(1, 1.0), (4, -0.5)]).unwrap());
        (
            dynamo::dynamo_problem(&p).unwrap(),
            ParameterPoint::new(lam * 30.0, p.to_vec()).unwrap(),
        )
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_product_is_conjugate_symmetric(u in poly(2), v in poly(2)) {
        let uv = scalar_product(&u, &v);
        let vu = scalar_product(&v, &u);
        prop_assert!(close(uv, vu.conj(), 1e-13));
        prop_assert!(scalar_product(&u, &u).re >= 0.0);
    }

    #[test]
    fn trace_is_linear(u in poly(2), v in poly(2), a in complex(), b in complex()) {
        let w = u.combine(a, &v, b);
        let lhs = trace_vector(&w, 2, 2).into_vector();
        let rhs = trace_vector(&u, 2, 2).into_vector() * a + trace_vector(&v, 2, 2).into_vector() * b;
        prop_assert!((lhs - &rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }

    #[test]
    fn lagrange_identity_string((family, point) in string_setup(), u in poly(1), v in poly(1)) {
        let real = realize(&family, &point, &Completion::Orthogonal).unwrap();
        prop_assert!(lagrange_check(&family, &point, &real, &u, &v).relative() < 1e-10);
    }

    #[test]
    fn lagrange_identity_dynamo((family, point) in dynamo_setup(), u in poly(2), v in poly(2)) {
        let real = realize(&family, &point, &Completion::Orthogonal).unwrap();
        prop_assert!(lagrange_check(&family, &point, &real, &u, &v).relative() < 1e-10);
    }

    #[test]
    fn concomitant_is_reconstructed((family, point) in dynamo_setup()) {
        let real = realize(&family, &point, &Completion::Orthogonal).unwrap();
        prop_assert!(real.reconstruction_residual() < 1e-12);
    }

    /// The adjoint boundary conditions do not depend on how `U` is completed.
    #[test]
    fn adjoint_conditions_ignore_the_completion((family, point) in string_setup(), extra in prop::collection::vec(complex(), 8)) {
        let orth = realize(&family, &point, &Completion::Orthogonal).unwrap();
        let supplied = CMatrix::from_row_slice(2, 4, &extra) + orth.completed.u_tilde.clone();
        match realize(&family, &point, &Completion::Supplied(supplied)) {
            Ok(other) => {
                let d = row_space_projector(&orth.v) - row_space_projector(&other.v);
                prop_assert!(fnorm(&d) < 1e-8, "projectors differ by {}", fnorm(&d));
                prop_assert!(other.reconstruction_residual() < 1e-11);
            }
            // a random completion can be ill-conditioned; nothing to compare
            Err(_) => prop_assume!(false),
        }
    }

    /// The first-order pencil spectrum is invariant under `F, G -> P F Q, P G Q`.
    #[test]
    fn pencil_spectrum_is_basis_invariant(entries in prop::collection::vec(complex(), 16)) {
        let f = CMatrix::from_row_slice(2, 2, &entries[0..4]);
        let g = CMatrix::from_row_slice(2, 2, &entries[4..8]) + CMatrix::identity(2, 2);
        let p = CMatrix::from_row_slice(2, 2, &entries[8..12]) + CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        let q = CMatrix::from_row_slice(2, 2, &entries[12..16]) + CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        let a = semisimple_split(&f, &g);
        let b = semisimple_split(&(&p * &f * &q), &(&p * &g * &q));
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a.lambda1.len(), b.lambda1.len());
            for x in &a.lambda1 {
                prop_assert!(b.lambda1.iter().any(|y| close(*x, *y, 1e-8)), "{x} not in {:?}", b.lambda1);
            }
        }
    }

    #[test]
    fn string_nodes_are_swap_symmetric(n in -6i64..=6, m in -6i64..=6, eps in prop::bool::ANY, delta in prop::bool::ANY,
                                       dir in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)) {
        let (e, d) = (if eps { 1 } else { -1 }, if delta { 1 } else { -1 });
        match (string::node(n, e, m, d), string::node(m, d, n, e)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.param, b.param);
                prop_assert_eq!(a.lambda, b.lambda);
                prop_assert_eq!(a.swapped(), b);
                if a.is_double() && n != 0 && m != 0 {
                    let s = StringParams::new(dir.0, dir.1, dir.2, dir.3);
                    let (x, y) = (string::split(&a, &s), string::split(&b, &s));
                    let err = (x[0] - y[0]).norm().max((x[1] - y[1]).norm());
                    prop_assert!(err < 1e-12 * (1.0 + x[0].norm() + x[1].norm()));
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "swap changed node existence"),
        }
    }

    #[test]
    fn string_node_lies_on_both_lines(n in -8i64..=8, m in -8i64..=8, eps in prop::bool::ANY, delta in prop::bool::ANY) {
        let (e, d) = (if eps { 1 } else { -1 }, if delta { 1 } else { -1 });
        if let Ok(node) = string::node(n, e, m, d) {
            prop_assert!((string::branch(n, e, node.param) - node.lambda).norm() < 1e-12);
            prop_assert!((string::branch(m, d, node.param) - node.lambda).norm() < 1e-12);
        }
    }

    #[test]
    fn dynamo_node_lies_on_both_lines(n in 1i64..=8, m in 1i64..=8, eps in prop::bool::ANY, delta in prop::bool::ANY) {
        let (e, d) = (if eps { 1 } else { -1 }, if delta { 1 } else { -1 });
        if let Ok(node) = dynamo::node(n, e, m, d) {
            let scale = 1.0 + node.lambda.re.abs();
            prop_assert!((dynamo::branch(n, e, node.param) - node.lambda.re).abs() < 1e-12 * scale);
            prop_assert!((dynamo::branch(m, d, node.param) - node.lambda.re).abs() < 1e-12 * scale);
            prop_assert_eq!(node.lambda.im, 0.0);
        }
    }

    /// Points on a returned ellipse make the splitting radicand vanish.
    #[test]
    fn ellipse_boundary_is_radicand_zero(k in 1u32..=3, beta in 0.01..0.5f64, t in 0.0..std::f64::consts::TAU) {
        for e in dynamo::ellipses(k, beta, 4) {
            let (a, g) = (e.center.0 + e.semi_axes.0 * t.cos(), e.center.1 + e.semi_axes.1 * t.sin());
            let dir = DynamoDirection::new(a - e.node.param, g, beta);
            let r = dynamo::split_radicand(&e.node, 0.5, &dir);
            let n = e.node.n as f64;
            let scale = (n * n) * ((a - e.node.param).powi(2) + g * g + (std::f64::consts::PI * n * beta).powi(2)) + 1.0;
            prop_assert!(r.abs() < 1e-9 * scale, "radicand {r} at node {:?}", e.node);
        }
    }
}
