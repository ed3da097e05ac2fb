//! The core runs unchanged in `f32`.

use num_complex::Complex;
use spectral_mesh::adjoint::{lagrange_check, realize, Completion};
use spectral_mesh::oracle::{collocate, spectrum, Window};
use spectral_mesh::problem::{make_problem, DerivMode, Eigenfunction, ParameterPoint};
use spectral_mesh::{CMatrix, CVector};

type C = Complex<f32>;

/// `u'' + a u' - lambda u = 0`, `u(0) = 0`, `u'(1) + b u(1) = 0`.
fn family() -> spectral_mesh::problem::ProblemFamily<f32> {
    let anchor = ParameterPoint::new(C::new(0.0, 0.0), vec![0.5, 1.0]).unwrap();
    make_problem(
        2,
        1,
        2,
        |j, dx, _, lam: C, p: &[f32]| {
            CMatrix::from_element(
                1,
                1,
                match (j, dx) {
                    (_, 1..) => C::new(0.0, 0.0),
                    (0, _) => C::new(1.0, 0.0),
                    (1, _) => C::new(p[0], 0.0),
                    _ => -lam,
                },
            )
        },
        |_, _| {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C::new(1.0, 0.0),
                    C::new(0.0, 0.0),
                    C::new(0.0, 0.0),
                    C::new(0.0, 0.0),
                ],
            )
        },
        |_, p: &[f32]| {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C::new(0.0, 0.0),
                    C::new(0.0, 0.0),
                    C::new(p[1], 0.0),
                    C::new(1.0, 0.0),
                ],
            )
        },
        DerivMode::finite_difference(),
        &anchor,
    )
    .unwrap()
}

#[test]
fn adjoint_and_lagrange_identity_in_f32() {
    let f = family();
    let point = ParameterPoint::new(C::new(0.3, -1.2), vec![0.5, 1.0]).unwrap();
    let real = realize(&f, &point, &Completion::Orthogonal).unwrap();
    assert!(real.reconstruction_residual() < 1e-5);
    let u = Eigenfunction::polynomial(vec![
        CVector::from_element(1, C::new(0.2, 0.1)),
        CVector::from_element(1, C::new(-1.0, 0.5)),
        CVector::from_element(1, C::new(0.7, 0.0)),
    ]);
    let v = Eigenfunction::polynomial(vec![
        CVector::from_element(1, C::new(1.0, 0.0)),
        CVector::from_element(1, C::new(0.0, 2.0)),
    ]);
    let rel = lagrange_check(&f, &point, &real, &u, &v).relative();
    assert!(rel < 1e-4, "{rel}");
}

#[test]
fn oracle_in_f32() {
    let f = family();
    let dp = collocate(&f, &[0.0, 0.0], 1, 24).unwrap();
    // Dirichlet-Neumann Laplacian: lambda = -((k + 1/2) pi)^2
    let eig = spectrum(&dp, &Window::new((-30.0, 1.0), (-1.0, 1.0))).unwrap();
    let want = -(1.5f32 * std::f32::consts::PI).powi(2);
    let low = -(0.5f32 * std::f32::consts::PI).powi(2);
    assert!(
        eig.iter().any(|z| (z - C::new(want, 0.0)).norm() < 1e-2),
        "{eig:?}"
    );
    assert!(
        eig.iter().any(|z| (z - C::new(low, 0.0)).norm() < 1e-3),
        "{eig:?}"
    );
}
