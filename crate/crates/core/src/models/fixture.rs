//! Scalar problem with a non-derogatory double eigenvalue:
//!
//! ```text
//! u'' - lambda u = 0,  u(0) = 0,  u'(0) - theta u(1) = 0.
//! ```
//!
//! With `z = sqrt(lambda)` and `S(lambda) = sinh(z)/z` the characteristic
//! equation is `1 - theta S(lambda) = 0`. A double root needs `S'(lambda) = 0`,
//! i.e. `tan(kappa) = kappa` for `lambda = -kappa^2`; the first one is
//! `kappa ~ 4.4934`, `theta ~ -4.603`. There a single Keldysh chain of
//! length two exists.

use std::sync::Arc;

use num_complex::Complex64;

use crate::adjoint::{realize, Completion};
use crate::error::{Error, Result};
use crate::perturbation::KeldyshChain;
use crate::problem::{
    DerivMode, Eigenfunction, FamilySource, ParameterPoint, Partial, ProblemFamily,
};
use crate::scalar::CMatrix;
use crate::{CVector, Family};

pub const THETA: usize = 0;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct FixtureSource;

impl FamilySource<f64> for FixtureSource {
    fn order(&self) -> usize {
        2
    }

    fn size(&self) -> usize {
        1
    }

    fn n_params(&self) -> usize {
        1
    }

    fn coeff(&self, j: usize, dx: usize, _x: f64, lambda: Complex64, _p: &[f64]) -> CMatrix<f64> {
        let v = match (j, dx) {
            (0, 0) => c(1.0),
            (2, 0) => -lambda,
            _ => c(0.0),
        };
        CMatrix::from_element(1, 1, v)
    }

    fn boundary(&self, _lambda: Complex64, p: &[f64]) -> CMatrix<f64> {
        CMatrix::from_row_slice(
            2,
            4,
            &[
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(1.0),
                c(-p[THETA]),
                c(0.0),
            ],
        )
    }

    fn coeff_partial(
        &self,
        j: usize,
        dx: usize,
        part: Partial,
        _x: f64,
        _lambda: Complex64,
        _p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let v = if j == 2 && dx == 0 && part == Partial::lambda(1) {
            c(-1.0)
        } else {
            c(0.0)
        };
        Some(CMatrix::from_element(1, 1, v))
    }

    fn boundary_partial(
        &self,
        part: Partial,
        _lambda: Complex64,
        _p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let mut u = CMatrix::zeros(2, 4);
        if part == Partial::mixed(0, THETA) {
            u[(1, 2)] = c(-1.0);
        }
        Some(u)
    }

    fn lambda_degree(&self) -> Option<usize> {
        Some(1)
    }
}

pub fn fixture_problem(theta: f64) -> Result<Family> {
    fixture_problem_with(theta, DerivMode::Analytic)
}

pub fn fixture_problem_with(theta: f64, mode: DerivMode<f64>) -> Result<Family> {
    let anchor = ParameterPoint::new(c(0.0), vec![theta])?;
    ProblemFamily::new(Arc::new(FixtureSource), mode, &anchor)
}

/// `S`, `S'` and `S''` in `lambda`.
fn s_derivatives(lambda: Complex64) -> [Complex64; 3] {
    let z = lambda.sqrt();
    let (sh, ch) = (z.sinh(), z.cosh());
    [
        sh / z,
        (z * ch - sh) / (2.0 * z.powu(3)),
        (z * z * sh - 3.0 * z * ch + 3.0 * sh) / (4.0 * z.powu(5)),
    ]
}

/// `1 - theta S(lambda)`.
pub fn characteristic(lambda: Complex64, theta: f64) -> Complex64 {
    1.0 - theta * s_derivatives(lambda)[0]
}

/// The double root `(lambda*, theta*)` nearest to `guess` by damped
/// Newton on `(1 - theta S, S')`.
pub fn double_root(guess: Complex64) -> Result<(Complex64, f64)> {
    let mut lam = guess;
    let mut theta = (1.0 / s_derivatives(lam)[0]).re;
    let residual = |lam: Complex64, theta: f64| {
        let s = s_derivatives(lam);
        ((1.0 - theta * s[0]).norm_sqr() + s[1].norm_sqr()).sqrt()
    };
    for _ in 0..100 {
        let s = s_derivatives(lam);
        let f1 = 1.0 - theta * s[0];
        let f2 = s[1];
        let r0 = (f1.norm_sqr() + f2.norm_sqr()).sqrt();
        if r0 < 1e-15 {
            return Ok((lam, theta));
        }
        // [[-theta S', -S], [S'', 0]] (dl, dt) = -(f1, f2)
        let dl = -f2 / s[2];
        let dt = (f1 - theta * s[1] * dl) / s[0];
        let mut step = 1.0;
        loop {
            let (nl, nt) = (lam + dl * step, theta + (dt * step).re);
            if residual(nl, nt) < r0 || step < 1e-6 {
                lam = nl;
                theta = nt;
                break;
            }
            step /= 2.0;
        }
        if dl.norm() < 1e-15 * (1.0 + lam.norm()) && dt.norm() < 1e-15 * (1.0 + theta.abs()) {
            return Ok((lam, theta));
        }
    }
    if residual(lam, theta) < 1e-12 {
        Ok((lam, theta))
    } else {
        Err(Error::NoConvergence)
    }
}

/// The first double root, `lambda* = -kappa^2` with `tan(kappa) = kappa`.
pub fn first_double_root() -> Result<(Complex64, f64)> {
    double_root(c(-20.19))
}

/// `u0 = sinh(z x)/z` and its `lambda`-derivative
/// `u1 = (x z cosh(z x) - sinh(z x)) / (2 z^3)`.
fn chain_function(lambda: Complex64, order: usize, reflect: bool) -> Eigenfunction<f64> {
    let z = lambda.sqrt();
    Eigenfunction::new(1, 3, move |x: f64, d: usize| {
        let (x, sgn) = if reflect {
            (1.0 - x, if d % 2 == 1 { -1.0 } else { 1.0 })
        } else {
            (x, 1.0)
        };
        let (sh, ch) = ((z * x).sinh(), (z * x).cosh());
        let v = match (order, d) {
            (0, 0) => sh / z,
            (0, 1) => ch,
            (0, 2) => z * sh,
            (0, _) => z * z * ch,
            (_, 0) => (x * z * ch - sh) / (2.0 * z.powu(3)),
            (_, 1) => x * sh / (2.0 * z),
            (_, 2) => (sh + x * z * ch) / (2.0 * z),
            (_, _) => (2.0 * ch + x * z * sh) / 2.0,
        };
        CVector::from_element(1, v * sgn)
    })
}

/// Keldysh chains `[u0, u1]` and `[v0, v1]` at a double root; the adjoint
/// chain is the direct one reflected, `v_j(x) = u_j(1 - x)`.
pub fn chains(lambda: Complex64) -> (Vec<Eigenfunction<f64>>, Vec<Eigenfunction<f64>>) {
    (
        vec![
            chain_function(lambda, 0, false),
            chain_function(lambda, 1, false),
        ],
        vec![
            chain_function(lambda, 0, true),
            chain_function(lambda, 1, true),
        ],
    )
}

/// The parameter point and Keldysh chain of the first double root.
pub fn double_root_chain(family: &Family) -> Result<(ParameterPoint<f64>, KeldyshChain<f64>)> {
    let (lambda, theta) = first_double_root()?;
    let point = ParameterPoint::new(lambda, vec![theta])?;
    let adjoint = realize(family, &point, &Completion::Orthogonal)?;
    let (u, v) = chains(lambda);
    let chain = KeldyshChain::new(lambda, u, v, adjoint)?;
    Ok((point, chain))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_double_root_values() {
        let (lam, theta) = first_double_root().unwrap();
        let kappa = (-lam.re).sqrt();
        assert!(lam.im.abs() < 1e-12);
        assert!((kappa.tan() - kappa).abs() < 1e-9);
        assert!((theta - kappa / kappa.sin()).abs() < 1e-9);
        assert!((theta + 4.603).abs() < 1e-3);
        assert!(characteristic(lam, theta).norm() < 1e-12);
    }

    #[test]
    fn chain_derivatives_are_consistent() {
        let (lam, _) = first_double_root().unwrap();
        let (u, _) = chains(lam);
        let h = 1e-6;
        for f in &u {
            for d in 0..3 {
                let x = 0.4;
                let fd = (f.eval(x + h, d)[0] - f.eval(x - h, d)[0]) / (2.0 * h);
                assert!((fd - f.eval(x, d + 1)[0]).norm() < 1e-6, "d = {d}");
            }
        }
        // u1'' - lambda u1 = u0
        for &x in &[0.1, 0.6, 0.9] {
            let r = u[1].eval(x, 2)[0] - lam * u[1].eval(x, 0)[0] - u[0].eval(x, 0)[0];
            assert!(r.norm() < 1e-12);
        }
    }
}
