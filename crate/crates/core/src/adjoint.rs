//! Adjoint problems: concomitant matrix, boundary completion, adjoint
//! boundary conditions and the adjoint differential expression.
//!
//! The Lagrange formula reads
//!
//! ```text
//! <L u, v> - <u, L^dagger v> = v^* Lc u,     Lc = diag(-Lf(0), Lf(1))
//! ```
//!
//! with trace vectors `u`, `v`. Completing `U = [A, B]` by `U~` to an
//! invertible `W = [U; U~]`, the adjoint blocks follow from
//! `[-V~; V]^* = Lc W^-1`, which guarantees `Lc = V^* U~ - V~^* U`.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{full_svd, lu_solve};
use crate::problem::{
    apply_coefficients, inner, lambda_derivative, DerivMode, Eigenfunction, LambdaScheme,
    ParameterPoint, ProblemFamily,
};
use crate::quadrature::GaussLegendre;
use crate::scalar::{binomial, cplx, factorial, fnorm, modulus, real, CMatrix, CVector, Real};

/// Weight `M^k_ij` of the concomitant sum.
pub fn binomial_weight(k: usize, i: usize, j: usize, m: usize) -> u64 {
    if i + j > m.saturating_sub(1) || m == 0 || k < i {
        return 0;
    }
    factorial(k) / (factorial(k - i) * factorial(i))
}

/// `Lc = diag(-Lf(0), Lf(1))` together with the `Lf` blocks.
#[derive(Debug, Clone)]
pub struct ConcomitantMatrix<T: Real> {
    pub block: CMatrix<T>,
    /// `Lf(0)`, `mN x mN`.
    pub at0: CMatrix<T>,
    /// `Lf(1)`, `mN x mN`.
    pub at1: CMatrix<T>,
    order: usize,
    size: usize,
}

impl<T: Real> ConcomitantMatrix<T> {
    /// Block `l_ij` of `Lf` at the left (`end = 0`) or right end.
    pub fn l_block(&self, end: usize, i: usize, j: usize) -> CMatrix<T> {
        let n = self.size;
        let src = if end == 0 { &self.at0 } else { &self.at1 };
        src.view((i * n, j * n), (n, n)).into_owned()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// `Lf(x)` for coefficients given as `coeff(j, dx)`.
fn concomitant_block<T: Real>(
    order: usize,
    size: usize,
    coeff: impl Fn(usize, usize) -> CMatrix<T>,
) -> CMatrix<T> {
    let (m, n) = (order, size);
    let mut out = CMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m - i {
            let mut acc = CMatrix::<T>::zeros(n, n);
            for k in i..m - j {
                let w = binomial_weight(k, i, j, m);
                if w == 0 {
                    continue;
                }
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                acc += coeff(m - 1 - j - k, k - i) * cplx(sign * real::<T>(w as f64));
            }
            out.view_mut((i * n, j * n), (n, n)).copy_from(&acc);
        }
    }
    out
}

/// Concomitant matrix at `(lambda, p)`.
pub fn concomitant_at<T: Real>(
    family: &ProblemFamily<T>,
    lambda: Complex<T>,
    p: &[T],
) -> ConcomitantMatrix<T> {
    let (m, n) = (family.order(), family.size());
    let at = |x: T| concomitant_block(m, n, |j, dx| family.coeff(j, dx, x, lambda, p));
    let at0 = at(T::zero());
    let at1 = at(T::one());
    ConcomitantMatrix {
        block: assemble_block(&at0, &at1),
        at0,
        at1,
        order: m,
        size: n,
    }
}

pub fn concomitant<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
) -> ConcomitantMatrix<T> {
    concomitant_at(family, point.lambda0, &point.p0)
}

fn assemble_block<T: Real>(at0: &CMatrix<T>, at1: &CMatrix<T>) -> CMatrix<T> {
    let k = at0.nrows();
    let mut block = CMatrix::zeros(2 * k, 2 * k);
    block.view_mut((0, 0), (k, k)).copy_from(&(-at0));
    block.view_mut((k, k), (k, k)).copy_from(at1);
    block
}

/// How `U~` is chosen.
#[derive(Debug, Clone)]
pub enum Completion<T: Real> {
    /// Orthonormal basis of the orthogonal complement of the row space of `U`.
    Orthogonal,
    /// A caller-supplied `mN x 2mN` matrix (validated).
    Supplied(CMatrix<T>),
}

/// Default bound on `cond(W)`.
pub const MAX_COMPLETION_COND: f64 = 1e8;
/// Relative singular value threshold for the rank test of `U`.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CompletedBoundary<T: Real> {
    pub u: CMatrix<T>,
    pub u_tilde: CMatrix<T>,
    /// 2-norm condition number of `W = [U; U~]`.
    pub cond: T,
}

impl<T: Real> CompletedBoundary<T> {
    /// `W = [U; U~]`.
    pub fn stacked(&self) -> CMatrix<T> {
        stack(&self.u, &self.u_tilde)
    }
}

fn stack<T: Real>(top: &CMatrix<T>, bottom: &CMatrix<T>) -> CMatrix<T> {
    let (r, c) = top.shape();
    let mut w = CMatrix::zeros(r + bottom.nrows(), c);
    w.view_mut((0, 0), (r, c)).copy_from(top);
    w.view_mut((r, 0), bottom.shape()).copy_from(bottom);
    w
}

pub fn complete_boundary<T: Real>(
    u: &CMatrix<T>,
    strategy: &Completion<T>,
) -> Result<CompletedBoundary<T>> {
    complete_boundary_with(u, strategy, real(MAX_COMPLETION_COND))
}

pub fn complete_boundary_with<T: Real>(
    u: &CMatrix<T>,
    strategy: &Completion<T>,
    max_cond: T,
) -> Result<CompletedBoundary<T>> {
    let (rows, cols) = u.shape();
    if cols != 2 * rows || rows == 0 {
        return Err(Error::DimensionMismatch(format!(
            "boundary matrix is {rows}x{cols}, expected k x 2k"
        )));
    }
    let svd = full_svd(u);
    let s = &svd.singular_values;
    let tol = real::<T>(RANK_TOL) * s[0];
    let rank = s.iter().take(rows).filter(|&&v| v > tol).count();
    if rank < rows || s[0] == T::zero() {
        return Err(Error::RankDeficientBoundary {
            rank,
            expected: rows,
        });
    }
    let u_tilde = match strategy {
        Completion::Orthogonal => svd.v_t.rows(rows, rows).into_owned(),
        Completion::Supplied(ut) => {
            if ut.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch(format!(
                    "auxiliary matrix is {}x{}, expected {rows}x{cols}",
                    ut.nrows(),
                    ut.ncols()
                )));
            }
            ut.clone()
        }
    };
    let w = stack(u, &u_tilde);
    let ws = full_svd(&w).singular_values;
    let cond = if ws[ws.len() - 1] > T::zero() {
        ws[0] / ws[ws.len() - 1]
    } else {
        real(f64::INFINITY)
    };
    if !(cond < max_cond) {
        return Err(Error::SingularCompletion { cond: to_f64(cond) });
    }
    Ok(CompletedBoundary {
        u: u.clone(),
        u_tilde,
        cond,
    })
}

pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

/// Coefficients of `L^dagger` in standard form `sum_q a_q d^{m-q}`,
/// for the `r`-th `lambda`-derivative of `L` (`r = 0` is `L` itself).
///
/// `(d^r L / d lambda^r)^dagger = d^r L^dagger / d conj(lambda)^r`, so the
/// same object also serves the adjoint Keldysh chain.
#[derive(Clone)]
pub struct AdjointExpression<T: Real> {
    family: ProblemFamily<T>,
    point: ParameterPoint<T>,
    lambda_order: usize,
}

impl<T: Real> fmt::Debug for AdjointExpression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdjointExpression")
            .field("point", &self.point)
            .field("lambda_order", &self.lambda_order)
            .finish()
    }
}

impl<T: Real> AdjointExpression<T> {
    pub fn order(&self) -> usize {
        self.family.order()
    }

    pub fn lambda_order(&self) -> usize {
        self.lambda_order
    }

    fn source_coeff(&self, j: usize, dx: usize, x: T) -> CMatrix<T> {
        let (lam, p) = (self.point.lambda0, self.point.p0.as_slice());
        self.family
            .coeff_derivative(j, dx, self.lambda_order, None, x, lam, p)
            .expect("coefficient derivative became unavailable after probing")
    }

    /// `a_q(x) = sum_{s<=q} (-1)^{m-s} C(m-s, m-q) d^{q-s} l_s^*`.
    pub fn coeff(&self, q: usize, x: T) -> CMatrix<T> {
        let m = self.order();
        let n = self.family.size();
        let mut acc = CMatrix::<T>::zeros(n, n);
        for s in 0..=q {
            let sign = if (m - s) % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            let w = real::<T>(binomial(m - s, m - q) as f64) * sign;
            acc += self.source_coeff(s, q - s, x).adjoint() * cplx(w);
        }
        acc
    }

    /// `(L^dagger v)(x)`.
    pub fn apply(&self, v: &Eigenfunction<T>, x: T) -> CVector<T> {
        apply_coefficients(self.order(), |q| self.coeff(q, x), v, x)
    }
}

/// Adjoint expression of `L(lambda0, p0)`.
pub fn adjoint_expression<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
) -> Result<AdjointExpression<T>> {
    adjoint_expression_derivative(family, point, 0)
}

/// Adjoint expression of `d^r L / d lambda^r` at the point.
pub fn adjoint_expression_derivative<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    r: usize,
) -> Result<AdjointExpression<T>> {
    let m = family.order();
    let probe = real::<T>(0.5);
    for s in 0..=m {
        family.coeff_derivative(s, m - s, r, None, probe, point.lambda0, &point.p0)?;
    }
    Ok(AdjointExpression {
        family: family.clone(),
        point: point.clone(),
        lambda_order: r,
    })
}

/// Adjoint boundary blocks `V`, `V~` with everything they derive from.
#[derive(Debug, Clone)]
pub struct AdjointRealization<T: Real> {
    pub v: CMatrix<T>,
    pub v_tilde: CMatrix<T>,
    pub completed: CompletedBoundary<T>,
    pub concomitant: ConcomitantMatrix<T>,
    pub expression: Option<AdjointExpression<T>>,
}

impl<T: Real> AdjointRealization<T> {
    /// `Lc - (V^* U~ - V~^* U)`.
    pub fn reconstruction_error(&self) -> CMatrix<T> {
        let c = &self.completed;
        &self.concomitant.block - (self.v.adjoint() * &c.u_tilde - self.v_tilde.adjoint() * &c.u)
    }

    /// Relative Frobenius reconstruction error.
    pub fn reconstruction_residual(&self) -> T {
        let scale = fnorm(&self.concomitant.block);
        let err = fnorm(&self.reconstruction_error());
        if scale == T::zero() {
            err
        } else {
            err / scale
        }
    }

    pub fn expression(&self) -> &AdjointExpression<T> {
        self.expression
            .as_ref()
            .expect("realization built without adjoint expression")
    }
}

/// Solves `W^* X^* = Lc^*` and splits `X^* = [-V~; V]`.
pub fn adjoint_boundary<T: Real>(
    concomitant: &ConcomitantMatrix<T>,
    completed: &CompletedBoundary<T>,
) -> Result<AdjointRealization<T>> {
    let (v, v_tilde) = adjoint_blocks(&concomitant.block, completed)?;
    Ok(AdjointRealization {
        v,
        v_tilde,
        completed: completed.clone(),
        concomitant: concomitant.clone(),
        expression: None,
    })
}

fn adjoint_blocks<T: Real>(
    lc: &CMatrix<T>,
    completed: &CompletedBoundary<T>,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let w = completed.stacked();
    if !(completed.cond * T::default_epsilon() < real(0.1)) {
        return Err(Error::NumericallySingularU);
    }
    let xs = lu_solve(&w.adjoint(), &lc.adjoint()).ok_or(Error::NumericallySingularU)?;
    if xs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NumericallySingularU);
    }
    let k = completed.u.nrows();
    let v_tilde = -xs.rows(0, k).into_owned();
    let v = xs.rows(k, k).into_owned();
    Ok((v, v_tilde))
}

/// Full adjoint realization at a point: concomitant, completion of the
/// boundary matrix, adjoint blocks and adjoint expression.
pub fn realize<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    completion: &Completion<T>,
) -> Result<AdjointRealization<T>> {
    let lc = concomitant(family, point);
    let u = family.boundary(point.lambda0, &point.p0);
    let completed = complete_boundary(&u, completion)?;
    let mut real = adjoint_boundary(&lc, &completed)?;
    real.expression = Some(adjoint_expression(family, point)?);
    Ok(real)
}

/// `d^r V / d conj(lambda)^r` at the point, keeping `U~` fixed.
///
/// `V(lambda)^*` is the right column block of the analytic function
/// `Lc(lambda) W(lambda)^-1`; it is differentiated with the family's
/// `lambda` scheme (a Cauchy contour in analytic mode).
pub fn adjoint_boundary_derivative<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    realization: &AdjointRealization<T>,
    r: usize,
) -> Result<CMatrix<T>> {
    if r == 0 {
        return Ok(realization.v.clone());
    }
    let scheme = match family.mode() {
        DerivMode::FiniteDifference { lambda, .. } => lambda,
        DerivMode::Analytic => LambdaScheme::Contour {
            radius: real(0.1),
            points: 16,
        },
    };
    let k = realization.completed.u.nrows();
    let u_tilde = realization.completed.u_tilde.clone();
    let p = point.p0.as_slice();
    let mut failure = None;
    let d = lambda_derivative(
        |lam| {
            let lc = concomitant_at(family, lam, p).block;
            let w = stack(&family.boundary(lam, p), &u_tilde);
            match lu_solve(&w.adjoint(), &lc.adjoint()) {
                // rows k.. of X^* are V; return X = [.., V^*] columns
                Some(xs) => xs.rows(k, k).adjoint(),
                None => {
                    failure = Some(Error::NumericallySingularU);
                    CMatrix::zeros(2 * k, k)
                }
            }
        },
        r,
        point.lambda0,
        scheme,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(d.adjoint())
}

/// Terms of the Lagrange identity for a pair of functions.
#[derive(Debug, Clone, Copy)]
pub struct LagrangeCheck<T> {
    pub lhs: Complex<T>,
    pub rhs: Complex<T>,
    /// `|<Lu, v> - <u, L^dagger v> - v^* Lc u|`
    pub residual: T,
    /// Sum of the magnitudes of the three terms.
    pub scale: T,
}

impl<T: Real> LagrangeCheck<T> {
    pub fn relative(&self) -> T {
        if self.scale == T::zero() {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

pub fn lagrange_check<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    realization: &AdjointRealization<T>,
    u: &Eigenfunction<T>,
    v: &Eigenfunction<T>,
) -> LagrangeCheck<T> {
    let rule = GaussLegendre::default();
    let (lam, p) = (point.lambda0, point.p0.as_slice());
    let lu_v = inner(&rule, |x| family.apply(lam, p, u, x), |x| v.value(x));
    let expr = realization.expression();
    let u_ldv = inner(&rule, |x| u.value(x), |x| expr.apply(v, x));
    let (m, n) = (family.order(), family.size());
    let tu = crate::problem::trace_vector(u, m, n).into_vector();
    let tv = crate::problem::trace_vector(v, m, n).into_vector();
    let bnd = tv.dotc(&(&realization.concomitant.block * &tu));
    let lhs = lu_v - u_ldv;
    LagrangeCheck {
        lhs,
        rhs: bnd,
        residual: modulus(lhs - bnd),
        scale: modulus(lu_v) + modulus(u_ldv) + modulus(bnd),
    }
}

/// `|<Lu, v> - <u, L^dagger v> - v^* Lc u|`; vanishes for every pair.
pub fn lagrange_residual<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    realization: &AdjointRealization<T>,
    u: &Eigenfunction<T>,
    v: &Eigenfunction<T>,
) -> T {
    lagrange_check(family, point, realization, u, v).residual
}

/// Orthogonal projector onto the row space of `v`.
pub fn row_space_projector<T: Real>(v: &CMatrix<T>) -> CMatrix<T> {
    let svd = full_svd(v);
    let tol = real::<T>(RANK_TOL) * svd.singular_values[0];
    let rank = svd
        .singular_values
        .iter()
        .take(v.nrows())
        .filter(|&&s| s > tol)
        .count();
    let basis = svd.v_t.rows(0, rank).into_owned();
    basis.adjoint() * basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_problem, DerivMode};

    type C = Complex<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn binomial_weights() {
        assert_eq!(binomial_weight(1, 0, 0, 2), 1);
        assert_eq!(binomial_weight(0, 1, 0, 2), 0);
        assert_eq!(binomial_weight(2, 1, 0, 3), 2);
        assert_eq!(binomial_weight(1, 1, 1, 2), 0);
        for m in 1..6 {
            for k in 0..m {
                for j in 0..m {
                    if j < m {
                        assert_eq!(binomial_weight(k, 0, j, m), 1);
                    }
                    if k + j <= m - 1 {
                        assert_eq!(binomial_weight(k, k, j, m), 1);
                    }
                }
            }
        }
    }

    fn constant_family(cc: f64, b: f64, a: f64, u: CMatrix<f64>) -> ProblemFamily<f64> {
        let anchor = ParameterPoint::new(c(0.0), vec![0.0]).unwrap();
        let ua = u.columns(0, 2).into_owned();
        let ub = u.columns(2, 2).into_owned();
        make_problem(
            2,
            1,
            1,
            move |j, dx, _, _, _: &[f64]| {
                let v = if dx > 0 { 0.0 } else { [cc, b, a][j] };
                CMatrix::from_element(1, 1, c(v))
            },
            move |_, _| ua.clone(),
            move |_, _| ub.clone(),
            DerivMode::finite_difference(),
            &anchor,
        )
        .unwrap()
    }

    #[test]
    fn second_order_concomitant() {
        let u = CMatrix::from_row_slice(
            2,
            4,
            &[
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(1.0),
                c(0.0),
            ],
        );
        let f = constant_family(3.0, 5.0, 7.0, u);
        let pt = ParameterPoint::new(c(0.0), vec![0.0]).unwrap();
        let lc = concomitant(&f, &pt);
        let l = lc.at1.clone();
        // l_00 = l_1 - l_0', l_01 = l_0, l_10 = -l_0, l_11 = 0
        assert_eq!(l[(0, 0)], c(5.0));
        assert_eq!(l[(0, 1)], c(3.0));
        assert_eq!(l[(1, 0)], c(-3.0));
        assert_eq!(l[(1, 1)], c(0.0));
        assert_eq!(lc.block.view((0, 0), (2, 2)).into_owned(), -lc.at0.clone());
    }

    #[test]
    fn dirichlet_like_completion() {
        let mut u = CMatrix::<f64>::zeros(2, 4);
        u[(0, 0)] = c(1.0);
        u[(1, 1)] = c(1.0);
        let cb = complete_boundary(&u, &Completion::Orthogonal).unwrap();
        assert!((cb.cond - 1.0).abs() < 1e-12);
        let proj = row_space_projector(&cb.u_tilde);
        let mut want = CMatrix::<f64>::zeros(4, 4);
        want[(2, 2)] = c(1.0);
        want[(3, 3)] = c(1.0);
        assert!(fnorm(&(proj - want)) < 1e-12);
    }

    #[test]
    fn repeated_row_is_rank_deficient() {
        let u = CMatrix::from_row_slice(
            2,
            4,
            &[
                c(1.0),
                c(2.0),
                c(0.0),
                c(1.0),
                c(1.0),
                c(2.0),
                c(0.0),
                c(1.0),
            ],
        );
        assert!(matches!(
            complete_boundary(&u, &Completion::Orthogonal),
            Err(Error::RankDeficientBoundary {
                rank: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn singular_supplied_completion() {
        let u = CMatrix::from_row_slice(1, 2, &[c(1.0), c(-1.0)]);
        let ut = CMatrix::from_row_slice(1, 2, &[c(2.0), c(-2.0)]);
        assert!(matches!(
            complete_boundary(&u, &Completion::Supplied(ut)),
            Err(Error::SingularCompletion { .. })
        ));
    }

    #[test]
    fn periodic_first_order_is_self_periodic() {
        let anchor = ParameterPoint::new(c(0.0), vec![0.0]).unwrap();
        let f = make_problem(
            1,
            1,
            1,
            |j, _, _, lam: C, _: &[f64]| {
                CMatrix::from_element(1, 1, if j == 0 { c(1.0) } else { -lam })
            },
            |_, _| CMatrix::from_element(1, 1, c(1.0)),
            |_, _| CMatrix::from_element(1, 1, c(-1.0)),
            DerivMode::finite_difference(),
            &anchor,
        )
        .unwrap();
        let real = realize(&f, &anchor, &Completion::Orthogonal).unwrap();
        // V proportional to (1, -1)
        let v = &real.v;
        assert!((v[(0, 0)] + v[(0, 1)]).norm() < 1e-12 * v[(0, 0)].norm());
        assert!(real.reconstruction_residual() < 1e-14);
    }

    #[test]
    fn constant_coefficient_adjoint_expression() {
        let u = CMatrix::from_row_slice(
            2,
            4,
            &[
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(1.0),
                c(0.0),
            ],
        );
        let f = constant_family(2.0, 3.0, 5.0, u);
        let pt = ParameterPoint::new(c(0.0), vec![0.0]).unwrap();
        let e = adjoint_expression(&f, &pt).unwrap();
        assert_eq!(e.coeff(0, 0.3)[(0, 0)], c(2.0));
        assert_eq!(e.coeff(1, 0.3)[(0, 0)], c(-3.0));
        assert_eq!(e.coeff(2, 0.3)[(0, 0)], c(5.0));
    }
}
