//! Parameterized two-point boundary eigenvalue problems
//!
//! ```text
//! L(lambda, p) u = sum_j l_j(x; lambda, p) d^{m-j} u / dx^{m-j} = 0,   x in [0, 1]
//! [A, B](lambda, p) (u(0), .., u^(m-1)(0), u(1), .., u^(m-1)(1)) = 0
//! ```
//!
//! with `N x N` coefficient matrices `l_j` and `mN x mN` boundary blocks.
//! Families are immutable and shared through `Arc`; the callbacks behind a
//! [`FamilySource`] must be re-entrant because parameter sweeps evaluate
//! them from several threads.

use std::fmt;
use std::sync::Arc;

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{
    binomial, cis, cplx, factorial, max_abs, modulus, real, CMatrix, CVector, Real,
};

/// A derivative selector: `d^lambda / d lambda^lambda` of `d / d p_param`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partial {
    pub lambda: usize,
    pub param: Option<usize>,
}

impl Partial {
    pub fn lambda(r: usize) -> Self {
        Self {
            lambda: r,
            param: None,
        }
    }

    pub fn mixed(r: usize, k: usize) -> Self {
        Self {
            lambda: r,
            param: Some(k),
        }
    }
}

/// Callbacks defining a problem family.
///
/// `coeff(j, dx, ..)` returns `d^dx l_j / dx^dx`; callers request
/// `dx <= m - j` only. The optional `*_partial` callbacks return analytic
/// `lambda`/parameter derivatives and are consulted in
/// [`DerivMode::Analytic`].
pub trait FamilySource<T: Real>: Send + Sync {
    fn order(&self) -> usize;
    fn size(&self) -> usize;
    fn n_params(&self) -> usize;
    fn coeff(&self, j: usize, dx: usize, x: T, lambda: Complex<T>, p: &[T]) -> CMatrix<T>;
    /// The `mN x 2mN` matrix `[A, B]`.
    fn boundary(&self, lambda: Complex<T>, p: &[T]) -> CMatrix<T>;

    fn coeff_partial(
        &self,
        _j: usize,
        _dx: usize,
        _partial: Partial,
        _x: T,
        _lambda: Complex<T>,
        _p: &[T],
    ) -> Option<CMatrix<T>> {
        None
    }

    fn boundary_partial(
        &self,
        _partial: Partial,
        _lambda: Complex<T>,
        _p: &[T],
    ) -> Option<CMatrix<T>> {
        None
    }

    /// Degree of the (polynomial) dependence on `lambda`, when known.
    fn lambda_degree(&self) -> Option<usize> {
        None
    }
}

/// Differentiation in `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaScheme<T> {
    /// Trapezoidal Cauchy integral on a circle of radius
    /// `radius * (1 + |lambda0|)` with `points` nodes. Exact for polynomials
    /// of degree below `points`.
    Contour { radius: T, points: usize },
    /// Central differences with step `step * (1 + |lambda0|)`.
    Central { step: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivMode<T> {
    /// Derivatives come from the source's `*_partial` callbacks.
    Analytic,
    FiniteDifference {
        lambda: LambdaScheme<T>,
        /// Relative step for central differences along a parameter direction.
        param_step: T,
    },
}

impl<T: Real> DerivMode<T> {
    pub fn finite_difference() -> Self {
        DerivMode::FiniteDifference {
            lambda: LambdaScheme::Contour {
                radius: real(0.1),
                points: 16,
            },
            param_step: real(1e-5),
        }
    }
}

/// Expansion point `(lambda0, p0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint<T> {
    pub lambda0: Complex<T>,
    pub p0: Vec<T>,
}

impl<T: Real> ParameterPoint<T> {
    pub fn new(lambda0: Complex<T>, p0: Vec<T>) -> Result<Self> {
        if p0.is_empty() {
            return Err(Error::InvalidArgument(
                "parameter vector must be non-empty".into(),
            ));
        }
        Ok(Self { lambda0, p0 })
    }

    pub fn with_lambda(&self, lambda0: Complex<T>) -> Self {
        Self {
            lambda0,
            p0: self.p0.clone(),
        }
    }

    /// `p0 + eps * pdot`.
    pub fn shifted(&self, dir: &ParameterDirection<T>, eps: T) -> Self {
        let p0 = self
            .p0
            .iter()
            .zip(&dir.pdot)
            .map(|(&p, &d)| p + eps * d)
            .collect();
        Self {
            lambda0: self.lambda0,
            p0,
        }
    }
}

/// `dp / d eps` at `eps = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDirection<T> {
    pub pdot: Vec<T>,
}

impl<T: Real> ParameterDirection<T> {
    pub fn new(pdot: Vec<T>) -> Self {
        Self { pdot }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            pdot: vec![T::zero(); n],
        }
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut pdot = vec![T::zero(); n];
        pdot[k] = T::one();
        Self { pdot }
    }

    pub fn is_zero(&self) -> bool {
        self.pdot.iter().all(|d| *d == T::zero())
    }
}

/// Validated problem family.
#[derive(Clone)]
pub struct ProblemFamily<T: Real> {
    source: Arc<dyn FamilySource<T>>,
    mode: DerivMode<T>,
}

impl<T: Real> fmt::Debug for ProblemFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemFamily")
            .field("order", &self.order())
            .field("size", &self.size())
            .field("n_params", &self.n_params())
            .field("mode", &self.mode)
            .finish()
    }
}

/// Number of sample points for the `det l_0` check.
pub const LEADING_CHECK_POINTS: usize = 33;

impl<T: Real> ProblemFamily<T> {
    /// Wraps `source`, checking dimensions and `det l_0 != 0` at `anchor`.
    pub fn new(
        source: Arc<dyn FamilySource<T>>,
        mode: DerivMode<T>,
        anchor: &ParameterPoint<T>,
    ) -> Result<Self> {
        let (m, n) = (source.order(), source.size());
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(
                "order and size must be positive".into(),
            ));
        }
        if anchor.p0.len() != source.n_params() {
            return Err(Error::DimensionMismatch(format!(
                "anchor has {} parameters, family expects {}",
                anchor.p0.len(),
                source.n_params()
            )));
        }
        let (lam, p) = (anchor.lambda0, anchor.p0.as_slice());
        for j in 0..=m {
            let c = source.coeff(j, 0, real(0.5), lam, p);
            if c.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "l_{j} is {}x{}, expected {n}x{n}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        let b = source.boundary(lam, p);
        if b.shape() != (m * n, 2 * m * n) {
            return Err(Error::DimensionMismatch(format!(
                "boundary matrix is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                m * n,
                2 * m * n
            )));
        }
        check_leading(&*source, lam, p)?;
        Ok(Self { source, mode })
    }

    pub fn order(&self) -> usize {
        self.source.order()
    }

    pub fn size(&self) -> usize {
        self.source.size()
    }

    pub fn n_params(&self) -> usize {
        self.source.n_params()
    }

    /// Length `2mN` of trace vectors.
    pub fn trace_len(&self) -> usize {
        2 * self.order() * self.size()
    }

    pub fn mode(&self) -> DerivMode<T> {
        self.mode
    }

    pub fn source(&self) -> &Arc<dyn FamilySource<T>> {
        &self.source
    }

    pub fn lambda_degree(&self) -> Option<usize> {
        self.source.lambda_degree()
    }

    pub fn coeff(&self, j: usize, dx: usize, x: T, lambda: Complex<T>, p: &[T]) -> CMatrix<T> {
        self.source.coeff(j, dx, x, lambda, p)
    }

    pub fn boundary(&self, lambda: Complex<T>, p: &[T]) -> CMatrix<T> {
        self.source.boundary(lambda, p)
    }

    /// `d^r/dlambda^r` of `d^dx l_j`, optionally along `pdot`.
    pub fn coeff_derivative(
        &self,
        j: usize,
        dx: usize,
        r: usize,
        pdot: Option<&[T]>,
        x: T,
        lambda: Complex<T>,
        p: &[T],
    ) -> Result<CMatrix<T>> {
        let n = self.size();
        self.derivative(
            r,
            pdot,
            lambda,
            p,
            (n, n),
            |part| self.source.coeff_partial(j, dx, part, x, lambda, p),
            |lam, pp| self.source.coeff(j, dx, x, lam, pp),
            || format!("l_{j} (dx = {dx}) lambda-order {r}"),
        )
    }

    /// `d^r/dlambda^r [A, B]`, optionally along `pdot`.
    pub fn boundary_derivative(
        &self,
        r: usize,
        pdot: Option<&[T]>,
        lambda: Complex<T>,
        p: &[T],
    ) -> Result<CMatrix<T>> {
        let (m, n) = (self.order(), self.size());
        self.derivative(
            r,
            pdot,
            lambda,
            p,
            (m * n, 2 * m * n),
            |part| self.source.boundary_partial(part, lambda, p),
            |lam, pp| self.source.boundary(lam, pp),
            || format!("boundary lambda-order {r}"),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn derivative(
        &self,
        r: usize,
        pdot: Option<&[T]>,
        lambda: Complex<T>,
        p: &[T],
        shape: (usize, usize),
        analytic: impl Fn(Partial) -> Option<CMatrix<T>>,
        plain: impl Fn(Complex<T>, &[T]) -> CMatrix<T>,
        what: impl Fn() -> String,
    ) -> Result<CMatrix<T>> {
        if let Some(d) = pdot {
            if d.iter().all(|v| *v == T::zero()) {
                return Ok(CMatrix::zeros(shape.0, shape.1));
            }
        }
        if r == 0 && pdot.is_none() {
            return Ok(plain(lambda, p));
        }
        match self.mode {
            DerivMode::Analytic => match pdot {
                None => {
                    analytic(Partial::lambda(r)).ok_or_else(|| Error::DerivativeUnavailable(what()))
                }
                Some(d) => {
                    let mut acc = CMatrix::zeros(shape.0, shape.1);
                    for (k, &dk) in d.iter().enumerate() {
                        if dk != T::zero() {
                            let part = analytic(Partial::mixed(r, k)).ok_or_else(|| {
                                Error::DerivativeUnavailable(format!("{} along p_{k}", what()))
                            })?;
                            acc += part * cplx(dk);
                        }
                    }
                    Ok(acc)
                }
            },
            DerivMode::FiniteDifference {
                lambda: scheme,
                param_step,
            } => {
                let g = |lam: Complex<T>| -> CMatrix<T> {
                    match pdot {
                        None => plain(lam, p),
                        Some(d) => directional_difference(|pp| plain(lam, pp), p, d, param_step),
                    }
                };
                Ok(lambda_derivative(g, r, lambda, scheme))
            }
        }
    }

    /// `(L u)(x)` with `L` evaluated at `(lambda, p)`.
    pub fn apply(&self, lambda: Complex<T>, p: &[T], u: &Eigenfunction<T>, x: T) -> CVector<T> {
        apply_coefficients(self.order(), |j| self.coeff(j, 0, x, lambda, p), u, x)
    }
}

/// `sum_j c_j u^(m-j)(x)` for coefficient matrices `c_j`.
pub fn apply_coefficients<T: Real>(
    order: usize,
    coeff: impl Fn(usize) -> CMatrix<T>,
    u: &Eigenfunction<T>,
    x: T,
) -> CVector<T> {
    let mut out = CVector::zeros(u.size());
    for j in 0..=order {
        out += coeff(j) * u.eval(x, order - j);
    }
    out
}

fn check_leading<T: Real>(source: &dyn FamilySource<T>, lambda: Complex<T>, p: &[T]) -> Result<()> {
    let n = source.size();
    let xs = chebyshev::cgl_points::<T>(LEADING_CHECK_POINTS);
    let mut dets = Vec::with_capacity(xs.len());
    let mut scale = T::zero();
    for &x in &xs {
        let l0 = source.coeff(0, 0, x, lambda, p);
        let entry = max_abs(&l0);
        let mut s = T::one();
        for _ in 0..n {
            s *= entry;
        }
        scale = scale.max(s);
        dets.push(modulus(l0.determinant()));
    }
    let floor = real::<T>(1e-12) * scale;
    for (&x, &d) in xs.iter().zip(&dets) {
        if d <= floor {
            return Err(Error::SingularLeadingCoefficient {
                x: nalgebra::try_convert(x).unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Central difference of `f` along `dir` at `p`.
fn directional_difference<T: Real>(
    f: impl Fn(&[T]) -> CMatrix<T>,
    p: &[T],
    dir: &[T],
    rel_step: T,
) -> CMatrix<T> {
    let pmax = p
        .iter()
        .fold(T::zero(), |a, &v| a.max(crate::scalar::abs(v)));
    let dmax = dir
        .iter()
        .fold(T::zero(), |a, &v| a.max(crate::scalar::abs(v)));
    let h = rel_step * (T::one() + pmax) / dmax;
    let plus: Vec<T> = p.iter().zip(dir).map(|(&a, &d)| a + h * d).collect();
    let minus: Vec<T> = p.iter().zip(dir).map(|(&a, &d)| a - h * d).collect();
    (f(&plus) - f(&minus)) / cplx(real::<T>(2.0) * h)
}

/// `d^r g / d lambda^r` at `lambda0` for an analytic matrix function `g`.
pub fn lambda_derivative<T: Real>(
    mut g: impl FnMut(Complex<T>) -> CMatrix<T>,
    r: usize,
    lambda0: Complex<T>,
    scheme: LambdaScheme<T>,
) -> CMatrix<T> {
    if r == 0 {
        return g(lambda0);
    }
    let scale = T::one() + modulus(lambda0);
    match scheme {
        LambdaScheme::Contour { radius, points } => {
            let rho = radius * scale;
            let k = points.max(r + 2);
            let two_pi = T::two_pi();
            let mut acc: Option<CMatrix<T>> = None;
            for q in 0..k {
                let theta = two_pi * real::<T>(q as f64) / real::<T>(k as f64);
                let w = cis(theta);
                let val = g(lambda0 + w * cplx(rho));
                // w^{-r}
                let wr = cis(-theta * real::<T>(r as f64));
                let term = val * wr;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            let fact = real::<T>(factorial(r) as f64);
            let denom = real::<T>(k as f64) * ComplexField::powi(rho, r as i32);
            acc.unwrap() * cplx(fact / denom)
        }
        LambdaScheme::Central { step } => {
            let h = step * scale;
            let half_r = real::<T>(r as f64) * real::<T>(0.5);
            let mut acc: Option<CMatrix<T>> = None;
            for k in 0..=r {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                let c = sign * real::<T>(binomial(r, k) as f64);
                let offset = (half_r - real::<T>(k as f64)) * h;
                let term = g(lambda0 + cplx(offset)) * cplx(c);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            acc.unwrap() / cplx(ComplexField::powi(h, r as i32))
        }
    }
}

type BoxedCoeff<T> = Box<dyn Fn(usize, usize, T, Complex<T>, &[T]) -> CMatrix<T> + Send + Sync>;
type BoxedBlock<T> = Box<dyn Fn(Complex<T>, &[T]) -> CMatrix<T> + Send + Sync>;

struct ClosureSource<T: Real> {
    order: usize,
    size: usize,
    n_params: usize,
    coeff: BoxedCoeff<T>,
    bc_a: BoxedBlock<T>,
    bc_b: BoxedBlock<T>,
}

impl<T: Real> FamilySource<T> for ClosureSource<T> {
    fn order(&self) -> usize {
        self.order
    }

    fn size(&self) -> usize {
        self.size
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn coeff(&self, j: usize, dx: usize, x: T, lambda: Complex<T>, p: &[T]) -> CMatrix<T> {
        (self.coeff)(j, dx, x, lambda, p)
    }

    fn boundary(&self, lambda: Complex<T>, p: &[T]) -> CMatrix<T> {
        let a = (self.bc_a)(lambda, p);
        let b = (self.bc_b)(lambda, p);
        let mn = self.order * self.size;
        let mut u = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
        if a.shape() == (mn, mn) && b.shape() == (mn, mn) {
            u.view_mut((0, 0), (mn, mn)).copy_from(&a);
            u.view_mut((0, mn), (mn, mn)).copy_from(&b);
        }
        u
    }
}

/// Builds a family from closures.
///
/// `coeff(j, dx, x, lambda, p)` must return `d^dx l_j / dx^dx` for
/// `dx <= m - j`; `bc_a` and `bc_b` return the `mN x mN` blocks of the
/// boundary matrix. Derivatives in `lambda` and `p` are taken numerically
/// unless `mode` is analytic, in which case every derivative request fails
/// with [`Error::DerivativeUnavailable`]; implement [`FamilySource`] directly
/// to supply analytic derivatives.
#[allow(clippy::too_many_arguments)]
pub fn make_problem<T, C, A, B>(
    order: usize,
    size: usize,
    n_params: usize,
    coeff: C,
    bc_a: A,
    bc_b: B,
    mode: DerivMode<T>,
    anchor: &ParameterPoint<T>,
) -> Result<ProblemFamily<T>>
where
    T: Real,
    C: Fn(usize, usize, T, Complex<T>, &[T]) -> CMatrix<T> + Send + Sync + 'static,
    A: Fn(Complex<T>, &[T]) -> CMatrix<T> + Send + Sync + 'static,
    B: Fn(Complex<T>, &[T]) -> CMatrix<T> + Send + Sync + 'static,
{
    let mn = order * size;
    let a = bc_a(anchor.lambda0, &anchor.p0);
    let b = bc_b(anchor.lambda0, &anchor.p0);
    if a.shape() != (mn, mn) || b.shape() != (mn, mn) {
        return Err(Error::DimensionMismatch(format!(
            "boundary blocks are {:?} and {:?}, expected {mn}x{mn}",
            a.shape(),
            b.shape()
        )));
    }
    let source = ClosureSource {
        order,
        size,
        n_params,
        coeff: Box::new(coeff),
        bc_a: Box::new(bc_a),
        bc_b: Box::new(bc_b),
    };
    ProblemFamily::new(Arc::new(source), mode, anchor)
}

type EvalFn<T> = dyn Fn(T, usize) -> CVector<T> + Send + Sync;

/// An `N`-vector function on `[0, 1]` with derivatives up to `max_deriv`.
#[derive(Clone)]
pub struct Eigenfunction<T: Real> {
    size: usize,
    max_deriv: usize,
    eval: Arc<EvalFn<T>>,
}

impl<T: Real> fmt::Debug for Eigenfunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Eigenfunction")
            .field("size", &self.size)
            .field("max_deriv", &self.max_deriv)
            .finish()
    }
}

impl<T: Real> Eigenfunction<T> {
    /// `eval(x, d)` returns the `d`-th derivative at `x`.
    pub fn new(
        size: usize,
        max_deriv: usize,
        eval: impl Fn(T, usize) -> CVector<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            size,
            max_deriv,
            eval: Arc::new(eval),
        }
    }

    pub fn zero(size: usize) -> Self {
        Self::new(size, usize::MAX, move |_, _| CVector::zeros(size))
    }

    /// `sum_k c_k x^k` with vector coefficients; all derivatives available.
    pub fn polynomial(coeffs: Vec<CVector<T>>) -> Self {
        let size = coeffs.first().map_or(0, |c| c.len());
        Self::new(size, usize::MAX, move |x, d| {
            let mut out = CVector::zeros(size);
            let mut xp = T::one();
            // d-th derivative of x^k is k!/(k-d)! x^(k-d)
            for (k, c) in coeffs.iter().enumerate().skip(d) {
                let falling = real::<T>((k - d + 1..=k).fold(1u64, |a, i| a * i as u64) as f64);
                out += c * cplx(falling * xp);
                xp *= x;
            }
            out
        })
    }

    /// Builds the callable from samples on the `n`-point Lobatto grid;
    /// derivatives come from the spectral differentiation matrix.
    pub fn from_chebyshev(samples: Vec<CVector<T>>, max_deriv: usize) -> Self {
        let n = samples.len();
        let size = samples.first().map_or(0, |c| c.len());
        let points = chebyshev::cgl_points::<T>(n);
        let weights = chebyshev::cgl_weights::<T>(n);
        let mats = chebyshev::diff_matrices::<T>(n, max_deriv);
        let derived: Vec<Vec<CVector<T>>> = mats
            .iter()
            .map(|d| {
                (0..n)
                    .map(|i| {
                        let mut acc = CVector::zeros(size);
                        for (k, s) in samples.iter().enumerate() {
                            acc += s * cplx(d[(i, k)]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self::new(size, max_deriv, move |x, d| {
            chebyshev::interpolate(&points, &weights, &derived[d], x)
        })
    }

    /// Samples on the `n`-point Lobatto grid (the dual representation).
    pub fn chebyshev_samples(&self, n: usize) -> Vec<CVector<T>> {
        chebyshev::cgl_points::<T>(n)
            .into_iter()
            .map(|x| self.eval(x, 0))
            .collect()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn max_deriv(&self) -> usize {
        self.max_deriv
    }

    pub fn eval(&self, x: T, d: usize) -> CVector<T> {
        assert!(
            d <= self.max_deriv,
            "derivative order {d} exceeds {}",
            self.max_deriv
        );
        (self.eval)(x, d)
    }

    pub fn value(&self, x: T) -> CVector<T> {
        self.eval(x, 0)
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let f = self.eval.clone();
        Self::new(self.size, self.max_deriv, move |x, d| f(x, d) * c)
    }

    /// `a self + b other`.
    pub fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Self {
        assert_eq!(self.size, other.size);
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(
            self.size,
            self.max_deriv.min(other.max_deriv),
            move |x, d| f(x, d) * a + g(x, d) * b,
        )
    }

    /// Unit `L^2` normalization.
    pub fn normalized(&self) -> Self {
        let norm = scalar_product(self, self).re.sqrt();
        if norm == T::zero() {
            return self.clone();
        }
        self.scaled(cplx(T::one() / norm))
    }
}

/// `(u(0), u'(0), .., u^(m-1)(0), u(1), .., u^(m-1)(1))`, stacked in `N`-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector<T: Real>(CVector<T>);

impl<T: Real> TraceVector<T> {
    pub fn new(entries: CVector<T>, order: usize, size: usize) -> Result<Self> {
        if entries.len() != 2 * order * size {
            return Err(Error::DimensionMismatch(format!(
                "trace vector has length {}, expected {}",
                entries.len(),
                2 * order * size
            )));
        }
        Ok(Self(entries))
    }

    pub fn as_vector(&self) -> &CVector<T> {
        &self.0
    }

    pub fn into_vector(self) -> CVector<T> {
        self.0
    }
}

pub fn trace_vector<T: Real>(u: &Eigenfunction<T>, order: usize, size: usize) -> TraceVector<T> {
    assert_eq!(u.size(), size, "eigenfunction size");
    let mut out = CVector::zeros(2 * order * size);
    for (end, x) in [T::zero(), T::one()].into_iter().enumerate() {
        for d in 0..order {
            let val = u.eval(x, d);
            let off = (end * order + d) * size;
            out.rows_mut(off, size).copy_from(&val);
        }
    }
    TraceVector(out)
}

/// `<u, v> = int_0^1 v^* u dx` with the default 64-node rule.
pub fn scalar_product<T: Real>(u: &Eigenfunction<T>, v: &Eigenfunction<T>) -> Complex<T> {
    scalar_product_with(&GaussLegendre::default(), u, v)
}

pub fn scalar_product_with<T: Real>(
    rule: &GaussLegendre<T>,
    u: &Eigenfunction<T>,
    v: &Eigenfunction<T>,
) -> Complex<T> {
    inner(rule, |x| u.value(x), |x| v.value(x))
}

/// `int_0^1 g(x)^* f(x) dx` for pointwise-evaluated vector functions.
pub fn inner<T: Real>(
    rule: &GaussLegendre<T>,
    f: impl Fn(T) -> CVector<T>,
    g: impl Fn(T) -> CVector<T>,
) -> Complex<T> {
    rule.integrate_complex(|x| g(x).dotc(&f(x)))
}

/// Which coefficient set of a [`TaylorData`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorTerm {
    /// `L_r0 = d^r L / d lambda^r`
    Lambda(usize),
    /// `L_r1 = sum_k pdot_k d^r/dlambda^r d/dp_k L`
    Direction(usize),
}

/// Taylor coefficients of `L` and `[A, B]` at a point along a direction.
///
/// Boundary blocks are stored; operator coefficients are evaluated lazily in
/// `x` (they are needed at quadrature nodes only).
#[derive(Debug, Clone)]
pub struct TaylorData<T: Real> {
    family: ProblemFamily<T>,
    point: ParameterPoint<T>,
    dir: ParameterDirection<T>,
    r_max: usize,
    u_r0: Vec<CMatrix<T>>,
    u_r1: Vec<CMatrix<T>>,
}

/// Builds `L_r0`, `U_r0` for `r <= r_max` and `L_01`, `U_01`.
pub fn taylor_data<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    dir: &ParameterDirection<T>,
    r_max: usize,
) -> Result<TaylorData<T>> {
    if r_max < 1 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    if dir.pdot.len() != family.n_params() || point.p0.len() != family.n_params() {
        return Err(Error::DimensionMismatch(
            "parameter direction length".into(),
        ));
    }
    let (lam, p) = (point.lambda0, point.p0.as_slice());
    let u_r0 = (0..=r_max)
        .map(|r| family.boundary_derivative(r, None, lam, p))
        .collect::<Result<Vec<_>>>()?;
    let u_r1 = (0..=r_max)
        .map(|r| family.boundary_derivative(r, Some(&dir.pdot), lam, p))
        .collect::<Result<Vec<_>>>()?;
    // probe the operator coefficients so that lazy evaluation cannot fail later
    let probe = real::<T>(0.5);
    for j in 0..=family.order() {
        for r in 0..=r_max {
            family.coeff_derivative(j, 0, r, None, probe, lam, p)?;
        }
        family.coeff_derivative(j, 0, 0, Some(&dir.pdot), probe, lam, p)?;
        family.coeff_derivative(j, 0, 1, Some(&dir.pdot), probe, lam, p)?;
    }
    Ok(TaylorData {
        family: family.clone(),
        point: point.clone(),
        dir: dir.clone(),
        r_max,
        u_r0,
        u_r1,
    })
}

impl<T: Real> TaylorData<T> {
    pub fn family(&self) -> &ProblemFamily<T> {
        &self.family
    }

    pub fn point(&self) -> &ParameterPoint<T> {
        &self.point
    }

    pub fn direction(&self) -> &ParameterDirection<T> {
        &self.dir
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    /// `U_r0`.
    pub fn u_r0(&self, r: usize) -> &CMatrix<T> {
        &self.u_r0[r]
    }

    /// `U_01`.
    pub fn u_01(&self) -> &CMatrix<T> {
        &self.u_r1[0]
    }

    pub fn u_r1(&self, r: usize) -> &CMatrix<T> {
        &self.u_r1[r]
    }

    pub fn boundary(&self, term: TaylorTerm) -> &CMatrix<T> {
        match term {
            TaylorTerm::Lambda(r) => &self.u_r0[r],
            TaylorTerm::Direction(r) => &self.u_r1[r],
        }
    }

    /// Coefficient `j` (x-derivative `dx`) of the selected term at `x`.
    pub fn coeff(&self, term: TaylorTerm, j: usize, dx: usize, x: T) -> CMatrix<T> {
        let (lam, p) = (self.point.lambda0, self.point.p0.as_slice());
        let res = match term {
            TaylorTerm::Lambda(r) => self.family.coeff_derivative(j, dx, r, None, x, lam, p),
            TaylorTerm::Direction(r) => {
                self.family
                    .coeff_derivative(j, dx, r, Some(&self.dir.pdot), x, lam, p)
            }
        };
        res.expect("coefficient derivative became unavailable after probing")
    }

    /// `(L_term u)(x)`.
    pub fn apply(&self, term: TaylorTerm, u: &Eigenfunction<T>, x: T) -> CVector<T> {
        apply_coefficients(self.family.order(), |j| self.coeff(term, j, 0, x), u, x)
    }
}
