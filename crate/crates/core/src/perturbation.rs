//! First-order splitting of multiple eigenvalues under a parameter
//! perturbation `p = p0 + eps pdot`.
//!
//! Semi-simple `mu`-fold eigenvalues split as `lambda0 + eps lambda1` with
//! `det(F + lambda1 G) = 0`,
//!
//! ```text
//! F_ij = <L_01 u_j, v_i> + (V~_0 v_i)^* U_01 u_j
//! G_ij = <L_10 u_j, v_i> + (V~_0 v_i)^* U_10 u_j
//! ```
//!
//! and a single Keldysh chain of length `mu` splits as
//! `lambda0 + lambda1 eps^(1/mu)` with `lambda1^mu = -num / den`.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::adjoint::{
    adjoint_boundary_derivative, adjoint_expression_derivative, to_f64, AdjointRealization,
};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, full_svd, lu_solve, smallest_right_singular_vector};
use crate::problem::{
    trace_vector, Eigenfunction, ParameterPoint, ProblemFamily, TaylorData, TaylorTerm,
};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cis, cplx, factorial, fnorm, modulus, real, vnorm, CMatrix, CVector, Real};

/// Residual tolerance for accepting eigenfunctions (unit `L^2` norm).
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// `G` counts as singular when `sigma_min(G) < PENCIL_TOL ||G||`.
pub const PENCIL_TOL: f64 = 1e-10;

/// A semi-simple `mu`-fold eigenvalue with direct and adjoint eigenfunctions.
#[derive(Debug, Clone)]
pub struct SemiSimpleGroup<T: Real> {
    pub lambda0: Complex<T>,
    pub eigenfns: Vec<Eigenfunction<T>>,
    pub adjoint_eigenfns: Vec<Eigenfunction<T>>,
    pub adjoint: AdjointRealization<T>,
}

impl<T: Real> SemiSimpleGroup<T> {
    /// Normalizes all functions to unit `L^2` norm and checks the direct and
    /// adjoint eigen-residuals against [`DEFAULT_RESIDUAL_TOL`].
    pub fn new(
        family: &ProblemFamily<T>,
        point: &ParameterPoint<T>,
        eigenfns: Vec<Eigenfunction<T>>,
        adjoint_eigenfns: Vec<Eigenfunction<T>>,
        adjoint: AdjointRealization<T>,
    ) -> Result<Self> {
        Self::with_tolerance(
            family,
            point,
            eigenfns,
            adjoint_eigenfns,
            adjoint,
            real(DEFAULT_RESIDUAL_TOL),
        )
    }

    pub fn with_tolerance(
        family: &ProblemFamily<T>,
        point: &ParameterPoint<T>,
        eigenfns: Vec<Eigenfunction<T>>,
        adjoint_eigenfns: Vec<Eigenfunction<T>>,
        adjoint: AdjointRealization<T>,
        tol: T,
    ) -> Result<Self> {
        if eigenfns.is_empty() || eigenfns.len() != adjoint_eigenfns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenfunctions and {} adjoint eigenfunctions",
                eigenfns.len(),
                adjoint_eigenfns.len()
            )));
        }
        let eigenfns: Vec<_> = eigenfns.iter().map(Eigenfunction::normalized).collect();
        let adjoint_eigenfns: Vec<_> = adjoint_eigenfns
            .iter()
            .map(Eigenfunction::normalized)
            .collect();
        let rule = GaussLegendre::default();
        let (m, n) = (family.order(), family.size());
        for (k, u) in eigenfns.iter().enumerate() {
            let r = l2_norm(&rule, |x| family.apply(point.lambda0, &point.p0, u, x));
            check(r, tol, || format!("eigenfunction {k}"))?;
            let b = vnorm(&(&adjoint.completed.u * trace_vector(u, m, n).into_vector()));
            check(b, tol, || {
                format!("boundary condition of eigenfunction {k}")
            })?;
        }
        let expr = adjoint.expression();
        for (k, v) in adjoint_eigenfns.iter().enumerate() {
            let r = l2_norm(&rule, |x| expr.apply(v, x));
            check(r, tol, || format!("adjoint eigenfunction {k}"))?;
            let b = vnorm(&(&adjoint.v * trace_vector(v, m, n).into_vector()));
            check(b, tol, || {
                format!("adjoint boundary condition of eigenfunction {k}")
            })?;
        }
        Ok(Self {
            lambda0: point.lambda0,
            eigenfns,
            adjoint_eigenfns,
            adjoint,
        })
    }

    pub fn mu(&self) -> usize {
        self.eigenfns.len()
    }
}

fn check<T: Real>(residual: T, tol: T, what: impl Fn() -> String) -> Result<()> {
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::ResidualTooLarge {
            what: what(),
            residual: to_f64(residual),
            tol: to_f64(tol),
        })
    }
}

fn l2_norm<T: Real>(rule: &GaussLegendre<T>, f: impl Fn(T) -> CVector<T>) -> T {
    rule.integrate(|x| {
        let v = f(x);
        let n = vnorm(&v);
        n * n
    })
    .sqrt()
}

/// A Keldysh chain `u_0 .. u_{mu-1}` with its adjoint chain.
///
/// The constructor checks only the shape; [`keldysh_residuals`] validates
/// the chain equations. A chain of length one is an ordinary simple
/// eigenvalue.
#[derive(Debug, Clone)]
pub struct KeldyshChain<T: Real> {
    pub lambda0: Complex<T>,
    pub direct: Vec<Eigenfunction<T>>,
    pub adjoint: Vec<Eigenfunction<T>>,
    pub adjoint_real: AdjointRealization<T>,
}

impl<T: Real> KeldyshChain<T> {
    pub fn new(
        lambda0: Complex<T>,
        direct: Vec<Eigenfunction<T>>,
        adjoint: Vec<Eigenfunction<T>>,
        adjoint_real: AdjointRealization<T>,
    ) -> Result<Self> {
        if direct.is_empty() || direct.len() != adjoint.len() {
            return Err(Error::DimensionMismatch(format!(
                "chain lengths {} and {}",
                direct.len(),
                adjoint.len()
            )));
        }
        Ok(Self {
            lambda0,
            direct,
            adjoint,
            adjoint_real,
        })
    }

    pub fn mu(&self) -> usize {
        self.direct.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Simple,
    SemiSimple,
    NonDerogatory,
}

#[derive(Debug, Clone)]
pub struct SplittingResult<T: Real> {
    /// First-order coefficients, sorted by `(Re, Im)`.
    pub lambda1: Vec<Complex<T>>,
    pub kind: SplitKind,
    /// Exponent denominator: `lambda = lambda0 + lambda1 eps^(1/order)`.
    pub order: usize,
    pub f: Option<CMatrix<T>>,
    pub g: Option<CMatrix<T>>,
    pub numerator: Option<Complex<T>>,
    pub denominator: Option<Complex<T>>,
    /// Unit coefficient vectors `c`, one per entry of `lambda1` (semi-simple).
    pub c_vectors: Vec<CVector<T>>,
    /// Number of infinite pencil eigenvalues (semi-simple).
    pub infinite: usize,
    /// The first Puiseux coefficient vanishes in this direction.
    pub degenerate: bool,
}

impl<T: Real> SplittingResult<T> {
    /// First-order prediction `lambda0 + lambda1 eps^(1/order)` per branch.
    pub fn predict(&self, lambda0: Complex<T>, eps: T) -> Vec<Complex<T>> {
        let s = if self.order == 1 {
            eps
        } else {
            eps.powf(T::one() / real::<T>(self.order as f64))
        };
        self.lambda1.iter().map(|l| lambda0 + l * cplx(s)).collect()
    }
}

fn cmp_complex<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// `<L_term u, v> + (V~_0 v)^* U_term u` and a magnitude bound for it.
struct Pairing<T> {
    value: Complex<T>,
    scale: T,
}

fn pairing<T: Real>(
    td: &TaylorData<T>,
    term: TaylorTerm,
    u: &Eigenfunction<T>,
    v: &Eigenfunction<T>,
    adjoint: &AdjointRealization<T>,
) -> Pairing<T> {
    let rule = GaussLegendre::<T>::default();
    let mut vol = Complex::new(T::zero(), T::zero());
    let mut vol_scale = T::zero();
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let lu = td.apply(term, u, x);
        let vx = v.value(x);
        vol += vx.dotc(&lu) * cplx(w);
        vol_scale += w * vnorm(&vx) * vnorm(&lu);
    }
    let fam = td.family();
    let (m, n) = (fam.order(), fam.size());
    let a = &adjoint.v_tilde * trace_vector(v, m, n).into_vector();
    let b = td.boundary(term) * trace_vector(u, m, n).into_vector();
    let bnd = a.dotc(&b);
    Pairing {
        value: vol + bnd,
        scale: vol_scale + vnorm(&a) * vnorm(&b),
    }
}

/// `F` and `G` for a semi-simple group along the direction of `td`.
pub fn fg_matrices<T: Real>(
    group: &SemiSimpleGroup<T>,
    td: &TaylorData<T>,
) -> (CMatrix<T>, CMatrix<T>) {
    let mu = group.mu();
    let mut f = CMatrix::zeros(mu, mu);
    let mut g = CMatrix::zeros(mu, mu);
    for i in 0..mu {
        for j in 0..mu {
            let (u, v) = (&group.eigenfns[j], &group.adjoint_eigenfns[i]);
            f[(i, j)] = pairing(td, TaylorTerm::Direction(0), u, v, &group.adjoint).value;
            g[(i, j)] = pairing(td, TaylorTerm::Lambda(1), u, v, &group.adjoint).value;
        }
    }
    (f, g)
}

/// Solves `-F c = lambda1 G c`.
pub fn semisimple_split<T: Real>(f: &CMatrix<T>, g: &CMatrix<T>) -> Result<SplittingResult<T>> {
    let mu = f.nrows();
    if f.shape() != (mu, mu) || g.shape() != (mu, mu) || mu == 0 {
        return Err(Error::DimensionMismatch(
            "F and G must be square of equal size".into(),
        ));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut lambda1 = Vec::with_capacity(mu);
    let mut infinite = 0;
    if mu == 1 {
        let (fv, gv) = (f[(0, 0)], g[(0, 0)]);
        if gv == zero {
            if fv == zero {
                return Err(Error::DegeneratePencil);
            }
            infinite = 1;
        } else {
            lambda1.push(-(fv / gv));
        }
    } else {
        let gnorm = fnorm(g);
        let gs = full_svd(g).singular_values;
        if gnorm > T::zero() && gs[mu - 1] > real::<T>(PENCIL_TOL) * gnorm {
            let x = lu_solve(g, f).ok_or(Error::DegeneratePencil)?;
            lambda1 = eigenvalues(&(-x))?;
        } else {
            let (sigma, m) = regular_shift(f, g)?;
            let mnorm = fnorm(&m);
            for theta in eigenvalues(&m)? {
                if modulus(theta) <= real::<T>(1e-12) * mnorm {
                    infinite += 1;
                } else {
                    lambda1.push(sigma - Complex::new(T::one(), T::zero()) / theta);
                }
            }
        }
    }
    lambda1.sort_by(cmp_complex);
    let c_vectors = lambda1
        .iter()
        .map(|&l| {
            if mu == 1 {
                CVector::from_element(1, Complex::new(T::one(), T::zero()))
            } else {
                smallest_right_singular_vector(&(f + g * l)).1
            }
        })
        .collect();
    Ok(SplittingResult {
        lambda1,
        kind: SplitKind::SemiSimple,
        order: 1,
        f: Some(f.clone()),
        g: Some(g.clone()),
        numerator: None,
        denominator: None,
        c_vectors,
        infinite,
        degenerate: false,
    })
}

/// Finds `sigma` with `F + sigma G` well conditioned and returns
/// `(sigma, (F + sigma G)^-1 G)`; fails when the pencil is not regular.
fn regular_shift<T: Real>(f: &CMatrix<T>, g: &CMatrix<T>) -> Result<(Complex<T>, CMatrix<T>)> {
    let fnm = fnorm(f);
    let gnm = fnorm(g);
    let scale = if gnm > T::zero() && fnm > T::zero() {
        fnm / gnm
    } else {
        T::one()
    };
    for (re, im) in [(0.73, 0.31), (-1.29, 0.87), (2.11, -1.67), (-0.41, -2.53)] {
        let sigma = Complex::new(real::<T>(re) * scale, real::<T>(im) * scale);
        let a = f + g * sigma;
        let s = full_svd(&a).singular_values;
        let mu = s.len();
        if s[0] > T::zero() && s[mu - 1] > real::<T>(1e-12) * s[0] {
            if let Some(m) = lu_solve(&a, g) {
                return Ok((sigma, m));
            }
        }
    }
    Err(Error::DegeneratePencil)
}

/// Simple-eigenvalue derivative `lambda1 = -num / den`.
pub fn simple_split<T: Real>(
    group: &SemiSimpleGroup<T>,
    td: &TaylorData<T>,
) -> Result<SplittingResult<T>> {
    if group.mu() != 1 {
        return Err(Error::InvalidArgument(format!(
            "simple_split needs mu = 1, got {}",
            group.mu()
        )));
    }
    let (u, v) = (&group.eigenfns[0], &group.adjoint_eigenfns[0]);
    let num = pairing(td, TaylorTerm::Direction(0), u, v, &group.adjoint).value;
    let den = pairing(td, TaylorTerm::Lambda(1), u, v, &group.adjoint);
    guard_denominator(&den)?;
    Ok(SplittingResult {
        lambda1: vec![-(num / den.value)],
        kind: SplitKind::Simple,
        order: 1,
        f: None,
        g: None,
        numerator: Some(num),
        denominator: Some(den.value),
        c_vectors: Vec::new(),
        infinite: 0,
        degenerate: false,
    })
}

fn guard_denominator<T: Real>(den: &Pairing<T>) -> Result<()> {
    let tiny = real::<T>(PENCIL_TOL) * den.scale;
    if modulus(den.value) <= tiny || den.value == Complex::new(T::zero(), T::zero()) {
        return Err(Error::VanishingDenominator {
            value: to_f64(modulus(den.value)),
            scale: to_f64(den.scale),
        });
    }
    Ok(())
}

/// Residual norms of a Keldysh chain.
#[derive(Debug, Clone, PartialEq)]
pub struct KeldyshReport<T> {
    /// `|| L_0 u_j + sum_r L_r0 u_{j-r} / r! ||`, `j = 0..mu-1`.
    pub direct: Vec<T>,
    pub direct_boundary: Vec<T>,
    /// Same for the adjoint chain with `conj(lambda)`-derivatives.
    pub adjoint: Vec<T>,
    pub adjoint_boundary: Vec<T>,
    /// Orthogonality sums, `j = 1..mu-1`.
    pub orthogonality: Vec<T>,
}

impl<T: Real> KeldyshReport<T> {
    pub fn max(&self) -> T {
        self.direct
            .iter()
            .chain(&self.direct_boundary)
            .chain(&self.adjoint)
            .chain(&self.adjoint_boundary)
            .chain(&self.orthogonality)
            .fold(T::zero(), |a, &b| a.max(b))
    }
}

/// Residuals of the direct and adjoint chain equations and of the
/// orthogonality conditions. `td` must carry `lambda`-derivatives up to
/// order `mu - 1`.
pub fn keldysh_residuals<T: Real>(
    chain: &KeldyshChain<T>,
    td: &TaylorData<T>,
) -> Result<KeldyshReport<T>> {
    let mu = chain.mu();
    if td.r_max() + 1 < mu {
        return Err(Error::InvalidArgument(format!(
            "Taylor data of order {} for a chain of length {mu}",
            td.r_max()
        )));
    }
    let family = td.family();
    let point = td.point();
    let (m, n) = (family.order(), family.size());
    let rule = GaussLegendre::<T>::default();
    let inv_fact = |r: usize| cplx(T::one() / real::<T>(factorial(r) as f64));
    let u_traces: Vec<CVector<T>> = chain
        .direct
        .iter()
        .map(|u| trace_vector(u, m, n).into_vector())
        .collect();
    let v_traces: Vec<CVector<T>> = chain
        .adjoint
        .iter()
        .map(|v| trace_vector(v, m, n).into_vector())
        .collect();

    let mut direct = Vec::with_capacity(mu);
    let mut direct_boundary = Vec::with_capacity(mu);
    for j in 0..mu {
        direct.push(l2_norm(&rule, |x| {
            let mut acc = td.apply(TaylorTerm::Lambda(0), &chain.direct[j], x);
            for r in 1..=j {
                acc += td.apply(TaylorTerm::Lambda(r), &chain.direct[j - r], x) * inv_fact(r);
            }
            acc
        }));
        let mut b = td.u_r0(0) * &u_traces[j];
        for r in 1..=j {
            b += td.u_r0(r) * &u_traces[j - r] * inv_fact(r);
        }
        direct_boundary.push(vnorm(&b));
    }

    let exprs = (0..mu)
        .map(|r| adjoint_expression_derivative(family, point, r))
        .collect::<Result<Vec<_>>>()?;
    let vder = (0..mu)
        .map(|r| adjoint_boundary_derivative(family, point, &chain.adjoint_real, r))
        .collect::<Result<Vec<_>>>()?;
    let mut adjoint = Vec::with_capacity(mu);
    let mut adjoint_boundary = Vec::with_capacity(mu);
    for j in 0..mu {
        adjoint.push(l2_norm(&rule, |x| {
            let mut acc = exprs[0].apply(&chain.adjoint[j], x);
            for r in 1..=j {
                acc += exprs[r].apply(&chain.adjoint[j - r], x) * inv_fact(r);
            }
            acc
        }));
        let mut b = &vder[0] * &v_traces[j];
        for r in 1..=j {
            b += &vder[r] * &v_traces[j - r] * inv_fact(r);
        }
        adjoint_boundary.push(vnorm(&b));
    }

    let v0 = &chain.adjoint[0];
    let orthogonality = (1..mu)
        .map(|j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 1..=j {
                acc += pairing(
                    td,
                    TaylorTerm::Lambda(r),
                    &chain.direct[j - r],
                    v0,
                    &chain.adjoint_real,
                )
                .value
                    * inv_fact(r);
            }
            modulus(acc)
        })
        .collect();
    Ok(KeldyshReport {
        direct,
        direct_boundary,
        adjoint,
        adjoint_boundary,
        orthogonality,
    })
}

/// Puiseux splitting of a non-derogatory eigenvalue: the `mu` complex
/// `mu`-th roots of `-num / den`. `td` must carry `lambda`-derivatives up to
/// order `mu`.
pub fn nonderog_split<T: Real>(
    chain: &KeldyshChain<T>,
    td: &TaylorData<T>,
) -> Result<SplittingResult<T>> {
    let mu = chain.mu();
    if td.r_max() < mu {
        return Err(Error::InvalidArgument(format!(
            "Taylor data of order {} for a chain of length {mu}",
            td.r_max()
        )));
    }
    let (u0, v0) = (&chain.direct[0], &chain.adjoint[0]);
    let num = pairing(td, TaylorTerm::Direction(0), u0, v0, &chain.adjoint_real);
    let mut den = Pairing {
        value: Complex::new(T::zero(), T::zero()),
        scale: T::zero(),
    };
    for r in 1..=mu {
        let w = T::one() / real::<T>(factorial(r) as f64);
        let p = pairing(
            td,
            TaylorTerm::Lambda(r),
            &chain.direct[mu - r],
            v0,
            &chain.adjoint_real,
        );
        den.value += p.value * cplx(w);
        den.scale += p.scale * w;
    }
    guard_denominator(&den)?;
    let floor = T::default_epsilon() * real::<T>(64.0) * num.scale;
    let degenerate = modulus(num.value) <= floor;
    let radicand = -(num.value / den.value);
    let mut lambda1 = if degenerate {
        vec![Complex::new(T::zero(), T::zero()); mu]
    } else if mu == 1 {
        vec![radicand]
    } else {
        let root = modulus(radicand).powf(T::one() / real::<T>(mu as f64));
        let arg = radicand.im.atan2(radicand.re);
        (0..mu)
            .map(|k| {
                let theta = (arg + T::two_pi() * real::<T>(k as f64)) / real::<T>(mu as f64);
                cis(theta) * cplx(root)
            })
            .collect()
    };
    lambda1.sort_by(cmp_complex);
    Ok(SplittingResult {
        lambda1,
        kind: SplitKind::NonDerogatory,
        order: mu,
        f: None,
        g: None,
        numerator: Some(num.value),
        denominator: Some(den.value),
        c_vectors: Vec::new(),
        infinite: 0,
        degenerate,
    })
}

/// `w_r` of the eigenfunction expansion `u = sum_r w_r eps^(r/mu)`.
#[derive(Debug, Clone)]
pub struct Reconstruction<T: Real> {
    pub w: Eigenfunction<T>,
    /// Terms involving `lambda2` and beyond were dropped (`r >= 2`).
    pub truncated: bool,
}

/// `w_0 = u_0`, `w_r = lambda1^r u_r` (first-order truncation for `r >= 2`).
pub fn reconstruct_wr<T: Real>(
    chain: &KeldyshChain<T>,
    lambda1: Complex<T>,
    r: usize,
) -> Result<Reconstruction<T>> {
    if r >= chain.mu() {
        return Err(Error::InvalidArgument(format!(
            "r = {r} exceeds chain length {}",
            chain.mu()
        )));
    }
    if r == 0 {
        return Ok(Reconstruction {
            w: chain.direct[0].clone(),
            truncated: false,
        });
    }
    let mut coef = Complex::new(T::one(), T::zero());
    for _ in 0..r {
        coef *= lambda1;
    }
    Ok(Reconstruction {
        w: chain.direct[r].scaled(coef),
        truncated: r >= 2,
    })
}
