use nalgebra::DMatrix;
use num_complex::Complex;

use crate::chebyshev::{cgl_points, diff_matrices};
use crate::error::{Error, Result};
use crate::linalg::{balance, eigenvalues, lu_solve};
use crate::problem::ProblemFamily;
use crate::scalar::{
    cis, cplx, fnorm, modulus, precision_tol, precision_tol_sqrt, real, vnorm, CMatrix, CVector,
    Real,
};

/// Collocated boundary eigenvalue problem `sum_d lambda^d P_d x = 0` and its
/// first companion linearization `A z = lambda B z`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem<T: Real> {
    pub n_nodes: usize,
    pub lambda_degree: usize,
    /// `lambda_degree * N * n_nodes`.
    pub companion_dim: usize,
    /// `P_0 .. P_d`, each `N n x N n`.
    pub coefficients: Vec<CMatrix<T>>,
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
    pub grid: Vec<T>,
    pub size: usize,
    /// Equation rows that hold boundary conditions.
    pub boundary_rows: Vec<usize>,
}

impl<T: Real> DiscreteProblem<T> {
    /// `P(lambda) = sum_d lambda^d P_d`.
    pub fn matrix(&self, lambda: Complex<T>) -> CMatrix<T> {
        let mut out = self.coefficients[self.lambda_degree].clone();
        for d in (0..self.lambda_degree).rev() {
            out = out * lambda + &self.coefficients[d];
        }
        out
    }
}

/// Equation rows replaced by boundary conditions: the first `ceil(m/2)`
/// nodes at `x = 0` and the last `floor(m/2)` nodes at `x = 1`, for every
/// component.
fn boundary_rows(order: usize, size: usize, n: usize) -> Vec<usize> {
    let left = order.div_ceil(2);
    let right = order / 2;
    let mut rows = Vec::with_capacity(order * size);
    for a in 0..size {
        for i in 0..left {
            rows.push(a * n + i);
        }
        for i in n - right..n {
            rows.push(a * n + i);
        }
    }
    rows
}

fn assemble<T: Real>(
    family: &ProblemFamily<T>,
    p: &[T],
    lambda: Complex<T>,
    grid: &[T],
    dmats: &[DMatrix<T>],
    rows: &[usize],
) -> CMatrix<T> {
    let (m, big_n) = (family.order(), family.size());
    let n = grid.len();
    let s = big_n * n;
    let mut out = CMatrix::<T>::zeros(s, s);
    let is_bc: Vec<bool> = {
        let mut v = vec![false; s];
        for &r in rows {
            v[r] = true;
        }
        v
    };
    for (i, &x) in grid.iter().enumerate() {
        let coeffs: Vec<CMatrix<T>> = (0..=m).map(|j| family.coeff(j, 0, x, lambda, p)).collect();
        for a in 0..big_n {
            let row = a * n + i;
            if is_bc[row] {
                continue;
            }
            for (j, l) in coeffs.iter().enumerate() {
                let d = &dmats[m - j];
                for b in 0..big_n {
                    let c = l[(a, b)];
                    if c == Complex::new(T::zero(), T::zero()) {
                        continue;
                    }
                    for k in 0..n {
                        out[(row, b * n + k)] += c * cplx(d[(i, k)]);
                    }
                }
            }
        }
    }
    let u = family.boundary(lambda, p);
    for (r, &row) in rows.iter().enumerate() {
        for end in 0..2 {
            let node = if end == 0 { 0 } else { n - 1 };
            for d in 0..m {
                for b in 0..big_n {
                    let c = u[(r, (end * m + d) * big_n + b)];
                    if c == Complex::new(T::zero(), T::zero()) {
                        continue;
                    }
                    for k in 0..n {
                        out[(row, b * n + k)] += c * cplx(dmats[d][(node, k)]);
                    }
                }
            }
        }
    }
    out
}

/// Collocates `family` at parameters `p` on `n_nodes` Lobatto points.
///
/// The `lambda`-coefficients are extracted from `lambda_degree + 3` samples
/// on the unit circle; nonvanishing coefficients above `lambda_degree` give
/// [`Error::NonPolynomialLambda`]. Fewer than 8 nodes are accepted but
/// inaccurate.
pub fn collocate<T: Real>(
    family: &ProblemFamily<T>,
    p: &[T],
    lambda_degree: usize,
    n_nodes: usize,
) -> Result<DiscreteProblem<T>> {
    if lambda_degree == 0 {
        return Err(Error::InvalidArgument(
            "lambda degree must be at least 1".into(),
        ));
    }
    let m = family.order();
    if n_nodes < m + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} collocation nodes",
            m + 2
        )));
    }
    if p.len() != family.n_params() {
        return Err(Error::DimensionMismatch("parameter vector length".into()));
    }
    let grid = cgl_points::<T>(n_nodes);
    let dmats = diff_matrices::<T>(n_nodes, m);
    let rows = boundary_rows(m, family.size(), n_nodes);
    let k = lambda_degree + 3;
    let samples: Vec<CMatrix<T>> = (0..k)
        .map(|q| {
            let lam = cis(T::two_pi() * real::<T>(q as f64) / real::<T>(k as f64));
            assemble(family, p, lam, &grid, &dmats, &rows)
        })
        .collect();
    let inv_k = cplx(T::one() / real::<T>(k as f64));
    let coeffs: Vec<CMatrix<T>> = (0..k)
        .map(|d| {
            let mut acc = samples[0].clone();
            for (q, smp) in samples.iter().enumerate().skip(1) {
                let w = cis(-T::two_pi() * real::<T>((q * d) as f64) / real::<T>(k as f64));
                acc += smp * w;
            }
            acc * inv_k
        })
        .collect();
    let top = coeffs.iter().map(fnorm).fold(T::zero(), |a, b| a.max(b));
    for c in &coeffs[lambda_degree + 1..] {
        if fnorm(c) > precision_tol::<T>(1e-10) * top {
            return Err(Error::NonPolynomialLambda {
                degree: lambda_degree,
            });
        }
    }
    let mut coefficients: Vec<CMatrix<T>> = coeffs.into_iter().take(lambda_degree + 1).collect();
    // snap round-off of the sampling to exact zeros
    for c in &mut coefficients {
        let floor = real::<T>(64.0) * T::default_epsilon() * top;
        c.apply(|z| {
            if modulus(*z) < floor {
                *z = Complex::new(T::zero(), T::zero());
            }
        });
    }
    let s = family.size() * n_nodes;
    let dim = lambda_degree * s;
    let mut a = CMatrix::<T>::zeros(dim, dim);
    let mut b = CMatrix::<T>::identity(dim, dim);
    for blk in 0..lambda_degree - 1 {
        for i in 0..s {
            a[(blk * s + i, (blk + 1) * s + i)] = Complex::new(T::one(), T::zero());
        }
    }
    let last = (lambda_degree - 1) * s;
    for (d, c) in coefficients.iter().take(lambda_degree).enumerate() {
        a.view_mut((last, d * s), (s, s)).copy_from(&(-c));
    }
    b.view_mut((last, last), (s, s))
        .copy_from(&coefficients[lambda_degree]);
    Ok(DiscreteProblem {
        n_nodes,
        lambda_degree,
        companion_dim: dim,
        coefficients,
        a,
        b,
        grid,
        size: family.size(),
        boundary_rows: rows,
    })
}

/// Axis-aligned box in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub re: (T, T),
    pub im: (T, T),
}

impl<T: Real> Window<T> {
    pub fn new(re: (T, T), im: (T, T)) -> Self {
        Self { re, im }
    }

    /// Square of half-width `r` around `center`.
    pub fn around(center: Complex<T>, r: T) -> Self {
        Self {
            re: (center.re - r, center.re + r),
            im: (center.im - r, center.im + r),
        }
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    pub fn is_empty(&self) -> bool {
        !(self.re.0 <= self.re.1 && self.im.0 <= self.im.1)
    }

    pub fn center(&self) -> Complex<T> {
        let h = real::<T>(0.5);
        Complex::new((self.re.0 + self.re.1) * h, (self.im.0 + self.im.1) * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSettings<T> {
    /// Eigenvectors whose Chebyshev tail exceeds this fraction of their
    /// largest coefficient are treated as unresolved (spurious).
    pub resolution_tol: T,
    /// Eigenvalues closer than `cluster_tol * (1 + |lambda|)` form a
    /// cluster and are all replaced by the cluster mean. A defective
    /// eigenvalue of multiplicity `k` comes out of the dense solver spread
    /// over a circle of radius `~ eps_mach^(1/k)`; the mean is accurate to
    /// `O(eps_mach)`. Zero disables clustering.
    pub cluster_tol: T,
}

impl<T: Real> Default for SpectrumSettings<T> {
    fn default() -> Self {
        Self {
            resolution_tol: precision_tol_sqrt(1e-6),
            cluster_tol: precision_tol_sqrt(1e-6),
        }
    }
}

/// Eigenvalues of the discrete problem inside `window`, sorted by `(Re, Im)`.
pub fn spectrum<T: Real>(dp: &DiscreteProblem<T>, window: &Window<T>) -> Result<Vec<Complex<T>>> {
    spectrum_with(dp, window, &SpectrumSettings::default())
}

pub fn spectrum_with<T: Real>(
    dp: &DiscreteProblem<T>,
    window: &Window<T>,
    settings: &SpectrumSettings<T>,
) -> Result<Vec<Complex<T>>> {
    if window.is_empty() {
        return Ok(Vec::new());
    }
    let center = window.center();
    let scale = T::one() + modulus(center);
    let mut solved = None;
    for (re, im) in [(0.0131, 0.0071), (-0.0273, 0.0197), (0.0417, -0.0389)] {
        let sigma = center + Complex::new(real::<T>(re), real::<T>(im)) * cplx(scale);
        let shifted = &dp.a - &dp.b * sigma;
        if let Some(m) = lu_solve(&shifted, &dp.b) {
            if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                solved = Some((sigma, m));
                break;
            }
        }
    }
    let (sigma, mut m) = solved.ok_or(Error::SingularPencil)?;
    balance(&mut m);
    let mnorm = fnorm(&m);
    let mut out = Vec::new();
    for theta in eigenvalues(&m)? {
        if modulus(theta) <= precision_tol::<T>(1e-13) * mnorm {
            continue;
        }
        let lam = sigma + Complex::new(T::one(), T::zero()) / theta;
        if window.contains(lam) && resolved(dp, lam, settings.resolution_tol) {
            out.push(lam);
        }
    }
    average_clusters(&mut out, settings.cluster_tol);
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(out)
}

/// Single-linkage clustering; members are replaced by their mean so that
/// multiplicities are kept.
fn average_clusters<T: Real>(values: &mut [Complex<T>], tol: T) {
    if tol <= T::zero() {
        return;
    }
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let near = modulus(values[i] - values[j]) <= tol * (T::one() + modulus(values[i]));
            if near && label[i] != label[j] {
                let (keep, drop) = (label[i].min(label[j]), label[i].max(label[j]));
                label
                    .iter_mut()
                    .filter(|l| **l == drop)
                    .for_each(|l| *l = keep);
            }
        }
    }
    for c in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| label[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let sum = members
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, &i| a + values[i]);
        let mean = sum / cplx(real::<T>(members.len() as f64));
        members.iter().for_each(|&i| values[i] = mean);
    }
}

/// Inverse iteration for a null vector of `P(lambda)`, then a Chebyshev
/// tail test on each component.
fn resolved<T: Real>(dp: &DiscreteProblem<T>, lambda: Complex<T>, tol: T) -> bool {
    let n = dp.n_nodes;
    let s = dp.size * n;
    let delta = precision_tol::<T>(1e-10) * (T::one() + modulus(lambda));
    let p = dp.matrix(lambda + Complex::new(delta, delta));
    let lu = p.lu();
    let mut x = CVector::<T>::from_fn(s, |i, _| {
        Complex::new(T::one(), real::<T>((i % 7) as f64 * 0.1))
    });
    for _ in 0..3 {
        match lu.solve(&x) {
            Some(y) => {
                let nrm = vnorm(&y);
                if !(nrm.is_finite()) || nrm == T::zero() {
                    return true;
                }
                x = y / cplx(nrm);
            }
            None => return true,
        }
    }
    let nm1 = real::<T>((n - 1) as f64);
    let tail_start = n - (n / 8).max(2);
    let mut head = T::zero();
    let mut tail = T::zero();
    for comp in 0..dp.size {
        let vals: Vec<Complex<T>> = (0..n).map(|j| x[comp * n + j]).collect();
        for k in 0..n {
            let mut c = Complex::new(T::zero(), T::zero());
            for (j, v) in vals.iter().enumerate() {
                let w = if j == 0 || j == n - 1 {
                    real::<T>(0.5)
                } else {
                    T::one()
                };
                let arg = T::pi() * real::<T>((j * k) as f64) / nm1;
                c += v * cplx(w * arg.cos());
            }
            let mag = modulus(c);
            if k >= tail_start {
                tail = tail.max(mag);
            }
            head = head.max(mag);
        }
    }
    head == T::zero() || tail <= tol * head
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_problem, DerivMode, ParameterPoint};

    type C = Complex<f64>;

    /// `u'' - lambda u = 0` with Dirichlet conditions: `lambda = -(k pi)^2`.
    fn dirichlet() -> ProblemFamily<f64> {
        let anchor = ParameterPoint::new(C::new(0.0, 0.0), vec![0.0]).unwrap();
        make_problem(
            2,
            1,
            1,
            |j, dx, _, lam: C, _: &[f64]| {
                CMatrix::from_element(
                    1,
                    1,
                    match (j, dx) {
                        (_, 1..) => C::new(0.0, 0.0),
                        (0, _) => C::new(1.0, 0.0),
                        (1, _) => C::new(0.0, 0.0),
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
            |_, _| {
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C::new(0.0, 0.0),
                        C::new(0.0, 0.0),
                        C::new(1.0, 0.0),
                        C::new(0.0, 0.0),
                    ],
                )
            },
            DerivMode::finite_difference(),
            &anchor,
        )
        .unwrap()
    }

    #[test]
    fn dirichlet_laplacian() {
        let f = dirichlet();
        let dp = collocate(&f, &[0.0], 1, 40).unwrap();
        assert_eq!(dp.companion_dim, 40);
        let eig = spectrum(&dp, &Window::new((-200.0, 1.0), (-1.0, 1.0))).unwrap();
        let want: Vec<f64> = (1..=4)
            .rev()
            .map(|k| -((k as f64) * std::f64::consts::PI).powi(2))
            .collect();
        assert_eq!(eig.len(), 4, "{eig:?}");
        for (e, w) in eig.iter().zip(want) {
            assert!((e - C::new(w, 0.0)).norm() < 1e-9, "{e} vs {w}");
        }
    }

    #[test]
    fn clusters_are_averaged() {
        let mut v = vec![C::new(1e-7, 0.0), C::new(-1e-7, 1e-9), C::new(3.0, 0.0)];
        average_clusters(&mut v, 1e-6);
        assert_eq!(v[0], v[1]);
        assert!(v[0].norm() < 1e-9);
        assert_eq!(v[2], C::new(3.0, 0.0));
    }

    #[test]
    fn empty_window() {
        let f = dirichlet();
        let dp = collocate(&f, &[0.0], 1, 16).unwrap();
        let w = Window::new((1.0, 0.0), (0.0, 1.0));
        assert!(spectrum(&dp, &w).unwrap().is_empty());
    }

    #[test]
    fn exponential_dependence_is_rejected() {
        let anchor = ParameterPoint::new(C::new(0.0, 0.0), vec![0.0]).unwrap();
        let f = make_problem(
            2,
            1,
            1,
            |j, dx, _, lam: C, _: &[f64]| {
                CMatrix::from_element(
                    1,
                    1,
                    match (j, dx) {
                        (_, 1..) => C::new(0.0, 0.0),
                        (0, _) => C::new(1.0, 0.0),
                        (1, _) => C::new(0.0, 0.0),
                        _ => -lam.exp(),
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
            |_, _| {
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C::new(0.0, 0.0),
                        C::new(0.0, 0.0),
                        C::new(1.0, 0.0),
                        C::new(0.0, 0.0),
                    ],
                )
            },
            DerivMode::finite_difference(),
            &anchor,
        )
        .unwrap();
        assert!(matches!(
            collocate(&f, &[0.0], 2, 16),
            Err(Error::NonPolynomialLambda { degree: 2 })
        ));
    }
}
