//! Rotating circular string passing through an eyelet supported by a
//! spring `k`, a damper `d` and generating a friction force `mu`.
//!
//! In the angle `phi = 2 pi x`:
//!
//! ```text
//! lambda^2 u + 2 Omega lambda u' - (1 - Omega^2) u'' = 0,
//! u(0) = u(2 pi),
//! u'(0) - u'(2 pi) = (lambda d + k) / (1 - Omega^2) u(0) + mu / (1 - Omega^2) u'(0).
//! ```
//!
//! The family is built on `x in [0, 1]`; node and splitting formulas stay in
//! the original variables.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;

use super::{sign, MeshNode};
use crate::adjoint::{realize, Completion};
use crate::error::{Error, Result};
use crate::perturbation::SemiSimpleGroup;
use crate::problem::Eigenfunction;
use crate::problem::{DerivMode, FamilySource, ParameterPoint, Partial, ProblemFamily};
use crate::scalar::CMatrix;
use crate::{CVector, Family};

pub const OMEGA: usize = 0;
pub const K: usize = 1;
pub const D: usize = 2;
pub const MU: usize = 3;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(Omega, k, d, mu)`; also used as a direction `(dOmega, dk, dd, dmu)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StringParams {
    pub omega: f64,
    pub k: f64,
    pub d: f64,
    pub mu: f64,
}

impl StringParams {
    pub fn new(omega: f64, k: f64, d: f64, mu: f64) -> Self {
        Self { omega, k, d, mu }
    }

    pub fn free(omega: f64) -> Self {
        Self {
            omega,
            ..Self::default()
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega, self.k, self.d, self.mu]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self::new(p[OMEGA], p[K], p[D], p[MU])
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn scalar(z: Complex64) -> CMatrix<f64> {
    CMatrix::from_element(1, 1, z)
}

struct StringSource;

impl FamilySource<f64> for StringSource {
    fn order(&self) -> usize {
        2
    }

    fn size(&self) -> usize {
        1
    }

    fn n_params(&self) -> usize {
        4
    }

    fn coeff(&self, j: usize, dx: usize, _x: f64, lambda: Complex64, p: &[f64]) -> CMatrix<f64> {
        if dx > 0 {
            return scalar(c(0.0));
        }
        let omega = p[OMEGA];
        scalar(match j {
            0 => c(-(1.0 - omega * omega) / (4.0 * PI * PI)),
            1 => lambda * omega / PI,
            _ => lambda * lambda,
        })
    }

    fn boundary(&self, lambda: Complex64, p: &[f64]) -> CMatrix<f64> {
        let s = 1.0 / (1.0 - p[OMEGA] * p[OMEGA]);
        let e0 = -2.0 * PI * (lambda * p[D] + p[K]) * s;
        let e1 = c(1.0 - p[MU] * s);
        CMatrix::from_row_slice(
            2,
            4,
            &[c(1.0), c(0.0), c(-1.0), c(0.0), e0, e1, c(0.0), c(-1.0)],
        )
    }

    fn coeff_partial(
        &self,
        j: usize,
        dx: usize,
        part: Partial,
        _x: f64,
        lambda: Complex64,
        p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let omega = p[OMEGA];
        let zero = c(0.0);
        if dx > 0 {
            return Some(scalar(zero));
        }
        let v = match (j, part.lambda, part.param) {
            (0, 0, Some(OMEGA)) => c(omega / (2.0 * PI * PI)),
            (0, _, _) => zero,
            (1, 1, None) => c(omega / PI),
            (1, 0, Some(OMEGA)) => lambda / PI,
            (1, 1, Some(OMEGA)) => c(1.0 / PI),
            (1, _, _) => zero,
            (_, 1, None) => 2.0 * lambda,
            (_, 2, None) => c(2.0),
            _ => zero,
        };
        Some(scalar(v))
    }

    fn boundary_partial(
        &self,
        part: Partial,
        lambda: Complex64,
        p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let (omega, k, d, mu) = (p[OMEGA], p[K], p[D], p[MU]);
        let s = 1.0 / (1.0 - omega * omega);
        let zero = c(0.0);
        let (e0, e1) = match (part.lambda, part.param) {
            (1, None) => (c(-2.0 * PI * d * s), zero),
            (0, Some(OMEGA)) => (
                -4.0 * PI * omega * (lambda * d + k) * s * s,
                c(-2.0 * mu * omega * s * s),
            ),
            (1, Some(OMEGA)) => (c(-4.0 * PI * d * omega * s * s), zero),
            (0, Some(K)) => (c(-2.0 * PI * s), zero),
            (0, Some(D)) => (-2.0 * PI * lambda * s, zero),
            (1, Some(D)) => (c(-2.0 * PI * s), zero),
            (0, Some(MU)) => (zero, c(-s)),
            _ => (zero, zero),
        };
        Some(CMatrix::from_row_slice(
            2,
            4,
            &[zero, zero, zero, zero, e0, e1, zero, zero],
        ))
    }

    fn lambda_degree(&self) -> Option<usize> {
        Some(2)
    }
}

/// The string family with analytic derivatives.
pub fn string_problem(params: &StringParams) -> Result<Family> {
    string_problem_with(params, DerivMode::Analytic)
}

pub fn string_problem_with(params: &StringParams, mode: DerivMode<f64>) -> Result<Family> {
    let anchor = ParameterPoint::new(c(0.0), params.to_vec())?;
    ProblemFamily::new(Arc::new(StringSource), mode, &anchor)
}

/// Characteristic function of the free string (`d = k = mu = 0`) as
/// displayed for the unconstrained problem.
pub fn free_characteristic(lambda: Complex64, omega: f64) -> Complex64 {
    let a = PI * lambda / (I * (1.0 - omega));
    let b = PI * lambda / (I * (1.0 + omega));
    let q = omega * omega - 1.0;
    8.0 * lambda * a.sin() * b.sin() * (-2.0 * PI * lambda * omega / q).exp() / q
}

/// Determinant of the boundary conditions applied to the exponential
/// solutions `exp(2 pi r x)`, `r = lambda / (1 - Omega)` and
/// `r = -lambda / (1 + Omega)`. Vanishes exactly at the eigenvalues (and
/// trivially at `lambda = 0`, where the two exponents coincide).
pub fn characteristic(lambda: Complex64, params: &StringParams) -> Complex64 {
    let u = StringSource.boundary(lambda, &params.to_vec());
    let exps = [
        lambda / (1.0 - params.omega),
        -lambda / (1.0 + params.omega),
    ];
    let mut m = [[c(0.0); 2]; 2];
    for (col, r) in exps.iter().enumerate() {
        let rx = 2.0 * PI * r;
        let e = rx.exp();
        let trace = [c(1.0), rx, e, rx * e];
        for (row, mrow) in m.iter_mut().enumerate() {
            mrow[col] = (0..4).map(|t| u[(row, t)] * trace[t]).sum();
        }
    }
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Mesh branch `lambda_n^eps(Omega) = i n (1 + eps Omega)`.
pub fn branch(n: i64, eps: i32, omega: f64) -> Complex64 {
    Complex64::new(0.0, n as f64 * (1.0 + sign(eps) * omega))
}

/// `u_n^eps = cos(n phi) - eps i sin(n phi) = exp(-2 pi i eps n x)`.
pub fn eigenfunction(n: i64, eps: i32) -> Eigenfunction<f64> {
    let w = -2.0 * PI * sign(eps) * n as f64;
    Eigenfunction::new(1, usize::MAX, move |x: f64, d: usize| {
        let f = (I * w).powu(d as u32) * (I * w * x).exp();
        CVector::from_element(1, f)
    })
}

fn normalized_label(n: i64, eps: i32) -> (i64, i32) {
    if n == 0 {
        (0, 1)
    } else {
        (n, eps.signum())
    }
}

/// Branches through `(omega, lambda)` given as exact rationals
/// `omega = a / b`, `Im lambda = q / b`.
fn branches_through(a: i64, b: i64, q: i64) -> Option<usize> {
    let mut count = 0;
    for zeta in [1i64, -1] {
        // p (b + zeta a) = q
        let den = b + zeta * a;
        if den == 0 {
            if q == 0 {
                return None;
            }
            continue;
        }
        if q % den == 0 {
            let p = q / den;
            // (0, +) and (0, -) are the same branch
            if !(p == 0 && zeta == -1) {
                count += 1;
            }
        }
    }
    Some(count)
}

/// All crossings of branches `(n, eps)`, `(m, delta)` with `n` in
/// `n_range`, `m` in `m_range`:
/// `Omega = (n - m) / (m delta - n eps)`,
/// `lambda = i n m (delta - eps) / (m delta - n eps)`.
///
/// Pairs are deduplicated as unordered pairs; `(0, +)` and `(0, -)` label
/// the same branch. Nodes on `|Omega| = 1` are kept and flagged.
pub fn mesh_nodes(n_range: RangeInclusive<i64>, m_range: RangeInclusive<i64>) -> Vec<MeshNode> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in n_range {
        for m in m_range.clone() {
            for eps in [-1, 1] {
                for delta in [-1, 1] {
                    let den = m * delta as i64 - n * eps as i64;
                    if den == 0 {
                        continue;
                    }
                    let (a, b) = (normalized_label(n, eps), normalized_label(m, delta));
                    if a == b {
                        continue;
                    }
                    let key = if a <= b { (a, b) } else { (b, a) };
                    if !seen.insert(key) {
                        continue;
                    }
                    out.push(make_node(n, eps, m, delta));
                }
            }
        }
    }
    out
}

/// The crossing of `(n, eps)` and `(m, delta)`.
pub fn node(n: i64, eps: i32, m: i64, delta: i32) -> Result<MeshNode> {
    let den = m * delta as i64 - n * eps as i64;
    if den == 0 || normalized_label(n, eps) == normalized_label(m, delta) {
        return Err(Error::InvalidArgument(format!(
            "branches ({n},{eps}) and ({m},{delta}) do not cross"
        )));
    }
    Ok(make_node(n, eps, m, delta))
}

fn make_node(n: i64, eps: i32, m: i64, delta: i32) -> MeshNode {
    let (e, d) = (eps as i64, delta as i64);
    let mut num = n - m;
    let mut den = m * d - n * e;
    let mut q = n * m * (d - e);
    if den < 0 {
        num = -num;
        den = -den;
        q = -q;
    }
    MeshNode {
        n,
        eps,
        m,
        delta,
        param: num as f64 / den as f64,
        lambda: Complex64::new(0.0, q as f64 / den as f64),
        critical: num.abs() == den,
        branches: branches_through(num, den, q),
    }
}

/// Parameter point of a node with `k = d = mu = 0`.
pub fn node_point(node: &MeshNode) -> ParameterPoint<f64> {
    ParameterPoint {
        lambda0: node.lambda,
        p0: StringParams::free(node.param).to_vec(),
    }
}

/// Semi-simple group at a node with the closed-form eigenfunctions; the
/// adjoint eigenfunctions coincide with the direct ones for the free string.
pub fn node_group(family: &Family, node: &MeshNode) -> Result<SemiSimpleGroup<f64>> {
    if !node.is_double() {
        return Err(Error::InvalidArgument(
            "node is critical or has more than two branches".into(),
        ));
    }
    let point = node_point(node);
    let adjoint = realize(family, &point, &Completion::Orthogonal)?;
    let us = vec![
        eigenfunction(node.n, node.eps),
        eigenfunction(node.m, node.delta),
    ];
    SemiSimpleGroup::new(family, &point, us.clone(), us, adjoint)
}

/// Radicand `c` of the first-order splitting at a node along `dir`.
pub fn split_radicand(node: &MeshNode, dir: &StringParams) -> Complex64 {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, dl) = (sign(node.eps), sign(node.delta));
    let load = dir.d * node.lambda + dir.k;
    let a = I * (e * n - dl * m) / 2.0 * dir.omega
        + I * (m - n) / (8.0 * PI * m * n) * load
        + (e - dl) / (8.0 * PI) * dir.mu;
    a * a - (load - I * e * n * dir.mu) * (load - I * dl * m * dir.mu) / (16.0 * PI * PI * n * m)
}

/// First-order increments `lambda - lambda_nm` at a node along
/// `dir = (dOmega, k, d, mu)`, sorted by `(Re, Im)`:
///
/// `i (eps n + delta m)/2 dOmega + i (n + m)/(8 pi n m) (d lambda_nm + k)
///  + (eps + delta)/(8 pi) mu +- sqrt(c)`.
pub fn split(node: &MeshNode, dir: &StringParams) -> [Complex64; 2] {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, dl) = (sign(node.eps), sign(node.delta));
    let load = dir.d * node.lambda + dir.k;
    let mid = I * (e * n + dl * m) / 2.0 * dir.omega
        + I * (n + m) / (8.0 * PI * n * m) * load
        + (e + dl) / (8.0 * PI) * dir.mu;
    let r = split_radicand(node, dir).sqrt();
    sorted([mid + r, mid - r])
}

pub(crate) fn sorted(mut v: [Complex64; 2]) -> [Complex64; 2] {
    if (v[1].re, v[1].im) < (v[0].re, v[0].im) {
        v.swap(0, 1);
    }
    v
}

/// Subcritical spring-and-speed form (`eps < 0 < delta`, `0 < n < m`):
/// `i (m-n)/2 dOmega + i (n+m)/(8 pi n m) k
///  +- i sqrt(k^2/(16 pi^2 n m) + ((m-n)/(8 pi m n) k - (m+n)/2 dOmega)^2)`.
pub fn split_subcritical(node: &MeshNode, d_omega: f64, k: f64) -> Result<[Complex64; 2]> {
    if !(node.eps < 0 && node.delta > 0 && 0 < node.n && node.n < node.m) {
        return Err(Error::InvalidArgument(
            "subcritical form needs eps < 0 < delta and 0 < n < m".into(),
        ));
    }
    let (n, m) = (node.n as f64, node.m as f64);
    let mid = I * ((m - n) / 2.0 * d_omega + (n + m) / (8.0 * PI * n * m) * k);
    let t = (m - n) / (8.0 * PI * m * n) * k - (m + n) / 2.0 * d_omega;
    let r = I * (k * k / (16.0 * PI * PI * n * m) + t * t).sqrt();
    Ok(sorted([mid + r, mid - r]))
}

/// Radicand of the supercritical form; positive values mean flutter.
pub fn supercritical_radicand(n_abs: f64, m: f64, d_omega: f64, k: f64) -> f64 {
    let t = (n_abs - m) / 2.0 * d_omega - (m + n_abs) / (8.0 * PI * m * n_abs) * k;
    k * k / (16.0 * PI * PI * n_abs * m) - t * t
}

/// Supercritical spring-and-speed form (`eps < 0 < delta`, `n < 0 < m`):
/// `i (m+|n|)/2 dOmega + i (|n|-m)/(8 pi |n| m) k
///  +- sqrt(k^2/(16 pi^2 |n| m) - ((|n|-m)/2 dOmega - (m+|n|)/(8 pi m |n|) k)^2)`.
pub fn split_supercritical(node: &MeshNode, d_omega: f64, k: f64) -> Result<[Complex64; 2]> {
    if !(node.eps < 0 && node.delta > 0 && node.n < 0 && node.m > 0) {
        return Err(Error::InvalidArgument(
            "supercritical form needs eps < 0 < delta and n < 0 < m".into(),
        ));
    }
    let (na, m) = ((-node.n) as f64, node.m as f64);
    let mid = I * ((m + na) / 2.0 * d_omega + (na - m) / (8.0 * PI * na * m) * k);
    let r = c(supercritical_radicand(na, m, d_omega, k)).sqrt();
    Ok(sorted([mid + r, mid - r]))
}

/// The two lines bounding a supercritical flutter tongue in `(Omega, k)`:
/// `k = 4 pi |n| m (|n| - m) / (sqrt|n| +- sqrt m)^2 (Omega - (|n| + m)/(|n| - m))`.
/// Returns the `+` line first. Requires `|n| != m`.
pub fn tongue_lines(n_abs: u32, m: u32, omega: f64) -> [f64; 2] {
    let (na, mf) = (n_abs as f64, m as f64);
    let base = 4.0 * PI * na * mf * (na - mf) * (omega - (na + mf) / (na - mf));
    [
        base / (na.sqrt() + mf.sqrt()).powi(2),
        base / (na.sqrt() - mf.sqrt()).powi(2),
    ]
}

/// Damper-only increments at a node on `Omega = 0` (`n = m`, `delta = -eps`):
/// `-d/(4 pi) +- sqrt(d^2/(16 pi^2) - n^2 dOmega^2)`.
pub fn damper_split(n: u32, d_omega: f64, d: f64) -> [Complex64; 2] {
    let n = n as f64;
    let mid = c(-d / (4.0 * PI));
    let r = c(d * d / (16.0 * PI * PI) - n * n * d_omega * d_omega).sqrt();
    sorted([mid + r, mid - r])
}

/// Residual of the damper circle `(Re lambda + d/4pi)^2 + n^2 Omega^2 = d^2/16pi^2`
/// (with `Im lambda = n`) or, off the circle, of the hyperbola
/// `n^2 Omega^2 - (Im lambda - n)^2 = d^2/16pi^2` (with `Re lambda = -d/4pi`).
pub fn damper_locus_residual(n: u32, omega: f64, d: f64, lambda: Complex64) -> f64 {
    let n = n as f64;
    let r2 = d * d / (16.0 * PI * PI);
    if n * n * omega * omega <= r2 {
        ((lambda.re + d / (4.0 * PI)).powi(2) + n * n * omega * omega - r2).abs()
            + (lambda.im - n).abs()
    } else {
        (n * n * omega * omega - (lambda.im - n).powi(2) - r2).abs()
            + (lambda.re + d / (4.0 * PI)).abs()
    }
}

/// Friction-only eigenvalues near the node `(0, n)`:
/// `i n +- sqrt(-n^2 Omega^2 + i n Omega mu / (2 pi))`.
pub fn nonconservative_split(n: u32, omega: f64, mu: f64) -> [Complex64; 2] {
    let nf = n as f64;
    let r = Complex64::new(-nf * nf * omega * omega, nf * omega * mu / (2.0 * PI)).sqrt();
    sorted([I * nf + r, I * nf - r])
}

/// The displayed real and imaginary parts of the friction-only branches:
/// `Im lambda = n +- (1/2pi) sqrt(2 pi^2 n^2 Omega^2 +- pi n Omega sqrt(4 pi^2 n^2 Omega^2 + mu^2))`,
/// `Re lambda = +- (1/2pi) sqrt(-2 pi^2 n^2 Omega^2 +- pi n Omega sqrt(..))`,
/// keeping the real-valued roots.
pub fn nonconservative_parts(n: u32, omega: f64, mu: f64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let q = 4.0 * PI * PI * nf * nf * omega * omega + mu * mu;
    let a = 2.0 * PI * PI * nf * nf * omega * omega;
    let b = PI * nf * omega * q.sqrt();
    let mut im = Vec::new();
    let mut re = Vec::new();
    for s in [1.0, -1.0] {
        let t = a + s * b;
        if t >= 0.0 {
            im.push(nf + t.sqrt() / (2.0 * PI));
            im.push(nf - t.sqrt() / (2.0 * PI));
        }
        let t = -a + s * b;
        if t >= 0.0 {
            re.push(t.sqrt() / (2.0 * PI));
            re.push(-t.sqrt() / (2.0 * PI));
        }
    }
    (im, re)
}
