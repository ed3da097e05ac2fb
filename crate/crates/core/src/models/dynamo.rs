//! Spherically symmetric alpha^2-dynamo, mode `l = 0`.
//!
//! ```text
//! l0 = [[1, 0], [-alpha, 1]],  l1 = l0',  l2 = [[-lambda, alpha], [0, -lambda]],
//! u1(0) = u2(0) = 0,  (1 - beta) u1(1) + beta u1'(1) = 0,  u2(1) = 0,
//! ```
//!
//! with `alpha(x) = alpha0 + gamma * profile(x)` and a zero-mean profile.
//! The parameter vector is `(alpha0, gamma, beta)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;

use super::string::sorted;
use super::{sign, MeshNode};
use crate::adjoint::{realize, Completion};
use crate::error::{Error, Result};
use crate::perturbation::SemiSimpleGroup;
use crate::problem::{
    DerivMode, Eigenfunction, FamilySource, ParameterPoint, Partial, ProblemFamily,
};
use crate::quadrature::GaussLegendre;
use crate::scalar::CMatrix;
use crate::{CVector, Family};

pub const ALPHA0: usize = 0;
pub const GAMMA: usize = 1;
pub const BETA: usize = 2;

/// Tolerance on the mean of a callback profile.
pub const MEAN_TOL: f64 = 1e-10;

type ProfileFn = dyn Fn(f64, usize) -> f64 + Send + Sync;

/// The shape `Delta alpha(x)` of the alpha-perturbation.
#[derive(Clone)]
pub enum Profile {
    /// `sum a_j cos(j pi x)`, `j >= 1`.
    Cosine(Vec<(u32, f64)>),
    /// `f(x, d)` returns the `d`-th derivative, `d <= 2`.
    Custom(Arc<ProfileFn>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Cosine(t) => f.debug_tuple("Cosine").field(t).finish(),
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Profile {
    /// `cos(2 pi k x)`.
    pub fn cos_k(k: u32) -> Self {
        Profile::Cosine(vec![(2 * k, 1.0)])
    }

    /// A cosine series; a constant term makes the mean nonzero.
    pub fn cosine(terms: Vec<(u32, f64)>) -> Result<Self> {
        let mean: f64 = terms.iter().filter(|(j, _)| *j == 0).map(|(_, a)| a).sum();
        if mean != 0.0 {
            return Err(Error::ZeroMeanViolated { mean });
        }
        Ok(Profile::Cosine(
            terms.into_iter().filter(|(j, _)| *j != 0).collect(),
        ))
    }

    /// A callback profile, checked for zero mean by quadrature.
    pub fn custom(f: impl Fn(f64, usize) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let rule = GaussLegendre::<f64>::default();
        let mean = rule.integrate(|x| f(x, 0));
        let scale = 1.0 + rule.integrate(|x| f(x, 0).abs());
        if mean.abs() > MEAN_TOL * scale {
            return Err(Error::ZeroMeanViolated { mean });
        }
        Ok(Profile::Custom(Arc::new(f)))
    }

    pub fn eval(&self, x: f64, d: usize) -> f64 {
        match self {
            Profile::Cosine(terms) => terms
                .iter()
                .map(|&(j, a)| {
                    let w = j as f64 * PI;
                    a * w.powi(d as i32) * (w * x + d as f64 * PI / 2.0).cos()
                })
                .sum(),
            Profile::Custom(f) => f(x, d),
        }
    }

    /// `int_0^1 profile(x) cos(j pi x) dx`; exact for cosine series.
    pub fn selection(&self, j: i64) -> f64 {
        let j = j.unsigned_abs();
        match self {
            Profile::Cosine(terms) => terms
                .iter()
                .filter(|(t, _)| j != 0 && *t as u64 == j)
                .map(|(_, a)| a / 2.0)
                .sum(),
            Profile::Custom(f) => {
                let w = j as f64 * PI;
                GaussLegendre::<f64>::default().integrate(|x| f(x, 0) * (w * x).cos())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamoParams {
    pub alpha0: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Spherical mode; only `0` is supported.
    pub l: u32,
    pub profile: Profile,
}

impl DynamoParams {
    pub fn new(alpha0: f64, gamma: f64, beta: f64, profile: Profile) -> Self {
        Self {
            alpha0,
            gamma,
            beta,
            l: 0,
            profile,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.alpha0, self.gamma, self.beta]
    }
}

struct DynamoSource {
    profile: Profile,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn mat(a: f64, b: f64, cc: f64, d: f64) -> CMatrix<f64> {
    CMatrix::from_row_slice(2, 2, &[c(a), c(b), c(cc), c(d)])
}

impl DynamoSource {
    fn alpha(&self, x: f64, d: usize, p: &[f64]) -> f64 {
        let base = if d == 0 { p[ALPHA0] } else { 0.0 };
        base + p[GAMMA] * self.profile.eval(x, d)
    }
}

impl FamilySource<f64> for DynamoSource {
    fn order(&self) -> usize {
        2
    }

    fn size(&self) -> usize {
        2
    }

    fn n_params(&self) -> usize {
        3
    }

    fn coeff(&self, j: usize, dx: usize, x: f64, lambda: Complex64, p: &[f64]) -> CMatrix<f64> {
        match j {
            0 if dx == 0 => mat(1.0, 0.0, -self.alpha(x, 0, p), 1.0),
            0 => mat(0.0, 0.0, -self.alpha(x, dx, p), 0.0),
            1 => mat(0.0, 0.0, -self.alpha(x, dx + 1, p), 0.0),
            _ => {
                let mut m = mat(0.0, self.alpha(x, dx, p), 0.0, 0.0);
                if dx == 0 {
                    m[(0, 0)] = -lambda;
                    m[(1, 1)] = -lambda;
                }
                m
            }
        }
    }

    fn boundary(&self, _lambda: Complex64, p: &[f64]) -> CMatrix<f64> {
        let beta = p[BETA];
        let mut u = CMatrix::zeros(4, 8);
        u[(0, 0)] = c(1.0);
        u[(1, 1)] = c(1.0);
        u[(2, 4)] = c(1.0 - beta);
        u[(2, 6)] = c(beta);
        u[(3, 5)] = c(1.0);
        u
    }

    fn coeff_partial(
        &self,
        j: usize,
        dx: usize,
        part: Partial,
        x: f64,
        _lambda: Complex64,
        _p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let zero = mat(0.0, 0.0, 0.0, 0.0);
        let shape = |d: usize| self.profile.eval(x, d);
        Some(match (part.lambda, part.param) {
            (1, None) if j == 2 && dx == 0 => mat(-1.0, 0.0, 0.0, -1.0),
            (0, Some(ALPHA0)) if dx == 0 => match j {
                0 => mat(0.0, 0.0, -1.0, 0.0),
                2 => mat(0.0, 1.0, 0.0, 0.0),
                _ => zero,
            },
            (0, Some(GAMMA)) => match j {
                0 => mat(0.0, 0.0, -shape(dx), 0.0),
                1 => mat(0.0, 0.0, -shape(dx + 1), 0.0),
                _ => mat(0.0, shape(dx), 0.0, 0.0),
            },
            _ => zero,
        })
    }

    fn boundary_partial(
        &self,
        part: Partial,
        _lambda: Complex64,
        _p: &[f64],
    ) -> Option<CMatrix<f64>> {
        let mut u = CMatrix::zeros(4, 8);
        if part == Partial::mixed(0, BETA) {
            u[(2, 4)] = c(-1.0);
            u[(2, 6)] = c(1.0);
        }
        Some(u)
    }

    fn lambda_degree(&self) -> Option<usize> {
        Some(1)
    }
}

/// The dynamo family with analytic derivatives.
pub fn dynamo_problem(params: &DynamoParams) -> Result<Family> {
    dynamo_problem_with(params, DerivMode::Analytic)
}

pub fn dynamo_problem_with(params: &DynamoParams, mode: DerivMode<f64>) -> Result<Family> {
    if params.l != 0 {
        return Err(Error::InvalidArgument(format!(
            "only l = 0 is supported, got {}",
            params.l
        )));
    }
    if !(0.0..=1.0).contains(&params.beta) {
        return Err(Error::InvalidArgument(format!(
            "beta = {} outside [0, 1]",
            params.beta
        )));
    }
    if let Profile::Cosine(terms) = &params.profile {
        Profile::cosine(terms.clone())?;
    }
    let anchor = ParameterPoint::new(c(0.0), params.to_vec())?;
    let source = DynamoSource {
        profile: params.profile.clone(),
    };
    ProblemFamily::new(Arc::new(source), mode, &anchor)
}

/// The completion `[A~, B~]` with rows `u'(0)` and `u'(1)`. Together with
/// the boundary matrix it is singular at `beta = 1`.
pub fn paper_completion() -> Completion<f64> {
    let mut m = CMatrix::zeros(4, 8);
    m[(0, 2)] = c(1.0);
    m[(1, 3)] = c(1.0);
    m[(2, 6)] = c(1.0);
    m[(3, 7)] = c(1.0);
    Completion::Supplied(m)
}

/// Mesh branch `lambda_n^eps = -(pi n)^2 + eps alpha0 pi n` (at
/// `beta = gamma = 0`).
pub fn branch(n: i64, eps: i32, alpha0: f64) -> f64 {
    let nf = n as f64;
    -(PI * nf).powi(2) + sign(eps) * alpha0 * PI * nf
}

/// `(1, eps pi n) sin(n pi x)`.
pub fn eigenfunction(n: i64, eps: i32) -> Eigenfunction<f64> {
    let (w, e) = (n as f64 * PI, sign(eps));
    Eigenfunction::new(2, usize::MAX, move |x: f64, d: usize| {
        let s = w.powi(d as i32) * (w * x + d as f64 * PI / 2.0).sin();
        CVector::from_vec(vec![c(s), c(e * w * s)])
    })
}

/// `(eps pi n, 1) sin(n pi x)`: the components of the direct eigenfunction
/// swapped.
pub fn adjoint_eigenfunction(n: i64, eps: i32) -> Eigenfunction<f64> {
    let (w, e) = (n as f64 * PI, sign(eps));
    Eigenfunction::new(2, usize::MAX, move |x: f64, d: usize| {
        let s = w.powi(d as i32) * (w * x + d as f64 * PI / 2.0).sin();
        CVector::from_vec(vec![c(e * w * s), c(s)])
    })
}

fn make_node(n: i64, eps: i32, m: i64, delta: i32) -> MeshNode {
    let (e, d) = (eps as i64, delta as i64);
    let a = e * n + d * m;
    // lines through (pi a, pi^2 eps delta n m): p^2 - zeta a p + eps delta n m = 0
    let mut lines = Vec::new();
    for zeta in [1i64, -1] {
        let disc = a * a - 4 * e * d * n * m;
        let r = (disc as f64).sqrt().round() as i64;
        if r * r != disc {
            continue;
        }
        for s in [r, -r] {
            let num = zeta * a + s;
            if num % 2 == 0 && num / 2 >= 1 && !lines.contains(&(num / 2, zeta)) {
                lines.push((num / 2, zeta));
            }
        }
    }
    MeshNode {
        n,
        eps,
        m,
        delta,
        param: PI * a as f64,
        lambda: c(PI * PI * (e * d * n * m) as f64),
        critical: false,
        branches: Some(lines.len()),
    }
}

/// The crossing of `(n, eps)` and `(m, delta)`:
/// `lambda0 = eps delta pi^2 n m`, `alpha0 = eps pi n + delta pi m`.
pub fn node(n: i64, eps: i32, m: i64, delta: i32) -> Result<MeshNode> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidArgument("mode indices start at 1".into()));
    }
    if n == m && eps == delta {
        return Err(Error::InvalidArgument(
            "a branch does not cross itself".into(),
        ));
    }
    Ok(make_node(n, eps, m, delta))
}

/// All nodes with `n` in `n_range`, `m` in `m_range` (indices `>= 1`),
/// deduplicated as unordered pairs.
pub fn mesh_nodes(n_range: RangeInclusive<i64>, m_range: RangeInclusive<i64>) -> Vec<MeshNode> {
    let mut out: Vec<MeshNode> = Vec::new();
    for n in n_range.filter(|&n| n >= 1) {
        for m in m_range.clone().filter(|&m| m >= 1) {
            for eps in [-1, 1] {
                for delta in [-1, 1] {
                    if n == m && eps == delta {
                        continue;
                    }
                    let dup = out
                        .iter()
                        .any(|o| (o.n, o.eps, o.m, o.delta) == (m, delta, n, eps));
                    if !dup {
                        out.push(make_node(n, eps, m, delta));
                    }
                }
            }
        }
    }
    out
}

/// Parameter point of a node with `gamma = beta = 0`.
pub fn node_point(node: &MeshNode) -> ParameterPoint<f64> {
    ParameterPoint {
        lambda0: node.lambda,
        p0: vec![node.param, 0.0, 0.0],
    }
}

/// Semi-simple group at a node with the closed-form eigenfunctions and the
/// component-swapped adjoint eigenfunctions.
pub fn node_group(
    family: &Family,
    node: &MeshNode,
    completion: &Completion<f64>,
) -> Result<SemiSimpleGroup<f64>> {
    if !node.is_double() {
        return Err(Error::InvalidArgument(
            "node is not a simple crossing".into(),
        ));
    }
    let point = node_point(node);
    let adjoint = realize(family, &point, completion)?;
    let us = vec![
        eigenfunction(node.n, node.eps),
        eigenfunction(node.m, node.delta),
    ];
    let vs = vec![
        adjoint_eigenfunction(node.n, node.eps),
        adjoint_eigenfunction(node.m, node.delta),
    ];
    SemiSimpleGroup::new(family, &point, us, vs, adjoint)
}

/// `(d alpha0, d gamma, d beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DynamoDirection {
    pub alpha0: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl DynamoDirection {
    pub fn new(alpha0: f64, gamma: f64, beta: f64) -> Self {
        Self {
            alpha0,
            gamma,
            beta,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.alpha0, self.gamma, self.beta]
    }
}

/// Selection integral `int profile(x) cos((eps n - delta m) pi x) dx` at a node.
pub fn selection_integral(profile: &Profile, node: &MeshNode) -> f64 {
    profile.selection(sign(node.eps) as i64 * node.n - sign(node.delta) as i64 * node.m)
}

/// Radicand of the first-order splitting,
/// `((delta m - eps n) da)^2 + 4 m n (eps g S - s pi n b)(delta g S - s pi m b)`
/// with `S` the selection integral and `s = (-1)^(n+m)`. Here `da` is the
/// increment `alpha0 - alpha0_node`.
pub fn split_radicand(node: &MeshNode, selection: f64, dir: &DynamoDirection) -> f64 {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, d) = (sign(node.eps), sign(node.delta));
    let s = if (node.n + node.m) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let g = dir.gamma * selection;
    ((d * m - e * n) * dir.alpha0).powi(2)
        + 4.0 * m * n * (e * g - s * PI * n * dir.beta) * (d * g - s * PI * m * dir.beta)
}

/// First-order increments at a node, sorted by `(Re, Im)`:
/// `-eps delta pi^2 m n b + (pi/2)(delta m + eps n) da +- (pi/2) sqrt(radicand)`.
pub fn split(node: &MeshNode, selection: f64, dir: &DynamoDirection) -> [Complex64; 2] {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, d) = (sign(node.eps), sign(node.delta));
    let mid = c(-e * d * PI * PI * m * n * dir.beta + PI / 2.0 * (d * m + e * n) * dir.alpha0);
    let r = PI / 2.0 * c(split_radicand(node, selection, dir)).sqrt();
    sorted([mid + r, mid - r])
}

/// The cone of complex eigenvalues in `(alpha0, beta, gamma)`, written as
/// displayed:
/// `((eps n - delta m) da)^2 + m n ((eps + delta) g S - s (n + m) beta pi)^2
///  < m n ((eps - delta) g S - (-1)^(n-m) (n - m) beta pi)^2`.
pub fn inside_cone(node: &MeshNode, selection: f64, d_alpha0: f64, gamma: f64, beta: f64) -> bool {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, d) = (sign(node.eps), sign(node.delta));
    let s = if (node.n + node.m) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let g = gamma * selection;
    let lhs = ((e * n - d * m) * d_alpha0).powi(2)
        + m * n * ((e + d) * g - s * (n + m) * beta * PI).powi(2);
    let rhs = m * n * ((e - d) * g - s * (n - m) * beta * PI).powi(2);
    lhs < rhs
}

/// The oscillatory part of the cone:
/// `lambda0 - eps delta pi^2 m n beta + (pi/2)(delta m + eps n) da > 0`.
pub fn oscillatory(node: &MeshNode, d_alpha0: f64, beta: f64) -> bool {
    let (n, m) = (node.n as f64, node.m as f64);
    let (e, d) = (sign(node.eps), sign(node.delta));
    node.lambda.re - e * d * PI * PI * m * n * beta + PI / 2.0 * (d * m + e * n) * d_alpha0 > 0.0
}

/// A `beta = 0` resonance tongue of the profile `cos(2 pi k x)`, from the
/// node `(n, eps; 2k - n, -eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaZeroTongue {
    pub k: u32,
    pub node: MeshNode,
}

impl BetaZeroTongue {
    /// `(alpha0 - alpha0_node)^2 < (gamma^2/4) [1 - ((n - k)/k)^2]`.
    pub fn contains(&self, alpha0: f64, gamma: f64) -> bool {
        let (n, k) = (self.node.n as f64, self.k as f64);
        (alpha0 - self.node.param).powi(2) < gamma * gamma / 4.0 * (1.0 - ((n - k) / k).powi(2))
    }
}

/// The `2k - 1` tongues of `cos(2 pi k x)` at `beta = 0`, `n = k .. 2k - 1`,
/// ordered by `alpha0`.
pub fn beta_zero_tongues(k: u32) -> Vec<BetaZeroTongue> {
    let k64 = k as i64;
    let mut out = Vec::new();
    for n in k64..2 * k64 {
        for eps in [1, -1] {
            if n == k64 && eps == -1 {
                continue;
            }
            out.push(BetaZeroTongue {
                k,
                node: make_node(n, eps, 2 * k64 - n, -eps),
            });
        }
    }
    out.sort_by(|a, b| a.node.param.total_cmp(&b.node.param));
    out
}

/// The principal regions for `cos(4 pi x)` as displayed, in the order
/// `alpha0 = -2 pi`, `0`, `2 pi`:
/// `16(alpha0 + 2pi)^2 + (gamma + 10 pi beta)^2 < 4(gamma + 4 pi beta)^2`,
/// `gamma^2 - 4 alpha0^2 > 16 pi^2 beta^2`,
/// `16(alpha0 - 2pi)^2 + (gamma - 10 pi beta)^2 < 4(gamma - 4 pi beta)^2`.
pub fn k2_principal_regions(alpha0: f64, gamma: f64, beta: f64) -> [bool; 3] {
    let b = PI * beta;
    [
        16.0 * (alpha0 + 2.0 * PI).powi(2) + (gamma + 10.0 * b).powi(2)
            < 4.0 * (gamma + 4.0 * b).powi(2),
        gamma * gamma - 4.0 * alpha0 * alpha0 > 16.0 * b * b,
        16.0 * (alpha0 - 2.0 * PI).powi(2) + (gamma - 10.0 * b).powi(2)
            < 4.0 * (gamma - 4.0 * b).powi(2),
    ]
}

/// A tongue from a node with `lambda0 < 0`, deformed by `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicTongue {
    pub k: u32,
    pub node: MeshNode,
}

impl HyperbolicTongue {
    /// Complex eigenvalues at first order: negative radicand with selection
    /// integral `1/2`.
    pub fn contains(&self, alpha0: f64, gamma: f64, beta: f64) -> bool {
        split_radicand(
            &self.node,
            0.5,
            &DynamoDirection::new(alpha0 - self.node.param, gamma, beta),
        ) < 0.0
    }

    /// Positive `gamma` at which the tongue meets `alpha0 = alpha0_node`.
    pub fn offset(&self, beta: f64) -> f64 {
        let (n, m) = (self.node.n as f64, self.node.m as f64);
        let (e, d) = (sign(self.node.eps), sign(self.node.delta));
        let s = if (self.node.n + self.node.m) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        // roots of (eps g/2 - s pi n beta)(delta g/2 - s pi m beta)
        (2.0 * s * e * PI * n * beta).max(2.0 * s * d * PI * m * beta)
    }
}

pub fn hyperbolic_tongues(k: u32) -> Vec<HyperbolicTongue> {
    beta_zero_tongues(k)
        .into_iter()
        .map(|t| HyperbolicTongue { k, node: t.node })
        .collect()
}

/// A region of complex eigenvalues around a node with `lambda0 > 0`
/// (`eps = delta`, `m = n + 2k`) at fixed `beta`:
/// `4k^2 (alpha0 - a_c)^2 + n(2k + n)(gamma - g_c)^2 < n(2k + n) 4k^2 pi^2 beta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub k: u32,
    pub node: MeshNode,
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
}

impl Ellipse {
    pub fn contains(&self, alpha0: f64, gamma: f64) -> bool {
        let (a, g) = self.semi_axes;
        if a == 0.0 || g == 0.0 {
            return false;
        }
        ((alpha0 - self.center.0) / a).powi(2) + ((gamma - self.center.1) / g).powi(2) < 1.0
    }

    /// `count` points on the boundary, counter-clockwise from the right.
    pub fn boundary(&self, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                (
                    self.center.0 + self.semi_axes.0 * t.cos(),
                    self.center.1 + self.semi_axes.1 * t.sin(),
                )
            })
            .collect()
    }
}

/// Ellipses of `cos(2 pi k x)` for `n = 1 ..= n_max`, both signs.
pub fn ellipses(k: u32, beta: f64, n_max: u32) -> Vec<Ellipse> {
    let mut out = Vec::new();
    let kf = k as f64;
    for n in 1..=n_max as i64 {
        for eps in [1, -1] {
            let node = make_node(n, eps, n + 2 * k as i64, eps);
            let nf = n as f64;
            let e = sign(eps);
            out.push(Ellipse {
                k,
                node,
                center: (node.param, 2.0 * e * PI * (nf + kf) * beta),
                semi_axes: (
                    (nf * (2.0 * kf + nf)).sqrt() * PI * beta.abs(),
                    2.0 * kf * PI * beta.abs(),
                ),
            });
        }
    }
    out.sort_by(|a, b| a.center.0.total_cmp(&b.center.0));
    out
}

/// The corridor `2 gamma = k beta (alpha0 +- 4 pi)` containing the
/// ellipses; returns the two `gamma` values.
pub fn corridor(k: u32, beta: f64, alpha0: f64) -> (f64, f64) {
    let kb = k as f64 * beta / 2.0;
    (kb * (alpha0 - 4.0 * PI), kb * (alpha0 + 4.0 * PI))
}
