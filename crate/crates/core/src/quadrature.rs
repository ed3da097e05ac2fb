//! Gauss–Legendre quadrature on `[0, 1]`.

use num_complex::Complex;

use crate::scalar::{abs, real, Real};

pub const DEFAULT_NODES: usize = 64;

/// Gauss–Legendre rule mapped to the unit interval.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Default for GaussLegendre<T> {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = real::<T>(0.5);
        let tol = T::default_epsilon() * real(4.0);
        // Roots are symmetric; compute the upper half by Newton on P_n.
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = real::<T>(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if abs(dx) <= tol {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = real::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = half - half * x;
            nodes[n - 1 - i] = half + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn integrate_complex<F: FnMut(T) -> Complex<T>>(&self, mut f: F) -> Complex<T> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &w)| {
                acc + f(x) * Complex::new(w, T::zero())
            })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = real::<T>(k as f64);
        let p2 = ((real::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = real::<T>(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}
