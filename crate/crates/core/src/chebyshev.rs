//! Chebyshev–Gauss–Lobatto grids on `[0, 1]`, differentiation matrices and
//! barycentric interpolation.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::{real, CVector, Real};

/// `n` Chebyshev–Gauss–Lobatto points on `[0, 1]`, ascending.
pub fn cgl_points<T: Real>(n: usize) -> Vec<T> {
    assert!(n >= 2, "need at least two Lobatto points");
    let pi = T::pi();
    let nm1 = real::<T>((n - 1) as f64);
    (0..n)
        .map(|k| {
            // (1 - cos(theta)) / 2 = sin^2(theta / 2), exact at both ends
            let half = pi * real::<T>(k as f64) / (real::<T>(2.0) * nm1);
            let s = half.sin();
            s * s
        })
        .collect()
}

/// Barycentric weights of the Lobatto grid (up to a common factor).
pub fn cgl_weights<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            if k == 0 || k == n - 1 {
                sign * real(0.5)
            } else {
                sign
            }
        })
        .collect()
}

/// First-derivative matrix on the `n`-point Lobatto grid of `[0, 1]`.
///
/// Diagonal entries use the negative-sum rule so that constants are
/// differentiated to zero up to round-off.
pub fn diff_matrix<T: Real>(n: usize) -> DMatrix<T> {
    let w = cgl_weights::<T>(n);
    let pi = T::pi();
    let nm1 = real::<T>((n - 1) as f64);
    let theta = |k: usize| pi * real::<T>(k as f64) / nm1;
    let mut d = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                // t_i - t_j = (cos th_j - cos th_i) / 2 = sin((th_i+th_j)/2) sin((th_i-th_j)/2)
                let (ti, tj) = (theta(i), theta(j));
                let half = real::<T>(0.5);
                let diff = ((ti + tj) * half).sin() * ((ti - tj) * half).sin();
                d[(i, j)] = (w[j] / w[i]) / diff;
            }
        }
    }
    negative_sum_diagonal(&mut d);
    d
}

/// Derivative matrices `D^0 .. D^max` on the Lobatto grid.
pub fn diff_matrices<T: Real>(n: usize, max: usize) -> Vec<DMatrix<T>> {
    let d1 = diff_matrix::<T>(n);
    let mut out = vec![DMatrix::<T>::identity(n, n)];
    for k in 1..=max {
        let mut next = &out[k - 1] * &d1;
        negative_sum_diagonal(&mut next);
        out.push(next);
    }
    out
}

fn negative_sum_diagonal<T: Real>(d: &mut DMatrix<T>) {
    let n = d.nrows();
    for i in 0..n {
        let mut s = T::zero();
        for j in 0..n {
            if j != i {
                s += d[(i, j)];
            }
        }
        d[(i, i)] = -s;
    }
}

/// Barycentric interpolation of vector-valued samples on the Lobatto grid.
pub fn interpolate<T: Real>(
    points: &[T],
    weights: &[T],
    values: &[CVector<T>],
    x: T,
) -> CVector<T> {
    let dim = values[0].len();
    let mut num = CVector::<T>::zeros(dim);
    let mut den = T::zero();
    for (k, (&xk, &wk)) in points.iter().zip(weights).enumerate() {
        let dx = x - xk;
        if dx == T::zero() {
            return values[k].clone();
        }
        let c = wk / dx;
        num += values[k].map(|z| z * Complex::new(c, T::zero()));
        den += c;
    }
    num.map(|z| z / Complex::new(den, T::zero()))
}
