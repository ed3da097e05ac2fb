//! Small dense helpers on top of nalgebra for complex matrices.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{fnorm, modulus, real, CMatrix, CVector, Real};

/// Solves `a x = b` by LU with partial pivoting.
pub fn lu_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Option<CMatrix<T>> {
    a.clone().lu().solve(b)
}

/// Full SVD of a (possibly rectangular) matrix.
///
/// Rectangular input is zero-padded to a square matrix so that `v_t` is a
/// complete unitary basis. Singular values are returned in descending order
/// together with matching rows of `v_t`.
pub struct FullSvd<T: Real> {
    pub singular_values: Vec<T>,
    pub u: CMatrix<T>,
    pub v_t: CMatrix<T>,
}

pub fn full_svd<T: Real>(m: &CMatrix<T>) -> FullSvd<T> {
    let (r, c) = m.shape();
    let n = r.max(c);
    let mut sq = CMatrix::<T>::zeros(n, n);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let mut svd = sq.svd(true, true);
    svd.sort_by_singular_values();
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    FullSvd {
        singular_values: svd.singular_values.iter().copied().collect(),
        u,
        v_t,
    }
}

/// 2-norm condition number; infinite when the matrix is singular.
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> T {
    let s = full_svd(m).singular_values;
    let (max, min) = (s[0], s[s.len() - 1]);
    if min <= T::zero() {
        return real(f64::INFINITY);
    }
    max / min
}

/// Right singular vector of the smallest singular value, unit norm.
pub fn smallest_right_singular_vector<T: Real>(m: &CMatrix<T>) -> (T, CVector<T>) {
    let svd = full_svd(m);
    let k = m.ncols() - 1;
    let row = svd.v_t.row(k);
    let v = CVector::<T>::from_iterator(row.len(), row.iter().map(|z| z.conj()));
    (svd.singular_values[k], v)
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur =
        Schur::try_new(m.clone(), T::default_epsilon(), 20_000).ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Diagonal similarity scaling (Parlett–Reinsch) applied in place.
/// Returns the diagonal `d` such that the balanced matrix is `D^-1 M D`.
pub fn balance<T: Real>(m: &mut CMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let radix = real::<T>(2.0);
    let sqrdx = radix * radix;
    let mut d = vec![T::one(); n];
    for _ in 0..100 {
        let mut done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += modulus(m[(j, i)]);
                    r += modulus(m[(i, j)]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            let g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < real::<T>(0.95) * s {
                done = false;
                d[i] *= f;
                let fc = Complex::new(f, T::zero());
                for j in 0..n {
                    m[(i, j)] /= fc;
                    m[(j, i)] *= fc;
                }
            }
        }
        if done {
            break;
        }
    }
    d
}

/// Relative residual `||a x|| / (||a|| ||x||)`.
pub fn relative_residual<T: Real>(a: &CMatrix<T>, x: &CVector<T>) -> T {
    let ax = a * x;
    let denom = fnorm(a) * crate::scalar::vnorm(x);
    if denom == T::zero() {
        return T::zero();
    }
    crate::scalar::vnorm(&ax) / denom
}

pub fn to_complex<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}
