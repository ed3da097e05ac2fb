use itertools::Itertools;
use num_complex::Complex;

use super::collocate::{collocate, spectrum_with, SpectrumSettings, Window};
use crate::error::{Error, Result};
use crate::perturbation::SplittingResult;
use crate::problem::{ParameterDirection, ParameterPoint, ProblemFamily};
use crate::scalar::{modulus, precision_tol, real, Real};

/// What is fitted against `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftMode {
    /// `|lambda(eps) - lambda0 - lambda1 eps^(1/order)|`, expected to scale
    /// like `eps^(2/order)`.
    FirstOrderResidual,
    /// `|lambda(eps) - lambda0|`, expected to scale like `eps^(1/order)`.
    RawDrift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSettings<T> {
    pub n_nodes: usize,
    /// Falls back to the family's declared degree, then to 2.
    pub lambda_degree: Option<usize>,
    /// Half-width of the search box around `lambda0`.
    pub radius: T,
    pub mode: DriftMode,
    /// Branches whose residual stays below this at every `eps` are exact to
    /// working precision and left out of the fit.
    pub noise_floor: T,
    pub spectrum: SpectrumSettings<T>,
}

impl<T: Real> Default for TrackSettings<T> {
    fn default() -> Self {
        Self {
            n_nodes: 64,
            lambda_degree: None,
            radius: real(0.5),
            mode: DriftMode::FirstOrderResidual,
            noise_floor: precision_tol(1e-11),
            spectrum: SpectrumSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRecord<T: Real> {
    pub mode: DriftMode,
    pub epsilons: Vec<T>,
    /// Oracle eigenvalues matched to the predicted branches, per `eps`.
    pub matched: Vec<Vec<Complex<T>>>,
    pub predicted: Vec<Vec<Complex<T>>>,
    /// Per `eps`, per branch.
    pub residuals: Vec<Vec<T>>,
    /// Branches that entered the fit.
    pub included: Vec<bool>,
    /// Least-squares slope of `log residual` against `log eps`; `NaN` when
    /// every branch sits at the noise floor.
    pub fitted_exponent: T,
    /// `(lambda(eps) - reference) / eps^exponent` for the dominant branch,
    /// averaged over `eps`.
    pub fitted_coefficient: Complex<T>,
}

impl<T: Real> DriftRecord<T> {
    /// All branches are exact to working precision.
    pub fn at_noise_floor(&self) -> bool {
        !self.included.iter().any(|&b| b)
    }

    /// Largest residual over branches at each `eps`.
    pub fn max_residuals(&self) -> Vec<T> {
        self.residuals
            .iter()
            .map(|r| r.iter().copied().fold(T::zero(), |a, b| a.max(b)))
            .collect()
    }
}

/// Follows the eigenvalues near `point.lambda0` along `p0 + eps pdot` with
/// the collocation oracle and fits their drift against the prediction of
/// `reference`.
///
/// `epsilons` must hold at least three strictly decreasing positive values.
pub fn track_split<T: Real>(
    family: &ProblemFamily<T>,
    point: &ParameterPoint<T>,
    direction: &ParameterDirection<T>,
    epsilons: &[T],
    reference: &SplittingResult<T>,
    settings: &TrackSettings<T>,
) -> Result<DriftRecord<T>> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least three eps values".into(),
        ));
    }
    if epsilons.iter().any(|&e| e <= T::zero()) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "eps values must be positive and strictly decreasing".into(),
        ));
    }
    if direction.pdot.len() != family.n_params() {
        return Err(Error::DimensionMismatch("direction length".into()));
    }
    let branches = reference.lambda1.len();
    if branches == 0 {
        return Err(Error::InvalidArgument(
            "reference has no finite branches".into(),
        ));
    }
    let degree = settings
        .lambda_degree
        .or(family.lambda_degree())
        .unwrap_or(2);
    let lambda0 = point.lambda0;
    let scale = T::one() + modulus(lambda0);
    let window = Window::around(lambda0, settings.radius);

    let mut matched = Vec::with_capacity(epsilons.len());
    let mut predicted = Vec::with_capacity(epsilons.len());
    let mut residuals = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let shifted = point.shifted(direction, eps);
        let dp = collocate(family, &shifted.p0, degree, settings.n_nodes)?;
        let mut cands = spectrum_with(&dp, &window, &settings.spectrum)?;
        let found = cands.len();
        if found < branches {
            return Err(Error::BranchesNotFound {
                eps: nalgebra::try_convert(eps).unwrap_or(f64::NAN),
                found,
                expected: branches,
            });
        }
        cands.sort_by(|a, b| {
            modulus(a - lambda0)
                .partial_cmp(&modulus(b - lambda0))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        cands.truncate(branches + 2);
        let pred = reference.predict(lambda0, eps);
        let chosen = assign(&cands, &pred, eps, scale)?;
        let res: Vec<T> = chosen
            .iter()
            .zip(&pred)
            .map(|(z, p)| match settings.mode {
                DriftMode::FirstOrderResidual => modulus(z - p),
                DriftMode::RawDrift => modulus(z - lambda0),
            })
            .collect();
        matched.push(chosen);
        predicted.push(pred);
        residuals.push(res);
    }

    let floor = settings.noise_floor * scale;
    let included: Vec<bool> = (0..branches)
        .map(|b| residuals.iter().any(|r| r[b] > floor))
        .collect();
    let ys: Vec<T> = residuals
        .iter()
        .map(|r| {
            r.iter()
                .zip(&included)
                .filter(|(_, &inc)| inc)
                .map(|(&v, _)| v)
                .fold(T::zero(), |a, b| a.max(b))
        })
        .collect();
    let (fitted_exponent, fitted_coefficient) =
        if included.iter().any(|&b| b) && ys.iter().all(|&y| y > T::zero()) {
            let xs: Vec<T> = epsilons.iter().map(|e| e.ln()).collect();
            let ls: Vec<T> = ys.iter().map(|y| y.ln()).collect();
            let slope = least_squares_slope(&xs, &ls);
            // dominant branch at the smallest eps
            let last = epsilons.len() - 1;
            let dom = (0..branches)
                .filter(|&b| included[b])
                .max_by(|&a, &b| {
                    residuals[last][a]
                        .partial_cmp(&residuals[last][b])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, &eps) in epsilons.iter().enumerate() {
                let base = match settings.mode {
                    DriftMode::FirstOrderResidual => predicted[k][dom],
                    DriftMode::RawDrift => lambda0,
                };
                acc += (matched[k][dom] - base) / Complex::new(eps.powf(slope), T::zero());
            }
            (
                slope,
                acc / Complex::new(real::<T>(epsilons.len() as f64), T::zero()),
            )
        } else {
            (real::<T>(f64::NAN), Complex::new(T::zero(), T::zero()))
        };

    Ok(DriftRecord {
        mode: settings.mode,
        epsilons: epsilons.to_vec(),
        matched,
        predicted,
        residuals,
        included,
        fitted_exponent,
        fitted_coefficient,
    })
}

fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = real::<T>(xs.len() as f64);
    let mx = xs.iter().copied().fold(T::zero(), |a, b| a + b) / n;
    let my = ys.iter().copied().fold(T::zero(), |a, b| a + b) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Injective assignment of candidates to predictions minimizing the total
/// distance. Two optimal assignments with different outcomes are reported
/// as ambiguous.
fn assign<T: Real>(
    cands: &[Complex<T>],
    pred: &[Complex<T>],
    eps: T,
    scale: T,
) -> Result<Vec<Complex<T>>> {
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut runner: Option<(T, Vec<usize>)> = None;
    for perm in (0..cands.len()).permutations(pred.len()) {
        let cost = perm
            .iter()
            .zip(pred)
            .map(|(&i, p)| modulus(cands[i] - p))
            .fold(T::zero(), |a, b| a + b);
        match &best {
            Some((c, _)) if cost >= *c => {
                if runner.as_ref().is_none_or(|(r, _)| cost < *r) {
                    runner = Some((cost, perm));
                }
            }
            _ => {
                runner = best.take();
                best = Some((cost, perm));
            }
        }
    }
    let (bc, bp) = best.expect("at least one candidate set");
    if let Some((rc, rp)) = runner {
        let tie = precision_tol::<T>(1e-12) * scale;
        if rc - bc <= tie {
            let differs =
                bp.iter().zip(&rp).zip(pred).any(|((&a, &b), p)| {
                    (modulus(cands[a] - p) - modulus(cands[b] - p)).abs() > tie
                });
            if differs {
                return Err(Error::MatchingAmbiguous {
                    eps: nalgebra::try_convert(eps).unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok(bp.into_iter().map(|i| cands[i]).collect())
}
