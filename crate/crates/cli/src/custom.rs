//! User-defined problems read from JSON.
//!
//! A problem is a list of constant matrix terms, each multiplied by a power
//! of `lambda` and optionally by one parameter:
//!
//! ```json
//! {
//!   "order": 2, "size": 1,
//!   "parameters": ["theta"], "p0": [-4.6],
//!   "operator": [
//!     {"j": 0, "matrix": [[1]]},
//!     {"j": 2, "lambda_power": 1, "matrix": [[-1]]}
//!   ],
//!   "boundary": [
//!     {"block": "a", "matrix": [[1, 0], [0, 1]]},
//!     {"block": "b", "param": "theta", "matrix": [[0, 0], [-1, 0]]}
//!   ]
//! }
//! ```
//!
//! `l_j` multiplies `u^(m-j)`. Entries are numbers or `[re, im]` pairs.
//! Block `a` acts on the traces at `x = 0`, block `b` on those at `x = 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use spectral_mesh::problem::{DerivMode, FamilySource, ParameterPoint, Partial, ProblemFamily};
use spectral_mesh::{Complex64, Family};

use crate::error::{config, CliError, Step};

type CMatrix = spectral_mesh::CMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    /// Operator terms only: the coefficient index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    /// Boundary terms only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<Block>,
    #[serde(default)]
    pub lambda_power: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub order: usize,
    pub size: usize,
    pub parameters: Vec<String>,
    pub p0: Vec<f64>,
    pub operator: Vec<Term>,
    pub boundary: Vec<Term>,
}

/// A term with its matrix converted and its parameter resolved.
#[derive(Debug, Clone)]
struct Resolved {
    slot: usize,
    power: usize,
    param: Option<usize>,
    matrix: CMatrix,
}

#[derive(Debug, Clone)]
struct CustomSource {
    order: usize,
    size: usize,
    n_params: usize,
    operator: Vec<Resolved>,
    boundary: Vec<Resolved>,
    degree: usize,
}

fn falling(s: usize, r: usize) -> f64 {
    (s - r + 1..=s).map(|i| i as f64).product()
}

impl CustomSource {
    fn sum(
        &self,
        terms: &[Resolved],
        slot: usize,
        shape: (usize, usize),
        partial: Partial,
        lambda: Complex64,
        p: &[f64],
    ) -> CMatrix {
        let mut out = CMatrix::zeros(shape.0, shape.1);
        for t in terms
            .iter()
            .filter(|t| t.slot == slot && t.power >= partial.lambda)
        {
            let factor = match (partial.param, t.param) {
                (None, None) => 1.0,
                (None, Some(k)) => p[k],
                (Some(q), Some(k)) if q == k => 1.0,
                _ => continue,
            };
            let r = partial.lambda;
            out += &t.matrix * (lambda.powu((t.power - r) as u32) * falling(t.power, r) * factor);
        }
        out
    }
}

impl FamilySource<f64> for CustomSource {
    fn order(&self) -> usize {
        self.order
    }

    fn size(&self) -> usize {
        self.size
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn coeff(&self, j: usize, dx: usize, x: f64, lambda: Complex64, p: &[f64]) -> CMatrix {
        self.coeff_partial(j, dx, Partial::lambda(0), x, lambda, p)
            .expect("constant coefficients")
    }

    fn boundary(&self, lambda: Complex64, p: &[f64]) -> CMatrix {
        self.boundary_partial(Partial::lambda(0), lambda, p)
            .expect("constant boundary")
    }

    fn coeff_partial(
        &self,
        j: usize,
        dx: usize,
        partial: Partial,
        _x: f64,
        lambda: Complex64,
        p: &[f64],
    ) -> Option<CMatrix> {
        let n = self.size;
        if dx > 0 {
            return Some(CMatrix::zeros(n, n));
        }
        Some(self.sum(&self.operator, j, (n, n), partial, lambda, p))
    }

    fn boundary_partial(&self, partial: Partial, lambda: Complex64, p: &[f64]) -> Option<CMatrix> {
        let k = self.order * self.size;
        let mut out = CMatrix::zeros(k, 2 * k);
        out.view_mut((0, 0), (k, k)).copy_from(&self.sum(
            &self.boundary,
            0,
            (k, k),
            partial,
            lambda,
            p,
        ));
        out.view_mut((0, k), (k, k)).copy_from(&self.sum(
            &self.boundary,
            1,
            (k, k),
            partial,
            lambda,
            p,
        ));
        Some(out)
    }

    fn lambda_degree(&self) -> Option<usize> {
        Some(self.degree.max(1))
    }
}

fn matrix(rows: &[Vec<Entry>], shape: usize, what: &str) -> Result<CMatrix, CliError> {
    if rows.len() != shape || rows.iter().any(|r| r.len() != shape) {
        return Err(config(format!("{what}: expected a {shape}x{shape} matrix")));
    }
    Ok(CMatrix::from_fn(shape, shape, |i, j| rows[i][j].value()))
}

impl CustomSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: CustomSpec =
            serde_json::from_str(text).map_err(|e| config(format!("spec file: {e}")))?;
        spec.source()?;
        Ok(spec)
    }

    fn param_index(&self, name: &Option<String>, what: &str) -> Result<Option<usize>, CliError> {
        match name {
            None => Ok(None),
            Some(n) => self
                .parameters
                .iter()
                .position(|p| p == n)
                .map(Some)
                .ok_or_else(|| config(format!("{what}: unknown parameter '{n}'"))),
        }
    }

    fn source(&self) -> Result<CustomSource, CliError> {
        if self.order == 0 || self.size == 0 {
            return Err(config("spec file: order and size must be positive"));
        }
        if self.parameters.is_empty() {
            return Err(config("spec file: declare at least one parameter"));
        }
        if self.p0.len() != self.parameters.len() {
            return Err(config("spec file: p0 must have one value per parameter"));
        }
        let mut operator = Vec::new();
        for (i, t) in self.operator.iter().enumerate() {
            let what = format!("operator term {i}");
            let j = t.j.ok_or_else(|| config(format!("{what}: missing 'j'")))?;
            if j > self.order || t.block.is_some() {
                return Err(config(format!(
                    "{what}: needs 0 <= j <= order and no 'block'"
                )));
            }
            operator.push(Resolved {
                slot: j,
                power: t.lambda_power,
                param: self.param_index(&t.param, &what)?,
                matrix: matrix(&t.matrix, self.size, &what)?,
            });
        }
        if !operator.iter().any(|t| t.slot == 0) {
            return Err(config("spec file: the leading coefficient l_0 is missing"));
        }
        let mut boundary = Vec::new();
        for (i, t) in self.boundary.iter().enumerate() {
            let what = format!("boundary term {i}");
            let block = t
                .block
                .ok_or_else(|| config(format!("{what}: missing 'block'")))?;
            if t.j.is_some() {
                return Err(config(format!("{what}: 'j' is not allowed")));
            }
            boundary.push(Resolved {
                slot: (block == Block::B) as usize,
                power: t.lambda_power,
                param: self.param_index(&t.param, &what)?,
                matrix: matrix(&t.matrix, self.order * self.size, &what)?,
            });
        }
        let degree = operator
            .iter()
            .chain(&boundary)
            .map(|t| t.power)
            .max()
            .unwrap_or(0);
        Ok(CustomSource {
            order: self.order,
            size: self.size,
            n_params: self.parameters.len(),
            operator,
            boundary,
            degree,
        })
    }

    pub fn family(&self, p: &[f64]) -> Result<Family, CliError> {
        let source = self.source()?;
        let anchor =
            ParameterPoint::new(Complex64::new(0.0, 0.0), p.to_vec()).step("custom family")?;
        ProblemFamily::new(Arc::new(source), DerivMode::Analytic, &anchor).step("custom family")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_mesh::oracle::{collocate, spectrum, Window};

    const DIRICHLET: &str = r#"{
        "order": 2, "size": 1, "parameters": ["c"], "p0": [0.0],
        "operator": [
            {"j": 0, "matrix": [[1]]},
            {"j": 2, "lambda_power": 1, "matrix": [[-1]]},
            {"j": 2, "param": "c", "matrix": [[1]]}
        ],
        "boundary": [
            {"block": "a", "matrix": [[1, 0], [0, 0]]},
            {"block": "b", "matrix": [[0, 0], [1, 0]]}
        ]
    }"#;

    #[test]
    fn dirichlet_spectrum_is_shifted_by_the_parameter() {
        let spec = CustomSpec::parse(DIRICHLET).unwrap();
        let family = spec.family(&[2.0]).unwrap();
        let dp = collocate(&family, &[2.0], 1, 32).unwrap();
        let eig = spectrum(&dp, &Window::new((-50.0, 5.0), (-1.0, 1.0))).unwrap();
        // u'' + (2 - lambda) u = 0: lambda = 2 - (k pi)^2
        let pi2 = std::f64::consts::PI.powi(2);
        assert_eq!(eig.len(), 2, "{eig:?}");
        for (z, k) in eig.iter().zip([2.0, 1.0]) {
            assert!(
                (z - Complex64::new(2.0 - k * k * pi2, 0.0)).norm() < 1e-9,
                "{z}"
            );
        }
    }

    #[test]
    fn partials_are_analytic() {
        let spec = CustomSpec::parse(DIRICHLET).unwrap();
        let src = spec.source().unwrap();
        let lam = Complex64::new(0.5, 1.0);
        let d = src
            .coeff_partial(2, 0, Partial::lambda(1), 0.3, lam, &[1.0])
            .unwrap();
        assert_eq!(d[(0, 0)], Complex64::new(-1.0, 0.0));
        let d = src
            .coeff_partial(2, 0, Partial::mixed(0, 0), 0.3, lam, &[1.0])
            .unwrap();
        assert_eq!(d[(0, 0)], Complex64::new(1.0, 0.0));
        let d = src
            .coeff_partial(2, 0, Partial::mixed(1, 0), 0.3, lam, &[1.0])
            .unwrap();
        assert_eq!(d[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bad_specs_are_config_errors() {
        for bad in [
            r#"{"order": 2, "size": 1, "parameters": [], "p0": [], "operator": [], "boundary": []}"#,
            &DIRICHLET.replace("[[1, 0], [0, 0]]", "[[1, 0]]"),
            &DIRICHLET.replace("\"param\": \"c\"", "\"param\": \"q\""),
            &DIRICHLET.replace("{\"j\": 0, \"matrix\": [[1]]},", ""),
            "not json",
        ] {
            assert!(
                matches!(CustomSpec::parse(bad), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }
}
