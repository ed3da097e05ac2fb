//! Closed-form model problems: the rotating string with an eyelet, the
//! alpha^2-dynamo, and a scalar problem with a non-derogatory double
//! eigenvalue. All `f64`.

pub mod dynamo;
pub mod fixture;
pub mod string;

use num_complex::Complex64;

/// Intersection of two straight branches `(n, eps)` and `(m, delta)` of a
/// spectral mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNode {
    pub n: i64,
    pub eps: i32,
    pub m: i64,
    pub delta: i32,
    /// Mesh parameter at the node: `Omega` for the string, `alpha0` for the
    /// dynamo.
    pub param: f64,
    pub lambda: Complex64,
    /// String nodes at `|Omega| = 1`, where the family is not defined.
    pub critical: bool,
    /// Number of mesh branches through the node; `None` when infinitely
    /// many pass (only at critical string nodes).
    pub branches: Option<usize>,
}

impl MeshNode {
    /// The node with the two branches exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n: self.m,
            eps: self.delta,
            m: self.n,
            delta: self.eps,
            ..*self
        }
    }

    /// Exactly two branches cross: the double eigenvalue is semi-simple
    /// with the closed-form eigenfunctions.
    pub fn is_double(&self) -> bool {
        self.branches == Some(2) && !self.critical
    }
}

pub(crate) fn sign(s: i32) -> f64 {
    if s < 0 {
        -1.0
    } else {
        1.0
    }
}

pub(crate) fn parse_sign(c: &str) -> Option<i32> {
    match c.trim() {
        "+" | "+1" | "1" => Some(1),
        "-" | "-1" => Some(-1),
        _ => None,
    }
}

/// Parses `n,eps,m,delta`, e.g. `1,-,2,+`.
pub fn parse_node_labels(s: &str) -> Option<(i64, i32, i64, i32)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return None;
    }
    Some((
        parts[0].trim().parse().ok()?,
        parse_sign(parts[1])?,
        parts[2].trim().parse().ok()?,
        parse_sign(parts[3])?,
    ))
}
