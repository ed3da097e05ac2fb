mod dump;
mod mesh;
mod split;
mod tongues;
mod verify;

pub use dump::adjoint_dump;
pub use mesh::{mesh, nodes};
pub use split::split;
pub use tongues::tongues;
pub use verify::verify;

use spectral_mesh::adjoint::Completion;
use spectral_mesh::models::dynamo::{self, DynamoDirection, DynamoParams};
use spectral_mesh::models::string::{self, StringParams};
use spectral_mesh::models::MeshNode;
use spectral_mesh::perturbation::{
    fg_matrices, semisimple_split, SemiSimpleGroup, SplittingResult,
};
use spectral_mesh::problem::{taylor_data, ParameterDirection, ParameterPoint};
use spectral_mesh::{Complex64, Family};

use crate::config::Model;
use crate::error::{CliError, Step};

/// A double eigenvalue at a mesh node with its family and eigenfunctions.
pub struct NodeSetup {
    pub node: MeshNode,
    pub family: Family,
    pub point: ParameterPoint<f64>,
    pub group: SemiSimpleGroup<f64>,
}

impl NodeSetup {
    pub fn new(
        model: &Model,
        node: MeshNode,
        completion: &Completion<f64>,
    ) -> Result<Self, CliError> {
        match model {
            Model::String => {
                let family = string::string_problem(&StringParams::free(node.param))
                    .step("string family")?;
                let group = string::node_group(&family, &node).step("eigenvalue group")?;
                Ok(Self {
                    point: string::node_point(&node),
                    node,
                    family,
                    group,
                })
            }
            Model::Dynamo(profile) => {
                let family = dynamo::dynamo_problem(&DynamoParams::new(
                    node.param,
                    0.0,
                    0.0,
                    profile.clone(),
                ))
                .step("dynamo family")?;
                let group =
                    dynamo::node_group(&family, &node, completion).step("eigenvalue group")?;
                Ok(Self {
                    point: dynamo::node_point(&node),
                    node,
                    family,
                    group,
                })
            }
            Model::Custom(_) => unreachable!("custom models have no nodes"),
        }
    }

    /// First-order increments from the generic pencil.
    pub fn pencil(&self, dir: &[f64]) -> Result<SplittingResult<f64>, CliError> {
        let td = taylor_data(
            &self.family,
            &self.point,
            &ParameterDirection::new(dir.to_vec()),
            1,
        )
        .step("Taylor data")?;
        let (f, g) = fg_matrices(&self.group, &td);
        semisimple_split(&f, &g).step("pencil splitting")
    }

    /// First-order increments from the displayed closed forms.
    pub fn closed_form(&self, model: &Model, dir: &[f64]) -> [Complex64; 2] {
        match model {
            Model::String => string::split(&self.node, &StringParams::from_slice(dir)),
            Model::Dynamo(profile) => {
                let sel = dynamo::selection_integral(profile, &self.node);
                dynamo::split(
                    &self.node,
                    sel,
                    &DynamoDirection::new(dir[0], dir[1], dir[2]),
                )
            }
            Model::Custom(_) => unreachable!("custom models have no closed form"),
        }
    }

    /// Default oracle search radius.
    pub fn radius(model: &Model) -> f64 {
        match model {
            Model::String => 0.3,
            _ => 5.0,
        }
    }
}

/// Smallest distance between two unordered pairs, relative to the first.
pub fn pair_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != 2 || b.len() != 2 {
        return f64::INFINITY;
    }
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(crossed) / a[0].norm().max(a[1].norm()).max(1e-300)
}
