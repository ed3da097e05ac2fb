//! `mesh` and `nodes`.

use std::f64::consts::PI;

use rayon::prelude::*;

use spectral_mesh::models::{dynamo, string};
use spectral_mesh::oracle::{collocate, spectrum, Window};
use spectral_mesh::{Complex64, Error};

use crate::config::{sign_label, Model, Range, RunConfig, Source};
use crate::error::{config, CliError, Step};
use crate::output::Table;

fn branch_id(n: i64, eps: i32) -> String {
    format!("{n}{}", sign_label(eps))
}

/// The swept parameter and its range: the one given as a range, or the
/// model's mesh parameter with a default range.
fn sweep_axis(cfg: &RunConfig) -> Result<(String, Range), CliError> {
    let ranges = cfg.ranges();
    match ranges.len() {
        1 => Ok(ranges[0].clone()),
        0 => match cfg.model() {
            Model::String => Ok(("omega".into(), Range { lo: -2.0, hi: 2.0 })),
            Model::Dynamo(_) => Ok((
                "alpha0".into(),
                Range {
                    lo: -4.0 * PI,
                    hi: 4.0 * PI,
                },
            )),
            Model::Custom(_) => Err(config("mesh: give one parameter as a range A..B")),
        },
        _ => Err(config("mesh: exactly one parameter may be a range")),
    }
}

pub fn mesh(
    cfg: &RunConfig,
    modes: u32,
    samples: usize,
    source: Option<Source>,
    window: Option<&[f64]>,
) -> Result<Table, CliError> {
    if samples == 0 {
        return Err(config("mesh: --samples must be positive"));
    }
    let model = cfg.model();
    let source = source.unwrap_or(match model {
        Model::Custom(_) => Source::Oracle,
        _ => Source::ClosedForm,
    });
    let (axis, range) = sweep_axis(cfg)?;
    match source {
        Source::ClosedForm if window.is_some() => {
            Err(config("mesh: --window applies to --source oracle"))
        }
        Source::ClosedForm => closed_form_mesh(cfg, &axis, range, modes, samples),
        Source::Oracle => oracle_mesh(cfg, &axis, range, modes, samples, window),
    }
}

fn closed_form_mesh(
    cfg: &RunConfig,
    axis: &str,
    range: Range,
    modes: u32,
    samples: usize,
) -> Result<Table, CliError> {
    let model = cfg.model();
    let mesh_param = match model {
        Model::String => "omega",
        Model::Dynamo(_) => "alpha0",
        Model::Custom(_) => {
            return Err(config(
                "mesh: the custom model has no closed form; use --source oracle",
            ))
        }
    };
    if axis != mesh_param {
        return Err(config(format!(
            "mesh: the closed-form mesh sweeps {mesh_param}"
        )));
    }
    if cfg
        .point()
        .iter()
        .enumerate()
        .any(|(i, &x)| i != cfg.index(mesh_param) && x != 0.0)
    {
        return Err(config(
            "mesh: the closed-form mesh is unperturbed; use --source oracle for other parameters",
        ));
    }
    let params = range.linspace(samples);
    let m = modes as i64;
    let labels: Vec<(i64, i32)> = match model {
        // (0, +) and (0, -) are the same branch
        Model::String => (-m..=m)
            .flat_map(|n| [(n, 1), (n, -1)])
            .filter(|&(n, e)| n != 0 || e > 0)
            .collect(),
        _ => (1..=m).flat_map(|n| [(n, 1), (n, -1)]).collect(),
    };
    let mut table = Table::new(&["param", "re_lambda", "im_lambda", "branch_id"]);
    for (n, eps) in labels {
        for &x in &params {
            let lam = match model {
                Model::String => string::branch(n, eps, x),
                _ => Complex64::new(dynamo::branch(n, eps, x), 0.0),
            };
            table.push(vec![
                x.into(),
                lam.re.into(),
                lam.im.into(),
                branch_id(n, eps).into(),
            ]);
        }
    }
    Ok(table)
}

pub fn parse_window(w: &[f64]) -> Result<Window<f64>, CliError> {
    if w.len() != 4 || w[0] >= w[1] || w[2] >= w[3] || w.iter().any(|x| !x.is_finite()) {
        return Err(config(
            "window: expected RE0,RE1,IM0,IM1 with RE0 < RE1 and IM0 < IM1",
        ));
    }
    Ok(Window::new((w[0], w[1]), (w[2], w[3])))
}

fn default_window(model: &Model, modes: u32, range: Range, axis: &str) -> Window<f64> {
    let m = modes as f64;
    match model {
        Model::String => Window::new((-1.0, 1.0), (-m * 3.0, m * 3.0)),
        Model::Dynamo(_) => {
            let a = if axis == "alpha0" {
                range.lo.abs().max(range.hi.abs())
            } else {
                4.0 * PI
            };
            Window::new((-(PI * m).powi(2), a * a / 4.0 + 10.0), (-50.0, 50.0))
        }
        Model::Custom(_) => Window::new((-100.0, 100.0), (-100.0, 100.0)),
    }
}

fn oracle_mesh(
    cfg: &RunConfig,
    axis: &str,
    range: Range,
    modes: u32,
    samples: usize,
    window: Option<&[f64]>,
) -> Result<Table, CliError> {
    let model = cfg.model();
    let window = match window {
        Some(w) => parse_window(w)?,
        None => default_window(model, modes, range, axis),
    };
    let base = cfg.point();
    let k = cfg.index(axis);
    let params = range.linspace(samples);
    let results: Vec<Result<Vec<Complex64>, CliError>> = params
        .par_iter()
        .map(|&x| {
            let mut p = base.clone();
            p[k] = x;
            let family = match model.family(&p) {
                Ok(f) => f,
                // the string family does not exist at |Omega| = 1
                Err(CliError::Numerical {
                    source: Error::SingularLeadingCoefficient { .. },
                    ..
                }) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            let degree = family.lambda_degree().unwrap_or(2);
            let dp = collocate(&family, &p, degree, cfg.n_nodes).step("collocation")?;
            spectrum(&dp, &window).step("oracle spectrum")
        })
        .collect();
    let mut table = Table::new(&["param", "re_lambda", "im_lambda", "branch_id"]);
    for (&x, eig) in params.iter().zip(results) {
        for (rank, z) in eig?.into_iter().enumerate() {
            table.push(vec![
                x.into(),
                z.re.into(),
                z.im.into(),
                format!("r{rank}").into(),
            ]);
        }
    }
    Ok(table)
}

pub fn nodes(cfg: &RunConfig, modes: u32) -> Result<Table, CliError> {
    let m = modes as i64;
    let (all, param) = match cfg.model() {
        Model::String => (string::mesh_nodes(-m..=m, -m..=m), "omega"),
        Model::Dynamo(_) => (dynamo::mesh_nodes(1..=m, 1..=m), "alpha0"),
        Model::Custom(_) => {
            return Err(config(
                "nodes: defined for the string and dynamo models only",
            ))
        }
    };
    cfg.only_ranges(&[param])?;
    if cfg
        .settings
        .values()
        .any(|s| matches!(s, crate::config::Setting::Value(_)))
    {
        return Err(config(format!(
            "nodes: parameters fix nothing here; give {param} as a range to filter"
        )));
    }
    let filter = cfg.range(param);
    let mut table = Table::new(&[
        "n",
        "eps",
        "m",
        "delta",
        "param",
        "re_lambda",
        "im_lambda",
        "branches",
        "double",
        "critical",
    ]);
    for node in all
        .into_iter()
        .filter(|n| filter.is_none_or(|r| r.contains(n.param)))
    {
        table.push(vec![
            node.n.into(),
            (node.eps as i64).into(),
            node.m.into(),
            (node.delta as i64).into(),
            node.param.into(),
            node.lambda.re.into(),
            node.lambda.im.into(),
            node.branches.into(),
            node.is_double().into(),
            node.critical.into(),
        ]);
    }
    Ok(table)
}
