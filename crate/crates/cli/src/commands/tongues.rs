//! `tongues`: first-order instability regions on a parameter grid.

use std::f64::consts::PI;

use rayon::prelude::*;

use spectral_mesh::models::dynamo::{self, Profile};
use spectral_mesh::models::string::{self, StringParams};
use spectral_mesh::models::MeshNode;

use crate::config::{parse_node, Model, Range, RunConfig, Setting};
use crate::error::{config, CliError};
use crate::output::{Cell, Table};

/// A named region and its membership test at `(param1, param2)`.
type Region<'a> = (String, Box<dyn Fn(f64, f64) -> bool + Send + Sync + 'a>);

pub fn tongues(
    cfg: &RunConfig,
    node: Option<&str>,
    grid: usize,
    ellipses: u32,
) -> Result<Table, CliError> {
    if grid < 2 {
        return Err(config("tongues: --grid must be at least 2"));
    }
    let (axes, regions) = match cfg.model() {
        Model::Dynamo(profile) => {
            if node.is_some() {
                return Err(config("tongues: --node applies to the string model"));
            }
            dynamo_regions(cfg, profile, ellipses)?
        }
        Model::String => {
            if ellipses > 0 {
                return Err(config("tongues: --ellipses applies to the dynamo model"));
            }
            let label = node.ok_or_else(|| config("tongues: the string model needs --node"))?;
            string_regions(cfg, cfg.model().node(parse_node(label)?)?)?
        }
        Model::Custom(_) => {
            return Err(config(
                "tongues: defined for the string and dynamo models only",
            ))
        }
    };
    let xs = axes.0.linspace(grid);
    let ys = axes.1.linspace(grid);
    let rows: Vec<Vec<Vec<Cell>>> = xs
        .par_iter()
        .map(|&x| {
            let mut out = Vec::with_capacity(ys.len() * regions.len());
            for &y in &ys {
                for (id, inside) in &regions {
                    out.push(vec![
                        x.into(),
                        y.into(),
                        id.as_str().into(),
                        inside(x, y).into(),
                    ]);
                }
            }
            out
        })
        .collect();
    let mut table = Table::new(&["param1", "param2", "region_id", "inside_flag"]);
    for row in rows.into_iter().flatten() {
        table.push(row);
    }
    Ok(table)
}

/// `k` for `cos(2 pi k x)`.
pub(super) fn single_cosine(profile: &Profile) -> Option<u32> {
    match profile {
        Profile::Cosine(terms) if terms.len() == 1 && terms[0].1 == 1.0 && terms[0].0 % 2 == 0 => {
            Some(terms[0].0 / 2)
        }
        _ => None,
    }
}

fn value(cfg: &RunConfig, name: &str) -> f64 {
    match cfg.settings.get(name) {
        Some(Setting::Value(x)) => *x,
        _ => 0.0,
    }
}

type Axes = (Range, Range);

/// Grid over `(alpha0, gamma)` at fixed `beta`: the deformed tongues from
/// the nodes with `lambda0 < 0` and, optionally, the ellipses.
fn dynamo_regions(
    cfg: &RunConfig,
    profile: &Profile,
    ellipses: u32,
) -> Result<(Axes, Vec<Region<'static>>), CliError> {
    let k = single_cosine(profile)
        .ok_or_else(|| config("tongues: the dynamo regions need --profile cos:K"))?;
    cfg.only_ranges(&["alpha0", "gamma"])?;
    for name in ["alpha0", "gamma"] {
        if let Some(Setting::Value(_)) = cfg.settings.get(name) {
            return Err(config(format!(
                "tongues: {name} is a grid axis; give it as a range"
            )));
        }
    }
    let beta = value(cfg, "beta");
    let kf = k as f64;
    let axes = (
        cfg.range("alpha0").unwrap_or(Range {
            lo: -2.0 * PI * kf,
            hi: 2.0 * PI * kf,
        }),
        cfg.range("gamma").unwrap_or(Range {
            lo: -4.0 * PI * kf,
            hi: 4.0 * PI * kf,
        }),
    );
    let mut regions: Vec<Region> = Vec::new();
    for (i, t) in dynamo::hyperbolic_tongues(k).into_iter().enumerate() {
        regions.push((
            format!("T{i}"),
            Box::new(move |a, g| t.contains(a, g, beta)),
        ));
    }
    if ellipses > 0 {
        if beta <= 0.0 {
            return Err(config("tongues: ellipses need beta > 0"));
        }
        for (i, e) in dynamo::ellipses(k, beta, ellipses).into_iter().enumerate() {
            regions.push((format!("E{i}"), Box::new(move |a, g| e.contains(a, g))));
        }
    }
    Ok((axes, regions))
}

/// Grid over `(Omega, k)` near a string node: positive real part at first
/// order and, for supercritical nodes, the displayed tongue lines.
fn string_regions(
    cfg: &RunConfig,
    node: MeshNode,
) -> Result<(Axes, Vec<Region<'static>>), CliError> {
    cfg.only_ranges(&["omega", "k"])?;
    if let Some(name) = cfg
        .settings
        .keys()
        .find(|n| !matches!(cfg.settings[*n], Setting::Range(_)))
    {
        return Err(config(format!(
            "tongues: '{name}' not accepted; the grid axes are omega and k"
        )));
    }
    let axes = (
        cfg.range("omega").unwrap_or(Range {
            lo: node.param - 0.1,
            hi: node.param + 0.1,
        }),
        cfg.range("k").unwrap_or(Range { lo: 0.0, hi: 0.2 }),
    );
    let scale = 1e-12 * (1.0 + node.lambda.norm());
    let mut regions: Vec<Region> = vec![(
        "first_order".into(),
        Box::new(move |o, k| {
            let s = string::split(&node, &StringParams::new(o - node.param, k, 0.0, 0.0));
            s[0].re.max(s[1].re) > scale
        }),
    )];
    if node.eps < 0 && node.delta > 0 && node.n < 0 && node.m > 0 && -node.n != node.m {
        let (na, m) = ((-node.n) as u32, node.m as u32);
        regions.push((
            "tongue_lines".into(),
            Box::new(move |o, k| {
                let l = string::tongue_lines(na, m, o);
                (k - l[0]) * (k - l[1]) < 0.0
            }),
        ));
    }
    Ok((axes, regions))
}
