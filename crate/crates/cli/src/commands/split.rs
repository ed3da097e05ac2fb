//! `split`: closed form, pencil and (optionally) oracle drift at a node.

use spectral_mesh::oracle::{track_split, DriftMode, TrackSettings};
use spectral_mesh::problem::ParameterDirection;

use super::NodeSetup;
use crate::config::{parse_node, RunConfig};
use crate::error::{config, CliError, Step};
use crate::output::{Cell, Table};

pub fn split(
    cfg: &RunConfig,
    node: &str,
    dir: &str,
    oracle: bool,
    radius: Option<f64>,
) -> Result<Table, CliError> {
    let model = cfg.model();
    cfg.no_settings("the expansion point is the node and the direction is --dir")?;
    let node = model.node(parse_node(node)?)?;
    let dir = cfg.direction(dir)?;
    let setup = NodeSetup::new(model, node, &cfg.completion())?;
    let pencil = setup.pencil(&dir)?;

    let mut table = Table::new(&["source", "eps", "branch_id", "re", "im"]);
    for (i, z) in setup.closed_form(model, &dir).iter().enumerate() {
        table.push(vec![
            "closed_form".into(),
            Cell::Empty,
            i.into(),
            z.re.into(),
            z.im.into(),
        ]);
    }
    for (i, z) in pencil.lambda1.iter().enumerate() {
        table.push(vec![
            "pencil".into(),
            Cell::Empty,
            i.into(),
            z.re.into(),
            z.im.into(),
        ]);
    }
    if !oracle {
        if radius.is_some() {
            return Err(config("split: --radius applies with --oracle"));
        }
        return Ok(table);
    }
    let settings = TrackSettings {
        n_nodes: cfg.n_nodes,
        radius: radius.unwrap_or(NodeSetup::radius(model)),
        mode: DriftMode::FirstOrderResidual,
        ..TrackSettings::default()
    };
    let rec = track_split(
        &setup.family,
        &setup.point,
        &ParameterDirection::new(dir),
        &cfg.eps,
        &pencil,
        &settings,
    )
    .step("oracle tracking")?;
    for (k, &eps) in rec.epsilons.iter().enumerate() {
        for (i, z) in rec.matched[k].iter().enumerate() {
            table.push(vec![
                "oracle".into(),
                eps.into(),
                i.into(),
                z.re.into(),
                z.im.into(),
            ]);
        }
        for (i, z) in rec.predicted[k].iter().enumerate() {
            table.push(vec![
                "predicted".into(),
                eps.into(),
                i.into(),
                z.re.into(),
                z.im.into(),
            ]);
        }
    }
    // fitted residual exponent in `re`; NaN when exact to the noise floor
    table.push(vec![
        "fit".into(),
        Cell::Empty,
        Cell::Empty,
        rec.fitted_exponent.into(),
        Cell::Empty,
    ]);
    Ok(table)
}
