//! `adjoint-dump`: the adjoint realization at one point.

use spectral_mesh::adjoint::realize;
use spectral_mesh::problem::ParameterPoint;
use spectral_mesh::Complex64;

use crate::config::RunConfig;
use crate::error::{config, CliError, Step};
use crate::output::{Cell, Table};

type CMatrix = spectral_mesh::CMatrix<f64>;

fn push_matrix(table: &mut Table, name: &str, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            table.push(vec![
                name.into(),
                i.into(),
                j.into(),
                z.re.into(),
                z.im.into(),
            ]);
        }
    }
}

pub fn adjoint_dump(cfg: &RunConfig, lambda: &[f64]) -> Result<Table, CliError> {
    if lambda.len() != 2 || lambda.iter().any(|x| !x.is_finite()) {
        return Err(config("adjoint-dump: --lambda expects RE,IM"));
    }
    cfg.only_ranges(&[])?;
    let p = cfg.point();
    let family = cfg.model().family(&p)?;
    let point =
        ParameterPoint::new(Complex64::new(lambda[0], lambda[1]), p).step("expansion point")?;
    let real = realize(&family, &point, &cfg.completion()).step("adjoint realization")?;

    let mut table = Table::new(&["matrix", "row", "col", "re", "im"]);
    push_matrix(&mut table, "U", &real.completed.u);
    push_matrix(&mut table, "U_tilde", &real.completed.u_tilde);
    push_matrix(&mut table, "V", &real.v);
    push_matrix(&mut table, "V_tilde", &real.v_tilde);
    push_matrix(&mut table, "concomitant", &real.concomitant.block);
    table.push(vec![
        "reconstruction_residual".into(),
        Cell::Empty,
        Cell::Empty,
        real.reconstruction_residual().into(),
        Cell::Empty,
    ]);
    table.push(vec![
        "completion_cond".into(),
        Cell::Empty,
        Cell::Empty,
        real.completed.cond.into(),
        Cell::Empty,
    ]);
    Ok(table)
}
