//! `verify`: a report of cross-checks, one row per check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_mesh::adjoint::{lagrange_check, realize};
use spectral_mesh::models::dynamo::{self, Profile};
use spectral_mesh::models::string::{self, StringParams};
use spectral_mesh::models::MeshNode;
use spectral_mesh::oracle::{collocate, spectrum, track_split, DriftMode, TrackSettings, Window};
use spectral_mesh::problem::{Eigenfunction, ParameterDirection, ParameterPoint};
use spectral_mesh::quadrature::GaussLegendre;
use spectral_mesh::{CVector, Complex64};

use super::mesh::parse_window;
use super::{pair_error, NodeSetup};
use crate::config::{parse_node, Model, NodeLabel, RunConfig};
use crate::error::{CliError, Step};
use crate::output::{Cell, Table};

const LAGRANGE_TOL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-12;
const MESH_TOL: f64 = 1e-7;
const CLOSED_FORM_TOL: f64 = 1e-6;
const EXPONENT: (f64, f64) = (1.8, 2.2);
const TONGUE_AGREE: usize = 9;
const ZERO_ROOT_TOL: f64 = 1e-10;
const SHIFT_ROOT_TOL: f64 = 1e-8;
const SELECTION_TOL: f64 = 1e-12;
const OFFSET_TOL: f64 = 1e-12;
const CONVERGENCE_TOL: f64 = 1e-8;
const RANDOM_DIRECTIONS: usize = 20;
const RECONSTRUCTION_POINTS: usize = 10;

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: Cell,
    pass: bool,
    detail: String,
}

fn check(
    name: &'static str,
    measured: f64,
    tolerance: impl Into<Cell>,
    pass: bool,
    detail: String,
) -> Check {
    Check {
        name,
        measured,
        tolerance: tolerance.into(),
        pass,
        detail,
    }
}

/// Runs a check; a numerical failure becomes a failed row naming the error.
fn run(name: &'static str, f: impl FnOnce() -> Result<Check, CliError>) -> Check {
    f().unwrap_or_else(|e| check(name, f64::NAN, Cell::Empty, false, e.to_string()))
}

fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn random_poly(rng: &mut ChaCha8Rng, size: usize) -> Eigenfunction<f64> {
    let coeffs = (0..=6)
        .map(|_| CVector::from_iterator(size, (0..size).map(|_| rand_c(rng, 1.0))))
        .collect();
    Eigenfunction::polynomial(coeffs)
}

/// A random expansion point for the identity checks.
fn random_point(model: &Model, rng: &mut ChaCha8Rng) -> (Vec<f64>, Complex64) {
    match model {
        Model::String => (
            vec![
                rng.random_range(-0.8..0.8),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ],
            rand_c(rng, 5.0),
        ),
        Model::Dynamo(_) => (
            vec![
                rng.random_range(-10.0..10.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.0..0.9),
            ],
            rand_c(rng, 20.0),
        ),
        // parameter values may be constrained; only lambda varies
        Model::Custom(spec) => (spec.p0.clone(), rand_c(rng, 5.0)),
    }
}

fn lagrange(cfg: &RunConfig, pairs: usize, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let model = cfg.model();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (p, lambda) = random_point(model, rng);
        let family = model.family(&p)?;
        let point = ParameterPoint::new(lambda, p).step("expansion point")?;
        let real = realize(&family, &point, &cfg.completion()).step("adjoint realization")?;
        let u = random_poly(rng, family.size());
        let v = random_poly(rng, family.size());
        worst = worst.max(lagrange_check(&family, &point, &real, &u, &v).relative());
    }
    Ok(check(
        "lagrange_identity",
        worst,
        LAGRANGE_TOL,
        worst < LAGRANGE_TOL,
        format!("max relative residual over {pairs} random polynomial pairs"),
    ))
}

fn reconstruction(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let model = cfg.model();
    let mut worst: f64 = 0.0;
    for _ in 0..RECONSTRUCTION_POINTS {
        let (p, lambda) = random_point(model, rng);
        let family = model.family(&p)?;
        let point = ParameterPoint::new(lambda, p).step("expansion point")?;
        let real = realize(&family, &point, &cfg.completion()).step("adjoint realization")?;
        worst = worst.max(real.reconstruction_residual());
    }
    Ok(check(
        "adjoint_reconstruction",
        worst,
        RECONSTRUCTION_TOL,
        worst < RECONSTRUCTION_TOL,
        format!("max relative residual of the concomitant from V, V_tilde at {RECONSTRUCTION_POINTS} random points"),
    ))
}

fn string_mesh_oracle(cfg: &RunConfig) -> Result<Check, CliError> {
    const IM_MAX: f64 = 10.0;
    let mut worst: f64 = 0.0;
    let mut found = 0usize;
    for omega in [0.0, 0.4, -0.4] {
        let family = string::string_problem(&StringParams::free(omega)).step("string family")?;
        let dp = collocate(&family, &[omega, 0.0, 0.0, 0.0], 2, cfg.n_nodes).step("collocation")?;
        let eig =
            spectrum(&dp, &Window::new((-1.0, 1.0), (-IM_MAX, IM_MAX))).step("oracle spectrum")?;
        for z in &eig {
            let d = (-40i64..=40)
                .flat_map(|n| [string::branch(n, 1, omega), string::branch(n, -1, omega)])
                .map(|l| (z - l).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        found += eig.len();
    }
    Ok(check(
        "mesh_oracle",
        worst,
        MESH_TOL,
        found > 0 && worst < MESH_TOL,
        format!("max distance of {found} oracle eigenvalues (|Im| <= {IM_MAX}, Omega in 0, +-0.4) from the mesh lines"),
    ))
}

fn closed_form(
    model: &Model,
    setup: &NodeSetup,
    dir: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Check, CliError> {
    let mut dirs = vec![dir.to_vec()];
    for _ in 0..RANDOM_DIRECTIONS {
        dirs.push(
            (0..dir.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        );
    }
    let mut worst: f64 = 0.0;
    for d in &dirs {
        let pencil = setup.pencil(d)?;
        worst = worst.max(pair_error(&setup.closed_form(model, d), &pencil.lambda1));
    }
    Ok(check(
        "closed_form_split",
        worst,
        CLOSED_FORM_TOL,
        worst < CLOSED_FORM_TOL,
        format!("max relative difference between the displayed splitting and the pencil over --dir and {RANDOM_DIRECTIONS} random directions"),
    ))
}

fn residual_exponent(
    cfg: &RunConfig,
    model: &Model,
    setup: &NodeSetup,
    dir: &[f64],
) -> Result<Check, CliError> {
    let pencil = setup.pencil(dir)?;
    let settings = TrackSettings {
        n_nodes: cfg.n_nodes,
        radius: NodeSetup::radius(model),
        mode: DriftMode::FirstOrderResidual,
        ..TrackSettings::default()
    };
    let rec = track_split(
        &setup.family,
        &setup.point,
        &ParameterDirection::new(dir.to_vec()),
        &cfg.eps,
        &pencil,
        &settings,
    )
    .step("oracle tracking")?;
    let tol = format!("[{}, {}]", EXPONENT.0, EXPONENT.1);
    if rec.at_noise_floor() {
        let floor = rec.max_residuals().into_iter().fold(0.0, f64::max);
        return Ok(check(
            "oracle_residual_exponent",
            rec.fitted_exponent,
            tol,
            true,
            format!("first-order prediction exact to the noise floor (max residual {floor:.2e}); nothing to fit"),
        ));
    }
    let x = rec.fitted_exponent;
    Ok(check(
        "oracle_residual_exponent",
        x,
        tol,
        (EXPONENT.0..=EXPONENT.1).contains(&x),
        format!(
            "slope of log first-order residual against log eps over {:?}",
            cfg.eps
        ),
    ))
}

/// Sign of the oracle's largest real part against the tongue lines around
/// the supercritical node `(-1, -; 2, +)`.
fn supercritical_tongue(cfg: &RunConfig) -> Result<Check, CliError> {
    let node = string::node(-1, -1, 2, 1).step("node")?;
    let mut agree = 0usize;
    let mut total = 0usize;
    for k in [0.1, 0.2] {
        for ratio in [-0.4, -0.15, -0.08, -0.03, 0.1] {
            let omega = node.param + ratio * k;
            let lines = string::tongue_lines(1, 2, omega);
            let inside = (k - lines[0]) * (k - lines[1]) < 0.0;
            let p = StringParams::new(omega, k, 0.0, 0.0);
            let family = string::string_problem(&p).step("string family")?;
            let dp = collocate(&family, &p.to_vec(), 2, cfg.n_nodes).step("collocation")?;
            let eig = spectrum(&dp, &Window::around(node.lambda, 0.5)).step("oracle spectrum")?;
            let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            total += 1;
            agree += ((max_re > 1e-7) == inside) as usize;
        }
    }
    Ok(check(
        "supercritical_tongue",
        agree as f64,
        TONGUE_AGREE as f64,
        agree >= TONGUE_AGREE,
        format!("{agree}/{total} oracle probes on the predicted side of the tongue lines at node -1,-,2,+"),
    ))
}

fn selection_rule(profile: &Profile) -> Check {
    let nodes = dynamo::mesh_nodes(1..=6, 1..=6);
    let rule = GaussLegendre::<f64>::default();
    let mut worst: f64 = 0.0;
    for node in &nodes {
        let w = PI * (node.eps as i64 * node.n - node.delta as i64 * node.m) as f64;
        let quadrature = rule.integrate(|x| profile.eval(x, 0) * (w * x).cos());
        worst = worst.max((dynamo::selection_integral(profile, node) - quadrature).abs());
    }
    check(
        "selection_rule",
        worst,
        SELECTION_TOL,
        worst < SELECTION_TOL,
        format!("max difference between the closed-form selection integral and quadrature over {} nodes with indices <= 6", nodes.len()),
    )
}

fn tongue_geometry(k: u32) -> Check {
    const GRID: usize = 101;
    let tongues = dynamo::beta_zero_tongues(k);
    let kf = k as f64;
    let mut disagree = 0usize;
    for i in 0..GRID {
        for j in 0..GRID {
            let alpha0 = -2.0 * PI * kf + 4.0 * PI * kf * i as f64 / (GRID - 1) as f64;
            let gamma = -20.0 + 40.0 * j as f64 / (GRID - 1) as f64;
            let displayed = (k == 2).then(|| dynamo::k2_principal_regions(alpha0, gamma, 0.0));
            for (t, tongue) in tongues.iter().enumerate() {
                let by_tongue = tongue.contains(alpha0, gamma);
                let by_cone =
                    dynamo::inside_cone(&tongue.node, 0.5, alpha0 - tongue.node.param, gamma, 0.0);
                if by_tongue != by_cone || displayed.is_some_and(|d| d[t] != by_tongue) {
                    disagree += 1;
                }
            }
        }
    }
    let count_ok = tongues.len() == 2 * k as usize - 1;
    check(
        "tongue_geometry",
        disagree as f64,
        0.0,
        disagree == 0 && count_ok,
        format!("{} beta = 0 tongues (expected {}); classification disagreements on a {GRID} x {GRID} grid", tongues.len(), 2 * k - 1),
    )
}

fn tongue_offsets() -> Check {
    let mut worst: f64 = 0.0;
    for beta in [0.05, 0.1, 0.3] {
        for t in dynamo::hyperbolic_tongues(2) {
            let n = t.node.n as f64;
            let want = if t.node.param > 0.0 {
                2.0 * PI * n * beta
            } else {
                2.0 * PI * (4.0 - n) * beta
            };
            worst = worst.max((t.offset(beta) - want).abs());
        }
    }
    check(
        "tongue_offsets",
        worst,
        OFFSET_TOL,
        worst < OFFSET_TOL,
        "max error of the k = 2 tongue offsets 2 pi n beta, 2 pi (2k - n) beta".into(),
    )
}

/// Pure `beta` direction with the boundary-derivative completion: roots `0`
/// and `-2 lambda0`.
fn unshifted_root(model: &Model, node: MeshNode) -> Result<[Check; 2], CliError> {
    let setup = NodeSetup::new(model, node, &dynamo::paper_completion())?;
    let roots = setup.pencil(&[0.0, 0.0, 1.0])?.lambda1;
    let (a, b) = if roots[0].norm() <= roots[1].norm() {
        (roots[0], roots[1])
    } else {
        (roots[1], roots[0])
    };
    let zero = a.norm();
    let shift = (b + 2.0 * node.lambda).norm();
    Ok([
        check(
            "unshifted_root_zero",
            zero,
            ZERO_ROOT_TOL,
            zero < ZERO_ROOT_TOL,
            "|smaller pencil root| along beta".into(),
        ),
        check(
            "unshifted_root_shift",
            shift,
            SHIFT_ROOT_TOL,
            shift < SHIFT_ROOT_TOL,
            "|larger pencil root + 2 lambda0| along beta".into(),
        ),
    ])
}

fn oracle_convergence(cfg: &RunConfig, window: &Window<f64>) -> Result<Check, CliError> {
    let model = cfg.model();
    let p = cfg.point();
    let family = model.family(&p)?;
    let degree = family.lambda_degree().unwrap_or(2);
    let coarse = spectrum(
        &collocate(&family, &p, degree, cfg.n_nodes).step("collocation")?,
        window,
    )
    .step("oracle spectrum")?;
    let fine = spectrum(
        &collocate(&family, &p, degree, 2 * cfg.n_nodes).step("collocation")?,
        window,
    )
    .step("oracle spectrum")?;
    let worst = coarse
        .iter()
        .map(|z| {
            fine.iter()
                .map(|w| (z - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(check(
        "oracle_convergence",
        worst,
        CONVERGENCE_TOL,
        !coarse.is_empty() && worst < CONVERGENCE_TOL,
        format!(
            "{} eigenvalues at {} nodes against {} nodes",
            coarse.len(),
            cfg.n_nodes,
            2 * cfg.n_nodes
        ),
    ))
}

fn default_node(model: &Model) -> NodeLabel {
    match model {
        Model::String => NodeLabel {
            n: 1,
            eps: -1,
            m: 2,
            delta: 1,
        },
        _ => NodeLabel {
            n: 1,
            eps: 1,
            m: 2,
            delta: 1,
        },
    }
}

/// The report table and the names of failed checks.
pub fn verify(
    cfg: &RunConfig,
    node: Option<&str>,
    dir: Option<&str>,
    pairs: usize,
    window: Option<&[f64]>,
) -> Result<(Table, Vec<String>), CliError> {
    let model = cfg.model();
    cfg.no_settings(
        "verify uses its own sample points; choose the node and direction with --node and --dir",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = vec![
        run("lagrange_identity", || lagrange(cfg, pairs, &mut rng)),
        run("adjoint_reconstruction", || reconstruction(cfg, &mut rng)),
    ];

    match model {
        Model::Custom(_) => {
            if node.is_some() || dir.is_some() {
                return Err(crate::error::config(
                    "verify: --node and --dir apply to the string and dynamo models",
                ));
            }
            let window = match window {
                Some(w) => parse_window(w)?,
                None => Window::new((-100.0, 100.0), (-100.0, 100.0)),
            };
            checks.push(run("oracle_convergence", || {
                oracle_convergence(cfg, &window)
            }));
        }
        _ => {
            if window.is_some() {
                return Err(crate::error::config(
                    "verify: --window applies to the custom model",
                ));
            }
            let node = model.node(match node {
                Some(s) => parse_node(s)?,
                None => default_node(model),
            })?;
            let dir = cfg.direction(dir.unwrap_or(match model {
                Model::String => "k",
                _ => "beta",
            }))?;
            let setup = NodeSetup::new(model, node, &cfg.completion());
            match model {
                Model::String => checks.push(run("mesh_oracle", || string_mesh_oracle(cfg))),
                Model::Dynamo(profile) => {
                    checks.push(selection_rule(profile));
                    if let Some(k) = super::tongues::single_cosine(profile) {
                        checks.push(tongue_geometry(k));
                    }
                    checks.push(tongue_offsets());
                }
                Model::Custom(_) => unreachable!(),
            }
            match setup {
                Ok(setup) => {
                    checks.push(run("closed_form_split", || {
                        closed_form(model, &setup, &dir, &mut rng)
                    }));
                    checks.push(run("oracle_residual_exponent", || {
                        residual_exponent(cfg, model, &setup, &dir)
                    }));
                }
                Err(e) => checks.push(check(
                    "node_setup",
                    f64::NAN,
                    Cell::Empty,
                    false,
                    e.to_string(),
                )),
            }
            match model {
                Model::String => {
                    checks.push(run("supercritical_tongue", || supercritical_tongue(cfg)))
                }
                _ if dir[0] == 0.0 && dir[1] == 0.0 => match unshifted_root(model, node) {
                    Ok(pair) => checks.extend(pair),
                    Err(e) => checks.push(check(
                        "unshifted_root",
                        f64::NAN,
                        Cell::Empty,
                        false,
                        e.to_string(),
                    )),
                },
                _ => {}
            }
        }
    }

    let mut table = Table::new(&["check", "measured", "tolerance", "pass", "detail"]);
    let mut failed = Vec::new();
    for c in checks {
        if !c.pass {
            failed.push(c.name.to_string());
        }
        table.push(vec![
            c.name.into(),
            c.measured.into(),
            c.tolerance,
            c.pass.into(),
            c.detail.into(),
        ]);
    }
    Ok((table, failed))
}
