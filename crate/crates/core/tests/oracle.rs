use std::f64::consts::PI;

use spectral_mesh::adjoint::Completion;
use spectral_mesh::models::dynamo::{self, DynamoParams, Profile};
use spectral_mesh::oracle::{collocate, spectrum, track_split, DriftMode, TrackSettings, Window};
use spectral_mesh::perturbation::{fg_matrices, semisimple_split};
use spectral_mesh::problem::{taylor_data, ParameterDirection};
use spectral_mesh::{Complex64, Error};

fn dynamo_spectrum(
    alpha0: f64,
    gamma: f64,
    beta: f64,
    profile: Profile,
    nodes: usize,
    window: &Window<f64>,
) -> Vec<Complex64> {
    let params = DynamoParams::new(alpha0, gamma, beta, profile);
    let family = dynamo::dynamo_problem(&params).unwrap();
    let dp = collocate(&family, &params.to_vec(), 1, nodes).unwrap();
    spectrum(&dp, window).unwrap()
}

#[test]
fn dynamo_spectrum_converges() {
    let profile = Profile::cosine(vec![(1, 1.0), (3, 0.3)]).unwrap();
    let window = Window::new((-80.0, 30.0), (-30.0, 30.0));
    let coarse = dynamo_spectrum(2.0, 1.5, 0.3, profile.clone(), 48, &window);
    let fine = dynamo_spectrum(2.0, 1.5, 0.3, profile, 96, &window);
    assert!(coarse.len() >= 3, "{coarse:?}");
    for z in &coarse {
        let d = fine
            .iter()
            .map(|w| (z - w).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9, "{z}: nearest fine eigenvalue {d:e} away");
    }
}

#[test]
fn unperturbed_dynamo_spectrum_is_the_mesh() {
    let alpha0 = 1.3;
    let window = Window::new((-120.0, 20.0), (-1.0, 1.0));
    let eig = dynamo_spectrum(alpha0, 0.0, 0.0, Profile::cos_k(1), 64, &window);
    let mut mesh: Vec<f64> = (1..=6)
        .flat_map(|n| [dynamo::branch(n, 1, alpha0), dynamo::branch(n, -1, alpha0)])
        .filter(|l| (-120.0..20.0).contains(l))
        .collect();
    mesh.sort_by(f64::total_cmp);
    assert_eq!(eig.len(), mesh.len(), "{eig:?} vs {mesh:?}");
    for (z, l) in eig.iter().zip(&mesh) {
        assert!((z - Complex64::new(*l, 0.0)).norm() < 1e-8, "{z} vs {l}");
    }
}

#[test]
fn dynamo_node_is_double() {
    let node = dynamo::node(1, 1, 2, 1).unwrap();
    assert!((node.lambda.re - 2.0 * PI * PI).abs() < 1e-12);
    let eig = dynamo_spectrum(
        node.param,
        0.0,
        0.0,
        Profile::cos_k(1),
        64,
        &Window::around(node.lambda, 1.0),
    );
    assert_eq!(eig.len(), 2, "{eig:?}");
    for z in eig {
        assert!((z - node.lambda).norm() < 1e-8);
    }
}

#[test]
fn zero_direction_does_not_drift() {
    let node = dynamo::node(1, 1, 2, 1).unwrap();
    let profile = Profile::cos_k(1);
    let family = dynamo::dynamo_problem(&DynamoParams::new(node.param, 0.0, 0.0, profile)).unwrap();
    let point = dynamo::node_point(&node);
    let group = dynamo::node_group(&family, &node, &Completion::Orthogonal).unwrap();
    let td = taylor_data(&family, &point, &ParameterDirection::unit(3, 1), 1).unwrap();
    let (f, g) = fg_matrices(&group, &td);
    let reference = semisimple_split(&f, &g).unwrap();
    let settings = TrackSettings {
        radius: 5.0,
        mode: DriftMode::RawDrift,
        ..TrackSettings::default()
    };
    let rec = track_split(
        &family,
        &point,
        &ParameterDirection::zero(3),
        &[1e-2, 1e-3, 1e-4],
        &reference,
        &settings,
    )
    .unwrap();
    for r in rec.max_residuals() {
        assert!(r < 1e-10, "drift {r:e}");
    }
    assert!(rec.at_noise_floor());
    assert!(rec.fitted_exponent.is_nan());
}

#[test]
fn track_split_validates_epsilons() {
    let node = dynamo::node(1, 1, 2, 1).unwrap();
    let family =
        dynamo::dynamo_problem(&DynamoParams::new(node.param, 0.0, 0.0, Profile::cos_k(1)))
            .unwrap();
    let point = dynamo::node_point(&node);
    let group = dynamo::node_group(&family, &node, &Completion::Orthogonal).unwrap();
    let dir = ParameterDirection::unit(3, 1);
    let td = taylor_data(&family, &point, &dir, 1).unwrap();
    let (f, g) = fg_matrices(&group, &td);
    let reference = semisimple_split(&f, &g).unwrap();
    let settings = TrackSettings::default();
    for eps in [
        &[1e-3, 1e-3, 1e-4][..],
        &[1e-3, 1e-4],
        &[1e-3, -1e-4, -1e-3],
    ] {
        assert!(matches!(
            track_split(&family, &point, &dir, eps, &reference, &settings),
            Err(Error::InvalidArgument(_))
        ));
    }
}

/// Inside a `k = 2` ellipse at `beta = 0.1` the pair of eigenvalues from the
/// node is complex; outside it is real.
#[test]
fn ellipse_separates_complex_from_real() {
    let beta = 0.1;
    let ellipse = dynamo::ellipses(2, beta, 1)
        .into_iter()
        .find(|e| e.node.eps == 1)
        .unwrap();
    let (c, (a, b)) = (ellipse.center, ellipse.semi_axes);
    let mut agree = 0;
    let mut probes = Vec::new();
    for (i, t) in [0.3f64, 1.5, 2.6, 3.9, 5.2].into_iter().enumerate() {
        let r_in = 0.5 + 0.05 * i as f64;
        probes.push((c.0 + r_in * a * t.cos(), c.1 + r_in * b * t.sin(), true));
        probes.push((c.0 + 1.6 * a * t.cos(), c.1 + 1.6 * b * t.sin(), false));
    }
    // the pair sits near lambda0 - pi^2 n m beta
    let center = ellipse.node.lambda
        - Complex64::new(
            PI * PI * (ellipse.node.n * ellipse.node.m) as f64 * beta,
            0.0,
        );
    for &(alpha0, gamma, inside) in &probes {
        assert_eq!(ellipse.contains(alpha0, gamma), inside);
        let eig = dynamo_spectrum(
            alpha0,
            gamma,
            beta,
            Profile::cos_k(2),
            64,
            &Window::around(center, 12.0),
        );
        let complex = eig.iter().any(|z| z.im.abs() > 1e-6);
        if complex == inside {
            agree += 1;
        }
    }
    assert!(agree >= 9, "{agree}/10 probes agree");
}
