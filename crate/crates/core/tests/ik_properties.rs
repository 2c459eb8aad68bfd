use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use pcc_core::geometry::*;
use pcc_core::ik::*;
use pcc_core::trajectory::{generate, Shape};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single() -> RobotSpec {
    RobotSpec::uniform(1, 6, false).unwrap()
}

/// Random reachable target away from the straight configuration, with the
/// configuration that produced it.
fn random_target(rng: &mut ChaCha8Rng, spec: &SegmentSpec) -> (Vector3<f64>, SegmentConfig) {
    let [dl_lo, dl_hi] = spec.delta_l_bounds;
    let cfg = SegmentConfig::new(
        rng.gen_range(dl_lo..dl_hi),
        rng.gen_range(0.02..3.0),
        rng.gen_range(-PI..PI),
    );
    let total = spec.rest_length + cfg.delta_l;
    let r = total / cfg.theta;
    let target = Vector3::new(
        r * (1.0 - cfg.theta.cos()) * cfg.phi.cos(),
        r * (1.0 - cfg.theta.cos()) * cfg.phi.sin(),
        r * cfg.theta.sin(),
    );
    (target, cfg)
}

#[test]
fn matches_closed_form_inverse_on_random_targets() {
    let robot = single();
    let spec = &robot.segments()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings = IkSettings::default();
    for _ in 0..200 {
        let (target, truth) = random_target(&mut rng, spec);
        let result = solve_point(&robot, &target, &ConfigVector::zeros(1), SecondaryTask::None, &settings).unwrap();
        assert_eq!(result.status, IkStatus::Converged, "{target}");
        let deltas = oracle_deltas(&result.config.per_segment[0], &truth);
        assert!(deltas.iter().all(|d| *d <= 1e-5), "{deltas:?} at {target}");
    }
}

/// Gradient of `‖tip − target‖²` for one compensated segment in posture
/// coordinates `(ΔL, u, v)`, differentiated by hand.
fn closed_form_gradient(rest: f64, x: &[f64], target: &Vector3<f64>) -> Vector3<f64> {
    let total = rest + x[0];
    let w = nalgebra::Vector2::new(x[1], x[2]);
    let theta = w.norm();
    let dir = w / theta;
    let f = total * (1.0 - theta.cos()) / theta;
    let df = total * (theta * theta.sin() - (1.0 - theta.cos())) / (theta * theta);
    let g = total * theta.sin() / theta;
    let dg = total * (theta * theta.cos() - theta.sin()) / (theta * theta);
    let tip = Vector3::new(f * dir.x, f * dir.y, g);
    let mut jac = Matrix3::zeros();
    jac.set_column(0, &(tip / total));
    let outer = dir * dir.transpose();
    let lateral = df * outer + (f / theta) * (nalgebra::Matrix2::identity() - outer);
    for c in 0..2 {
        jac[(0, c + 1)] = lateral[(0, c)];
        jac[(1, c + 1)] = lateral[(1, c)];
        jac[(2, c + 1)] = dg * dir[c];
    }
    2.0 * jac.transpose() * (tip - target)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_difference_gradient_matches_closed_form(
        dl in -10.0f64..30.0,
        theta in 0.05f64..3.0,
        phi in -PI..PI,
        target in prop::array::uniform3(-80.0f64..80.0),
    ) {
        let robot = single();
        let x = [dl, theta * phi.cos(), theta * phi.sin()];
        let target = Vector3::from(target);
        let (_, fd) = objective_gradient(&robot, &target, &x, &IkSettings::default()).unwrap();
        let exact = closed_form_gradient(64.4, &x, &target);
        let err = (Vector3::from_column_slice(&fd) - exact).norm();
        prop_assert!(err <= 1e-5 * exact.norm().max(1.0), "{err:e} vs {}", exact.norm());
    }

    #[test]
    fn multi_segment_solutions_stay_feasible(
        raw in prop::collection::vec((-0.2f64..0.5, 0.0f64..2.5, -PI..PI), 2..4),
    ) {
        let robot = RobotSpec::uniform(raw.len(), 5, false).unwrap();
        let truth = ConfigVector::new(raw.iter().map(|&(dl, t, p)| SegmentConfig::new(dl * 64.4, t, p)).collect());
        let target = tip_position(&robot, &truth, true);
        let result = solve_point(&robot, &target, &ConfigVector::zeros(raw.len()), SecondaryTask::None, &IkSettings::default()).unwrap();
        for (c, seg) in result.config.per_segment.iter().zip(robot.segments()) {
            prop_assert!(c.delta_l >= seg.delta_l_bounds[0] && c.delta_l <= seg.delta_l_bounds[1]);
            prop_assert!(c.theta >= seg.theta_bounds[0] && c.theta <= seg.theta_bounds[1]);
            prop_assert!(c.phi > -PI && c.phi <= PI);
        }
        prop_assert!(result.final_objective <= result.start_objective);
    }
}

#[test]
fn flower_objective_never_rises_above_warm_start() {
    let robot = single();
    let traj = generate(Shape::flower(), 300, None).unwrap();
    let results = solve_trajectory(&robot, &traj, SecondaryTask::None, &IkSettings::default()).unwrap();
    for r in &results {
        assert!(
            r.final_objective <= r.start_objective,
            "{} > {}",
            r.final_objective,
            r.start_objective
        );
        assert_eq!(r.status, IkStatus::Converged);
    }
    assert!(smoothness(&robot, &results).worst_ratio <= 10.0);
}

#[test]
fn two_segment_trajectory_is_smooth_and_accurate() {
    let robot = RobotSpec::uniform(2, 6, false).unwrap();
    let traj = generate(
        Shape::Flower {
            base_radius: 40.0,
            petal_amplitude: 15.0,
            height: 100.0,
        },
        400,
        None,
    )
    .unwrap();
    let results = solve_trajectory(&robot, &traj, SecondaryTask::None, &IkSettings::default()).unwrap();
    let mean = results.iter().map(|r| r.residual).sum::<f64>() / results.len() as f64;
    assert!(mean <= 1e-3, "mean {mean}");
    let s = smoothness(&robot, &results);
    assert!(s.worst_ratio <= 10.0, "{s:?}");
}

#[test]
fn position_is_kept_when_tip_angle_is_impossible() {
    // two short planar segments cannot hold a 170° tip angle far out
    let robot = RobotSpec::new(
        vec![SegmentSpec::new(64.4, 4, true).with_theta_bounds(-0.5, 0.5); 2],
        vec![17.3; 2],
        [0.0, 0.0, -STANDARD_GRAVITY],
        3,
    )
    .unwrap();
    let target = tip_position(
        &robot,
        &ConfigVector::new(vec![
            SegmentConfig::new(5.0, 0.2, 0.0),
            SegmentConfig::new(0.0, 0.1, 0.0),
        ]),
        true,
    );
    let settings = IkSettings::default();
    let task = SecondaryTask::TipAngle {
        theta_d: 170f64.to_radians(),
    };
    let r = solve_point(&robot, &target, &ConfigVector::zeros(2), task, &settings).unwrap();
    assert_eq!(r.status, IkStatus::InfeasibleSecondary);
    assert!(r.residual <= settings.position_tolerance);
}

#[test]
fn tip_angle_task_holds_on_circle() {
    let robot = RobotSpec::uniform(4, 6, true).unwrap();
    let traj = generate(Shape::circle2d(), 120, None).unwrap();
    let theta_d = 30f64.to_radians();
    let results = solve_trajectory(
        &robot,
        &traj,
        SecondaryTask::TipAngle { theta_d },
        &IkSettings::default(),
    )
    .unwrap();
    for r in &results {
        assert!(r.residual <= 1e-6, "{}", r.residual);
        assert!((r.config.total_bending() - theta_d).abs() <= 1e-4);
    }
}

#[test]
fn straight_start_reaches_folded_multi_segment_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (segments, planar) in [(3, true), (3, false), (4, true), (4, false)] {
        let robot = RobotSpec::uniform(segments, 6, planar).unwrap();
        for _ in 0..60 {
            let config = ConfigVector::new(
                robot
                    .segments()
                    .iter()
                    .map(|s| {
                        let [dl_lo, dl_hi] = s.delta_l_bounds;
                        let [t_lo, t_hi] = s.theta_bounds;
                        let phi = if planar { 0.0 } else { rng.gen_range(-PI..PI) };
                        SegmentConfig::new(rng.gen_range(dl_lo..dl_hi), rng.gen_range(t_lo..t_hi), phi)
                    })
                    .collect(),
            );
            let target = tip_position(&robot, &config, true);
            let zeros = ConfigVector::zeros(segments);
            let r = solve_point(&robot, &target, &zeros, SecondaryTask::None, &IkSettings::default()).unwrap();
            assert_eq!(
                r.status,
                IkStatus::Converged,
                "{segments} segments, planar {planar}, target {target:?}"
            );
        }
    }
}
