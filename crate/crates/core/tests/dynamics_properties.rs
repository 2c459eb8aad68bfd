use nalgebra::{DMatrix, DVector};
use pcc_core::dynamics::*;
use pcc_core::geometry::{RobotSpec, STANDARD_GRAVITY};
use proptest::prelude::*;

/// Stiff enough that a free oscillation completes several periods in 1 s.
fn stiff() -> StiffnessParams {
    StiffnessParams {
        a1: 2e7,
        a2: 1e7,
        a3: 5.0,
        a4: 2e7,
        a5: 1e7,
        a6: 5.0,
        lobe_count: 3,
    }
}

fn spatial() -> RobotSpec {
    RobotSpec::uniform(2, 4, false).unwrap()
}

fn planar() -> RobotSpec {
    RobotSpec::uniform(3, 4, true)
        .unwrap()
        .with_gravity([-STANDARD_GRAVITY, 0.0, 0.0])
}

/// Random state with |ε| ≤ 0.3 and bending up to about 1.2 rad per segment.
fn state_strategy(dof_per_segment: usize, segments: usize) -> impl Strategy<Value = Vec<f64>> {
    let per = prop::collection::vec(-1.0f64..1.0, dof_per_segment * segments);
    per.prop_map(move |raw| {
        raw.iter()
            .enumerate()
            .map(|(i, r)| {
                if i % dof_per_segment == 0 {
                    0.3 * r
                } else {
                    r * 1.2 / 64.4
                }
            })
            .collect()
    })
}

fn relative(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(a.norm()).max(1e-300)
}

fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, q: &DVector<f64>, steps: &[f64]) -> DVector<f64> {
    let mut probe = q.clone();
    DVector::from_iterator(
        q.len(),
        (0..q.len()).map(|i| {
            probe[i] = q[i] + steps[i];
            let plus = f(&probe);
            probe[i] = q[i] - steps[i];
            let minus = f(&probe);
            probe[i] = q[i];
            (plus - minus) / (2.0 * steps[i])
        }),
    )
}

fn steps_for(robot: &RobotSpec, h: f64) -> Vec<f64> {
    robot
        .segments()
        .iter()
        .flat_map(|s| {
            let mut v = vec![h, h / s.rest_length];
            if !s.planar {
                v.push(h / s.rest_length);
            }
            v
        })
        .collect()
}

fn check_mass(robot: &RobotSpec, q: &DVector<f64>) {
    let m = mass_matrix(robot, q).unwrap();
    assert!((&m - m.transpose()).norm() <= 1e-12 * m.norm());
    let eig = m.clone().symmetric_eigenvalues();
    assert!(eig.iter().all(|e| *e > 0.0), "{eig}");
}

fn check_skew(robot: &RobotSpec, q: &DVector<f64>, qdot: &DVector<f64>) {
    let m = mass_matrix(robot, q).unwrap();
    let c = coriolis_matrix(robot, q, qdot).unwrap();
    // below this step the difference is dominated by noise in M, so the
    // h² truncation term is removed by Richardson extrapolation instead
    let central = |h: f64| {
        (mass_matrix(robot, &(q + h * qdot)).unwrap() - mass_matrix(robot, &(q - h * qdot)).unwrap()) / (2.0 * h)
    };
    let mdot = (4.0 * central(1e-3) - central(2e-3)) / 3.0;
    let n = mdot - 2.0 * &c;
    let defect = (&n + n.transpose()).norm();
    assert!(defect <= 1e-6 * m.norm(), "defect {defect:e} vs {:e}", m.norm());
    // the matrix and the vector form agree
    let cv = coriolis_vector(robot, q, qdot).unwrap();
    assert!(relative(&(&c * qdot), &cv) < 1e-5, "{}", relative(&(&c * qdot), &cv));
}

fn check_gradients(robot: &RobotSpec, q: &DVector<f64>) {
    let params = stiff();
    let steps = steps_for(robot, 1e-5);
    let k = stiffness_vector(robot, q, &params).unwrap();
    let k_fd = fd_gradient(|x| elastic_potential(robot, x, &params).unwrap(), q, &steps);
    assert!(relative(&k, &k_fd) <= 1e-6, "K {}", relative(&k, &k_fd));
    let g = gravity_vector(robot, q).unwrap();
    let g_fd = fd_gradient(|x| gravitational_potential(robot, x).unwrap(), q, &steps);
    assert!(relative(&g, &g_fd) <= 1e-6, "G {}", relative(&g, &g_fd));
}

fn velocity_for(q: &[f64], robot: &RobotSpec) -> DVector<f64> {
    // deterministic velocity of unit scaled size derived from q
    let steps = steps_for(robot, 1.0);
    DVector::from_iterator(q.len(), q.iter().zip(&steps).map(|(v, s)| s * (3.0 * v / s).sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spatial_mass_matrix_is_spd(raw in state_strategy(3, 2)) {
        check_mass(&spatial(), &DVector::from_vec(raw));
    }

    #[test]
    fn planar_mass_matrix_is_spd(raw in state_strategy(2, 3)) {
        check_mass(&planar(), &DVector::from_vec(raw));
    }

    #[test]
    fn spatial_coriolis_is_skew_compatible(raw in state_strategy(3, 2)) {
        let robot = spatial();
        let qdot = velocity_for(&raw, &robot);
        check_skew(&robot, &DVector::from_vec(raw), &qdot);
    }

    #[test]
    fn planar_coriolis_is_skew_compatible(raw in state_strategy(2, 3)) {
        let robot = planar();
        let qdot = velocity_for(&raw, &robot);
        check_skew(&robot, &DVector::from_vec(raw), &qdot);
    }

    #[test]
    fn spatial_forces_are_potential_gradients(raw in state_strategy(3, 2)) {
        check_gradients(&spatial(), &DVector::from_vec(raw));
    }

    #[test]
    fn planar_forces_are_potential_gradients(raw in state_strategy(2, 3)) {
        check_gradients(&planar(), &DVector::from_vec(raw));
    }

    #[test]
    fn damping_dissipates(qdot in prop::collection::vec(-10.0f64..10.0, 6), r in prop::collection::vec(0.0f64..5.0, 6)) {
        let d = damping_vector(&DampingParams { diagonal: r }, &DVector::from_vec(qdot.clone())).unwrap();
        prop_assert!(DVector::from_vec(qdot).dot(&d) >= 0.0);
    }

    #[test]
    fn state_round_trip(raw in state_strategy(3, 2)) {
        let robot = spatial();
        let q = DVector::from_vec(raw);
        let cfg = config_from_state(&q, &robot).unwrap();
        let back = state_from_config(&cfg, &robot).unwrap();
        prop_assert!((back - q).amax() <= 1e-12);
    }
}

#[test]
fn coriolis_vanishes_at_rest_velocity() {
    let robot = spatial();
    let q = DVector::from_vec(vec![0.1, 0.01, -0.005, -0.05, 0.002, 0.01]);
    let zero = DVector::zeros(6);
    assert_eq!(coriolis_vector(&robot, &q, &zero).unwrap(), zero);
    assert!((coriolis_matrix(&robot, &q, &zero).unwrap() * &zero).norm() == 0.0);
}

#[test]
fn straight_arm_under_axial_gravity_has_no_bending_load() {
    let robot = spatial();
    let g = gravity_vector(&robot, &DVector::zeros(6)).unwrap();
    for i in [1, 2, 4, 5] {
        assert!(g[i].abs() <= 1e-9 * g.norm(), "{g}");
    }
    assert!(g[0] > 0.0);
}

#[test]
fn rest_state_is_stress_free() {
    let robot = spatial();
    let q = DVector::zeros(6);
    assert_eq!(elastic_potential(&robot, &q, &stiff()).unwrap(), 0.0);
    assert_eq!(stiffness_vector(&robot, &q, &stiff()).unwrap(), q);
}

fn free_model(robot: RobotSpec, damping: f64) -> DynamicsModel {
    let robot = robot.with_gravity([0.0; 3]);
    let dof = robot.dof();
    DynamicsModel::new(robot, stiff(), DampingParams::uniform(dof, damping)).unwrap()
}

fn displaced(robot: &RobotSpec) -> DynState {
    let mut s = DynState::rest(robot);
    for (i, seg) in robot.segments().iter().enumerate() {
        let k = i * seg.dof();
        s.q[k] = 0.05;
        s.q[k + 1] = 0.3 / seg.rest_length;
        if !seg.planar {
            s.q[k + 2] = -0.2 / seg.rest_length;
        }
    }
    s
}

#[test]
fn undamped_energy_drift_below_tenth_percent() {
    for robot in [spatial(), planar()] {
        let model = free_model(robot, 0.0);
        let mut s = displaced(model.robot());
        let tau = DVector::zeros(model.dof());
        let e0 = model.total_energy(&s).unwrap();
        let mut worst: f64 = 0.0;
        let mut crossings = 0;
        let mut last_sign = s.q[1].signum();
        for _ in 0..1000 {
            s = model.step(&s, &tau, 1e-3).unwrap();
            worst = worst.max((model.total_energy(&s).unwrap() - e0).abs() / e0);
            if s.q[1].signum() != last_sign {
                crossings += 1;
                last_sign = s.q[1].signum();
            }
        }
        assert!(crossings >= 2, "no oscillation in 1 s");
        assert!(worst <= 1e-3, "drift {worst:e}");
    }
}

#[test]
fn damped_energy_never_increases() {
    // near 0.2 of critical damping on every mode; curvature rates are about
    // 1/l0 smaller than strain rates so they need far larger coefficients
    let robot = spatial().with_gravity([0.0; 3]);
    let diagonal = (0..robot.dof()).map(|i| if i % 3 == 0 { 3e5 } else { 3e8 }).collect();
    let model = DynamicsModel::new(robot, stiff(), DampingParams { diagonal }).unwrap();
    let mut s = displaced(model.robot());
    let tau = DVector::zeros(model.dof());
    let mut e = model.total_energy(&s).unwrap();
    for _ in 0..500 {
        s = model.step(&s, &tau, 1e-3).unwrap();
        let next = model.total_energy(&s).unwrap();
        assert!(next <= e * (1.0 + 1e-12), "{next} > {e}");
        e = next;
    }
}

#[test]
fn runge_kutta_is_fourth_order() {
    let model = free_model(spatial(), 0.0);
    let start = displaced(model.robot());
    let tau = DVector::zeros(model.dof());
    let horizon = 0.02;
    let run = |dt: f64| {
        let mut s = start.clone();
        for _ in 0..(horizon / dt).round() as usize {
            s = model.step(&s, &tau, dt).unwrap();
        }
        s.q
    };
    // coarser steps leave the asymptotic regime for the fastest mode
    let reference = run(horizon / 512.0);
    let coarse = (run(horizon / 8.0) - &reference).norm();
    let fine = (run(horizon / 16.0) - &reference).norm();
    let ratio = coarse / fine;
    assert!((10.0..=24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn integration_is_deterministic() {
    let model = free_model(planar(), 0.1);
    let s = displaced(model.robot());
    let tau = DVector::from_element(model.dof(), 1e3);
    assert_eq!(model.step(&s, &tau, 1e-3).unwrap(), model.step(&s, &tau, 1e-3).unwrap());
}

#[test]
fn uncorrected_input_mapping_is_rank_deficient() {
    let uncorrected = input_mapping(&ActuationParams {
        erratum_fix: false,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(uncorrected.row(1) + uncorrected.row(2), DMatrix::zeros(1, 3));
    assert!(matrix_rank(&uncorrected, 1e-12) <= 2);
    let fixed = input_mapping(&ActuationParams::default()).unwrap();
    assert_eq!(matrix_rank(&fixed, 1e-12), 3);
    let tau = &fixed * DVector::from_element(3, 1.0);
    assert!((tau[0] - 3.0 * 8e-4).abs() < 1e-18 && tau[1].abs() < 1e-20 && tau[2].abs() < 1e-20);
}
