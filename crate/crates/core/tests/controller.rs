use focusview_core::controller::*;
use focusview_core::kinematics::*;
use focusview_core::visibility::visibility_jacobian;
use focusview_core::voxel::Circle;
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn softmin_bounds(d in prop::collection::vec(-1.0f64..5.0, 1..40), h in 0.005f64..0.5) {
        let s = softmin_distance(&d, h, 0.0);
        let m = d.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(s >= m - 1e-12);
        prop_assert!(s - m <= h * (d.len() as f64).ln() + 1e-12);
        let w = softmin_weights(&d, h);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn softmin_gradient_matches_fd(
        x in -3.0f64..3.0, y in -3.0f64..3.0,
        obs in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0, 0.1f64..0.3), 1..12),
    ) {
        let circles: Vec<Circle> = obs.iter().map(|&(a, b, r)| Circle::new([a, b], r)).collect();
        prop_assume!(circles.iter().all(|c| (Vector2::new(x, y) - c.center_vec()).norm() > 0.05));
        let p = ControlParams::default();
        let field = |v: Vector2<f64>| obstacle_field(&v, &circles, 0.25, &p).unwrap();
        let g = field(Vector2::new(x, y)).gradient;
        let h = 1e-6;
        let fd = Vector3::new(
            (field(Vector2::new(x + h, y)).distance - field(Vector2::new(x - h, y)).distance) / (2.0 * h),
            (field(Vector2::new(x, y + h)).distance - field(Vector2::new(x, y - h)).distance) / (2.0 * h),
            0.0,
        );
        prop_assert!((g - fd).norm() <= 1e-5 * fd.norm().max(1e-3), "{g} vs {fd}");
        // the aggregate gradient is a convex combination of unit vectors
        prop_assert!(g.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn circulation_is_orthogonal(gx in -1.0f64..1.0, gy in -1.0f64..1.0) {
        let g = Vector3::new(gx, gy, 0.0);
        prop_assume!(g.norm() > 1e-6);
        let t = circulation_tangent(&g).unwrap();
        prop_assert!(g.dot(&t).abs() < 1e-12);
        prop_assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visibility_jacobian_matches_fd(
        v in prop::collection::vec(-2.5f64..2.5, 8),
        f in (-3.0f64..3.0, -3.0f64..3.0, -1.0f64..2.0),
    ) {
        let model = RobotModel::youbot_like();
        let q = Configuration::new([v[0], v[1], v[2]], [v[3], v[4], v[5], v[6], v[7]]);
        let pf = Vector3::new(f.0, f.1, f.2);
        let (_, jv) = visibility_jacobian(&model, &q, &pf, (74.0, 60.0));
        let h = 1e-6;
        for c in 0..DOF {
            let mut a = q.to_vector();
            let mut b = a;
            a[c] += h;
            b[c] -= h;
            let da = visibility_jacobian(&model, &Configuration::from_vector(&a), &pf, (74.0, 60.0)).0;
            let db = visibility_jacobian(&model, &Configuration::from_vector(&b), &pf, (74.0, 60.0)).0;
            let fd = (da - db) / (2.0 * h);
            let col = jv.column(c);
            prop_assert!((col - fd).norm() <= 1e-5 * fd.norm().max(1e-3), "column {c}: {col} vs {fd}");
        }
    }
}

#[test]
fn base_translation_row_entries() {
    // with the camera axis along +x, translating the base along x moves p_c
    // only; the row entry is -n_i . e_x
    let model = RobotModel::youbot_like();
    let q = Configuration::new([0.0, 0.0, 0.0], model.ready_arm());
    let pose = forward_kinematics(&model, &q);
    let planes = focusview_core::visibility::fov_planes(&pose, (74.0, 60.0));
    let pf = pose.translation.vector + Vector3::new(2.5, 0.0, 0.0);
    let (_, jv) = visibility_jacobian(&model, &q, &pf, (74.0, 60.0));
    for i in 0..4 {
        assert!((jv[(i, 0)] + planes.normals[i].x).abs() < 1e-12);
        assert!((jv[(i, 1)] + planes.normals[i].y).abs() < 1e-12);
    }
}

fn perturbed_goal(model: &RobotModel) -> TaskVector {
    let mut arm = model.ready_arm();
    arm[0] += 0.05;
    arm[1] += 0.05;
    arm[3] -= 0.05;
    task_vector(model, &Configuration::new([0.04, -0.03, 0.03], arm))
}

#[test]
fn exponential_tracking() {
    let model = RobotModel::youbot_like();
    let goal = perturbed_goal(&model);
    let p = ControlParams::default();
    let mut q = Configuration::new([0.0; 3], model.ready_arm());
    let expected = (-p.lambda * 0.02f64).exp();
    let mut prev = None;
    for k in 0..250 {
        let s = control_step(&model, &q, &goal, None, &[], &p);
        assert!(s.result.is_ok());
        let e = s.info.task_error.norm();
        if let (Some(pe), true) = (prev, k <= 100) {
            let ratio: f64 = e / pe;
            assert!((ratio - expected).abs() <= 0.1 * expected, "step {k}: ratio {ratio}");
        }
        if k * 2 >= 500 {
            assert!(e < 1e-3);
        }
        prev = Some(e);
        q = integrate(&q, &s.qdot, 0.02);
    }
}

#[test]
fn head_on_obstacle_stays_safe() {
    let model = RobotModel::youbot_like();
    let p = ControlParams::default();
    let obstacle = [Circle::new([0.0, 0.0], 0.3)];
    let mut q = Configuration::new([3.0, 0.0, std::f64::consts::PI], model.ready_arm());
    // goal behind the obstacle, straight through its centre
    let start = task_vector(&model, &q);
    let goal = TaskVector::new(start.p - Vector3::new(5.0, 0.0, 0.0), start.l);
    let mut min_d = f64::INFINITY;
    for _ in 0..3000 {
        let s = control_step(&model, &q, &goal, None, &obstacle, &p);
        let f = s.info.obstacle.unwrap();
        min_d = min_d.min(f.distance);
        assert!(f.min_clearance >= 0.0);
        q = integrate(&q, &s.qdot, 0.02);
    }
    assert!(min_d >= -1e-3, "{min_d}");
    // circulation carries the base around the obstacle
    assert!(q.base[0] < -0.5, "base ended at {:?}", q.base);
}
