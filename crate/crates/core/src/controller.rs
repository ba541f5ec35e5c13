//! Whole-body velocity controller: one convex QP per control step.
//!
//! Decision vector `u = [qdot (8); kappa (4)]`, the slack block present only
//! when a focus point is tracked. Cost `|J qdot + lambda x_err|^2 +
//! lambda_q |qdot|^2 + lambda_kappa |kappa|^2`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector, Vector2, Vector3, Vector4};

use crate::kinematics::{
    chain_poses, attached_point_jacobian, attached_vector_jacobian, Configuration, RobotModel,
    TaskVector, Vec8, ARM_DOF, BASE_DOF, DOF,
};
use crate::qp::{solve_qp, QpError, QpProblem};
use crate::visibility::visibility_jacobian;
use crate::voxel::Circle;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ControlParams {
    /// Task convergence gain.
    pub lambda: f64,
    pub lambda_q: f64,
    /// Slack weight `alpha |p_err|^gamma`. The steep default keeps the
    /// visibility rows near-hard beyond 0.5 m (weight 1000 there) and lets
    /// them go soft within ~0.25 m of the view.
    pub alpha: f64,
    pub gamma: f64,
    pub lambda_d: f64,
    pub lambda_v: f64,
    pub lambda_phi: f64,
    /// Circulation speed at zero distance, m/s.
    pub b: f64,
    /// Distance at which the circulation requirement vanishes, m.
    pub d0: f64,
    pub delta: f64,
    pub h: f64,
    pub d_th: [f64; 4],
    pub fov_deg: (f64, f64),
    /// Raise the softmin margin to at least `h ln N`, making a non-negative
    /// aggregate distance imply a non-negative distance to every obstacle.
    pub log_margin: bool,
    /// Lower bound on the slack weight, keeping the QP strictly convex.
    pub slack_floor: f64,
    /// Rate at which the damping term pulls the arm toward its ready
    /// posture, 1/s. Competes with the task only through the small damping
    /// weight; 0 = plain damping.
    pub posture_gain: f64,
    /// Task-error norm below which the posture pull fades out linearly.
    pub posture_fade: f64,
    /// Caps on the commanded rates `lambda |p_err|` (m/s) and
    /// `lambda |l_err|` (1/s); the error is scaled down uniformly to honour
    /// them. Infinite = unsaturated.
    pub max_linear_rate: f64,
    pub max_angular_rate: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            lambda: 5.0,
            lambda_q: 0.01,
            alpha: 256_000.0,
            gamma: 8.0,
            lambda_d: 1.0,
            lambda_v: 5.0,
            lambda_phi: 1.0,
            b: 0.044,
            d0: 0.14,
            delta: 0.05,
            h: 0.03,
            d_th: [0.75; 4],
            fov_deg: (74.0, 60.0),
            log_margin: true,
            slack_floor: 1e-6,
            posture_gain: 1.0,
            posture_fade: 0.5,
            max_linear_rate: f64::INFINITY,
            max_angular_rate: f64::INFINITY,
        }
    }
}

/// `-h ln(mean(exp(-d_i / h))) - delta`, shifted by the minimum for
/// stability.
pub fn softmin_distance(d: &[f64], h: f64, delta: f64) -> f64 {
    let m = d.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = d.iter().map(|&di| libm::exp(-(di - m) / h)).sum();
    m - h * libm::log(sum / d.len() as f64) - delta
}

/// Normalized `exp(-d_i / h)` weights.
pub fn softmin_weights(d: &[f64], h: f64) -> Vec<f64> {
    let m = d.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = d.iter().map(|&di| libm::exp(-(di - m) / h)).collect();
    let sum: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

pub fn softmin_gradient(d: &[f64], gradients: &[Vector3<f64>], h: f64) -> Vector3<f64> {
    softmin_weights(d, h).iter().zip(gradients).map(|(w, g)| g * *w).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleDistance {
    /// Centre distance minus `R_r + R_o`.
    pub distance: f64,
    /// Gradient with respect to `(x, y, theta)`.
    pub gradient: Vector3<f64>,
    /// Base centre coincides with the obstacle centre; gradient undefined.
    pub degenerate: bool,
}

pub fn obstacle_distances(base_xy: &Vector2<f64>, obstacles: &[Circle], robot_radius: f64) -> Vec<ObstacleDistance> {
    obstacles
        .iter()
        .map(|o| {
            let rel = base_xy - o.center_vec();
            let dist = rel.norm();
            let safe = robot_radius + o.radius;
            if dist < 1e-12 {
                ObstacleDistance { distance: -safe, gradient: Vector3::zeros(), degenerate: true }
            } else {
                let u = rel / dist;
                ObstacleDistance { distance: dist - safe, gradient: Vector3::new(u.x, u.y, 0.0), degenerate: false }
            }
        })
        .collect()
}

/// Planar rotation used by the circulation field.
pub fn circulation_matrix() -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Unit tangent `Omega g / |Omega g|`, `None` when `g` has no planar part.
pub fn circulation_tangent(g: &Vector3<f64>) -> Option<Vector3<f64>> {
    let t = circulation_matrix() * g;
    let n = t.norm();
    (n > 1e-12).then(|| t / n)
}

pub fn beta(d: f64, b: f64, d0: f64) -> f64 {
    b * (1.0 - d / d0)
}

pub fn slack_weight(p_err: &Vector3<f64>, alpha: f64, gamma: f64) -> f64 {
    alpha * libm::pow(p_err.norm(), gamma)
}

/// Aggregate obstacle distance and its gradient for a base position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleField {
    pub distance: f64,
    pub gradient: Vector3<f64>,
    pub degenerate: bool,
    /// Minimum clearance over the individual obstacles.
    pub min_clearance: f64,
}

pub fn obstacle_field(base_xy: &Vector2<f64>, obstacles: &[Circle], robot_radius: f64, params: &ControlParams) -> Option<ObstacleField> {
    if obstacles.is_empty() {
        return None;
    }
    let per = obstacle_distances(base_xy, obstacles, robot_radius);
    let d: Vec<f64> = per.iter().map(|o| o.distance).collect();
    let g: Vec<Vector3<f64>> = per.iter().map(|o| o.gradient).collect();
    let margin = effective_margin(params, obstacles.len());
    Some(ObstacleField {
        distance: softmin_distance(&d, params.h, margin),
        gradient: softmin_gradient(&d, &g, params.h),
        degenerate: per.iter().any(|o| o.degenerate),
        min_clearance: d.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub fn effective_margin(params: &ControlParams, n: usize) -> f64 {
    if params.log_margin {
        params.delta.max(params.h * libm::log(n as f64))
    } else {
        params.delta
    }
}

/// Indices of the optional constraint rows in the assembled problem.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RowLayout {
    pub vfi: Option<usize>,
    pub circulation: Option<usize>,
    pub visibility: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub task_error: SVector<f64, 6>,
    pub obstacle: Option<ObstacleField>,
    pub tangent: Option<Vector3<f64>>,
    /// Plane distances minus thresholds.
    pub visibility: Option<Vector4<f64>>,
    pub lambda_kappa: Option<f64>,
    pub rows: RowLayout,
}

pub fn task_jacobian(model: &RobotModel, q: &Configuration) -> (TaskVector, SMatrix<f64, 6, DOF>) {
    let poses = chain_poses(model, q);
    let p = poses.camera_position();
    let l = poses.camera.rotation * Vector3::z();
    let mut j = SMatrix::<f64, 6, DOF>::zeros();
    j.fixed_view_mut::<3, DOF>(0, 0).copy_from(&attached_point_jacobian(&poses, &p));
    j.fixed_view_mut::<3, DOF>(3, 0).copy_from(&attached_vector_jacobian(&poses, &l));
    (TaskVector::new(p, l), j)
}

/// Task error with its position and direction parts shrunk so the commanded
/// rates stay within the caps.
pub fn saturate_error(err: &SVector<f64, 6>, params: &ControlParams) -> SVector<f64, 6> {
    let mut out = *err;
    let caps = [params.max_linear_rate, params.max_angular_rate];
    for (k, cap) in caps.into_iter().enumerate() {
        let part = err.fixed_rows::<3>(3 * k);
        let rate = params.lambda * part.norm();
        if rate > cap {
            let s = cap / rate;
            out.fixed_rows_mut::<3>(3 * k).copy_from(&(part * s));
        }
    }
    out
}

pub fn build_qp(
    model: &RobotModel,
    q: &Configuration,
    goal: &TaskVector,
    focus: Option<&Vector3<f64>>,
    obstacles: &[Circle],
    params: &ControlParams,
) -> (QpProblem, StepInfo) {
    let (x, j) = task_jacobian(model, q);
    let err = x.to_vector() - goal.to_vector();
    let nk = if focus.is_some() { 4 } else { 0 };
    let n = DOF + nk;

    let mut h = DMatrix::zeros(n, n);
    let jtj = j.transpose() * j;
    for r in 0..DOF {
        for c in 0..DOF {
            h[(r, c)] = 2.0 * jtj[(r, c)];
        }
        h[(r, r)] += 2.0 * params.lambda_q;
    }
    let mut f = DVector::zeros(n);
    let jte = j.transpose() * saturate_error(&err, params) * (2.0 * params.lambda);
    f.rows_mut(0, DOF).copy_from(&jte);
    // damping lambda_q |qdot - v|^2 with v = -k s (q_arm - ready); the fade
    // s = min(1, |x_err| / posture_fade) removes the bias at the goal
    let fade = if params.posture_fade > 0.0 { (err.norm() / params.posture_fade).min(1.0) } else { 1.0 };
    for a in 0..ARM_DOF {
        let v = -params.posture_gain * fade * (q.arm[a] - model.ready[a]);
        f[BASE_DOF + a] -= 2.0 * params.lambda_q * v;
    }

    let mut lower = DVector::from_element(n, f64::NEG_INFINITY);
    let mut upper = DVector::from_element(n, f64::INFINITY);
    for i in 0..DOF {
        lower[i] = -model.qdot_lim[i];
        upper[i] = model.qdot_lim[i];
    }
    for a in 0..ARM_DOF {
        let qa = q.arm[a];
        let (jl, ju) = (-params.lambda_phi * (qa - model.q_lower[a]), -params.lambda_phi * (qa - model.q_upper[a]));
        // jl <= 0 <= ju inside the limits; jl <= ju always since q_lower < q_upper
        assert!(jl <= ju, "empty joint-limit box on arm joint {a}");
        lower[BASE_DOF + a] = lower[BASE_DOF + a].max(jl);
        upper[BASE_DOF + a] = upper[BASE_DOF + a].min(ju);
        // far outside a limit the rate bound wins: move back at full speed
        if lower[BASE_DOF + a] > upper[BASE_DOF + a] {
            let v = if jl > 0.0 { model.qdot_lim[BASE_DOF + a] } else { -model.qdot_lim[BASE_DOF + a] };
            lower[BASE_DOF + a] = v;
            upper[BASE_DOF + a] = v;
        }
    }

    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut layout = RowLayout::default();
    let base_xy = Vector2::new(q.base[0], q.base[1]);
    let field = obstacle_field(&base_xy, obstacles, model.base_footprint_radius, params);
    let mut tangent = None;
    if let Some(fld) = field {
        if fld.degenerate {
            for i in 0..BASE_DOF {
                lower[i] = 0.0;
                upper[i] = 0.0;
            }
        } else {
            let mut a = DVector::zeros(n);
            for i in 0..BASE_DOF {
                a[i] = -fld.gradient[i];
            }
            layout.vfi = Some(rows.len());
            rows.push((a, params.lambda_d * fld.distance));
            tangent = circulation_tangent(&fld.gradient);
            if let Some(t) = tangent {
                let mut a = DVector::zeros(n);
                for i in 0..BASE_DOF {
                    a[i] = -t[i];
                }
                layout.circulation = Some(rows.len());
                rows.push((a, -beta(fld.distance, params.b, params.d0)));
            }
        }
    }

    let mut visibility = None;
    let mut lambda_kappa = None;
    if let Some(pf) = focus {
        let (dv, jv) = visibility_jacobian(model, q, pf, params.fov_deg);
        let dv_err = dv - Vector4::from(params.d_th);
        layout.visibility = Some(rows.len());
        for i in 0..4 {
            let mut a = DVector::zeros(n);
            for c in 0..DOF {
                a[c] = -jv[(i, c)];
            }
            a[DOF + i] = -1.0;
            rows.push((a, params.lambda_v * dv_err[i]));
        }
        let lk = slack_weight(&err.fixed_rows::<3>(0).into_owned(), params.alpha, params.gamma);
        for i in 0..4 {
            h[(DOF + i, DOF + i)] = 2.0 * lk.max(params.slack_floor);
            lower[DOF + i] = 0.0;
        }
        visibility = Some(dv_err);
        lambda_kappa = Some(lk);
    }

    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let info = StepInfo { task_error: err, obstacle: field, tangent, visibility, lambda_kappa, rows: layout };
    (QpProblem { h, f, a, b, lower, upper }, info)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutput {
    pub qdot: Vec8,
    pub kappa: Option<Vector4<f64>>,
    pub info: StepInfo,
    pub result: Result<(), QpError>,
}

/// Build and solve the step QP. On solver failure the commanded velocity
/// is zero and the error is reported in `result`.
pub fn control_step(
    model: &RobotModel,
    q: &Configuration,
    goal: &TaskVector,
    focus: Option<&Vector3<f64>>,
    obstacles: &[Circle],
    params: &ControlParams,
) -> StepOutput {
    let (problem, info) = build_qp(model, q, goal, focus, obstacles, params);
    match solve_qp(&problem) {
        Ok(sol) => {
            let qdot = Vec8::from_fn(|i, _| sol.x[i].clamp(-model.qdot_lim[i], model.qdot_lim[i]));
            let kappa = focus.map(|_| Vector4::from_fn(|i, _| sol.x[DOF + i]));
            StepOutput { qdot, kappa, info, result: Ok(()) }
        }
        Err(e) => StepOutput { qdot: Vec8::zeros(), kappa: None, info, result: Err(e) },
    }
}
