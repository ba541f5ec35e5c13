//! Sampling-based informative path baseline: an RRT* path in the plane of
//! the camera, with entropy-scored views sampled around its nodes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_6;
use nalgebra::{Vector2, Vector3};
use rand::Rng;

use crate::math::rotate_about;
use crate::nbv::view_rays;
use crate::voxel::{ray_information, Circle, OccupancyMap};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RrtParams {
    pub step: f64,
    pub neighbor_radius: f64,
    pub max_iters: usize,
    pub goal_tolerance: f64,
    pub goal_bias: f64,
    /// Samples are drawn from the square of this half-width around the
    /// search-cylinder centre.
    pub sample_half_width: f64,
    pub sphere_radius: f64,
    pub views_per_node: usize,
    /// Angular bound on sampled yaw and pitch offsets, rad.
    pub max_offset: f64,
    /// Admissible camera heights for sampled views.
    pub z_range: (f64, f64),
    pub fov_deg: (f64, f64),
    pub grid: (usize, usize),
    pub max_range: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            step: 0.3,
            neighbor_radius: 0.9,
            max_iters: 2000,
            goal_tolerance: 0.15,
            goal_bias: 0.05,
            sample_half_width: 5.5,
            sphere_radius: 0.5,
            views_per_node: 10,
            max_offset: FRAC_PI_6,
            z_range: (0.2, 0.7),
            fov_deg: (74.0, 60.0),
            grid: (32, 24),
            max_range: 4.5,
        }
    }
}

/// Keep-out discs in the planning plane, already inflated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanarObstacles {
    pub discs: Vec<Circle>,
}

impl PlanarObstacles {
    /// Obstacles inflated by `inflation`, plus the forbidden cylinder as is.
    pub fn new(obstacles: &[Circle], inflation: f64, forbidden: &Circle) -> Self {
        let mut discs: Vec<Circle> =
            obstacles.iter().map(|o| Circle::new(o.center, o.radius + inflation)).collect();
        discs.push(*forbidden);
        PlanarObstacles { discs }
    }

    pub fn point_free(&self, p: &Vector2<f64>) -> bool {
        self.discs.iter().all(|d| (p - d.center_vec()).norm() > d.radius)
    }

    /// Exact segment test: the segment stays strictly outside every disc.
    pub fn segment_free(&self, a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
        self.discs.iter().all(|d| segment_point_distance(a, b, &d.center_vec()) > d.radius)
    }
}

pub fn segment_point_distance(a: &Vector2<f64>, b: &Vector2<f64>, p: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    (a + ab * t - p).norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrtTree {
    pub nodes: Vec<Vector2<f64>>,
    pub parent: Vec<Option<usize>>,
    pub cost: Vec<f64>,
    /// Node whose path ends at the goal, if the goal region was reached.
    pub goal_node: Option<usize>,
    /// Planned waypoints from start to goal (the goal itself is the last).
    pub path: Vec<Vector2<f64>>,
    /// No tree path was found; `path` is the straight segment.
    pub fallback: bool,
}

impl RrtTree {
    pub fn path_cost(&self) -> f64 {
        self.path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

fn nearest(nodes: &[Vector2<f64>], p: &Vector2<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in nodes.iter().enumerate() {
        let d = (n - p).norm_squared();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

pub fn build_rrt_star<R: Rng>(
    start: Vector2<f64>,
    goal: Vector2<f64>,
    center: Vector2<f64>,
    obstacles: &PlanarObstacles,
    params: &RrtParams,
    rng: &mut R,
) -> RrtTree {
    let mut tree = RrtTree {
        nodes: vec![start],
        parent: vec![None],
        cost: vec![0.0],
        goal_node: None,
        path: Vec::new(),
        fallback: false,
    };
    if (goal - start).norm() <= params.goal_tolerance {
        tree.goal_node = Some(0);
        tree.path = if goal == start { vec![start] } else { vec![start, goal] };
        return tree;
    }
    if !obstacles.point_free(&start) || !obstacles.point_free(&goal) {
        tree.path = vec![start, goal];
        tree.fallback = true;
        return tree;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let hw = params.sample_half_width;
    for _ in 0..params.max_iters {
        let sample = if rng.random_bool(params.goal_bias) {
            goal
        } else {
            center + Vector2::new(rng.random_range(-hw..hw), rng.random_range(-hw..hw))
        };
        let near = nearest(&tree.nodes, &sample);
        let dir = sample - tree.nodes[near];
        let dist = dir.norm();
        if dist < 1e-9 {
            continue;
        }
        let new = tree.nodes[near] + dir * (params.step.min(dist) / dist);
        if !obstacles.segment_free(&tree.nodes[near], &new) {
            continue;
        }
        let neighbors: Vec<usize> = (0..tree.nodes.len())
            .filter(|&i| (tree.nodes[i] - new).norm() <= params.neighbor_radius)
            .collect();
        let mut parent = near;
        let mut cost = tree.cost[near] + (new - tree.nodes[near]).norm();
        for &i in &neighbors {
            let c = tree.cost[i] + (new - tree.nodes[i]).norm();
            if c < cost && obstacles.segment_free(&tree.nodes[i], &new) {
                parent = i;
                cost = c;
            }
        }
        let id = tree.nodes.len();
        tree.nodes.push(new);
        tree.parent.push(Some(parent));
        tree.cost.push(cost);
        children.push(Vec::new());
        children[parent].push(id);
        for &i in &neighbors {
            let c = cost + (tree.nodes[i] - new).norm();
            if c < tree.cost[i] && obstacles.segment_free(&new, &tree.nodes[i]) {
                let old = tree.parent[i].expect("only the root has no parent");
                children[old].retain(|&k| k != i);
                children[id].push(i);
                tree.parent[i] = Some(id);
                let delta = tree.cost[i] - c;
                let mut stack = vec![i];
                while let Some(k) = stack.pop() {
                    tree.cost[k] -= delta;
                    stack.extend_from_slice(&children[k]);
                }
            }
        }
    }
    // best node inside the goal region with a free final segment
    let mut best: Option<(usize, f64)> = None;
    for i in 0..tree.nodes.len() {
        let d = (tree.nodes[i] - goal).norm();
        if d <= params.goal_tolerance && obstacles.segment_free(&tree.nodes[i], &goal) {
            let c = tree.cost[i] + d;
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((i, c));
            }
        }
    }
    match best {
        Some((g, _)) => {
            let mut path = Vec::new();
            let mut k = Some(g);
            while let Some(i) = k {
                path.push(tree.nodes[i]);
                k = tree.parent[i];
            }
            path.reverse();
            if tree.nodes[g] != goal {
                path.push(goal);
            }
            tree.goal_node = Some(g);
            tree.path = path;
        }
        None => {
            tree.path = vec![start, goal];
            tree.fallback = true;
        }
    }
    tree
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalView {
    pub position: Vector3<f64>,
    pub yaw: f64,
    pub pitch: f64,
    pub direction: Vector3<f64>,
    pub score: f64,
}

/// Direction facing `aim` from `position`, turned by `yaw` about world z
/// and then by `pitch` about the image-right axis (positive looks up).
pub fn offset_direction(position: &Vector3<f64>, aim: &Vector3<f64>, yaw: f64, pitch: f64) -> Vector3<f64> {
    let facing = (aim - position).normalize();
    let yawed = rotate_about(&facing, &Vector3::z(), yaw);
    let right = yawed.cross(&Vector3::z());
    let n = right.norm();
    if n < 1e-9 {
        return yawed;
    }
    rotate_about(&yawed, &(right / n), pitch)
}

/// Views uniformly distributed in the ball around `node` (restricted to the
/// admissible height band and to points outside `keep_out`), facing `aim`
/// up to random yaw/pitch offsets.
pub fn sample_views_around_node<R: Rng>(
    node: &Vector3<f64>,
    aim: &Vector3<f64>,
    keep_out: Option<&Circle>,
    params: &RrtParams,
    rng: &mut R,
) -> Vec<LocalView> {
    let r = params.sphere_radius;
    let mut out = Vec::with_capacity(params.views_per_node);
    let mut attempts = 0;
    while out.len() < params.views_per_node.max(1) && attempts < 1000 * params.views_per_node.max(1) {
        attempts += 1;
        let offset = Vector3::new(rng.random_range(-r..=r), rng.random_range(-r..=r), rng.random_range(-r..=r));
        let yaw = rng.random_range(-params.max_offset..=params.max_offset);
        let pitch = rng.random_range(-params.max_offset..=params.max_offset);
        if offset.norm() > r {
            continue;
        }
        let position = node + offset;
        if position.z < params.z_range.0 || position.z > params.z_range.1 {
            continue;
        }
        if let Some(k) = keep_out {
            if (position.xy() - k.center_vec()).norm() <= k.radius {
                continue;
            }
        }
        let direction = offset_direction(&position, aim, yaw, pitch);
        out.push(LocalView { position, yaw, pitch, direction, score: 0.0 });
    }
    if out.is_empty() {
        out.push(LocalView { position: *node, yaw: 0.0, pitch: 0.0, direction: offset_direction(node, aim, 0.0, 0.0), score: 0.0 });
    }
    out
}

/// Total ray information over the camera ray grid of a view.
pub fn evaluate_view_entropy(map: &OccupancyMap, position: &Vector3<f64>, direction: &Vector3<f64>, params: &RrtParams) -> f64 {
    view_rays(direction, params.fov_deg, params.grid)
        .iter()
        .map(|r| ray_information(map, position, r, params.max_range))
        .sum()
}

/// First view with the highest score.
pub fn best_view(views: &[LocalView]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in views.iter().enumerate() {
        if best.is_none_or(|b| v.score > views[b].score) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalTarget {
    View(LocalView),
    /// No intermediate node remains; head for the next-best view itself.
    Goal,
}

/// Walks a planned path node by node.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFollower {
    /// Waypoints at camera height; the last one is the goal.
    pub path: Vec<Vector3<f64>>,
    pub cursor: usize,
}

impl PathFollower {
    pub fn new(path: Vec<Vector3<f64>>) -> Self {
        PathFollower { path, cursor: 0 }
    }

    /// Skip nodes already within the sampling sphere of the camera; sample
    /// and score views around the next intermediate node.
    pub fn next_local_target<R: Rng>(
        &mut self,
        map: &OccupancyMap,
        current: &Vector3<f64>,
        aim: &Vector3<f64>,
        keep_out: Option<&Circle>,
        params: &RrtParams,
        rng: &mut R,
    ) -> LocalTarget {
        let last = self.path.len().saturating_sub(1);
        while self.cursor < last && (self.path[self.cursor] - current).norm() < params.sphere_radius {
            self.cursor += 1;
        }
        if self.cursor >= last {
            return LocalTarget::Goal;
        }
        let node = self.path[self.cursor];
        self.cursor += 1;
        let mut views = sample_views_around_node(&node, aim, keep_out, params, rng);
        for v in views.iter_mut() {
            v.score = evaluate_view_entropy(map, &v.position, &v.direction, params);
        }
        LocalTarget::View(views[best_view(&views).expect("at least one view")])
    }
}
