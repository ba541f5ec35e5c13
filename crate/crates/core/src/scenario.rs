//! Procedural worlds and the next-best-view episode loop shared by the
//! three motion strategies.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use nalgebra::{Vector2, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{control_step, obstacle_field, ControlParams};
use crate::focus::{update_focus, FocusParams, FocusState};
use crate::kinematics::{forward_kinematics, integrate, task_vector, Configuration, ModelError, RobotModel, TaskVector};
use crate::metrics::{coverage, reconstruct_cloud};
use crate::nbv::{generate_candidates, select_nbv, CandidateView, RsvParams, SearchCylinder};
use crate::objects::{primitives_bounds, suite_object};
use crate::sampling::{build_rrt_star, LocalTarget, PathFollower, PlanarObstacles, RrtParams, RrtTree};
use crate::voxel::{
    simulate_depth_scan, Circle, GridSpec, GroundTruthScene, MapParams, OccupancyMap, Primitive, SensorParams,
    VoxelIndex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    /// Visibility constraint on the maintained focus point.
    Focus,
    /// Direct motion to the next-best view.
    NoPath,
    /// Informative RRT* waypoints.
    Sampling,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Focus, Strategy::NoPath, Strategy::Sampling];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Focus => "focus",
            Strategy::NoPath => "no_path",
            Strategy::Sampling => "sampling",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownStrategy;

impl fmt::Display for UnknownStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown strategy (expected focus, no_path or sampling)")
    }
}

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL.into_iter().find(|x| x.label() == s).ok_or(UnknownStrategy)
    }
}

/// The hidden object. World coordinates; the floor is `z = 0`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ObjectSpec {
    /// Member of the built-in desk suite.
    Suite { index: usize },
    /// Suite member `seed % suite size`, so a seed sweep walks the suite.
    SuiteBySeed,
    Primitives { primitives: Vec<Primitive> },
    /// Occupied cell centres, e.g. from an external voxelizer.
    Voxels { centers: Vec<[f64; 3]> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct WorldParams {
    pub obstacle_count: usize,
    pub obstacle_radius: (f64, f64),
    /// Obstacles are placed inside this radius around the search centre.
    pub workspace_radius: f64,
    /// Forbidden cylinder radius; `None` = object footprint plus the margin.
    pub forbidden_radius: Option<f64>,
    pub forbidden_margin: f64,
    /// Candidate draws before obstacle placement gives up.
    pub max_attempts: usize,
    /// Extra clearance kept free around the start base, beyond the footprint.
    pub start_clearance: f64,
    /// Bounding box size; centred on the search centre in x/y, floor-based.
    pub box_extent: [f64; 3],
    /// Camera distance from the search centre at the start.
    pub start_radius: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            obstacle_count: 10,
            obstacle_radius: (0.1, 0.3),
            workspace_radius: 5.0,
            forbidden_radius: None,
            forbidden_margin: 0.3,
            max_attempts: 2000,
            start_clearance: 0.3,
            box_extent: [5.5, 5.5, 4.0],
            start_radius: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EpisodeParams {
    pub dt: f64,
    /// Map update every this many control steps.
    pub scan_every: usize,
    pub arrival_position: f64,
    pub arrival_angle_deg: f64,
    /// Simulated seconds before a leg is abandoned.
    pub leg_timeout: f64,
    /// Consecutive infeasible steps that abort the episode.
    pub infeasible_abort: usize,
    pub waypoint_position: f64,
    pub waypoint_angle_deg: f64,
    pub waypoint_timeout: f64,
    pub coverage_eps: f64,
    /// Position error above which visibility is audited.
    pub far_threshold: f64,
    pub visibility_tol: f64,
    /// Candidates whose nominal base pose has a smaller aggregate obstacle
    /// distance are never selected.
    pub candidate_clearance: f64,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            dt: 0.02,
            scan_every: 5,
            arrival_position: 0.05,
            arrival_angle_deg: 5.0,
            leg_timeout: 120.0,
            infeasible_abort: 100,
            waypoint_position: 0.1,
            waypoint_angle_deg: 10.0,
            waypoint_timeout: 20.0,
            coverage_eps: 0.008,
            far_threshold: 0.5,
            visibility_tol: 1e-3,
            candidate_clearance: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub strategy: Strategy,
    pub n_nbv: usize,
    pub object: ObjectSpec,
    pub robot: RobotModel,
    pub world: WorldParams,
    pub episode: EpisodeParams,
    pub map: MapParams,
    pub sensor: SensorParams,
    pub search: SearchCylinder,
    pub rsv: RsvParams,
    pub focus: FocusParams,
    pub control: ControlParams,
    pub rrt: RrtParams,
}

impl ScenarioConfig {
    pub fn new(seed: u64, strategy: Strategy, object: ObjectSpec) -> Self {
        ScenarioConfig {
            seed,
            strategy,
            n_nbv: 10,
            object,
            robot: RobotModel::youbot_like(),
            world: WorldParams::default(),
            episode: EpisodeParams::default(),
            map: MapParams::default(),
            sensor: SensorParams::default(),
            search: SearchCylinder::default(),
            rsv: RsvParams::default(),
            focus: FocusParams::default(),
            control: ControlParams::default(),
            rrt: RrtParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate().map_err(ConfigError::Robot)?;
        let (lo, hi) = self.world.obstacle_radius;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(ConfigError::ObstacleRadius);
        }
        if self.n_nbv == 0 {
            return Err(ConfigError::NoViews);
        }
        if !(self.episode.dt > 0.0) || self.episode.scan_every == 0 {
            return Err(ConfigError::Timing);
        }
        if !(self.map.resolution > 0.0) || self.world.box_extent.iter().any(|e| !(*e > 0.0)) {
            return Err(ConfigError::Grid);
        }
        if self.search.positions == 0 || !(self.search.radius > 0.0) {
            return Err(ConfigError::SearchCylinder);
        }
        Ok(())
    }

    /// Object primitives or cells after resolving the seed-dependent choice.
    fn resolved_object(&self) -> ObjectSpec {
        match &self.object {
            ObjectSpec::SuiteBySeed => ObjectSpec::Suite { index: (self.seed % crate::objects::SUITE_SIZE as u64) as usize },
            o => o.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    Robot(ModelError),
    ObstacleRadius,
    NoViews,
    Timing,
    Grid,
    SearchCylinder,
    EmptyObject,
    /// Some object cell falls outside the bounding box.
    ObjectOutsideBox,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Robot(e) => write!(f, "robot model: {e}"),
            ConfigError::ObstacleRadius => f.write_str("obstacle radius range must satisfy 0 < min <= max < inf"),
            ConfigError::NoViews => f.write_str("n_nbv must be at least 1"),
            ConfigError::Timing => f.write_str("dt must be positive and scan_every at least 1"),
            ConfigError::Grid => f.write_str("resolution and box extent must be positive"),
            ConfigError::SearchCylinder => f.write_str("search cylinder needs positions and a positive radius"),
            ConfigError::EmptyObject => f.write_str("object has no occupied cells"),
            ConfigError::ObjectOutsideBox => f.write_str("object extends beyond the bounding box"),
        }
    }
}

/// Ground truth, obstacle layout and start pose of one episode.
#[derive(Clone, Debug)]
pub struct World {
    pub scene: GroundTruthScene,
    /// Surface cell centres of the object: the coverage reference.
    pub reference: Vec<Vector3<f64>>,
    pub object_min: [f64; 3],
    pub object_max: [f64; 3],
    /// Aim point of the focus field of view.
    pub focus_target: Vector3<f64>,
    pub start: Configuration,
    /// Placed obstacle groups; a wall group holds several touching circles.
    pub obstacle_groups: Vec<Vec<Circle>>,
    /// Groups that could not be placed within the attempt budget.
    pub placement_shortfall: usize,
}

impl World {
    /// Obstacles plus the forbidden cylinder, as seen by the controller.
    pub fn controller_obstacles(&self) -> Vec<Circle> {
        let mut all = self.scene.obstacles.clone();
        all.push(self.scene.forbidden_cylinder);
        all
    }
}

/// Camera position of the ready posture in the base frame.
fn ready_camera_offset(robot: &RobotModel) -> Vector3<f64> {
    task_vector(robot, &Configuration::new([0.0; 3], robot.ready_arm())).p
}

/// Base position that puts the ready-posture camera at `camera_xy` looking
/// along the horizontal heading `yaw`.
pub fn nominal_base(robot: &RobotModel, camera_xy: &Vector2<f64>, yaw: f64) -> Vector2<f64> {
    let o = ready_camera_offset(robot);
    let (s, c) = libm::sincos(yaw);
    camera_xy - Vector2::new(c * o.x - s * o.y, s * o.x + c * o.y)
}

pub fn start_configuration(robot: &RobotModel, search: &SearchCylinder, start_radius: f64) -> Configuration {
    let cam = search.center_xy() + Vector2::new(start_radius, 0.0);
    let base = nominal_base(robot, &cam, core::f64::consts::PI);
    Configuration::new([base.x, base.y, core::f64::consts::PI], robot.ready_arm())
}

pub fn generate_world(config: &ScenarioConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let center = config.search.center;
    let grid = GridSpec::centered(center, 0.0, config.world.box_extent, config.map.resolution);
    let placeholder = Circle::new(center, 0.0);
    let (scene, object_min, object_max, footprint) = match config.resolved_object() {
        ObjectSpec::Suite { index } => voxelize(grid, &suite_object(index), center, placeholder),
        ObjectSpec::Primitives { primitives } => voxelize(grid, &primitives, center, placeholder),
        ObjectSpec::Voxels { centers } => {
            let mut cells = Vec::with_capacity(centers.len());
            for c in &centers {
                let v = grid.index_of(&Vector3::from(*c));
                if grid.linear(v).is_none() {
                    return Err(ConfigError::ObjectOutsideBox);
                }
                cells.push(v);
            }
            let scene = GroundTruthScene::from_voxels(grid, cells, placeholder, Vec::new());
            let (lo, hi, fp) = cell_bounds(&scene, center);
            (scene, lo, hi, fp)
        }
        ObjectSpec::SuiteBySeed => unreachable!("resolved above"),
    };
    if scene.object_voxels.is_empty() {
        return Err(ConfigError::EmptyObject);
    }
    let bb = scene.bounding_box;
    if (0..3).any(|i| object_min[i] < bb.min[i] - 1e-9 || object_max[i] > bb.max[i] + 1e-9) {
        return Err(ConfigError::ObjectOutsideBox);
    }
    let forbidden = Circle::new(
        center,
        config.world.forbidden_radius.unwrap_or(footprint + config.world.forbidden_margin),
    );
    let start = start_configuration(&config.robot, &config.search, config.world.start_radius);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let start_xy = Vector2::new(start.base[0], start.base[1]);
    let (groups, shortfall) = generate_obstacles(
        &config.world,
        &forbidden,
        config.robot.base_footprint_radius,
        &start_xy,
        &mut rng,
    );
    let mut scene = scene;
    scene.forbidden_cylinder = forbidden;
    scene.obstacles = groups.iter().flatten().copied().collect();
    let reference = scene.surface_voxels().into_iter().map(|v| scene.grid.center_of(v)).collect();
    let focus_target = Vector3::new(center[0], center[1], 0.5 * (object_min[2] + object_max[2]));
    Ok(World {
        scene,
        reference,
        object_min,
        object_max,
        focus_target,
        start,
        obstacle_groups: groups,
        placement_shortfall: shortfall,
    })
}

fn voxelize(
    grid: GridSpec,
    prims: &[Primitive],
    center: [f64; 2],
    forbidden: Circle,
) -> (GroundTruthScene, [f64; 3], [f64; 3], f64) {
    let scene = GroundTruthScene::from_primitives(grid, prims, forbidden, Vec::new());
    let (lo, hi) = primitives_bounds(prims);
    let fp = prims.iter().map(|p| p.footprint_radius(center)).fold(0.0, f64::max);
    (scene, lo, hi, fp)
}

fn cell_bounds(scene: &GroundTruthScene, center: [f64; 2]) -> ([f64; 3], [f64; 3], f64) {
    let half = scene.grid.resolution / 2.0;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut fp: f64 = 0.0;
    for v in &scene.object_voxels {
        let c = scene.grid.center_of(*v);
        for i in 0..3 {
            lo[i] = lo[i].min(c[i] - half);
            hi[i] = hi[i].max(c[i] + half);
        }
        fp = fp.max(libm::hypot(c.x - center[0], c.y - center[1]) + half * core::f64::consts::SQRT_2);
    }
    (lo, hi, fp)
}

/// Place obstacle groups uniformly in the annulus between the forbidden
/// cylinder and the workspace radius. Circles of different groups keep a
/// surface clearance above the robot diameter; a circle that lands closer
/// than that to the forbidden cylinder grows a wall of touching circles
/// towards it, so no gap narrower than the robot remains. Returns the groups
/// and how many could not be placed.
pub fn generate_obstacles<R: Rng>(
    params: &WorldParams,
    forbidden: &Circle,
    robot_radius: f64,
    start_base: &Vector2<f64>,
    rng: &mut R,
) -> (Vec<Vec<Circle>>, usize) {
    let c = forbidden.center_vec();
    let diameter = 2.0 * robot_radius;
    let (r_lo, r_hi) = params.obstacle_radius;
    let mut groups: Vec<Vec<Circle>> = Vec::new();
    let mut attempts = 0;
    while groups.len() < params.obstacle_count && attempts < params.max_attempts {
        attempts += 1;
        let r = if r_hi > r_lo { rng.random_range(r_lo..=r_hi) } else { r_lo };
        // area-uniform draw in the disc, rejected inside the forbidden cylinder
        let rho = params.workspace_radius * libm::sqrt(rng.random::<f64>());
        let phi = rng.random_range(0.0..core::f64::consts::TAU);
        let pos = c + Vector2::new(rho * libm::cos(phi), rho * libm::sin(phi));
        let to_center = pos - c;
        let dist = to_center.norm();
        let gap = dist - forbidden.radius - r;
        if gap <= 0.0 {
            continue;
        }
        let mut group = alloc::vec![Circle::new([pos.x, pos.y], r)];
        if gap < diameter {
            let u = to_center / dist;
            let mut k = 1;
            loop {
                let p = pos - u * (2.0 * r * k as f64);
                group.push(Circle::new([p.x, p.y], r));
                if (p - c).norm() - forbidden.radius - r <= 0.0 {
                    break;
                }
                k += 1;
            }
        }
        let clear_of_start = group
            .iter()
            .all(|g| (g.center_vec() - start_base).norm() - g.radius > robot_radius + params.start_clearance);
        let clear_of_others = groups.iter().flatten().all(|e| {
            group.iter().all(|g| (g.center_vec() - e.center_vec()).norm() - g.radius - e.radius > diameter)
        });
        if clear_of_start && clear_of_others {
            groups.push(group);
        }
    }
    let shortfall = params.obstacle_count - groups.len();
    (groups, shortfall)
}

/// Monotone wall-clock source for planner timing; `NullClock` keeps runs
/// fully deterministic.
pub trait Clock {
    fn seconds(&mut self) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn seconds(&mut self) -> f64 {
        0.0
    }
}

/// One control step, after the command was computed and applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlRecord {
    /// Episode simulated time at the start of the step, s.
    pub time: f64,
    pub nbv_step: usize,
    pub q: Configuration,
    pub camera: TaskVector,
    pub goal: TaskVector,
    pub position_error: f64,
    pub angle_error: f64,
    /// Aggregate obstacle distance and raw minimum clearance of the base.
    pub distance: Option<f64>,
    pub min_clearance: Option<f64>,
    /// Plane distances minus thresholds for the focus point.
    pub visibility: Option<Vector4<f64>>,
    pub lambda_kappa: Option<f64>,
    pub kappa: Option<Vector4<f64>>,
    pub feasible: bool,
}

/// Hooks for trace output. Every method defaults to a no-op.
pub trait EpisodeObserver {
    fn on_control(&mut self, _record: &ControlRecord) {}
    fn on_focus(&mut self, _nbv_step: usize, _time: f64, _state: &FocusState) {}
    fn on_candidates(&mut self, _nbv_step: usize, _candidates: &[CandidateView], _chosen: Option<usize>) {}
    fn on_tree(&mut self, _nbv_step: usize, _tree: &RrtTree) {}
    fn on_nbv(&mut self, _record: &NbvRecord, _map: &OccupancyMap) {}
}

pub struct NoObserver;

impl EpisodeObserver for NoObserver {}

/// Metrics recorded when a leg ends.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NbvRecord {
    /// 1-based.
    pub step: usize,
    pub nbv_id: usize,
    pub gain: f64,
    pub coverage: f64,
    /// Entropy of the bounding box, nats.
    pub entropy: f64,
    /// Cumulative simulated travel time, s.
    pub travel_time: f64,
    /// Cumulative strategy planning wall time, s.
    pub planner_time: f64,
    /// Cumulative next-best-view selection wall time, s.
    pub selection_time: f64,
    pub arrived: bool,
    pub leg_steps: usize,
    pub infeasible_steps: usize,
    pub min_distance: f64,
    pub min_clearance: f64,
    pub penetrations: usize,
    /// Steps with position error above the far threshold, and those among
    /// them with the focus point inside the shrunken field of view.
    pub far_steps: usize,
    pub far_visible_steps: usize,
    pub focus_recomputes: usize,
    pub local_targets: usize,
    /// Information rays cast by the strategy planner during the leg.
    pub planner_rays: u64,
    pub scans: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    Completed,
    /// Every admissible candidate was visited before `n_nbv` legs.
    Exhausted,
    /// Too many consecutive infeasible controller steps.
    Aborted,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeLog {
    pub seed: u64,
    pub strategy: Strategy,
    pub object: usize,
    pub initial_coverage: f64,
    pub initial_entropy: f64,
    pub steps: Vec<NbvRecord>,
    pub outcome: Outcome,
    pub obstacle_circles: usize,
    pub placement_shortfall: usize,
    /// Candidates excluded because their base pose is too close to an obstacle.
    pub blocked_candidates: usize,
    pub reference_points: usize,
}

impl EpisodeLog {
    pub fn last(&self) -> Option<&NbvRecord> {
        self.steps.last()
    }

    pub fn min_distance(&self) -> f64 {
        self.steps.iter().map(|s| s.min_distance).fold(f64::INFINITY, f64::min)
    }

    pub fn penetrations(&self) -> usize {
        self.steps.iter().map(|s| s.penetrations).sum()
    }
}

fn arrived(x: &TaskVector, goal: &TaskVector, pos_tol: f64, angle_deg: f64) -> bool {
    (x.p - goal.p).norm() < pos_tol && x.angle_to(goal) < angle_deg.to_radians()
}

struct Episode<'a> {
    config: &'a ScenarioConfig,
    world: &'a World,
    obstacles: Vec<Circle>,
    map: OccupancyMap,
    q: Configuration,
    steps: usize,
    scans: usize,
}

impl Episode<'_> {
    fn scan(&mut self) {
        let cam = forward_kinematics(&self.config.robot, &self.q);
        let s = simulate_depth_scan(&self.world.scene, &cam, &self.config.sensor);
        self.map.integrate_scan(&s);
        self.scans += 1;
    }

    fn metrics(&self) -> (f64, f64) {
        let cloud = reconstruct_cloud(&self.map);
        let c = coverage(&cloud, &self.world.reference, self.config.episode.coverage_eps);
        (c, self.map.grid_entropy())
    }
}

/// Run one episode: choose a next-best view, drive there with the configured
/// strategy while scanning, record metrics on arrival (or leg timeout), and
/// repeat `n_nbv` times. A pure function of the configuration apart from the
/// clock readings.
pub fn run_episode(
    config: &ScenarioConfig,
    clock: &mut dyn Clock,
    observer: &mut dyn EpisodeObserver,
) -> Result<EpisodeLog, ConfigError> {
    let world = generate_world(config)?;
    Ok(run_episode_in(config, &world, clock, observer))
}

pub fn run_episode_in(
    config: &ScenarioConfig,
    world: &World,
    clock: &mut dyn Clock,
    observer: &mut dyn EpisodeObserver,
) -> EpisodeLog {
    let ep = &config.episode;
    let robot = &config.robot;
    let mut search = config.search;
    search.center = world.scene.forbidden_cylinder.center;
    let mut e = Episode {
        config,
        world,
        obstacles: world.controller_obstacles(),
        map: OccupancyMap::new(world.scene.grid, config.map),
        q: world.start,
        steps: 0,
        scans: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);

    let mut candidates = generate_candidates(&search);
    let mut visited = BTreeSet::new();
    for c in &candidates {
        let yaw = libm::atan2(c.direction.y, c.direction.x);
        let base = nominal_base(robot, &Vector2::new(c.position.x, c.position.y), yaw);
        let blocked = obstacle_field(&base, &e.obstacles, robot.base_footprint_radius, &config.control)
            .is_some_and(|f| f.distance < ep.candidate_clearance);
        if blocked {
            visited.insert(c.id);
        }
    }
    let blocked_candidates = visited.len();

    e.scan();
    let (initial_coverage, initial_entropy) = e.metrics();
    let mut log = EpisodeLog {
        seed: config.seed,
        strategy: config.strategy,
        object: match config.resolved_object() {
            ObjectSpec::Suite { index } => index,
            _ => usize::MAX,
        },
        initial_coverage,
        initial_entropy,
        steps: Vec::new(),
        outcome: Outcome::Completed,
        obstacle_circles: world.scene.obstacles.len(),
        placement_shortfall: world.placement_shortfall,
        blocked_candidates,
        reference_points: world.reference.len(),
    };

    let mut planner_time = 0.0;
    let mut selection_time = 0.0;
    let mut focus: Option<FocusState> = None;
    let mut streak = 0usize;

    for step in 1..=config.n_nbv {
        let t0 = clock.seconds();
        let chosen = select_nbv(&e.map, &mut candidates, &visited, &config.rsv);
        selection_time += clock.seconds() - t0;
        observer.on_candidates(step, &candidates, chosen.ok());
        let Ok(idx) = chosen else {
            log.outcome = Outcome::Exhausted;
            break;
        };
        let nbv = candidates[idx].clone();
        visited.insert(nbv.id);
        let goal = TaskVector::new(nbv.position, nbv.direction);

        let mut rec = NbvRecord {
            step,
            nbv_id: nbv.id,
            gain: nbv.score,
            coverage: 0.0,
            entropy: 0.0,
            travel_time: 0.0,
            planner_time: 0.0,
            selection_time: 0.0,
            arrived: false,
            leg_steps: 0,
            infeasible_steps: 0,
            min_distance: f64::INFINITY,
            min_clearance: f64::INFINITY,
            penetrations: 0,
            far_steps: 0,
            far_visible_steps: 0,
            focus_recomputes: 0,
            local_targets: 0,
            planner_rays: 0,
            scans: 0,
        };
        let scans_before = e.scans;

        let mut follower = None;
        if config.strategy == Strategy::Sampling {
            let t0 = clock.seconds();
            let x = task_vector(robot, &e.q);
            let planar = PlanarObstacles::new(&world.scene.obstacles, robot.base_footprint_radius, &world.scene.forbidden_cylinder);
            let tree = build_rrt_star(
                Vector2::new(x.p.x, x.p.y),
                Vector2::new(goal.p.x, goal.p.y),
                search.center_xy(),
                &planar,
                &config.rrt,
                &mut rng,
            );
            let path = tree.path.iter().map(|p| Vector3::new(p.x, p.y, search.view_height)).collect();
            planner_time += clock.seconds() - t0;
            observer.on_tree(step, &tree);
            follower = Some(PathFollower::new(path));
        }
        // current target and how long it has been chased
        let mut local: Option<(TaskVector, f64)> = None;
        let mut local_done = follower.is_none();
        let views_rays = (config.rrt.grid.0 * config.rrt.grid.1 * config.rrt.views_per_node) as u64;

        let mut leg_time = 0.0;
        loop {
            let x = task_vector(robot, &e.q);
            if arrived(&x, &goal, ep.arrival_position, ep.arrival_angle_deg) {
                rec.arrived = true;
                break;
            }
            if leg_time >= ep.leg_timeout - 1e-9 {
                break;
            }

            if let Some(f) = follower.as_mut() {
                let reached = local.is_some_and(|(t, since)| {
                    arrived(&x, &t, ep.waypoint_position, ep.waypoint_angle_deg) || leg_time - since >= ep.waypoint_timeout
                });
                if !local_done && (local.is_none() || reached) {
                    let t0 = clock.seconds();
                    let next = f.next_local_target(
                        &e.map,
                        &x.p,
                        &world.focus_target,
                        Some(&world.scene.forbidden_cylinder),
                        &config.rrt,
                        &mut rng,
                    );
                    planner_time += clock.seconds() - t0;
                    match next {
                        LocalTarget::View(v) => {
                            local = Some((TaskVector::new(v.position, v.direction), leg_time));
                            rec.local_targets += 1;
                            rec.planner_rays += views_rays;
                        }
                        LocalTarget::Goal => {
                            local = None;
                            local_done = true;
                        }
                    }
                }
            }
            let target = local.map_or(goal, |(t, _)| t);

            let mut focus_point = None;
            if config.strategy == Strategy::Focus {
                let t0 = clock.seconds();
                let updated = update_focus(focus.as_ref(), &x.p, &world.focus_target, &e.map, &config.focus);
                planner_time += clock.seconds() - t0;
                if let Ok((state, recomputed)) = updated {
                    if recomputed {
                        rec.focus_recomputes += 1;
                        rec.planner_rays += (config.focus.grid * config.focus.grid) as u64;
                        observer.on_focus(step, e.steps as f64 * ep.dt, &state);
                    }
                    focus = Some(state);
                }
                focus_point = focus.map(|s| s.point);
            }

            let out = control_step(robot, &e.q, &target, focus_point.as_ref(), &e.obstacles, &config.control);
            let p_err = (x.p - goal.p).norm();
            if let Some(dv) = out.info.visibility {
                if p_err > ep.far_threshold {
                    rec.far_steps += 1;
                    if dv.iter().all(|d| *d >= -ep.visibility_tol) {
                        rec.far_visible_steps += 1;
                    }
                }
            }
            let feasible = out.result.is_ok();
            if feasible {
                streak = 0;
            } else {
                streak += 1;
                rec.infeasible_steps += 1;
            }
            observer.on_control(&ControlRecord {
                time: e.steps as f64 * ep.dt,
                nbv_step: step,
                q: e.q,
                camera: x,
                goal: target,
                position_error: p_err,
                angle_error: x.angle_to(&goal),
                distance: out.info.obstacle.map(|o| o.distance),
                min_clearance: out.info.obstacle.map(|o| o.min_clearance),
                visibility: out.info.visibility,
                lambda_kappa: out.info.lambda_kappa,
                kappa: out.kappa,
                feasible,
            });

            e.q = integrate(&e.q, &out.qdot, ep.dt);
            e.steps += 1;
            rec.leg_steps += 1;
            leg_time = rec.leg_steps as f64 * ep.dt;
            let base = Vector2::new(e.q.base[0], e.q.base[1]);
            if let Some(f) = obstacle_field(&base, &e.obstacles, robot.base_footprint_radius, &config.control) {
                rec.min_distance = rec.min_distance.min(f.distance);
                rec.min_clearance = rec.min_clearance.min(f.min_clearance);
                if f.min_clearance < 0.0 {
                    rec.penetrations += 1;
                }
            }
            if e.steps % ep.scan_every == 0 {
                e.scan();
            }
            if streak > ep.infeasible_abort {
                log.outcome = Outcome::Aborted;
                break;
            }
        }

        if log.outcome != Outcome::Aborted {
            // the measurement taken at the view itself
            e.scan();
        }
        let (c, h) = e.metrics();
        rec.coverage = c;
        rec.entropy = h;
        rec.travel_time = e.steps as f64 * ep.dt;
        rec.planner_time = planner_time;
        rec.selection_time = selection_time;
        rec.scans = e.scans - scans_before;
        observer.on_nbv(&rec, &e.map);
        log.steps.push(rec);
        if log.outcome == Outcome::Aborted {
            break;
        }
    }
    log
}

/// Surface cells of the object that the map currently holds as occupied.
pub fn covered_cells(world: &World, map: &OccupancyMap) -> Vec<VoxelIndex> {
    world
        .scene
        .surface_voxels()
        .into_iter()
        .filter(|v| map.state(*v) == crate::voxel::CellState::Occupied)
        .collect()
}
