//! Episode log files. The episode CSV carries only simulated quantities so a
//! rerun reproduces it byte for byte; wall-clock times go to a separate
//! timing CSV and the JSON summary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use focusview_core::nbv::{CandidateView, Orientation};
use focusview_core::sampling::RrtTree;
use focusview_core::scenario::{ControlRecord, EpisodeLog, EpisodeObserver, NbvRecord, Outcome, Strategy};
use focusview_core::focus::FocusState;
use focusview_core::voxel::{Circle, OccupancyMap};
use serde::{Deserialize, Serialize};

pub fn episode_csv_name(strategy: Strategy, seed: u64) -> String {
    format!("episode_{strategy}_{seed:04}.csv")
}

pub fn timing_csv_name(strategy: Strategy, seed: u64) -> String {
    format!("timing_{strategy}_{seed:04}.csv")
}

pub fn summary_json_name(strategy: Strategy, seed: u64) -> String {
    format!("summary_{strategy}_{seed:04}.json")
}

fn trace_name(kind: &str, strategy: Strategy, seed: u64) -> String {
    format!("{kind}_{strategy}_{seed:04}.csv")
}

/// One row per next-best view of the episode CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub seed: u64,
    pub strategy: Strategy,
    pub object: usize,
    pub step: usize,
    pub nbv_id: usize,
    pub gain: f64,
    pub coverage: f64,
    pub entropy: f64,
    /// Entropy of the bounding box with every cell unknown.
    pub max_entropy: f64,
    pub travel_time: f64,
    pub arrived: bool,
    pub leg_steps: usize,
    pub infeasible_steps: usize,
    pub min_distance: f64,
    pub min_clearance: f64,
    pub penetrations: usize,
    pub far_steps: usize,
    pub far_visible_steps: usize,
    pub focus_recomputes: usize,
    pub local_targets: usize,
    pub planner_rays: u64,
    pub scans: usize,
}

impl EpisodeRow {
    pub fn new(log: &EpisodeLog, s: &NbvRecord, max_entropy: f64) -> Self {
        EpisodeRow {
            seed: log.seed,
            strategy: log.strategy,
            object: log.object,
            step: s.step,
            nbv_id: s.nbv_id,
            gain: s.gain,
            coverage: s.coverage,
            entropy: s.entropy,
            max_entropy,
            travel_time: s.travel_time,
            arrived: s.arrived,
            leg_steps: s.leg_steps,
            infeasible_steps: s.infeasible_steps,
            min_distance: s.min_distance,
            min_clearance: s.min_clearance,
            penetrations: s.penetrations,
            far_steps: s.far_steps,
            far_visible_steps: s.far_visible_steps,
            focus_recomputes: s.focus_recomputes,
            local_targets: s.local_targets,
            planner_rays: s.planner_rays,
            scans: s.scans,
        }
    }
}

/// Cumulative wall-clock seconds per next-best view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub seed: u64,
    pub strategy: Strategy,
    pub step: usize,
    pub planner_time: f64,
    pub selection_time: f64,
    /// Simulated travel plus planner wall time.
    pub total_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub strategy: Strategy,
    pub object: usize,
    pub outcome: Outcome,
    pub steps: usize,
    pub initial_coverage: f64,
    pub initial_entropy: f64,
    pub max_entropy: f64,
    pub coverage: f64,
    pub entropy: f64,
    pub travel_time: f64,
    pub planner_time: f64,
    pub selection_time: f64,
    pub total_time: f64,
    /// Wall-clock seconds for the whole episode, simulation included.
    pub wall_time: f64,
    pub min_distance: f64,
    pub penetrations: usize,
    pub far_steps: usize,
    pub far_visible_steps: usize,
    pub obstacle_circles: usize,
    pub placement_shortfall: usize,
    pub blocked_candidates: usize,
    pub reference_points: usize,
}

impl EpisodeSummary {
    pub fn new(log: &EpisodeLog, max_entropy: f64, wall_time: f64) -> Self {
        let last = log.last();
        let pick = |f: fn(&NbvRecord) -> f64, init: f64| last.map_or(init, f);
        let travel = pick(|s| s.travel_time, 0.0);
        let planner = pick(|s| s.planner_time, 0.0);
        EpisodeSummary {
            seed: log.seed,
            strategy: log.strategy,
            object: log.object,
            outcome: log.outcome,
            steps: log.steps.len(),
            initial_coverage: log.initial_coverage,
            initial_entropy: log.initial_entropy,
            max_entropy,
            coverage: pick(|s| s.coverage, log.initial_coverage),
            entropy: pick(|s| s.entropy, log.initial_entropy),
            travel_time: travel,
            planner_time: planner,
            selection_time: pick(|s| s.selection_time, 0.0),
            total_time: travel + planner,
            wall_time,
            min_distance: log.min_distance(),
            penetrations: log.penetrations(),
            far_steps: log.steps.iter().map(|s| s.far_steps).sum(),
            far_visible_steps: log.steps.iter().map(|s| s.far_visible_steps).sum(),
            obstacle_circles: log.obstacle_circles,
            placement_shortfall: log.placement_shortfall,
            blocked_candidates: log.blocked_candidates,
            reference_points: log.reference_points,
        }
    }
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
}

/// Write through a temporary sibling and rename, so a reader never sees a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Write the episode CSV, timing CSV and JSON summary; the summary goes last
/// and marks the episode complete.
pub fn write_episode(dir: &Path, log: &EpisodeLog, max_entropy: f64, wall_time: f64) -> std::io::Result<EpisodeSummary> {
    fs::create_dir_all(dir)?;
    let (st, seed) = (log.strategy, log.seed);
    let rows = log.steps.iter().map(|s| EpisodeRow::new(log, s, max_entropy));
    write_atomic(&dir.join(episode_csv_name(st, seed)), &csv_bytes(rows)?)?;
    let timing = log.steps.iter().map(|s| TimingRow {
        seed,
        strategy: st,
        step: s.step,
        planner_time: s.planner_time,
        selection_time: s.selection_time,
        total_time: s.travel_time + s.planner_time,
    });
    write_atomic(&dir.join(timing_csv_name(st, seed)), &csv_bytes(timing)?)?;
    let summary = EpisodeSummary::new(log, max_entropy, wall_time);
    let json = serde_json::to_vec_pretty(&summary).map_err(std::io::Error::other)?;
    write_atomic(&dir.join(summary_json_name(st, seed)), &json)?;
    Ok(summary)
}

pub fn read_summary(path: &Path) -> Option<EpisodeSummary> {
    serde_json::from_slice(&fs::read(path).ok()?).ok()
}

#[derive(Serialize)]
struct ControlRow {
    t: f64,
    nbv_step: usize,
    position_error: f64,
    angle_error_deg: f64,
    distance: Option<f64>,
    min_visibility: Option<f64>,
    lambda_kappa: Option<f64>,
    feasible: bool,
    x: f64,
    y: f64,
    theta: f64,
    cam_x: f64,
    cam_y: f64,
    cam_z: f64,
}

#[derive(Serialize)]
struct FocusRow {
    nbv_step: usize,
    t: f64,
    anchor_x: f64,
    anchor_y: f64,
    anchor_z: f64,
    point_x: f64,
    point_y: f64,
    point_z: f64,
    ray_index: usize,
    gain: f64,
}

#[derive(Serialize)]
struct CandidateRow {
    nbv_step: usize,
    id: usize,
    x: f64,
    y: f64,
    z: f64,
    dx: f64,
    dy: f64,
    dz: f64,
    label: Orientation,
    score: f64,
    chosen: bool,
}

#[derive(Serialize)]
struct TreeRow {
    nbv_step: usize,
    /// `node` rows describe the tree, `path` rows the extracted waypoints.
    kind: &'static str,
    index: usize,
    x: f64,
    y: f64,
    parent: Option<usize>,
    cost: f64,
}

#[derive(Serialize)]
struct ObstacleRow {
    kind: &'static str,
    x: f64,
    y: f64,
    radius: f64,
}

#[derive(Serialize)]
struct MapRow {
    x: f64,
    y: f64,
    z: f64,
    probability: f64,
}

/// Observer that buffers every per-step trace stream in memory.
#[derive(Default)]
pub struct TraceObserver {
    control: Vec<ControlRow>,
    focus: Vec<FocusRow>,
    candidates: Vec<CandidateRow>,
    tree: Vec<TreeRow>,
    map: Vec<MapRow>,
}

impl EpisodeObserver for TraceObserver {
    fn on_control(&mut self, r: &ControlRecord) {
        self.control.push(ControlRow {
            t: r.time,
            nbv_step: r.nbv_step,
            position_error: r.position_error,
            angle_error_deg: r.angle_error.to_degrees(),
            distance: r.distance,
            min_visibility: r.visibility.map(|v| v.min()),
            lambda_kappa: r.lambda_kappa,
            feasible: r.feasible,
            x: r.q.base[0],
            y: r.q.base[1],
            theta: r.q.base[2],
            cam_x: r.camera.p.x,
            cam_y: r.camera.p.y,
            cam_z: r.camera.p.z,
        });
    }

    fn on_focus(&mut self, nbv_step: usize, t: f64, s: &FocusState) {
        self.focus.push(FocusRow {
            nbv_step,
            t,
            anchor_x: s.anchor.x,
            anchor_y: s.anchor.y,
            anchor_z: s.anchor.z,
            point_x: s.point.x,
            point_y: s.point.y,
            point_z: s.point.z,
            ray_index: s.ray_index,
            gain: s.best_ray_gain,
        });
    }

    fn on_candidates(&mut self, nbv_step: usize, candidates: &[CandidateView], chosen: Option<usize>) {
        for (i, c) in candidates.iter().enumerate() {
            self.candidates.push(CandidateRow {
                nbv_step,
                id: c.id,
                x: c.position.x,
                y: c.position.y,
                z: c.position.z,
                dx: c.direction.x,
                dy: c.direction.y,
                dz: c.direction.z,
                label: c.orientation,
                score: c.score,
                chosen: chosen == Some(i),
            });
        }
    }

    fn on_tree(&mut self, nbv_step: usize, t: &RrtTree) {
        for (i, n) in t.nodes.iter().enumerate() {
            self.tree.push(TreeRow { nbv_step, kind: "node", index: i, x: n.x, y: n.y, parent: t.parent[i], cost: t.cost[i] });
        }
        let mut cost = 0.0;
        for (i, p) in t.path.iter().enumerate() {
            if i > 0 {
                cost += (p - t.path[i - 1]).norm();
            }
            let parent = i.checked_sub(1);
            self.tree.push(TreeRow { nbv_step, kind: "path", index: i, x: p.x, y: p.y, parent, cost });
        }
    }

    fn on_nbv(&mut self, _record: &NbvRecord, map: &OccupancyMap) {
        // keep only the latest snapshot: the final map once the episode ends
        self.map.clear();
        let g = map.grid();
        for (v, _) in map.nonzero_cells() {
            let c = g.center_of(v);
            self.map.push(MapRow { x: c.x, y: c.y, z: c.z, probability: map.probability(v) });
        }
    }
}

impl TraceObserver {
    /// Write the buffered streams plus the obstacle layout.
    pub fn write(
        self,
        dir: &Path,
        strategy: Strategy,
        seed: u64,
        obstacles: &[Circle],
        forbidden: &Circle,
    ) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let put = |kind: &str, bytes: Vec<u8>| write_atomic(&dir.join(trace_name(kind, strategy, seed)), &bytes);
        put("control", csv_bytes(self.control)?)?;
        put("focus", csv_bytes(self.focus)?)?;
        put("candidates", csv_bytes(self.candidates)?)?;
        put("tree", csv_bytes(self.tree)?)?;
        put("map", csv_bytes(self.map)?)?;
        let rows = obstacles
            .iter()
            .map(|c| ObstacleRow { kind: "obstacle", x: c.center[0], y: c.center[1], radius: c.radius })
            .chain(std::iter::once(ObstacleRow {
                kind: "forbidden",
                x: forbidden.center[0],
                y: forbidden.center[1],
                radius: forbidden.radius,
            }));
        put("obstacles", csv_bytes(rows)?)
    }
}
