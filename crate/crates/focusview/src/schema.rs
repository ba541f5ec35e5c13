//! TOML file formats: robot description, scenario, sweep manifest and ROPE
//! configuration. Relative paths inside a file resolve against the file's
//! own directory.

use std::fs;
use std::path::{Path, PathBuf};

use focusview_core::bayes::ChainConfig;
use focusview_core::focus::FocusParams;
use focusview_core::kinematics::{JointSpec, RobotModel, ARM_DOF, DOF};
use focusview_core::nbv::{RsvParams, SearchCylinder};
use focusview_core::sampling::RrtParams;
use focusview_core::scenario::{EpisodeParams, ObjectSpec, ScenarioConfig, Strategy, WorldParams};
use focusview_core::controller::ControlParams;
use focusview_core::voxel::{MapParams, Primitive, SensorParams};
use nalgebra::{Isometry3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{path}:{line}: {message}")]
    VoxelLine { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, SchemaError> {
    fs::read_to_string(path).map_err(|source| SchemaError::Io { path: path.to_path_buf(), source })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SchemaError> {
    toml::from_str(&read(path)?).map_err(|source| SchemaError::Toml { path: path.to_path_buf(), source })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

fn dir_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub xyz: [f64; 3],
    /// Roll, pitch, yaw, rad.
    #[serde(default)]
    pub rpy: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
    pub axis: [f64; 3],
}

/// Robot description: five revolute joints from the base frame to the last
/// link, then the camera frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub base_footprint_radius: f64,
    pub qdot_lim: [f64; DOF],
    pub q_lower: [f64; ARM_DOF],
    pub q_upper: [f64; ARM_DOF],
    pub ready: [f64; ARM_DOF],
    pub joints: Vec<JointFile>,
    pub camera: FrameSpec,
}

impl RobotFile {
    pub fn into_model(self) -> Result<RobotModel, SchemaError> {
        if self.joints.len() != ARM_DOF {
            return Err(SchemaError::Invalid(format!("robot needs {ARM_DOF} joints, found {}", self.joints.len())));
        }
        if self.joints.iter().any(|j| j.axis.iter().all(|&a| a == 0.0)) {
            return Err(SchemaError::Invalid("joint axis must be nonzero".into()));
        }
        let arm: [JointSpec; ARM_DOF] = core::array::from_fn(|i| {
            let j = &self.joints[i];
            JointSpec::new(j.xyz, j.rpy, j.axis)
        });
        let c = &self.camera;
        let model = RobotModel {
            base_footprint_radius: self.base_footprint_radius,
            arm,
            camera_offset: Isometry3::from_parts(
                Translation3::new(c.xyz[0], c.xyz[1], c.xyz[2]),
                UnitQuaternion::from_euler_angles(c.rpy[0], c.rpy[1], c.rpy[2]),
            ),
            qdot_lim: self.qdot_lim,
            q_lower: self.q_lower,
            q_upper: self.q_upper,
            ready: self.ready,
        };
        model.validate().map_err(|e| SchemaError::Invalid(format!("robot: {e}")))?;
        Ok(model)
    }
}

pub fn load_robot(path: &Path) -> Result<RobotModel, SchemaError> {
    parse::<RobotFile>(path)?.into_model()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectFile {
    Suite { index: usize },
    SuiteBySeed,
    Primitives { primitives: Vec<Primitive> },
    /// Text file of occupied cell centres, one `x y z` (or `x,y,z`) per line.
    VoxelFile { path: PathBuf },
}

/// Parse a voxel-centre list; `#` starts a comment.
pub fn read_voxel_file(path: &Path) -> Result<Vec<[f64; 3]>, SchemaError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| SchemaError::VoxelLine { path: path.to_path_buf(), line: i + 1, message };
        let vals: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("expected three finite numbers, got {}", vals.len())));
        }
        out.push([vals[0], vals[1], vals[2]]);
    }
    Ok(out)
}

/// Scenario file. Every table is optional and falls back to the built-in
/// defaults field by field.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
    pub n_nbv: Option<usize>,
    /// Robot description file; the built-in model when absent.
    pub robot: Option<PathBuf>,
    pub object: Option<ObjectFile>,
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

impl ScenarioFile {
    /// Build the configuration, resolving file references against `base`.
    pub fn into_config(self, base: &Path) -> Result<ScenarioConfig, SchemaError> {
        let object = match self.object.unwrap_or(ObjectFile::SuiteBySeed) {
            ObjectFile::Suite { index } => ObjectSpec::Suite { index },
            ObjectFile::SuiteBySeed => ObjectSpec::SuiteBySeed,
            ObjectFile::Primitives { primitives } => ObjectSpec::Primitives { primitives },
            ObjectFile::VoxelFile { path } => ObjectSpec::Voxels { centers: read_voxel_file(&resolve(base, &path))? },
        };
        let mut c = ScenarioConfig::new(self.seed.unwrap_or(0), self.strategy.unwrap_or(Strategy::Focus), object);
        if let Some(n) = self.n_nbv {
            c.n_nbv = n;
        }
        if let Some(r) = self.robot {
            c.robot = load_robot(&resolve(base, &r))?;
        }
        c.world = self.world;
        c.episode = self.episode;
        c.map = self.map;
        c.sensor = self.sensor;
        c.search = self.search;
        c.rsv = self.rsv;
        c.focus = self.focus;
        c.control = self.control;
        c.rrt = self.rrt;
        c.validate().map_err(|e| SchemaError::Invalid(format!("scenario: {e}")))?;
        Ok(c)
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, SchemaError> {
    parse::<ScenarioFile>(path)?.into_config(&dir_of(path))
}

/// Sweep description: the Cartesian product of seeds and strategies.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub scenario: PathBuf,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Half-open range `[first, end)`, appended after `seeds`.
    pub seed_range: Option<[u64; 2]>,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<Strategy>,
    pub out: PathBuf,
    /// Concurrent episodes; 0 or absent = environment / machine default.
    #[serde(default)]
    pub parallelism: usize,
    /// Also write per-step traces.
    #[serde(default)]
    pub trace: bool,
}

fn all_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub scenario: PathBuf,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub out: PathBuf,
    pub parallelism: usize,
    pub trace: bool,
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, SchemaError> {
    let m: ManifestFile = parse(path)?;
    let base = dir_of(path);
    let mut seeds = m.seeds;
    if let Some([a, b]) = m.seed_range {
        seeds.extend(a..b);
    }
    let mut seen = std::collections::BTreeSet::new();
    seeds.retain(|s| seen.insert(*s));
    let mut strategies = m.strategies;
    strategies.dedup();
    if seeds.is_empty() {
        return Err(SchemaError::Invalid("manifest: no seeds".into()));
    }
    if strategies.is_empty() {
        return Err(SchemaError::Invalid("manifest: no strategies".into()));
    }
    Ok(RunManifest {
        scenario: resolve(&base, &m.scenario),
        seeds,
        strategies,
        out: resolve(&base, &m.out),
        parallelism: m.parallelism,
        trace: m.trace,
    })
}

/// Regions of practical equivalence for the difference of group means.
/// Absent entropy and time regions follow the fractional rules.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RopeFile {
    pub coverage: (f64, f64),
    pub entropy: Option<(f64, f64)>,
    pub time: Option<(f64, f64)>,
    /// Fraction of the maximum bounding-box entropy.
    pub entropy_fraction: f64,
    /// Fraction of the direct-motion mean time.
    pub time_fraction: f64,
    pub mass: f64,
    pub seed: u64,
    pub chains: ChainConfig,
}

impl Default for RopeFile {
    fn default() -> Self {
        RopeFile {
            coverage: (-0.01, 0.01),
            entropy: None,
            time: None,
            entropy_fraction: 0.01,
            time_fraction: 0.05,
            mass: 0.95,
            seed: 0,
            chains: ChainConfig::default(),
        }
    }
}

pub fn load_rope(path: &Path) -> Result<RopeFile, SchemaError> {
    let r: RopeFile = parse(path)?;
    let ok = |i: (f64, f64)| i.0 <= i.1 && i.0.is_finite() && i.1.is_finite();
    if !ok(r.coverage) || r.entropy.is_some_and(|i| !ok(i)) || r.time.is_some_and(|i| !ok(i)) {
        return Err(SchemaError::Invalid("rope: intervals must be finite with lo <= hi".into()));
    }
    if !(r.mass > 0.0 && r.mass < 1.0) {
        return Err(SchemaError::Invalid("rope: mass must lie in (0, 1)".into()));
    }
    Ok(r)
}
