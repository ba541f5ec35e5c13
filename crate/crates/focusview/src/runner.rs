//! Single episodes and seed × strategy sweeps.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use focusview_core::scenario::{generate_world, run_episode_in, Clock, EpisodeLog, NoObserver, Outcome, ScenarioConfig, Strategy};
use focusview_core::voxel::OccupancyMap;
use serde::Serialize;

use crate::analyze::{load_logs, FinalRecord};
use crate::output::{read_summary, summary_json_name, write_atomic, write_episode, EpisodeSummary, TraceObserver};
use crate::schema::{load_scenario, RunManifest};
use crate::Error;

/// Environment variable holding the default number of concurrent episodes.
pub const JOBS_ENV: &str = "FOCUSVIEW_JOBS";

/// Wall-clock seconds since construction.
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn seconds(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub struct EpisodeResult {
    pub log: EpisodeLog,
    pub summary: EpisodeSummary,
}

/// Run one episode and write its files under `out`.
pub fn run_to_dir(config: &ScenarioConfig, out: &Path, trace: bool) -> Result<EpisodeResult, Error> {
    let world = generate_world(config).map_err(|e| Error::Config(e.to_string()))?;
    let max_entropy = OccupancyMap::new(world.scene.grid, config.map).grid_entropy();
    let mut clock = WallClock::new();
    let log = if trace {
        let mut obs = TraceObserver::default();
        let log = run_episode_in(config, &world, &mut clock, &mut obs);
        obs.write(out, config.strategy, config.seed, &world.scene.obstacles, &world.scene.forbidden_cylinder)
            .map_err(|e| Error::io(out, e))?;
        log
    } else {
        run_episode_in(config, &world, &mut clock, &mut NoObserver)
    };
    let wall = clock.seconds();
    let summary = write_episode(out, &log, max_entropy, wall).map_err(|e| Error::io(out, e))?;
    Ok(EpisodeResult { log, summary })
}

/// Concurrency for a sweep: explicit request, then the environment, then
/// the machine.
pub fn resolve_jobs(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    if let Some(n) = std::env::var(JOBS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        return n;
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JobFailure {
    pub seed: u64,
    pub strategy: Strategy,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub ran: usize,
    /// Pairs whose summary already existed.
    pub skipped: usize,
    pub aborted: Vec<(u64, Strategy)>,
    pub failures: Vec<JobFailure>,
}

/// Mean and sample standard deviation of one metric for one strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub metric: &'static str,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub const SUMMARY_METRICS: [&str; 5] = ["coverage", "entropy", "travel_time", "planner_time", "time"];

pub fn metric_value(r: &FinalRecord, metric: &str) -> f64 {
    match metric {
        "coverage" => r.coverage,
        "entropy" => r.entropy,
        "travel_time" => r.travel_time,
        "planner_time" => r.planner_time,
        "time" => r.time(),
        _ => f64::NAN,
    }
}

/// Per-strategy mean and sd of the final-step metrics.
pub fn summarize(records: &[FinalRecord]) -> Vec<SummaryRow> {
    let mut by: BTreeMap<Strategy, Vec<&FinalRecord>> = BTreeMap::new();
    for r in records {
        by.entry(r.strategy).or_default().push(r);
    }
    let mut out = Vec::new();
    for (strategy, rs) in by {
        for metric in SUMMARY_METRICS {
            let x: Vec<f64> = rs.iter().map(|r| metric_value(r, metric)).collect();
            let (mean, sd) = focusview_core::bayes::mean_sd(&x);
            out.push(SummaryRow { strategy, metric, n: x.len(), mean, sd });
        }
    }
    out
}

pub const SWEEP_SUMMARY_CSV: &str = "sweep_summary.csv";
pub const SWEEP_REPORT_JSON: &str = "sweep_report.json";

/// Run every (seed, strategy) pair of the manifest not already completed in
/// its output directory, then aggregate all logs found there. A failing
/// episode is recorded and the sweep goes on.
pub fn run_sweep(manifest: &RunManifest, jobs: usize) -> Result<SweepReport, Error> {
    let base = load_scenario(&manifest.scenario).map_err(|e| Error::Config(e.to_string()))?;
    run_sweep_with(&base, manifest, jobs)
}

pub fn run_sweep_with(base: &ScenarioConfig, manifest: &RunManifest, jobs: usize) -> Result<SweepReport, Error> {
    let out = &manifest.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut pending = Vec::new();
    let mut report = SweepReport::default();
    for &seed in &manifest.seeds {
        for &strategy in &manifest.strategies {
            match read_summary(&out.join(summary_json_name(strategy, seed))) {
                Some(s) => {
                    report.skipped += 1;
                    if s.outcome == Outcome::Aborted {
                        report.aborted.push((seed, strategy));
                    }
                }
                None => pending.push((seed, strategy)),
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    let workers = resolve_jobs(jobs).clamp(1, pending.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(seed, strategy)) = pending.get(i) else { break };
                let cfg = ScenarioConfig { seed, strategy, ..base.clone() };
                let r = run_to_dir(&cfg, out, manifest.trace);
                results.lock().unwrap().push((i, seed, strategy, r.map(|r| r.summary.outcome)));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|r| r.0);
    for (_, seed, strategy, r) in results {
        match r {
            Ok(outcome) => {
                report.ran += 1;
                if outcome == Outcome::Aborted {
                    report.aborted.push((seed, strategy));
                }
            }
            Err(e) => report.failures.push(JobFailure { seed, strategy, kind: e.kind(), message: e.to_string() }),
        }
    }
    report.aborted.sort();
    let wanted = |r: &&FinalRecord| manifest.seeds.contains(&r.seed) && manifest.strategies.contains(&r.strategy);
    let records: Vec<FinalRecord> = match load_logs(out) {
        Ok(all) => all.iter().filter(wanted).cloned().collect(),
        Err(_) => Vec::new(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in summarize(&records) {
        w.serialize(row).map_err(|e| Error::io(out, std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    write_atomic(&out.join(SWEEP_SUMMARY_CSV), &bytes).map_err(|e| Error::io(out, e))?;
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::io(out, std::io::Error::other(e)))?;
    write_atomic(&out.join(SWEEP_REPORT_JSON), &json).map_err(|e| Error::io(out, e))?;
    Ok(report)
}
