//! Final-step metrics per episode, and the Bayesian comparison of every
//! strategy pair.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use focusview_core::bayes::{fit_t_model, hdi, median, mean_sd, rope_decision, FitError, RopeVerdict};
use focusview_core::scenario::Strategy;
use serde::Serialize;

use crate::output::{write_atomic, EpisodeRow, TimingRow};
use crate::schema::RopeFile;
use crate::Error;

/// Metrics of one episode at its last recorded view.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalRecord {
    pub seed: u64,
    pub strategy: Strategy,
    pub step: usize,
    pub coverage: f64,
    pub entropy: f64,
    pub max_entropy: f64,
    pub travel_time: f64,
    /// Zero when the timing file is missing.
    pub planner_time: f64,
    pub has_timing: bool,
}

impl FinalRecord {
    /// Headline time: simulated travel plus planner wall time.
    pub fn time(&self) -> f64 {
        self.travel_time + self.planner_time
    }
}

fn read_rows<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<Vec<T>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Analysis(format!("{}: {e}", path.display())))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| Error::Analysis(format!("{}: {e}", path.display())))
}

/// Read every `episode_*.csv` in `dir` (and its timing sibling), keeping
/// the last row of each. Episodes with no rows are skipped.
pub fn load_logs(dir: &Path) -> Result<Vec<FinalRecord>, Error> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Analysis(format!("{}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.starts_with("episode_") && n.ends_with(".csv"))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for name in names {
        let rows: Vec<EpisodeRow> = read_rows(&dir.join(&name))?;
        let Some(last) = rows.iter().max_by_key(|r| r.step) else { continue };
        let timing_path = dir.join(name.replacen("episode_", "timing_", 1));
        let timing = if timing_path.exists() {
            let t: Vec<TimingRow> = read_rows(&timing_path)?;
            t.into_iter().find(|t| t.step == last.step && t.seed == last.seed && t.strategy == last.strategy)
        } else {
            None
        };
        out.push(FinalRecord {
            seed: last.seed,
            strategy: last.strategy,
            step: last.step,
            coverage: last.coverage,
            entropy: last.entropy,
            max_entropy: last.max_entropy,
            travel_time: last.travel_time,
            planner_time: timing.as_ref().map_or(0.0, |t| t.planner_time),
            has_timing: timing.is_some(),
        });
    }
    Ok(out)
}

pub const METRICS: [&str; 3] = ["coverage", "entropy", "time"];

fn value(r: &FinalRecord, metric: &str) -> f64 {
    match metric {
        "coverage" => r.coverage,
        "entropy" => r.entropy,
        _ => r.time(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub a: Strategy,
    pub b: Strategy,
    pub metric: &'static str,
    /// Posterior of `mu_a - mu_b`.
    pub median: f64,
    pub mean: f64,
    pub hdi: (f64, f64),
    pub rope: (f64, f64),
    pub verdict: RopeVerdict,
    pub acceptance: [f64; 5],
    pub chain_means: Vec<f64>,
    pub degenerate: bool,
    pub histogram: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub mass: f64,
    pub ropes: BTreeMap<&'static str, (f64, f64)>,
    /// Strategy, then metric.
    pub groups: BTreeMap<Strategy, BTreeMap<&'static str, GroupStats>>,
    pub comparisons: Vec<Comparison>,
    /// Episodes without a timing file; their planner time counts as zero.
    pub missing_timing: usize,
}

pub const REPORT_JSON: &str = "report.json";
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Serialize)]
struct HistRow {
    bin_lo: f64,
    bin_hi: f64,
    center: f64,
    count: usize,
    density: f64,
}

fn histogram(draws: &[f64], bins: usize) -> Vec<HistRow> {
    let lo = draws.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &d in draws {
        let k = (((d - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = draws.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let bin_lo = lo + k as f64 * width;
            HistRow { bin_lo, bin_hi: bin_lo + width, center: bin_lo + 0.5 * width, count, density: count as f64 / (n * width) }
        })
        .collect()
}

/// Regions of practical equivalence resolved against the data: explicit
/// intervals win, otherwise the entropy region scales with the maximum box
/// entropy and the time region with the direct-motion mean time.
pub fn resolve_ropes(rope: &RopeFile, records: &[FinalRecord]) -> Result<BTreeMap<&'static str, (f64, f64)>, Error> {
    let mut out = BTreeMap::new();
    out.insert("coverage", rope.coverage);
    let entropy = match rope.entropy {
        Some(r) => r,
        None => {
            let max = records.iter().map(|r| r.max_entropy).fold(0.0, f64::max);
            (-rope.entropy_fraction * max, rope.entropy_fraction * max)
        }
    };
    out.insert("entropy", entropy);
    let time = match rope.time {
        Some(r) => r,
        None => {
            let direct: Vec<f64> = records.iter().filter(|r| r.strategy == Strategy::NoPath).map(FinalRecord::time).collect();
            if direct.is_empty() {
                return Err(Error::Analysis("time region needs no_path logs or an explicit `time` interval".into()));
            }
            let m = mean_sd(&direct).0.abs();
            (-rope.time_fraction * m, rope.time_fraction * m)
        }
    };
    out.insert("time", time);
    Ok(out)
}

/// Fit, interval and verdict for every metric of every strategy pair;
/// writes `report.json` and one histogram CSV per comparison into `out`.
pub fn analyze(logs: &Path, rope: &RopeFile, out: &Path) -> Result<AnalysisReport, Error> {
    let records = load_logs(logs)?;
    if records.is_empty() {
        return Err(Error::Analysis(format!("no episode logs in {}", logs.display())));
    }
    let ropes = resolve_ropes(rope, &records)?;
    let mut by: BTreeMap<Strategy, Vec<&FinalRecord>> = BTreeMap::new();
    for r in &records {
        by.entry(r.strategy).or_default().push(r);
    }
    if by.len() < 2 {
        return Err(Error::Analysis("need logs from at least two strategies".into()));
    }
    let mut groups = BTreeMap::new();
    for (s, rs) in &by {
        let mut m = BTreeMap::new();
        for metric in METRICS {
            let x: Vec<f64> = rs.iter().map(|r| value(r, metric)).collect();
            let (mean, sd) = mean_sd(&x);
            m.insert(metric, GroupStats { n: x.len(), mean, sd, median: median(&x) });
        }
        groups.insert(*s, m);
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let strategies: Vec<Strategy> = by.keys().copied().collect();
    let mut comparisons = Vec::new();
    let mut job = 0u64;
    for (i, &a) in strategies.iter().enumerate() {
        for &b in &strategies[i + 1..] {
            for metric in METRICS {
                let xa: Vec<f64> = by[&a].iter().map(|r| value(r, metric)).collect();
                let xb: Vec<f64> = by[&b].iter().map(|r| value(r, metric)).collect();
                let post = fit_t_model(&xa, &xb, rope.seed.wrapping_add(job), &rope.chains).map_err(|e| {
                    Error::Analysis(match e {
                        FitError::TooFewSamples => format!("{a} vs {b}: fewer than 5 episodes in a group"),
                        FitError::NonFinite => format!("{a} vs {b}: non-finite {metric}"),
                    })
                })?;
                job += 1;
                let diff = post.mean_difference();
                let interval = hdi(&diff, rope.mass);
                let r = ropes[metric];
                let name = format!("diff_{metric}_{a}_vs_{b}.csv");
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in histogram(&diff, HISTOGRAM_BINS) {
                    w.serialize(row).map_err(|e| Error::Analysis(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Analysis(e.to_string()))?;
                write_atomic(&out.join(&name), &bytes).map_err(|e| Error::io(out, e))?;
                comparisons.push(Comparison {
                    a,
                    b,
                    metric,
                    median: median(&diff),
                    mean: mean_sd(&diff).0,
                    hdi: interval,
                    rope: r,
                    verdict: rope_decision(interval, r),
                    acceptance: post.acceptance,
                    chain_means: post.chain_means,
                    degenerate: post.degenerate,
                    histogram: name,
                });
            }
        }
    }
    let report = AnalysisReport {
        mass: rope.mass,
        ropes,
        groups,
        comparisons,
        missing_timing: records.iter().filter(|r| !r.has_timing).count(),
    };
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Analysis(e.to_string()))?;
    write_atomic(&out.join(REPORT_JSON), &json).map_err(|e| Error::io(out, e))?;
    Ok(report)
}
