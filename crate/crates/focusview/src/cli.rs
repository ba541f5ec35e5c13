//! Command-line front end: `run`, `sweep` and `analyze`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use focusview_core::scenario::{Outcome, Strategy};

use crate::analyze::analyze;
use crate::runner::{run_sweep, run_to_dir};
use crate::schema::{load_manifest, load_rope, load_scenario, RopeFile};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "focusview", version, about = "Next-best-view reconstruction episodes, sweeps and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|_| format!("unknown strategy {s:?}; expected focus, no_path or sampling"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one episode and write its logs.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's strategy.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-step trace CSVs.
        #[arg(long)]
        trace: bool,
    },
    /// Run every seed × strategy pair of a manifest, skipping pairs already
    /// completed in the output directory.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Concurrent episodes; defaults to the manifest, then $FOCUSVIEW_JOBS,
        /// then the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare strategies on the final-step metrics of a log directory.
    Analyze {
        #[arg(long)]
        logs: PathBuf,
        /// Region-of-practical-equivalence file; built-in defaults when absent.
        #[arg(long)]
        rope: Option<PathBuf>,
        /// Report directory; defaults to `<logs>/analysis`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn main_with<I, T>(args: I) -> Result<(), Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => return Err(Error::Config(e.render().to_string())),
        Err(e) => {
            // help and version
            let _ = e.print();
            return Ok(());
        }
    };
    execute(cli.command)
}

pub fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { scenario, seed, strategy, out, trace } => {
            let mut cfg = load_scenario(&scenario)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            let r = run_to_dir(&cfg, &out, trace)?;
            let s = &r.summary;
            println!(
                "{} seed {}: {:?}, {} views, coverage {:.4}, entropy {:.1}, time {:.2} s",
                s.strategy, s.seed, s.outcome, s.steps, s.coverage, s.entropy, s.total_time
            );
            if s.outcome == Outcome::Aborted {
                return Err(Error::Aborted(format!("controller infeasible for too long after {} views", s.steps)));
            }
            Ok(())
        }
        Command::Sweep { manifest, jobs } => {
            let m = load_manifest(&manifest)?;
            let requested = jobs.filter(|&j| j > 0).unwrap_or(m.parallelism);
            let r = run_sweep(&m, requested)?;
            println!(
                "sweep {}: {} run, {} skipped, {} aborted, {} failed",
                m.out.display(),
                r.ran,
                r.skipped,
                r.aborted.len(),
                r.failures.len()
            );
            for f in &r.failures {
                eprintln!("  {} seed {}: {}", f.strategy, f.seed, f.message);
            }
            if let Some(f) = r.failures.first() {
                return Err(Error::Config(format!("{} episode(s) failed, first: {}", r.failures.len(), f.message)));
            }
            if !r.aborted.is_empty() {
                return Err(Error::Aborted(format!("{} episode(s) aborted", r.aborted.len())));
            }
            Ok(())
        }
        Command::Analyze { logs, rope, out } => {
            let rope = match rope {
                Some(p) => load_rope(&p)?,
                None => RopeFile::default(),
            };
            let out = out.unwrap_or_else(|| logs.join("analysis"));
            let report = analyze(&logs, &rope, &out)?;
            for c in &report.comparisons {
                println!(
                    "{:>8} {} - {}: median {:+.4}, HDI [{:+.4}, {:+.4}], {:?}",
                    c.metric, c.a, c.b, c.median, c.hdi.0, c.hdi.1, c.verdict
                );
            }
            Ok(())
        }
    }
}
