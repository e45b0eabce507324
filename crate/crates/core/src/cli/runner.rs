// SPDX-License-Identifier: Apache-2.0

use std::io::{BufWriter, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{write_json, BatchArgs, RunArgs, EXIT_OK};
use crate::diagnostics::consensus_diameter;
use crate::dynamics::{RunSettings, Simulation, StopReason};
use crate::error::{Error, Result};
use crate::io::{io_err, trace_line, ConfigDocument, LoadedConfig};
use crate::model::{ModelConfig, TraceRecord};
use crate::stochastic::StubbornnessSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    /// Transitions applied, so the trace holds `steps_executed + 1` records.
    pub steps_executed: u64,
    pub stop_reason: &'static str,
    pub final_energy: f64,
    pub final_diameter: f64,
    pub delta: f64,
    /// First step at which every profile component is delta-trivial;
    /// `null` when not reached.
    pub tau_delta: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// Which uniform bound on non-stubborn `alpha` the configuration guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    /// `gamma_max` is set below 1.
    GammaMax { bound: f64 },
    /// The distribution itself stays below 1 away from stubbornness.
    SupportBound { bound: f64 },
    /// Every draw is absolutely stubborn.
    Vacuous,
    /// Non-stubborn values may approach 1; stopping is not guaranteed.
    None,
}

impl Hypothesis {
    pub fn of(spec: &StubbornnessSpec) -> Self {
        let sup = spec.sup_below_one();
        match (spec.gamma_max, sup) {
            (_, None) => Hypothesis::Vacuous,
            (Some(g), Some(s)) if g < 1.0 => Hypothesis::GammaMax { bound: g.min(s) },
            (_, Some(s)) if s < 1.0 => Hypothesis::SupportBound { bound: s },
            _ => Hypothesis::None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub summary: RunSummary,
    pub config: ConfigDocument,
}

/// Counts of `tau_delta` in `[low, high)`; bins double in width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistogramBin {
    pub low: u64,
    pub high: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub replicates: u64,
    pub delta: f64,
    pub reached: u64,
    pub fraction_reached: f64,
    pub tau_histogram: Vec<HistogramBin>,
    pub not_reached: u64,
    pub hypothesis: Hypothesis,
    /// Per-replicate summaries in replicate order.
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub batch: BatchSummary,
    pub config: ConfigDocument,
}

/// Runs `cfg`, handing every record to `sink`, and summarizes the run.
pub fn execute<F>(cfg: &ModelConfig, settings: RunSettings, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&TraceRecord) -> Result<()>,
{
    let mut sim = Simulation::new(cfg, settings)?;
    let mut tau = None;
    let mut stop = StopReason::Horizon;
    let mut last = None;
    while let Some(ev) = sim.advance()? {
        if tau.is_none() && ev.record.all_delta_trivial {
            tau = Some(ev.record.t);
        }
        sink(&ev.record)?;
        if let Some(s) = ev.stop {
            stop = s;
        }
        last = Some((ev.state, ev.record.energy));
    }
    let (state, final_energy) = last.expect("a run records at least its initial state");
    if let Some(bad) = state.values().iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: format!("opinion became non-finite at step {}", state.t()),
            residual: *bad,
        });
    }
    Ok(RunSummary {
        seed: cfg.seed,
        steps_executed: state.t(),
        stop_reason: stop.as_str(),
        final_energy,
        final_diameter: consensus_diameter(&state),
        delta: settings.delta,
        tau_delta: tau,
        wall_clock_seconds: None,
    })
}

pub(super) fn cmd_run(args: &RunArgs) -> Result<u8> {
    let loaded = args.cfg.load()?;
    let started = Instant::now();
    let file = std::fs::File::create(&args.out).map_err(|e| io_err(&args.out, e))?;
    let mut w = BufWriter::new(file);
    let mut summary = execute(&loaded.model, loaded.diagnostics.run_settings(), |rec| {
        writeln!(w, "{}", trace_line(rec)?).map_err(|e| io_err(&args.out, e))
    })?;
    w.flush().map_err(|e| io_err(&args.out, e))?;
    if args.timing {
        summary.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
    eprintln!(
        "mhk run: {} steps, stop = {}, completed in {:.3} s",
        summary.steps_executed,
        summary.stop_reason,
        started.elapsed().as_secs_f64()
    );
    let report = RunReport {
        summary,
        config: loaded.effective_document(),
    };
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| args.out.with_extension("summary.json"));
    write_json(Some(&summary_path), &report)?;
    Ok(EXIT_OK)
}

fn histogram(taus: impl Iterator<Item = u64>) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = Vec::new();
    for tau in taus {
        let (low, high) = if tau == 0 {
            (0, 1)
        } else {
            let low = 1u64 << (63 - tau.leading_zeros());
            (low, low.saturating_mul(2))
        };
        match bins.iter_mut().find(|b| b.low == low) {
            Some(b) => b.count += 1,
            None => bins.push(HistogramBin {
                low,
                high,
                count: 1,
            }),
        }
    }
    bins.sort_by_key(|b| b.low);
    bins
}

/// Replicate `r` runs with seed `seed + r`; results are in replicate order
/// whatever the thread count.
pub fn batch(
    loaded: &LoadedConfig,
    replicates: u64,
    threads: Option<usize>,
) -> Result<BatchSummary> {
    if replicates == 0 {
        return Err(Error::Config(vec!["replicates must be at least 1".into()]));
    }
    let settings = loaded.diagnostics.run_settings();
    let one = |r: u64| {
        let mut cfg = loaded.model.clone();
        cfg.seed = cfg.seed.wrapping_add(r);
        execute(&cfg, settings, |_| Ok(()))
    };
    let work = || {
        (0..replicates)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()
    };
    let runs = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(vec![format!("cannot start {t} worker threads: {e}")]))?
            .install(work)?,
        None => work()?,
    };
    let reached = runs.iter().filter(|r| r.tau_delta.is_some()).count() as u64;
    Ok(BatchSummary {
        replicates,
        delta: settings.delta,
        reached,
        fraction_reached: reached as f64 / replicates as f64,
        tau_histogram: histogram(runs.iter().filter_map(|r| r.tau_delta)),
        not_reached: replicates - reached,
        hypothesis: Hypothesis::of(&loaded.model.stubbornness),
        runs,
    })
}

pub(super) fn cmd_batch(args: &BatchArgs) -> Result<u8> {
    let loaded = args.cfg.load()?;
    let summary = batch(&loaded, args.replicates, args.threads)?;
    eprintln!(
        "mhk batch: {}/{} replicates reached tau_delta",
        summary.reached, summary.replicates
    );
    write_json(
        args.out.as_deref(),
        &BatchReport {
            batch: summary,
            config: loaded.effective_document(),
        },
    )?;
    Ok(EXIT_OK)
}
