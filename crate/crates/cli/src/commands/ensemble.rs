//! `ensemble`: N independent seeded observer runs, pointwise error
//! statistics, and per-run exponential decay fits.

use std::fs;

use crate::config::ExperimentConfig;
use crate::csvio;
use crate::stats::{fit_decay_rate, EnsembleSummary};
use crate::CliError;

use super::{observer_run, run_indexed, step_spec};

pub fn cmd_ensemble(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let model = cfg.build_model()?;
    let spec = step_spec(cfg)?;
    fs::create_dir_all(&cfg.out)?;

    let outcomes = run_indexed(cfg.runs, cfg.workers, |i| {
        observer_run(model.as_ref(), cfg, &spec, cfg.seed + i as u64)
    });

    let fit_start = cfg.fit_start.unwrap_or(cfg.t0 + 0.2 * (cfg.tf - cfg.t0));
    let fit_end = cfg.fit_end.unwrap_or(cfg.t0 + 0.8 * (cfg.tf - cfg.t0));

    let mut converged_all = true;
    let mut completed: Vec<&[f64]> = Vec::new();
    let mut error_series: Vec<Vec<f64>> = Vec::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        let path = cfg.out.join(format!("run_{i:02}.csv"));
        let mut buf = Vec::new();
        csvio::write_run(&mut buf, &outcome.rows)?;
        fs::write(&path, buf)?;
        error_series.push(outcome.rows.iter().map(|r| r.error_norm).collect());
    }
    for (i, outcome) in outcomes.iter().enumerate() {
        let converged = outcome.min_error < cfg.conv_threshold;
        converged_all &= converged && outcome.abort.is_none();
        let times: Vec<f64> = outcome.rows.iter().map(|r| r.t).collect();
        let rate = fit_decay_rate(&times, &error_series[i], fit_start, fit_end)
            .map(|r| format!("{r:+.4}"))
            .unwrap_or_else(|_| "n/a".into());
        let status = match &outcome.abort {
            Some(e) => format!("aborted ({e})"),
            None => "completed".into(),
        };
        println!(
            "run {i:02} seed {}: {status}, converged(<{:.0e})={converged}, min_error={:.3e}, fitted_rate={rate}",
            cfg.seed + i as u64,
            cfg.conv_threshold,
            outcome.min_error,
        );
        if outcome.abort.is_none() {
            completed.push(&error_series[i]);
        }
    }

    if completed.is_empty() {
        return Err(CliError::Numeric("every ensemble run aborted".into()));
    }
    let times: Vec<f64> = outcomes
        .iter()
        .find(|o| o.abort.is_none())
        .expect("at least one completed run")
        .rows
        .iter()
        .map(|r| r.t)
        .collect();
    let summary = EnsembleSummary::from_runs(&times, &completed)?;
    let mut buf = Vec::new();
    csvio::write_ensemble(&mut buf, &summary)?;
    let path = cfg.out.join("ensemble.csv");
    fs::write(&path, buf)?;
    println!(
        "wrote {} ({} completed / {} runs; all converged: {converged_all})",
        path.display(),
        completed.len(),
        cfg.runs
    );

    let median_rate = fit_decay_rate(&summary.times, &summary.median, fit_start, fit_end);
    match &median_rate {
        Ok(r) => println!("ensemble median fitted rate over [{fit_start}, {fit_end}]: {r:+.4}"),
        Err(e) => println!("ensemble median fit unavailable: {e}"),
    }

    if let Some(rate) = cfg.ref_rate {
        // Reference decay line anchored at the median error at fit_start.
        let anchor_idx = summary
            .times
            .iter()
            .position(|&t| t >= fit_start)
            .unwrap_or(0);
        let anchor = summary.median[anchor_idx].max(f64::MIN_POSITIVE);
        let t_anchor = summary.times[anchor_idx];
        let rows: Vec<(f64, f64)> = summary
            .times
            .iter()
            .map(|&t| (t, anchor * (rate * (t - t_anchor)).exp()))
            .collect();
        let mut buf = Vec::new();
        csvio::write_reference(&mut buf, &rows)?;
        let path = cfg.out.join("reference.csv");
        fs::write(&path, buf)?;
        println!("wrote {} (slope {rate})", path.display());
    }
    Ok(())
}
