//! `observe`: one seeded ESO run against the co-integrated truth, logging
//! the error norm and the eigenvalue extremes of `P1` at every grid point.

use std::fs;

use dichotomy_core::observer::assumption_probe;
use dichotomy_core::ode::integrate;
use nalgebra::DVector;

use crate::config::ExperimentConfig;
use crate::csvio;
use crate::CliError;

use super::{observer_run, step_spec};

pub fn cmd_observe(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let model = cfg.build_model()?;
    let spec = step_spec(cfg)?;
    let outcome = observer_run(model.as_ref(), cfg, &spec, cfg.seed);

    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("run.csv");
    let mut buf = Vec::new();
    csvio::write_run(&mut buf, &outcome.rows)?;
    fs::write(&path, buf)?;
    println!("wrote {} ({} samples)", path.display(), outcome.rows.len());

    if let Some(last) = outcome.rows.last() {
        println!(
            "final: t={} error_norm={:.6e} min_eig_p1={:.6e} max_eig_p1={:.6e}",
            last.t, last.error_norm, last.min_eig_p1, last.max_eig_p1
        );
        println!("min error over run: {:.6e}", outcome.min_error);
    }

    // Assumption probe on a subsampled truth trajectory.
    let u = DVector::zeros(model.input_dim());
    let truth = integrate(
        &|t, x: &DVector<f64>| model.rhs(t, x, &u),
        &spec,
        &model.default_initial_state(),
    )?;
    let stride = (truth.len() / 200).max(1);
    let times: Vec<f64> = truth.times.iter().copied().step_by(stride).collect();
    let states: Vec<DVector<f64>> = truth.states.iter().cloned().step_by(stride).collect();
    let eig_track: Vec<(f64, f64)> = outcome
        .rows
        .iter()
        .map(|r| (r.min_eig_p1, r.max_eig_p1))
        .collect();
    let report = assumption_probe(model.as_ref(), &times, &states, &eig_track);
    println!(
        "assumption probe: sup||A|| = {:.4}, eig(P1) in [{:.4e}, {:.4e}], kappa = {}",
        report.sup_jacobian_norm,
        report.min_eig_p1,
        report.max_eig_p1,
        report
            .kappa
            .map(|k| format!("{k:.4}"))
            .unwrap_or_else(|| "unknown".into()),
    );

    if let Some(abort) = outcome.abort {
        return Err(CliError::Numeric(abort.to_string()));
    }
    Ok(())
}
