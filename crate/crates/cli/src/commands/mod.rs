//! The `spectrum`, `observe`, `ensemble`, and `verify` commands.

mod ensemble;
mod observe;
mod spectrum;
mod verify;

pub use ensemble::cmd_ensemble;
pub use observe::cmd_observe;
pub use spectrum::cmd_spectrum;
pub use verify::{cmd_verify, run_all_checks};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dichotomy_core::models::DynamicalModel;
use dichotomy_core::observer::{
    run_eso, symmetric_eig_extremes, ObserverState, ReducedRiccati, RunMonitor,
};
use dichotomy_core::ode::StepSpec;
use dichotomy_core::rng::SplitMix64;
use dichotomy_core::spectral::SubspaceFrame;
use dichotomy_core::Error;

use crate::config::ExperimentConfig;
use crate::csvio::RunRow;
use crate::CliError;

pub(crate) fn step_spec(cfg: &ExperimentConfig) -> Result<StepSpec, CliError> {
    StepSpec::new(cfg.h, cfg.t0, cfg.tf).map_err(|e| CliError::Config(e.to_string()))
}

/// Outcome of one observer run: the per-step log plus how the run ended.
pub struct RunOutcome {
    pub rows: Vec<RunRow>,
    /// `None` for a clean run, otherwise the abort error (divergence or
    /// definiteness loss, with its timestamp).
    pub abort: Option<Error>,
    pub min_error: f64,
}

/// One seeded ESO run: the frame and the initial-estimate perturbation are
/// drawn from a SplitMix64 stream seeded with `seed` (frame first, then the
/// componentwise uniform perturbation from (-delta, delta)).
pub fn observer_run(
    model: &dyn DynamicalModel,
    cfg: &ExperimentConfig,
    spec: &StepSpec,
    seed: u64,
) -> RunOutcome {
    let n = model.dim();
    let mut rng = SplitMix64::new(seed);
    let frame = SubspaceFrame::random(n, cfg.k, &mut rng);
    let truth0 = model.default_initial_state();
    let mut x_hat0 = truth0.clone();
    for i in 0..n {
        x_hat0[i] += rng.uniform_symmetric(cfg.delta);
    }
    let riccati = ReducedRiccati::scaled_identity(cfg.k, cfg.p1_scale, cfg.g1_scale);
    let observer = match ObserverState::new(x_hat0, frame, riccati, &model.output_matrix(cfg.t0)) {
        Ok(o) => o,
        Err(e) => {
            return RunOutcome {
                rows: Vec::new(),
                abort: Some(e),
                min_error: f64::INFINITY,
            }
        }
    };
    let mut rows = Vec::with_capacity(spec.num_steps() + 1);
    let mut min_error = f64::INFINITY;
    let monitor = RunMonitor {
        definiteness_check_every: cfg.definiteness_every,
        ..RunMonitor::default()
    };
    let result = run_eso(
        model,
        &truth0,
        observer,
        spec,
        &monitor,
        |t, x, obs| {
            let error_norm = (x - &obs.x_hat).norm();
            min_error = min_error.min(error_norm);
            let (min_eig_p1, max_eig_p1) = symmetric_eig_extremes(&obs.riccati.p1);
            rows.push(RunRow {
                t,
                error_norm,
                min_eig_p1,
                max_eig_p1,
            });
        },
    );
    RunOutcome {
        rows,
        abort: result.err(),
        min_error,
    }
}

/// Runs `jobs` indexed tasks on up to `workers` threads (0 = available
/// parallelism), collecting results in index order.
pub(crate) fn run_indexed<T, F>(jobs: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = if workers == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        workers
    }
    .min(jobs.max(1));
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = f(i);
                results.lock().expect("worker poisoned")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("worker poisoned")
        .into_iter()
        .map(|o| o.expect("all jobs completed"))
        .collect()
}
