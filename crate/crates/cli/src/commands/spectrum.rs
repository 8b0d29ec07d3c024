//! `spectrum`: evolve the reduced QR flow along the configured model and
//! report Lyapunov exponents and Bohl intervals per window.

use std::fs;
use std::io::Write;

use dichotomy_core::rng::SplitMix64;
use dichotomy_core::spectral::{evolve_spectral, SpectralEstimate, SubspaceFrame};

use crate::config::ExperimentConfig;
use crate::csvio;
use crate::CliError;

use super::step_spec;

/// Runs the spectral experiment and writes `spectrum.csv` under `cfg.out`.
pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let (est, csv) = spectrum_estimate(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("spectrum.csv");
    fs::write(&path, csv)?;

    println!(
        "spectral intervals for `{}` (burn-in {}, threshold {}):",
        cfg.model, est.burn_in, est.threshold
    );
    print!("{:>5} {:>12}", "i", "lyapunov");
    for (window, _) in &est.bohl {
        print!(" {:>12} {:>12}", format!("lo_H{window}"), format!("hi_H{window}"));
    }
    println!();
    for i in 0..est.lyapunov.len() {
        print!("{:>5} {:>12.6}", i + 1, est.lyapunov[i]);
        for (_, pairs) in &est.bohl {
            print!(" {:>12.6} {:>12.6}", pairs[i].0, pairs[i].1);
        }
        println!();
    }
    println!("j* = {} (longest window)", est.j_star);
    println!("wrote {}", path.display());
    Ok(())
}

/// Shared pipeline: evolve, estimate, and render the CSV bytes (used by the
/// deterministic-replay verification check).
pub(crate) fn spectrum_estimate(
    cfg: &ExperimentConfig,
) -> Result<(SpectralEstimate, Vec<u8>), CliError> {
    let model = cfg.build_model()?;
    let spec = step_spec(cfg)?;
    let mut rng = SplitMix64::new(cfg.seed);
    let frame = SubspaceFrame::random(model.dim(), cfg.k, &mut rng);
    let x0 = model.default_initial_state();
    let (rec, _) = evolve_spectral(model.as_ref(), &x0, &frame, &spec)?;
    let est = SpectralEstimate::from_record(&rec, &cfg.windows, cfg.burn_in, cfg.margin)
        .map_err(CliError::from)?;
    let mut csv = Vec::new();
    csvio::write_spectrum(&mut csv, &est)?;
    csv.flush()?;
    Ok((est, csv))
}
