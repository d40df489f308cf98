//! Samples the invariant measure from one long run and reports the
//! infinitesimal invariance residual of each bounded test function.

use powerlaw_lab::fluid::FluidParams;
use powerlaw_lab::kolmogorov::{estimate_invariant_measure, invariance_residuals, standard_suite};
use powerlaw_lab::sde::{NoiseSpec, SimConfig};
use powerlaw_lab::spectral::{GridSpec, SpectralState};

fn main() -> powerlaw_lab::Result<()> {
    let n = 5;
    let params = FluidParams::new(1.7, 1.0)?;
    let noise = NoiseSpec::new(n, 1.0, 2.5)?;
    let grid = GridSpec::for_cutoff(n)?;
    let config = SimConfig::new(params, noise.clone(), grid.clone(), 0.01, 300.0, 1)?;
    let measure = estimate_invariant_measure(&config, &SpectralState::zeros(n)?, 20.0, 10)?;
    println!("{} samples", measure.len());
    let suite = standard_suite();
    for (phi, r) in suite.iter().zip(invariance_residuals(&measure, &suite, &grid, &params, &noise)?) {
        println!("{:<36} mean K phi = {:+.4e} +- {:.1e}  (z = {:+.2})", phi.name, r.estimate, r.std_error, r.z_score());
    }
    Ok(())
}
