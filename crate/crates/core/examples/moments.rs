//! Polynomial moment recursion and the exponential moment ladder under a
//! sampled invariant measure.

use powerlaw_lab::fluid::FluidParams;
use powerlaw_lab::kolmogorov::{
    analysis_constants, estimate_invariant_measure, exponential_moment_from, moment_report_from, sample_observables,
    SearchConfig,
};
use powerlaw_lab::sde::{NoiseSpec, SimConfig};
use powerlaw_lab::spectral::{GridSpec, SpectralState};

fn main() -> powerlaw_lab::Result<()> {
    let n = 5;
    let params = FluidParams::new(1.7, 1.0)?;
    let noise = NoiseSpec::new(n, 0.5, 2.5)?;
    let grid = GridSpec::for_cutoff(n)?;
    let config = SimConfig::new(params, noise.clone(), grid.clone(), 0.01, 200.0, 5)?;
    let measure = estimate_invariant_measure(&config, &SpectralState::zeros(n)?, 20.0, 10)?;
    let obs = sample_observables(&measure, &grid, &params)?;

    for e in moment_report_from(&obs, 2, &params, &noise).entries {
        println!(
            "k = {}: lhs {:.4e}  rhs {:.4e}  upper95(lhs - rhs) {:+.3e}  confirmed {}",
            e.k, e.lhs.estimate, e.rhs.estimate, e.upper_95, e.confirmed
        );
    }

    let c = analysis_constants(&params, &noise, &grid, &SearchConfig::default())?;
    println!("C_p ~ {:.4}, eps* = {:.4}", c.c_p_estimate, c.eps_star);
    for f in [0.1, 0.25, 0.5, 1.0] {
        let m = exponential_moment_from(&obs, f * c.eps_star, c.eps_star, &params)?;
        println!("eps = {:.4}: E exp(eps |x|_V^p) = {:.6} +- {:.1e}", m.eps, m.estimate, m.std_error);
    }
    Ok(())
}
