//! Exponent schedule, the threshold p*, and the fitted constants for a few
//! values of p.

use powerlaw_lab::fluid::FluidParams;
use powerlaw_lab::kolmogorov::{analysis_constants, exponents, p_star, SearchConfig};
use powerlaw_lab::sde::NoiseSpec;
use powerlaw_lab::spectral::GridSpec;

fn main() -> powerlaw_lab::Result<()> {
    println!("p* = {:.10}", p_star());
    let n = 4;
    let grid = GridSpec::for_cutoff(n)?;
    let noise = NoiseSpec::new(n, 1.0, 2.5)?;
    println!(
        "{:>5} {:>7} {:>7} {:>7} {:>7} {:>7} {:>5} {:>8} {:>8}",
        "p", "r", "q", "q*", "theta", "beta", "cond", "C_p", "eps*"
    );
    for p in [1.3, 1.5, 1.6, 1.7, 1.8, 1.9] {
        let e = exponents(p);
        let c = analysis_constants(&FluidParams::new(p, 1.0)?, &noise, &grid, &SearchConfig::default())?;
        println!(
            "{p:>5.2} {:>7.4} {:>7.4} {:>7.3} {:>7.4} {:>7.4} {:>5} {:>8.4} {:>8.4}",
            e.r, e.q, e.q_star, e.theta, e.beta, c.condition_ok, c.c_p_estimate, c.eps_star
        );
    }
    Ok(())
}
