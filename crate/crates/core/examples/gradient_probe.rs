//! Synchronous coupling of nearby initial states: the difference quotient
//! of the flow, its envelope rate, and how the rate grows with |x|_V.

use powerlaw_lab::fluid::FluidParams;
use powerlaw_lab::kolmogorov::{gradient_ratio_experiment, growth_rate_scan, standard_suite};
use powerlaw_lab::sde::{random_initial, NoiseSpec, SimConfig};
use powerlaw_lab::spectral::GridSpec;

fn main() -> powerlaw_lab::Result<()> {
    let n = 5;
    let config = SimConfig::new(
        FluidParams::new(1.8, 1.0)?,
        NoiseSpec::new(n, 0.1, 2.5)?,
        GridSpec::for_cutoff(n)?,
        0.01,
        2.0,
        3,
    )?
    .with_stride(20)?;
    let x = random_initial(n, 2.0, 3)?;
    let phi = &standard_suite()[0];
    let report = gradient_ratio_experiment(&config, &x, &[1e-2, 1e-3, 1e-4], phi, 8)?;
    for s in &report.separations {
        println!(
            "h = {:.0e}: final ratio {:.4}, envelope rate {:+.4}, least-squares rate {:+.4}",
            s.h,
            s.ratio.last().copied().unwrap_or(f64::NAN),
            s.envelope_rate,
            s.ls_rate
        );
    }
    println!("spread across h: {:.4}", report.stability_factor);

    let shape = random_initial(n, 1.0, 9)?;
    let scan = growth_rate_scan(&config, &shape, &[0.5, 2.0, 8.0, 32.0], 1e-4, phi, 4)?;
    for (a, r) in scan.norm_v_p.iter().zip(&scan.rates) {
        println!("|x|_V^p = {a:>10.3}: rate {r:+.4}");
    }
    println!("rank correlation {:+.2}", scan.rank_correlation);
    Ok(())
}
