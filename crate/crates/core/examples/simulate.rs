//! One tamed Euler trajectory of the Galerkin system, printed as a table of
//! energy, enstrophy and dissipation.

use powerlaw_lab::fluid::FluidParams;
use powerlaw_lab::sde::{random_initial, simulate, NoiseSpec, SimConfig};
use powerlaw_lab::spectral::GridSpec;

fn main() -> powerlaw_lab::Result<()> {
    let n = 6;
    let config = SimConfig::new(
        FluidParams::new(1.7, 1.0)?,
        NoiseSpec::new(n, 1.0, 2.5)?,
        GridSpec::for_cutoff(n)?,
        0.01,
        5.0,
        42,
    )?
    .with_stride(50)?;
    let rec = simulate(&config, &random_initial(n, 5.0, 42)?)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "|u|_H", "|u|_V", "I_p", "int I_p");
    for j in 0..rec.len() {
        println!(
            "{:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            rec.times[j], rec.norm_h[j], rec.norm_v[j], rec.ip[j], rec.int_ip[j]
        );
    }
    Ok(())
}
