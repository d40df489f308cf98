//! Divergence-free Fourier basis on the torus: mode ordering, a round trip
//! through the grid, and the norms of a random state.

use powerlaw_lab::spectral::{analyze, spectral_divergence, synthesize, GridSpec, ModeSet, SpectralState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> powerlaw_lab::Result<()> {
    let n = 4;
    let modes = ModeSet::new(n)?;
    println!("cutoff {n}: {} modes", modes.len());
    for k in modes.modes().iter().take(6) {
        println!("  {k}  |k|^2 = {}", k.norm_sq());
    }

    let grid = GridSpec::for_cutoff(n)?;
    let u = SpectralState::random(n, 1.0, &mut ChaCha8Rng::seed_from_u64(3))?;
    let field = synthesize(&u, &grid)?;
    let back = analyze(&field, &grid)?;
    let err = back.sub(&u)?.norm_h();
    let div = spectral_divergence(&field, &grid)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("grid {0}x{0}: round-trip error {err:.2e}, max |div u| {div:.2e}", grid.points_per_axis());
    println!("|u|_H = {:.6}, |u|_V = {:.6}", u.norm_h(), u.norm_v());
    Ok(())
}
