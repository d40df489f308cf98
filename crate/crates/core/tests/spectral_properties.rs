use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use powerlaw_lab::fluid::apply_stokes;
use powerlaw_lab::spectral::{
    analyze, basis_eval, spectral_divergence, spectral_laplacian, sym_gradient, synthesize, GridSpec, ModeSet,
    PhysicalField, SpectralState,
};

fn state(cutoff: usize, seed: u64, decay: f64) -> SpectralState {
    SpectralState::random(cutoff, decay, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn orthonormal_under_quadrature() {
    for n in 1..=4 {
        let grid = GridSpec::new(n, 2 * n + 2).unwrap();
        let modes = ModeSet::new(n).unwrap();
        let fields: Vec<Vec<[f64; 2]>> = modes
            .modes()
            .iter()
            .map(|k| (0..grid.len()).map(|i| basis_eval(*k, grid.point(i)).unwrap()).collect())
            .collect();
        for (a, fa) in fields.iter().enumerate() {
            for (b, fb) in fields.iter().enumerate() {
                let prod: Vec<f64> = fa.iter().zip(fb).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).collect();
                let ip = grid.integrate(&prod);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "n={n} <e_{a}, e_{b}> = {ip}");
            }
        }
    }
}

#[test]
fn eigenrelation_of_every_mode() {
    let n = 4;
    let grid = GridSpec::for_cutoff(n).unwrap();
    for k in ModeSet::new(n).unwrap().modes() {
        let e = SpectralState::unit(n, *k).unwrap();
        let lap = spectral_laplacian(&synthesize(&e, &grid).unwrap(), &grid).unwrap();
        let back = analyze(&lap, &grid).unwrap().scaled(-1.0);
        let expect = e.scaled(k.norm_sq() as f64);
        assert!(max_diff(back.coeffs(), expect.coeffs()) < 1e-10, "mode {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(n in 1usize..7, extra in 2usize..6, seed in any::<u64>(), decay in 0.0f64..2.0) {
        let grid = GridSpec::new(n, 2 * n + extra).unwrap();
        let u = state(n, seed, decay);
        let back = analyze(&synthesize(&u, &grid).unwrap(), &grid).unwrap();
        prop_assert!(max_diff(back.coeffs(), u.coeffs()) < 1e-12);
    }

    #[test]
    fn synthesized_fields_are_divergence_free(n in 1usize..7, seed in any::<u64>()) {
        let grid = GridSpec::for_cutoff(n).unwrap();
        let u = state(n, seed, 0.5);
        let div = spectral_divergence(&synthesize(&u, &grid).unwrap(), &grid).unwrap();
        prop_assert!(max_abs(&div) < 1e-12 * (1.0 + u.norm_v()));
    }

    #[test]
    fn parseval(n in 1usize..7, seed in any::<u64>(), decay in 0.0f64..2.0) {
        let grid = GridSpec::for_cutoff(n).unwrap();
        let u = state(n, seed, decay);
        let field = synthesize(&u, &grid).unwrap();
        let sq: Vec<f64> = field.values().iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
        let sum_sq: f64 = u.coeffs().iter().map(|a| a * a).sum();
        prop_assert!((grid.integrate(&sq) - sum_sq).abs() < 1e-10 * (1.0 + sum_sq));
        let weighted: f64 = u.modes().modes().iter().zip(u.coeffs()).map(|(k, a)| k.norm_sq() as f64 * a * a).sum();
        prop_assert!((u.norm_v().powi(2) - weighted).abs() < 1e-10 * (1.0 + weighted));
        let lap = analyze(&spectral_laplacian(&field, &grid).unwrap(), &grid).unwrap();
        prop_assert!(max_diff(lap.coeffs(), apply_stokes(&u).coeffs()) < 1e-9 * (1.0 + weighted));
    }

    #[test]
    fn strain_is_trace_free(n in 1usize..7, seed in any::<u64>()) {
        let grid = GridSpec::for_cutoff(n).unwrap();
        let u = state(n, seed, 0.0);
        let trace = sym_gradient(&u, &grid).unwrap().trace();
        // |grad u| <= sum_k |k| |a_k| / sqrt(2 pi) pointwise
        let bound: f64 = u.modes().modes().iter().zip(u.coeffs()).map(|(k, a)| k.norm() * a.abs()).sum();
        prop_assert!(max_abs(&trace) <= 1e-10 * bound.max(1e-300));
    }

    #[test]
    fn analysis_is_linear(n in 1usize..5, s1 in any::<u64>(), s2 in any::<u64>(), c in -3.0f64..3.0) {
        let grid = GridSpec::for_cutoff(n).unwrap();
        let (u, v) = (state(n, s1, 1.0), state(n, s2, 1.0));
        let fu = synthesize(&u, &grid).unwrap();
        let fv = synthesize(&v, &grid).unwrap();
        let sum: Vec<[f64; 2]> = fu.values().iter().zip(fv.values()).map(|(a, b)| [a[0] + c * b[0], a[1] + c * b[1]]).collect();
        let mixed = analyze(&PhysicalField::new(grid.points_per_axis(), sum).unwrap(), &grid).unwrap();
        let expect = u.axpy(c, &v).unwrap();
        prop_assert!(max_diff(mixed.coeffs(), expect.coeffs()) < 1e-12 * (1.0 + c.abs()));
    }
}
