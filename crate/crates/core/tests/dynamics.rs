use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use powerlaw_lab::fluid::{apply_ap, apply_b, drift, holder_exponents, FluidParams};
use powerlaw_lab::rng::{generator, Stream};
use powerlaw_lab::sde::{
    couple, couple_replica, random_initial, simulate, simulate_batch, tamed_step, NoiseSpec, SimConfig,
};
use powerlaw_lab::spectral::{GridSpec, SpectralState, WaveIndex};
use powerlaw_lab::stats::{batch_means, mean};

fn config(n: usize, p: f64, sigma0: f64, dt: f64, t: f64, seed: u64) -> SimConfig {
    let params = FluidParams::diagnostic(p, 1.0).unwrap();
    SimConfig::new(params, NoiseSpec::new(n, sigma0, 2.5).unwrap(), GridSpec::for_cutoff(n).unwrap(), dt, t, seed)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn drift_is_dissipative(n in 2usize..6, p in 1.05f64..1.99, seed in any::<u64>(), scale in 0.01f64..30.0) {
        let grid = GridSpec::for_cutoff(n).unwrap();
        let params = FluidParams::new(p, 1.0).unwrap();
        let u = SpectralState::random(n, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().scaled(scale);
        let f = drift(&u, &grid, &params).unwrap();
        let b = apply_b(&u, &u, &grid).unwrap();
        prop_assert!(b.dot(&u).unwrap().abs() <= 1e-10 * b.norm_h() * u.norm_h());
        prop_assert!(f.dot(&u).unwrap() <= 1e-10 * f.norm_h() * u.norm_h());
        prop_assert!(apply_ap(&u, &grid, &params).unwrap().dot(&u).unwrap() < 0.0);
    }

    #[test]
    fn holder_exponents_are_conjugate(p in 1.0001f64..1.9999) {
        let [p1, p2, p3]: [f64; 3] = holder_exponents(p);
        prop_assert!((1.0 / p1 + 1.0 / p2 + 1.0 / p3 - 1.0).abs() < 1e-14);
    }
}

#[test]
fn p2_single_mode_drift_is_linear_decay() {
    let n = 4;
    let grid = GridSpec::for_cutoff(n).unwrap();
    let params = FluidParams::diagnostic(2.0, 0.7).unwrap();
    for k in [WaveIndex::new(1, 0).unwrap(), WaveIndex::new(-2, 3).unwrap(), WaveIndex::new(0, -4).unwrap()] {
        let e = SpectralState::unit(n, k).unwrap();
        let f = drift(&e, &grid, &params).unwrap();
        let expect = e.scaled(-0.35 * k.norm_sq() as f64);
        let err = f.sub(&expect).unwrap().norm_h();
        assert!(err < 1e-12, "{k}: {err}");
    }
}

#[test]
fn deterministic_runs_do_not_gain_energy() {
    let dt = 0.005;
    for seed in 0..4 {
        let c = config(5, 1.4, 0.0, dt, 2.0, seed);
        let rec = simulate(&c, &random_initial(5, 4.0, seed).unwrap()).unwrap();
        assert!(rec.norm_h.windows(2).all(|w| w[1] <= w[0] + 10.0 * dt * dt));
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert!(rec.ip.iter().chain(&rec.norm_1p).chain(&rec.int_ip).all(|v| v.is_finite() && *v >= 0.0));
    }
}

#[test]
fn endpoint_converges_at_first_order() {
    let x = random_initial(4, 2.0, 8).unwrap();
    let endpoint = |dt: f64| simulate(&config(4, 1.6, 0.0, dt, 0.5, 1), &x).unwrap().norm_h.pop().unwrap();
    let reference = endpoint(0.01 / 64.0);
    let errs: Vec<f64> = (0..4).map(|j| (endpoint(0.01 / 2f64.powi(j)) - reference).abs()).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((0.7..1.3).contains(&order), "errors {errs:?}");
    }
}

#[test]
fn noise_increments_have_the_stated_variance() {
    let n = 3;
    let c = config(n, 1.5, 2.0, 0.01, 1.0, 4);
    let zero = SpectralState::zeros(n).unwrap();
    // a single tamed step from 0 has zero drift, so the state is exactly sum sigma_k dW_k e_k
    let mut rng = generator(4, Stream::Noise, 77);
    let steps = 20_000;
    let dim = zero.dim();
    let mut samples = vec![Vec::with_capacity(steps); dim];
    for _ in 0..steps {
        let inc: Vec<f64> = (0..dim).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
        let next = tamed_step(&zero, 0.01, &inc, &c).unwrap();
        for (i, a) in next.coeffs().iter().enumerate() {
            samples[i].push(a * a);
        }
    }
    for (i, s) in samples.iter().enumerate() {
        let est = batch_means(s, 32);
        let target = 0.01 * c.noise.variance(i);
        assert!((est.estimate - target).abs() <= 5.0 * est.std_error, "mode {i}: {est:?} vs {target}");
    }
}

#[test]
fn coupling_cancels_noise() {
    let n = 4;
    let noisy = config(n, 1.7, 1.0, 0.01, 1.0, 2);
    let x = random_initial(n, 1.0, 1).unwrap();
    let y = random_initial(n, 1.0, 2).unwrap();
    let r = couple(&noisy, &x, &y).unwrap();
    assert_eq!(r.norm_z[0], x.sub(&y).unwrap().norm_h());
    assert_eq!(r.initial_separation, r.norm_z[0]);
    let again = couple_replica(&noisy, &x, &y, 0).unwrap();
    assert_eq!(again, r);
    let other = couple_replica(&noisy, &x, &y, 1).unwrap();
    assert_ne!(other.final_u, r.final_u);
}

#[test]
fn deterministic_p2_separation_contracts() {
    let c = config(4, 2.0, 0.0, 0.005, 1.0, 0);
    let x = random_initial(4, 0.1, 1).unwrap();
    let y = random_initial(4, 0.1, 2).unwrap();
    let r = couple(&c, &x, &y).unwrap();
    assert!(r.norm_z.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn flow_map_difference_quotient_is_stable() {
    let n = 4;
    let c = config(n, 1.7, 0.5, 0.01, 0.5, 3);
    let x = random_initial(n, 1.0, 5).unwrap();
    let e = SpectralState::unit(n, WaveIndex::new(1, 1).unwrap()).unwrap();
    let ratio = |h: f64| {
        let vals: Vec<f64> = (0..8)
            .map(|r| couple_replica(&c, &x.axpy(h, &e).unwrap(), &x, r).unwrap().norm_z.pop().unwrap() / h)
            .collect();
        mean(&vals)
    };
    let (a, b, d) = (ratio(1e-2), ratio(1e-3), ratio(1e-4));
    assert!((a / b - 1.0).abs() < 0.05 && (b / d - 1.0).abs() < 0.01, "{a} {b} {d}");
}

#[test]
fn enstrophy_bound_constant_is_stable_in_n() {
    // E ||u_t||_V^2 + E int I_p <= C (||u_0||_V^2 + t trAQ), C fitted per cutoff
    let mut fitted = Vec::new();
    for n in [4, 6, 8] {
        let c = config(n, 1.7, 1.0, 0.01, 2.0, 9).with_stride(50).unwrap();
        let x = random_initial(n, 1.0, 9).unwrap();
        let runs = simulate_batch(&c, &x, 16).unwrap();
        let mut worst: f64 = 0.0;
        for j in 1..runs[0].len() {
            let t = runs[0].times[j];
            let lhs = mean(&runs.iter().map(|r| r.norm_v[j].powi(2) + r.int_ip[j]).collect::<Vec<_>>());
            worst = worst.max(lhs / (1.0 + t * c.noise.tr_aq));
        }
        fitted.push(worst);
    }
    let (lo, hi) = fitted.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(hi / lo < 1.5, "{fitted:?}");
}
