use super::grid::{GridSpec, Spectrum};
use super::state::SpectralState;
use crate::error::{LabError, Result};

/// Pointwise strain data used by the dissipation functional.
pub(crate) struct StrainFields {
    /// `|Eu|^2` at every grid point.
    pub frob_sq: Vec<f64>,
    /// `|grad Eu|^2 = sum_{ijm} (d_m E_ij)^2`.
    pub grad_sq: Vec<f64>,
}

pub(crate) fn strain_spectra(grid: &GridSpec, state: &SpectralState) -> (Spectrum, Spectrum) {
    let [u1, u2] = grid.velocity_spectrum(state);
    let e11 = grid.derivative(&u1, 0);
    let e12: Spectrum =
        grid.derivative(&u1, 1).iter().zip(grid.derivative(&u2, 0)).map(|(a, b)| (a + b) * 0.5).collect();
    (e11, e12)
}

pub(crate) fn strain_fields(grid: &GridSpec, state: &SpectralState) -> StrainFields {
    let (e11, e12) = strain_spectra(grid, state);
    let f = grid.synth(&[
        &e11,
        &e12,
        &grid.derivative(&e11, 0),
        &grid.derivative(&e11, 1),
        &grid.derivative(&e12, 0),
        &grid.derivative(&e12, 1),
    ]);
    // E22 = -E11 for divergence-free fields.
    let frob_sq = f[0].iter().zip(&f[1]).map(|(a, b)| 2.0 * (a * a + b * b)).collect();
    let grad_sq = (0..grid.len())
        .map(|i| 2.0 * (f[2][i] * f[2][i] + f[3][i] * f[3][i] + f[4][i] * f[4][i] + f[5][i] * f[5][i]))
        .collect();
    StrainFields { frob_sq, grad_sq }
}

/// Pointwise Frobenius magnitude of the derivatives of order `order`.
pub(crate) fn derivative_magnitude(grid: &GridSpec, state: &SpectralState, order: usize) -> Result<Vec<f64>> {
    let [u1, u2] = grid.velocity_spectrum(state);
    let sq: Vec<f64> = match order {
        0 => {
            let f = grid.synth(&[&u1, &u2]);
            f[0].iter().zip(&f[1]).map(|(a, b)| a * a + b * b).collect()
        }
        1 => {
            let f = grid.synth(&[
                &grid.derivative(&u1, 0),
                &grid.derivative(&u1, 1),
                &grid.derivative(&u2, 0),
                &grid.derivative(&u2, 1),
            ]);
            (0..grid.len()).map(|i| f.iter().map(|c| c[i] * c[i]).sum()).collect()
        }
        2 => {
            let mut spectra = Vec::with_capacity(6);
            for u in [&u1, &u2] {
                let d1 = grid.derivative(u, 0);
                let d2 = grid.derivative(u, 1);
                spectra.push(grid.derivative(&d1, 0));
                spectra.push(grid.derivative(&d1, 1));
                spectra.push(grid.derivative(&d2, 1));
            }
            let refs: Vec<&[_]> = spectra.iter().map(|s| s.as_slice()).collect();
            let f = grid.synth(&refs);
            // mixed partials appear twice in the full Hessian
            (0..grid.len())
                .map(|i| {
                    f[0][i] * f[0][i]
                        + 2.0 * f[1][i] * f[1][i]
                        + f[2][i] * f[2][i]
                        + f[3][i] * f[3][i]
                        + 2.0 * f[4][i] * f[4][i]
                        + f[5][i] * f[5][i]
                })
                .collect()
        }
        _ => return Err(LabError::Config(format!("unsupported Sobolev order {order}"))),
    };
    Ok(sq.into_iter().map(f64::sqrt).collect())
}

pub(crate) fn lp_norm(grid: &GridSpec, magnitude: &[f64], p: f64) -> f64 {
    let powered: Vec<f64> = magnitude.iter().map(|v| v.powf(p)).collect();
    grid.integrate(&powered).powf(1.0 / p)
}

/// `L^p` norm of the field (`order = 0`) or of its derivatives of the given order.
///
/// Orders 1 and 2 are the top-order seminorms; since all fields are mean-zero
/// they are norms, and `order = 1, p = 2` is `||u||_V`.
pub fn sobolev_norm(state: &SpectralState, grid: &GridSpec, order: usize, p: f64) -> Result<f64> {
    grid.check_state(state)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(LabError::Domain(format!("Sobolev exponent must be in [1, inf), got {p}")));
    }
    let mag = derivative_magnitude(grid, state, order)?;
    Ok(lp_norm(grid, &mag, p))
}

/// Dissipation functional `I_p(u) = int (1 + |Eu|^2)^{(p-2)/2} |grad Eu|^2`.
pub fn dissipation_ip(state: &SpectralState, grid: &GridSpec, p: f64) -> Result<f64> {
    grid.check_state(state)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::Domain(format!("power-law exponent must exceed 1, got {p}")));
    }
    Ok(ip_from_fields(grid, &strain_fields(grid, state), p))
}

pub(crate) fn ip_from_fields(grid: &GridSpec, s: &StrainFields, p: f64) -> f64 {
    let e = 0.5 * (p - 2.0);
    let integrand: Vec<f64> = s.frob_sq.iter().zip(&s.grad_sq).map(|(f, g)| (1.0 + f).powf(e) * g).collect();
    grid.integrate(&integrand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::basis::WaveIndex;
    use approx::assert_relative_eq;

    #[test]
    fn unit_mode_norms() {
        let grid = GridSpec::for_cutoff(4).unwrap();
        for &(k1, k2) in &[(1, 0), (0, -1), (2, 3), (-3, 1)] {
            let k = WaveIndex::new(k1, k2).unwrap();
            let e = SpectralState::unit(4, k).unwrap();
            assert_relative_eq!(sobolev_norm(&e, &grid, 0, 2.0).unwrap(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(sobolev_norm(&e, &grid, 1, 2.0).unwrap(), k.norm(), epsilon = 1e-12);
            assert_relative_eq!(sobolev_norm(&e, &grid, 2, 2.0).unwrap(), k.norm_sq() as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_state_has_zero_norms() {
        let grid = GridSpec::for_cutoff(3).unwrap();
        let z = SpectralState::zeros(3).unwrap();
        for order in 0..3 {
            for p in [1.0, 1.5, 2.0, 4.0] {
                assert_eq!(sobolev_norm(&z, &grid, order, p).unwrap(), 0.0);
            }
        }
        assert_eq!(dissipation_ip(&z, &grid, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn bad_arguments() {
        let grid = GridSpec::for_cutoff(3).unwrap();
        let z = SpectralState::zeros(3).unwrap();
        assert!(sobolev_norm(&z, &grid, 3, 2.0).is_err());
        assert!(sobolev_norm(&z, &grid, 1, 0.5).is_err());
        assert!(dissipation_ip(&z, &grid, 1.0).is_err());
    }

    #[test]
    fn small_amplitude_limit_of_ip() {
        let grid = GridSpec::for_cutoff(2).unwrap();
        let e = SpectralState::unit(2, WaveIndex::new(1, 0).unwrap()).unwrap();
        for p in [1.2, 1.5, 1.9] {
            let c = 1e-5;
            let ip = dissipation_ip(&e.scaled(c), &grid, p).unwrap();
            assert_relative_eq!(ip / (c * c), 0.5, epsilon = 1e-8);
        }
    }
}
