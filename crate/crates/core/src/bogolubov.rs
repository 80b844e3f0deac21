//! Bogolubov coefficients relating the in- and out-quantizations.
//!
//! In the out-region the evolved in-mode decomposes onto the out-basis
//! u_out(t) = (2 eps_f w_out)^(-1/2) exp(-i w_out t) and its conjugate:
//!
//! ```text
//!   f = alpha u_out + beta u_out*,
//!   alpha = C(u_out, f),   beta = -C(u_out*, f),
//! ```
//!
//! with C the conserved current from `modes`. |beta|^2 is the number of
//! photons produced per mode and |alpha|^2 - |beta|^2 = 1 is the bosonic
//! normalization. A spatially homogeneous eps(t) cannot mix wavenumbers or
//! polarizations, so the coefficients are stored per mode (the matrices are
//! diagonal).
//!
//! Phases of both bases are referenced to the transition time t0, which
//! makes the sudden-limit coefficients real.

use crate::error::{Error, Result};
use crate::modes::{conserved_current, ModeSolution, ModeState};
use crate::profiles::{dispersion_omega, DielectricProfile};
use num_complex::Complex64;

/// Residual above which an extraction is rejected as too loose.
pub const NORMALIZATION_RESIDUAL_LIMIT: f64 = 1e-6;

/// Per-mode (alpha, beta) with the frequencies they connect.
#[derive(Debug, Clone, Copy)]
pub struct BogolubovPair {
    pub k: f64,
    pub omega_in: f64,
    pub omega_out: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl BogolubovPair {
    /// | |alpha|^2 - |beta|^2 - 1 |.
    pub fn normalization_residual(&self) -> f64 {
        (self.alpha.norm_sqr() - self.beta.norm_sqr() - 1.0).abs()
    }

    /// Produced photons per mode and polarization, |beta|^2.
    pub fn occupation(&self) -> f64 {
        self.beta.norm_sqr()
    }
}

/// gamma = (beta / alpha)*. Strictly inside the unit disk for any
/// normalized pair.
pub fn gamma_ratio(pair: &BogolubovPair) -> Complex64 {
    (pair.beta / pair.alpha).conj()
}

/// Coherent-sector ratio -beta* / alpha. Equals -gamma_ratio* when alpha
/// is real.
pub fn coherent_ratio(pair: &BogolubovPair) -> Complex64 {
    -pair.beta.conj() / pair.alpha
}

/// Project the final state of `solution` onto the out-basis.
pub fn extract(solution: &ModeSolution, profile: &DielectricProfile) -> Result<BogolubovPair> {
    extract_from_state(&solution.final_state(), profile)
}

/// Out-basis projection of a single mode state (sweep-friendly form).
pub fn extract_from_state(state: &ModeState, profile: &DielectricProfile) -> Result<BogolubovPair> {
    if !profile.is_out_asymptotic(state.t) {
        return Err(Error::Precondition(format!(
            "state at t = {} has not reached the out-asymptotic region",
            state.t
        )));
    }
    let k = state.k;
    let eps_i = profile.epsilon_initial();
    let eps_f = profile.epsilon_final();
    let omega_in = dispersion_omega(k, eps_i)?;
    let omega_out = dispersion_omega(k, eps_f)?;
    let t = state.t;

    let norm = 1.0 / (2.0 * eps_f * omega_out).sqrt();
    let u = norm * Complex64::new(0.0, -omega_out * t).exp();
    let u_out = ModeState {
        k,
        t,
        f: u,
        fdot: Complex64::new(0.0, -omega_out) * u,
    };
    let u_conj = ModeState {
        k,
        t,
        f: u.conj(),
        fdot: u_out.fdot.conj(),
    };

    let alpha = conserved_current(&u_out, state, eps_f)?;
    let beta = -conserved_current(&u_conj, state, eps_f)?;

    // Reference both basis phases to t0 so a symmetric sudden transition
    // yields real coefficients for any t0.
    let t0 = profile.transition_time();
    let alpha = alpha * Complex64::new(0.0, (omega_in - omega_out) * t0).exp();
    let beta = beta * Complex64::new(0.0, (omega_in + omega_out) * t0).exp();

    let pair = BogolubovPair {
        k,
        omega_in,
        omega_out,
        alpha,
        beta,
    };
    if pair.normalization_residual() > NORMALIZATION_RESIDUAL_LIMIT {
        return Err(Error::Numerical(format!(
            "Bogolubov normalization residual {:.3e} exceeds {NORMALIZATION_RESIDUAL_LIMIT:.0e} \
             (integration too loose?)",
            pair.normalization_residual()
        )));
    }
    Ok(pair)
}

/// Closed-form coefficients for an instantaneous jump eps_i -> eps_f.
///
/// Continuity of f and of eps df/dt at the jump gives, with
/// r = sqrt(eps_f / eps_i),
///
/// ```text
///   alpha = (sqrt(r) + 1/sqrt(r)) / 2,   beta = (sqrt(r) - 1/sqrt(r)) / 2,
/// ```
///
/// real, k-independent, and exactly normalized.
pub fn sudden_coefficients(epsilon_i: f64, epsilon_f: f64, k: f64) -> Result<BogolubovPair> {
    if !(epsilon_i >= 1.0 && epsilon_f >= 1.0) {
        return Err(Error::Domain(format!(
            "dielectric constants must be >= 1, got {epsilon_i}, {epsilon_f}"
        )));
    }
    let omega_in = dispersion_omega(k, epsilon_i)?;
    let omega_out = dispersion_omega(k, epsilon_f)?;
    let sqrt_r = (epsilon_f / epsilon_i).sqrt().sqrt();
    Ok(BogolubovPair {
        k,
        omega_in,
        omega_out,
        alpha: Complex64::new(0.5 * (sqrt_r + 1.0 / sqrt_r), 0.0),
        beta: Complex64::new(0.5 * (sqrt_r - 1.0 / sqrt_r), 0.0),
    })
}
