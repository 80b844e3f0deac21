//! Complex mode functions of the vector potential through an eps(t)
//! transition.
//!
//! A mode of wavenumber k solves d/dt(eps(t) df/dt) + k^2 f = 0. Deep in the
//! in-region the canonical positive-frequency mode is
//!
//! ```text
//!   f(t) = (2 eps_i w_in)^(-1/2) exp(-i w_in t),   w_in = k / sqrt(eps_i),
//! ```
//!
//! normalized so that the conserved current C(f, f) = 1, where
//!
//! ```text
//!   C(a, b) = i eps (a.f* b.fdot - a.fdot* b.f).
//! ```
//!
//! C is constant along any solution pair and plays the role of the
//! Klein-Gordon inner product: it fixes normalization and, in `bogolubov`,
//! the projections onto the out-basis. The two transverse polarizations
//! share this scalar mode function; they enter only as a degeneracy factor
//! in `spectrum`.

use crate::error::{Error, Result};
use crate::ode::{self, IntegrationStats};
use crate::profiles::{DielectricProfile, ASYMPTOTIC_TOL};
use num_complex::Complex64;

/// Snapshot of one mode at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub k: f64,
    pub t: f64,
    pub f: Complex64,
    pub fdot: Complex64,
}

impl ModeState {
    /// State vector (f, p) with p = eps * fdot.
    pub(crate) fn to_system(self, eps: f64) -> [Complex64; 2] {
        [self.f, eps * self.fdot]
    }

    pub(crate) fn from_system(k: f64, t: f64, y: [Complex64; 2], eps: f64) -> Self {
        ModeState {
            k,
            t,
            f: y[0],
            fdot: y[1] / eps,
        }
    }
}

/// Full integration record for one wavenumber.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub k: f64,
    pub trajectory: Vec<ModeState>,
    pub t_start: f64,
    pub t_end: f64,
    pub tolerance_used: f64,
    pub stats: IntegrationStats,
}

impl ModeSolution {
    pub fn final_state(&self) -> ModeState {
        *self.trajectory.last().expect("trajectory is never empty")
    }
}

/// Tolerances accepted by [`evolve_mode`].
pub const REL_TOL_RANGE: (f64, f64) = (1e-13, 1e-6);

/// Canonical in-region positive-frequency mode at `t_start`.
///
/// `t_start` must lie deep enough in the in-region that eps is within
/// [`ASYMPTOTIC_TOL`] of its initial asymptote.
pub fn initial_plane_wave(k: f64, profile: &DielectricProfile, t_start: f64) -> Result<ModeState> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be > 0, got {k}")));
    }
    if !profile.is_in_asymptotic(t_start) {
        return Err(Error::Precondition(format!(
            "t_start = {t_start} is not in the in-asymptotic region (|eps - eps_initial| >= {ASYMPTOTIC_TOL})"
        )));
    }
    let eps_i = profile.epsilon_initial();
    let omega_in = k / eps_i.sqrt();
    let norm = 1.0 / (2.0 * eps_i * omega_in).sqrt();
    let f = norm * Complex64::new(0.0, -omega_in * t_start).exp();
    Ok(ModeState {
        k,
        t: t_start,
        f,
        fdot: Complex64::new(0.0, -omega_in) * f,
    })
}

/// Conserved inner-product current C(a, b) = i eps (a.f* b.fdot - a.fdot* b.f).
///
/// Both states must refer to the same time and wavenumber; `epsilon` is
/// eps(t) at that time.
pub fn conserved_current(a: &ModeState, b: &ModeState, epsilon: f64) -> Result<Complex64> {
    if a.t != b.t || a.k != b.k {
        return Err(Error::Usage(format!(
            "conserved_current needs matching states: (t = {}, k = {}) vs (t = {}, k = {})",
            a.t, a.k, b.t, b.k
        )));
    }
    Ok(Complex64::new(0.0, epsilon) * (a.f.conj() * b.fdot - a.fdot.conj() * b.f))
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol >= REL_TOL_RANGE.0 && rel_tol <= REL_TOL_RANGE.1) {
        return Err(Error::Domain(format!(
            "rel_tol = {rel_tol} outside [{}, {}]",
            REL_TOL_RANGE.0, REL_TOL_RANGE.1
        )));
    }
    Ok(())
}

/// Evolve the canonical in-mode from `t_start` (in-asymptotic) to `t_end`
/// (out-asymptotic), recording the trajectory at every accepted step.
pub fn evolve_mode(
    k: f64,
    profile: &DielectricProfile,
    t_start: f64,
    t_end: f64,
    rel_tol: f64,
) -> Result<ModeSolution> {
    check_rel_tol(rel_tol)?;
    if !(t_end > t_start) {
        return Err(Error::Usage(format!(
            "evolve_mode integrates forward; got t_start = {t_start}, t_end = {t_end}"
        )));
    }
    if !profile.is_out_asymptotic(t_end) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} is not in the out-asymptotic region"
        )));
    }
    let initial = initial_plane_wave(k, profile, t_start)?;
    evolve_state(profile, initial, t_end, rel_tol)
}

/// Evolve an arbitrary mode state to `t_end` (either direction), recording
/// the trajectory. No asymptotic requirement is placed on the endpoints.
pub fn evolve_state(
    profile: &DielectricProfile,
    initial: ModeState,
    t_end: f64,
    rel_tol: f64,
) -> Result<ModeSolution> {
    check_rel_tol(rel_tol)?;
    let eps0 = profile.evaluate(initial.t)?;
    let mut trajectory = vec![initial];
    let k = initial.k;
    let (y, stats) = ode::integrate(
        profile,
        k,
        initial.t,
        t_end,
        initial.to_system(eps0),
        rel_tol,
        |t, y| {
            let eps = profile.evaluate(t).unwrap_or(f64::NAN);
            trajectory.push(ModeState::from_system(k, t, y, eps));
        },
    )?;
    // Endpoint is pushed by the final accepted step except for zero spans.
    if trajectory.last().map(|s| s.t) != Some(t_end) {
        let eps = profile.evaluate(t_end)?;
        trajectory.push(ModeState::from_system(k, t_end, y, eps));
    }
    Ok(ModeSolution {
        k,
        trajectory,
        t_start: initial.t,
        t_end,
        tolerance_used: rel_tol,
        stats,
    })
}

/// Endpoint-only variant of [`evolve_mode`] for sweeps: no trajectory
/// storage, same integrator and diagnostics.
pub fn evolve_mode_endpoint(
    k: f64,
    profile: &DielectricProfile,
    t_start: f64,
    t_end: f64,
    rel_tol: f64,
) -> Result<(ModeState, IntegrationStats)> {
    check_rel_tol(rel_tol)?;
    if !(t_end > t_start) {
        return Err(Error::Usage(format!(
            "evolve_mode_endpoint integrates forward; got t_start = {t_start}, t_end = {t_end}"
        )));
    }
    if !profile.is_out_asymptotic(t_end) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} is not in the out-asymptotic region"
        )));
    }
    let initial = initial_plane_wave(k, profile, t_start)?;
    let eps0 = profile.evaluate(t_start)?;
    let (y, stats) = ode::integrate(
        profile,
        k,
        t_start,
        t_end,
        initial.to_system(eps0),
        rel_tol,
        |_, _| {},
    )?;
    let eps_end = profile.evaluate(t_end)?;
    Ok((ModeState::from_system(k, t_end, y, eps_end), stats))
}
