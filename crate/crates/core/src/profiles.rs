//! Time-dependent dielectric profiles eps(t).
//!
//! Natural units throughout: c = 1 and eps = mu = 1 in the true vacuum, so
//! eps(t) is dimensionless and never drops below 1. A profile interpolates
//! between two constant asymptotes eps_initial (t -> -inf) and eps_final
//! (t -> +inf). Three shapes are supported:
//!
//! * `Step` - instantaneous jump at t0, evaluated right-continuously,
//! * `Tanh` - eps(t) = eps_i + (eps_f - eps_i) (1 + tanh((t - t0)/tau)) / 2,
//!   which covers both the sudden (tau -> 0) and adiabatic (tau -> inf)
//!   regimes,
//! * `Tabulated` - linear interpolation through an ordered (t, eps) table.

use crate::error::{Error, Result};

/// |eps(t) - eps_asymptote| below this value counts as "in/out region".
pub const ASYMPTOTIC_TOL: f64 = 1e-10;

/// A time-dependent dielectric constant with constant asymptotes.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricProfile {
    /// Instantaneous jump from `epsilon_initial` to `epsilon_final` at `t0`.
    Step {
        epsilon_initial: f64,
        epsilon_final: f64,
        t0: f64,
    },
    /// Smooth tanh interpolant of width `tau` centered on `t0`.
    Tanh {
        epsilon_initial: f64,
        epsilon_final: f64,
        t0: f64,
        tau: f64,
    },
    /// Piecewise-linear interpolation through `samples`; evaluation outside
    /// the tabulated range is an error, not an extrapolation.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl DielectricProfile {
    pub fn step(epsilon_initial: f64, epsilon_final: f64, t0: f64) -> Result<Self> {
        check_epsilon(epsilon_initial)?;
        check_epsilon(epsilon_final)?;
        Ok(DielectricProfile::Step {
            epsilon_initial,
            epsilon_final,
            t0,
        })
    }

    pub fn tanh(epsilon_initial: f64, epsilon_final: f64, t0: f64, tau: f64) -> Result<Self> {
        check_epsilon(epsilon_initial)?;
        check_epsilon(epsilon_final)?;
        if !(tau > 0.0) {
            return Err(Error::InvalidProfile(format!("tau must be > 0, got {tau}")));
        }
        Ok(DielectricProfile::Tanh {
            epsilon_initial,
            epsilon_final,
            t0,
            tau,
        })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile(
                "tabulated profile needs at least two samples".into(),
            ));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidProfile(format!(
                    "tabulated times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(t, eps) in &samples {
            if !(eps >= 1.0) {
                return Err(Error::InvalidProfile(format!("eps({t}) = {eps} < 1")));
            }
        }
        Ok(DielectricProfile::Tabulated { samples })
    }

    /// eps(t). Only tabulated profiles can fail (out-of-range evaluation).
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        match self {
            DielectricProfile::Step {
                epsilon_initial,
                epsilon_final,
                t0,
            } => Ok(if t < *t0 {
                *epsilon_initial
            } else {
                *epsilon_final
            }),
            DielectricProfile::Tanh {
                epsilon_initial,
                epsilon_final,
                t0,
                tau,
            } => {
                let x = (t - t0) / tau;
                Ok(epsilon_initial + (epsilon_final - epsilon_initial) * 0.5 * (1.0 + x.tanh()))
            }
            DielectricProfile::Tabulated { samples } => {
                let t_min = samples[0].0;
                let t_max = samples[samples.len() - 1].0;
                if t < t_min || t > t_max {
                    return Err(Error::OutOfTableRange { t, t_min, t_max });
                }
                let idx = samples.partition_point(|&(ts, _)| ts <= t);
                if idx == samples.len() {
                    return Ok(samples[samples.len() - 1].1);
                }
                let (t0, e0) = samples[idx - 1];
                let (t1, e1) = samples[idx];
                Ok(e0 + (e1 - e0) * (t - t0) / (t1 - t0))
            }
        }
    }

    pub fn epsilon_initial(&self) -> f64 {
        match self {
            DielectricProfile::Step {
                epsilon_initial, ..
            }
            | DielectricProfile::Tanh {
                epsilon_initial, ..
            } => *epsilon_initial,
            DielectricProfile::Tabulated { samples } => samples[0].1,
        }
    }

    pub fn epsilon_final(&self) -> f64 {
        match self {
            DielectricProfile::Step { epsilon_final, .. }
            | DielectricProfile::Tanh { epsilon_final, .. } => *epsilon_final,
            DielectricProfile::Tabulated { samples } => samples[samples.len() - 1].1,
        }
    }

    /// Transition reference time: phase conventions are anchored here.
    pub fn transition_time(&self) -> f64 {
        match self {
            DielectricProfile::Step { t0, .. } | DielectricProfile::Tanh { t0, .. } => *t0,
            DielectricProfile::Tabulated { samples } => {
                0.5 * (samples[0].0 + samples[samples.len() - 1].0)
            }
        }
    }

    /// True when eps(t) sits within [`ASYMPTOTIC_TOL`] of the in-asymptote.
    pub fn is_in_asymptotic(&self, t: f64) -> bool {
        match self.evaluate(t) {
            Ok(eps) => (eps - self.epsilon_initial()).abs() < ASYMPTOTIC_TOL,
            Err(_) => false,
        }
    }

    /// True when eps(t) sits within [`ASYMPTOTIC_TOL`] of the out-asymptote.
    pub fn is_out_asymptotic(&self, t: f64) -> bool {
        match self.evaluate(t) {
            Ok(eps) => (eps - self.epsilon_final()).abs() < ASYMPTOTIC_TOL,
            Err(_) => false,
        }
    }

    /// Latest in-asymptotic time and earliest out-asymptotic time. Start the
    /// integration at or before the first value and end at or after the
    /// second. For `Step` the transition is pointlike; for `Tanh` the window
    /// follows from (eps_f - eps_i) e^{-2|x|} < [`ASYMPTOTIC_TOL`]; for
    /// `Tabulated` it is the table range.
    pub fn asymptotic_window(&self) -> (f64, f64) {
        match self {
            DielectricProfile::Step { t0, .. } => (*t0 - f64::EPSILON, *t0),
            DielectricProfile::Tanh {
                epsilon_initial,
                epsilon_final,
                t0,
                tau,
            } => {
                let span = (epsilon_final - epsilon_initial)
                    .abs()
                    .max(f64::MIN_POSITIVE);
                // (span/2)(1 + tanh(-x)) ~ span e^{-2x}; margin factor on top.
                let x = 0.5 * (span / ASYMPTOTIC_TOL).ln() + 2.0;
                let x = x.max(2.0);
                (t0 - x * tau, t0 + x * tau)
            }
            DielectricProfile::Tabulated { samples } => {
                (samples[0].0, samples[samples.len() - 1].0)
            }
        }
    }

    /// True for profiles with a genuine discontinuity at `t0`.
    pub fn has_jump(&self) -> bool {
        matches!(self, DielectricProfile::Step { .. })
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps >= 1.0) {
        return Err(Error::InvalidProfile(format!(
            "dielectric constant must be >= 1, got {eps}"
        )));
    }
    Ok(())
}

/// Dispersion relation in a medium of constant eps: -eps w^2 + k^2 = 0,
/// i.e. w = k / sqrt(eps).
pub fn dispersion_omega(k: f64, epsilon: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be > 0, got {k}")));
    }
    if !(epsilon >= 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must be >= 1, got {epsilon}"
        )));
    }
    Ok(k / epsilon.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn step_is_initial_before_t0() {
        let p = DielectricProfile::step(1.0, 1.69, 0.0).unwrap();
        assert_eq!(p.evaluate(-1.0).unwrap(), 1.0);
        assert_eq!(p.evaluate(0.0).unwrap(), 1.69); // right-continuous
        assert_eq!(p.evaluate(1.0).unwrap(), 1.69);
    }

    #[test]
    fn tanh_midpoint_is_mean() {
        let p = DielectricProfile::tanh(1.0, 1.69, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.evaluate(0.0).unwrap(), 1.345, max_relative = 1e-15);
    }

    #[test]
    fn tanh_constant_profile_stays_one() {
        let p = DielectricProfile::tanh(1.0, 1.0, 0.0, 2.0).unwrap();
        for t in [-100.0, -1.0, 0.0, 3.0, 50.0] {
            assert_eq!(p.evaluate(t).unwrap(), 1.0);
        }
    }

    #[test]
    fn tanh_asymptotic_recovery() {
        let p = DielectricProfile::tanh(1.0, 1.69, 2.0, 0.5).unwrap();
        assert!((p.evaluate(2.0 - 25.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.evaluate(2.0 + 25.0).unwrap() - 1.69).abs() < 1e-12);
        let (t_in, t_out) = p.asymptotic_window();
        assert!(p.is_in_asymptotic(t_in));
        assert!(p.is_out_asymptotic(t_out));
        assert!(!p.is_in_asymptotic(2.0));
    }

    #[test]
    fn tabulated_interpolates_and_rejects_out_of_range() {
        let p = DielectricProfile::tabulated(vec![(0.0, 1.0), (1.0, 1.5), (2.0, 2.0)]).unwrap();
        assert_relative_eq!(p.evaluate(0.5).unwrap(), 1.25);
        assert_relative_eq!(p.evaluate(2.0).unwrap(), 2.0);
        assert!(matches!(
            p.evaluate(2.5),
            Err(Error::OutOfTableRange { .. })
        ));
    }

    #[test]
    fn tabulated_rejects_unsorted_or_subunity() {
        assert!(DielectricProfile::tabulated(vec![(0.0, 1.0), (0.0, 1.5)]).is_err());
        assert!(DielectricProfile::tabulated(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(DielectricProfile::tabulated(vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn profile_constructors_reject_subunity_epsilon() {
        assert!(DielectricProfile::step(0.9, 1.0, 0.0).is_err());
        assert!(DielectricProfile::tanh(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(DielectricProfile::tanh(1.0, 1.69, 0.0, 0.0).is_err());
    }

    #[test]
    fn dispersion_examples() {
        assert_relative_eq!(dispersion_omega(1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            dispersion_omega(1.0, 1.69).unwrap(),
            1.0 / 1.3,
            max_relative = 1e-15
        );
        assert_relative_eq!(dispersion_omega(2.0, 4.0).unwrap(), 1.0);
        assert!(dispersion_omega(0.0, 1.0).is_err());
        assert!(dispersion_omega(-1.0, 1.0).is_err());
        assert!(dispersion_omega(1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn tanh_monotone_between_minus_and_plus_5_tau(
            eps_f in 1.0001f64..10.0,
            t0 in -5.0f64..5.0,
            tau in 0.01f64..10.0,
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let p = DielectricProfile::tanh(1.0, eps_f, t0, tau).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let e_lo = p.evaluate(t0 + lo * tau).unwrap();
            let e_hi = p.evaluate(t0 + hi * tau).unwrap();
            prop_assert!(e_hi > e_lo);
        }

        #[test]
        fn dispersion_times_sqrt_eps_recovers_k(k in 1e-3f64..100.0, eps in 1.0f64..25.0) {
            let w = dispersion_omega(k, eps).unwrap();
            prop_assert!((w * eps.sqrt() - k).abs() <= 4.0 * f64::EPSILON * k);
        }

        #[test]
        fn tanh_recovers_asymptotes_at_50_tau(
            eps_f in 1.0f64..10.0,
            tau in 1e-3f64..100.0,
        ) {
            let p = DielectricProfile::tanh(1.0, eps_f, 0.0, tau).unwrap();
            prop_assert!((p.evaluate(-50.0 * tau).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((p.evaluate(50.0 * tau).unwrap() - eps_f).abs() < 1e-12);
        }
    }
}
