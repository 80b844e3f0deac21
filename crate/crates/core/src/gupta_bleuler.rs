//! Numerical checks of the covariant-quantization constraint chain on the
//! scalar/longitudinal sector.
//!
//! In a medium whose eps(t) ends on a different constant, the generalized
//! Lorentz condition imposed on positive-frequency parts forces, per mode:
//!
//! * in-region: (a_long - a_scalar)|Psi> = 0,
//! * per mode after the transition, rotated through the Bogolubov pair:
//!   (alpha a + beta* a†)|Psi> = 0 for the scalar and longitudinal modes
//!   separately,
//! * out-region: (1 - sqrt(eps_final)) (alpha a + beta* a†)|Psi> = 0, whose
//!   prefactor vanishes only in the true vacuum,
//! * and on the solving coherent state: (a†_long - a†_scalar)|Psi> = 0.
//!
//! On a truncated positive-metric space a creation operator annihilates
//! nothing, so these are read as zero-norm statements in the indefinite
//! metric: the residual vector r is reported through the signed quadratic
//! form <r|M|r> (which the scalar sector's negative signature can cancel)
//! together with the positive norm of its sub-cutoff projection.
//!
//! The state solving the per-mode condition with exponent G a†a† (no 1/2)
//! is G = -beta*/(2 alpha), half the coherent ratio -beta*/alpha delivered
//! by `bogolubov::coherent_ratio`; the factor is exposed as an explicit
//! `calibration` parameter with default 1/2.

use crate::bogolubov::{coherent_ratio, BogolubovPair};
use crate::error::{Error, Result};
use crate::fock::{FockState, MetricSign, ModeRegistry};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Default factor between the coherent ratio -beta*/alpha and the squared
/// creation-operator exponent that actually solves the per-mode condition.
pub const DEFAULT_CALIBRATION: f64 = 0.5;

/// PASS threshold on |<r|M|r>|.
pub const INDEFINITE_PASS: f64 = 1e-10;
/// PASS threshold on the positive norm of the sub-cutoff projection.
pub const POSITIVE_PASS: f64 = 1e-8;

/// Which constraint a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// In-region Lorentz condition (a_long - a_scalar)|Psi> = 0.
    InRegionLorentz,
    /// Per-mode rotated condition (alpha a + beta* a†)|Psi> = 0.
    PerModeAnnihilation,
    /// Out-region condition with its (1 - sqrt(eps_final)) prefactor.
    OutAnnihilation,
    /// Creation-difference condition (a†_long - a†_scalar)|Psi> = 0.
    CreationDifference,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintKind::InRegionLorentz => "in-lorentz",
            ConstraintKind::PerModeAnnihilation => "per-mode",
            ConstraintKind::OutAnnihilation => "out-annihilation",
            ConstraintKind::CreationDifference => "creation-difference",
        };
        f.write_str(s)
    }
}

/// Parameter snapshot carried by a report. NaN marks fields that do not
/// enter the checked constraint.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintParams {
    pub epsilon_final: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl ConstraintParams {
    fn none() -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        ConstraintParams {
            epsilon_final: f64::NAN,
            alpha: nan,
            beta: nan,
            gamma: nan,
        }
    }
}

/// Outcome of one constraint evaluation. `residual_indefinite_norm` is the
/// signed value of <r|M|r> (negative values are legitimate in the
/// indefinite metric); `residual_positive_norm` is the positive norm of the
/// sub-cutoff projection of r.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintReport {
    pub kind: ConstraintKind,
    pub residual_indefinite_norm: f64,
    pub residual_positive_norm: f64,
    pub params: ConstraintParams,
    pub pass: bool,
}

/// Matched scalar/longitudinal registry for one wavenumber sector.
pub fn unphysical_pair_registry(cutoff: usize) -> Arc<ModeRegistry> {
    Arc::new(
        ModeRegistry::from_specs(&[
            ("scalar", MetricSign::Negative, cutoff),
            ("longitudinal", MetricSign::Positive, cutoff),
        ])
        .expect("static registry is valid"),
    )
}

/// One scalar/longitudinal pair and the coherent parameter G driving it.
#[derive(Debug, Clone)]
pub struct UnphysicalPair {
    pub scalar: String,
    pub longitudinal: String,
    pub gamma: Complex64,
}

impl UnphysicalPair {
    pub fn new(scalar: &str, longitudinal: &str, gamma: Complex64) -> Self {
        UnphysicalPair {
            scalar: scalar.into(),
            longitudinal: longitudinal.into(),
            gamma,
        }
    }
}

fn paired_modes(registry: &ModeRegistry) -> Result<Vec<(String, String)>> {
    let scalars: Vec<_> = registry
        .modes()
        .iter()
        .filter(|m| m.metric_sign == MetricSign::Negative)
        .map(|m| m.label.clone())
        .collect();
    let longs: Vec<_> = registry
        .modes()
        .iter()
        .filter(|m| m.metric_sign == MetricSign::Positive)
        .map(|m| m.label.clone())
        .collect();
    if scalars.is_empty() || scalars.len() != longs.len() {
        return Err(Error::Usage(format!(
            "registry needs matched scalar/longitudinal pairs, found {} scalar and {} longitudinal",
            scalars.len(),
            longs.len()
        )));
    }
    Ok(scalars.into_iter().zip(longs).collect())
}

/// N exp(sum_pairs c (a†_long a†_long - a†_scalar a†_scalar)) |0> with
/// c = calibration * gamma, normalized to unit positive norm. Only even
/// occupations are populated.
pub fn build_unphysical_state(
    pairs: &[UnphysicalPair],
    registry: Arc<ModeRegistry>,
    calibration: f64,
) -> Result<FockState> {
    let mut state = FockState::vacuum(registry.clone());
    for pair in pairs {
        let s = registry.index_of(&pair.scalar)?;
        let l = registry.index_of(&pair.longitudinal)?;
        if registry.modes()[s].metric_sign != MetricSign::Negative {
            return Err(Error::Usage(format!(
                "mode '{}' must carry negative metric to act as the scalar sector",
                pair.scalar
            )));
        }
        if registry.modes()[l].metric_sign != MetricSign::Positive {
            return Err(Error::Usage(format!(
                "mode '{}' must carry positive metric to act as the longitudinal sector",
                pair.longitudinal
            )));
        }
        let c = calibration * pair.gamma;
        if 2.0 * c.norm() >= 1.0 {
            return Err(Error::NonNormalizable(format!(
                "|2 c| = {} >= 1: squared-creation exponential does not converge",
                2.0 * c.norm()
            )));
        }
        state = state
            .apply_square_exponential(&pair.longitudinal, c)?
            .apply_square_exponential(&pair.scalar, -c)?;
    }
    let state = state.normalized()?;
    let residual = state.leakage() + state.boundary_mass();
    if residual >= crate::fock::LEAKAGE_BUDGET {
        let have = registry.modes().iter().map(|m| m.cutoff).min().unwrap_or(0);
        return Err(Error::Cutoff {
            have,
            suggested: have * 2 + 8,
            message: format!("unphysical-state truncation residual {residual:.3e} over budget"),
        });
    }
    Ok(state)
}

fn residual_report(
    kind: ConstraintKind,
    residual: &FockState,
    subcutoff: &FockState,
    params: ConstraintParams,
) -> Result<ConstraintReport> {
    let indefinite = residual.indefinite_inner(residual)?;
    let positive = subcutoff.positive_norm();
    Ok(ConstraintReport {
        kind,
        residual_indefinite_norm: indefinite.re,
        residual_positive_norm: positive,
        params,
        pass: indefinite.re.abs() < INDEFINITE_PASS && positive < POSITIVE_PASS,
    })
}

/// Residual of (alpha a + beta* a†)|state> on one mode. The positive norm
/// is taken after projecting off the top two occupation levels of `mode`,
/// where truncation corrupts the cancellation by construction.
pub fn check_per_mode_constraint(
    state: &FockState,
    alpha: Complex64,
    beta: Complex64,
    mode: &str,
) -> Result<ConstraintReport> {
    let residual = state
        .apply_annihilation(mode)?
        .scaled(alpha)
        .plus(&state.apply_creation(mode)?.scaled(beta.conj()))?;
    let m = state.registry().index_of(mode)?;
    let cutoff = state.registry().modes()[m].cutoff;
    let subcutoff = residual.projected_below(mode, cutoff.saturating_sub(2))?;
    let params = ConstraintParams {
        alpha,
        beta,
        ..ConstraintParams::none()
    };
    residual_report(
        ConstraintKind::PerModeAnnihilation,
        &residual,
        &subcutoff,
        params,
    )
}

/// Residual of (1 - sqrt(eps_final)) (alpha a + beta* a†)|state>, maximized
/// over the registered modes. Exactly zero for eps_final = 1.
pub fn check_out_annihilation(
    state: &FockState,
    alpha: Complex64,
    beta: Complex64,
    epsilon_final: f64,
) -> Result<ConstraintReport> {
    if !(epsilon_final >= 1.0) {
        return Err(Error::Domain(format!(
            "epsilon_final must be >= 1, got {epsilon_final}"
        )));
    }
    let prefactor = Complex64::new(1.0 - epsilon_final.sqrt(), 0.0);
    let params = ConstraintParams {
        epsilon_final,
        alpha,
        beta,
        ..ConstraintParams::none()
    };
    let mut worst = ConstraintReport {
        kind: ConstraintKind::OutAnnihilation,
        residual_indefinite_norm: 0.0,
        residual_positive_norm: 0.0,
        params,
        pass: true,
    };
    for spec in state.registry().modes().iter() {
        let residual = state
            .apply_annihilation(&spec.label)?
            .scaled(alpha)
            .plus(&state.apply_creation(&spec.label)?.scaled(beta.conj()))?
            .scaled(prefactor);
        let subcutoff = residual.projected_below(&spec.label, spec.cutoff.saturating_sub(2))?;
        let report = residual_report(
            ConstraintKind::OutAnnihilation,
            &residual,
            &subcutoff,
            params,
        )?;
        if report.residual_positive_norm >= worst.residual_positive_norm {
            worst.residual_positive_norm = report.residual_positive_norm;
        }
        if report.residual_indefinite_norm.abs() >= worst.residual_indefinite_norm.abs() {
            worst.residual_indefinite_norm = report.residual_indefinite_norm;
        }
        worst.pass &= report.pass;
    }
    Ok(worst)
}

/// Residual of (a†_long - a†_scalar)|state> over every matched pair, read
/// as a zero-norm statement: the vector is never zero, but its indefinite
/// norm must cancel. The positive norm is reported for context and does not
/// gate the verdict.
pub fn check_creation_constraint(state: &FockState) -> Result<ConstraintReport> {
    let pairs = paired_modes(state.registry())?;
    let mut indefinite: f64 = 0.0;
    let mut positive: f64 = 0.0;
    for (scalar, longitudinal) in &pairs {
        let residual = state
            .apply_creation(longitudinal)?
            .plus(&state.apply_creation(scalar)?.scaled(-Complex64::ONE))?;
        let inner = residual.indefinite_inner(&residual)?;
        if inner.re.abs() >= indefinite.abs() {
            indefinite = inner.re;
        }
        positive = positive.max(residual.positive_norm());
    }
    Ok(ConstraintReport {
        kind: ConstraintKind::CreationDifference,
        residual_indefinite_norm: indefinite,
        residual_positive_norm: positive,
        params: ConstraintParams::none(),
        pass: indefinite.abs() < INDEFINITE_PASS,
    })
}

/// Residual of the in-region Lorentz condition (a_long - a_scalar)|state>
/// over every matched pair, again as a zero-norm statement.
pub fn check_in_lorentz(state: &FockState) -> Result<ConstraintReport> {
    let pairs = paired_modes(state.registry())?;
    let mut indefinite: f64 = 0.0;
    let mut positive: f64 = 0.0;
    for (scalar, longitudinal) in &pairs {
        let residual = state
            .apply_annihilation(longitudinal)?
            .plus(&state.apply_annihilation(scalar)?.scaled(-Complex64::ONE))?;
        let inner = residual.indefinite_inner(&residual)?;
        if inner.re.abs() >= indefinite.abs() {
            indefinite = inner.re;
        }
        positive = positive.max(residual.positive_norm());
    }
    Ok(ConstraintReport {
        kind: ConstraintKind::InRegionLorentz,
        residual_indefinite_norm: indefinite,
        residual_positive_norm: positive,
        params: ConstraintParams::none(),
        pass: indefinite.abs() < INDEFINITE_PASS,
    })
}

/// Build the calibrated coherent state for `pair` and run the whole
/// constraint chain on it. Returns one report per constraint.
pub fn run_constraint_suite(
    pair: &BogolubovPair,
    cutoff: usize,
    calibration: f64,
) -> Result<Vec<ConstraintReport>> {
    let registry = unphysical_pair_registry(cutoff);
    let gamma = coherent_ratio(pair);
    let state = build_unphysical_state(
        &[UnphysicalPair::new("scalar", "longitudinal", gamma)],
        registry,
        calibration,
    )?;
    let eps_f = (pair.k / pair.omega_out).powi(2);
    let mut reports = vec![check_in_lorentz(&state)?];
    for mode in ["scalar", "longitudinal"] {
        let mut report = check_per_mode_constraint(&state, pair.alpha, pair.beta, mode)?;
        report.params.gamma = gamma;
        reports.push(report);
    }
    let mut out = check_out_annihilation(&state, pair.alpha, pair.beta, eps_f)?;
    out.params.gamma = gamma;
    reports.push(out);
    reports.push(check_creation_constraint(&state)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogolubov::sudden_coefficients;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn sudden_pair() -> BogolubovPair {
        sudden_coefficients(1.0, 1.69, 1.0).unwrap()
    }

    fn calibrated_state(cutoff: usize) -> FockState {
        let pair = sudden_pair();
        build_unphysical_state(
            &[UnphysicalPair::new(
                "scalar",
                "longitudinal",
                coherent_ratio(&pair),
            )],
            unphysical_pair_registry(cutoff),
            DEFAULT_CALIBRATION,
        )
        .unwrap()
    }

    fn random_state(cutoff: usize, seed: u64) -> FockState {
        let registry = unphysical_pair_registry(cutoff);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut state = FockState::zero(registry.clone());
        let vacuum = FockState::vacuum(registry);
        // Populate the low-lying levels with O(1) amplitudes.
        let mut basis = vec![vacuum.clone()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for b in &basis {
                next.push(b.apply_creation("scalar").unwrap());
                next.push(b.apply_creation("longitudinal").unwrap());
            }
            basis.extend(next);
        }
        for b in &basis {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            state = state.plus(&b.scaled(z)).unwrap();
        }
        state.normalized().unwrap()
    }

    #[test]
    fn zero_gamma_is_the_vacuum() {
        let state = build_unphysical_state(
            &[UnphysicalPair::new(
                "scalar",
                "longitudinal",
                Complex64::ZERO,
            )],
            unphysical_pair_registry(8),
            DEFAULT_CALIBRATION,
        )
        .unwrap();
        assert_eq!(state.amplitude(&[0, 0]).unwrap(), Complex64::ONE);
    }

    #[test]
    fn unphysical_state_populates_even_occupations_only() {
        let state = calibrated_state(20);
        for (occ, _) in state.iter_amplitudes() {
            assert_eq!(occ[0] % 2, 0, "scalar occupation odd at {occ:?}");
            assert_eq!(occ[1] % 2, 0, "longitudinal occupation odd at {occ:?}");
        }
        assert_relative_eq!(state.positive_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn registry_roles_are_enforced() {
        // Swapped roles: scalar label on the positive-metric mode.
        let result = build_unphysical_state(
            &[UnphysicalPair::new(
                "longitudinal",
                "scalar",
                Complex64::new(0.1, 0.0),
            )],
            unphysical_pair_registry(8),
            DEFAULT_CALIBRATION,
        );
        assert!(matches!(result, Err(Error::Usage(_))));
    }

    #[test]
    fn per_mode_constraint_passes_on_vacuum_with_zero_beta() {
        let registry = unphysical_pair_registry(10);
        let vacuum = FockState::vacuum(registry);
        let report =
            check_per_mode_constraint(&vacuum, Complex64::ONE, Complex64::ZERO, "scalar").unwrap();
        assert!(report.pass);
        assert_eq!(report.residual_indefinite_norm, 0.0);
        assert_eq!(report.residual_positive_norm, 0.0);
    }

    #[test]
    fn calibrated_state_passes_per_mode_constraint_on_both_sectors() {
        let pair = sudden_pair();
        let state = calibrated_state(30);
        for mode in ["scalar", "longitudinal"] {
            let report = check_per_mode_constraint(&state, pair.alpha, pair.beta, mode).unwrap();
            assert!(
                report.pass,
                "{mode}: indefinite {:.3e}, positive {:.3e}",
                report.residual_indefinite_norm, report.residual_positive_norm
            );
        }
    }

    #[test]
    fn uncalibrated_coherent_ratio_fails_per_mode_constraint() {
        let pair = sudden_pair();
        let state = build_unphysical_state(
            &[UnphysicalPair::new(
                "scalar",
                "longitudinal",
                coherent_ratio(&pair),
            )],
            unphysical_pair_registry(30),
            1.0,
        )
        .unwrap();
        let report =
            check_per_mode_constraint(&state, pair.alpha, pair.beta, "longitudinal").unwrap();
        assert!(!report.pass);
        assert!(report.residual_positive_norm > 1e-2);
    }

    #[test]
    fn random_states_fail_per_mode_constraint() {
        let pair = sudden_pair();
        let state = random_state(12, 7);
        let report = check_per_mode_constraint(&state, pair.alpha, pair.beta, "scalar").unwrap();
        assert!(!report.pass);
        assert!(report.residual_positive_norm > 1e-2);
    }

    #[test]
    fn out_annihilation_vanishes_identically_in_true_vacuum() {
        let state = random_state(12, 3);
        let report =
            check_out_annihilation(&state, Complex64::ONE, Complex64::new(0.3, 0.1), 1.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.residual_indefinite_norm, 0.0);
        assert_eq!(report.residual_positive_norm, 0.0);
    }

    #[test]
    fn out_annihilation_passes_through_the_constraint_for_calibrated_state() {
        let pair = sudden_pair();
        let state = calibrated_state(30);
        let report = check_out_annihilation(&state, pair.alpha, pair.beta, 1.69).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn out_annihilation_fails_on_vacuum_with_nonzero_beta() {
        let registry = unphysical_pair_registry(10);
        let vacuum = FockState::vacuum(registry);
        let report =
            check_out_annihilation(&vacuum, Complex64::ONE, Complex64::new(0.13, 0.0), 1.69)
                .unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn out_annihilation_residual_is_linear_in_the_prefactor() {
        let pair = sudden_pair();
        let state = random_state(12, 11);
        let r1 = check_out_annihilation(&state, pair.alpha, pair.beta, 1.21).unwrap(); // 1 - 1.1
        let r2 = check_out_annihilation(&state, pair.alpha, pair.beta, 1.69).unwrap(); // 1 - 1.3
        assert_relative_eq!(
            r2.residual_positive_norm / r1.residual_positive_norm,
            3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn creation_constraint_on_vacuum_is_zero_norm() {
        let registry = unphysical_pair_registry(10);
        let report = check_creation_constraint(&FockState::vacuum(registry)).unwrap();
        assert!(report.pass);
        assert!(report.residual_indefinite_norm.abs() < 1e-14);
        // The residual vector itself is not zero.
        assert_relative_eq!(
            report.residual_positive_norm,
            2f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn creation_constraint_passes_on_calibrated_state_at_cutoff_30() {
        let report = check_creation_constraint(&calibrated_state(30)).unwrap();
        assert!(
            report.pass,
            "indefinite residual {:.3e}",
            report.residual_indefinite_norm
        );
        assert!(report.residual_indefinite_norm.abs() < 1e-10);
    }

    #[test]
    fn creation_constraint_fails_without_a_cancellation_partner() {
        let registry = unphysical_pair_registry(10);
        let lopsided = FockState::vacuum(registry)
            .apply_square_exponential("longitudinal", Complex64::new(0.2, 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        let report = check_creation_constraint(&lopsided).unwrap();
        assert!(!report.pass);
        assert!(report.residual_indefinite_norm.abs() > 1e-2);
    }

    #[test]
    fn in_lorentz_holds_on_vacuum_and_calibrated_state() {
        let registry = unphysical_pair_registry(10);
        let vac = check_in_lorentz(&FockState::vacuum(registry)).unwrap();
        assert!(vac.pass);
        assert_eq!(vac.residual_positive_norm, 0.0);

        let coherent = check_in_lorentz(&calibrated_state(24)).unwrap();
        assert!(coherent.pass);
        assert!(coherent.residual_positive_norm > 0.0);
    }

    #[test]
    fn creation_residual_is_stable_under_extra_paired_squeezing() {
        let base = calibrated_state(30);
        let extra = Complex64::new(0.04, 0.02);
        let more = base
            .apply_square_exponential("longitudinal", extra)
            .unwrap()
            .apply_square_exponential("scalar", -extra)
            .unwrap()
            .normalized()
            .unwrap();
        let r_base = check_creation_constraint(&base).unwrap();
        let r_more = check_creation_constraint(&more).unwrap();
        assert!(r_base.pass && r_more.pass);
        assert!(r_more.residual_indefinite_norm.abs() < 1e-10);
    }

    #[test]
    fn per_mode_pass_implies_aggregate_pass() {
        let pair = sudden_pair();
        let state = calibrated_state(30);
        let per_mode_ok = ["scalar", "longitudinal"].iter().all(|m| {
            check_per_mode_constraint(&state, pair.alpha, pair.beta, m)
                .unwrap()
                .pass
        });
        assert!(per_mode_ok);
        let aggregate = check_out_annihilation(&state, pair.alpha, pair.beta, 1.69).unwrap();
        assert!(aggregate.pass);
    }

    #[test]
    fn suite_runs_every_constraint_and_passes() {
        let pair = sudden_pair();
        let reports = run_constraint_suite(&pair, 30, DEFAULT_CALIBRATION).unwrap();
        assert_eq!(reports.len(), 5);
        for r in &reports {
            assert!(
                r.pass,
                "{} failed: {:.3e}",
                r.kind, r.residual_indefinite_norm
            );
        }
    }
}
