//! Truncated multimode Fock-space algebra with per-mode metric signature.
//!
//! States are dense complex amplitude vectors over occupation tuples
//! (n_1, ..., n_M) with n_m <= cutoff_m. Creation acts as the standard
//! ladder a†|n> = sqrt(n+1)|n+1>; amplitude pushed past the cutoff is
//! dropped and the dropped mass accumulates in the state's `leakage`
//! budget. Annihilation carries the metric sign of its mode,
//!
//! ```text
//!   a|n> = sign * sqrt(n)|n-1>,
//! ```
//!
//! so that [a, a†] = sign on states without support at the top levels.
//! Scalar-polarization modes carry sign -1, which is what makes the
//! indefinite (Gupta-Bleuler) inner product
//!
//! ```text
//!   <a|b> = sum over tuples of conj(a) b prod_m sign_m^(n_m)
//! ```
//!
//! cancel in the zero-norm constraint residuals checked in `gupta_bleuler`.
//!
//! Registry sizes stay small (tests use <= 4 modes at cutoff <= 40), so the
//! dense representation is exact and cheap; operator exponentials are
//! truncated power series with term-norm stopping at 1e-16, which is exact
//! in effect on a truncated space.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Truncation-leakage budget for accepted state constructions.
pub const LEAKAGE_BUDGET: f64 = 1e-10;

const SERIES_EPS: f64 = 1e-16;

/// Metric signature of one mode's sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSign {
    Positive,
    Negative,
}

impl MetricSign {
    pub fn value(self) -> f64 {
        match self {
            MetricSign::Positive => 1.0,
            MetricSign::Negative => -1.0,
        }
    }
}

/// One registered mode: a unique label, its metric sign, and the occupation
/// cutoff (highest occupation stored).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub label: String,
    pub metric_sign: MetricSign,
    pub cutoff: usize,
}

/// Ordered set of modes spanning a product Fock space. Negative metric is
/// reserved for scalar-polarization modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRegistry {
    modes: Vec<ModeSpec>,
    strides: Vec<usize>,
    dim: usize,
}

impl ModeRegistry {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Usage("registry needs at least one mode".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if m.cutoff < 1 {
                return Err(Error::Usage(format!(
                    "mode '{}' needs cutoff >= 1",
                    m.label
                )));
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::Usage(format!("duplicate mode label '{}'", m.label)));
            }
        }
        let mut strides = vec![0; modes.len()];
        let mut dim = 1usize;
        for (i, m) in modes.iter().enumerate().rev() {
            strides[i] = dim;
            dim = dim
                .checked_mul(m.cutoff + 1)
                .ok_or_else(|| Error::Usage("registry dimension overflows".into()))?;
        }
        Ok(ModeRegistry {
            modes,
            strides,
            dim,
        })
    }

    /// Convenience constructor from (label, sign, cutoff) triples.
    pub fn from_specs(specs: &[(&str, MetricSign, usize)]) -> Result<Self> {
        ModeRegistry::new(
            specs
                .iter()
                .map(|&(label, metric_sign, cutoff)| ModeSpec {
                    label: label.to_string(),
                    metric_sign,
                    cutoff,
                })
                .collect(),
        )
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::Usage(format!("mode '{label}' not registered")))
    }

    fn occupation_at(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.modes[mode].cutoff + 1)
    }

    /// Decode a flat index into the occupation tuple.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes.len())
            .map(|m| self.occupation_at(index, m))
            .collect()
    }

    fn total_occupation(&self, index: usize) -> usize {
        (0..self.modes.len())
            .map(|m| self.occupation_at(index, m))
            .sum()
    }

    fn metric_parity(&self, index: usize) -> f64 {
        let mut sign = 1.0;
        for (m, spec) in self.modes.iter().enumerate() {
            if spec.metric_sign == MetricSign::Negative && self.occupation_at(index, m) % 2 == 1 {
                sign = -sign;
            }
        }
        sign
    }

    pub fn max_total_occupation(&self) -> usize {
        self.modes.iter().map(|m| m.cutoff).sum()
    }
}

/// Immutable state vector over the registry's occupation basis.
#[derive(Debug, Clone)]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    amplitudes: Vec<Complex64>,
    leakage: f64,
}

impl FockState {
    /// |0, ..., 0>.
    pub fn vacuum(registry: Arc<ModeRegistry>) -> FockState {
        let mut amplitudes = vec![Complex64::ZERO; registry.dim()];
        amplitudes[0] = Complex64::ONE;
        FockState {
            registry,
            amplitudes,
            leakage: 0.0,
        }
    }

    /// Zero vector (carries leakage bookkeeping but no amplitude).
    pub fn zero(registry: Arc<ModeRegistry>) -> FockState {
        let amplitudes = vec![Complex64::ZERO; registry.dim()];
        FockState {
            registry,
            amplitudes,
            leakage: 0.0,
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    /// Accumulated amplitude mass dropped at cutoffs.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        if occupations.len() != self.registry.modes.len() {
            return Err(Error::Usage(format!(
                "expected {} occupations, got {}",
                self.registry.modes.len(),
                occupations.len()
            )));
        }
        let mut index = 0;
        for (m, (&n, spec)) in occupations.iter().zip(&self.registry.modes).enumerate() {
            if n > spec.cutoff {
                return Err(Error::Usage(format!(
                    "occupation {n} exceeds cutoff {} of mode '{}'",
                    spec.cutoff, spec.label
                )));
            }
            index += n * self.registry.strides[m];
        }
        Ok(self.amplitudes[index])
    }

    /// Iterate (occupation tuple, amplitude) over nonzero amplitudes.
    pub fn iter_amplitudes(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| (self.registry.occupations(i), a))
    }

    /// a†|n> = sqrt(n+1)|n+1>; mass at the cutoff layer is dropped into the
    /// leakage budget.
    pub fn apply_creation(&self, mode: &str) -> Result<FockState> {
        let m = self.registry.index_of(mode)?;
        let stride = self.registry.strides[m];
        let cutoff = self.registry.modes[m].cutoff;
        let mut out = vec![Complex64::ZERO; self.amplitudes.len()];
        let mut dropped = 0.0;
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            let n = self.registry.occupation_at(i, m);
            if n == cutoff {
                dropped += a.norm_sqr();
            } else {
                out[i + stride] = a * ((n + 1) as f64).sqrt();
            }
        }
        Ok(FockState {
            registry: self.registry.clone(),
            amplitudes: out,
            leakage: self.leakage + dropped,
        })
    }

    /// a|n> = sign sqrt(n)|n-1>. The metric sign rides on annihilation so
    /// that [a, a†] = sign away from the cutoff layer.
    pub fn apply_annihilation(&self, mode: &str) -> Result<FockState> {
        let m = self.registry.index_of(mode)?;
        let stride = self.registry.strides[m];
        let sign = self.registry.modes[m].metric_sign.value();
        let mut out = vec![Complex64::ZERO; self.amplitudes.len()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            let n = self.registry.occupation_at(i, m);
            if n > 0 {
                out[i - stride] = sign * a * (n as f64).sqrt();
            }
        }
        Ok(FockState {
            registry: self.registry.clone(),
            amplitudes: out,
            leakage: self.leakage,
        })
    }

    fn check_same_registry(&self, other: &FockState) -> Result<()> {
        if !Arc::ptr_eq(&self.registry, &other.registry) && *self.registry != *other.registry {
            return Err(Error::Usage("states live on different registries".into()));
        }
        Ok(())
    }

    /// Indefinite (Gupta-Bleuler) inner product <self|other>.
    pub fn indefinite_inner(&self, other: &FockState) -> Result<Complex64> {
        self.check_same_registry(other)?;
        let mut acc = Complex64::ZERO;
        for (i, (a, b)) in self.amplitudes.iter().zip(&other.amplitudes).enumerate() {
            if *a == Complex64::ZERO || *b == Complex64::ZERO {
                continue;
            }
            acc += a.conj() * b * self.registry.metric_parity(i);
        }
        Ok(acc)
    }

    /// Positive-metric inner product.
    pub fn positive_inner(&self, other: &FockState) -> Result<Complex64> {
        self.check_same_registry(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Positive-metric norm.
    pub fn positive_norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, z: Complex64) -> FockState {
        FockState {
            registry: self.registry.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * z).collect(),
            leakage: self.leakage,
        }
    }

    pub fn plus(&self, other: &FockState) -> Result<FockState> {
        self.check_same_registry(other)?;
        Ok(FockState {
            registry: self.registry.clone(),
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
            leakage: self.leakage + other.leakage,
        })
    }

    /// Rescale to unit positive-metric norm.
    pub fn normalized(&self) -> Result<FockState> {
        let n = self.positive_norm();
        if n < 1e-300 {
            return Err(Error::NonNormalizable(
                "state has vanishing positive norm".into(),
            ));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// <N_mode> in the positive metric (state assumed normalized).
    pub fn number_expectation(&self, mode: &str) -> Result<f64> {
        let m = self.registry.index_of(mode)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.registry.occupation_at(i, m) as f64 * a.norm_sqr())
            .sum())
    }

    /// Probability over the total photon number (positive metric).
    pub fn total_number_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.registry.max_total_occupation() + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != Complex64::ZERO {
                dist[self.registry.total_occupation(i)] += a.norm_sqr();
            }
        }
        dist
    }

    /// Amplitude mass sitting on any cutoff layer (n_m = cutoff_m).
    pub fn boundary_mass(&self) -> f64 {
        let mut mass = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == Complex64::ZERO {
                continue;
            }
            let on_boundary = (0..self.registry.modes.len())
                .any(|m| self.registry.occupation_at(i, m) == self.registry.modes[m].cutoff);
            if on_boundary {
                mass += a.norm_sqr();
            }
        }
        mass
    }

    /// Project out amplitudes with occupation of `mode` above `max_n`.
    pub fn projected_below(&self, mode: &str, max_n: usize) -> Result<FockState> {
        let m = self.registry.index_of(mode)?;
        let mut out = self.amplitudes.clone();
        for (i, a) in out.iter_mut().enumerate() {
            if self.registry.occupation_at(i, m) > max_n {
                *a = Complex64::ZERO;
            }
        }
        Ok(FockState {
            registry: self.registry.clone(),
            amplitudes: out,
            leakage: self.leakage,
        })
    }

    /// exp(coeff * a†_a a†_b) |self> by power series (a != b).
    pub fn apply_pair_exponential(
        &self,
        mode_a: &str,
        mode_b: &str,
        coeff: Complex64,
    ) -> Result<FockState> {
        if mode_a == mode_b {
            return Err(Error::Usage(
                "pair exponential needs two distinct modes; use apply_square_exponential".into(),
            ));
        }
        let mut acc = self.clone();
        let mut term = self.clone();
        for order in 1..=self.registry.max_total_occupation() {
            term = term
                .apply_creation(mode_a)?
                .apply_creation(mode_b)?
                .scaled(coeff / order as f64);
            acc = acc.plus(&term)?;
            if term.positive_norm() < SERIES_EPS * acc.positive_norm() {
                break;
            }
        }
        Ok(acc)
    }

    /// exp(coeff * a†² ) |self> on a single mode.
    pub fn apply_square_exponential(&self, mode: &str, coeff: Complex64) -> Result<FockState> {
        let mut acc = self.clone();
        let mut term = self.clone();
        for order in 1..=self.registry.max_total_occupation() {
            term = term
                .apply_creation(mode)?
                .apply_creation(mode)?
                .scaled(coeff / order as f64);
            acc = acc.plus(&term)?;
            if term.positive_norm() < SERIES_EPS * acc.positive_norm() {
                break;
            }
        }
        Ok(acc)
    }

    /// exp(J a† - J* a) |self> by power series of the full generator.
    fn apply_displacement_series(&self, mode: &str, j: Complex64) -> Result<FockState> {
        let mut acc = self.clone();
        let mut term = self.clone();
        // Generator norm is bounded by 2|J| sqrt(cutoff+1); the series
        // terminates well before order ~ e * that bound.
        for order in 1..10_000 {
            let created = term.apply_creation(mode)?.scaled(j);
            let destroyed = term.apply_annihilation(mode)?.scaled(-j.conj());
            term = created
                .plus(&destroyed)?
                .scaled(Complex64::new(1.0 / order as f64, 0.0));
            acc = acc.plus(&term)?;
            if term.positive_norm() < SERIES_EPS * acc.positive_norm() {
                break;
            }
        }
        Ok(acc)
    }
}

/// One two-mode squeeze: exp(gamma* a†_a a†_b) acting on the vacuum sector
/// of modes (a, b).
#[derive(Debug, Clone)]
pub struct SqueezePair {
    pub mode_a: String,
    pub mode_b: String,
    pub gamma: Complex64,
}

impl SqueezePair {
    pub fn new(mode_a: &str, mode_b: &str, gamma: Complex64) -> Self {
        SqueezePair {
            mode_a: mode_a.into(),
            mode_b: mode_b.into(),
            gamma,
        }
    }
}

fn pair_cutoff_for(gamma_abs: f64, budget: f64) -> usize {
    // Tail mass beyond n pairs is |gamma|^(2(n+1)); solve for the budget.
    if gamma_abs <= 0.0 {
        return 1;
    }
    let n = budget.ln() / (2.0 * gamma_abs.ln());
    (n.ceil() as usize).max(1) + 2
}

/// Two-mode squeezed vacuum over the listed pairs, normalized to unit
/// positive norm: exp(sum gamma* a†_j a†_{-j}) |0>. Every basis tuple with
/// nonzero amplitude has equal occupation in the paired modes, so the state
/// contains only correlated pairs.
pub fn squeezed_in_vacuum(pairs: &[SqueezePair], registry: Arc<ModeRegistry>) -> Result<FockState> {
    let mut state = FockState::vacuum(registry.clone());
    for pair in pairs {
        let g = pair.gamma.norm();
        if g >= 1.0 {
            return Err(Error::NonNormalizable(format!(
                "|gamma| = {g} >= 1 for pair ({}, {})",
                pair.mode_a, pair.mode_b
            )));
        }
        let need = pair_cutoff_for(g, LEAKAGE_BUDGET);
        let have = registry.modes[registry.index_of(&pair.mode_a)?]
            .cutoff
            .min(registry.modes[registry.index_of(&pair.mode_b)?].cutoff);
        if have < need {
            return Err(Error::Cutoff {
                have,
                suggested: need,
                message: format!("squeeze |gamma| = {g:.4} leaks more than {LEAKAGE_BUDGET:.0e}"),
            });
        }
        state = state.apply_pair_exponential(&pair.mode_a, &pair.mode_b, pair.gamma.conj())?;
    }
    let state = state.normalized()?;
    let residual = state.leakage() + state.boundary_mass();
    if residual >= LEAKAGE_BUDGET {
        return Err(Error::Cutoff {
            have: registry.modes.iter().map(|m| m.cutoff).min().unwrap_or(0),
            suggested: registry.modes.iter().map(|m| m.cutoff).max().unwrap_or(0) * 2,
            message: format!("squeeze truncation residual {residual:.3e} over budget"),
        });
    }
    Ok(state)
}

/// Displace `mode` by the classical source strength `J`:
/// exp(J a† - J* a) |state>. Unitary, so the norm must survive within the
/// leakage budget or the cutoff is too small.
pub fn displace(state: &FockState, mode: &str, j: Complex64) -> Result<FockState> {
    if j == Complex64::ZERO {
        return Ok(state.clone());
    }
    let out = state.apply_displacement_series(mode, j)?;
    // The truncated generator is exactly anti-Hermitian, so the norm always
    // survives; an undersized cutoff shows up as mass parked on the boundary
    // layer instead.
    let norm_defect = (out.positive_norm() - state.positive_norm()).abs();
    let residual = norm_defect + out.boundary_mass();
    if residual >= LEAKAGE_BUDGET {
        let m = state.registry.index_of(mode)?;
        let lambda = j.norm_sqr();
        let suggested = (lambda + 12.0 * lambda.sqrt() + 25.0).ceil() as usize;
        return Err(Error::Cutoff {
            have: state.registry.modes[m].cutoff,
            suggested: suggested.max(state.registry.modes[m].cutoff * 2),
            message: format!("displacement truncation residual {residual:.3e} over budget"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn single_mode(cutoff: usize, sign: MetricSign) -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::from_specs(&[("m", sign, cutoff)]).unwrap())
    }

    fn pair_registry(cutoff: usize) -> Arc<ModeRegistry> {
        Arc::new(
            ModeRegistry::from_specs(&[
                ("k", MetricSign::Positive, cutoff),
                ("-k", MetricSign::Positive, cutoff),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn registry_rejects_duplicates_and_zero_cutoffs() {
        assert!(ModeRegistry::from_specs(&[
            ("a", MetricSign::Positive, 3),
            ("a", MetricSign::Positive, 3)
        ])
        .is_err());
        assert!(ModeRegistry::from_specs(&[("a", MetricSign::Positive, 0)]).is_err());
        assert!(ModeRegistry::new(vec![]).is_err());
    }

    #[test]
    fn creation_raises_with_sqrt_factor() {
        let reg = single_mode(4, MetricSign::Positive);
        let one = FockState::vacuum(reg).apply_creation("m").unwrap();
        assert_eq!(one.amplitude(&[1]).unwrap(), Complex64::ONE);
        let two = one.apply_creation("m").unwrap();
        assert_relative_eq!(two.amplitude(&[2]).unwrap().re, 2f64.sqrt());
    }

    #[test]
    fn creation_at_cutoff_leaks_the_input_mass() {
        let reg = single_mode(2, MetricSign::Positive);
        let mut top = FockState::zero(reg);
        top.amplitudes[2] = Complex64::new(0.6, 0.8); // |2> with unit mass
        let pushed = top.apply_creation("m").unwrap();
        assert_eq!(pushed.positive_norm(), 0.0);
        assert_relative_eq!(pushed.leakage(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn number_operator_counts_quanta() {
        let reg = single_mode(6, MetricSign::Positive);
        let mut state = FockState::vacuum(reg);
        for _ in 0..3 {
            state = state.apply_creation("m").unwrap();
        }
        let state = state.normalized().unwrap();
        assert_relative_eq!(
            state.number_expectation("m").unwrap(),
            3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn vacuum_is_annihilated() {
        let reg = single_mode(3, MetricSign::Positive);
        let out = FockState::vacuum(reg).apply_annihilation("m").unwrap();
        assert_eq!(out.positive_norm(), 0.0);
    }

    #[test]
    fn commutator_equals_metric_sign_below_top_levels() {
        for sign in [MetricSign::Positive, MetricSign::Negative] {
            let reg = single_mode(8, sign);
            // Mixed state with support on n = 0, 1, 2.
            let mut state = FockState::vacuum(reg.clone());
            state = state
                .plus(&state.apply_creation("m").unwrap())
                .unwrap()
                .plus(
                    &FockState::vacuum(reg)
                        .apply_creation("m")
                        .unwrap()
                        .apply_creation("m")
                        .unwrap(),
                )
                .unwrap();
            let aad = state
                .apply_creation("m")
                .unwrap()
                .apply_annihilation("m")
                .unwrap();
            let ada = state
                .apply_annihilation("m")
                .unwrap()
                .apply_creation("m")
                .unwrap();
            let comm = aad.plus(&ada.scaled(-Complex64::ONE)).unwrap();
            let expect = state.scaled(Complex64::new(sign.value(), 0.0));
            let diff = comm.plus(&expect.scaled(-Complex64::ONE)).unwrap();
            // Exact up to one rounding of the sqrt(n) ladder products.
            assert!(diff.positive_norm() < 1e-14 * state.positive_norm());
        }
    }

    #[test]
    fn indefinite_inner_flips_sign_on_scalar_excitations() {
        let reg = Arc::new(
            ModeRegistry::from_specs(&[
                ("lambda0", MetricSign::Negative, 3),
                ("lambda3", MetricSign::Positive, 3),
            ])
            .unwrap(),
        );
        let vac = FockState::vacuum(reg);
        assert_eq!(vac.indefinite_inner(&vac).unwrap(), Complex64::ONE);

        let scalar = vac.apply_creation("lambda0").unwrap();
        assert_eq!(scalar.indefinite_inner(&scalar).unwrap(), -Complex64::ONE);

        // (a†_3 - a†_0)|0> has zero indefinite norm: +1 + (-1).
        let zero_norm = vac
            .apply_creation("lambda3")
            .unwrap()
            .plus(
                &vac.apply_creation("lambda0")
                    .unwrap()
                    .scaled(-Complex64::ONE),
            )
            .unwrap();
        assert_eq!(
            zero_norm.indefinite_inner(&zero_norm).unwrap(),
            Complex64::ZERO
        );
        assert_relative_eq!(zero_norm.positive_norm(), 2f64.sqrt());
    }

    #[test]
    fn inner_products_reject_mismatched_registries() {
        let a = FockState::vacuum(single_mode(3, MetricSign::Positive));
        let b = FockState::vacuum(single_mode(4, MetricSign::Positive));
        assert!(matches!(a.indefinite_inner(&b), Err(Error::Usage(_))));
    }

    #[test]
    fn zero_squeeze_is_the_vacuum() {
        let reg = pair_registry(10);
        let state =
            squeezed_in_vacuum(&[SqueezePair::new("k", "-k", Complex64::ZERO)], reg).unwrap();
        assert_eq!(state.amplitude(&[0, 0]).unwrap(), Complex64::ONE);
        assert_relative_eq!(state.positive_norm(), 1.0, max_relative = 1e-14);
    }

    /// Independent oracle: the two-mode squeezed vacuum in closed form,
    /// amplitudes sqrt(1 - |g|^2) (g*)^n on |n, n>.
    fn squeezed_closed_form(gamma: Complex64, cutoff: usize) -> Vec<Complex64> {
        let mut amps = vec![Complex64::ZERO; (cutoff + 1) * (cutoff + 1)];
        let norm = (1.0 - gamma.norm_sqr()).sqrt();
        let mut coeff = Complex64::new(norm, 0.0);
        for n in 0..=cutoff {
            amps[n * (cutoff + 1) + n] = coeff;
            coeff *= gamma.conj();
        }
        amps
    }

    #[test]
    fn squeezed_state_matches_closed_form_and_geometric_law() {
        let gamma = Complex64::new(0.5, 0.0); // |gamma|^2 = 0.25
        let cutoff = 40;
        let reg = pair_registry(cutoff);
        let state = squeezed_in_vacuum(&[SqueezePair::new("k", "-k", gamma)], reg).unwrap();

        let oracle = squeezed_closed_form(gamma, cutoff);
        for n in 0..=cutoff {
            let got = state.amplitude(&[n, n]).unwrap();
            assert!(
                (got - oracle[n * (cutoff + 1) + n]).norm() < 1e-12,
                "n = {n}"
            );
        }

        let dist = state.total_number_distribution();
        assert_relative_eq!(dist[0], 0.75, max_relative = 1e-12);
        assert_relative_eq!(dist[2], 0.1875, max_relative = 1e-12);
        for n in 0..=15 {
            let expect = 0.75 * 0.25f64.powi(n as i32);
            assert!((dist[2 * n] - expect).abs() < 1e-10, "n = {n}");
        }
        // Odd-photon mass in the paired sector vanishes identically.
        let odd: f64 = dist.iter().skip(1).step_by(2).sum();
        assert!(odd < 1e-12);
        assert_relative_eq!(state.positive_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_amplitudes_vanish_off_the_pair_diagonal() {
        let reg = pair_registry(16);
        let state = squeezed_in_vacuum(
            &[SqueezePair::new("k", "-k", Complex64::new(0.3, 0.2))],
            reg,
        )
        .unwrap();
        for (occ, amp) in state.iter_amplitudes() {
            assert_eq!(occ[0], occ[1], "amplitude {amp} at {occ:?}");
        }
    }

    #[test]
    fn squeeze_domain_and_cutoff_errors() {
        let reg = pair_registry(10);
        assert!(matches!(
            squeezed_in_vacuum(&[SqueezePair::new("k", "-k", Complex64::ONE)], reg.clone()),
            Err(Error::NonNormalizable(_))
        ));
        // |gamma| = 0.9 needs far more than 10 levels for a 1e-10 budget.
        match squeezed_in_vacuum(
            &[SqueezePair::new("k", "-k", Complex64::new(0.9, 0.0))],
            reg,
        ) {
            Err(Error::Cutoff {
                suggested, have, ..
            }) => {
                assert!(suggested > have);
            }
            other => panic!("expected cutoff error, got {other:?}"),
        }
    }

    #[test]
    fn displacement_of_vacuum_is_poissonian() {
        let cutoff = 30;
        let reg = single_mode(cutoff, MetricSign::Positive);
        let j = Complex64::new(0.3f64.sqrt(), 0.0); // |J|^2 = 0.3
        let state = displace(&FockState::vacuum(reg), "m", j).unwrap();
        assert!((state.positive_norm() - 1.0).abs() < 1e-10);

        let dist = state.total_number_distribution();
        let lambda = 0.3f64;
        let mut weight = (-lambda).exp(); // Poisson(n; lambda), built up iteratively
        for (n, item) in dist.iter().enumerate().take(20) {
            assert!((item - weight).abs() < 1e-10, "n = {n}");
            weight *= lambda / (n + 1) as f64;
        }
    }

    #[test]
    fn displacement_by_zero_is_identity() {
        let reg = single_mode(5, MetricSign::Positive);
        let state = FockState::vacuum(reg).apply_creation("m").unwrap();
        let out = displace(&state, "m", Complex64::ZERO).unwrap();
        assert_eq!(out.amplitude(&[1]).unwrap(), state.amplitude(&[1]).unwrap());
    }

    #[test]
    fn displacement_overflow_reports_cutoff() {
        let reg = single_mode(2, MetricSign::Positive);
        match displace(&FockState::vacuum(reg), "m", Complex64::new(2.0, 0.0)) {
            Err(Error::Cutoff { suggested, .. }) => assert!(suggested > 2),
            other => panic!("expected cutoff error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn geometric_pair_law_holds(re in -0.6f64..0.6, im in -0.35f64..0.35) {
            let gamma = Complex64::new(re, im);
            prop_assume!(gamma.norm_sqr() <= 0.5);
            let reg = pair_registry(40);
            let state = squeezed_in_vacuum(&[SqueezePair::new("k", "-k", gamma)], reg).unwrap();
            let dist = state.total_number_distribution();
            let g2 = gamma.norm_sqr();
            for n in 0..=15usize {
                let expect = (1.0 - g2) * g2.powi(n as i32);
                prop_assert!((dist[2 * n] - expect).abs() < 1e-10);
            }
        }
    }
}
