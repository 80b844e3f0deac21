//! Tree-level emission statistics for a classical current in the
//! time-dependent medium: the odd-photon selection rule and its sampling
//! signatures.
//!
//! The in-vacuum seen from the out-region is a pair-squeezed state, so a
//! single linear current insertion V = J a† + J* a can only produce final
//! states whose total photon number is odd: m vacuum pairs plus or minus
//! the one current photon. The perturbative term with m pairs feeds total
//! photon number 2m - 1, and the coherent sum over terms reassembles the
//! direct computation.
//!
//! Two mode layouts are provided. In the default two-mode layout the
//! current couples to mode k while vacuum pairs occupy (k, -k), which keeps
//! the back-to-back pair correlation observable. The compact single-mode
//! layout parks the pairs on the current's own mode; photon-number parity
//! is layout-independent.
//!
//! The spacetime overlap integrals of the interaction Hamiltonian enter
//! only as the one effective complex coupling J per mode; the fermion line
//! is a classical spectator.

use crate::error::{Error, Result};
use crate::fock::{
    squeezed_in_vacuum, FockState, MetricSign, ModeRegistry, SqueezePair, LEAKAGE_BUDGET,
};
use crate::parallel::indexed_map;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Largest current strength for which the single-insertion truncation is
/// meaningful.
pub const MAX_CURRENT: f64 = 0.5;

/// Events per deterministic sampling batch; fixed so results do not depend
/// on the worker count.
const SAMPLE_BATCH: u64 = 16_384;

/// Mode layout for the squeeze + insertion construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLayout {
    /// Current on mode k, vacuum pairs on (k, -k).
    TwoMode,
    /// Pairs share the current's mode.
    SingleMode,
}

/// Probability table over the total emitted photon number, conditioned on
/// emission at the given perturbative order.
#[derive(Debug, Clone)]
pub struct EmissionDistribution {
    /// (n, p_n) for every total photon number up to the populated maximum.
    pub counts: Vec<(usize, f64)>,
    /// (n_with, n_against, p) in the two-mode layout; empty otherwise.
    pub mode_resolved: Vec<(usize, usize, f64)>,
    /// None for the all-orders distribution, Some(m) for the m-pair term.
    pub order: Option<usize>,
    /// Truncation mass unaccounted for by the cutoff.
    pub leakage: f64,
}

impl EmissionDistribution {
    pub fn probability(&self, n: usize) -> f64 {
        self.counts.get(n).map(|&(_, p)| p).unwrap_or(0.0)
    }

    /// Total probability mass on even photon numbers.
    pub fn even_mass(&self) -> f64 {
        self.counts
            .iter()
            .filter(|(n, _)| n % 2 == 0)
            .map(|&(_, p)| p)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().map(|&(_, p)| p).sum()
    }

    /// Rows with nonzero probability, for emission.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.counts.iter().copied().filter(|&(_, p)| p > 0.0)
    }
}

fn check_inputs(j: Complex64, gamma: Complex64) -> Result<()> {
    if j == Complex64::ZERO {
        return Err(Error::Domain("current strength J must be nonzero".into()));
    }
    if j.norm() > MAX_CURRENT {
        return Err(Error::Domain(format!(
            "|J| = {} too large for the single-insertion truncation (max {MAX_CURRENT})",
            j.norm()
        )));
    }
    if gamma.norm() >= 1.0 {
        return Err(Error::NonNormalizable(format!(
            "|gamma| = {} >= 1",
            gamma.norm()
        )));
    }
    Ok(())
}

fn two_mode_registry(cutoff: usize) -> Arc<ModeRegistry> {
    Arc::new(
        ModeRegistry::from_specs(&[
            ("with", MetricSign::Positive, cutoff),
            ("against", MetricSign::Positive, cutoff),
        ])
        .expect("static registry is valid"),
    )
}

/// Squeezed in-vacuum for the requested layout, unit positive norm.
fn squeezed_vacuum_in_layout(
    gamma: Complex64,
    cutoff: usize,
    layout: PairLayout,
) -> Result<FockState> {
    match layout {
        PairLayout::TwoMode => squeezed_in_vacuum(
            &[SqueezePair::new("with", "against", gamma)],
            two_mode_registry(cutoff),
        ),
        PairLayout::SingleMode => {
            let registry = Arc::new(
                ModeRegistry::from_specs(&[("with", MetricSign::Positive, cutoff)])
                    .expect("static registry is valid"),
            );
            let state = FockState::vacuum(registry)
                .apply_square_exponential("with", gamma.conj() * 0.5)?
                .normalized()?;
            let residual = state.leakage() + state.boundary_mass();
            if residual >= LEAKAGE_BUDGET {
                return Err(Error::Cutoff {
                    have: cutoff,
                    suggested: cutoff * 2 + 8,
                    message: format!("single-mode squeeze residual {residual:.3e} over budget"),
                });
            }
            Ok(state)
        }
    }
}

/// V|state> with V = J a† + J* a on the current's mode.
fn insert_current(state: &FockState, j: Complex64) -> Result<FockState> {
    state
        .apply_creation("with")?
        .scaled(j)
        .plus(&state.apply_annihilation("with")?.scaled(j.conj()))
}

fn distribution_from_state(
    state: &FockState,
    order: Option<usize>,
    normalizer: f64,
    layout: PairLayout,
) -> EmissionDistribution {
    let weights = state.total_number_distribution();
    let n_max = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    let counts = weights
        .iter()
        .take(n_max + 1)
        .enumerate()
        .map(|(n, &w)| (n, w / normalizer))
        .collect();
    let mode_resolved = match layout {
        PairLayout::TwoMode => state
            .iter_amplitudes()
            .map(|(occ, amp)| (occ[0], occ[1], amp.norm_sqr() / normalizer))
            .collect(),
        PairLayout::SingleMode => Vec::new(),
    };
    EmissionDistribution {
        counts,
        mode_resolved,
        order,
        leakage: state.leakage() + state.boundary_mass(),
    }
}

/// Photon-number distribution of a single current insertion on the
/// pair-squeezed in-vacuum. Support is exactly the odd integers.
pub fn first_order_amplitudes(
    j: Complex64,
    gamma: Complex64,
    cutoff: usize,
) -> Result<EmissionDistribution> {
    first_order_amplitudes_in_layout(j, gamma, cutoff, PairLayout::TwoMode)
}

/// Layout-explicit variant of [`first_order_amplitudes`].
pub fn first_order_amplitudes_in_layout(
    j: Complex64,
    gamma: Complex64,
    cutoff: usize,
    layout: PairLayout,
) -> Result<EmissionDistribution> {
    check_inputs(j, gamma)?;
    let squeezed = squeezed_vacuum_in_layout(gamma, cutoff, layout)?;
    let inserted = insert_current(&squeezed, j)?;
    let total = inserted.positive_norm().powi(2);
    if total <= 0.0 {
        return Err(Error::Numerical(
            "insertion produced no emission amplitude".into(),
        ));
    }
    let leakage = inserted.leakage() + inserted.boundary_mass();
    if leakage >= LEAKAGE_BUDGET * total.max(1.0) {
        return Err(Error::Cutoff {
            have: cutoff,
            suggested: cutoff * 2 + 8,
            message: format!("insertion truncation residual {leakage:.3e} over budget"),
        });
    }
    Ok(distribution_from_state(&inserted, None, total, layout))
}

/// Per-term decomposition of the expansion: term m pairs m - 1 vacuum pairs
/// with one current photon and feeds total photon number 2m - 1 only. Each
/// term is normalized against the all-orders emission weight, so the terms
/// sum to the direct computation.
pub fn higher_order_terms(
    j: Complex64,
    gamma: Complex64,
    max_pairs: usize,
    cutoff: usize,
) -> Result<Vec<EmissionDistribution>> {
    check_inputs(j, gamma)?;
    if max_pairs == 0 {
        return Err(Error::Usage("max_pairs must be >= 1".into()));
    }
    if 2 * max_pairs + 1 > cutoff.saturating_sub(5) {
        return Err(Error::Cutoff {
            have: cutoff,
            suggested: 2 * max_pairs + 6,
            message: format!("{max_pairs} pair terms need headroom below the cutoff"),
        });
    }
    let registry = two_mode_registry(cutoff);
    // Analytic pair components of the in-vacuum: sqrt(1-|g|^2) (g*)^m |m,m>.
    let pair_amp = |m: usize| {
        Complex64::new((1.0 - gamma.norm_sqr()).sqrt(), 0.0) * gamma.conj().powu(m as u32)
    };
    let basis_pair = |m: usize| -> Result<FockState> {
        let mut state = FockState::zero(registry.clone());
        let mut unit = FockState::vacuum(registry.clone());
        for _ in 0..m {
            unit = unit.apply_creation("with")?.apply_creation("against")?;
        }
        // a†^m a†^m |0,0> = m! |m,m>; rescale to the bare basis tuple.
        let fact: f64 = (1..=m).map(|x| x as f64).product();
        state = state.plus(&unit.scaled(Complex64::new(1.0 / fact.max(1.0), 0.0)))?;
        Ok(state)
    };

    // All-orders emission weight from the direct route, used as the shared
    // normalizer for every term.
    let squeezed = squeezed_vacuum_in_layout(gamma, cutoff, PairLayout::TwoMode)?;
    let direct_total_weight = insert_current(&squeezed, j)?.positive_norm().powi(2);

    let mut terms = Vec::with_capacity(max_pairs);
    for m in 1..=max_pairs {
        let created = basis_pair(m - 1)?
            .scaled(pair_amp(m - 1))
            .apply_creation("with")?
            .scaled(j);
        let destroyed = basis_pair(m)?
            .scaled(pair_amp(m))
            .apply_annihilation("with")?
            .scaled(j.conj());
        let term = created.plus(&destroyed)?;
        // Shared all-orders normalizer, so the terms sum to the direct result.
        terms.push(distribution_from_state(
            &term,
            Some(m),
            direct_total_weight,
            PairLayout::TwoMode,
        ));
    }
    Ok(terms)
}

/// Deterministic sampling summary over photon-count events.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationSummary {
    pub events: u64,
    /// Empirical probability of an odd total count.
    pub p_odd: f64,
    pub mean_total: f64,
    pub var_total: f64,
    /// Covariance of the with/against mode counts (two-mode layout only).
    pub pair_covariance: Option<f64>,
    /// Fraction of events with three or more photons.
    pub frac_three_plus: f64,
}

#[derive(Default, Clone, Copy)]
struct BatchTally {
    odd: u64,
    sum_n: u64,
    sum_n_sq: u64,
    sum_w: u64,
    sum_a: u64,
    sum_wa: u64,
    three_plus: u64,
}

/// Draw photon-count events from `dist` and summarize the induced
/// correlations. Sampling is batched with one counter-mode RNG stream per
/// batch, so the summary is bit-reproducible for a given (seed, events)
/// regardless of worker count.
pub fn sample_arrival_correlations(
    dist: &EmissionDistribution,
    events: u64,
    seed: u64,
) -> Result<CorrelationSummary> {
    if events < 10_000 {
        return Err(Error::Usage(format!(
            "need at least 10^4 events, got {events}"
        )));
    }
    // Cumulative table over (n_with, n_against, p); totals-only fallback.
    let table: Vec<(usize, usize, f64)> = if dist.mode_resolved.is_empty() {
        dist.counts
            .iter()
            .filter(|&&(_, p)| p > 0.0)
            .map(|&(n, p)| (n, 0, p))
            .collect()
    } else {
        dist.mode_resolved
            .iter()
            .filter(|&&(_, _, p)| p > 0.0)
            .copied()
            .collect()
    };
    let mode_resolved = !dist.mode_resolved.is_empty();
    let mut cdf = Vec::with_capacity(table.len());
    let mut acc = 0.0;
    for &(w, a, p) in &table {
        acc += p;
        cdf.push((w, a, acc));
    }
    let total = acc;

    let batches = events.div_ceil(SAMPLE_BATCH);
    let tallies = indexed_map(batches as usize, |b| {
        let b = b as u64;
        let count = SAMPLE_BATCH.min(events - b * SAMPLE_BATCH);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b + 1);
        let mut tally = BatchTally::default();
        for _ in 0..count {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&(_, _, c)| c < u).min(cdf.len() - 1);
            let (w, a, _) = cdf[idx];
            let n = if mode_resolved { w + a } else { w };
            tally.odd += (n % 2) as u64;
            tally.sum_n += n as u64;
            tally.sum_n_sq += (n * n) as u64;
            tally.sum_w += w as u64;
            tally.sum_a += a as u64;
            tally.sum_wa += (w * a) as u64;
            tally.three_plus += u64::from(n >= 3);
        }
        tally
    });

    let mut total_tally = BatchTally::default();
    for t in tallies {
        total_tally.odd += t.odd;
        total_tally.sum_n += t.sum_n;
        total_tally.sum_n_sq += t.sum_n_sq;
        total_tally.sum_w += t.sum_w;
        total_tally.sum_a += t.sum_a;
        total_tally.sum_wa += t.sum_wa;
        total_tally.three_plus += t.three_plus;
    }

    let ev = events as f64;
    let mean = total_tally.sum_n as f64 / ev;
    let var = total_tally.sum_n_sq as f64 / ev - mean * mean;
    let pair_covariance = mode_resolved.then(|| {
        let mw = total_tally.sum_w as f64 / ev;
        let ma = total_tally.sum_a as f64 / ev;
        total_tally.sum_wa as f64 / ev - mw * ma
    });
    Ok(CorrelationSummary {
        events,
        p_odd: total_tally.odd as f64 / ev,
        mean_total: mean,
        var_total: var.max(0.0),
        pair_covariance,
        frac_three_plus: total_tally.three_plus as f64 / ev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GAMMA: Complex64 = Complex64::new(0.13, 0.0);
    const J: Complex64 = Complex64::new(0.3, 0.0);

    /// Independent closed form: p_{2m+1} = (m+1) |g|^{2m} (1 - |g|^2)^2.
    fn odd_weight(m: usize, gamma_sq: f64) -> f64 {
        (m as f64 + 1.0) * gamma_sq.powi(m as i32) * (1.0 - gamma_sq) * (1.0 - gamma_sq)
    }

    #[test]
    fn zero_gamma_emits_exactly_one_photon() {
        let dist = first_order_amplitudes(J, Complex64::ZERO, 20).unwrap();
        assert_relative_eq!(dist.probability(1), 1.0, max_relative = 1e-12);
        assert!(dist.even_mass() < 1e-15);
        let nonzero: Vec<_> = dist.support().collect();
        assert_eq!(nonzero, vec![(1, 1.0)]);
    }

    #[test]
    fn squeezed_background_matches_closed_form() {
        let dist = first_order_amplitudes(J, GAMMA, 40).unwrap();
        let g2 = GAMMA.norm_sqr();
        for m in 0..10 {
            assert!(
                (dist.probability(2 * m + 1) - odd_weight(m, g2)).abs() < 1e-12,
                "n = {}",
                2 * m + 1
            );
        }
        assert!(dist.probability(3) > 0.0);
        assert_relative_eq!(dist.total_mass(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn even_mass_vanishes_identically() {
        let dist = first_order_amplitudes(J, Complex64::new(0.1, 0.07), 40).unwrap();
        assert!(dist.even_mass() < 1e-15);
        for layout in [PairLayout::TwoMode, PairLayout::SingleMode] {
            let d = first_order_amplitudes_in_layout(J, GAMMA, 40, layout).unwrap();
            assert!(d.even_mass() < 1e-15, "{layout:?}");
        }
    }

    #[test]
    fn three_photon_events_have_back_to_back_pairs() {
        let dist = first_order_amplitudes(J, GAMMA, 40).unwrap();
        // n = 3 splits as (2,1) and (1,2) only: one pair plus the current
        // photon on "with", or the current absorbing against one pair.
        let mut splits: Vec<_> = dist
            .mode_resolved
            .iter()
            .filter(|&&(w, a, p)| w + a == 3 && p > 0.0)
            .map(|&(w, a, _)| (w, a))
            .collect();
        splits.sort();
        assert_eq!(splits, vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn input_validation() {
        assert!(matches!(
            first_order_amplitudes(Complex64::ZERO, GAMMA, 30),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            first_order_amplitudes(Complex64::new(0.9, 0.0), GAMMA, 30),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            first_order_amplitudes(J, Complex64::ONE, 30),
            Err(Error::NonNormalizable(_))
        ));
        assert!(matches!(
            higher_order_terms(J, GAMMA, 20, 30),
            Err(Error::Cutoff { .. })
        ));
    }

    #[test]
    fn term_m_lives_on_2m_minus_1() {
        let terms = higher_order_terms(J, GAMMA, 6, 40).unwrap();
        assert_eq!(terms.len(), 6);
        for (i, term) in terms.iter().enumerate() {
            let m = i + 1;
            assert_eq!(term.order, Some(m));
            for (n, p) in term.support() {
                assert_eq!(n, 2 * m - 1, "term {m} leaked to n = {n} with p = {p}");
            }
        }
    }

    #[test]
    fn leading_term_scaling_in_gamma() {
        // The m = 2 term amplitude scales like J gamma*: its probability
        // mass scales like |gamma|^2 at small gamma.
        let p3_at = |g: f64| {
            let terms = higher_order_terms(J, Complex64::new(g, 0.0), 3, 40).unwrap();
            terms[1].probability(3)
        };
        let (a, b, c) = (p3_at(0.05), p3_at(0.1), p3_at(0.2));
        let slope_ab = (b / a).log2() / (0.1f64 / 0.05).log2();
        let slope_bc = (c / b).log2() / (0.2f64 / 0.1).log2();
        assert!((slope_ab - 2.0).abs() < 0.05, "slope {slope_ab}");
        assert!((slope_bc - 2.0).abs() < 0.15, "slope {slope_bc}");
    }

    #[test]
    fn terms_resum_to_the_direct_computation() {
        let direct = first_order_amplitudes(J, GAMMA, 40).unwrap();
        let terms = higher_order_terms(J, GAMMA, 9, 40).unwrap();
        let n_max = direct.counts.len();
        for n in 0..n_max {
            let summed: f64 = terms.iter().map(|t| t.probability(n)).sum();
            assert!(
                (summed - direct.probability(n)).abs() < 1e-10,
                "n = {n}: {summed} vs {}",
                direct.probability(n)
            );
        }
    }

    #[test]
    fn sampling_single_photon_support() {
        let dist = first_order_amplitudes(J, Complex64::ZERO, 20).unwrap();
        let summary = sample_arrival_correlations(&dist, 20_000, 42).unwrap();
        assert_eq!(summary.p_odd, 1.0);
        assert_eq!(summary.var_total, 0.0);
        assert_eq!(summary.mean_total, 1.0);
        assert_eq!(summary.frac_three_plus, 0.0);
    }

    #[test]
    fn sampling_matches_exact_distribution_within_3_sigma() {
        let dist = first_order_amplitudes(J, GAMMA, 40).unwrap();
        let events = 200_000u64;
        let summary = sample_arrival_correlations(&dist, events, 7).unwrap();
        assert_eq!(summary.p_odd, 1.0);
        let p3 = dist.probability(3);
        let sigma = (p3 * (1.0 - p3) / events as f64).sqrt();
        assert!(
            (summary.frac_three_plus - (1.0 - dist.probability(1))).abs() < 3.0 * sigma + 1e-9,
            "frac {} vs p(n>=3) {}",
            summary.frac_three_plus,
            1.0 - dist.probability(1)
        );
    }

    #[test]
    fn sampling_is_reproducible_and_seed_sensitive() {
        let dist = first_order_amplitudes(J, GAMMA, 40).unwrap();
        let a = sample_arrival_correlations(&dist, 50_000, 1234).unwrap();
        let b = sample_arrival_correlations(&dist, 50_000, 1234).unwrap();
        assert_eq!(a.mean_total, b.mean_total);
        assert_eq!(a.var_total, b.var_total);
        assert_eq!(a.frac_three_plus, b.frac_three_plus);

        let c = sample_arrival_correlations(&dist, 50_000, 4321).unwrap();
        assert_ne!(a.mean_total, c.mean_total);
        // Different seeds still agree statistically.
        let sigma = (dist.probability(3) / 50_000f64).sqrt();
        assert!((a.frac_three_plus - c.frac_three_plus).abs() < 6.0 * sigma + 1e-9);
    }

    #[test]
    fn sampling_requires_enough_events() {
        let dist = first_order_amplitudes(J, GAMMA, 40).unwrap();
        assert!(matches!(
            sample_arrival_correlations(&dist, 100, 1),
            Err(Error::Usage(_))
        ));
    }
}
