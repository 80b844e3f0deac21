//! Photon-number spectra and radiated-energy estimates over a wavenumber
//! grid.
//!
//! Each grid point runs one mode integration and Bogolubov extraction
//! (in parallel when the `parallel` feature is on; ordering is fixed by the
//! grid either way). The occupation N_k = |beta_k|^2 is per mode and
//! polarization; mode counting uses the isotropic finite-volume density
//! k^2 L^3 / (2 pi^2) per polarization, and the two transverse
//! polarizations contribute a factor 2:
//!
//! ```text
//!   E = sum over grid of 2 w_out(k) N_k (k^2 L^3 / (2 pi^2)) dk.
//! ```
//!
//! Energies use out-region frequencies w_out = k / sqrt(eps_final); mapping
//! to laboratory units is the caller's `ev_per_unit` scale in
//! [`band_fraction`].

use crate::bogolubov::{extract_from_state, BogolubovPair};
use crate::error::{Error, Result};
use crate::modes::evolve_mode_endpoint;
use crate::parallel::indexed_map;
use crate::profiles::DielectricProfile;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One spectrum row. Failed integrations keep their wavenumber and carry
/// the failure text in `note`; numeric fields are NaN in that case.
#[derive(Debug, Clone)]
pub struct SpectrumRow {
    pub k: f64,
    pub omega_in: f64,
    pub omega_out: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// N_k = |beta|^2, photons per mode and polarization.
    pub occupation: f64,
    /// dN/dw including the polarization degeneracy 2.
    pub dn_domega: f64,
    pub normalization_residual: f64,
    /// Maximum relative drift of the conserved current during integration.
    pub current_drift: f64,
    pub note: Option<String>,
}

impl SpectrumRow {
    pub fn is_ok(&self) -> bool {
        self.note.is_none()
    }
}

/// Spectrum over an ascending k-grid for one profile and volume.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
    pub volume: f64,
    pub k_max: f64,
    pub epsilon_final: f64,
}

/// Radiated-energy estimate. `flat_tail` warns that the spectrum has not
/// decayed at the grid edge, so the energy grows with k_max (the sudden
/// profile's flat spectrum is the canonical case).
#[derive(Debug, Clone, Copy)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub k_max: f64,
    pub flat_tail: bool,
    pub skipped_rows: usize,
}

/// Grid spacing for [`k_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Ascending wavenumber grid with `points` nodes on [k_min, k_max].
pub fn k_grid(k_min: f64, k_max: f64, points: usize, spacing: GridSpacing) -> Result<Vec<f64>> {
    if !(k_min > 0.0 && k_max > k_min) {
        return Err(Error::Domain(format!(
            "need 0 < k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 grid points, got {points}"
        )));
    }
    let n = points as f64 - 1.0;
    Ok((0..points)
        .map(|i| match spacing {
            GridSpacing::Linear => k_min + (k_max - k_min) * i as f64 / n,
            GridSpacing::Log => k_min * (k_max / k_min).powf(i as f64 / n),
        })
        .collect())
}

/// Integration bounds that sit safely in the asymptotic regions on both
/// sides of the transition.
pub fn integration_bounds(profile: &DielectricProfile) -> (f64, f64) {
    let (w_lo, w_hi) = profile.asymptotic_window();
    match profile {
        DielectricProfile::Step { t0, .. } => (t0 - 1.0, t0 + 1.0),
        DielectricProfile::Tanh { tau, .. } => (w_lo - 2.0 * tau, w_hi + 2.0 * tau),
        DielectricProfile::Tabulated { .. } => (w_lo, w_hi),
    }
}

/// Evolve and extract one mode between the profile's asymptotic bounds.
pub fn mode_pair(
    profile: &DielectricProfile,
    k: f64,
    rel_tol: f64,
) -> Result<(BogolubovPair, f64)> {
    let (t_start, t_end) = integration_bounds(profile);
    let (state, stats) = evolve_mode_endpoint(k, profile, t_start, t_end, rel_tol)?;
    let pair = extract_from_state(&state, profile)?;
    Ok((pair, stats.max_current_drift))
}

/// Run the sweep over `k_grid` and assemble the table. Row failures are
/// annotated, not fatal.
pub fn build_spectrum(
    profile: &DielectricProfile,
    k_grid: &[f64],
    rel_tol: f64,
    volume: f64,
) -> Result<SpectrumTable> {
    if k_grid.is_empty() {
        return Err(Error::Usage("empty wavenumber grid".into()));
    }
    if !(volume > 0.0) {
        return Err(Error::Domain(format!("volume must be > 0, got {volume}")));
    }
    let (tol_lo, tol_hi) = crate::modes::REL_TOL_RANGE;
    if !(rel_tol >= tol_lo && rel_tol <= tol_hi) {
        return Err(Error::Domain(format!(
            "rel_tol = {rel_tol} outside [{tol_lo}, {tol_hi}]"
        )));
    }
    for w in k_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Usage(format!(
                "k grid must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
    }
    if !(k_grid[0] > 0.0) {
        return Err(Error::Usage(format!(
            "k grid must be positive, starts at {}",
            k_grid[0]
        )));
    }

    let eps_f = profile.epsilon_final();
    let rows = indexed_map(k_grid.len(), |i| {
        let k = k_grid[i];
        match mode_pair(profile, k, rel_tol) {
            Ok((pair, drift)) => {
                let n_k = pair.occupation();
                SpectrumRow {
                    k,
                    omega_in: pair.omega_in,
                    omega_out: pair.omega_out,
                    alpha: pair.alpha,
                    beta: pair.beta,
                    occupation: n_k,
                    dn_domega: 2.0 * n_k * k * k * volume / (2.0 * PI * PI) * eps_f.sqrt(),
                    normalization_residual: pair.normalization_residual(),
                    current_drift: drift,
                    note: None,
                }
            }
            Err(err) => SpectrumRow {
                k,
                omega_in: f64::NAN,
                omega_out: f64::NAN,
                alpha: Complex64::new(f64::NAN, f64::NAN),
                beta: Complex64::new(f64::NAN, f64::NAN),
                occupation: f64::NAN,
                dn_domega: f64::NAN,
                normalization_residual: f64::NAN,
                current_drift: f64::NAN,
                note: Some(err.to_string()),
            },
        }
    });

    Ok(SpectrumTable {
        rows,
        volume,
        k_max: *k_grid.last().unwrap(),
        epsilon_final: eps_f,
    })
}

/// Trapezoid-style dk weights over the table's ok rows.
fn dk_weights(ks: &[f64]) -> Vec<f64> {
    let n = ks.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                0.0
            } else if i == 0 {
                0.5 * (ks[1] - ks[0])
            } else if i == n - 1 {
                0.5 * (ks[n - 1] - ks[n - 2])
            } else {
                0.5 * (ks[i + 1] - ks[i - 1])
            }
        })
        .collect()
}

/// Per-row energy contribution 2 w_out N_k k^2 V/(2 pi^2) dk, aligned with
/// `table.rows`. Failed rows contribute zero and carry zero weight.
pub fn energy_per_row(table: &SpectrumTable) -> Vec<f64> {
    let ok_ks: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| r.k)
        .collect();
    let weights = dk_weights(&ok_ks);
    let mut out = vec![0.0; table.rows.len()];
    let mut j = 0;
    for (i, row) in table.rows.iter().enumerate() {
        if row.is_ok() {
            out[i] = 2.0 * row.omega_out * row.occupation * row.k * row.k * table.volume
                / (2.0 * PI * PI)
                * weights[j];
            j += 1;
        }
    }
    out
}

/// Total radiated energy over the grid. Summation order is fixed by the
/// grid for reproducibility.
pub fn total_energy(table: &SpectrumTable) -> Result<EnergyEstimate> {
    let ok_rows: Vec<&SpectrumRow> = table.rows.iter().filter(|r| r.is_ok()).collect();
    if ok_rows.len() < 2 {
        return Err(Error::Usage(format!(
            "energy needs at least 2 valid rows, have {}",
            ok_rows.len()
        )));
    }
    let energy = energy_per_row(table).iter().sum();
    let peak = ok_rows.iter().map(|r| r.occupation).fold(0.0f64, f64::max);
    let flat_tail = peak > 0.0 && ok_rows.last().unwrap().occupation > 0.5 * peak;
    Ok(EnergyEstimate {
        energy,
        k_max: table.k_max,
        flat_tail,
        skipped_rows: table.rows.len() - ok_rows.len(),
    })
}

/// Fraction of the radiated energy with w_out inside [omega_lo, omega_hi],
/// measured after scaling frequencies by `ev_per_unit` (eV per natural
/// frequency unit). Returns 0 for bands that miss the spectrum entirely.
pub fn band_fraction(
    table: &SpectrumTable,
    omega_lo: f64,
    omega_hi: f64,
    ev_per_unit: f64,
) -> Result<f64> {
    if !(omega_lo < omega_hi) {
        return Err(Error::Domain(format!(
            "need omega_lo < omega_hi, got [{omega_lo}, {omega_hi}]"
        )));
    }
    if !(ev_per_unit > 0.0) {
        return Err(Error::Domain(format!(
            "ev_per_unit must be > 0, got {ev_per_unit}"
        )));
    }
    let total = total_energy(table)?;
    if total.energy <= 0.0 {
        return Ok(0.0);
    }
    let ok_rows: Vec<&SpectrumRow> = table.rows.iter().filter(|r| r.is_ok()).collect();
    let ks: Vec<f64> = ok_rows.iter().map(|r| r.k).collect();
    let weights = dk_weights(&ks);
    let mut in_band = 0.0;
    for (row, dk) in ok_rows.iter().zip(&weights) {
        let w_ev = row.omega_out * ev_per_unit;
        if w_ev >= omega_lo && w_ev <= omega_hi {
            in_band += 2.0 * row.omega_out * row.occupation * row.k * row.k * table.volume
                / (2.0 * PI * PI)
                * dk;
        }
    }
    Ok(in_band / total.energy)
}
