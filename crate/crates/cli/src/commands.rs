//! Subcommand implementations. Each command produces CSV artifacts plus a
//! run manifest; bodies are deterministic for a fixed configuration
//! (including the seed), so repeated runs are byte-identical. Only the
//! manifest's timestamp line varies between runs.

use crate::config::{Bound, GammaSource, RunConfig};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vacrad_core::bogolubov::{gamma_ratio, BogolubovPair};
use vacrad_core::fock::{squeezed_in_vacuum, MetricSign, ModeRegistry, SqueezePair};
use vacrad_core::gupta_bleuler::run_constraint_suite;
use vacrad_core::modes::evolve_mode;
use vacrad_core::profiles::DielectricProfile;
use vacrad_core::radiation::{
    first_order_amplitudes, higher_order_terms, sample_arrival_correlations,
};
use vacrad_core::spectrum::{
    band_fraction, build_spectrum, energy_per_row, integration_bounds, k_grid, mode_pair,
    total_energy,
};
use vacrad_core::Error as CoreError;

/// Error split that fixes the process exit code: configuration and usage
/// problems exit 1, numerical failures (tolerance or cutoff not met) exit 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Numerical(_) | CoreError::Cutoff { .. } => {
                CliError::Numerical(err.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CmdResult<T> = Result<T, CliError>;

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shared command state: resolved config, output directory, and the
/// artifact log that ends up in the manifest.
pub struct RunContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    artifacts: Vec<String>,
    started: Instant,
}

impl RunContext {
    pub fn new(config: RunConfig, out_dir: PathBuf) -> CmdResult<Self> {
        std::fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(RunContext {
            config,
            out_dir,
            artifacts: Vec::new(),
            started: Instant::now(),
        })
    }

    fn write_artifact(&mut self, name: &str, body: &str) -> CmdResult<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Write the run manifest: tool version, canonical config, artifact
    /// list. Timing shares the timestamp line, which is the only
    /// nondeterministic byte in a run's output.
    pub fn write_manifest(&mut self, subcommand: &str) -> CmdResult<()> {
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let elapsed_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let mut body = String::new();
        let _ = writeln!(body, "# vacrad run manifest");
        let _ = writeln!(body, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(body, "subcommand = {subcommand}");
        let _ = writeln!(body, "timestamp = {unix}s elapsed_ms = {elapsed_ms:.3}");
        let _ = writeln!(body, "artifacts = {}", self.artifacts.join(","));
        let _ = writeln!(body);
        body.push_str(&self.config.emit());
        let path = self.out_dir.join("manifest.txt");
        std::fs::write(&path, body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    fn profile(&self) -> CmdResult<DielectricProfile> {
        self.config.profile().map_err(CliError::Config)
    }

    fn bounds(&self, profile: &DielectricProfile) -> (f64, f64) {
        let (auto_start, auto_end) = integration_bounds(profile);
        let t_start = match self.config.t_start {
            Bound::Auto => auto_start,
            Bound::At(t) => t,
        };
        let t_end = match self.config.t_end {
            Bound::Auto => auto_end,
            Bound::At(t) => t,
        };
        (t_start, t_end)
    }

    fn grid(&self) -> CmdResult<Vec<f64>> {
        Ok(k_grid(
            self.config.k_min,
            self.config.k_max,
            self.config.points,
            self.config.spacing,
        )?)
    }

    /// Squeeze parameter: explicit, or derived from the profile at the
    /// radiation wavenumber.
    fn resolve_gamma(&self, profile: &DielectricProfile) -> CmdResult<Complex64> {
        match self.config.gamma {
            GammaSource::Fixed(g) => Ok(g),
            GammaSource::Auto => {
                if profile.epsilon_initial() == profile.epsilon_final()
                    && !matches!(profile, DielectricProfile::Tabulated { .. })
                {
                    return Ok(Complex64::ZERO);
                }
                let (pair, _) = mode_pair(profile, self.config.k, self.config.rel_tol)?;
                Ok(gamma_ratio(&pair))
            }
        }
    }

    fn derived_pair(&self, profile: &DielectricProfile) -> CmdResult<BogolubovPair> {
        Ok(mode_pair(profile, self.config.k, self.config.rel_tol)?.0)
    }

    /// `profile`: eps(t) on a uniform time grid spanning the transition.
    pub fn cmd_profile(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let (t_start, t_end) = self.bounds(&profile);
        let n = 501;
        let mut csv = String::from("t,epsilon\n");
        for i in 0..n {
            let t = t_start + (t_end - t_start) * i as f64 / (n - 1) as f64;
            let eps = profile.evaluate(t)?;
            let _ = writeln!(csv, "{},{}", fmt_f(t), fmt_f(eps));
        }
        self.write_artifact("profile.csv", &csv)?;
        println!(
            "profile: eps {} -> {} over [{}, {}]",
            profile.epsilon_initial(),
            profile.epsilon_final(),
            t_start,
            t_end
        );
        Ok(())
    }

    /// `modes`: trajectory of the mode at radiation.k.
    pub fn cmd_modes(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let (t_start, t_end) = self.bounds(&profile);
        let solution = evolve_mode(self.config.k, &profile, t_start, t_end, self.config.rel_tol)?;
        let mut csv = String::from("t,re_f,im_f,re_fdot,im_fdot,epsilon\n");
        for state in &solution.trajectory {
            let eps = profile.evaluate(state.t)?;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_f(state.t),
                fmt_f(state.f.re),
                fmt_f(state.f.im),
                fmt_f(state.fdot.re),
                fmt_f(state.fdot.im),
                fmt_f(eps)
            );
        }
        self.write_artifact("mode_trajectory.csv", &csv)?;
        println!(
            "modes: k = {}, {} accepted steps, current drift {:.3e}",
            self.config.k, solution.stats.accepted_steps, solution.stats.max_current_drift
        );
        Ok(())
    }

    /// `bogolubov`: per-mode coefficients over the k-grid.
    pub fn cmd_bogolubov(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let ks = self.grid()?;
        let table = build_spectrum(&profile, &ks, self.config.rel_tol, self.config.volume)?;
        let mut csv = String::from(
            "k,omega_in,omega_out,re_alpha,im_alpha,re_beta,im_beta,beta_sq,normalization_residual\n",
        );
        let mut failures = Vec::new();
        for row in &table.rows {
            match &row.note {
                None => {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{}",
                        fmt_f(row.k),
                        fmt_f(row.omega_in),
                        fmt_f(row.omega_out),
                        fmt_f(row.alpha.re),
                        fmt_f(row.alpha.im),
                        fmt_f(row.beta.re),
                        fmt_f(row.beta.im),
                        fmt_f(row.occupation),
                        fmt_f(row.normalization_residual)
                    );
                }
                Some(note) => failures.push(format!("k = {}: {note}", row.k)),
            }
        }
        self.write_artifact("bogolubov.csv", &csv)?;
        println!(
            "bogolubov: {} modes, {} failed",
            table.rows.len(),
            failures.len()
        );
        if !failures.is_empty() {
            return Err(CliError::Numerical(format!(
                "{} of {} modes failed: {}",
                failures.len(),
                table.rows.len(),
                failures.join("; ")
            )));
        }
        Ok(())
    }

    /// `spectrum`: N_k, dN/dw and per-bin energy over the k-grid.
    pub fn cmd_spectrum(&mut self, band: Option<(f64, f64)>) -> CmdResult<()> {
        let profile = self.profile()?;
        let ks = self.grid()?;
        let table = build_spectrum(&profile, &ks, self.config.rel_tol, self.config.volume)?;
        let de = energy_per_row(&table);
        let mut csv = String::from("k,omega,n_k,dn_domega,de\n");
        for (row, de_row) in table.rows.iter().zip(&de) {
            if row.is_ok() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt_f(row.k),
                    fmt_f(row.omega_out),
                    fmt_f(row.occupation),
                    fmt_f(row.dn_domega),
                    fmt_f(*de_row)
                );
            }
        }
        self.write_artifact("spectrum.csv", &csv)?;
        let energy = total_energy(&table)?;
        println!(
            "spectrum: E = {:.6e} (natural units, V = {}, k_max = {})",
            energy.energy, table.volume, energy.k_max
        );
        if energy.flat_tail {
            eprintln!(
                "warning: spectrum is flat at k_max = {}; the total energy grows with the cutoff",
                energy.k_max
            );
        }
        if let Some((lo, hi)) = band {
            let fraction = band_fraction(&table, lo, hi, self.config.ev_per_unit)?;
            println!(
                "band [{lo}, {hi}] eV (scale {} eV/unit): fraction {:.6e}",
                self.config.ev_per_unit, fraction
            );
            if fraction == 0.0 {
                eprintln!("warning: band [{lo}, {hi}] misses the spectrum entirely");
            }
        }
        let failed = table.rows.iter().filter(|r| !r.is_ok()).count();
        if failed > 0 {
            return Err(CliError::Numerical(format!(
                "{failed} spectrum rows failed"
            )));
        }
        Ok(())
    }

    /// `squeeze`: two-mode squeezed in-vacuum and its pair distribution.
    pub fn cmd_squeeze(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let gamma = self.resolve_gamma(&profile)?;
        let cutoff = self.config.cutoff;
        let registry = ModeRegistry::from_specs(&[
            ("k", MetricSign::Positive, cutoff),
            ("-k", MetricSign::Positive, cutoff),
        ])?;
        let state = squeezed_in_vacuum(
            &[SqueezePair::new("k", "-k", gamma)],
            std::sync::Arc::new(registry),
        )?;

        let mut amps = String::from("n_k,n_minus_k,re_amp,im_amp\n");
        for (occ, amp) in state.iter_amplitudes() {
            if amp.norm() > 1e-14 {
                let _ = writeln!(
                    amps,
                    "{},{},{},{}",
                    occ[0],
                    occ[1],
                    fmt_f(amp.re),
                    fmt_f(amp.im)
                );
            }
        }
        self.write_artifact("squeezed_state.csv", &amps)?;

        let mut dist = String::from("n,probability\n");
        for (n, p) in state.total_number_distribution().iter().enumerate() {
            if *p > 0.0 {
                let _ = writeln!(dist, "{n},{}", fmt_f(*p));
            }
        }
        self.write_artifact("squeezed_distribution.csv", &dist)?;
        println!(
            "squeeze: gamma = {gamma}, <n_pairs> = {:.6e}, leakage = {:.3e}",
            state.number_expectation("k")?,
            state.leakage()
        );
        Ok(())
    }

    /// `constraints`: the covariant-quantization checks as a table.
    pub fn cmd_constraints(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let pair = self.derived_pair(&profile)?;
        let reports = run_constraint_suite(&pair, self.config.cutoff, self.config.calibration)?;
        let mut csv = String::from(
            "constraint,epsilon_final,re_alpha,im_alpha,re_beta,im_beta,re_gamma,im_gamma,indefinite_residual,positive_residual,verdict\n",
        );
        println!(
            "{:<20} {:>14} {:>14} verdict",
            "constraint", "indefinite", "positive"
        );
        for report in &reports {
            let p = report.params;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{}",
                report.kind,
                fmt_f(p.epsilon_final),
                fmt_f(p.alpha.re),
                fmt_f(p.alpha.im),
                fmt_f(p.beta.re),
                fmt_f(p.beta.im),
                fmt_f(p.gamma.re),
                fmt_f(p.gamma.im),
                fmt_f(report.residual_indefinite_norm),
                fmt_f(report.residual_positive_norm),
                if report.pass { "PASS" } else { "FAIL" }
            );
            println!(
                "{:<20} {:>14.3e} {:>14.3e} {}",
                report.kind.to_string(),
                report.residual_indefinite_norm,
                report.residual_positive_norm,
                if report.pass { "PASS" } else { "FAIL" }
            );
        }
        self.write_artifact("constraints.csv", &csv)?;
        Ok(())
    }

    /// `radiate`: odd-photon emission distribution, per-term table, and the
    /// sampled correlation summary.
    pub fn cmd_radiate(&mut self) -> CmdResult<()> {
        let profile = self.profile()?;
        let gamma = self.resolve_gamma(&profile)?;
        let j = self.config.current;
        let cutoff = self.config.cutoff;
        let dist = first_order_amplitudes(j, gamma, cutoff)?;

        let mut csv = String::from("n,probability\n");
        for (n, p) in dist.support() {
            let _ = writeln!(csv, "{n},{}", fmt_f(p));
        }
        self.write_artifact("distribution.csv", &csv)?;

        if self.config.max_pairs > 0 {
            let terms = higher_order_terms(j, gamma, self.config.max_pairs, cutoff)?;
            let mut term_csv = String::from("order,n,probability\n");
            for term in &terms {
                for (n, p) in term.support() {
                    let _ = writeln!(term_csv, "{},{n},{}", term.order.unwrap_or(0), fmt_f(p));
                }
            }
            self.write_artifact("terms.csv", &term_csv)?;
        }

        let summary = sample_arrival_correlations(&dist, self.config.events, self.config.seed)?;
        let mut block = String::new();
        let _ = writeln!(block, "events = {}", summary.events);
        let _ = writeln!(block, "seed = {}", self.config.seed);
        let _ = writeln!(block, "p_odd = {}", fmt_f(summary.p_odd));
        let _ = writeln!(block, "mean_total = {}", fmt_f(summary.mean_total));
        let _ = writeln!(block, "var_total = {}", fmt_f(summary.var_total));
        match summary.pair_covariance {
            Some(cov) => drop(writeln!(block, "pair_covariance = {}", fmt_f(cov))),
            None => drop(writeln!(block, "pair_covariance = n/a")),
        }
        let _ = writeln!(
            block,
            "frac_three_plus = {}",
            fmt_f(summary.frac_three_plus)
        );
        self.write_artifact("correlations.txt", &block)?;
        println!(
            "radiate: gamma = {gamma}, p_odd = {}, p(n>=3) = {:.6e}, even mass = {:.3e}",
            summary.p_odd,
            summary.frac_three_plus,
            dist.even_mass()
        );
        Ok(())
    }

    /// `config`: print the canonical normalized configuration.
    pub fn cmd_config(&mut self) -> CmdResult<()> {
        print!("{}", self.config.emit());
        Ok(())
    }
}

/// Default output directory: flag > config > VACRAD_OUT > "out".
pub fn resolve_out_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if config.dir == Path::new("out") {
        if let Ok(env_dir) = std::env::var("VACRAD_OUT") {
            if !env_dir.is_empty() {
                return PathBuf::from(env_dir);
            }
        }
    }
    config.dir.clone()
}
