//! Flat sectioned run configuration.
//!
//! Grammar: `[section]` headers group `key = value` lines; `#` starts a
//! comment; blank lines are ignored. Unknown sections or keys are errors.
//! Every field has a default, so an empty config is valid. `emit` writes
//! the canonical normalized form (fixed section and key order), and
//! parse(emit(parse(x))) == parse(x).
//!
//! ```text
//! [profile]
//! kind = tanh              # step | tanh | tabulated
//! epsilon_initial = 1
//! epsilon_final = 1.69
//! t0 = 0
//! tau = 1
//! table =                  # path to a two-column (t, eps) file
//!
//! [grid]
//! k_min = 0.1
//! k_max = 10
//! points = 50
//! spacing = linear         # linear | log
//! volume = 1
//! ev_per_unit = 1
//!
//! [solver]
//! rel_tol = 1e-10
//! t_start = auto           # auto | <time>
//! t_end = auto
//!
//! [fock]
//! cutoff = 40
//! calibration = 0.5
//!
//! [radiation]
//! current = 0.3            # re[,im]
//! gamma = auto             # auto | re[,im]
//! k = 1
//! max_pairs = 8
//! events = 100000
//! seed = 42
//!
//! [output]
//! dir = out
//! ```

use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::PathBuf;
use vacrad_core::profiles::DielectricProfile;
use vacrad_core::spectrum::GridSpacing;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Step,
    Tanh,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Auto,
    At(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSource {
    /// Derive gamma from the profile at the radiation wavenumber.
    Auto,
    Fixed(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [profile]
    pub kind: ProfileKind,
    pub epsilon_initial: f64,
    pub epsilon_final: f64,
    pub t0: f64,
    pub tau: f64,
    pub table: Option<PathBuf>,
    // [grid]
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
    pub spacing: GridSpacing,
    pub volume: f64,
    pub ev_per_unit: f64,
    // [solver]
    pub rel_tol: f64,
    pub t_start: Bound,
    pub t_end: Bound,
    // [fock]
    pub cutoff: usize,
    pub calibration: f64,
    // [radiation]
    pub current: Complex64,
    pub gamma: GammaSource,
    pub k: f64,
    pub max_pairs: usize,
    pub events: u64,
    pub seed: u64,
    // [output]
    pub dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: ProfileKind::Tanh,
            epsilon_initial: 1.0,
            epsilon_final: 1.69,
            t0: 0.0,
            tau: 1.0,
            table: None,
            k_min: 0.1,
            k_max: 10.0,
            points: 50,
            spacing: GridSpacing::Linear,
            volume: 1.0,
            ev_per_unit: 1.0,
            rel_tol: 1e-10,
            t_start: Bound::Auto,
            t_end: Bound::Auto,
            cutoff: 40,
            calibration: 0.5,
            current: Complex64::new(0.3, 0.0),
            gamma: GammaSource::Auto,
            k: 1.0,
            max_pairs: 8,
            events: 100_000,
            seed: 42,
            dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: expected a number, got '{value}'"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: expected an integer, got '{value}'"))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: expected an integer, got '{value}'"))
}

fn parse_complex(key: &str, value: &str) -> Result<Complex64, String> {
    let mut parts = value.splitn(2, ',');
    let re = parse_f64(key, parts.next().unwrap_or("").trim())?;
    let im = match parts.next() {
        Some(im) => parse_f64(key, im.trim())?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

fn emit_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{},{}", z.re, z.im)
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment inside `section`.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let full = format!("{section}.{key}");
        match (section, key) {
            ("profile", "kind") => {
                self.kind = match value {
                    "step" => ProfileKind::Step,
                    "tanh" => ProfileKind::Tanh,
                    "tabulated" => ProfileKind::Tabulated,
                    other => return Err(format!("profile.kind: unknown kind '{other}'")),
                }
            }
            ("profile", "epsilon_initial") => self.epsilon_initial = parse_f64(&full, value)?,
            ("profile", "epsilon_final") => self.epsilon_final = parse_f64(&full, value)?,
            ("profile", "t0") => self.t0 = parse_f64(&full, value)?,
            ("profile", "tau") => self.tau = parse_f64(&full, value)?,
            ("profile", "table") => {
                self.table = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            ("grid", "k_min") => self.k_min = parse_f64(&full, value)?,
            ("grid", "k_max") => self.k_max = parse_f64(&full, value)?,
            ("grid", "points") => self.points = parse_usize(&full, value)?,
            ("grid", "spacing") => {
                self.spacing = match value {
                    "linear" => GridSpacing::Linear,
                    "log" => GridSpacing::Log,
                    other => return Err(format!("grid.spacing: unknown spacing '{other}'")),
                }
            }
            ("grid", "volume") => self.volume = parse_f64(&full, value)?,
            ("grid", "ev_per_unit") => self.ev_per_unit = parse_f64(&full, value)?,
            ("solver", "rel_tol") => self.rel_tol = parse_f64(&full, value)?,
            ("solver", "t_start") => {
                self.t_start = if value == "auto" {
                    Bound::Auto
                } else {
                    Bound::At(parse_f64(&full, value)?)
                }
            }
            ("solver", "t_end") => {
                self.t_end = if value == "auto" {
                    Bound::Auto
                } else {
                    Bound::At(parse_f64(&full, value)?)
                }
            }
            ("fock", "cutoff") => self.cutoff = parse_usize(&full, value)?,
            ("fock", "calibration") => self.calibration = parse_f64(&full, value)?,
            ("radiation", "current") => self.current = parse_complex(&full, value)?,
            ("radiation", "gamma") => {
                self.gamma = if value == "auto" {
                    GammaSource::Auto
                } else {
                    GammaSource::Fixed(parse_complex(&full, value)?)
                }
            }
            ("radiation", "k") => self.k = parse_f64(&full, value)?,
            ("radiation", "max_pairs") => self.max_pairs = parse_usize(&full, value)?,
            ("radiation", "events") => self.events = parse_u64(&full, value)?,
            ("radiation", "seed") => self.seed = parse_u64(&full, value)?,
            ("output", "dir") => self.dir = PathBuf::from(value),
            _ => return Err(format!("unknown configuration key '{full}'")),
        }
        Ok(())
    }

    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let mut config = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((head, _)) => head.trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(
                    name,
                    "profile" | "grid" | "solver" | "fock" | "radiation" | "output"
                ) {
                    return Err(format!("line {}: unknown section [{name}]", lineno + 1));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!("line {}: expected 'key = value', got '{line}'", lineno + 1)
            })?;
            if section.is_empty() {
                return Err(format!("line {}: key outside any [section]", lineno + 1));
            }
            config
                .set(&section, key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(config)
    }

    /// Apply a `section.key=value` override (CLI `--set`).
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), String> {
        let (path, value) = assignment.split_once('=').ok_or_else(|| {
            format!("override '{assignment}' is not of the form section.key=value")
        })?;
        let (section, key) = path.trim().split_once('.').ok_or_else(|| {
            format!("override '{assignment}' is not of the form section.key=value")
        })?;
        self.set(section.trim(), key.trim(), value.trim())
    }

    /// Canonical normalized form; parsing it back reproduces `self`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[profile]");
        let kind = match self.kind {
            ProfileKind::Step => "step",
            ProfileKind::Tanh => "tanh",
            ProfileKind::Tabulated => "tabulated",
        };
        let _ = writeln!(s, "kind = {kind}");
        let _ = writeln!(s, "epsilon_initial = {}", self.epsilon_initial);
        let _ = writeln!(s, "epsilon_final = {}", self.epsilon_final);
        let _ = writeln!(s, "t0 = {}", self.t0);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(
            s,
            "table = {}",
            self.table
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        );
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "k_min = {}", self.k_min);
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "points = {}", self.points);
        let spacing = match self.spacing {
            GridSpacing::Linear => "linear",
            GridSpacing::Log => "log",
        };
        let _ = writeln!(s, "spacing = {spacing}");
        let _ = writeln!(s, "volume = {}", self.volume);
        let _ = writeln!(s, "ev_per_unit = {}", self.ev_per_unit);
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "rel_tol = {}", self.rel_tol);
        match self.t_start {
            Bound::Auto => drop(writeln!(s, "t_start = auto")),
            Bound::At(t) => drop(writeln!(s, "t_start = {t}")),
        }
        match self.t_end {
            Bound::Auto => drop(writeln!(s, "t_end = auto")),
            Bound::At(t) => drop(writeln!(s, "t_end = {t}")),
        }
        let _ = writeln!(s, "\n[fock]");
        let _ = writeln!(s, "cutoff = {}", self.cutoff);
        let _ = writeln!(s, "calibration = {}", self.calibration);
        let _ = writeln!(s, "\n[radiation]");
        let _ = writeln!(s, "current = {}", emit_complex(self.current));
        match self.gamma {
            GammaSource::Auto => drop(writeln!(s, "gamma = auto")),
            GammaSource::Fixed(g) => drop(writeln!(s, "gamma = {}", emit_complex(g))),
        }
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "max_pairs = {}", self.max_pairs);
        let _ = writeln!(s, "events = {}", self.events);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}", self.dir.display());
        s
    }

    /// Build the dielectric profile described by the [profile] section.
    /// Tabulated profiles read their two-column (t, eps) file here.
    pub fn profile(&self) -> Result<DielectricProfile, String> {
        match self.kind {
            ProfileKind::Step => {
                DielectricProfile::step(self.epsilon_initial, self.epsilon_final, self.t0)
                    .map_err(|e| e.to_string())
            }
            ProfileKind::Tanh => {
                DielectricProfile::tanh(self.epsilon_initial, self.epsilon_final, self.t0, self.tau)
                    .map_err(|e| e.to_string())
            }
            ProfileKind::Tabulated => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or("profile.kind = tabulated needs profile.table = <path>")?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read table {}: {e}", path.display()))?;
                let mut samples = Vec::new();
                for (lineno, raw) in text.lines().enumerate() {
                    let line = match raw.split_once('#') {
                        Some((head, _)) => head.trim(),
                        None => raw.trim(),
                    };
                    if line.is_empty() {
                        continue;
                    }
                    let mut cols = line.split_whitespace();
                    let t: f64 = cols
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or(format!("table line {}: bad time column", lineno + 1))?;
                    let eps: f64 = cols
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or(format!("table line {}: bad eps column", lineno + 1))?;
                    samples.push((t, eps));
                }
                DielectricProfile::tabulated(samples).map_err(|e| e.to_string())
            }
        }
    }
}
