//! Sectioned key-value scenario files.
//!
//! Grammar: `[section]` headers, `key = value` lines, `#` comments. Lists
//! are comma separated. Parsing collects every problem it finds (unknown
//! keys, type mismatches, range violations, missing sections) instead of
//! stopping at the first one.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::analysis::Quantity;
use crate::basis::MAX_ORDER;
use crate::error::Error;
use crate::mesh::DiscretizationSpec;
use crate::solver::{Formulation, LateralBoundary, SpongeLayer};
use crate::sources::SpatialShape;
use crate::stratification::EquationOfState;

/// Seabed shape as written in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub enum TopographyConfig {
    Flat,
    Bumps { b: f64, k_x: f64, f_x: f64, r_x: f64, center: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub height: f64,
    pub topography: TopographyConfig,
}

/// Temperature samples, from a file or inline.
#[derive(Debug, Clone, PartialEq)]
pub enum TemperatureSource {
    File(PathBuf),
    Inline { z: Vec<f64>, t: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StratificationConfig {
    /// Exponential density with constant `c0` and `N`.
    ConstantN { rho_bottom: f64, sound_speed: f64, n: f64 },
    /// Hydrostatic integration of a temperature profile.
    Temperature { profile: TemperatureSource, eos: EquationOfState },
}

/// Time dependence of the seabed source.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalConfig {
    SmoothedRect { s_t: f64, t0: f64, r_t: f64 },
    Ricker { s_t: f64, t0: f64 },
    /// Band-limited noise under a smoothed-rectangle envelope; sampled at
    /// `sample_dt` and seeded from the run seed.
    Noise { f_max: f64, sample_dt: f64, s_t: f64, t0: f64, r_t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub spatial: SpatialShape,
    pub temporal: TemporalConfig,
    pub delay: f64,
}

/// Which formulations a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationChoice {
    Velocity,
    Potential,
    Both,
}

impl FormulationChoice {
    pub fn name(self) -> &'static str {
        match self {
            FormulationChoice::Velocity => "velocity",
            FormulationChoice::Potential => "potential",
            FormulationChoice::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "velocity" => Some(FormulationChoice::Velocity),
            "potential" => Some(FormulationChoice::Potential),
            "both" => Some(FormulationChoice::Both),
            _ => None,
        }
    }

    pub fn formulations(self) -> Vec<Formulation> {
        match self {
            FormulationChoice::Velocity => vec![Formulation::Velocity],
            FormulationChoice::Potential => vec![Formulation::Potential],
            FormulationChoice::Both => vec![Formulation::Velocity, Formulation::Potential],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub formulation: FormulationChoice,
    pub t_end: f64,
    /// Fixed step; `None` selects `safety × stable_dt`.
    pub dt: Option<f64>,
    pub safety: f64,
    pub lateral: LateralBoundary,
    pub recovery_cadence: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    pub id: String,
    pub x: f64,
    pub z: f64,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Surface vertical-displacement traces at these `x`.
    pub surface_points: Vec<f64>,
    /// Steps between recorded samples.
    pub record_every: usize,
    /// Steps between field snapshots; 0 disables.
    pub snapshot_every: usize,
    pub energy: bool,
    /// Steps between remainder evaluations (potential runs); 0 disables.
    pub remainder_every: usize,
    /// STFT window in seconds for receiver spectrograms; 0 disables.
    pub spectrogram_window: f64,
    /// Upper frequency of the bandwidth search.
    pub spectrogram_f_max: f64,
    /// Time window averaged by the bandwidth measurement.
    pub bandwidth_window: Option<(f64, f64)>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            surface_points: Vec::new(),
            record_every: 1,
            snapshot_every: 0,
            energy: true,
            remainder_every: 0,
            spectrogram_window: 0.0,
            spectrogram_f_max: 20.0,
            bandwidth_window: None,
        }
    }
}

/// A complete, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub domain: DomainConfig,
    pub discretization: DiscretizationSpec,
    pub gravity: f64,
    pub p_atm: f64,
    pub stratification: StratificationConfig,
    pub source: SourceConfig,
    pub run: RunConfig,
    pub sponge: Option<SpongeLayer>,
    pub receivers: Vec<ReceiverConfig>,
    pub output: OutputConfig,
}

/// One problem found while parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub section: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "[{}] line {l}: {}", self.section, self.message),
            None => write!(f, "[{}]: {}", self.section, self.message),
        }
    }
}

/// Every problem found in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl From<ConfigErrors> for Error {
    fn from(e: ConfigErrors) -> Self {
        Error::Config(e.to_string())
    }
}

pub const REQUIRED_SECTIONS: [&str; 5] = ["domain", "discretization", "stratification", "source", "run"];
const OPTIONAL_SECTIONS: [&str; 4] = ["scenario", "sponge", "receivers", "output"];

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
}

/// Typed access to one section, recording issues as it goes.
struct Reader<'a> {
    name: &'a str,
    section: Option<&'a mut Section>,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn issue(&mut self, line: Option<usize>, message: String) {
        self.issues.push(ConfigIssue {
            section: self.name.to_string(),
            line,
            message,
        });
    }

    fn line(&self) -> Option<usize> {
        self.section.as_ref().map(|s| s.line)
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        let entry = self.section.as_mut()?.entries.get_mut(key)?;
        entry.used = true;
        Some((entry.value.clone(), entry.line))
    }

    fn has(&self, key: &str) -> bool {
        self.section.as_ref().is_some_and(|s| s.entries.contains_key(key))
    }

    fn parsed<T>(&mut self, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let (value, line) = self.raw(key)?;
        match parse(&value) {
            Some(v) => Some(v),
            None => {
                self.issue(Some(line), format!("`{key}` expects {what}, found {value:?}"));
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        if self.section.is_some() && !self.has(key) {
            let line = self.line();
            self.issue(line, format!("missing required key `{key}`"));
            return None;
        }
        self.parsed(key, what, parse)
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        self.required(key, "a number", parse_f64)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Option<f64> {
        if self.has(key) {
            self.parsed(key, "a number", parse_f64)
        } else {
            Some(default)
        }
    }

    fn usize(&mut self, key: &str) -> Option<usize> {
        self.required(key, "a non-negative integer", |s| s.parse().ok())
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Option<usize> {
        if self.has(key) {
            self.parsed(key, "a non-negative integer", |s| s.parse().ok())
        } else {
            Some(default)
        }
    }

    fn word(&mut self, key: &str) -> Option<String> {
        self.required(key, "a word", |s| Some(s.to_string()))
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        self.parsed(key, "a comma-separated list of numbers", parse_list)
    }

    /// Checks a range and reports a violation at the key's line.
    fn check(&mut self, key: &str, ok: bool, message: &str) {
        if !ok {
            let line = self
                .section
                .as_ref()
                .and_then(|s| s.entries.get(key))
                .map(|e| e.line);
            self.issue(line, format!("`{key}` {message}"));
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "on" => Some(true),
        "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|v| parse_f64(v.trim())).collect()
}

fn tokenize(text: &str, issues: &mut Vec<ConfigIssue>) -> BTreeMap<String, Section> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                issues.push(ConfigIssue {
                    section: "file".into(),
                    line: Some(line),
                    message: format!("malformed section header {content:?}"),
                });
                current = None;
                continue;
            };
            let name = name.trim().to_string();
            if !REQUIRED_SECTIONS.contains(&name.as_str()) && !OPTIONAL_SECTIONS.contains(&name.as_str()) {
                issues.push(ConfigIssue {
                    section: name.clone(),
                    line: Some(line),
                    message: "unknown section".into(),
                });
            }
            if sections.contains_key(&name) {
                issues.push(ConfigIssue {
                    section: name.clone(),
                    line: Some(line),
                    message: "section appears twice".into(),
                });
            }
            sections.entry(name.clone()).or_insert(Section {
                line,
                entries: BTreeMap::new(),
                order: Vec::new(),
            });
            current = Some(name);
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(ConfigIssue {
                section: current.clone().unwrap_or_else(|| "file".into()),
                line: Some(line),
                message: format!("expected `key = value`, found {content:?}"),
            });
            continue;
        };
        let Some(name) = &current else {
            issues.push(ConfigIssue {
                section: "file".into(),
                line: Some(line),
                message: "key outside of any section".into(),
            });
            continue;
        };
        let section = sections.get_mut(name).expect("section registered");
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            issues.push(ConfigIssue {
                section: name.clone(),
                line: Some(line),
                message: format!("duplicate key `{key}`"),
            });
            continue;
        }
        section.order.push(key.clone());
        section.entries.insert(
            key,
            Entry {
                value: value.trim().to_string(),
                line,
                used: false,
            },
        );
    }
    sections
}

/// Parses and validates a scenario file. Relative file references are taken
/// relative to the working directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_config_in(text, Path::new(""))
}

/// Reads and parses a scenario file; relative file references resolve
/// against the file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(parse_config_in(&text, base)?)
}

/// [`parse_config`] with relative file references joined onto `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<ScenarioConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let mut sections = tokenize(text, &mut issues);
    for name in REQUIRED_SECTIONS {
        if !sections.contains_key(name) {
            issues.push(ConfigIssue {
                section: name.into(),
                line: None,
                message: "missing required section".into(),
            });
        }
    }

    macro_rules! reader {
        ($name:expr) => {
            Reader {
                name: $name,
                section: sections.get_mut($name),
                issues: &mut issues,
            }
        };
    }

    let name = {
        let mut r = reader!("scenario");
        if r.has("name") {
            r.word("name").unwrap_or_default()
        } else {
            "scenario".to_string()
        }
    };

    let mut domain = read_domain(&mut reader!("domain"));
    let discretization = read_discretization(&mut reader!("discretization"));
    let (gravity, p_atm, mut stratification) = read_stratification(&mut reader!("stratification"));
    let source = read_source(&mut reader!("source"));
    let run = read_run(&mut reader!("run"));
    let sponge = if sections.contains_key("sponge") {
        read_sponge(&mut reader!("sponge"))
    } else {
        None
    };
    let receivers = read_receivers(sections.get_mut("receivers"), &mut issues);
    let output = read_output(&mut reader!("output"));

    for (name, section) in &sections {
        if name == "receivers" {
            continue;
        }
        for key in &section.order {
            let entry = &section.entries[key];
            if !entry.used {
                issues.push(ConfigIssue {
                    section: name.clone(),
                    line: Some(entry.line),
                    message: format!("unknown key `{key}`"),
                });
            }
        }
    }

    let mut check_file = |section: &str, path: &mut PathBuf| {
        *path = base.join(&*path);
        if !path.is_file() {
            issues.push(ConfigIssue {
                section: section.into(),
                line: None,
                message: format!("referenced file {} does not exist", path.display()),
            });
        }
    };
    if let Some(DomainConfig { topography: TopographyConfig::Table { path }, .. }) = &mut domain {
        check_file("domain", path);
    }
    if let Some(StratificationConfig::Temperature { profile: TemperatureSource::File(path), .. }) = &mut stratification {
        check_file("stratification", path);
    }

    if let (Some(run), Some(out)) = (&run, &output) {
        if run.formulation != FormulationChoice::Velocity && out.record_every % run.recovery_cadence != 0 {
            issues.push(ConfigIssue {
                section: "output".into(),
                line: None,
                message: format!(
                    "record_every = {} must be a multiple of the recovery cadence {}",
                    out.record_every, run.recovery_cadence
                ),
            });
        }
    }

    if let (Some(d), Some(src)) = (&domain, &source) {
        let x0 = src.spatial.center();
        if x0 < d.x_min || x0 > d.x_max {
            issues.push(ConfigIssue {
                section: "source".into(),
                line: None,
                message: format!("source center {x0} lies outside [{}, {}]", d.x_min, d.x_max),
            });
        }
        for r in &receivers {
            if r.x < d.x_min || r.x > d.x_max || r.z < 0.0 || r.z > d.height {
                issues.push(ConfigIssue {
                    section: "receivers".into(),
                    line: None,
                    message: format!("receiver {} at ({}, {}) lies outside the domain", r.id, r.x, r.z),
                });
            }
        }
        if let Some(o) = &output {
            for &x in &o.surface_points {
                if x < d.x_min || x > d.x_max {
                    issues.push(ConfigIssue {
                        section: "output".into(),
                        line: None,
                        message: format!("surface point {x} lies outside [{}, {}]", d.x_min, d.x_max),
                    });
                }
            }
        }
        if let Some(s) = &sponge {
            if 2.0 * s.thickness >= d.x_max - d.x_min {
                issues.push(ConfigIssue {
                    section: "sponge".into(),
                    line: None,
                    message: "sponge layers cover the whole domain".into(),
                });
            }
        }
    }

    if !issues.is_empty() {
        return Err(ConfigErrors(issues));
    }
    Ok(ScenarioConfig {
        name,
        domain: domain.unwrap(),
        discretization: discretization.unwrap(),
        gravity: gravity.unwrap(),
        p_atm: p_atm.unwrap(),
        stratification: stratification.unwrap(),
        source: source.unwrap(),
        run: run.unwrap(),
        sponge,
        receivers,
        output: output.unwrap(),
    })
}

fn read_domain(r: &mut Reader) -> Option<DomainConfig> {
    let x_min = r.f64("x_min");
    let x_max = r.f64("x_max");
    let height = r.f64("height");
    if let (Some(a), Some(b)) = (x_min, x_max) {
        r.check("x_max", b > a, "must exceed x_min");
    }
    if let Some(h) = height {
        r.check("height", h > 0.0, "must be positive");
    }
    let kind = if r.has("topography") { r.word("topography") } else { Some("flat".into()) };
    let topography = match kind.as_deref() {
        Some("flat") => Some(TopographyConfig::Flat),
        Some("bumps") => {
            let b = r.f64("bump_height");
            let k_x = r.f64("bump_wavenumber");
            let f_x = r.f64("bump_steepness");
            let r_x = r.f64("bump_width");
            let center = r.f64("bump_center");
            if let Some(v) = b {
                r.check("bump_height", v >= 0.0, "must be non-negative");
            }
            if let Some(v) = f_x {
                r.check("bump_steepness", v > 0.0, "must be positive");
            }
            if let Some(v) = r_x {
                r.check("bump_width", v > 0.0, "must be positive");
            }
            Some(TopographyConfig::Bumps { b: b?, k_x: k_x?, f_x: f_x?, r_x: r_x?, center: center? })
        }
        Some("table") => r.word("topography_file").map(|p| TopographyConfig::Table { path: p.into() }),
        Some(other) => {
            r.check("topography", false, &format!("must be flat, bumps or table (found {other:?})"));
            None
        }
        None => None,
    };
    if let (Some(TopographyConfig::Bumps { b, .. }), Some(h)) = (&topography, height) {
        r.check("bump_height", 2.0 * b < h, "allows the seabed to reach the surface (2b ≥ height)");
    }
    Some(DomainConfig { x_min: x_min?, x_max: x_max?, height: height?, topography: topography? })
}

fn read_discretization(r: &mut Reader) -> Option<DiscretizationSpec> {
    let nx = r.usize("nx");
    let nz = r.usize("nz");
    let px = r.usize("px");
    let pz = r.usize("pz");
    for (key, v) in [("nx", nx), ("nz", nz)] {
        if let Some(v) = v {
            r.check(key, v >= 1, "must be at least 1");
        }
    }
    for (key, v) in [("px", px), ("pz", pz)] {
        if let Some(v) = v {
            r.check(
                key,
                (1..=MAX_ORDER).contains(&v),
                &format!("= {v} is outside the supported GLL orders 1..={MAX_ORDER} of the basis module"),
            );
        }
    }
    let spec = DiscretizationSpec { nx: nx?, nz: nz?, px: px?, pz: pz? };
    spec.validate().ok()?;
    Some(spec)
}

fn read_stratification(r: &mut Reader) -> (Option<f64>, Option<f64>, Option<StratificationConfig>) {
    let gravity = r.f64_or("gravity", 9.81);
    let p_atm = r.f64_or("p_atm", 101_325.0);
    if let Some(g) = gravity {
        r.check("gravity", g > 0.0, "must be positive");
    }
    let kind = r.word("kind");
    let strat = match kind.as_deref() {
        Some("constant_n") => {
            let rho = r.f64("rho_bottom");
            let c = r.f64("sound_speed");
            let n = r.f64("n");
            if let Some(v) = rho {
                r.check("rho_bottom", v > 0.0, "must be positive");
            }
            if let Some(v) = c {
                r.check("sound_speed", v > 0.0, "must be positive");
            }
            if let Some(v) = n {
                r.check("n", v >= 0.0, "must be non-negative");
            }
            (|| Some(StratificationConfig::ConstantN { rho_bottom: rho?, sound_speed: c?, n: n? }))()
        }
        Some("temperature") => {
            let profile = if r.has("temperature_file") {
                r.word("temperature_file").map(|p| TemperatureSource::File(p.into()))
            } else {
                let z = r.required("temperature_z", "a list of numbers", parse_list);
                let t = r.required("temperature_t", "a list of numbers", parse_list);
                match (z, t) {
                    (Some(z), Some(t)) => {
                        r.check("temperature_t", z.len() == t.len() && !z.is_empty(), "must match temperature_z in length");
                        Some(TemperatureSource::Inline { z, t })
                    }
                    _ => None,
                }
            };
            let rho_ref = r.f64("rho_ref");
            let alpha = r.f64("thermal_expansion");
            let t_ref = r.f64("t_ref");
            let eos = match r.word("eos").as_deref() {
                Some("linear") => {
                    let kappa = r.f64("compressibility");
                    if let Some(k) = kappa {
                        r.check("compressibility", k > 0.0, "must be positive");
                    }
                    (|| {
                        Some(EquationOfState::LinearCompressibility {
                            rho_ref: rho_ref?,
                            thermal_expansion: alpha?,
                            compressibility: kappa?,
                            t_ref: t_ref?,
                        })
                    })()
                }
                Some("incompressible") => {
                    let c = r.f64("sound_speed");
                    if let Some(v) = c {
                        r.check("sound_speed", v > 0.0, "must be positive");
                    }
                    (|| {
                        Some(EquationOfState::Incompressible {
                            rho_ref: rho_ref?,
                            thermal_expansion: alpha?,
                            t_ref: t_ref?,
                            sound_speed: c?,
                        })
                    })()
                }
                Some(other) => {
                    r.check("eos", false, &format!("must be linear or incompressible (found {other:?})"));
                    None
                }
                None => None,
            };
            if let Some(v) = rho_ref {
                r.check("rho_ref", v > 0.0, "must be positive");
            }
            (|| Some(StratificationConfig::Temperature { profile: profile?, eos: eos? }))()
        }
        Some(other) => {
            r.check("kind", false, &format!("must be constant_n or temperature (found {other:?})"));
            None
        }
        None => None,
    };
    (gravity, p_atm, strat)
}

fn read_source(r: &mut Reader) -> Option<SourceConfig> {
    let spatial = match r.word("spatial").as_deref() {
        Some("smoothed_rect") => {
            let a = r.f64_or("amplitude", 1.0);
            let s_x = r.f64("s_x");
            let r_x = r.f64("r_x");
            let x0 = r.f64("x0");
            if let Some(v) = r_x {
                r.check("r_x", v > 0.0, "must be positive");
            }
            (|| Some(SpatialShape::SmoothedRect { amplitude: a?, s_x: s_x?, r_x: r_x?, x0: x0? }))()
        }
        Some("gaussian_derivative") => {
            let a = r.f64("a");
            let s_x = r.f64("s_x");
            let x0 = r.f64("x0");
            (|| Some(SpatialShape::GaussianDerivative { a: a?, s_x: s_x?, x0: x0? }))()
        }
        Some("gaussian") => {
            let a = r.f64_or("amplitude", 1.0);
            let s_x = r.f64("s_x");
            let x0 = r.f64("x0");
            (|| Some(SpatialShape::Gaussian { amplitude: a?, s_x: s_x?, x0: x0? }))()
        }
        Some(other) => {
            r.check("spatial", false, &format!("must be smoothed_rect, gaussian_derivative or gaussian (found {other:?})"));
            None
        }
        None => None,
    };
    if r.has("s_x") {
        if let Some(SpatialShape::SmoothedRect { s_x, .. } | SpatialShape::GaussianDerivative { s_x, .. } | SpatialShape::Gaussian { s_x, .. }) = &spatial {
            let ok = *s_x > 0.0;
            r.check("s_x", ok, "must be positive");
        }
    }
    let temporal = match r.word("temporal").as_deref() {
        Some("smoothed_rect") => {
            let s_t = r.f64("s_t");
            let t0 = r.f64("t0");
            let r_t = r.f64("r_t");
            if let Some(v) = r_t {
                r.check("r_t", v > 0.0, "must be positive");
            }
            (|| Some(TemporalConfig::SmoothedRect { s_t: s_t?, t0: t0?, r_t: r_t? }))()
        }
        Some("ricker") => {
            let s_t = r.f64("s_t");
            let t0 = r.f64("t0");
            (|| Some(TemporalConfig::Ricker { s_t: s_t?, t0: t0? }))()
        }
        Some("noise") => {
            let f_max = r.f64("f_max");
            let sample_dt = r.f64("sample_dt");
            let s_t = r.f64("s_t");
            let t0 = r.f64("t0");
            let r_t = r.f64("r_t");
            if let (Some(f), Some(dt)) = (f_max, sample_dt) {
                r.check("f_max", f > 0.0 && f < 0.5 / dt, "must lie in (0, Nyquist of sample_dt)");
            }
            (|| Some(TemporalConfig::Noise { f_max: f_max?, sample_dt: sample_dt?, s_t: s_t?, t0: t0?, r_t: r_t? }))()
        }
        Some(other) => {
            r.check("temporal", false, &format!("must be smoothed_rect, ricker or noise (found {other:?})"));
            None
        }
        None => None,
    };
    if r.has("s_t") {
        let s_t = match &temporal {
            Some(TemporalConfig::SmoothedRect { s_t, .. } | TemporalConfig::Ricker { s_t, .. } | TemporalConfig::Noise { s_t, .. }) => Some(*s_t),
            None => None,
        };
        if let Some(v) = s_t {
            r.check("s_t", v > 0.0, "must be positive");
        }
    }
    let delay = r.f64_or("delay", 0.0);
    if let Some(d) = delay {
        r.check("delay", d >= 0.0, "must be non-negative");
    }
    Some(SourceConfig { spatial: spatial?, temporal: temporal?, delay: delay? })
}

fn read_run(r: &mut Reader) -> Option<RunConfig> {
    let formulation = r.required("formulation", "velocity, potential or both", FormulationChoice::parse);
    let t_end = r.f64("t_end");
    if let Some(t) = t_end {
        r.check("t_end", t > 0.0, "must be positive");
    }
    let dt = if r.has("dt") {
        r.parsed("dt", "`auto` or a positive number", |s| match s {
            "auto" => Some(None),
            _ => parse_f64(s).filter(|v| *v > 0.0).map(Some),
        })
    } else {
        Some(None)
    };
    let safety = r.f64_or("safety", 0.95);
    if let Some(s) = safety {
        r.check("safety", s > 0.0 && s < 1.0, "must lie in (0, 1)");
    }
    let lateral = if r.has("lateral") {
        r.parsed("lateral", "natural or rigid", |s| match s {
            "natural" => Some(LateralBoundary::Natural),
            "rigid" => Some(LateralBoundary::Rigid),
            _ => None,
        })
    } else {
        Some(LateralBoundary::Natural)
    };
    let cadence = r.usize_or("recovery_cadence", 1);
    if let Some(c) = cadence {
        r.check("recovery_cadence", c >= 1, "must be at least 1");
    }
    let seed = if r.has("seed") {
        r.parsed("seed", "a non-negative integer", |s| s.parse().ok())
    } else {
        Some(0)
    };
    Some(RunConfig {
        formulation: formulation?,
        t_end: t_end?,
        dt: dt?,
        safety: safety?,
        lateral: lateral?,
        recovery_cadence: cadence?,
        seed: seed?,
    })
}

fn read_sponge(r: &mut Reader) -> Option<SpongeLayer> {
    let thickness = r.f64("thickness");
    let strength = r.f64("strength");
    if let Some(t) = thickness {
        r.check("thickness", t > 0.0, "must be positive");
    }
    if let Some(s) = strength {
        r.check("strength", s >= 0.0, "must be non-negative");
    }
    let sides = if r.has("sides") {
        r.parsed("sides", "both, left or right", |s| match s {
            "both" => Some((true, true)),
            "left" => Some((true, false)),
            "right" => Some((false, true)),
            _ => None,
        })
    } else {
        Some((true, true))
    };
    let (left, right) = sides?;
    Some(SpongeLayer { thickness: thickness?, strength: strength?, left, right })
}

fn read_receivers(section: Option<&mut Section>, issues: &mut Vec<ConfigIssue>) -> Vec<ReceiverConfig> {
    let Some(section) = section else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for id in &section.order {
        let entry = section.entries.get_mut(id).expect("ordered key");
        entry.used = true;
        let parts: Vec<&str> = entry.value.split(',').map(str::trim).collect();
        let parsed = match parts.as_slice() {
            [x, z, q] => match (parse_f64(x), parse_f64(z), Quantity::parse(q)) {
                (Some(x), Some(z), Some(quantity)) => Some(ReceiverConfig { id: id.clone(), x, z, quantity }),
                _ => None,
            },
            _ => None,
        };
        match parsed {
            Some(r) => out.push(r),
            None => issues.push(ConfigIssue {
                section: "receivers".into(),
                line: Some(entry.line),
                message: format!(
                    "receiver `{id}` expects `x, z, quantity` with quantity one of vertical_displacement, vertical_velocity, pressure_proxy; found {:?}",
                    entry.value
                ),
            }),
        }
    }
    out
}

fn read_output(r: &mut Reader) -> Option<OutputConfig> {
    let d = OutputConfig::default();
    let surface_points = if r.has("surface_points") { r.list("surface_points") } else { Some(Vec::new()) };
    let record_every = r.usize_or("record_every", d.record_every);
    if let Some(v) = record_every {
        r.check("record_every", v >= 1, "must be at least 1");
    }
    let snapshot_every = r.usize_or("snapshot_every", d.snapshot_every);
    let energy = if r.has("energy") { r.parsed("energy", "true or false", parse_bool) } else { Some(d.energy) };
    let remainder_every = r.usize_or("remainder_every", d.remainder_every);
    let spectrogram_window = r.f64_or("spectrogram_window", d.spectrogram_window);
    if let Some(v) = spectrogram_window {
        r.check("spectrogram_window", v >= 0.0, "must be non-negative");
    }
    let spectrogram_f_max = r.f64_or("spectrogram_f_max", d.spectrogram_f_max);
    let bandwidth_window = if r.has("bandwidth_window") {
        r.parsed("bandwidth_window", "two times `t_start, t_end`", |s| match parse_list(s)?.as_slice() {
            [a, b] if b > a => Some(Some((*a, *b))),
            _ => None,
        })
    } else {
        Some(None)
    };
    Some(OutputConfig {
        surface_points: surface_points?,
        record_every: record_every?,
        snapshot_every: snapshot_every?,
        energy: energy?,
        remainder_every: remainder_every?,
        spectrogram_window: spectrogram_window?,
        spectrogram_f_max: spectrogram_f_max?,
        bandwidth_window: bandwidth_window?,
    })
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    /// Prints the scenario in the file format; `parse_config` reads it back
    /// to an equal value.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "[scenario]\nname = {}\n", self.name);

        let d = &self.domain;
        let _ = writeln!(w, "[domain]\nx_min = {}\nx_max = {}\nheight = {}", d.x_min, d.x_max, d.height);
        match &d.topography {
            TopographyConfig::Flat => {
                let _ = writeln!(w, "topography = flat");
            }
            TopographyConfig::Bumps { b, k_x, f_x, r_x, center } => {
                let _ = writeln!(
                    w,
                    "topography = bumps\nbump_height = {b}\nbump_wavenumber = {k_x}\nbump_steepness = {f_x}\nbump_width = {r_x}\nbump_center = {center}"
                );
            }
            TopographyConfig::Table { path } => {
                let _ = writeln!(w, "topography = table\ntopography_file = {}", path.display());
            }
        }

        let q = &self.discretization;
        let _ = writeln!(w, "\n[discretization]\nnx = {}\nnz = {}\npx = {}\npz = {}", q.nx, q.nz, q.px, q.pz);

        let _ = writeln!(w, "\n[stratification]\ngravity = {}\np_atm = {}", self.gravity, self.p_atm);
        match &self.stratification {
            StratificationConfig::ConstantN { rho_bottom, sound_speed, n } => {
                let _ = writeln!(w, "kind = constant_n\nrho_bottom = {rho_bottom}\nsound_speed = {sound_speed}\nn = {n}");
            }
            StratificationConfig::Temperature { profile, eos } => {
                let _ = writeln!(w, "kind = temperature");
                match profile {
                    TemperatureSource::File(p) => {
                        let _ = writeln!(w, "temperature_file = {}", p.display());
                    }
                    TemperatureSource::Inline { z, t } => {
                        let _ = writeln!(w, "temperature_z = {}\ntemperature_t = {}", list(z), list(t));
                    }
                }
                match eos {
                    EquationOfState::LinearCompressibility { rho_ref, thermal_expansion, compressibility, t_ref } => {
                        let _ = writeln!(
                            w,
                            "eos = linear\nrho_ref = {rho_ref}\nthermal_expansion = {thermal_expansion}\ncompressibility = {compressibility}\nt_ref = {t_ref}"
                        );
                    }
                    EquationOfState::Incompressible { rho_ref, thermal_expansion, t_ref, sound_speed } => {
                        let _ = writeln!(
                            w,
                            "eos = incompressible\nrho_ref = {rho_ref}\nthermal_expansion = {thermal_expansion}\nt_ref = {t_ref}\nsound_speed = {sound_speed}"
                        );
                    }
                }
            }
        }

        let src = &self.source;
        let _ = writeln!(w, "\n[source]");
        match src.spatial {
            SpatialShape::SmoothedRect { amplitude, s_x, r_x, x0 } => {
                let _ = writeln!(w, "spatial = smoothed_rect\namplitude = {amplitude}\ns_x = {s_x}\nr_x = {r_x}\nx0 = {x0}");
            }
            SpatialShape::GaussianDerivative { a, s_x, x0 } => {
                let _ = writeln!(w, "spatial = gaussian_derivative\na = {a}\ns_x = {s_x}\nx0 = {x0}");
            }
            SpatialShape::Gaussian { amplitude, s_x, x0 } => {
                let _ = writeln!(w, "spatial = gaussian\namplitude = {amplitude}\ns_x = {s_x}\nx0 = {x0}");
            }
        }
        match src.temporal {
            TemporalConfig::SmoothedRect { s_t, t0, r_t } => {
                let _ = writeln!(w, "temporal = smoothed_rect\ns_t = {s_t}\nt0 = {t0}\nr_t = {r_t}");
            }
            TemporalConfig::Ricker { s_t, t0 } => {
                let _ = writeln!(w, "temporal = ricker\ns_t = {s_t}\nt0 = {t0}");
            }
            TemporalConfig::Noise { f_max, sample_dt, s_t, t0, r_t } => {
                let _ = writeln!(
                    w,
                    "temporal = noise\nf_max = {f_max}\nsample_dt = {sample_dt}\ns_t = {s_t}\nt0 = {t0}\nr_t = {r_t}"
                );
            }
        }
        let _ = writeln!(w, "delay = {}", src.delay);

        let run = &self.run;
        let dt = run.dt.map_or("auto".to_string(), |v| v.to_string());
        let lateral = match run.lateral {
            LateralBoundary::Natural => "natural",
            LateralBoundary::Rigid => "rigid",
        };
        let _ = writeln!(
            w,
            "\n[run]\nformulation = {}\nt_end = {}\ndt = {dt}\nsafety = {}\nlateral = {lateral}\nrecovery_cadence = {}\nseed = {}",
            run.formulation.name(),
            run.t_end,
            run.safety,
            run.recovery_cadence,
            run.seed
        );

        if let Some(sp) = &self.sponge {
            let sides = match (sp.left, sp.right) {
                (true, false) => "left",
                (false, true) => "right",
                _ => "both",
            };
            let _ = writeln!(w, "\n[sponge]\nthickness = {}\nstrength = {}\nsides = {sides}", sp.thickness, sp.strength);
        }

        if !self.receivers.is_empty() {
            let _ = writeln!(w, "\n[receivers]");
            for r in &self.receivers {
                let _ = writeln!(w, "{} = {}, {}, {}", r.id, r.x, r.z, r.quantity.name());
            }
        }

        let o = &self.output;
        let _ = writeln!(
            w,
            "\n[output]\nsurface_points = {}\nrecord_every = {}\nsnapshot_every = {}\nenergy = {}\nremainder_every = {}\nspectrogram_window = {}\nspectrogram_f_max = {}",
            list(&o.surface_points),
            o.record_every,
            o.snapshot_every,
            o.energy,
            o.remainder_every,
            o.spectrogram_window,
            o.spectrogram_f_max
        );
        if let Some((a, b)) = o.bandwidth_window {
            let _ = writeln!(w, "bandwidth_window = {a}, {b}");
        }
        s
    }
}
