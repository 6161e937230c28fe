use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunError;
use crate::fock::{FockBasis, Particles, SparseOperator, MASTER_DIMENSION_CAP, TRAJECTORY_DIMENSION_CAP};
use crate::model::{ground_state, hubbard, kinetic_bilinear, Boundary, LatticeSpec};
use crate::observables::{ModePartition, ObservableSet};
use crate::probe::{
    build_channels, diagonal_coefficients, parse_diagonal_profile, parse_intersite_profile, ChannelKind, Coupling,
    Geometry, JumpChannel, Probe,
};
use crate::trajectory::{EngineConfig, JumpMode};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesName {
    Boson,
    Fermion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub species: SpeciesName,
    pub sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down: Option<usize>,
    pub tunneling: f64,
    #[serde(default)]
    pub interaction: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default = "default_master_cap")]
    pub master_cap: usize,
}

fn default_cap() -> usize {
    TRAJECTORY_DIMENSION_CAP
}

fn default_master_cap() -> usize {
    MASTER_DIMENSION_CAP
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryName {
    OddSites,
    Alternating,
    RMode,
    Custom,
    InterSite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelName {
    Density,
    Magnetization,
}

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub geometry: GeometryName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Number>>,
    /// `[i, j, re, im]` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bonds: Option<Vec<[f64; 4]>>,
    /// Text file with the profile, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega10: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default = "default_channels")]
    pub channels: Vec<ChannelName>,
    /// Subtracted from every measured operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

fn default_channels() -> Vec<ChannelName> {
    vec![ChannelName::Density]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Stochastic,
    NoPhoton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub t_final: f64,
    pub sample_interval: f64,
    pub seed: u64,
    #[serde(default = "one")]
    pub n_traj: usize,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_jump_tol")]
    pub jump_tol: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
}

fn one() -> usize {
    1
}
fn default_dt_max() -> f64 {
    EngineConfig::default().dt_max
}
fn default_rtol() -> f64 {
    EngineConfig::default().rtol
}
fn default_atol() -> f64 {
    EngineConfig::default().atol
}
fn default_jump_tol() -> f64 {
    EngineConfig::default().jump_tol
}
fn default_mode() -> ModeName {
    ModeName::Stochastic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// `ground_state`, `fock:<occupations>` or `file:<path>`.
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Named(String),
    Labels(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub name: String,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneSpec {
    pub name: String,
    pub zone: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    /// `probe` (group sites by probe coefficient), `odd_even`, or labels.
    #[serde(default = "default_partition")]
    pub partition: PartitionSpec,
    #[serde(default = "yes")]
    pub densities: bool,
    #[serde(default)]
    pub distributions: bool,
    #[serde(default)]
    pub mode_numbers: bool,
    #[serde(default)]
    pub measured: bool,
    #[serde(default)]
    pub kinetic: bool,
    #[serde(default)]
    pub imbalance: bool,
    #[serde(default)]
    pub correlations: Vec<PairSpec>,
    #[serde(default)]
    pub entropies: Vec<ZoneSpec>,
}

fn default_partition() -> PartitionSpec {
    PartitionSpec::Named("probe".into())
}
fn yes() -> bool {
    true
}

impl Default for ObservablesSection {
    fn default() -> Self {
        Self {
            partition: default_partition(),
            densities: true,
            distributions: false,
            mode_numbers: false,
            measured: false,
            kinetic: false,
            imbalance: false,
            correlations: Vec::new(),
            entropies: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Write one CSV per trajectory next to the aggregate.
    #[serde(default = "yes")]
    pub trajectories: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub probe: ProbeSection,
    pub engine: EngineSection,
    pub init: InitSection,
    #[serde(default)]
    pub observables: ObservablesSection,
    pub output: OutputSection,
}

/// Everything needed to run, built from a validated config.
pub struct Prepared {
    pub basis: FockBasis,
    pub lattice: LatticeSpec,
    pub h0: SparseOperator,
    pub channels: Vec<JumpChannel>,
    pub psi0: Vec<C64>,
    pub observables: ObservableSet,
    pub engine: EngineConfig,
}

/// Config text with its origin, for line-precise messages.
pub struct Source {
    pub path: PathBuf,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(path.to_path_buf(), e))?;
        Ok(Self { path: path.to_path_buf(), text })
    }

    /// 1-based line of `key` inside `[section]`, or of the section header
    /// when the key is absent.
    pub fn line_of(&self, section: &str, key: &str) -> usize {
        let mut in_section = false;
        let mut header = 1;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                let name = line.trim_matches(|c| c == '[' || c == ']').trim();
                in_section = name == section || name.starts_with(&format!("{section}."));
                if in_section {
                    header = n + 1;
                }
                continue;
            }
            if in_section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return n + 1;
                    }
                }
            }
        }
        header
    }

    fn error(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> RunError {
        RunError::Config(format!("{}:{}: [{section}] {key}: {msg}", self.path.display(), self.line_of(section, key)))
    }

    fn dir(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new("."))
    }
}

impl RunConfig {
    pub fn parse(source: &Source) -> Result<Self, RunError> {
        toml::from_str(&source.text).map_err(|e| {
            let line = e.span().map(|s| source.text[..s.start].matches('\n').count() + 1);
            let msg = e.message().to_string();
            match line {
                Some(l) => RunError::Config(format!("{}:{l}: {msg}", source.path.display())),
                None => RunError::Config(format!("{}: {msg}", source.path.display())),
            }
        })
    }

    /// Sorted-key JSON of everything that affects results; the output
    /// section is left out.
    pub fn canonical(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("output");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// A copy whose side files (profile, initial state) are copied into
    /// `dir`, with paths rewritten to point there.
    pub fn relocated(&self, source: &Source, dir: &Path) -> Result<Self, RunError> {
        let mut cfg = self.clone();
        let copy = |from: &Path, name: &str| -> Result<PathBuf, RunError> {
            let src = source.dir().join(from);
            std::fs::copy(&src, dir.join(name)).map_err(|e| RunError::Io(src, e))?;
            Ok(PathBuf::from(name))
        };
        if let Some(p) = &self.probe.profile {
            cfg.probe.profile = Some(copy(p, "profile.txt")?);
        }
        if let Some(p) = self.init.state.trim().strip_prefix("file:") {
            cfg.init.state = format!("file:{}", copy(Path::new(p.trim()), "initial_state.txt")?.display());
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn engine_config(&self) -> EngineConfig {
        let e = &self.engine;
        EngineConfig {
            dt_max: e.dt_max,
            rtol: e.rtol,
            atol: e.atol,
            jump_tol: e.jump_tol,
            t_final: e.t_final,
            sample_interval: e.sample_interval,
            seed: e.seed,
            mode: match e.mode {
                ModeName::Stochastic => JumpMode::Stochastic,
                ModeName::NoPhoton => JumpMode::NoPhoton,
            },
        }
    }

    /// Validates the config against itself and builds the operators.
    /// `cap` overrides the model's trajectory cap.
    pub fn prepare(&self, source: &Source, cap: Option<usize>) -> Result<Prepared, RunError> {
        let m = &self.model;
        let particles = match m.species {
            SpeciesName::Boson => {
                if m.up.is_some() || m.down.is_some() {
                    return Err(source.error("model", "up", "bosons take `particles`, not `up`/`down`"));
                }
                Particles::Bosons(m.particles.ok_or_else(|| source.error("model", "particles", "missing"))?)
            }
            SpeciesName::Fermion => {
                if m.particles.is_some() {
                    return Err(source.error("model", "particles", "fermions take `up` and `down`"));
                }
                Particles::Fermions {
                    up: m.up.ok_or_else(|| source.error("model", "up", "missing"))?,
                    down: m.down.ok_or_else(|| source.error("model", "down", "missing"))?,
                }
            }
        };
        let lattice = LatticeSpec { sites: m.sites, boundary: m.boundary, tunneling: m.tunneling, interaction: m.interaction }
            .validated()
            .map_err(|e| source.error("model", "sites", e))?;
        let basis = FockBasis::build(m.sites, particles, cap.unwrap_or(m.cap)).map_err(|e| match e {
            crate::Error::DimensionCap { .. } => RunError::Core(e),
            e => source.error("model", "sites", e),
        })?;
        let h0 = hubbard(&basis, &lattice).map_err(|e| source.error("model", "interaction", e))?;

        let probe = self.probe(source, m.sites)?;
        if basis.species() == crate::fock::Species::Boson && probe.channels.contains(&ChannelKind::Magnetization) {
            return Err(source.error("probe", "channels", "magnetization channels need fermions"));
        }
        let mut channels = build_channels(&basis, &lattice, &probe).map_err(|e| {
            let key = match e {
                crate::Error::NotNearestNeighbor(..) | crate::Error::SiteOutOfRange { .. } => "bonds",
                crate::Error::GeometryLength { .. } => "coefficients",
                _ => "geometry",
            };
            source.error("probe", key, e)
        })?;
        if let Some(s) = self.probe.shift {
            channels = channels.iter().map(|c| c.recentered(s)).collect::<crate::Result<_>>().map_err(|e| source.error("probe", "shift", e))?;
        }

        let engine = self.engine_config().validated().map_err(|e| source.error("engine", "t_final", e))?;
        if self.engine.n_traj == 0 {
            return Err(source.error("engine", "n_traj", "must be at least 1"));
        }
        let psi0 = self.initial_state(source, &basis, &h0)?;
        let observables = self.observable_set(source, &basis, &lattice, &probe, &channels)?;
        Ok(Prepared { basis, lattice, h0, channels, psi0, observables, engine })
    }

    fn probe(&self, source: &Source, sites: usize) -> Result<Probe, RunError> {
        let p = &self.probe;
        let read_profile = |path: &PathBuf| {
            let full = source.dir().join(path);
            std::fs::read_to_string(&full).map_err(|e| source.error("probe", "profile", format!("{}: {e}", full.display())))
        };
        let geometry = match p.geometry {
            GeometryName::OddSites => Geometry::OddSites,
            GeometryName::Alternating => Geometry::Alternating,
            GeometryName::RMode => Geometry::RMode(p.modes.ok_or_else(|| source.error("probe", "modes", "r_mode needs `modes`"))?),
            GeometryName::Custom => {
                let coeffs = match (&p.coefficients, &p.profile) {
                    (Some(c), None) => c.iter().map(|x| x.value()).collect(),
                    (None, Some(path)) => parse_diagonal_profile(&read_profile(path)?).map_err(|e| source.error("probe", "profile", e))?,
                    _ => return Err(source.error("probe", "coefficients", "custom geometry needs exactly one of `coefficients` or `profile`")),
                };
                Geometry::CustomDiagonal(coeffs)
            }
            GeometryName::InterSite => {
                let terms = match (&p.bonds, &p.profile) {
                    (Some(rows), None) => rows
                        .iter()
                        .map(|&[i, j, re, im]| {
                            if i < 0.0 || j < 0.0 || i.fract() != 0.0 || j.fract() != 0.0 {
                                return Err(source.error("probe", "bonds", format!("site indices must be non-negative integers, got {i}, {j}")));
                            }
                            Ok((i as usize, j as usize, C64::new(re, im)))
                        })
                        .collect::<Result<_, _>>()?,
                    (None, Some(path)) => parse_intersite_profile(&read_profile(path)?).map_err(|e| source.error("probe", "profile", e))?,
                    _ => return Err(source.error("probe", "bonds", "inter_site geometry needs exactly one of `bonds` or `profile`")),
                };
                Geometry::InterSite(terms)
            }
        };
        if geometry.is_diagonal() {
            diagonal_coefficients(&geometry, sites).map_err(|e| {
                let key = if p.geometry == GeometryName::RMode { "modes" } else { "coefficients" };
                source.error("probe", key, e)
            })?;
        }
        let coupling = match (p.gamma, p.omega10, p.a0, p.delta_p, p.kappa) {
            (Some(gamma), None, None, None, None) => Coupling::Direct { gamma },
            (None, Some(omega10), Some(a0), Some(delta_p), Some(kappa)) => Coupling::Rayleigh { omega10, a0: a0.value(), delta_p, kappa },
            _ => return Err(source.error("probe", "gamma", "give either `gamma` or all of `omega10`, `a0`, `delta_p`, `kappa`")),
        }
        .validated()
        .map_err(|e| source.error("probe", if p.gamma.is_some() { "gamma" } else { "kappa" }, e))?;
        if p.channels.is_empty() {
            return Err(source.error("probe", "channels", "empty channel list"));
        }
        let channels = p
            .channels
            .iter()
            .map(|c| match c {
                ChannelName::Density => ChannelKind::Density,
                ChannelName::Magnetization => ChannelKind::Magnetization,
            })
            .collect();
        Ok(Probe { geometry, coupling, channels })
    }

    fn initial_state(&self, source: &Source, basis: &FockBasis, h0: &SparseOperator) -> Result<Vec<C64>, RunError> {
        let spec = self.init.state.trim();
        let bad = |msg: String| source.error("init", "state", msg);
        if spec == "ground_state" {
            return Ok(ground_state(h0)?.1);
        }
        if let Some(occ) = spec.strip_prefix("fock:") {
            let parse = |s: &str| -> Result<Vec<u8>, RunError> {
                s.split(',').map(|t| t.trim().parse::<u8>().map_err(|_| bad(format!("cannot parse occupation '{t}'")))).collect()
            };
            let idx = match occ.split_once('/') {
                None => basis.fock_index(&parse(occ)?, None),
                Some((u, d)) => basis.fock_index(&parse(u)?, Some(&parse(d)?)),
            };
            let idx = idx.ok_or_else(|| bad(format!("'{occ}' is not a state of {}", basis.tag())))?;
            return Ok(basis.unit_vector(idx));
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let full = source.dir().join(path.trim());
            let text = std::fs::read_to_string(&full).map_err(|e| bad(format!("{}: {e}", full.display())))?;
            let amps = parse_diagonal_profile(&text).map_err(|e| bad(format!("{}: {e}", full.display())))?;
            if amps.len() != basis.dim() {
                return Err(bad(format!("{} amplitudes for a basis of dimension {}", amps.len(), basis.dim())));
            }
            let n = crate::linalg::norm(&amps);
            if !(n > 0.0) {
                return Err(bad("zero state".into()));
            }
            return Ok(crate::linalg::normalized(&amps));
        }
        Err(bad(format!("expected ground_state, fock:<occupations> or file:<path>, got '{spec}'")))
    }

    fn observable_set(
        &self,
        source: &Source,
        basis: &FockBasis,
        lattice: &LatticeSpec,
        probe: &Probe,
        channels: &[JumpChannel],
    ) -> Result<ObservableSet, RunError> {
        let o = &self.observables;
        let err = |key: &str, e: crate::Error| source.error("observables", key, e);
        let partition = match &o.partition {
            PartitionSpec::Named(n) if n == "odd_even" => ModePartition::odd_even(basis.sites()),
            PartitionSpec::Named(n) if n == "probe" => match &probe.geometry {
                Geometry::InterSite(_) => ModePartition::odd_even(basis.sites()),
                g => ModePartition::from_coefficients(&diagonal_coefficients(g, basis.sites())?),
            },
            PartitionSpec::Named(n) => {
                return Err(source.error("observables", "partition", format!("unknown partition '{n}'")))
            }
            PartitionSpec::Labels(l) if l.len() != basis.sites() => {
                return Err(source.error("observables", "partition", format!("{} labels for {} sites", l.len(), basis.sites())))
            }
            PartitionSpec::Labels(l) => ModePartition::from_labels(l.clone()),
        }
        .map_err(|e| err("partition", e))?;

        let mut set = ObservableSet::new(basis);
        if o.densities {
            set = set.densities();
        }
        if o.distributions {
            for m in 0..partition.modes() {
                set = set.distribution(&partition, m).map_err(|e| err("distributions", e))?;
            }
        }
        if o.mode_numbers {
            for m in 0..partition.modes() {
                set = set.zone_number(&format!("mode{m}"), &partition.zone(m)).map_err(|e| err("mode_numbers", e))?;
            }
        }
        if o.measured {
            for c in channels {
                set = set.moments(&c.label, c.measured()).map_err(|e| err("measured", e))?;
            }
        }
        if o.kinetic {
            let ek = kinetic_bilinear(basis, lattice)?.scale(C64::new(-lattice.tunneling, 0.0));
            set = set.moments("EK", &ek).map_err(|e| err("kinetic", e))?;
        }
        if o.imbalance {
            set = set.imbalance(&partition).map_err(|e| err("imbalance", e))?;
        }
        for c in &o.correlations {
            set = set.correlation(&c.name, &c.a, &c.b).map_err(|e| err("correlations", e))?;
        }
        for z in &o.entropies {
            set = set.entropy(&z.name, &z.zone).map_err(|e| err("entropies", e))?;
        }
        if set.columns().is_empty() {
            return Err(source.error("observables", "densities", "no observables requested"));
        }
        Ok(set)
    }
}
