//! Physical system definition: one lossy cavity mode coupled to N two-level
//! atoms, restricted to the single-excitation manifold.
//!
//! All rates are amplitude rates: an atom with decay `gamma` loses population
//! at `2*gamma`, and the cavity with loss `kappa` leaks photons at `2*kappa`.
//! By convention every rate is expressed in units of `kappa`; configs with an
//! explicit `kappa != 1` can be rescaled with [`SystemConfig::normalize_units`].

use serde::Serialize;
use thiserror::Error;

/// Hard cap on the atom count; keeps every matrix in the library desk-scale.
pub const MAX_ATOMS: usize = 8;

/// One two-level atom coupled to the cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomSpec {
    /// Coupling to the cavity mode.
    pub g: f64,
    /// Free-space amplitude decay rate (population decays at `2*gamma`).
    pub gamma: f64,
    /// Detuning from the cavity frequency (rotating frame of the cavity).
    pub delta: f64,
    /// Whether this atom carries the single excitation at t = 0.
    pub excited: bool,
}

impl AtomSpec {
    /// Resonant, initially unexcited atom.
    pub fn new(g: f64, gamma: f64) -> Self {
        Self {
            g,
            gamma,
            delta: 0.0,
            excited: false,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn excited(mut self) -> Self {
        self.excited = true;
        self
    }
}

/// Marker recording the unit convention of a config.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum UnitSystem {
    /// All rates dimensionless, expressed in units of the cavity loss.
    #[default]
    #[serde(rename = "kappa_units")]
    KappaUnits,
}

/// Full scenario: cavity loss plus an ordered list of atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Cavity amplitude decay rate (photon leakage rate is `2*kappa`).
    pub kappa: f64,
    pub atoms: Vec<AtomSpec>,
    pub unit_system: UnitSystem,
}

/// Violations of the [`SystemConfig`] invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("kappa must be positive, got {0}")]
    NonPositiveKappa(f64),
    #[error("atom {index}: {which} must be nonnegative, got {value}")]
    NegativeRate {
        index: usize,
        which: &'static str,
        value: f64,
    },
    #[error("exactly one atom must be excited, found {0}")]
    WrongExcitationCount(usize),
    #[error("at most {MAX_ATOMS} atoms supported, got {0}")]
    TooManyAtoms(usize),
}

impl SystemConfig {
    pub fn new(kappa: f64, atoms: Vec<AtomSpec>) -> Self {
        Self {
            kappa,
            atoms,
            unit_system: UnitSystem::KappaUnits,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Dimension of the single-excitation basis including the ground state.
    pub fn basis_dim(&self) -> usize {
        self.n_atoms() + 2
    }

    /// Index of the excited atom. Panics on configs that were never validated.
    pub fn excited_index(&self) -> usize {
        self.atoms
            .iter()
            .position(|a| a.excited)
            .expect("validated config has exactly one excited atom")
    }

    /// Largest rate in the problem; sets the integrator step bound.
    pub fn max_rate(&self) -> f64 {
        self.atoms
            .iter()
            .flat_map(|a| [a.g, a.gamma, a.delta.abs()])
            .fold(self.kappa, f64::max)
    }

    /// Checks all invariants, leaving the config untouched.
    pub fn validate(&self) -> Result<(), ConfigError> {
        // NaN fails every branch below on purpose
        if self.kappa.is_nan() || self.kappa <= 0.0 {
            return Err(ConfigError::NonPositiveKappa(self.kappa));
        }
        if self.atoms.is_empty() {
            return Err(ConfigError::WrongExcitationCount(0));
        }
        if self.atoms.len() > MAX_ATOMS {
            return Err(ConfigError::TooManyAtoms(self.atoms.len()));
        }
        for (index, atom) in self.atoms.iter().enumerate() {
            if atom.g.is_nan() || atom.g < 0.0 {
                return Err(ConfigError::NegativeRate {
                    index,
                    which: "g",
                    value: atom.g,
                });
            }
            if atom.gamma.is_nan() || atom.gamma < 0.0 {
                return Err(ConfigError::NegativeRate {
                    index,
                    which: "gamma",
                    value: atom.gamma,
                });
            }
            if !atom.delta.is_finite() {
                return Err(ConfigError::NegativeRate {
                    index,
                    which: "delta",
                    value: atom.delta,
                });
            }
        }
        let excited = self.atoms.iter().filter(|a| a.excited).count();
        if excited != 1 {
            return Err(ConfigError::WrongExcitationCount(excited));
        }
        Ok(())
    }

    /// Rescales every rate into units of `kappa`, so `kappa` becomes 1.
    pub fn normalize_units(mut self) -> Self {
        let k = self.kappa;
        if k != 1.0 && k > 0.0 {
            for atom in &mut self.atoms {
                atom.g /= k;
                atom.gamma /= k;
                atom.delta /= k;
            }
            self.kappa = 1.0;
        }
        self
    }
}

/// Validates and returns the config unchanged.
pub fn validate_config(cfg: SystemConfig) -> Result<SystemConfig, ConfigError> {
    cfg.validate()?;
    Ok(cfg)
}

/// One state of the single-excitation manifold.
///
/// Ordering contract used by every matrix in this crate:
/// `AtomExcited(0), ..., AtomExcited(N-1), OnePhoton, Ground`. Effective
/// matrices drop `Ground`; density matrices keep it as the last index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisState {
    /// Atom `i` excited, all others and the cavity in the ground state.
    AtomExcited(usize),
    /// One cavity photon, all atoms in the ground state.
    OnePhoton,
    /// Global ground state (reached only by dissipation).
    Ground,
}

impl std::fmt::Display for BasisState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisState::AtomExcited(i) => write!(f, "atom_{i}"),
            BasisState::OnePhoton => write!(f, "photon"),
            BasisState::Ground => write!(f, "ground"),
        }
    }
}

/// Ordered single-excitation basis of a valid config; `Ground` is always last.
pub fn basis(cfg: &SystemConfig) -> Vec<BasisState> {
    let mut states: Vec<BasisState> = (0..cfg.n_atoms()).map(BasisState::AtomExcited).collect();
    states.push(BasisState::OnePhoton);
    states.push(BasisState::Ground);
    states
}

/// Addressable scalar parameter of a [`SystemConfig`], e.g. `atoms[1].g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamPath {
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "g")]
    AtomG(usize),
    #[serde(rename = "gamma")]
    AtomGamma(usize),
    #[serde(rename = "delta")]
    AtomDelta(usize),
}

/// Errors from parsing or resolving a parameter path.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("unknown parameter path `{0}`")]
    Unknown(String),
    #[error("atom index {0} out of range (config has {1} atoms)")]
    IndexOutOfRange(usize, usize),
}

impl ParamPath {
    /// Parses `kappa` or `atoms[i].{g,gamma,delta}`.
    pub fn parse(s: &str) -> Result<Self, PathError> {
        let s = s.trim();
        if s == "kappa" {
            return Ok(ParamPath::Kappa);
        }
        let rest = s
            .strip_prefix("atoms[")
            .ok_or_else(|| PathError::Unknown(s.to_string()))?;
        let (idx, field) = rest
            .split_once("].")
            .ok_or_else(|| PathError::Unknown(s.to_string()))?;
        let index: usize = idx.parse().map_err(|_| PathError::Unknown(s.to_string()))?;
        match field {
            "g" => Ok(ParamPath::AtomG(index)),
            "gamma" => Ok(ParamPath::AtomGamma(index)),
            "delta" => Ok(ParamPath::AtomDelta(index)),
            _ => Err(PathError::Unknown(s.to_string())),
        }
    }

    fn check_index(&self, cfg: &SystemConfig) -> Result<(), PathError> {
        match *self {
            ParamPath::Kappa => Ok(()),
            ParamPath::AtomG(i) | ParamPath::AtomGamma(i) | ParamPath::AtomDelta(i) => {
                if i < cfg.n_atoms() {
                    Ok(())
                } else {
                    Err(PathError::IndexOutOfRange(i, cfg.n_atoms()))
                }
            }
        }
    }

    pub fn get(&self, cfg: &SystemConfig) -> Result<f64, PathError> {
        self.check_index(cfg)?;
        Ok(match *self {
            ParamPath::Kappa => cfg.kappa,
            ParamPath::AtomG(i) => cfg.atoms[i].g,
            ParamPath::AtomGamma(i) => cfg.atoms[i].gamma,
            ParamPath::AtomDelta(i) => cfg.atoms[i].delta,
        })
    }

    /// Returns a copy of `cfg` with this parameter set to `value`.
    pub fn set(&self, cfg: &SystemConfig, value: f64) -> Result<SystemConfig, PathError> {
        self.check_index(cfg)?;
        let mut out = cfg.clone();
        match *self {
            ParamPath::Kappa => out.kappa = value,
            ParamPath::AtomG(i) => out.atoms[i].g = value,
            ParamPath::AtomGamma(i) => out.atoms[i].gamma = value,
            ParamPath::AtomDelta(i) => out.atoms[i].delta = value,
        }
        Ok(out)
    }
}

impl std::fmt::Display for ParamPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ParamPath::Kappa => write!(f, "kappa"),
            ParamPath::AtomG(i) => write!(f, "atoms[{i}].g"),
            ParamPath::AtomGamma(i) => write!(f, "atoms[{i}].gamma"),
            ParamPath::AtomDelta(i) => write!(f, "atoms[{i}].delta"),
        }
    }
}
