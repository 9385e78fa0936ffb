//! Run configuration: one TOML file fully determines a run; command-line
//! flags override individual keys.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dephasing::{DistanceMetric, DEFAULT_QEE_TOLERANCE};
use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseProcess};
use crate::nv::{BathSpec, ContactModel, LatticeConfig, DEFAULT_FIELD_T, GAMMA_E_GHZ_PER_T, GAMMA_N_MHZ_PER_T};
use crate::protocol::{ProtocolGrid, TimeGrid};

/// Magnetic field, stored in tesla. Written as `"<value> T"`; reads `T`,
/// `tesla`, `G` or `gauss` suffixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field(pub f64);

impl Field {
    pub fn tesla(self) -> f64 {
        self.0
    }
}

impl FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Field> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .ok_or_else(|| Error::Parse(format!("field {s:?} needs a unit suffix (T or G)")))?;
        let (num, unit) = s.split_at(split);
        let value: f64 = num.trim().parse().map_err(|_| Error::Parse(format!("bad field value {num:?}")))?;
        let tesla = match unit.trim().to_ascii_lowercase().as_str() {
            "t" | "tesla" => value,
            "g" | "gauss" => value * 1e-4,
            other => return Err(Error::Parse(format!("unknown field unit {other:?}"))),
        };
        if !tesla.is_finite() {
            return Err(Error::validation("field must be finite"));
        }
        Ok(Field(tesla))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} T", self.0)
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Field, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarizationConfig {
    pub r_p: f64,
    pub p_inner: f64,
}

impl Default for PolarizationConfig {
    fn default() -> Self {
        PolarizationConfig { r_p: 0.9, p_inner: 1.0 }
    }
}

/// `(min, max, steps)` with inclusive endpoints; `steps` counts points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub diagonal: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { tau_min: 0.0, tau_max: 40.0, tau_steps: 200, t_min: 0.0, t_max: 40.0, t_steps: 200, diagonal: false }
    }
}

impl GridConfig {
    pub fn tau_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.tau_min, self.tau_max, self.tau_steps)
    }

    pub fn protocol_grid(&self) -> Result<ProtocolGrid> {
        let tau = self.tau_grid()?.values();
        if self.diagonal {
            ProtocolGrid::diagonal(tau)
        } else {
            ProtocolGrid::full(tau, TimeGrid::new(self.t_min, self.t_max, self.t_steps)?.values())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub corr_time: f64,
    pub mean: f64,
    pub dt: f64,
    pub t_max: f64,
    pub count: usize,
    /// Delays at which both preparations are evaluated.
    pub tau: Vec<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            kind: NoiseKind::OrnsteinUhlenbeck,
            sigma: 1.0,
            corr_time: 1.0,
            mean: 0.0,
            dt: 0.05,
            t_max: 5.0,
            count: 10_000,
            tau: vec![0.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub qee: f64,
    pub metric: DistanceMetric,
    /// Echo magnitude within this of ½ counts as perfect recovery.
    pub echo: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { qee: DEFAULT_QEE_TOLERANCE, metric: DistanceMetric::Frobenius, echo: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub draws: usize,
    pub baths: usize,
    pub points: usize,
    pub max_spins: usize,
    pub tolerance: f64,
    /// Flip the sign of the closed-form single-spin difference to exercise the failure path.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { draws: 1000, baths: 50, points: 20, max_spins: 4, tolerance: 1e-10, inject_fault: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath_file: Option<PathBuf>,
    pub field: Field,
    /// GHz/T.
    pub gamma_e: f64,
    /// MHz/T.
    pub gamma_n: f64,
    pub lattice: LatticeConfig,
    pub contact: ContactModel,
    pub polarization: PolarizationConfig,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    pub tolerance: ToleranceConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: None,
            out: None,
            bath_file: None,
            field: Field(DEFAULT_FIELD_T),
            gamma_e: GAMMA_E_GHZ_PER_T,
            gamma_n: GAMMA_N_MHZ_PER_T,
            lattice: LatticeConfig::default(),
            contact: ContactModel::default(),
            polarization: PolarizationConfig::default(),
            grid: GridConfig::default(),
            noise: NoiseConfig::default(),
            tolerance: ToleranceConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// Flag overrides; `None` leaves the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub diagonal: bool,
    pub bath_file: Option<PathBuf>,
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.normalize();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<RunConfig> {
        match path {
            Some(p) => RunConfig::from_toml(&std::fs::read_to_string(p)?),
            None => Ok(RunConfig::default()),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        if o.diagonal {
            self.grid.diagonal = true;
        }
        if let Some(b) = &o.bath_file {
            self.bath_file = Some(b.clone());
        }
        if o.inject_fault {
            self.verify.inject_fault = true;
        }
        self.normalize();
    }

    /// The top-level seed drives every random stream.
    fn normalize(&mut self) {
        self.lattice.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.contact.validate()?;
        if !(self.gamma_e > 0.0 && self.gamma_n > 0.0) {
            return Err(Error::validation("gyromagnetic ratios must be positive"));
        }
        if !(self.polarization.r_p >= 0.0) || !(-1.0..=1.0).contains(&self.polarization.p_inner) {
            return Err(Error::validation("need r_p >= 0 and |p_inner| <= 1"));
        }
        self.grid.protocol_grid()?;
        if !(self.tolerance.qee >= 0.0 && self.tolerance.echo >= 0.0) {
            return Err(Error::validation("tolerances must be non-negative"));
        }
        if self.threads == Some(0) {
            return Err(Error::validation("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn bath_spec(&self) -> BathSpec {
        BathSpec {
            lattice: LatticeConfig { seed: self.seed, ..self.lattice.clone() },
            contact: self.contact.clone(),
            b_tesla: self.field.tesla(),
            gamma_e: self.gamma_e,
            gamma_n: self.gamma_n,
            r_p: self.polarization.r_p,
            p_inner: self.polarization.p_inner,
        }
    }

    pub fn noise_process(&self) -> NoiseProcess {
        NoiseProcess {
            kind: self.noise.kind,
            sigma: self.noise.sigma,
            corr_time: self.noise.corr_time,
            mean: self.noise.mean,
            seed: self.seed,
        }
    }
}
