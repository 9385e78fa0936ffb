//! ¹³C nuclear-spin environments of an NV center.
//!
//! Sites come from the diamond-cubic lattice rotated so that the NV axis
//! ([111] in crystal coordinates) is the simulation `z` axis, with the
//! vacancy at the origin. Couplings are in rad·μs⁻¹, lengths in nm.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{dot, norm, Vec3};

/// Electron gyromagnetic ratio, GHz/T.
pub const GAMMA_E_GHZ_PER_T: f64 = 28.02;
/// ¹³C gyromagnetic ratio, MHz/T.
pub const GAMMA_N_MHZ_PER_T: f64 = 10.71;
/// 200 G.
pub const DEFAULT_FIELD_T: f64 = 0.02;
pub const DIAMOND_LATTICE_CONSTANT_NM: f64 = 0.3567;
pub const NATURAL_ABUNDANCE: f64 = 0.011;

const MU0_OVER_4PI: f64 = 1e-7;
const PLANCK: f64 = 6.626_070_15e-34;

/// `(μ₀/4π) h γ_e γ_n / (1 nm)³` expressed in rad·μs⁻¹.
pub fn dipolar_prefactor(gamma_e_ghz: f64, gamma_n_mhz: f64) -> f64 {
    let hz = MU0_OVER_4PI * PLANCK * (gamma_e_ghz * 1e9) * (gamma_n_mhz * 1e6) / 1e-27;
    2.0 * PI * hz * 1e-6
}

/// Nuclear Larmor angular frequency `2π γ_n B`, rad·μs⁻¹.
pub fn larmor_frequency(b_tesla: f64, gamma_n_mhz: f64) -> f64 {
    2.0 * PI * gamma_n_mhz * b_tesla
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub lattice_constant: f64,
    pub bath_radius: f64,
    pub abundance: f64,
    pub seed: u64,
    pub exclusion_radius: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            lattice_constant: DIAMOND_LATTICE_CONSTANT_NM,
            bath_radius: 4.0,
            abundance: NATURAL_ABUNDANCE,
            seed: 0,
            exclusion_radius: 0.1,
        }
    }
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lattice_constant > 0.0 && self.lattice_constant.is_finite()) {
            return Err(Error::validation("lattice_constant must be positive"));
        }
        if !(self.exclusion_radius > 0.0 && self.exclusion_radius < self.bath_radius && self.bath_radius.is_finite()) {
            return Err(Error::validation(format!(
                "need 0 < exclusion_radius < bath_radius, got {} and {}",
                self.exclusion_radius, self.bath_radius
            )));
        }
        if !(0.0..=1.0).contains(&self.abundance) {
            return Err(Error::validation(format!("abundance must lie in [0, 1], got {}", self.abundance)));
        }
        Ok(())
    }
}

/// Fermi-contact envelope `amplitude · exp(−2r/decay_length)`, added to the
/// `A_zz` coupling only, and identically zero beyond `cutoff_radius`.
///
/// The envelope shape is a model choice; results with `enabled = true`
/// depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactModel {
    pub enabled: bool,
    pub amplitude: f64,
    pub decay_length: f64,
    pub cutoff_radius: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        // 2π·1 MHz at r = 0.15 nm.
        let decay_length: f64 = 0.1;
        ContactModel {
            enabled: false,
            amplitude: 2.0 * PI * (2.0 * 0.15 / decay_length).exp(),
            decay_length,
            cutoff_radius: 0.5,
        }
    }
}

impl ContactModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay_length > 0.0 && self.cutoff_radius >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::validation("contact model needs decay_length > 0, cutoff_radius >= 0, finite amplitude"));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        if !self.enabled || r > self.cutoff_radius {
            return 0.0;
        }
        self.amplitude * (-2.0 * r / self.decay_length).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpin {
    /// nm, relative to the vacancy.
    pub position: Vec3,
    /// `(A_zx, A_zy, A_zz)`, rad·μs⁻¹.
    pub coupling: Vec3,
    /// rad·μs⁻¹.
    pub larmor: f64,
    /// `p ∈ [−1, 1]`; the nuclear state is `½(1 + p σ_z)`.
    pub polarization: f64,
}

impl BathSpin {
    pub fn new(position: Vec3, coupling: Vec3, larmor: f64, polarization: f64) -> Result<Self> {
        let s = BathSpin { position, coupling, larmor, polarization };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.polarization) {
            return Err(Error::validation(format!("polarization {} outside [-1, 1]", self.polarization)));
        }
        if self.position.iter().chain(&self.coupling).any(|x| !x.is_finite()) || !self.larmor.is_finite() {
            return Err(Error::validation("bath spin has non-finite entries"));
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        norm(self.position)
    }

    pub fn transverse_coupling(&self) -> f64 {
        self.coupling[0].hypot(self.coupling[1])
    }

    /// Field felt by the nucleus with the qubit in |0⟩: `ω ẑ`.
    pub fn field0(&self) -> Vec3 {
        [0.0, 0.0, self.larmor]
    }

    /// Field felt by the nucleus with the qubit in |1⟩: `(A_zx, A_zy, ω + A_zz)`.
    pub fn field1(&self) -> Vec3 {
        [self.coupling[0], self.coupling[1], self.larmor + self.coupling[2]]
    }
}

/// Orthonormal simulation frame (rows) with `z ∥ [111]`.
fn nv_frame() -> [Vec3; 3] {
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let z = [1.0 / s3, 1.0 / s3, 1.0 / s3];
    let x = [1.0 / s6, 1.0 / s6, -2.0 / s6];
    let y = crate::su2::cross(z, x);
    [x, y, z]
}

const DIAMOND_BASIS: [Vec3; 8] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
    [0.25, 0.25, 0.25],
    [0.25, 0.75, 0.75],
    [0.75, 0.25, 0.75],
    [0.75, 0.75, 0.25],
];

/// All diamond-cubic sites with `exclusion_radius < |r| ≤ bath_radius`.
/// Deterministic; ordered by conventional cell then basis atom.
pub fn generate_sites(cfg: &LatticeConfig) -> Result<Vec<Vec3>> {
    cfg.validate()?;
    let a = cfg.lattice_constant;
    let frame = nv_frame();
    let n = (cfg.bath_radius / a).ceil() as i64 + 1;
    let mut sites = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                for b in DIAMOND_BASIS {
                    let crystal = [(i as f64 + b[0]) * a, (j as f64 + b[1]) * a, (k as f64 + b[2]) * a];
                    let r = norm(crystal);
                    if r > cfg.exclusion_radius && r <= cfg.bath_radius {
                        // Snap rounding residue so on-axis sites have exactly zero transverse offset.
                        let snap = |v: f64| if v.abs() < 1e-12 * a { 0.0 } else { v };
                        sites.push([
                            snap(dot(frame[0], crystal)),
                            snap(dot(frame[1], crystal)),
                            snap(dot(frame[2], crystal)),
                        ]);
                    }
                }
            }
        }
    }
    Ok(sites)
}

/// Occupies each site with probability `abundance` using one sequential
/// seeded stream. Couplings are left at zero.
pub fn sample_bath(sites: &[Vec3], cfg: &LatticeConfig, b_tesla: f64, gamma_n_mhz: f64) -> Result<Vec<BathSpin>> {
    if !(0.0..=1.0).contains(&cfg.abundance) {
        return Err(Error::validation(format!("abundance must lie in [0, 1], got {}", cfg.abundance)));
    }
    let larmor = larmor_frequency(b_tesla, gamma_n_mhz);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spins = sites
        .iter()
        .filter(|_| rng.random_bool(cfg.abundance))
        .map(|&position| BathSpin { position, coupling: [0.0; 3], larmor, polarization: 0.0 })
        .collect();
    Ok(spins)
}

/// Hyperfine row `A_zj = C/r³ (δ_jz − 3 (r·ĵ)(r·ẑ)/r²)` plus the contact term on `A_zz`.
///
/// The transverse axes are the simulation `x`, `y` when `nv_axis` is `ẑ`;
/// otherwise a right-handed frame is completed around `nv_axis`.
pub fn compute_couplings(
    spin: &BathSpin,
    gamma_e_ghz: f64,
    gamma_n_mhz: f64,
    contact: &ContactModel,
    nv_axis: Vec3,
) -> Result<BathSpin> {
    let r = spin.radius();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::validation("bath spin cannot sit at the vacancy"));
    }
    let (ex, ey, ez) = frame_around(nv_axis)?;
    let c = dipolar_prefactor(gamma_e_ghz, gamma_n_mhz) / (r * r * r);
    let rz = dot(spin.position, ez);
    let row = |axis: Vec3, delta: f64| c * (delta - 3.0 * dot(spin.position, axis) * rz / (r * r));
    let coupling = [row(ex, 0.0), row(ey, 0.0), row(ez, 1.0) + contact.value(r)];
    Ok(BathSpin { coupling, ..*spin })
}

fn frame_around(axis: Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let n = norm(axis);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::validation("nv_axis must be a non-zero vector"));
    }
    let ez = [axis[0] / n, axis[1] / n, axis[2] / n];
    if ez == [0.0, 0.0, 1.0] {
        return Ok(([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], ez));
    }
    // Gram–Schmidt on whichever Cartesian axis is least aligned.
    let seed = if ez[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(seed, ez);
    let ex = [seed[0] - d * ez[0], seed[1] - d * ez[1], seed[2] - d * ez[2]];
    let m = norm(ex);
    let ex = [ex[0] / m, ex[1] / m, ex[2] / m];
    Ok((ex, crate::su2::cross(ez, ex), ez))
}

/// `p_k = p_inner` for `|r_k| ≤ r_p`, otherwise 0.
pub fn apply_polarization(bath: &mut [BathSpin], r_p: f64, p_inner: f64) -> Result<()> {
    if !(r_p >= 0.0) || !(-1.0..=1.0).contains(&p_inner) {
        return Err(Error::validation(format!("need r_p >= 0 and |p_inner| <= 1, got {r_p}, {p_inner}")));
    }
    for s in bath.iter_mut() {
        s.polarization = if s.radius() <= r_p { p_inner } else { 0.0 };
    }
    Ok(())
}

/// Everything needed to rebuild a bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSpec {
    pub lattice: LatticeConfig,
    pub contact: ContactModel,
    pub b_tesla: f64,
    pub gamma_e: f64,
    pub gamma_n: f64,
    pub r_p: f64,
    pub p_inner: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec {
            lattice: LatticeConfig::default(),
            contact: ContactModel::default(),
            b_tesla: DEFAULT_FIELD_T,
            gamma_e: GAMMA_E_GHZ_PER_T,
            gamma_n: GAMMA_N_MHZ_PER_T,
            r_p: 0.9,
            p_inner: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bath {
    pub spec: BathSpec,
    pub spins: Vec<BathSpin>,
}

impl Bath {
    pub fn generate(spec: &BathSpec) -> Result<Bath> {
        spec.contact.validate()?;
        if !(spec.b_tesla.is_finite() && spec.gamma_e > 0.0 && spec.gamma_n > 0.0) {
            return Err(Error::validation("field must be finite and gyromagnetic ratios positive"));
        }
        let sites = generate_sites(&spec.lattice)?;
        let raw = sample_bath(&sites, &spec.lattice, spec.b_tesla, spec.gamma_n)?;
        let mut spins = raw
            .par_iter()
            .map(|s| compute_couplings(s, spec.gamma_e, spec.gamma_n, &spec.contact, [0.0, 0.0, 1.0]))
            .collect::<Result<Vec<_>>>()?;
        apply_polarization(&mut spins, spec.r_p, spec.p_inner)?;
        Ok(Bath { spec: spec.clone(), spins })
    }

    pub fn larmor(&self) -> f64 {
        larmor_frequency(self.spec.b_tesla, self.spec.gamma_n)
    }

    pub fn polarized_count(&self) -> usize {
        self.spins.iter().filter(|s| s.polarization != 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathSummary {
    pub spins: usize,
    pub polarized: usize,
    pub min_coupling: f64,
    pub max_coupling: f64,
}

impl BathSummary {
    pub fn of(bath: &Bath) -> BathSummary {
        let mags = bath.spins.iter().map(|s| norm(s.coupling));
        let (min, max) = mags.fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
        BathSummary {
            spins: bath.spins.len(),
            polarized: bath.polarized_count(),
            min_coupling: if bath.spins.is_empty() { 0.0 } else { min },
            max_coupling: max,
        }
    }
}

impl std::fmt::Display for BathSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} spins, {} polarized, |A| min {:.6e} max {:.6e} rad/us",
            self.spins, self.polarized, self.min_coupling, self.max_coupling
        )
    }
}

pub mod format {
    //! Line-oriented bath file.
    //!
    //! ```text
    //! # qee-bath v1
    //! # spec = {json BathSpec}
    //! # larmor = 1.3456...e0
    //! # index x_nm y_nm z_nm a_zx a_zy a_zz p
    //! 0 -1.2e0 ...
    //! ```
    //! Floats use 17 significant digits, which round-trips every `f64`.

    use super::*;

    const MAGIC: &str = "# qee-bath v1";

    fn f(x: f64) -> String {
        format!("{x:.16e}")
    }

    pub fn write_bath(bath: &Bath) -> Result<String> {
        let spec = serde_json::to_string(&bath.spec).map_err(|e| Error::Parse(e.to_string()))?;
        let larmor = bath.spins.first().map(|s| s.larmor).unwrap_or_else(|| bath.larmor());
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("# spec = {spec}\n"));
        out.push_str(&format!("# seed = {}\n", bath.spec.lattice.seed));
        out.push_str(&format!("# larmor = {}\n", f(larmor)));
        out.push_str("# index x_nm y_nm z_nm a_zx a_zy a_zz p\n");
        for (i, s) in bath.spins.iter().enumerate() {
            let [x, y, z] = s.position;
            let [ax, ay, az] = s.coupling;
            out.push_str(&format!(
                "{i} {} {} {} {} {} {} {}\n",
                f(x),
                f(y),
                f(z),
                f(ax),
                f(ay),
                f(az),
                f(s.polarization)
            ));
        }
        Ok(out)
    }

    pub fn read_bath(text: &str) -> Result<Bath> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(Error::Parse("missing bath file header".into()));
        }
        let mut spec: Option<BathSpec> = None;
        let mut larmor: Option<f64> = None;
        let mut spins = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.split_once('=') {
                    match key.trim() {
                        "spec" => {
                            spec = Some(serde_json::from_str(value.trim()).map_err(|e| Error::Parse(format!("bath spec: {e}")))?)
                        }
                        "larmor" => larmor = Some(parse_f64(value.trim(), lineno)?),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 8 {
                return Err(Error::Parse(format!("line {}: expected 8 fields, got {}", lineno + 2, fields.len())));
            }
            let index: usize = fields[0].parse().map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 2)))?;
            if index != spins.len() {
                return Err(Error::Parse(format!("line {}: spin index {index} out of order", lineno + 2)));
            }
            let v: Vec<f64> = fields[1..].iter().map(|s| parse_f64(s, lineno)).collect::<Result<_>>()?;
            let larmor = larmor.ok_or_else(|| Error::Parse("larmor header must precede spin records".into()))?;
            spins.push(BathSpin::new([v[0], v[1], v[2]], [v[3], v[4], v[5]], larmor, v[6])?);
        }
        let spec = spec.ok_or_else(|| Error::Parse("bath file has no spec header".into()))?;
        Ok(Bath { spec, spins })
    }

    fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
        s.parse().map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 2)))
    }
}
