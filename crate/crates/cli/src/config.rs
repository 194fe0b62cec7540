//! Experiment configuration: flat `key = value` files in SI units.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use foil_core::assembly::QuadratureRule;
use foil_core::circuit::{FieldMode, Waveform, DEFAULT_PERTURBATION_FREQUENCY};
use foil_core::mesh::{GeometrySpec, MeshLevel};
use foil_core::winding::{BasisFamily, FoilWindingSpec, VoltageBasis};
use foil_core::MU_0;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Which terminal quantity the source imposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    Voltage,
    Current,
}

impl FromStr for Drive {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v" | "voltage" => Ok(Drive::Voltage),
            "i" | "current" => Ok(Drive::Current),
            _ => bail!("unknown drive `{s}` (expected v or i)"),
        }
    }
}

impl fmt::Display for Drive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Drive::Voltage => "voltage",
            Drive::Current => "current",
        })
    }
}

/// A generator preset plus a number of uniform refinements,
/// written `coarse`, `fine`, `coarse+2` or a bare refinement count of the
/// coarse preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshChoice {
    pub base: MeshLevel,
    pub refinements: u32,
}

impl MeshChoice {
    pub const COARSE: MeshChoice = MeshChoice {
        base: MeshLevel::Coarse,
        refinements: 0,
    };
    pub const FINE: MeshChoice = MeshChoice {
        base: MeshLevel::Fine,
        refinements: 0,
    };

    pub fn refined(self, k: u32) -> MeshChoice {
        MeshChoice {
            refinements: self.refinements + k,
            ..self
        }
    }
}

impl FromStr for MeshChoice {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Ok(k) = s.parse::<u32>() {
            return Ok(MeshChoice::COARSE.refined(k));
        }
        let (name, k) = match s.split_once('+') {
            Some((n, k)) => (n, k.parse::<u32>().context("refinement count")?),
            None => (s.as_str(), 0),
        };
        let base = match name {
            "coarse" => MeshLevel::Coarse,
            "fine" => MeshLevel::Fine,
            _ => bail!("unknown mesh level `{s}`"),
        };
        Ok(MeshChoice {
            base,
            refinements: k,
        })
    }
}

impl fmt::Display for MeshChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.base {
            MeshLevel::Coarse => "coarse",
            MeshLevel::Fine => "fine",
        };
        if self.refinements == 0 {
            f.write_str(name)
        } else {
            write!(f, "{name}+{}", self.refinements)
        }
    }
}

impl Serialize for MeshChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MeshChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn ser_mode<S: serde::Serializer>(m: &FieldMode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

fn de_mode<'de, D: serde::Deserializer<'de>>(d: D) -> Result<FieldMode, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

/// All experiment inputs. Defaults reproduce the reference inductor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_p: usize,
    pub turns: usize,
    pub fill_factor: f64,
    /// Foil pitch, conductor plus insulation (m).
    pub foil_thickness: f64,
    pub foil_height: f64,
    pub air_gap: f64,
    pub yoke_height: f64,
    pub yoke_outer_radius: f64,
    pub frequency: f64,
    pub perturbation_frequency: f64,
    pub epsilon: f64,
    pub sigma_winding: f64,
    pub yoke_sigma: f64,
    pub yoke_mu_r: f64,
    /// Source amplitude in V or A depending on the drive.
    pub amplitude: f64,
    pub drive: Drive,
    #[serde(serialize_with = "ser_mode", deserialize_with = "de_mode")]
    pub mode: FieldMode,
    pub mesh_level: MeshChoice,
    pub dt: f64,
    pub duration: f64,
    pub basis: String,
    pub quadrature_points: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_p: 5,
            turns: 50,
            fill_factor: 0.8,
            foil_thickness: 0.28e-3,
            foil_height: 50e-3,
            air_gap: 4.2e-3,
            yoke_height: 76.2e-3,
            yoke_outer_radius: 40e-3,
            frequency: 50.0,
            perturbation_frequency: DEFAULT_PERTURBATION_FREQUENCY,
            epsilon: 1e-3,
            sigma_winding: 6e7,
            yoke_sigma: 10.0,
            yoke_mu_r: 1000.0,
            amplitude: 1.0,
            drive: Drive::Current,
            mode: FieldMode::Consistent,
            mesh_level: MeshChoice::FINE,
            dt: 1e-4,
            duration: 22e-3,
            basis: "legendre".into(),
            quadrature_points: 3,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = [
            ("foil_thickness", self.foil_thickness),
            ("foil_height", self.foil_height),
            ("air_gap", self.air_gap),
            ("yoke_height", self.yoke_height),
            ("yoke_outer_radius", self.yoke_outer_radius),
            ("frequency", self.frequency),
            ("sigma_winding", self.sigma_winding),
            ("yoke_mu_r", self.yoke_mu_r),
            ("dt", self.dt),
            ("duration", self.duration),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{k} must be positive and finite, got {v}");
            }
        }
        if self.n_p == 0 || self.turns == 0 {
            bail!("n_p and turns must be positive");
        }
        if !(self.epsilon >= 0.0) || !(self.yoke_sigma >= 0.0) {
            bail!("epsilon and yoke_sigma must be nonnegative");
        }
        self.basis_family()?;
        self.quadrature()?;
        self.winding().validate()?;
        self.geometry().validate()?;
        Ok(())
    }

    pub fn winding(&self) -> FoilWindingSpec {
        FoilWindingSpec {
            turns: self.turns,
            fill_factor: self.fill_factor,
            pitch: self.foil_thickness,
            height: self.foil_height,
            sigma_c: self.sigma_winding,
            ..FoilWindingSpec::default()
        }
    }

    /// Reference geometry with the configured outer dimensions; the winding
    /// block follows the foil count and pitch.
    pub fn geometry(&self) -> GeometrySpec {
        let w = self.winding();
        GeometrySpec {
            yoke_outer_radius: self.yoke_outer_radius,
            yoke_height: self.yoke_height,
            air_gap: self.air_gap,
            winding_inner_radius: w.inner_radius,
            winding_thickness: w.radial_extent(),
            winding_height: w.height,
            ..GeometrySpec::default()
        }
    }

    pub fn basis_family(&self) -> anyhow::Result<BasisFamily> {
        match self.basis.to_ascii_lowercase().as_str() {
            "legendre" => Ok(BasisFamily::Legendre),
            "hats" | "lagrange" => Ok(BasisFamily::LagrangeNodes),
            other => bail!("unknown basis `{other}`"),
        }
    }

    pub fn voltage_basis(&self) -> anyhow::Result<VoltageBasis> {
        Ok(VoltageBasis::new(self.basis_family()?, self.n_p)?)
    }

    pub fn quadrature(&self) -> anyhow::Result<QuadratureRule> {
        match self.quadrature_points {
            3 => Ok(QuadratureRule::ThreePoint),
            6 => Ok(QuadratureRule::SixPoint),
            n => bail!("quadrature_points must be 3 or 6, got {n}"),
        }
    }

    pub fn yoke_mu(&self) -> f64 {
        self.yoke_mu_r * MU_0
    }

    /// Source waveform; `perturbed = false` drops the high-frequency term.
    pub fn waveform(&self, perturbed: bool) -> Waveform {
        if perturbed && self.epsilon > 0.0 {
            Waveform::PerturbedSin {
                amp: self.amplitude,
                f: self.frequency,
                eps: self.epsilon,
                f_eps: self.perturbation_frequency,
            }
        } else {
            Waveform::Sin {
                amp: self.amplitude,
                f: self.frequency,
            }
        }
    }
}
