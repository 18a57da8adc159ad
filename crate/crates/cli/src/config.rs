use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use unfold_core::crystal::{AxisSigns, DielectricModel};
use unfold_core::validation::Thresholds;
use unfold_core::Complex64;

/// Configuration used when `--config` is not given.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub transparent: TransparentSection,
    #[serde(default)]
    pub dichroic: DichroicSection,
    #[serde(default)]
    pub gamma: GammaSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSection>,
    #[serde(default)]
    pub hermitian: HermitianSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransparentSection {
    pub eta: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichroicSection {
    #[serde(default = "one")]
    pub factor: f64,
    #[serde(default)]
    pub matrix: [[f64; 3]; 3],
}

impl Default for DichroicSection {
    fn default() -> Self {
        Self {
            factor: 1.0,
            matrix: [[0.0; 3]; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    #[serde(default = "one")]
    pub factor: f64,
    /// `[re, im]` pairs.
    #[serde(default)]
    pub matrix: [[[f64; 2]; 3]; 3],
}

impl Default for GammaSection {
    fn default() -> Self {
        Self {
            factor: 1.0,
            matrix: [[[0.0; 2]; 3]; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_axis")]
    pub axis: String,
    /// Window center in `(s1, s2)`; the optic axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "one")]
    pub perturbation_scale: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            axis: default_axis(),
            center: None,
            half_width: default_half_width(),
            resolution: default_resolution(),
            perturbation_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output")]
    pub path: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: default_output(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub gauge: Option<f64>,
    pub unperturbed_order: Option<f64>,
    pub joint_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HermitianSection {
    /// Half-width of the section in units of the ring radius.
    #[serde(default = "default_ring_half_width")]
    pub half_width_radii: f64,
    #[serde(default = "default_hermitian_resolution")]
    pub resolution: usize,
    #[serde(default = "default_hermitian_output")]
    pub path: PathBuf,
}

impl Default for HermitianSection {
    fn default() -> Self {
        Self {
            half_width_radii: default_ring_half_width(),
            resolution: default_hermitian_resolution(),
            path: default_hermitian_output(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_axis() -> String {
    "-+".into()
}

fn default_half_width() -> f64 {
    0.1
}

fn default_resolution() -> usize {
    101
}

fn default_output() -> PathBuf {
    "surface.csv".into()
}

fn default_ring_half_width() -> f64 {
    2.0
}

fn default_hermitian_resolution() -> usize {
    81
}

fn default_hermitian_output() -> PathBuf {
    "hermitian_section.csv".into()
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Self::parse(DEFAULT_CONFIG),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in {}", p.display()))
            }
        }
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// The unscaled dielectric model.
    pub fn model(&self) -> anyhow::Result<DielectricModel> {
        let d = self
            .dichroic
            .matrix
            .map(|r| r.map(|v| v * self.dichroic.factor));
        let g = self
            .gamma
            .matrix
            .map(|r| r.map(|[re, im]| Complex64::new(re, im) * self.gamma.factor));
        let m = DielectricModel::new(self.transparent.eta, d, g)?;
        m.check_biaxial()?;
        Ok(m)
    }

    /// The model with its perturbation multiplied by `perturbation_scale`.
    pub fn scaled_model(&self) -> anyhow::Result<DielectricModel> {
        Ok(self
            .model()?
            .with_perturbation_scale(self.grid.perturbation_scale))
    }

    pub fn axis(&self) -> anyhow::Result<AxisSigns> {
        Ok(self.grid.axis.parse()?)
    }

    pub fn thresholds(&self) -> Thresholds {
        let mut t = Thresholds::default();
        if let Some(tol) = &self.tolerances {
            t.gauge = tol.gauge.unwrap_or(t.gauge);
            t.unperturbed_order = tol.unperturbed_order.unwrap_or(t.unperturbed_order);
            t.joint_order = tol.joint_order.unwrap_or(t.joint_order);
        }
        t
    }

    /// Checks everything that does not need the numerics.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.model()?;
        self.axis()?;
        let s = self.grid.perturbation_scale;
        if !s.is_finite() {
            bail!("perturbation_scale must be finite, got {s}");
        }
        let h = &self.hermitian;
        if !(h.half_width_radii.is_finite() && h.half_width_radii > 0.0) {
            bail!(
                "hermitian half_width_radii must be positive, got {}",
                h.half_width_radii
            );
        }
        if h.resolution < 2 {
            bail!(
                "hermitian resolution must be at least 2, got {}",
                h.resolution
            );
        }
        Ok(())
    }
}
