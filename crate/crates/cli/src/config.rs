//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use wigner_kg::analytic::{gaussian_packet, plane_wave, Branch, TwoWaveSpec};
use wigner_kg::swl::ForceLaw;
use wigner_kg::{build_grid, Grid, MediumProfile, SimParams, SplitNorm, TimeModulation, C64};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub modulation: ModulationConfig,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub swl: SwlConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub case: Option<CaseConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitNormChoice {
    #[default]
    Half,
    InvSqrt2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub epsilon: f64,
    pub c: f64,
    pub omega_p0: f64,
    pub split_norm: SplitNormChoice,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            c: 1.0,
            omega_p0: 1.0,
            split_norm: SplitNormChoice::Half,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediumConfig {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Ramp {
        slope: f64,
        #[serde(default)]
        curvature: f64,
        center: f64,
        window: [f64; 2],
    },
    Sinusoid {
        amplitude: f64,
        wavelength: f64,
        #[serde(default)]
        phase: f64,
    },
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// One value per line, relative paths resolved against the config file.
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulationConfig {
    #[default]
    None,
    Constant {
        value: f64,
    },
    Harmonic {
        #[serde(default = "one")]
        mean: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum BranchChoice {
    #[default]
    Positive,
    Negative,
}

impl From<BranchChoice> for Branch {
    fn from(b: BranchChoice) -> Self {
        match b {
            BranchChoice::Positive => Branch::Positive,
            BranchChoice::Negative => Branch::Negative,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    #[serde(default = "one")]
    pub amplitude: f64,
    pub k: f64,
    #[serde(default)]
    pub branch: BranchChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    GaussianPacket {
        #[serde(default = "one")]
        amplitude: f64,
        center: f64,
        width: f64,
        k0: f64,
        #[serde(default)]
        branch: BranchChoice,
    },
    PlaneWaves {
        waves: Vec<WaveConfig>,
    },
    /// CSV with header and columns `phi_re, phi_im, dphi_re, dphi_im`, one row per node.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DtSetting {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dt {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: DtSetting,
    #[serde(default)]
    pub dt_kg: Option<DtSetting>,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub observer_stride: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForceChoice {
    #[default]
    RestFrequency,
    LocalFrequency,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SwlConfig {
    pub force: ForceChoice,
}

impl SwlConfig {
    pub fn law(&self) -> ForceLaw {
        match self.force {
            ForceChoice::RestFrequency => ForceLaw::RestFrequency,
            ForceChoice::LocalFrequency => ForceLaw::LocalFrequency,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Hash)]
pub enum Quantity {
    W0,
    W1,
    W2,
    W3,
    #[serde(rename = "W_PhiPhi")]
    WPhiPhi,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g")]
    G,
    J,
    #[serde(rename = "charge")]
    Charge,
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "residuals")]
    Residuals,
}

impl Quantity {
    pub fn file_stem(self) -> &'static str {
        match self {
            Quantity::W0 => "W0",
            Quantity::W1 => "W1",
            Quantity::W2 => "W2",
            Quantity::W3 => "W3",
            Quantity::WPhiPhi => "W_PhiPhi",
            Quantity::F => "f",
            Quantity::G => "g",
            Quantity::J => "J",
            Quantity::Charge => "charge",
            Quantity::Energy => "energy",
            Quantity::Residuals => "residuals",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    pub quantities: Vec<Quantity>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv],
            quantities: vec![
                Quantity::W0,
                Quantity::W1,
                Quantity::W2,
                Quantity::W3,
                Quantity::WPhiPhi,
                Quantity::Charge,
                Quantity::Energy,
            ],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "one")]
    pub amp0: f64,
    #[serde(default = "one")]
    pub amp1: f64,
    pub k0: f64,
    pub k1: f64,
    #[serde(default)]
    pub t: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("config", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { "config".to_string() } else { key };
            CliError::config(key, e.into_inner().to_string())
        })
    }

    /// Reads the file; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let MediumConfig::Tabulated { file } = &mut cfg.medium {
            *file = base.join(&*file);
        }
        if let Some(InitialConfig::File { path }) = &mut cfg.initial {
            *path = base.join(&*path);
        }
        Ok(cfg)
    }

    pub fn sim_params(&self) -> Result<SimParams, CliError> {
        let p = &self.params;
        let norm = match p.split_norm {
            SplitNormChoice::Half => SplitNorm::Half,
            SplitNormChoice::InvSqrt2 => SplitNorm::InvSqrt2,
        };
        Ok(SimParams::new(p.epsilon, p.c, p.omega_p0, norm)?)
    }

    pub fn build_grid(&self, params: &SimParams) -> Result<Grid, CliError> {
        Ok(build_grid(self.grid.n, self.grid.length, params)?)
    }

    pub fn medium(&self, grid: &Grid) -> Result<MediumProfile, CliError> {
        let m = match &self.medium {
            MediumConfig::Zero => MediumProfile::zero(),
            MediumConfig::Constant { value } => MediumProfile::constant(*value),
            MediumConfig::Ramp {
                slope,
                curvature,
                center,
                window,
            } => MediumProfile::quadratic_ramp(*slope, *curvature, *center, (window[0], window[1])),
            MediumConfig::Sinusoid {
                amplitude,
                wavelength,
                phase,
            } => MediumProfile::sinusoid(*amplitude, *wavelength, *phase),
            MediumConfig::GaussianBump {
                amplitude,
                center,
                width,
            } => MediumProfile::gaussian_bump(*amplitude, *center, *width),
            MediumConfig::Tabulated { file } => MediumProfile::tabulated(read_values(file)?),
        };
        let modulation = match self.modulation {
            ModulationConfig::None => TimeModulation::None,
            ModulationConfig::Constant { value } => TimeModulation::Constant(value),
            ModulationConfig::Harmonic {
                mean,
                amplitude,
                omega,
                phase,
            } => TimeModulation::Harmonic {
                mean,
                amplitude,
                omega,
                phase,
            },
        };
        let m = m.with_modulation(modulation);
        m.validate(grid)?;
        Ok(m)
    }

    pub fn initial(&self, grid: &Grid, params: &SimParams) -> Result<(Vec<C64>, Vec<C64>), CliError> {
        let init = self
            .initial
            .as_ref()
            .ok_or_else(|| CliError::config("initial", "section is required for this command"))?;
        match init {
            InitialConfig::GaussianPacket {
                amplitude,
                center,
                width,
                k0,
                branch,
            } => {
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(CliError::config("initial.width", "must be positive"));
                }
                Ok(gaussian_packet(
                    *amplitude,
                    *center,
                    *width,
                    *k0,
                    (*branch).into(),
                    grid,
                    params,
                ))
            }
            InitialConfig::PlaneWaves { waves } => {
                let zero = vec![C64::new(0.0, 0.0); grid.n()];
                let (mut f, mut d) = (zero.clone(), zero);
                for (i, w) in waves.iter().enumerate() {
                    grid.k_index(w.k)
                        .map_err(|e| CliError::config(format!("initial.waves[{i}].k"), e.to_string()))?;
                    let (a, b) = plane_wave(w.amplitude, w.k, w.branch.into(), 0.0, grid, params);
                    f.iter_mut().zip(a).for_each(|(x, y)| *x += y);
                    d.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                }
                Ok((f, d))
            }
            InitialConfig::File { path } => read_field(path, grid.n()),
        }
    }

    pub fn solver(&self) -> Result<&SolverConfig, CliError> {
        self.solver
            .as_ref()
            .ok_or_else(|| CliError::config("solver", "section is required for this command"))
    }

    pub fn case(&self) -> Result<TwoWaveSpec, CliError> {
        let c = self
            .case
            .as_ref()
            .ok_or_else(|| CliError::config("case", "section is required for this command"))?;
        Ok(TwoWaveSpec::new(c.amp0, c.amp1, c.k0, c.k1))
    }
}

impl SolverConfig {
    fn resolve(setting: &DtSetting, key: &str) -> Result<Dt, CliError> {
        match setting {
            DtSetting::Word(w) if w == "auto" => Ok(Dt::Auto),
            DtSetting::Word(w) => Err(CliError::config(
                key,
                format!("expected a number or \"auto\", got \"{w}\""),
            )),
            DtSetting::Value(v) if *v > 0.0 && v.is_finite() => Ok(Dt::Fixed(*v)),
            DtSetting::Value(v) => Err(CliError::config(key, format!("must be positive and finite, got {v}"))),
        }
    }

    pub fn dt(&self) -> Result<Dt, CliError> {
        Self::resolve(&self.dt, "solver.dt")
    }

    /// Field-equation step: `solver.dt_kg` when present, else `solver.dt`.
    pub fn dt_kg(&self) -> Result<(Dt, &'static str), CliError> {
        match &self.dt_kg {
            Some(s) => Ok((Self::resolve(s, "solver.dt_kg")?, "solver.dt_kg")),
            None => Ok((self.dt()?, "solver.dt")),
        }
    }
}

fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let key = "medium.file";
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(key, format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| CliError::config(key, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn read_field(path: &Path, n: usize) -> Result<(Vec<C64>, Vec<C64>), CliError> {
    let key = "initial.path";
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(key, format!("{}: {e}", path.display())))?;
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    for (i, line) in text.lines().skip(1).filter(|l| !l.trim().is_empty()).enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::config(key, format!("row {}: {e}", i + 1)))?;
        if v.len() != 4 {
            return Err(CliError::config(
                key,
                format!("row {}: expected 4 columns, found {}", i + 1, v.len()),
            ));
        }
        phi.push(C64::new(v[0], v[1]));
        dphi.push(C64::new(v[2], v[3]));
    }
    if phi.len() != n {
        return Err(CliError::config(
            key,
            format!("{} rows for a grid of {n} nodes", phi.len()),
        ));
    }
    Ok((phi, dphi))
}
