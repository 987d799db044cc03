//! Run configuration documents and sampled wave-function files.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};
use crate::grid::Axis;
use crate::special::OscillatorParams;
use crate::state::SampledWavefunction;
use crate::vlasov::PotentialSeries;

/// Relative tolerance on the spacing of sampled wave-function files.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Phase-space sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    pub fn x_axis(&self) -> Result<Axis> {
        Axis::new(self.x_min, self.x_max, self.nx).map_err(config_err("grid x"))
    }

    pub fn p_axis(&self) -> Result<Axis> {
        Axis::new(self.p_min, self.p_max, self.np).map_err(config_err("grid p"))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -4.0, x_max: 4.0, nx: 81, p_min: -4.0, p_max: 4.0, np: 81 }
    }
}

/// State description: exactly one of the three sources.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Expansion coefficients as [re, im] pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    /// Populations of a diagonal density matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub populations: Option<Vec<f64>>,
    /// CSV file of samples x, re[, im], relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavefunction: Option<PathBuf>,
    /// Highest basis index for projecting a sampled wave function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

/// Resolved state source.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Coefficients(Vec<Complex64>),
    Populations(Vec<f64>),
    Wavefunction { path: PathBuf, n_max: Option<usize> },
}

impl StateSpec {
    pub fn source(&self) -> Result<StateSource> {
        let given = [self.coefficients.is_some(), self.populations.is_some(), self.wavefunction.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(UdmError::Config(
                "state needs exactly one of coefficients, populations or wavefunction".into(),
            ));
        }
        if let Some(c) = &self.coefficients {
            if c.is_empty() {
                return Err(UdmError::Config("coefficient list is empty".into()));
            }
            if c.iter().flatten().any(|v| !v.is_finite()) {
                return Err(UdmError::Config("coefficients must be finite".into()));
            }
            return Ok(StateSource::Coefficients(c.iter().map(|&[re, im]| Complex64::new(re, im)).collect()));
        }
        if let Some(p) = &self.populations {
            if p.is_empty() {
                return Err(UdmError::Config("population list is empty".into()));
            }
            return Ok(StateSource::Populations(p.clone()));
        }
        let path = self.wavefunction.clone().expect("one source is present");
        Ok(StateSource::Wavefunction { path, n_max: self.n_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Analytic f₂ used by the dissipation command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Fixture {
    /// e^{−x²/2 − v²/2σ²} / 2πσ.
    Gaussian { sigma: f64 },
    /// The Gaussian times 1 + ε(v − v₀)⁴.
    Perturbed { sigma: f64, epsilon: f64, shift: f64 },
}

impl Fixture {
    pub fn validate(&self) -> Result<()> {
        let (sigma, extra) = match *self {
            Fixture::Gaussian { sigma } => (sigma, [0.0, 0.0]),
            Fixture::Perturbed { sigma, epsilon, shift } => (sigma, [epsilon, shift]),
        };
        if !(sigma.is_finite() && sigma > 0.0) || extra.iter().any(|v| !v.is_finite()) {
            return Err(UdmError::Config("fixture parameters must be finite with sigma > 0".into()));
        }
        if let Fixture::Perturbed { epsilon, .. } = *self {
            if epsilon < 0.0 {
                return Err(UdmError::Config("fixture epsilon must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, v: f64) -> f64 {
        let g = |sigma: f64| (-x * x / 2.0 - v * v / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma);
        match *self {
            Fixture::Gaussian { sigma } => g(sigma),
            Fixture::Perturbed { sigma, epsilon, shift } => g(sigma) * (1.0 + epsilon * (v - shift).powi(4)),
        }
    }
}

impl Default for Fixture {
    fn default() -> Self {
        Fixture::Gaussian { sigma: 1.0 }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: OscillatorParams,
    #[serde(default)]
    pub state: StateSpec,
    /// Potential coefficients; a harmonic potential at ω when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSeries>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<Fixture>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: OscillatorParams::natural(),
            state: StateSpec::default(),
            potential: None,
            grid: GridSpec::default(),
            output: OutputSpec::default(),
            fixture: None,
            base_dir: PathBuf::new(),
        }
    }
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| UdmError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UdmError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.x_axis()?;
        self.grid.p_axis()?;
        if let Some(f) = &self.fixture {
            f.validate()?;
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSeries> {
        match &self.potential {
            Some(u) => Ok(u.clone()),
            None => PotentialSeries::harmonic(self.params.omega()),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

fn config_err(what: &'static str) -> impl Fn(UdmError) -> UdmError {
    move |e| UdmError::Config(format!("{what}: {e}"))
}

/// Parses `x, re[, im]` rows on a uniform grid. A header row is optional.
pub fn parse_wavefunction_csv(text: &str) -> Result<SampledWavefunction> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| UdmError::Config(format!("wave-function csv: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if line == 0 && xs.is_empty() => continue,
            Err(e) => return Err(UdmError::Config(format!("wave-function csv row {}: {e}", line + 1))),
        };
        if !(2..=3).contains(&row.len()) {
            return Err(UdmError::Config(format!(
                "wave-function csv row {} has {} columns; expected x,re[,im]",
                line + 1,
                row.len()
            )));
        }
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(UdmError::Config(format!("wave-function csv row {} changes the column count", line + 1)));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(UdmError::Config(format!("wave-function csv row {} is not finite", line + 1)));
        }
        xs.push(row[0]);
        values.push(Complex64::new(row[1], row.get(2).copied().unwrap_or(0.0)));
    }
    if xs.len() < 2 {
        return Err(UdmError::Config("wave-function csv needs at least two rows".into()));
    }
    let n = xs.len();
    let (min, max) = (xs[0], xs[n - 1]);
    let axis = Axis::new(min, max, n).map_err(config_err("wave-function csv"))?;
    let h = axis.step();
    for (i, pair) in xs.windows(2).enumerate() {
        if !((pair[1] - pair[0] - h).abs() <= SPACING_TOLERANCE * h) {
            return Err(UdmError::Config(format!("wave-function csv: x spacing is not uniform at row {}", i + 2)));
        }
    }
    SampledWavefunction::new(axis, values).map_err(config_err("wave-function csv"))
}

pub fn read_wavefunction_csv(path: &Path) -> Result<SampledWavefunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UdmError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_wavefunction_csv(&text)
}
