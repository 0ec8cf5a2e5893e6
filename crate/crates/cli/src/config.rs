//! Run configuration: one JSON document, every section optional.

use heis_besov::group_core::{GroupPoint, Weight};
use heis_besov::littlewood_paley::{BesovParams, PartitionOfUnity};
use heis_besov::pam_solver::{Exponents, SolverConfig, TauRule, WeightSchedule};
use heis_besov::paraproduct::ProductMode;
use heis_besov::spectral::{io, FrequencyGrid, GeneratorScale, GridSpec, SpatialField, SpatialGrid, Truncation};
use heis_besov::stochastics::NoiseParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// A configuration that failed to parse or validate; maps to exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending field, or `config` for cross-field checks.
    pub path: String,
    pub message: String,
}

fn fail(path: &str, message: impl ToString) -> ConfigError {
    ConfigError { path: path.to_string(), message: message.to_string() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSection,
    pub grids: GridsSection,
    pub spectral: SpectralSection,
    pub besov: BesovParams,
    /// Input of the single-field subcommands.
    pub field: FieldSource,
    /// Second factor of `paraproduct`.
    pub second_field: FieldSource,
    pub heat: HeatSection,
    pub green: GreenSection,
    pub noise: NoiseSection,
    pub solver: SolverSection,
    pub output: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupSection {
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridsSection {
    pub spatial: SpatialGrid,
    pub frequency: GridSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub k_max: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// `exp(−r²/(2s²) − (z−z0)²/(2 s_z²))`.
    Gaussian { s: f64, sz: f64, z0: f64 },
    /// An `HBSF` or JSON spatial field.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSection {
    pub scale: GeneratorScale,
    /// Times of the kernel table.
    pub times: Vec<f64>,
    /// Points `(x, y, z)` of the kernel table, evaluated at every time.
    pub points: Vec<[f64; 3]>,
    /// Time of the semigroup applied to `field`.
    pub apply: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSection {
    pub alphas: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub zeta: f64,
    pub alpha: f64,
    pub c_gamma: f64,
    pub horizon: f64,
    /// The path has `2^level` steps.
    pub level: u32,
    pub constant: f64,
    pub spatial: f64,
    pub research_mode: bool,
    /// Monte-Carlo sample size of `noise-verify`.
    pub replicates: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub horizon: f64,
    pub steps: usize,
    pub sub_level: u32,
    pub exponents: Exponents,
    pub schedule: WeightSchedule,
    pub alpha: f64,
    pub beta: f64,
    pub picard_max: usize,
    pub picard_tol: f64,
    pub product: ProductMode,
    pub tau: TauRule,
    /// Spatial grid of the solution.
    pub grid: SpatialGrid,
    pub initial: FieldSource,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: GroupSection::default(),
            grids: GridsSection::default(),
            spectral: SpectralSection::default(),
            besov: BesovParams { gamma: 0.5, alpha: 2.0, beta: 2.0, weight: Weight::unit() },
            field: FieldSource::Gaussian { s: 1.0, sz: 4.0, z0: 0.0 },
            second_field: FieldSource::Gaussian { s: 1.2, sz: 4.0, z0: 0.5 },
            heat: HeatSection::default(),
            green: GreenSection::default(),
            noise: NoiseSection::default(),
            solver: SolverSection::default(),
            output: PathBuf::from("out"),
            seed: 7,
        }
    }
}

impl Default for GroupSection {
    fn default() -> Self {
        GroupSection { n: 1 }
    }
}

/// Desk-scale grids: a 63² × 64 box and a phase-space truncated λ grid
/// resolving Gaussians of unit width.
impl Default for GridsSection {
    fn default() -> Self {
        let tol: f64 = 14.0;
        let r = (2.0 * tol).sqrt();
        GridsSection {
            spatial: SpatialGrid::new(1, 7.5, 63, 30.0, 64).expect("default spatial grid"),
            frequency: GridSpec {
                n: 1,
                lambda_min: 1.0 / 64.0,
                lambda_max: r / 4.0,
                order: 6,
                ratio: 2.0,
                max_panel: 0.2,
                truncation: Truncation::PhaseSpace { radius: r, bandwidth: r, floor: 8, cap: 8192, eigen_max: 400.0 },
                band: 0,
            },
        }
    }
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection { k_max: 6 }
    }
}

impl Default for HeatSection {
    fn default() -> Self {
        HeatSection {
            scale: GeneratorScale::Half,
            times: vec![0.1, 0.5, 1.0],
            points: vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.3, -0.4, 0.5], [0.0, 0.0, 1.0], [1.0, 1.0, -1.5]],
            apply: 0.5,
        }
    }
}

impl Default for GreenSection {
    fn default() -> Self {
        GreenSection { alphas: vec![0.75], points: vec![[0.5, -0.3, 0.8], [1.0, 0.2, -0.4], [0.3, 0.0, 2.0]] }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            zeta: 0.5,
            alpha: 0.75,
            c_gamma: 1.0,
            horizon: 1.0,
            level: 4,
            constant: 0.0,
            spatial: 1.0,
            research_mode: false,
            replicates: 10_000,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            horizon: 0.25,
            steps: 4,
            sub_level: 2,
            exponents: Exponents { theta: 0.35, vartheta: 0.7, gamma: 0.3, kappa: 0.4 },
            schedule: WeightSchedule { nu: 0.1, b: 1.0, eta: 0.5 },
            alpha: 2.0,
            beta: 2.0,
            picard_max: 40,
            picard_tol: 1e-7,
            product: ProductMode::Paraproduct,
            tau: TauRule::default(),
            grid: SpatialGrid::new(1, 6.0, 33, 24.0, 32).expect("default solver grid"),
            initial: FieldSource::Gaussian { s: 1.0, sz: 4.0, z0: 0.0 },
        }
    }
}

impl RunConfig {
    /// Parses JSON, reporting the path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            fail(if path.is_empty() || path == "." { "config" } else { &path }, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| fail("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Field and cross-field checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.group.n;
        if n == 0 {
            return Err(fail("group.n", "must be at least 1"));
        }
        self.grids.spatial.validate().map_err(|e| fail("grids.spatial", e))?;
        self.grids.frequency.validate().map_err(|e| fail("grids.frequency", e))?;
        self.solver.grid.validate().map_err(|e| fail("solver.grid", e))?;
        for (path, got) in [
            ("grids.spatial.n", self.grids.spatial.n),
            ("grids.frequency.n", self.grids.frequency.n),
            ("solver.grid.n", self.solver.grid.n),
        ] {
            if got != n {
                return Err(fail(path, format!("dimension {got} differs from group.n = {n}")));
            }
        }
        if !(0..=12).contains(&self.spectral.k_max) {
            return Err(fail("spectral.k_max", "must lie in 0..=12"));
        }
        self.besov.validate().map_err(|e| fail("besov", e))?;
        for (path, src) in [("field", &self.field), ("second_field", &self.second_field), ("solver.initial", &self.solver.initial)] {
            if let FieldSource::Gaussian { s, sz, z0 } = src {
                if !(*s > 0.0 && *sz > 0.0 && z0.is_finite()) {
                    return Err(fail(path, "widths must be positive"));
                }
            }
        }
        if self.heat.times.iter().any(|t| !(*t > 0.0)) || !(self.heat.apply >= 0.0) {
            return Err(fail("heat.times", "times must be positive"));
        }
        if self.green.alphas.iter().any(|a| !(*a > 0.0 && *a < (n as f64 + 1.0) / 2.0)) {
            return Err(fail("green.alphas", "need 0 < alpha < (n+1)/2"));
        }
        if self.green.points.iter().any(|p| p.iter().all(|c| *c == 0.0)) {
            return Err(fail("green.points", "the kernel is singular at the identity"));
        }
        let nz = &self.noise;
        if !(nz.horizon > 0.0 && nz.horizon.is_finite()) {
            return Err(fail("noise.horizon", "must be positive"));
        }
        if nz.level > 11 {
            return Err(fail("noise.level", "at most 11"));
        }
        if nz.replicates == 0 {
            return Err(fail("noise.replicates", "must be positive"));
        }
        if !nz.research_mode {
            let bad = admissibility_violations(nz.zeta, nz.alpha, n);
            if !bad.is_empty() {
                return Err(fail("noise", format!("(zeta, alpha) = ({}, {}) is not admissible: {}", nz.zeta, nz.alpha, bad.join("; "))));
            }
        }
        self.noise_params(NoiseParams::dyadic_times(nz.horizon, nz.level))
            .validate(n)
            .map_err(|e| fail("noise", e))?;
        self.solver_config().validate().map_err(|e| fail("solver", e))?;
        Ok(())
    }

    pub fn noise_params(&self, times: Vec<f64>) -> NoiseParams {
        let nz = &self.noise;
        NoiseParams {
            zeta: nz.zeta,
            alpha: nz.alpha,
            c_gamma: nz.c_gamma,
            seed: self.seed,
            times,
            constant: nz.constant,
            spatial: nz.spatial,
            research_mode: nz.research_mode,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            horizon: s.horizon,
            steps: s.steps,
            sub_level: s.sub_level,
            exponents: s.exponents,
            schedule: s.schedule,
            alpha: s.alpha,
            beta: s.beta,
            picard_max: s.picard_max,
            picard_tol: s.picard_tol,
            product: s.product,
            rule: Default::default(),
            tau: s.tau,
            scale: GeneratorScale::Half,
        }
    }

    pub fn frequency_grid(&self) -> heis_besov::Result<Arc<FrequencyGrid>> {
        Ok(Arc::new(FrequencyGrid::new(self.grids.frequency.clone())?))
    }

    pub fn partition(&self) -> heis_besov::Result<PartitionOfUnity> {
        PartitionOfUnity::build(&self.frequency_grid()?, self.spectral.k_max)
    }

    pub fn spatial_grid(&self) -> Arc<SpatialGrid> {
        Arc::new(self.grids.spatial.clone())
    }
}

impl FieldSource {
    /// Samples the source on `grid`; a file brings its own grid.
    pub fn load(&self, grid: &Arc<SpatialGrid>) -> anyhow::Result<SpatialField> {
        match self {
            FieldSource::Gaussian { s, sz, z0 } => Ok(SpatialField::from_fn(grid.clone(), gaussian(*s, *sz, *z0))),
            FieldSource::File { path } => {
                let bytes = std::fs::read(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                Ok(io::read_spatial(&bytes)?)
            }
        }
    }
}

/// The failing parts of `0 < ζ < 1`, `(n+1)/2 − (1−ζ) < α < (n+1)/2`.
pub fn admissibility_violations(zeta: f64, alpha: f64, n: usize) -> Vec<String> {
    let h = (n as f64 + 1.0) / 2.0;
    let mut out = vec![];
    if !(zeta > 0.0 && zeta < 1.0) {
        out.push(format!("0 < zeta < 1 fails: zeta = {zeta}"));
    }
    if !(alpha > h - (1.0 - zeta)) {
        out.push(format!("alpha > (n+1)/2 - (1 - zeta) fails: {alpha} <= {}", h - (1.0 - zeta)));
    }
    if !(alpha < h) {
        out.push(format!("alpha < (n+1)/2 fails: {alpha} >= {h}"));
    }
    out
}

pub fn gaussian(s: f64, sz: f64, z0: f64) -> impl Fn(&GroupPoint) -> f64 + Sync {
    move |q: &GroupPoint| (-q.horizontal_norm_sq() / (2.0 * s * s) - (q.z - z0).powi(2) / (2.0 * sz * sz)).exp()
}
