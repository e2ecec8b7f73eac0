//! Experiment configuration: TOML on disk, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use topoloc::codes::{build_color, build_kitaev, CodeLattice, LoopSpec};
use topoloc::dynamics::{BathParams, EvolveConfig, DEFAULT_DT, DEFAULT_MAX_DIM, DEFAULT_RECORD_EVERY, DEFAULT_THRESHOLD, POSITIVITY_FLOOR};
use topoloc::estimators::{default_region, EstimatorOptions, Registry};
use topoloc::localize::{EntanglementMeasure, MeasurementSetup, DEFAULT_CALIBRATION, DEFAULT_P_C};
use topoloc::qpt::uniform_grid;
use topoloc::witness::build_witness;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Kitaev,
    Color,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Plaquettes per row and rows (Kitaev), or columns and rows (color).
    pub dims: [usize; 2],
    #[serde(rename = "loop")]
    pub loop_spec: String,
    /// Part A of the loop bipartition as 1-based qubit labels; the witness hub if unset.
    pub part_a: Option<Vec<usize>>,
    /// Explicit setup such as `"Z:7,8,9; X:rest"` in place of the canonical one.
    pub setup: Option<String>,
    /// Estimator names; `e_prime`, `e_dprime` and (when the loop has one) `e_witness` if unset.
    pub bounds: Option<Vec<String>>,
    pub measure: EntanglementMeasure,
    /// Seed for the LE optimizer starts.
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide. `TOPOLOC_WORKERS` overrides.
    pub workers: usize,
    pub grid: GridConfig,
    pub preferred: PreferredConfig,
    pub dynamics: DynamicsConfig,
    pub scaling: ScalingConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: Model::Kitaev,
            dims: [2, 2],
            loop_spec: "xh".into(),
            part_a: None,
            setup: None,
            bounds: None,
            measure: EntanglementMeasure::Negativity,
            seed: 0,
            workers: 0,
            grid: GridConfig::default(),
            preferred: PreferredConfig::default(),
            dynamics: DynamicsConfig::default(),
            scaling: ScalingConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub g_min: f64,
    pub g_max: f64,
    pub step: f64,
    /// Explicit field values; replaces the uniform grid when set.
    pub values: Option<Vec<f64>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { g_min: 0.0, g_max: 2.0, step: 0.02, values: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreferredConfig {
    pub p_c: f64,
    /// Fields whose likely outcomes form the preferred set; must include 0.
    pub calibration: Vec<f64>,
}

impl Default for PreferredConfig {
    fn default() -> Self {
        PreferredConfig { p_c: DEFAULT_P_C, calibration: DEFAULT_CALIBRATION.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    /// Ohmicity of a Markovian run paired with every non-Markovian one, for
    /// collapse times in both modes.
    pub markovian_s: Option<f64>,
    pub omega_c: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: f64,
    pub threshold: f64,
    pub max_dim: usize,
    pub positivity_floor: f64,
    /// Abort on eigenvalues below the floor; off just records them.
    pub enforce_positivity: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            g: vec![0.1],
            s: vec![3.0],
            markovian_s: None,
            omega_c: 1.0,
            t_end: 50.0,
            dt: DEFAULT_DT,
            record_every: DEFAULT_RECORD_EVERY,
            threshold: DEFAULT_THRESHOLD,
            max_dim: DEFAULT_MAX_DIM,
            positivity_floor: POSITIVITY_FLOOR,
            enforce_positivity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub sizes: Vec<[usize; 2]>,
    /// `e_dprime` or `e_witness`.
    pub bound: String,
    /// Thermodynamic critical field; the model's known value if unset.
    pub g_c: Option<f64>,
    /// Fit peaks synthesized from `g_c + amplitude N^-exponent` instead of sweeping.
    pub synthetic: Option<SyntheticPeaks>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { sizes: vec![[2, 2], [3, 2], [4, 2], [3, 3]], bound: "e_dprime".into(), g_c: None, synthetic: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPeaks {
    pub amplitude: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Prepended to every file name.
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("results"), prefix: String::new() }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn lattice(&self) -> Result<CodeLattice> {
        let [a, b] = self.dims;
        let lat = match self.model {
            Model::Kitaev => build_kitaev(a, b),
            Model::Color => build_color(a, b),
        };
        Ok(lat?)
    }

    pub fn loop_spec(&self) -> Result<LoopSpec> {
        Ok(self.loop_spec.parse::<LoopSpec>()?)
    }

    /// Part A converted to 0-based qubit indices.
    pub fn part_a_indices(&self) -> Result<Option<Vec<usize>>> {
        match &self.part_a {
            None => Ok(None),
            Some(labels) => labels
                .iter()
                .map(|&l| l.checked_sub(1).ok_or_else(|| CliError::Config("qubit labels start at 1".into())))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    pub fn bound_names(&self, lat: &CodeLattice, spec: &LoopSpec) -> Result<Vec<String>> {
        let names = match &self.bounds {
            Some(b) => b.clone(),
            None => {
                let mut v = vec!["e_prime".to_string(), "e_dprime".to_string()];
                if build_witness(lat, spec).is_ok() && self.part_a.is_none() {
                    v.push("e_witness".into());
                }
                v
            }
        };
        if names.is_empty() {
            return Err(CliError::Config("no bounds requested".into()));
        }
        let reg = Registry::default();
        for n in &names {
            reg.get(n)?;
        }
        Ok(names)
    }

    pub fn estimator_options(&self, lat: &CodeLattice, spec: &LoopSpec) -> Result<EstimatorOptions> {
        let part_a = self.part_a_indices()?;
        let setup = match &self.setup {
            Some(text) => {
                let region = default_region(lat, spec, part_a.clone())?;
                Some(MeasurementSetup::parse(text, &region)?)
            }
            None => None,
        };
        let mut opts = EstimatorOptions {
            part_a,
            setup,
            measure: self.measure,
            p_c: self.preferred.p_c,
            calibration: self.preferred.calibration.clone(),
            ..Default::default()
        };
        opts.le.seed = self.seed;
        Ok(opts)
    }

    pub fn g_grid(&self) -> Result<Vec<f64>> {
        match &self.grid.values {
            Some(v) => Ok(v.clone()),
            None => Ok(uniform_grid(self.grid.g_min, self.grid.g_max, self.grid.step)?),
        }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        let d = &self.dynamics;
        EvolveConfig {
            t_end: d.t_end,
            dt: d.dt,
            record_every: d.record_every,
            threshold: d.threshold,
            max_dim: d.max_dim,
            positivity_floor: d.enforce_positivity.then_some(d.positivity_floor),
            ..Default::default()
        }
    }

    pub fn bath(&self, s: f64) -> Result<BathParams> {
        Ok(BathParams::new(s, self.dynamics.omega_c)?)
    }

    /// Schema checks that need no lattice.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.dims.iter().any(|&d| d < 2) {
            return bad(format!("dims must be at least 2x2, got {:?}", self.dims));
        }
        self.loop_spec()?;
        self.part_a_indices()?;
        let fields: Vec<f64> = match &self.grid.values {
            Some(v) => v.clone(),
            None => {
                let g = &self.grid;
                if !(g.step > 0.0) || !(g.g_max >= g.g_min) {
                    return bad(format!("grid needs step > 0 and g_max >= g_min, got {g:?}"));
                }
                vec![g.g_min, g.g_max]
            }
        };
        if fields.is_empty() || fields.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("field values must be finite and non-negative".into());
        }
        let p = &self.preferred;
        if !(p.p_c > 0.0 && p.p_c < 1.0) {
            return bad(format!("p_c must lie in (0, 1), got {}", p.p_c));
        }
        if !p.calibration.contains(&0.0) || p.calibration.iter().any(|g| !(*g >= 0.0)) {
            return bad("calibration fields must be non-negative and include 0".into());
        }
        let d = &self.dynamics;
        if d.g.is_empty() || d.s.is_empty() {
            return bad("dynamics needs at least one g and one s".into());
        }
        if d.g.iter().any(|g| !(*g >= 0.0)) {
            return bad("dynamics fields must be non-negative".into());
        }
        for s in d.s.iter().chain(&d.markovian_s) {
            self.bath(*s)?;
        }
        if let Some(m) = d.markovian_s {
            if m > topoloc::dynamics::CRITICAL_OHMICITY {
                return bad(format!("markovian_s = {m} is above the Markovian range s <= 2"));
            }
        }
        if !(d.dt > 0.0 && d.t_end > 0.0 && d.record_every >= d.dt && d.threshold >= 0.0) {
            return bad("dynamics needs dt > 0, t_end > 0, record_every >= dt and threshold >= 0".into());
        }
        let sc = &self.scaling;
        if !matches!(sc.bound.as_str(), "e_dprime" | "e_witness") {
            return bad(format!("scaling bound must be e_dprime or e_witness, got {}", sc.bound));
        }
        if let Some(s) = sc.synthetic {
            if !(s.amplitude > 0.0 && s.exponent > 0.0) {
                return bad("synthetic peaks need positive amplitude and exponent".into());
            }
        }
        Ok(())
    }

    /// Output path `dir/prefix + name`.
    pub fn output_path(&self, name: &str) -> PathBuf {
        self.output.dir.join(format!("{}{name}", self.output.prefix))
    }
}

/// Worker count: `TOPOLOC_WORKERS` wins over the config value.
pub fn resolve_workers(configured: usize) -> Result<usize> {
    match std::env::var("TOPOLOC_WORKERS") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("TOPOLOC_WORKERS = `{v}` is not a count"))),
        Err(_) => Ok(configured),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_the_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.preferred.p_c, 1e-10);
        assert_eq!(c.preferred.calibration, vec![0.0, 0.2]);
        assert_eq!(c.dynamics.omega_c, 1.0);
        assert_eq!(c.dynamics.threshold, 1e-8);
        assert_eq!(c.dynamics.t_end, 50.0);
        assert_eq!(c.g_grid().unwrap().len(), 101);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("modle = \"kitaev\""), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::from_toml("[grid]\nsteps = 0.1"), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_location_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn schema_violations() {
        let cases = [
            "dims = [1, 2]",
            "loop = \"yh\"",
            "part_a = [0]",
            "[grid]\nstep = 0.0",
            "[preferred]\ncalibration = [0.2]",
            "[preferred]\np_c = 2.0",
            "[dynamics]\ns = [0.0]",
            "[dynamics]\nmarkovian_s = 3.0",
            "[scaling]\nbound = \"le\"",
        ];
        for text in cases {
            let c = ExperimentConfig::from_toml(text).unwrap();
            assert!(matches!(c.validate(), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn default_bounds_follow_the_loop() {
        let c = ExperimentConfig::default();
        let lat = c.lattice().unwrap();
        let names = c.bound_names(&lat, &c.loop_spec().unwrap()).unwrap();
        assert_eq!(names, ["e_prime", "e_dprime", "e_witness"]);
        let color = ExperimentConfig { model: Model::Color, dims: [3, 2], loop_spec: "xhr".into(), ..Default::default() };
        let lat = color.lattice().unwrap();
        assert_eq!(color.bound_names(&lat, &color.loop_spec().unwrap()).unwrap(), ["e_prime", "e_dprime"]);
    }
}
