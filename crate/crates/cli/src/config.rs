use std::fs;
use std::path::{Path, PathBuf};

use gradmesh::error_analysis::ErrorOptions;
use gradmesh::field::{Problem, RegularPart};
use gradmesh::mesh::io::read_text;
use gradmesh::mesh::{initial_mesh, DomainPreset, Mesh};
use gradmesh::singular::SingularTermConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Overrides `output_dir` from the config when set.
pub const OUTPUT_DIR_ENV: &str = "GRADMESH_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Preset(DomainPreset),
    /// Plain-text mesh file, relative to the config file.
    Mesh(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rule_degree: Option<u32>,
    pub tolerance: f64,
    pub max_levels: u32,
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let o = ErrorOptions::default();
        Self {
            rule_degree: o.rule_degree,
            tolerance: o.tolerance,
            max_levels: o.max_levels,
            order: o.order,
        }
    }
}

impl From<QuadratureConfig> for ErrorOptions {
    fn from(q: QuadratureConfig) -> Self {
        Self {
            rule_degree: q.rule_degree,
            tolerance: q.tolerance,
            max_levels: q.max_levels,
            order: q.order,
        }
    }
}

/// Which checks decide the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Verifiers {
    pub first_loop: bool,
    pub size_lemma: bool,
    pub conformity: bool,
    pub distance_monotonicity: bool,
    /// Require the size lemma to fail once its exponent is scaled by 1.1.
    pub negative_control: bool,
}

impl Default for Verifiers {
    fn default() -> Self {
        Self {
            first_loop: true,
            size_lemma: true,
            conformity: true,
            distance_monotonicity: true,
            negative_control: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Domain,
    #[serde(default)]
    pub singular_terms: Vec<SingularTermConfig>,
    #[serde(default)]
    pub regular: RegularPart,
    #[serde(default = "default_p")]
    pub p: u32,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub verifiers: Verifiers,
    /// Use `min γᵢ` instead of `min γᵢ/2`; only valid without log factors.
    #[serde(default)]
    pub sharp: bool,
    /// Defaults to `-0.45 p`.
    #[serde(default)]
    pub slope_threshold: Option<f64>,
    /// Also run uniform refinement over the same sweep.
    #[serde(default)]
    pub compare_uniform: bool,
}

fn default_p() -> u32 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A validated config with its mesh and target function built.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub mesh: Mesh,
    pub problem: Problem,
}

fn check_delta(delta: f64) -> Result<(), CliError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("delta must lie in (0, 1), got {delta}")))
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_config(config, base)
    }

    pub fn from_config(config: ExperimentConfig, base: &Path) -> Result<Self, CliError> {
        if config.p == 0 {
            return Err(CliError::Input("p must be at least 1".into()));
        }
        if let Some(d) = config.delta {
            check_delta(d)?;
        }
        for &d in config.deltas.iter().flatten() {
            check_delta(d)?;
        }
        let mesh = match &config.domain {
            Domain::Preset(p) => initial_mesh(p)?,
            Domain::Mesh(rel) => {
                let path = base.join(rel);
                let file = fs::File::open(&path).map_err(|e| {
                    CliError::Input(format!("cannot open mesh {}: {e}", path.display()))
                })?;
                read_text(std::io::BufReader::new(file)).map_err(|e| {
                    CliError::Input(format!("{}: {e}", path.display()))
                })?
            }
        };
        let mut terms = Vec::with_capacity(config.singular_terms.len());
        for (i, t) in config.singular_terms.iter().enumerate() {
            let term = t
                .build()
                .map_err(|e| CliError::Input(format!("singular term {i}: {e}")))?;
            term.cutoff
                .validate(config.p)
                .map_err(|e| CliError::Input(format!("singular term {i}: {e}")))?;
            terms.push(term);
        }
        let problem = Problem::new(config.regular.clone(), terms);
        Ok(Self {
            config,
            mesh,
            problem,
        })
    }

    pub fn single_delta(&self) -> Result<f64, CliError> {
        match (self.config.delta, &self.config.deltas) {
            (Some(d), _) => Ok(d),
            (None, Some(ds)) if ds.len() == 1 => Ok(ds[0]),
            (None, Some(_)) => Err(CliError::Usage(
                "this command takes a single delta; set \"delta\" in the config".into(),
            )),
            (None, None) => Err(CliError::Usage("the config does not set \"delta\"".into())),
        }
    }

    pub fn sweep(&self) -> Result<Vec<f64>, CliError> {
        match &self.config.deltas {
            Some(ds) if ds.len() >= 4 => Ok(ds.clone()),
            Some(ds) => Err(CliError::Usage(format!(
                "a convergence sweep needs at least 4 values in \"deltas\", got {}",
                ds.len()
            ))),
            None => Err(CliError::Usage(
                "a convergence sweep needs a \"deltas\" list, not a single delta".into(),
            )),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| self.config.output_dir.clone())
    }

    pub fn error_options(&self) -> ErrorOptions {
        self.config.quadrature.into()
    }

    pub fn slope_threshold(&self) -> f64 {
        self.config
            .slope_threshold
            .unwrap_or(-0.45 * self.config.p as f64)
    }
}
