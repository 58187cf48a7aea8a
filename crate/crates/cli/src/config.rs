//! Experiment configuration (TOML) and its validation.
//!
//! Parsing only checks syntax and types; [`ExperimentConfig::validate`]
//! checks every referenced block for the chosen command and reports the
//! first problem with its field path.

use std::path::Path;

use serde::{Deserialize, Serialize};
use xprop::classical::{ExtendedState, Precision};
use xprop::kernel::{sampling_ratio, Backend, QuadratureRule, StepConfig, QUADRATURE_GUARD};
use xprop::kg::DerivativeScheme;
use xprop::{PhysicalConstants, PotentialField, SpacetimeGrid, WaveComponent};

use crate::Command;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

fn invalid(path: impl Into<String>, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        msg: msg.to_string(),
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub seed: Option<u64>,
    #[serde(default = "PhysicalConstants::natural")]
    pub constants: PhysicalConstants,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub classical: Option<ClassicalSpec>,
    pub initial_field: Option<FieldSpec>,
    pub propagation: Option<PropagationSpec>,
    pub kg_suite: Option<KgSuiteSpec>,
    pub moments: Option<MomentsSpec>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: Vec<usize>,
    pub extents: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    Constant {
        components: Vec<f64>,
    },
    ConstantElectric {
        field: f64,
    },
    ConstantMagnetic {
        field: f64,
    },
    Wave {
        components: Vec<WaveComponent>,
    },
    /// A_α = amplitude_α cos(2π q^α / L_α); needs `[grid]`.
    LongitudinalWave {
        amplitudes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    pub q: Vec<f64>,
    /// Full d-velocity; may be off shell.
    pub u: Option<Vec<f64>>,
    /// Spatial components only; u⁰ is put on shell.
    pub spatial_u: Option<Vec<f64>>,
    pub s_span: f64,
    pub steps: usize,
    #[serde(default)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Gaussian {
        center: Vec<f64>,
        width: Vec<f64>,
        carrier: Vec<f64>,
    },
    PlaneWave {
        modes: Vec<i64>,
    },
    /// Band-limited random field drawn from the run seed.
    Random {
        max_mode: i64,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSpec {
    pub epsilon: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub rule: QuadratureRule,
    pub n_steps: usize,
    #[serde(default = "default_guard")]
    pub grid_guard: usize,
    /// Write a snapshot every this many steps; 0 writes only initial and final.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_guard() -> usize {
    QUADRATURE_GUARD
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KgSuiteSpec {
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub rule: QuadratureRule,
    #[serde(default)]
    pub scheme: DerivativeScheme,
    #[serde(default = "default_random_fields")]
    pub random_fields: usize,
    #[serde(default = "default_max_mode")]
    pub max_mode: i64,
    #[serde(default = "default_moment_epsilon")]
    pub moment_epsilon: f64,
    #[serde(default = "default_moment_potential")]
    pub moment_potential: Vec<f64>,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_random_fields() -> usize {
    20
}

fn default_max_mode() -> i64 {
    4
}

fn default_moment_epsilon() -> f64 {
    1.0
}

fn default_moment_potential() -> Vec<f64> {
    vec![0.0, 0.0]
}

impl Default for KgSuiteSpec {
    fn default() -> Self {
        Self {
            eps_list: default_eps_list(),
            backend: Backend::default(),
            rule: QuadratureRule::default(),
            scheme: DerivativeScheme::default(),
            random_fields: default_random_fields(),
            max_mode: default_max_mode(),
            moment_epsilon: default_moment_epsilon(),
            moment_potential: default_moment_potential(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSpec {
    #[serde(default = "default_moment_eps")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_moment_potential")]
    pub potential: Vec<f64>,
    #[serde(default = "default_moment_tolerance")]
    pub tolerance: f64,
}

fn default_moment_eps() -> Vec<f64> {
    vec![0.5, 1.0]
}

fn default_moment_tolerance() -> f64 {
    1e-6
}

impl Default for MomentsSpec {
    fn default() -> Self {
        Self {
            epsilon: default_moment_eps(),
            potential: default_moment_potential(),
            tolerance: default_moment_tolerance(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
}

/// Everything a command needs, built and checked before any computation.
#[derive(Debug, Clone)]
pub enum Plan {
    Classical {
        constants: PhysicalConstants,
        potential: PotentialField,
        initial: ExtendedState,
        spec: ClassicalSpec,
    },
    Propagate {
        grid: SpacetimeGrid,
        field: FieldSpec,
        step: StepConfig,
        spec: PropagationSpec,
    },
    KgSuite {
        grid: SpacetimeGrid,
        field: FieldSpec,
        potential: PotentialField,
        constants: PhysicalConstants,
        spec: KgSuiteSpec,
    },
    Moments {
        constants: PhysicalConstants,
        spec: MomentsSpec,
    },
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn validate(&self, command: Command) -> Result<Plan> {
        self.constants
            .validate()
            .map_err(|e| invalid("constants", e))?;
        let k = self.constants;
        match command {
            Command::Classical => {
                let spec = self
                    .classical
                    .clone()
                    .ok_or_else(|| invalid("classical", "section required"))?;
                let d = spec.q.len();
                if !(2..=4).contains(&d) {
                    return Err(invalid(
                        "classical.q",
                        format!("need 2..=4 entries, got {d}"),
                    ));
                }
                let grid = self.grid()?;
                let potential = self.potential_field(d, grid.as_ref())?;
                let initial = initial_state(&spec, &k)?;
                if !(spec.s_span.is_finite() && spec.s_span > 0.0) {
                    return Err(invalid("classical.s_span", "must be > 0"));
                }
                if spec.steps == 0 {
                    return Err(invalid("classical.steps", "must be >= 1"));
                }
                Ok(Plan::Classical {
                    constants: k,
                    potential,
                    initial,
                    spec,
                })
            }
            Command::Propagate => {
                let grid = self
                    .grid()?
                    .ok_or_else(|| invalid("grid", "section required"))?;
                let field = self
                    .initial_field
                    .clone()
                    .ok_or_else(|| invalid("initial_field", "section required"))?;
                check_field(&field, &grid)?;
                let spec = self
                    .propagation
                    .clone()
                    .ok_or_else(|| invalid("propagation", "section required"))?;
                let potential = self.potential_field(grid.dim(), Some(&grid))?;
                let mut step =
                    StepConfig::new(spec.epsilon, spec.backend, k, potential).with_rule(spec.rule);
                step.grid_guard = spec.grid_guard;
                step.validate_for(&grid)
                    .map_err(|e| invalid("propagation", e))?;
                Ok(Plan::Propagate {
                    grid,
                    field,
                    step,
                    spec,
                })
            }
            Command::KgSuite => {
                let grid = self
                    .grid()?
                    .ok_or_else(|| invalid("grid", "section required"))?;
                let field = self
                    .initial_field
                    .clone()
                    .ok_or_else(|| invalid("initial_field", "section required"))?;
                check_field(&field, &grid)?;
                let spec = self.kg_suite.clone().unwrap_or_default();
                let potential = self.potential_field(grid.dim(), Some(&grid))?;
                let eps = &spec.eps_list;
                if eps.len() < 3 {
                    return Err(invalid("kg_suite.eps_list", "need at least 3 values"));
                }
                if eps.iter().any(|e| !(e.is_finite() && *e > 0.0))
                    || eps.windows(2).any(|w| w[1] >= w[0])
                {
                    return Err(invalid(
                        "kg_suite.eps_list",
                        "values must be positive and strictly decreasing",
                    ));
                }
                let step = StepConfig::new(eps[0], spec.backend, k, potential.clone())
                    .with_rule(spec.rule);
                step.validate_for(&grid)
                    .map_err(|e| invalid("kg_suite.backend", e))?;
                if spec.backend == Backend::Quadrature {
                    for (i, &e) in eps.iter().enumerate() {
                        let ratio = sampling_ratio(&grid, e, &k);
                        if ratio > 1.0 {
                            return Err(invalid(
                                format!("kg_suite.eps_list[{i}]"),
                                format!("quadrature sampling ratio {ratio:.3} > 1"),
                            ));
                        }
                    }
                }
                if spec.random_fields == 0 {
                    return Err(invalid("kg_suite.random_fields", "must be >= 1"));
                }
                if spec.max_mode < 0 {
                    return Err(invalid("kg_suite.max_mode", "must be >= 0"));
                }
                if !(spec.moment_epsilon.is_finite() && spec.moment_epsilon > 0.0) {
                    return Err(invalid("kg_suite.moment_epsilon", "must be > 0"));
                }
                if !(1..=2).contains(&spec.moment_potential.len()) {
                    return Err(invalid("kg_suite.moment_potential", "need 1 or 2 entries"));
                }
                Ok(Plan::KgSuite {
                    grid,
                    field,
                    potential,
                    constants: k,
                    spec,
                })
            }
            Command::Moments => {
                let spec = self.moments.clone().unwrap_or_default();
                if spec.epsilon.is_empty()
                    || spec.epsilon.iter().any(|e| !(e.is_finite() && *e > 0.0))
                {
                    return Err(invalid("moments.epsilon", "need positive values"));
                }
                if !(1..=2).contains(&spec.potential.len()) {
                    return Err(invalid("moments.potential", "need 1 or 2 entries"));
                }
                if !(spec.tolerance > 0.0) {
                    return Err(invalid("moments.tolerance", "must be > 0"));
                }
                Ok(Plan::Moments { constants: k, spec })
            }
        }
    }

    fn grid(&self) -> Result<Option<SpacetimeGrid>> {
        self.grid
            .as_ref()
            .map(|g| {
                SpacetimeGrid::new(g.points.clone(), g.extents.clone())
                    .map_err(|e| invalid("grid", e))
            })
            .transpose()
    }

    fn potential_field(&self, d: usize, grid: Option<&SpacetimeGrid>) -> Result<PotentialField> {
        let check_len = |name: &str, n: usize| {
            if n == d {
                Ok(())
            } else {
                Err(invalid(
                    format!("potential.{name}"),
                    format!("need {d} entries, got {n}"),
                ))
            }
        };
        let field = match &self.potential {
            PotentialSpec::Zero => PotentialField::zero(d),
            PotentialSpec::Constant { components } => {
                check_len("components", components.len())?;
                PotentialField::constant(components.clone())
            }
            PotentialSpec::ConstantElectric { field } => PotentialField::electric(d, *field),
            PotentialSpec::ConstantMagnetic { field } => {
                if d != 4 {
                    return Err(invalid("potential.kind", "constant-magnetic needs d = 4"));
                }
                PotentialField::magnetic(*field)
            }
            PotentialSpec::Wave { components } => {
                check_len("components", components.len())?;
                for (i, c) in components.iter().enumerate() {
                    if c.wavevector.len() != d {
                        return Err(invalid(
                            format!("potential.components[{i}].wavevector"),
                            format!("need {d} entries"),
                        ));
                    }
                }
                PotentialField::Wave {
                    components: components.clone(),
                }
            }
            PotentialSpec::LongitudinalWave { amplitudes } => {
                check_len("amplitudes", amplitudes.len())?;
                let grid = grid
                    .ok_or_else(|| invalid("grid", "longitudinal-wave potential needs [grid]"))?;
                PotentialField::longitudinal_wave(grid, amplitudes)
                    .map_err(|e| invalid("potential", e))?
            }
        };
        field.validate().map_err(|e| invalid("potential", e))?;
        Ok(field)
    }
}

fn initial_state(spec: &ClassicalSpec, k: &PhysicalConstants) -> Result<ExtendedState> {
    let d = spec.q.len();
    let st = match (&spec.u, &spec.spatial_u) {
        (Some(_), Some(_)) => {
            return Err(invalid("classical", "give either u or spatial_u, not both"))
        }
        (Some(u), None) => {
            if u.len() != d {
                return Err(invalid("classical.u", format!("need {d} entries")));
            }
            ExtendedState::new(0.0, spec.q.clone(), u.clone())
                .map_err(|e| invalid("classical.u", e))?
        }
        (None, Some(v)) => {
            if v.len() + 1 != d {
                return Err(invalid(
                    "classical.spatial_u",
                    format!("need {} entries", d - 1),
                ));
            }
            ExtendedState::on_shell(spec.q.clone(), v, k)
        }
        (None, None) => ExtendedState::at_rest(spec.q.clone(), k),
    };
    if !st.is_finite() {
        return Err(invalid("classical", "non-finite initial state"));
    }
    Ok(st)
}

fn check_field(field: &FieldSpec, grid: &SpacetimeGrid) -> Result<()> {
    let d = grid.dim();
    let need = |name: &str, n: usize| {
        if n == d {
            Ok(())
        } else {
            Err(invalid(
                format!("initial_field.{name}"),
                format!("need {d} entries, got {n}"),
            ))
        }
    };
    match field {
        FieldSpec::Gaussian {
            center,
            width,
            carrier,
        } => {
            need("center", center.len())?;
            need("width", width.len())?;
            need("carrier", carrier.len())?;
            if width.iter().any(|w| !(*w > 0.0)) {
                return Err(invalid("initial_field.width", "must be > 0"));
            }
        }
        FieldSpec::PlaneWave { modes } => need("modes", modes.len())?,
        FieldSpec::Random { max_mode } => {
            let limit = grid
                .points()
                .iter()
                .map(|&n| (n / 2) as i64 - 1)
                .min()
                .unwrap_or(0);
            if *max_mode < 0 || *max_mode > limit {
                return Err(invalid(
                    "initial_field.max_mode",
                    format!("must be in 0..={limit}"),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_path(text: &str, cmd: Command) -> String {
        match ExperimentConfig::parse(text).unwrap().validate(cmd) {
            Err(ConfigError::Invalid { path, .. }) => path,
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    const GRID: &str = "[grid]\npoints = [8, 8]\nextents = [1.0, 1.0]\n";

    #[test]
    fn shipped_configs_validate() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
        let default = ExperimentConfig::load(Path::new(&format!("{dir}/default.toml"))).unwrap();
        for cmd in [
            Command::Classical,
            Command::Propagate,
            Command::KgSuite,
            Command::Moments,
        ] {
            default.validate(cmd).unwrap();
        }
        for (file, cmd) in [
            ("hyperbolic", Command::Classical),
            ("cyclotron", Command::Classical),
            ("quadrature-wave", Command::KgSuite),
            ("quadrature-wave", Command::Propagate),
        ] {
            ExperimentConfig::load(Path::new(&format!("{dir}/{file}.toml")))
                .unwrap()
                .validate(cmd)
                .unwrap();
        }
    }

    #[test]
    fn missing_sections_are_named() {
        assert_eq!(err_path("", Command::Classical), "classical");
        assert_eq!(err_path("", Command::Propagate), "grid");
        assert_eq!(err_path(GRID, Command::Propagate), "initial_field");
        let text = format!("{GRID}[initial_field]\nkind = \"plane-wave\"\nmodes = [1, 0]\n");
        assert_eq!(err_path(&text, Command::Propagate), "propagation");
    }

    #[test]
    fn nested_field_paths() {
        let text = format!("{GRID}[initial_field]\nkind = \"gaussian\"\ncenter = [0.0]\nwidth = [1.0, 1.0]\ncarrier = [0.0, 0.0]\n");
        assert_eq!(err_path(&text, Command::KgSuite), "initial_field.center");
        let text = "[potential]\nkind = \"wave\"\ncomponents = [\n  { amplitude = 1.0, wavevector = [1.0], phase = 0.0 },\n  { amplitude = 1.0, wavevector = [1.0, 0.0], phase = 0.0 },\n]\n[classical]\nq = [0.0, 0.0]\ns_span = 1.0\nsteps = 10\n";
        assert_eq!(
            err_path(text, Command::Classical),
            "potential.components[0].wavevector"
        );
        let text = "[moments]\nepsilon = [1.0, -1.0]\n";
        assert_eq!(err_path(text, Command::Moments), "moments.epsilon");
        let text = "[constants]\nmass = -1.0\nlight_speed = 1.0\ncharge = 1.0\nhbar = 1.0\n";
        assert_eq!(err_path(text, Command::Moments), "constants");
    }

    #[test]
    fn eps_list_must_decrease() {
        let text = format!(
            "{GRID}[initial_field]\nkind = \"random\"\nmax_mode = 2\n[kg_suite]\neps_list = [0.1, 0.2, 0.05]\n"
        );
        assert_eq!(err_path(&text, Command::KgSuite), "kg_suite.eps_list");
    }

    #[test]
    fn quadrature_sampling_checked_up_front() {
        let text = "[grid]\npoints = [64, 64]\nextents = [6.0, 6.0]\n[initial_field]\nkind = \"random\"\nmax_mode = 2\n[kg_suite]\nbackend = \"quadrature\"\neps_list = [0.2, 0.1, 0.01]\n";
        assert_eq!(err_path(text, Command::KgSuite), "kg_suite.eps_list[2]");
    }

    #[test]
    fn spectral_backend_rejects_varying_potential() {
        let text = format!("{GRID}[potential]\nkind = \"longitudinal-wave\"\namplitudes = [0.1, 0.1]\n[initial_field]\nkind = \"plane-wave\"\nmodes = [1, 0]\n[propagation]\nepsilon = 0.1\nn_steps = 1\n");
        assert_eq!(err_path(&text, Command::Propagate), "propagation");
    }

    #[test]
    fn velocity_forms_are_exclusive() {
        let text = "[classical]\nq = [0.0, 0.0]\nu = [1.0, 0.0]\nspatial_u = [0.0]\ns_span = 1.0\nsteps = 1\n";
        assert_eq!(err_path(text, Command::Classical), "classical");
        let text = "[classical]\nq = [0.0, 0.0]\nspatial_u = [0.0, 1.0]\ns_span = 1.0\nsteps = 1\n";
        assert_eq!(err_path(text, Command::Classical), "classical.spatial_u");
    }

    #[test]
    fn unknown_keys_are_syntax_errors() {
        let err = ExperimentConfig::parse("[grid]\npoints = [8]\nextent = [1.0]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(ref m) if m.contains("extent")));
    }
}
