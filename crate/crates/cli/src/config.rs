//! Sectioned TOML run configuration.
//!
//! Every section and every key has a default, so an empty document is a
//! valid logistic run on the interval. Unknown keys are rejected by the
//! parser; numeric constraints are collected by [`RunConfig::validate`] so a
//! bad config reports all of its problems at once.

use std::collections::BTreeMap;
use std::path::Path;

use degrd_core::models::{
    builtin_logistic, builtin_porous_media_linear, builtin_two_population, ModelSpec, TwoPopulationParams,
};
use degrd_core::solver::NewtonMode;
use degrd_core::{DomainKind, DomainSpec, SolverConfig, StateSpaceX, WeightProfile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    #[serde(default = "default_kind")]
    pub kind: DomainKind,
    #[serde(default = "default_extent")]
    pub extent: f64,
    /// Collar depth `eps`; `min(1, extent / 3)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collar_depth: Option<f64>,
}

fn default_kind() -> DomainKind {
    DomainKind::Interval
}

fn default_extent() -> f64 {
    2.0
}

impl Default for DomainBlock {
    fn default() -> Self {
        DomainBlock {
            kind: default_kind(),
            extent: default_extent(),
            collar_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightBlock {
    #[serde(default = "one")]
    pub s: f64,
    /// Per-species degeneracy used by the norm diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_species_s: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl Default for WeightBlock {
    fn default() -> Self {
        WeightBlock {
            s: 1.0,
            per_species_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshBlock {
    #[serde(default = "default_cells")]
    pub n_collar: usize,
    #[serde(default = "default_cells")]
    pub n_interior: usize,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    /// Angular cells on the disk; ignored on the interval.
    #[serde(default = "default_cells")]
    pub boundary_resolution: usize,
}

fn default_cells() -> usize {
    32
}

fn default_tau_max() -> f64 {
    2.0
}

impl Default for MeshBlock {
    fn default() -> Self {
        MeshBlock {
            n_collar: 32,
            n_interior: 32,
            tau_max: 2.0,
            boundary_resolution: 32,
        }
    }
}

/// Built-in model name, state-space box and the model's scalar parameters
/// as flat keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    #[serde(default = "default_builtin")]
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_upper: Option<Vec<f64>>,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

fn default_builtin() -> String {
    "logistic".into()
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            builtin: default_builtin(),
            x_lower: None,
            x_upper: None,
            params: BTreeMap::new(),
        }
    }
}

pub const BUILTINS: [&str; 3] = ["logistic", "porous_media", "two_population"];

/// Parameter names and defaults of each built-in.
fn builtin_defaults(name: &str) -> Option<(usize, &'static [(&'static str, f64)])> {
    const LOGISTIC: &[(&str, f64)] = &[("a", 1.0), ("alpha", 1.0), ("lambda", 1.0)];
    const POROUS: &[(&str, f64)] = &[("alpha", 1.0), ("growth", 0.0)];
    const TWO_POP: &[(&str, f64)] = &[
        ("a", 0.1),
        ("a0", 0.0),
        ("a1", 0.0),
        ("a2", 0.0),
        ("alpha", 1.0),
        ("b", 0.1),
        ("b0", 0.0),
        ("b1", 0.0),
        ("b2", 0.0),
        ("beta", 1.0),
        ("delta", 1.0),
        ("gamma", 1.0),
    ];
    match name {
        "logistic" => Some((1, LOGISTIC)),
        "porous_media" => Some((1, POROUS)),
        "two_population" => Some((2, TWO_POP)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `u_i = values[i]`.
    Constant,
    /// `u_i = values[i] + amplitude exp(-width |x - centre|^2)`.
    Bump,
    /// Species columns `u1, u2, ...` of a snapshot CSV at `path`.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    #[serde(default = "default_initial_kind")]
    pub kind: InitialKind,
    /// Per-species constants or bump bases; `0.5` each when empty.
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_initial_kind() -> InitialKind {
    InitialKind::Constant
}

fn default_width() -> f64 {
    10.0
}

impl Default for InitialBlock {
    fn default() -> Self {
        InitialBlock {
            kind: InitialKind::Constant,
            values: Vec::new(),
            amplitude: 1.0,
            width: 10.0,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt_init: f64,
    /// `dt_init * 1e-6` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    /// `dt_init` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default = "default_delta_x")]
    pub delta_x: f64,
    #[serde(default = "default_norm_max")]
    pub norm_max: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub newton: bool,
    #[serde(default = "default_newton_iters")]
    pub newton_max_iters: usize,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
}

fn default_dt() -> f64 {
    0.01
}

fn default_delta_x() -> f64 {
    1e-6
}

fn default_norm_max() -> f64 {
    1e8
}

fn default_p() -> f64 {
    6.0
}

fn default_newton_iters() -> usize {
    10
}

fn default_newton_tol() -> f64 {
    1e-10
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            t_final: 1.0,
            dt_init: 0.01,
            dt_min: None,
            dt_max: None,
            delta_x: 1e-6,
            norm_max: 1e8,
            p: 6.0,
            newton: false,
            newton_max_iters: 10,
            newton_tol: 1e-10,
        }
    }
}

impl SolverBlock {
    pub fn to_solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt_init: self.dt_init,
            dt_min: self.dt_min.unwrap_or(self.dt_init * 1e-6),
            dt_max: self.dt_max.unwrap_or(self.dt_init),
            t_final: self.t_final,
            newton: if self.newton {
                NewtonMode::On {
                    max_iters: self.newton_max_iters,
                    tol: self.newton_tol,
                }
            } else {
                NewtonMode::Off
            },
            delta_x: self.delta_x,
            norm_max: self.norm_max,
            p: self.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// `csv` enables snapshot files; `manifest.json` is always written.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_directory() -> String {
    "degrd_out".into()
}

fn default_stride() -> usize {
    10
}

fn default_formats() -> Vec<String> {
    vec!["json".into(), "csv".into()]
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: default_directory(),
            snapshot_stride: default_stride(),
            formats: default_formats(),
        }
    }
}

/// Optional overrides for the `study` verb; each study falls back to its
/// own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_collar: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl StudyBlock {
    fn is_empty(&self) -> bool {
        *self == StudyBlock::default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: DomainBlock,
    #[serde(default)]
    pub weight: WeightBlock,
    #[serde(default)]
    pub mesh: MeshBlock,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub initial: InitialBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "StudyBlock::is_empty")]
    pub study: StudyBlock,
}

/// Parses, fills defaults and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    config.fill_defaults();
    let problems = config.validate();
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Invalid(problems))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl RunConfig {
    /// Replaces every derived default with its concrete value, so the echo
    /// in a manifest is complete.
    pub fn fill_defaults(&mut self) {
        if self.domain.collar_depth.is_none() {
            self.domain.collar_depth = Some(DomainSpec::default_collar_depth(self.domain.extent));
        }
        if let Some((n, defaults)) = builtin_defaults(&self.model.builtin) {
            for (key, value) in defaults {
                self.model.params.entry(key.to_string()).or_insert(*value);
            }
            self.model.x_lower.get_or_insert_with(|| vec![0.0; n]);
            self.model.x_upper.get_or_insert_with(|| vec![f64::INFINITY; n]);
            if self.initial.values.is_empty() && self.initial.kind != InitialKind::Csv {
                self.initial.values = vec![0.5; n];
            }
        }
        let dt = self.solver.dt_init;
        self.solver.dt_min.get_or_insert(dt * 1e-6);
        self.solver.dt_max.get_or_insert(dt);
    }

    pub fn n_species(&self) -> usize {
        builtin_defaults(&self.model.builtin).map(|(n, _)| n).unwrap_or(0)
    }

    pub fn dimension(&self) -> usize {
        match self.domain.kind {
            DomainKind::Interval => 1,
            DomainKind::Disk => 2,
        }
    }

    /// Every violated constraint, in section order. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut push = |ok: bool, msg: String| {
            if !ok {
                problems.push(msg);
            }
        };
        let d = &self.domain;
        push(d.extent > 0.0 && d.extent.is_finite(), format!("domain.extent must be positive, got {}", d.extent));
        if let Some(eps) = d.collar_depth {
            push(eps > 0.0 && eps <= 1.0, format!("domain.collar_depth must lie in (0, 1], got {eps}"));
            push(
                eps < d.extent / 2.0,
                format!("domain.collar_depth {eps} must be below half of domain.extent {}", d.extent),
            );
        }

        let w = &self.weight;
        push(
            w.s >= 1.0 && w.s.is_finite(),
            format!("weight.s must satisfy 1 <= s < inf, got {}", w.s),
        );
        let n = self.n_species();
        if let Some(per) = &w.per_species_s {
            for (i, s) in per.iter().enumerate() {
                push(*s >= 1.0 && s.is_finite(), format!("weight.per_species_s[{i}] must satisfy 1 <= s < inf, got {s}"));
            }
            if n > 0 {
                push(
                    per.len() == n,
                    format!("weight.per_species_s needs {n} entries, got {}", per.len()),
                );
            }
        }

        let m = &self.mesh;
        push(m.n_collar >= 2, format!("mesh.n_collar must be at least 2, got {}", m.n_collar));
        push(m.n_interior >= 2, format!("mesh.n_interior must be at least 2, got {}", m.n_interior));
        push(m.tau_max > 0.0 && m.tau_max.is_finite(), format!("mesh.tau_max must be positive, got {}", m.tau_max));
        if d.kind == DomainKind::Disk {
            push(
                m.boundary_resolution >= 3,
                format!("mesh.boundary_resolution must be at least 3 on the disk, got {}", m.boundary_resolution),
            );
        }

        match builtin_defaults(&self.model.builtin) {
            None => push(
                false,
                format!("model.builtin {:?} is not one of {}", self.model.builtin, BUILTINS.join(", ")),
            ),
            Some((n, defaults)) => {
                for key in self.model.params.keys() {
                    push(
                        defaults.iter().any(|(k, _)| k == key),
                        format!("model.{key} is not a parameter of {}", self.model.builtin),
                    );
                }
                for (name, bound) in [("x_lower", &self.model.x_lower), ("x_upper", &self.model.x_upper)] {
                    if let Some(b) = bound {
                        push(b.len() == n, format!("model.{name} needs {n} entries, got {}", b.len()));
                    }
                }
                if let Err(e) = self.build_model() {
                    push(false, format!("model: {e}"));
                }
            }
        }

        let init = &self.initial;
        match init.kind {
            InitialKind::Csv => push(init.path.is_some(), "initial.path is required for kind = \"csv\"".into()),
            _ => {
                if n > 0 {
                    push(
                        init.values.len() == n,
                        format!("initial.values needs {n} entries, got {}", init.values.len()),
                    );
                }
                push(
                    init.values.iter().all(|v| v.is_finite()),
                    "initial.values must be finite".into(),
                );
            }
        }
        if init.kind == InitialKind::Bump {
            push(init.width >= 0.0 && init.width.is_finite(), format!("initial.width must be >= 0, got {}", init.width));
            push(init.amplitude.is_finite(), format!("initial.amplitude must be finite, got {}", init.amplitude));
        }

        let dim = self.dimension();
        let p = self.solver.p;
        push(
            p > dim as f64 + 2.0 && p.is_finite(),
            format!(
                "solver.p = {p} violates the maximal-regularity condition p > m + 2 (m = {dim}, so p > {})",
                dim + 2
            ),
        );
        if let Err(degrd_core::Error::ParameterDomain(msg)) = self.solver.to_solver_config().validate(dim) {
            for part in msg.split("; ").filter(|part| !part.starts_with("p must exceed")) {
                push(false, format!("solver: {part}"));
            }
        }

        let o = &self.output;
        push(o.snapshot_stride >= 1, "output.snapshot_stride must be at least 1".into());
        for f in &o.formats {
            push(f == "json" || f == "csv", format!("output.formats entry {f:?} is not json or csv"));
        }
        problems
    }

    pub fn domain_spec(&self) -> degrd_core::Result<DomainSpec> {
        let eps = self
            .domain
            .collar_depth
            .unwrap_or_else(|| DomainSpec::default_collar_depth(self.domain.extent));
        DomainSpec::new(self.domain.kind, self.domain.extent, eps, self.mesh.boundary_resolution)
    }

    pub fn weight_profile(&self) -> degrd_core::Result<WeightProfile> {
        WeightProfile::new(self.domain_spec()?.collar_depth, self.weight.s)
    }

    pub fn build_mesh(&self) -> degrd_core::Result<degrd_core::Mesh> {
        degrd_core::Mesh::build(
            &self.domain_spec()?,
            &self.weight_profile()?,
            self.mesh.n_collar,
            self.mesh.n_interior,
            self.mesh.tau_max,
        )
    }

    fn param(&self, key: &str) -> f64 {
        self.model.params.get(key).copied().unwrap_or_else(|| {
            builtin_defaults(&self.model.builtin)
                .and_then(|(_, d)| d.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
                .unwrap_or(f64::NAN)
        })
    }

    pub fn build_model(&self) -> degrd_core::Result<ModelSpec> {
        let p = |k: &str| self.param(k);
        let mut model = match self.model.builtin.as_str() {
            "logistic" => builtin_logistic(p("alpha"), p("lambda"), p("a"))?,
            "porous_media" => builtin_porous_media_linear(p("alpha"), p("growth"))?,
            "two_population" => {
                let params = TwoPopulationParams::constant(p("a"), p("b"), [p("alpha"), p("beta"), p("gamma"), p("delta")])
                    .with_reaction([p("a0"), p("a1"), p("a2")], [p("b0"), p("b1"), p("b2")]);
                builtin_two_population(params, &[])?
            }
            other => {
                return Err(degrd_core::Error::ParameterDomain(format!("unknown built-in {other:?}")));
            }
        };
        if let (Some(lo), Some(hi)) = (&self.model.x_lower, &self.model.x_upper) {
            if lo.len() == model.n_species && hi.len() == model.n_species {
                model = model.with_state_space(StateSpaceX::new(lo.clone(), hi.clone())?)?;
            }
        }
        if let Some(per) = &self.weight.per_species_s {
            if per.len() == model.n_species {
                model = model.with_per_species_s(per.clone())?;
            }
        }
        Ok(model)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization")
    }
}

/// Column names of species `i` in snapshot files.
pub fn species_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("u{i}")).collect()
}
