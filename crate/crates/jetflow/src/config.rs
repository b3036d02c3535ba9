//! Experiment configuration: the TOML schema and its validation.

use std::fmt;
use std::path::{Path, PathBuf};

use jetflow_core::fock::{measure_radii, DomainSpec};
use jetflow_core::hankel::MeasureSpec;
use jetflow_core::maps::{parse_map, MapExpr};
use jetflow_core::sampling::Scheme;
use jetflow_core::vectorfield::equilibrium_residual;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PushforwardConvergence,
    MapReconstruction,
    LsqEquivalence,
    HankelRates,
    VectorfieldRecovery,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::PushforwardConvergence,
        Kind::MapReconstruction,
        Kind::LsqEquivalence,
        Kind::HankelRates,
        Kind::VectorfieldRecovery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::PushforwardConvergence => "pushforward-convergence",
            Kind::MapReconstruction => "map-reconstruction",
            Kind::LsqEquivalence => "lsq-equivalence",
            Kind::HankelRates => "hankel-rates",
            Kind::VectorfieldRecovery => "vectorfield-recovery",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersConfig {
    pub m: usize,
    pub n: Option<usize>,
    /// Inclusive range `[first, last]`.
    pub n_sweep: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub scheme: String,
    pub n_samples: usize,
    pub support_radii: Vec<f64>,
    /// `box` (default) or `ball`; a ball uses the first radius.
    pub support: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HankelConfig {
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub n_max: usize,
    /// Also write the largest moment matrix as exact rationals.
    #[serde(default)]
    pub emit_rational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub radii: Vec<f64>,
    #[serde(default = "default_points")]
    pub points_per_axis: usize,
}

/// The document as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kind: Kind,
    #[serde(default = "default_dim")]
    pub d: usize,
    #[serde(default = "default_dim")]
    pub r: usize,
    pub map: Option<String>,
    pub base_point: Option<Vec<f64>>,
    pub domain: Option<DomainConfig>,
    pub orders: Option<OrdersConfig>,
    pub sampling: Option<SamplingConfig>,
    pub flow: Option<FlowConfig>,
    pub hankel: Option<HankelConfig>,
    pub evaluation: Option<EvaluationConfig>,
    #[serde(default = "default_bits")]
    pub precision_bits: u32,
    pub output_dir: Option<PathBuf>,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_radius() -> f64 {
    1.0
}

fn default_points() -> usize {
    61
}

fn default_dim() -> usize {
    1
}

fn default_bits() -> u32 {
    256
}

/// A configuration problem tied to a field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError { field: field.into(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "{}: {}", self.field, self.reason)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Sampling measure plus scheme, resolved from `[sampling]`.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub measure: MeasureSpec,
    pub scheme: Scheme,
    pub count: usize,
    pub seed: u64,
}

/// Everything a run needs, checked for consistency.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: Config,
    pub kind: Kind,
    pub d: usize,
    pub r: usize,
    pub map: Option<MapExpr>,
    pub base_point: Vec<f64>,
    pub domain: DomainSpec,
    pub m: usize,
    pub n_values: Vec<usize>,
    pub sampling: Option<SamplingPlan>,
    pub flow: Option<FlowConfig>,
    pub hankel: Option<HankelConfig>,
    pub evaluation: Option<EvaluationConfig>,
    pub precision_bits: u32,
    pub r_mu: Option<f64>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.message().to_string();
            // serde reports a missing key against its parent; name the key itself
            let field = match message.strip_prefix("missing field `").and_then(|s| s.strip_suffix('`')) {
                Some(name) if path == "." => name.to_string(),
                Some(name) => format!("{path}.{name}"),
                None if path == "." => String::new(),
                None => path,
            };
            ConfigError::new(field, message)
        })
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<Plan, ConfigError> {
        let d = self.d;
        let r = self.r;
        if d == 0 {
            return Err(ConfigError::new("d", "must be at least 1"));
        }
        if r == 0 {
            return Err(ConfigError::new("r", "must be at least 1"));
        }
        if !(24..=1 << 16).contains(&self.precision_bits) {
            return Err(ConfigError::new("precision_bits", "must lie in 24..=65536"));
        }
        let needs_map = self.kind != Kind::HankelRates;
        let map = match (&self.map, needs_map) {
            (Some(text), true) => Some(parse_map(text, d, r).map_err(|e| ConfigError::new("map", e.to_string()))?),
            (None, true) => return Err(ConfigError::new("map", "missing field `map`")),
            (_, false) => None,
        };
        let base_point = self.base_point.clone().unwrap_or_else(|| vec![0.0; d]);
        if base_point.len() != d {
            return Err(ConfigError::new("base_point", format!("expected {d} coordinates, found {}", base_point.len())));
        }
        if base_point.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::new("base_point", "coordinates must be finite"));
        }
        let domain = match &self.domain {
            None => DomainSpec::new_box(base_point.clone(), vec![1.0; d]).expect("valid default"),
            Some(dc) => resolve_domain(dc, &base_point)?,
        };
        let (m, n_values) = match (&self.orders, self.kind) {
            (_, Kind::HankelRates) => (0, Vec::new()),
            (None, _) => return Err(ConfigError::new("orders", "missing table `orders`")),
            (Some(o), _) => resolve_orders(o)?,
        };
        let sampling = match (&self.sampling, self.kind) {
            (_, Kind::HankelRates) => None,
            (None, _) => return Err(ConfigError::new("sampling", "missing table `sampling`")),
            (Some(s), _) => Some(resolve_sampling(s, &base_point)?),
        };
        let r_mu = match &sampling {
            Some(plan) => {
                let offset = shift_measure(&plan.measure, &base_point);
                let origin_domain = DomainSpec { center: vec![0.0; d], geometry: domain.geometry.clone() };
                let (r_mu, _) = measure_radii(&offset, &origin_domain).map_err(|_| {
                    ConfigError::new("sampling.support_radii", "sampling support is not contained in the domain")
                })?;
                Some(r_mu)
            }
            None => None,
        };
        let flow = if self.kind == Kind::VectorfieldRecovery {
            let flow = self.flow.clone().ok_or_else(|| ConfigError::new("flow", "missing table `flow`"))?;
            if !(flow.t > 0.0 && flow.t.is_finite()) {
                return Err(ConfigError::new("flow.T", "must be positive"));
            }
            if flow.tol.is_nan() || flow.tol <= 0.0 {
                return Err(ConfigError::new("flow.tol", "must be positive"));
            }
            if r != d {
                return Err(ConfigError::new("r", "a vector field needs r = d"));
            }
            let field = map.as_ref().expect("map present");
            let residual = equilibrium_residual(field, &base_point).map_err(|e| ConfigError::new("map", e.to_string()))?;
            if residual >= 1e-12 {
                return Err(ConfigError::new("base_point", format!("not an equilibrium: |V(p)| = {residual:e}")));
            }
            Some(flow)
        } else {
            None
        };
        let hankel = if self.kind == Kind::HankelRates {
            let h = self.hankel.clone().ok_or_else(|| ConfigError::new("hankel", "missing table `hankel`"))?;
            if !(h.radius > 0.0 && h.radius.is_finite()) {
                return Err(ConfigError::new("hankel.radius", "must be positive"));
            }
            if !h.center.is_finite() {
                return Err(ConfigError::new("hankel.center", "must be finite"));
            }
            Some(h)
        } else {
            None
        };
        let evaluation = match self.kind {
            Kind::MapReconstruction | Kind::VectorfieldRecovery => {
                let e = self
                    .evaluation
                    .clone()
                    .ok_or_else(|| ConfigError::new("evaluation", "missing table `evaluation`"))?;
                if e.radii.len() != d {
                    return Err(ConfigError::new("evaluation.radii", format!("expected {d} radii")));
                }
                if e.radii.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return Err(ConfigError::new("evaluation.radii", "radii must be nonnegative"));
                }
                if e.points_per_axis == 0 {
                    return Err(ConfigError::new("evaluation.points_per_axis", "must be at least 1"));
                }
                Some(e)
            }
            _ => None,
        };
        if self.kind == Kind::LsqEquivalence && r != 1 {
            return Err(ConfigError::new("r", "lsq-equivalence needs a scalar map (r = 1)"));
        }
        if self.kind == Kind::LsqEquivalence && m == 0 {
            return Err(ConfigError::new("orders.m", "lsq-equivalence needs m ≥ 1"));
        }
        if self.kind == Kind::VectorfieldRecovery && n_values.iter().any(|&n| n < m) {
            return Err(ConfigError::new("orders", "n must not be below m"));
        }
        Ok(Plan {
            config: self.clone(),
            kind: self.kind,
            d,
            r,
            map,
            base_point,
            domain,
            m,
            n_values,
            sampling,
            flow,
            hankel,
            evaluation,
            precision_bits: self.precision_bits,
            r_mu,
        })
    }
}

fn resolve_domain(dc: &DomainConfig, center: &[f64]) -> Result<DomainSpec, ConfigError> {
    let d = center.len();
    match dc.kind.as_str() {
        "box" => {
            if dc.radii.len() != d {
                return Err(ConfigError::new("domain.radii", format!("expected {d} radii")));
            }
            DomainSpec::new_box(center.to_vec(), dc.radii.clone()).map_err(|e| ConfigError::new("domain.radii", e.to_string()))
        }
        "ball" => {
            if dc.radii.len() != 1 {
                return Err(ConfigError::new("domain.radii", "a ball takes a single radius"));
            }
            DomainSpec::new_ball(center.to_vec(), dc.radii[0]).map_err(|e| ConfigError::new("domain.radii", e.to_string()))
        }
        other => Err(ConfigError::new("domain.kind", format!("unknown domain kind `{other}` (box or ball)"))),
    }
}

fn resolve_orders(o: &OrdersConfig) -> Result<(usize, Vec<usize>), ConfigError> {
    let values: Vec<usize> = match (o.n, o.n_sweep) {
        (Some(_), Some(_)) => return Err(ConfigError::new("orders", "give either `n` or `n_sweep`, not both")),
        (Some(n), None) => vec![n],
        (None, Some([a, b])) => {
            if a > b {
                return Err(ConfigError::new("orders.n_sweep", "first order exceeds last"));
            }
            (a..=b).collect()
        }
        (None, None) => vec![o.m],
    };
    if let Some(&n) = values.iter().find(|&&n| n < o.m) {
        return Err(ConfigError::new("orders", format!("n = {n} is below m = {}", o.m)));
    }
    if values.iter().any(|&n| n > 40) {
        return Err(ConfigError::new("orders", "orders above 40 are not supported"));
    }
    Ok((o.m, values))
}

fn resolve_sampling(s: &SamplingConfig, center: &[f64]) -> Result<SamplingPlan, ConfigError> {
    let d = center.len();
    let scheme: Scheme = s.scheme.parse().map_err(|_| {
        ConfigError::new("sampling.scheme", format!("unknown scheme `{}` (iid, grid or halton)", s.scheme))
    })?;
    if s.n_samples == 0 {
        return Err(ConfigError::new("sampling.n_samples", "must be at least 1"));
    }
    if s.support_radii.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(ConfigError::new("sampling.support_radii", "radii must be positive"));
    }
    let measure = match s.support.as_deref().unwrap_or("box") {
        "box" => {
            if s.support_radii.len() != d {
                return Err(ConfigError::new("sampling.support_radii", format!("expected {d} radii")));
            }
            MeasureSpec::uniform_box(center.to_vec(), s.support_radii.clone())
        }
        "ball" => {
            if s.support_radii.len() != 1 {
                return Err(ConfigError::new("sampling.support_radii", "a ball takes a single radius"));
            }
            MeasureSpec::UniformBall { center: center.to_vec(), radius: s.support_radii[0] }
        }
        other => return Err(ConfigError::new("sampling.support", format!("unknown support `{other}` (box or ball)"))),
    };
    Ok(SamplingPlan { measure, scheme, count: s.n_samples, seed: s.seed })
}

/// The same measure translated by `-p`.
pub fn shift_measure(measure: &MeasureSpec, p: &[f64]) -> MeasureSpec {
    let sub = |c: &[f64]| c.iter().zip(p).map(|(a, b)| a - b).collect::<Vec<f64>>();
    match measure {
        MeasureSpec::Empirical { points } => MeasureSpec::Empirical { points: points.iter().map(|x| sub(x)).collect() },
        MeasureSpec::UniformBox { center, radii, normalized } => {
            MeasureSpec::UniformBox { center: sub(center), radii: radii.clone(), normalized: *normalized }
        }
        MeasureSpec::UniformBall { center, radius } => MeasureSpec::UniformBall { center: sub(center), radius: *radius },
    }
}

/// Canned configuration for `kind`, matching the reference settings.
pub fn demo(kind: Kind) -> &'static str {
    match kind {
        Kind::PushforwardConvergence => include_str!("../demos/pushforward-convergence.toml"),
        Kind::MapReconstruction => include_str!("../demos/map-reconstruction.toml"),
        Kind::LsqEquivalence => include_str!("../demos/lsq-equivalence.toml"),
        Kind::HankelRates => include_str!("../demos/hankel-rates.toml"),
        Kind::VectorfieldRecovery => include_str!("../demos/vectorfield-recovery.toml"),
    }
}
