use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use heatforms::estimators::{EstimatorKind, EstimatorRequest};
use heatforms::forms::lookup;
use heatforms::transport::{DampingMode, IntegratorConfig, Scheme};
use heatforms::{ManifoldModel, MultiVector};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Run settings shared by `estimate`, `sweep` and `config`. Field names match
/// the long flags and the config file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub estimator: Option<String>,
    pub manifold: String,
    pub form: Option<String>,
    pub q: Option<i32>,
    pub point: Option<Vec<f64>>,
    pub v0: Option<String>,
    pub t: Option<f64>,
    pub n_paths: usize,
    pub step: f64,
    pub window: Option<[f64; 2]>,
    pub seed: u64,
    pub scheme: String,
    pub damping: String,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            estimator: None,
            manifold: "torus2".into(),
            form: None,
            q: None,
            point: None,
            v0: None,
            t: None,
            n_paths: 200_000,
            step: 1e-3,
            window: None,
            seed: 0,
            scheme: "projected-euler".into(),
            damping: "auto".into(),
            threads: None,
            out: None,
            format: Format::Json,
            timing: false,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// torus2, sphere2 or sphereN:n.
    #[arg(long)]
    pub manifold: Option<String>,
    /// Catalog form name.
    #[arg(long)]
    pub form: Option<String>,
    /// Form degree; must match the form.
    #[arg(long)]
    pub q: Option<i32>,
    /// Base point in intrinsic coordinates, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Test multivector as "i,j=c;k,l=c" with 1-based indices, "=c" for scalars.
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of paths; accepts forms like 2e5.
    #[arg(long, value_parser = parse_count)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Window "δ,h′" for d and flow-d.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// projected-euler or geodesic.
    #[arg(long)]
    pub scheme: Option<String>,
    /// auto or ode.
    #[arg(long)]
    pub damping: Option<String>,
    /// Worker threads; defaults to RAYON_NUM_THREADS or the core count.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Record wall-clock time in the output.
    #[arg(long)]
    pub timing: bool,
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
        Ok(x as usize)
    } else {
        Err(format!("'{s}' is not a whole number"))
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("{what}: '{p}' is not a number")))
        })
        .collect()
}

pub fn parse_window(s: &str) -> Result<[f64; 2], CliError> {
    match parse_list(s, "window")?.as_slice() {
        [delta, len] => Ok([*delta, *len]),
        _ => Err(CliError::Config(format!("window '{s}' needs two values δ,h′"))),
    }
}

/// Parses "i,j=c;..." into a multivector of the given degree.
pub fn parse_v0(s: &str, dim: usize, degree: i32) -> Result<MultiVector, CliError> {
    let mut total = MultiVector::zero(dim, degree);
    for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (lhs, rhs) = term
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("v0 term '{term}' lacks '=coefficient'")))?;
        let coeff: f64 = rhs
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("v0 coefficient '{rhs}' is not a number")))?;
        let mut indices = Vec::new();
        for part in lhs.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part
                .parse()
                .map_err(|_| CliError::Config(format!("v0 index '{part}' is not an integer")))?;
            if i == 0 || i > dim {
                return Err(CliError::Config(format!("v0 index {i} outside 1..={dim}")));
            }
            indices.push(i - 1);
        }
        if indices.len() as i32 != degree {
            return Err(CliError::Config(format!(
                "v0 term '{term}' has degree {}, expected {degree}",
                indices.len()
            )));
        }
        let basis = MultiVector::basis(dim, &indices).map_err(|e| CliError::Config(e.to_string()))?;
        total = &total + &(coeff * &basis);
    }
    Ok(total)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Config file (if any) overridden by explicit flags.
    pub fn resolve(estimator: Option<&str>, args: &RunArgs) -> Result<Self, CliError> {
        let mut c = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(e) = estimator {
            c.estimator = Some(e.to_string());
        }
        if let Some(v) = &args.manifold {
            c.manifold = v.clone();
        }
        if let Some(v) = &args.form {
            c.form = Some(v.clone());
        }
        if let Some(v) = args.q {
            c.q = Some(v);
        }
        if let Some(v) = &args.point {
            c.point = Some(parse_list(v, "point")?);
        }
        if let Some(v) = &args.v0 {
            c.v0 = Some(v.clone());
        }
        if let Some(v) = args.t {
            c.t = Some(v);
        }
        if let Some(v) = args.n_paths {
            c.n_paths = v;
        }
        if let Some(v) = args.step {
            c.step = v;
        }
        if let Some(v) = &args.window {
            c.window = Some(parse_window(v)?);
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        if let Some(v) = &args.scheme {
            c.scheme = v.clone();
        }
        if let Some(v) = &args.damping {
            c.damping = v.clone();
        }
        if let Some(v) = args.threads {
            c.threads = Some(v);
        }
        if let Some(v) = &args.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = args.format {
            c.format = v;
        }
        c.timing |= args.timing;
        Ok(c)
    }

    /// Validates every field and builds the estimator request.
    pub fn request(&self) -> Result<EstimatorRequest, CliError> {
        let bad = |m: String| CliError::Config(m);
        let name = self.estimator.as_deref().ok_or_else(|| bad("no estimator given".into()))?;
        let kind = EstimatorKind::from_name(name)?;
        let model = ManifoldModel::from_name(&self.manifold)?;
        let form_name = self.form.as_deref().ok_or_else(|| bad("--form is required".into()))?;
        let form = lookup(&model, form_name)?;
        if let Some(q) = self.q {
            if q != form.degree() {
                return Err(bad(format!("--q {q} does not match the degree {} of '{form_name}'", form.degree())));
            }
        }
        let t = self.t.ok_or_else(|| bad("--t is required".into()))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(bad(format!("t must be positive, got {t}")));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(bad(format!("step must be positive, got {}", self.step)));
        }
        if self.n_paths == 0 {
            return Err(bad("n_paths must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be positive".into()));
        }
        let n = model.intrinsic_dim();
        let point = self.point.clone().unwrap_or_else(|| vec![0.0; n]);
        if point.len() != n || point.iter().any(|x| !x.is_finite()) {
            return Err(bad(format!("point needs {n} finite coordinates")));
        }
        let x0 = model.embed(&point)?;
        let degree = kind.v0_degree(form.degree());
        if degree < 0 || degree as usize > n {
            return Err(bad(format!("{name} is undefined on {}-forms", form.degree())));
        }
        let v0 = match &self.v0 {
            Some(s) => parse_v0(s, n, degree)?,
            None => MultiVector::basis(n, &(0..degree as usize).collect::<Vec<_>>())?,
        };
        let damping = match self.damping.as_str() {
            "auto" => DampingMode::Auto,
            "ode" => DampingMode::Ode,
            other => return Err(bad(format!("unknown damping mode '{other}'"))),
        };
        let config = IntegratorConfig {
            step: self.step,
            scheme: Scheme::from_name(&self.scheme)?,
            damping,
            ..Default::default()
        };
        config.validate(&model)?;
        config.steps_for(t)?;
        Ok(EstimatorRequest {
            kind,
            model,
            form,
            x0,
            v0,
            t,
            config,
            n_paths: self.n_paths,
            seed: self.seed,
            window: self.window.map(|[d, h]| (d, h)),
        })
    }
}
