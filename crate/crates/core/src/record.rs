//! JSON result records.

use serde::{Deserialize, Serialize};

use crate::estimators::{Estimate, EstimatorRequest};

/// One estimator result; field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub estimator: String,
    pub manifold: String,
    pub form: String,
    pub q: i32,
    pub t: f64,
    pub n_paths: usize,
    pub step: f64,
    pub seed: u64,
    pub window: Option<[f64; 2]>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub oracle: Option<f64>,
    pub z_score: Option<f64>,
    /// Only filled when timing is requested, so records stay reproducible.
    pub wall_time_s: Option<f64>,
}

impl EstimateRecord {
    pub fn new(request: &EstimatorRequest, estimate: &Estimate, timing: bool) -> Self {
        let oracle = request.oracle();
        EstimateRecord {
            estimator: request.kind.name().to_string(),
            manifold: request.model.name(),
            form: request.form.name().to_string(),
            q: request.form.degree(),
            t: estimate.t,
            n_paths: estimate.n_paths,
            step: estimate.step,
            seed: estimate.seed,
            window: estimate.window.map(|(d, h)| [d, h]),
            mean: vec![estimate.mean],
            std_error: vec![estimate.std_error],
            oracle,
            z_score: oracle.and_then(|o| crate::estimators::z_score(estimate.mean, estimate.std_error, o)),
            wall_time_s: timing.then_some(estimate.wall_time_s),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }
}
