use serde_json::json;

use crate::descent::{descend, request_iterate, DescentConfig};
use crate::error::{check_dim, Error, Result};
use crate::error_models::{total_error_of, ErrorModel};
use crate::nnet::{implement_network, Activation, Network};
use crate::numeric::{sample_vec, Rng};
use crate::para::ParamFn;

use super::data::Dataset;
use super::Report;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub activation: Activation,
    pub model: ErrorModel,
    pub eps: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Parameters start uniform in `[low, high)`.
    pub init: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub initial_error: f64,
    pub final_error: f64,
    pub epochs: usize,
    pub params: Vec<f64>,
}

impl TrainOutcome {
    pub fn report(&self, command: impl Into<String>, seed: u64) -> Report {
        let mut report = Report::new(command, Some(seed));
        report.details = json!({
            "epochs": self.epochs,
            "initial_error": self.initial_error,
            "final_error": self.final_error,
            "params": self.params,
        });
        report
    }
}

/// Total error summed over the dataset rows.
fn dataset_error(model: &ErrorModel, f: &ParamFn, p: &[f64], data: &Dataset, epoch: usize) -> Result<f64> {
    let mut sum = 0.0;
    for (row, (a, b)) in data.rows().iter().enumerate() {
        let out = f.forward(p, a);
        sum += total_error_of(model, &out, b)
            .map_err(|e| at(epoch, row, e))?
            .value();
    }
    Ok(sum)
}

fn at(epoch: usize, row: usize, source: Error) -> Error {
    Error::Training {
        epoch,
        row: row + 1,
        source: Box::new(source),
    }
}

pub fn initial_params(count: usize, seed: u64, init: (f64, f64)) -> Result<Vec<f64>> {
    let (low, high) = init;
    if !(low < high && low.is_finite() && high.is_finite()) {
        return Err(Error::InvalidArgument(format!("init range [{low}, {high}) is empty or not finite")));
    }
    Ok(sample_vec(&mut Rng::new(seed), count, low, high).into_inner())
}

/// Sequential single-datum updates in row order, `epochs` passes. Errors
/// name the epoch (0 for the initial evaluation) and the 1-based row.
pub fn cmd_train(net: &Network, cfg: &TrainConfig, data: &Dataset) -> Result<TrainOutcome> {
    if cfg.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument("dataset has no rows".into()));
    }
    check_dim("dataset input width vs network", net.width_in(), data.in_dim())?;
    check_dim("dataset target width vs network", net.width_out(), data.out_dim())?;

    let f = implement_network(net, &cfg.activation);
    let learner = descend(&DescentConfig::new(cfg.eps, cfg.model.clone())?, &f);
    let mut p = initial_params(f.param_dim(), cfg.seed, cfg.init)?;
    let initial_error = dataset_error(&cfg.model, &f, &p, data, 0)?;

    for epoch in 1..=cfg.epochs {
        for (row, (a, b)) in data.rows().iter().enumerate() {
            p = learner.update(&p, a, b).map_err(|e| at(epoch, row, e))?;
        }
    }
    let final_error = dataset_error(&cfg.model, &f, &p, data, cfg.epochs)?;
    Ok(TrainOutcome {
        initial_error,
        final_error,
        epochs: cfg.epochs,
        params: p,
    })
}

#[derive(Debug, Clone)]
pub struct RequestConfig {
    pub activation: Activation,
    pub model: ErrorModel,
    pub steps: usize,
}

#[derive(Debug)]
pub struct RequestOutcome {
    /// Each trajectory point with its total error, when defined.
    pub points: Vec<(Vec<f64>, Option<f64>)>,
    pub stopped: Option<Error>,
}

impl RequestOutcome {
    pub fn report(&self, command: impl Into<String>) -> Report {
        let mut report = Report::new(command, None);
        let trajectory: Vec<_> = self
            .points
            .iter()
            .map(|(x, e)| json!({ "input": x, "total_error": e }))
            .collect();
        report.details = json!({
            "trajectory": trajectory,
            "truncated": self.stopped.is_some(),
            "stopped": self.stopped.as_ref().map(|e| e.to_string()),
        });
        report
    }
}

/// Iterates the request at fixed parameters and target, recording the
/// total error at every point. Totals are reported, not required to fall.
pub fn cmd_request(net: &Network, cfg: &RequestConfig, params: &[f64], a: &[f64], b: &[f64]) -> Result<RequestOutcome> {
    let f = implement_network(net, &cfg.activation);
    check_dim("parameter file vs network", f.param_dim(), params.len())?;
    check_dim("input vs network", f.in_dim(), a.len())?;
    check_dim("target vs network", f.out_dim(), b.len())?;
    // requests do not depend on the step size
    let descent = DescentConfig::new(1.0, cfg.model.clone())?;
    let t = request_iterate(&descent, &f, params, a, b, cfg.steps)?;
    let points = t
        .points
        .into_iter()
        .map(|x| {
            let e = total_error_of(&cfg.model, &f.forward(params, &x), b).ok().map(|e| e.value());
            (x, e)
        })
        .collect();
    Ok(RequestOutcome { points, stopped: t.stopped })
}
