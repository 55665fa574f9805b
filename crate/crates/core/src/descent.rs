//! The gradient-descent / backpropagation functor from parametrised
//! functions to learners.
//!
//! For `I: P × A → B` with `m = dim B`, the learner uses
//!
//! ```text
//! E(p, a, b)  = α(m) Σⱼ e(I(p, a)ⱼ, bⱼ)
//! U(p, a, b)  = p − ε ∇ₚE
//! r(p, a, b)ᵢ = (∂e/∂x(aᵢ, ·))⁻¹( (∇ₐE)ᵢ / α(n) )        n = dim A
//! ```
//!
//! Both gradients come out of one pullback of the cotangent
//! `wⱼ = α(m) ∂e/∂x(I(p, a)ⱼ, bⱼ)`.
//!
//! The request divides by `α` of the *input* width. That is the
//! normalisation under which composites of learners agree with learners of
//! composites when `α` is not constant (it yields the `|A|/|B|` factor of
//! averaged cross entropy). [`RequestScaling::Codomain`] divides by `α` of
//! the output width instead; it is kept for comparison and breaks series
//! functoriality whenever an intermediate width differs from the output width.

use crate::error::{check_finite, Error, Result, Slot};
use crate::error_models::ErrorModel;
use crate::learn::{compare_learners, compose_learn, parallel_learn, Comparison, Learner, Step, Trials};
use crate::numeric::Tolerance;
use crate::para::{compose_para, parallel_para, ParamFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RequestScaling {
    /// Divide the input gradient by `α(dim A)`.
    #[default]
    Domain,
    /// Divide the input gradient by `α(dim B)`.
    Codomain,
}

#[derive(Debug, Clone)]
pub struct DescentConfig {
    eps: f64,
    model: ErrorModel,
    scaling: RequestScaling,
}

impl DescentConfig {
    pub fn new(eps: f64, model: ErrorModel) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {eps}")));
        }
        Ok(DescentConfig {
            eps,
            model,
            scaling: RequestScaling::Domain,
        })
    }

    pub fn with_scaling(mut self, scaling: RequestScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn model(&self) -> &ErrorModel {
        &self.model
    }

    pub fn scaling(&self) -> RequestScaling {
        self.scaling
    }
}

/// The learner `(P, I, U_I, r_I)` that gradient descent assigns to `f`.
pub fn descend(cfg: &DescentConfig, f: &ParamFn) -> Learner {
    let fwd = f.clone();
    let lin = f.clone();
    let cfg = cfg.clone();
    let label = format!("L({})", f.label());
    Learner::from_step(
        f.param_dim(),
        f.in_dim(),
        f.out_dim(),
        label,
        move |p, a| Ok(fwd.forward(p, a)),
        move |p, a, b| descent_step(&cfg, &lin, p, a, b),
    )
}

fn descent_step(cfg: &DescentConfig, f: &ParamFn, p: &[f64], a: &[f64], b: &[f64]) -> Result<Step> {
    let model = &cfg.model;
    let (out, back) = f.vjp(p, a);
    check_finite(&format!("{} output", f.label()), &out)?;

    let alpha_out = model.alpha(out.len());
    let mut w = Vec::with_capacity(out.len());
    for (j, (&x, &y)) in out.iter().zip(b).enumerate() {
        model.check_point(Slot::Output, j, x)?;
        w.push(alpha_out * model.raw().de_dx(x, y));
    }
    check_finite(&format!("{} error cotangent", f.label()), &w)?;

    let (gp, ga) = back(&w);
    let update = p.iter().zip(&gp).map(|(pk, gk)| pk - cfg.eps * gk).collect();

    let scale = match cfg.scaling {
        RequestScaling::Domain => model.alpha(a.len()),
        RequestScaling::Codomain => alpha_out,
    };
    let request = a
        .iter()
        .zip(&ga)
        .enumerate()
        .map(|(i, (&ai, &gi))| {
            model.check_point(Slot::Input, i, ai)?;
            Ok(model.raw().inv_de_dx(ai, gi / scale))
        })
        .collect::<Result<Vec<f64>>>();
    Ok(Step { update, request })
}

/// `descend(F ∗ G)` against `descend(F) ∗ descend(G)` at random points.
pub fn verify_functoriality(
    cfg: &DescentConfig,
    f: &ParamFn,
    g: &ParamFn,
    tol: Tolerance,
    trials: &Trials,
) -> Result<Comparison> {
    let whole = descend(cfg, &compose_para(f, g)?);
    let parts = compose_learn(&descend(cfg, f), &descend(cfg, g))?;
    compare_learners(&whole, &parts, None, tol, trials)
}

/// `descend(F ∥ G)` against `descend(F) ∥ descend(G)` at random points.
pub fn verify_monoidality(
    cfg: &DescentConfig,
    f: &ParamFn,
    g: &ParamFn,
    tol: Tolerance,
    trials: &Trials,
) -> Result<Comparison> {
    let whole = descend(cfg, &parallel_para(f, g));
    let parts = parallel_learn(&descend(cfg, f), &descend(cfg, g));
    compare_learners(&whole, &parts, None, tol, trials)
}

/// Repeated requests at fixed parameters and target: `a, r(a), r(r(a)), …`.
#[derive(Debug)]
pub struct Trajectory {
    pub points: Vec<Vec<f64>>,
    /// Why the trajectory stopped early, if it did.
    pub stopped: Option<Error>,
}

pub fn request_iterate(
    cfg: &DescentConfig,
    f: &ParamFn,
    p: &[f64],
    a: &[f64],
    b: &[f64],
    steps: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidArgument("request iteration needs steps >= 1".into()));
    }
    let learner = descend(cfg, f);
    learner.implement(p, a)?;
    crate::error::check_dim("request target", f.out_dim(), b.len())?;

    let mut points = vec![a.to_vec()];
    let mut stopped = None;
    for _ in 0..steps {
        let current = points.last().expect("trajectory starts non-empty");
        match learner.request(p, current, b) {
            Ok(next) => points.push(next),
            Err(e) => {
                stopped = Some(e);
                break;
            }
        }
    }
    Ok(Trajectory { points, stopped })
}
