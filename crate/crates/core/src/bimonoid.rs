//! Generator learners: images of linear maps (the bimonoid `μ, η, δ, ε` on
//! `ℝ`) and the neuron primitives `λ, β, σ`, with neuron assembly and
//! weight tying.
//!
//! Every generator here is `descend` applied to a parametrised function.
//! The closed forms in [`closed_form`] are independent formulas used to
//! check them.

use crate::descent::{descend, DescentConfig};
use crate::error::{Error, Result};
use crate::learn::{compose_learn, identity_learn, parallel_learn, Learner};
use crate::nnet::Activation;
use crate::para::{compose_para, identity_para, lift_function, param_constant, parallel_para, ParamFn};

/// A dense `rows × cols` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        crate::error::check_dim("linear map entries", rows * cols, entries.len())?;
        crate::error::check_finite("linear map entries", &entries)?;
        Ok(LinearMap { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.entry(r, c) * x[c]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.entry(r, c) * y[r]).sum())
            .collect()
    }

    /// The `(k·n) × n` matrix stacking `k` identity blocks.
    pub fn copier(n: usize, k: usize) -> Self {
        let mut entries = vec![0.0; k * n * n];
        for b in 0..k {
            for i in 0..n {
                entries[(b * n + i) * n + i] = 1.0;
            }
        }
        LinearMap { rows: k * n, cols: n, entries }
    }
}

/// `a ↦ Ma` as a trivially parametrised function.
pub fn linear_para(m: &LinearMap) -> ParamFn {
    let (fwd, back) = (m.clone(), m.clone());
    lift_function(
        m.cols,
        m.rows,
        format!("lin{}x{}", m.rows, m.cols),
        move |a| fwd.apply(a),
        move |_, w| back.apply_transpose(w),
    )
}

pub fn linear_learner(m: &LinearMap, cfg: &DescentConfig) -> Learner {
    descend(cfg, &linear_para(m))
}

/// Addition `ℝ² → ℝ`.
pub fn mu(cfg: &DescentConfig) -> Learner {
    linear_learner(&LinearMap::new(1, 2, vec![1.0, 1.0]).expect("1x2"), cfg).with_label("mu")
}

/// Zero `ℝ⁰ → ℝ`.
pub fn eta(cfg: &DescentConfig) -> Learner {
    linear_learner(&LinearMap::new(1, 0, vec![]).expect("1x0"), cfg).with_label("eta")
}

/// Copy `ℝ → ℝ²`.
pub fn delta(cfg: &DescentConfig) -> Learner {
    linear_learner(&LinearMap::new(2, 1, vec![1.0, 1.0]).expect("2x1"), cfg).with_label("delta")
}

/// Discard `ℝ → ℝ⁰`.
pub fn counit(cfg: &DescentConfig) -> Learner {
    linear_learner(&LinearMap::new(0, 1, vec![]).expect("0x1"), cfg).with_label("counit")
}

/// `λ(w, x) = wx`.
pub fn scalar_mult_para() -> ParamFn {
    ParamFn::new(
        1,
        1,
        1,
        "lambda",
        |p, a| vec![p[0] * a[0]],
        |p, a, w| (vec![w[0] * a[0]], vec![w[0] * p[0]]),
    )
}

/// `σ` applied to each of `n` coordinates.
pub fn activation_para(act: &Activation, n: usize) -> ParamFn {
    let (f, df) = (act.clone(), act.clone());
    lift_function(
        n,
        n,
        act.name().to_string(),
        move |a| a.iter().map(|&x| f.value(x)).collect(),
        move |a, w| a.iter().zip(w).map(|(&x, wi)| wi * df.derivative(x)).collect(),
    )
}

pub fn scalar_mult(cfg: &DescentConfig) -> Learner {
    descend(cfg, &scalar_mult_para())
}

/// `β(w) = w`: a parameter exposed as an output.
pub fn bias(cfg: &DescentConfig) -> Learner {
    descend(cfg, &param_constant(1).with_label("beta"))
}

pub fn act_learner(act: &Activation, cfg: &DescentConfig) -> Learner {
    descend(cfg, &activation_para(act, 1))
}

pub const GENERATOR_NAMES: [&str; 6] = ["mu", "eta", "delta", "counit", "lambda", "beta"];

pub fn generator(name: &str, cfg: &DescentConfig) -> Result<Learner> {
    match name {
        "mu" => Ok(mu(cfg)),
        "eta" => Ok(eta(cfg)),
        "delta" => Ok(delta(cfg)),
        "counit" => Ok(counit(cfg)),
        "lambda" => Ok(scalar_mult(cfg)),
        "beta" => Ok(bias(cfg)),
        _ => Err(Error::UnknownName {
            kind: "generator",
            name: name.to_string(),
            valid: GENERATOR_NAMES.to_vec(),
        }),
    }
}

/// Sums `n ≥ 1` wires to one, folding from the left:
/// `((a₁ + a₂) + a₃) + …`.
pub fn mu_tree(n: usize, cfg: &DescentConfig) -> Result<Learner> {
    if n == 0 {
        return Err(Error::InvalidArgument("mu_tree needs at least one wire".into()));
    }
    let mut tree = identity_learn(1);
    for k in 2..=n {
        // k wires → k−1 wires, ahead of the fold built so far
        let stage = parallel_learn(&mu(cfg), &identity_learn(k - 2));
        tree = compose_learn(&stage, &tree)?;
    }
    Ok(tree)
}

/// `(λ^∥n ∥ β) ∗ μ-tree ∗ σ`, parameters `n` weights then the bias.
pub fn build_neuron(n_inputs: usize, act: &Activation, cfg: &DescentConfig) -> Result<Learner> {
    if n_inputs == 0 {
        return Err(Error::InvalidArgument("a neuron needs at least one input".into()));
    }
    let mut front = scalar_mult(cfg);
    for _ in 1..n_inputs {
        front = parallel_learn(&front, &scalar_mult(cfg));
    }
    let front = parallel_learn(&front, &bias(cfg));
    let summed = compose_learn(&front, &mu_tree(n_inputs + 1, cfg)?)?;
    Ok(compose_learn(&summed, &act_learner(act, cfg))?.with_label(format!("neuron{n_inputs}({})", act.name())))
}

/// Ties `copies` uses of one parameter block of width `block_dim`.
///
/// `body` must be trivially parametrised with inputs laid out as the
/// `copies` parameter blocks followed by the genuine inputs. The result is
/// `(1_P ∗ copy ∥ id) ∗ body`, with parameter width `block_dim`, so a
/// gradient step receives the sum of the per-copy gradients.
pub fn tie_weights(body: &ParamFn, block_dim: usize, copies: usize) -> Result<ParamFn> {
    if body.param_dim() != 0 {
        return Err(Error::InvalidArgument(format!(
            "tie_weights: body `{}` must be trivially parametrised, has {} parameters",
            body.label(),
            body.param_dim()
        )));
    }
    let tied = block_dim * copies;
    if body.in_dim() < tied {
        return Err(Error::DimensionMismatch {
            context: format!("tie_weights: input width of `{}` vs {copies} blocks of {block_dim}", body.label()),
            expected: tied,
            found: body.in_dim(),
        });
    }
    let copied = compose_para(&param_constant(block_dim), &linear_para(&LinearMap::copier(block_dim, copies)))?;
    let front = parallel_para(&copied, &identity_para(body.in_dim() - tied));
    Ok(compose_para(&front, body)?.with_label(format!("tied({})", body.label())))
}

/// Closed forms of the generators under quadratic error, written out
/// independently of the descent functor.
pub mod closed_form {
    pub fn u_lambda(eps: f64, w: f64, x: f64, y: f64) -> f64 {
        w - eps * x * (w * x - y)
    }

    pub fn r_lambda(w: f64, x: f64, y: f64) -> f64 {
        x - w * (w * x - y)
    }

    pub fn u_beta(eps: f64, w: f64, y: f64) -> f64 {
        (1.0 - eps) * w + eps * y
    }

    pub fn r_sigma(sigma_prime: f64, sigma: f64, x: f64, y: f64) -> f64 {
        x - (sigma - y) * sigma_prime
    }

    pub fn i_mu(a1: f64, a2: f64) -> f64 {
        a1 + a2
    }

    pub fn r_mu(a1: f64, a2: f64, a3: f64) -> [f64; 2] {
        [a3 - a2, a3 - a1]
    }

    pub fn i_eta() -> f64 {
        0.0
    }

    pub fn i_delta(a: f64) -> [f64; 2] {
        [a, a]
    }

    pub fn r_delta(a1: f64, a2: f64, a3: f64) -> f64 {
        a2 + a3 - a1
    }

    /// The table's counit request, taken literally.
    pub fn r_counit_as_tabulated(_a: f64) -> f64 {
        0.0
    }

    /// Requests of `μ` and `δ` under `e(x, y) = xy`.
    pub fn r_mu_xy(_a1: f64, _a2: f64, a3: f64) -> [f64; 2] {
        [a3, a3]
    }

    pub fn r_delta_xy(_a1: f64, a2: f64, a3: f64) -> f64 {
        a2 + a3
    }
}
