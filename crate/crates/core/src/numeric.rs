//! Dimension-checked vectors, comparison tolerances, a seedable PRNG, and the
//! central-difference oracle that every analytic pullback is checked against.

use std::ops::Deref;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

/// Default step for central differences.
pub const FD_STEP: f64 = 1e-6;

/// A point of ℝⁿ with all entries finite. ℝ⁰ is the empty vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        crate::error::check_finite("vector construction", &data)?;
        Ok(Vector(data))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Vector::new(data)
    }
}

/// Mixed absolute/relative tolerance: `|x - y| <= abs + rel * max(|x|, |y|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        let ok = abs >= 0.0 && rel >= 0.0 && (abs > 0.0 || rel > 0.0);
        if !ok || !abs.is_finite() || !rel.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tolerance needs abs, rel >= 0 with one positive (got abs={abs}, rel={rel})"
            )));
        }
        Ok(Tolerance { abs, rel })
    }

    pub const fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    /// Laws built from additions and block moves only.
    pub const EXACT: Tolerance = Tolerance::absolute(1e-12);
    /// Laws that go through the chain rule.
    pub const CHAIN_RULE: Tolerance = Tolerance::absolute(1e-9);

    pub fn accepts(&self, x: f64, y: f64) -> bool {
        if x == y {
            return true;
        }
        (x - y).abs() <= self.abs + self.rel * x.abs().max(y.abs())
    }
}

pub fn approx_eq(x: &[f64], y: &[f64], tol: Tolerance) -> Result<bool> {
    check_dim("approx_eq", x.len(), y.len())?;
    Ok(x.iter().zip(y).all(|(&a, &b)| tol.accepts(a, b)))
}

/// Largest coordinatewise `|x_i - y_i|`; infinite on a length mismatch.
pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).abs();
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Largest coordinatewise `|x_i - y_i| / max(|x_i|, |y_i|, 1)`.
pub fn max_rel_err(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Central-difference estimate of the vector–Jacobian product `wᵀ J_f(x)`.
///
/// Each coordinate costs two evaluations of `f`, at `x ± h·e_i`.
pub fn finite_diff_pullback<F>(f: F, x: &[f64], w: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!("step h must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let plus = f(&probe);
        probe[i] = xi - h;
        let minus = f(&probe);
        probe[i] = xi;

        for (side, values) in [("+", &plus), ("-", &minus)] {
            check_dim("finite_diff_pullback output", w.len(), values.len())?;
            if let Some(j) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("finite-difference probe x{side}h·e_{i}"),
                    index: j,
                });
            }
        }
        let dot: f64 = w
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(wj, (p, m))| wj * (p - m))
            .sum();
        out.push(dot / (2.0 * h));
    }
    Ok(out)
}

/// Deterministic, stream-splittable generator. One owner at a time.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent generator for trial `index`, derived from `seed` alone.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index.wrapping_add(1));
        Rng(inner)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        self.0.random_range(low..=high)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }
}

/// `dim` entries uniform in `[low, high]`.
///
/// # Panics
/// If `low >= high`.
pub fn sample_vec(rng: &mut Rng, dim: usize, low: f64, high: f64) -> Vector {
    assert!(low < high, "sample_vec needs low < high (got {low}, {high})");
    Vector((0..dim).map(|_| rng.uniform(low, high)).collect())
}

pub(crate) fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}
