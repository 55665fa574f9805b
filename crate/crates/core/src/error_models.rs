//! Error functions `e(x, y)` together with `∂e/∂x`, its inverse in the
//! second slot, and the averaging weight `α`, which between them fix a
//! gradient-descent functor.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result, Slot};
use crate::para::ParamFn;

/// The data an error model must supply.
///
/// `inv_de_dx(x0, ·)` must invert `de_dx(x0, ·)` for every `x0` with
/// `valid_point(x0)`, and `alpha(m)` must be positive.
pub trait ErrorFunction: Send + Sync {
    fn name(&self) -> &str;
    fn e(&self, x: f64, y: f64) -> f64;
    fn de_dx(&self, x: f64, y: f64) -> f64;
    fn inv_de_dx(&self, x0: f64, v: f64) -> f64;
    fn alpha(&self, m: usize) -> f64;
    fn valid_point(&self, _x: f64) -> bool {
        true
    }
}

/// Half squared difference, `e(x, y) = ½(x − y)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadratic;

impl ErrorFunction for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn e(&self, x: f64, y: f64) -> f64 {
        0.5 * (x - y) * (x - y)
    }
    fn de_dx(&self, x: f64, y: f64) -> f64 {
        x - y
    }
    // y ↦ x0 − y is its own inverse.
    fn inv_de_dx(&self, x0: f64, v: f64) -> f64 {
        x0 - v
    }
    fn alpha(&self, _m: usize) -> f64 {
        1.0
    }
}

/// `e(x, y) = y ln x + (1 − y) ln(1 − x)`, averaged over outputs, defined for
/// `0 < x < 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossEntropy;

impl ErrorFunction for CrossEntropy {
    fn name(&self) -> &str {
        "cross_entropy"
    }
    fn e(&self, x: f64, y: f64) -> f64 {
        y * x.ln() + (1.0 - y) * (1.0 - x).ln()
    }
    fn de_dx(&self, z: f64, y: f64) -> f64 {
        (y - z) / (z * (1.0 - z))
    }
    fn inv_de_dx(&self, z: f64, v: f64) -> f64 {
        z + z * (1.0 - z) * v
    }
    // An empty codomain has nothing to average over.
    fn alpha(&self, m: usize) -> f64 {
        1.0 / m.max(1) as f64
    }
    fn valid_point(&self, x: f64) -> bool {
        x > 0.0 && x < 1.0
    }
}

/// `e(x, y) = xy`: minimising drives outputs to zero. Gives a bimonoid
/// structure different from the quadratic one.
#[derive(Debug, Clone, Copy, Default)]
pub struct Product;

impl ErrorFunction for Product {
    fn name(&self) -> &str {
        "xy"
    }
    fn e(&self, x: f64, y: f64) -> f64 {
        x * y
    }
    fn de_dx(&self, _x: f64, y: f64) -> f64 {
        y
    }
    fn inv_de_dx(&self, _x0: f64, v: f64) -> f64 {
        v
    }
    fn alpha(&self, _m: usize) -> f64 {
        1.0
    }
}

#[derive(Clone)]
pub struct ErrorModel(Arc<dyn ErrorFunction>);

impl fmt::Debug for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErrorModel({})", self.name())
    }
}

pub const MODEL_NAMES: [&str; 3] = ["quadratic", "cross_entropy", "xy"];

pub fn quadratic() -> ErrorModel {
    ErrorModel::new(Quadratic)
}

pub fn cross_entropy() -> ErrorModel {
    ErrorModel::new(CrossEntropy)
}

pub fn xy_error() -> ErrorModel {
    ErrorModel::new(Product)
}

impl ErrorModel {
    pub fn new(f: impl ErrorFunction + 'static) -> Self {
        ErrorModel(Arc::new(f))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(quadratic()),
            "cross_entropy" | "cross-entropy" => Ok(cross_entropy()),
            "xy" => Ok(xy_error()),
            _ => Err(Error::UnknownName {
                kind: "error model",
                name: name.to_string(),
                valid: MODEL_NAMES.to_vec(),
            }),
        }
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }

    pub fn alpha(&self, m: usize) -> f64 {
        self.0.alpha(m)
    }

    pub fn valid_point(&self, x: f64) -> bool {
        x.is_finite() && self.0.valid_point(x)
    }

    pub fn check_point(&self, slot: Slot, index: usize, x: f64) -> Result<()> {
        if self.valid_point(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                model: self.name().to_string(),
                slot,
                index,
                value: x,
            })
        }
    }

    pub fn e(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(Slot::Output, 0, x)?;
        Ok(self.0.e(x, y))
    }

    pub fn de_dx(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(Slot::Output, 0, x)?;
        Ok(self.0.de_dx(x, y))
    }

    pub fn inv_de_dx(&self, x0: f64, v: f64) -> Result<f64> {
        self.check_point(Slot::Input, 0, x0)?;
        Ok(self.0.inv_de_dx(x0, v))
    }

    pub(crate) fn raw(&self) -> &dyn ErrorFunction {
        &*self.0
    }
}

/// `α(m) · Σⱼ e(yⱼ, bⱼ)` for an output `y` of width `m`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TotalError(pub f64);

impl TotalError {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Total error of an already computed output against a target.
pub fn total_error_of(model: &ErrorModel, output: &[f64], target: &[f64]) -> Result<TotalError> {
    check_dim("total_error target", output.len(), target.len())?;
    let mut sum = 0.0;
    for (j, (&x, &y)) in output.iter().zip(target).enumerate() {
        model.check_point(Slot::Output, j, x)?;
        sum += model.raw().e(x, y);
    }
    Ok(TotalError(model.alpha(output.len()) * sum))
}

pub fn total_error(
    model: &ErrorModel,
    f: &ParamFn,
    p: &[f64],
    a: &[f64],
    b: &[f64],
) -> Result<TotalError> {
    f.check_args(p, a)?;
    check_dim(&format!("{} target", f.label()), f.out_dim(), b.len())?;
    total_error_of(model, &f.forward(p, a), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::para::identity_para;
    use proptest::prelude::*;

    #[test]
    fn quadratic_examples() {
        let q = quadratic();
        assert_eq!(q.e(1.0, 3.0).unwrap(), 2.0);
        assert_eq!(q.inv_de_dx(2.0, 5.0).unwrap(), -3.0);
        assert_eq!(q.alpha(7), 1.0);
    }

    #[test]
    fn cross_entropy_examples() {
        let c = cross_entropy();
        assert_eq!(c.de_dx(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(c.inv_de_dx(0.5, 2.0).unwrap(), 1.0);
        assert_eq!(c.alpha(4), 0.25);
        for z in [0.0, 1.0] {
            assert!(matches!(c.e(z, 0.5), Err(Error::Domain { .. })));
            assert!(matches!(c.de_dx(z, 0.5), Err(Error::Domain { .. })));
            assert!(matches!(c.inv_de_dx(z, 0.5), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn xy_examples() {
        let m = xy_error();
        assert_eq!(m.de_dx(3.0, 7.0).unwrap(), 7.0);
        assert_eq!(m.inv_de_dx(3.0, 7.0).unwrap(), 7.0);
    }

    #[test]
    fn lookup_by_name() {
        for name in MODEL_NAMES {
            assert_eq!(ErrorModel::by_name(name).unwrap().name(), name);
        }
        let err = ErrorModel::by_name("hinge").unwrap_err().to_string();
        assert!(err.contains("quadratic") && err.contains("hinge"), "{err}");
    }

    #[test]
    fn total_error_examples() {
        let q = quadratic();
        let e = total_error(&q, &identity_para(2), &[], &[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(e.value(), 0.0);
        let e = total_error(&q, &identity_para(1), &[], &[1.0], &[3.0]).unwrap();
        assert_eq!(e.value(), 2.0);

        let c = cross_entropy();
        let e = total_error(&c, &identity_para(1), &[], &[0.5], &[0.5]).unwrap();
        assert!((e.value() - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn total_error_names_offending_coordinate() {
        let c = cross_entropy();
        let err = total_error(&c, &identity_para(3), &[], &[0.2, 1.0, 0.4], &[0.0; 3]).unwrap_err();
        match err {
            Error::Domain { index, slot, .. } => {
                assert_eq!(index, 1);
                assert_eq!(slot, Slot::Output);
            }
            other => panic!("{other:?}"),
        }
    }

    fn valid_sample(model: &ErrorModel, x: f64) -> f64 {
        if model.name() == "cross_entropy" {
            // map (-1, 1) into (0.01, 0.99)
            0.5 + 0.49 * x
        } else {
            x
        }
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(x in -0.999f64..0.999, y in -3f64..3.0) {
            for model in [quadratic(), cross_entropy(), xy_error()] {
                let x0 = valid_sample(&model, x);
                let v = model.de_dx(x0, y).unwrap();
                let back = model.inv_de_dx(x0, v).unwrap();
                prop_assert!((back - y).abs() <= 1e-9 * (1.0 + y.abs()), "{}: {back} vs {y}", model.name());
            }
        }

        #[test]
        fn derivative_matches_central_difference(x in -0.95f64..0.95, y in -2f64..2.0) {
            let h = crate::numeric::FD_STEP;
            for model in [quadratic(), cross_entropy(), xy_error()] {
                let x0 = valid_sample(&model, x);
                let fd = (model.e(x0 + h, y).unwrap() - model.e(x0 - h, y).unwrap()) / (2.0 * h);
                let an = model.de_dx(x0, y).unwrap();
                prop_assert!((fd - an).abs() / an.abs().max(1.0) <= 1e-5, "{}: {fd} vs {an}", model.name());
            }
        }

        #[test]
        fn quadratic_total_error_is_half_squared_norm(
            pairs in prop::collection::vec((-5f64..5.0, -5f64..5.0), 0..6),
            shift in 0usize..6,
        ) {
            let q = quadratic();
            let (out, tgt): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let e = total_error_of(&q, &out, &tgt).unwrap().value();
            let norm: f64 = out.iter().zip(&tgt).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / 2.0;
            prop_assert!((e - norm).abs() <= 1e-12 * (1.0 + norm));
            prop_assert!(e >= 0.0);

            // permuting coordinate pairs leaves the sum unchanged
            let mut rot = pairs.clone();
            if !rot.is_empty() {
                let k = shift % rot.len();
                rot.rotate_left(k);
            }
            let (o2, t2): (Vec<f64>, Vec<f64>) = rot.into_iter().unzip();
            let e2 = total_error_of(&q, &o2, &t2).unwrap().value();
            prop_assert!((e - e2).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }
}
