//! Parametrised differentiable functions `P × A → B` with exact pullbacks.
//!
//! Parameters of a composite are laid out flat, left factor first, so that
//! associativity and the coherence isomorphisms hold as plain equalities of
//! vectors. Parallel products lay out every slot the same way.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::numeric::{concat, finite_diff_pullback, max_rel_err};

/// Cotangent map at a fixed point: `w ↦ (wᵀ ∂/∂p, wᵀ ∂/∂a)`.
pub type Backward = Box<dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

type ForwardFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;
type VjpFn = dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Backward) + Send + Sync;

#[derive(Clone)]
pub struct ParamFn {
    param_dim: usize,
    in_dim: usize,
    out_dim: usize,
    label: String,
    forward: Arc<ForwardFn>,
    vjp: Arc<VjpFn>,
}

impl fmt::Debug for ParamFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamFn")
            .field("label", &self.label)
            .field("param_dim", &self.param_dim)
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .finish()
    }
}

impl ParamFn {
    /// Builds a parametrised function from a forward map and its pullback
    /// `(p, a, w) ↦ (wᵀ∂I/∂p, wᵀ∂I/∂a)`.
    ///
    /// Differentiability is the caller's obligation; [`pullback_error`]
    /// checks it numerically.
    pub fn new<F, B>(
        param_dim: usize,
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        forward: F,
        pullback: B,
    ) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        B: Fn(&[f64], &[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        let forward: Arc<ForwardFn> = Arc::new(forward);
        let pullback = Arc::new(pullback);
        let fwd = Arc::clone(&forward);
        let vjp = move |p: &[f64], a: &[f64]| -> (Vec<f64>, Backward) {
            let out = fwd(p, a);
            let (p, a) = (p.to_vec(), a.to_vec());
            let pb = Arc::clone(&pullback);
            (out, Box::new(move |w: &[f64]| pb(&p, &a, w)))
        };
        ParamFn {
            param_dim,
            in_dim,
            out_dim,
            label: label.into(),
            forward,
            vjp: Arc::new(vjp),
        }
    }

    /// Builds from a forward map and a linearisation that returns the output
    /// together with a reusable backward closure.
    pub fn from_vjp<F, V>(
        param_dim: usize,
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        forward: F,
        vjp: V,
    ) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        V: Fn(&[f64], &[f64]) -> (Vec<f64>, Backward) + Send + Sync + 'static,
    {
        ParamFn {
            param_dim,
            in_dim,
            out_dim,
            label: label.into(),
            forward: Arc::new(forward),
            vjp: Arc::new(vjp),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Checks argument dimensions against the declared ones.
    pub fn check_args(&self, p: &[f64], a: &[f64]) -> Result<()> {
        check_dim(&format!("{} parameter", self.label), self.param_dim, p.len())?;
        check_dim(&format!("{} input", self.label), self.in_dim, a.len())
    }

    /// # Panics
    /// On arguments of the wrong dimension.
    pub fn forward(&self, p: &[f64], a: &[f64]) -> Vec<f64> {
        self.assert_args(p, a);
        let out = (self.forward)(p, a);
        debug_assert_eq!(out.len(), self.out_dim, "{} returned wrong width", self.label);
        out
    }

    /// Output at `(p, a)` together with the cotangent map at that point.
    ///
    /// # Panics
    /// On arguments of the wrong dimension.
    pub fn vjp(&self, p: &[f64], a: &[f64]) -> (Vec<f64>, Backward) {
        self.assert_args(p, a);
        (self.vjp)(p, a)
    }

    /// # Panics
    /// On arguments of the wrong dimension.
    pub fn pullback(&self, p: &[f64], a: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(w.len(), self.out_dim, "{}: cotangent width", self.label);
        let (_, back) = self.vjp(p, a);
        back(w)
    }

    /// Moves the parameter into the input: `ℝ⁰ × (P × A) → B`.
    ///
    /// This is the trivially parametrised half of the factorisation of any
    /// `(P, I)` through the parametrised constant `(P, 1_P)`.
    pub fn absorb_params(&self) -> ParamFn {
        let np = self.param_dim;
        let inner = self.clone();
        let inner_b = self.clone();
        ParamFn::from_vjp(
            0,
            self.param_dim + self.in_dim,
            self.out_dim,
            format!("absorb({})", self.label),
            move |_, pa| inner.forward(&pa[..np], &pa[np..]),
            move |_, pa| {
                let (out, back) = inner_b.vjp(&pa[..np], &pa[np..]);
                let back: Backward = Box::new(move |w| {
                    let (gp, ga) = back(w);
                    (Vec::new(), concat(&gp, &ga))
                });
                (out, back)
            },
        )
    }

    fn assert_args(&self, p: &[f64], a: &[f64]) {
        assert_eq!(p.len(), self.param_dim, "{}: parameter width", self.label);
        assert_eq!(a.len(), self.in_dim, "{}: input width", self.label);
    }
}

/// Series composite `(I ∗ J)(p, q, a) = J(q, I(p, a))`, parameters `[p | q]`.
pub fn compose_para(f: &ParamFn, g: &ParamFn) -> Result<ParamFn> {
    if f.out_dim != g.in_dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "compose_para: out_dim of `{}` vs in_dim of `{}`",
                f.label, g.label
            ),
            expected: f.out_dim,
            found: g.in_dim,
        });
    }
    let np = f.param_dim;
    let (f1, g1) = (f.clone(), g.clone());
    let (f2, g2) = (f.clone(), g.clone());
    Ok(ParamFn::from_vjp(
        f.param_dim + g.param_dim,
        f.in_dim,
        g.out_dim,
        format!("({} * {})", f.label, g.label),
        move |pq, a| g1.forward(&pq[np..], &f1.forward(&pq[..np], a)),
        move |pq, a| {
            let (b, back_f) = f2.vjp(&pq[..np], a);
            let (c, back_g) = g2.vjp(&pq[np..], &b);
            let back: Backward = Box::new(move |w| {
                let (gq, wb) = back_g(w);
                let (gp, ga) = back_f(&wb);
                (concat(&gp, &gq), ga)
            });
            (c, back)
        },
    ))
}

/// Parallel product `(I ∥ J)(p, q, a, c) = (I(p, a), J(q, c))`, blockwise in every slot.
pub fn parallel_para(f: &ParamFn, g: &ParamFn) -> ParamFn {
    let (np, na, nb) = (f.param_dim, f.in_dim, f.out_dim);
    let (f1, g1) = (f.clone(), g.clone());
    let (f2, g2) = (f.clone(), g.clone());
    ParamFn::from_vjp(
        f.param_dim + g.param_dim,
        f.in_dim + g.in_dim,
        f.out_dim + g.out_dim,
        format!("({} || {})", f.label, g.label),
        move |pq, ac| {
            concat(
                &f1.forward(&pq[..np], &ac[..na]),
                &g1.forward(&pq[np..], &ac[na..]),
            )
        },
        move |pq, ac| {
            let (b, back_f) = f2.vjp(&pq[..np], &ac[..na]);
            let (d, back_g) = g2.vjp(&pq[np..], &ac[na..]);
            let back: Backward = Box::new(move |w| {
                let (gp, ga) = back_f(&w[..nb]);
                let (gq, gc) = back_g(&w[nb..]);
                (concat(&gp, &gq), concat(&ga, &gc))
            });
            (concat(&b, &d), back)
        },
    )
}

/// The projection `ℝ⁰ × ℝⁿ → ℝⁿ`.
pub fn identity_para(n: usize) -> ParamFn {
    ParamFn::new(
        0,
        n,
        n,
        format!("id{n}"),
        |_, a| a.to_vec(),
        |_, _, w| (Vec::new(), w.to_vec()),
    )
}

/// A differentiable `f: ℝⁿ → ℝᵐ` as a trivially parametrised function.
pub fn lift_function<F, B>(
    in_dim: usize,
    out_dim: usize,
    label: impl Into<String>,
    f: F,
    pullback: B,
) -> ParamFn
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    B: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    ParamFn::new(
        0,
        in_dim,
        out_dim,
        label,
        move |_, a| f(a),
        move |_, a, w| (Vec::new(), pullback(a, w)),
    )
}

/// The parametrised constant `1_P: P × ℝ⁰ → P`.
pub fn param_constant(n: usize) -> ParamFn {
    ParamFn::new(
        n,
        0,
        n,
        format!("const{n}"),
        |p, _| p.to_vec(),
        |_, _, w| (w.to_vec(), Vec::new()),
    )
}

/// The symmetry `ℝⁿ ∥ ℝᵐ → ℝᵐ ∥ ℝⁿ`, `(a, b) ↦ (b, a)`.
pub fn braid_para(n: usize, m: usize) -> ParamFn {
    lift_function(
        n + m,
        n + m,
        format!("swap{n},{m}"),
        move |ab| concat(&ab[n..], &ab[..n]),
        move |_, w| concat(&w[m..], &w[..m]),
    )
}

/// Worst relative error (see [`max_rel_err`]) between the analytic pullback
/// `(gp | ga)` and a central difference of the forward map in both slots
/// jointly.
pub fn pullback_error(f: &ParamFn, p: &[f64], a: &[f64], w: &[f64], h: f64) -> Result<f64> {
    f.check_args(p, a)?;
    check_dim(&format!("{} cotangent", f.label), f.out_dim, w.len())?;
    let np = f.param_dim;
    let x = concat(p, a);
    let fd = finite_diff_pullback(|x: &[f64]| f.forward(&x[..np], &x[np..]), &x, w, h)?;
    let (gp, ga) = f.pullback(p, a, w);
    Ok(max_rel_err(&concat(&gp, &ga), &fd))
}

/// Largest forward/pullback discrepancy between two parametrised functions
/// of the same type at one point.
pub fn para_deviation(f: &ParamFn, g: &ParamFn, p: &[f64], a: &[f64], w: &[f64]) -> f64 {
    use crate::numeric::max_abs_diff;
    let fwd = max_abs_diff(&f.forward(p, a), &g.forward(p, a));
    let (gp1, ga1) = f.pullback(p, a, w);
    let (gp2, ga2) = g.pullback(p, a, w);
    fwd.max(max_abs_diff(&gp1, &gp2)).max(max_abs_diff(&ga1, &ga2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{sample_vec, Rng, FD_STEP};

    fn scalar_mult() -> ParamFn {
        ParamFn::new(
            1,
            1,
            1,
            "mult",
            |p, a| vec![p[0] * a[0]],
            |p, a, w| (vec![w[0] * a[0]], vec![w[0] * p[0]]),
        )
    }

    fn wobble() -> ParamFn {
        // (p0, p1), (a0, a1) -> (sin(p0 a0) + p1, a0 a1 p1, exp(-a1))
        ParamFn::new(
            2,
            2,
            3,
            "wobble",
            |p, a| vec![(p[0] * a[0]).sin() + p[1], a[0] * a[1] * p[1], (-a[1]).exp()],
            |p, a, w| {
                let c = (p[0] * a[0]).cos();
                let gp = vec![w[0] * c * a[0], w[0] + w[1] * a[0] * a[1]];
                let ga = vec![
                    w[0] * c * p[0] + w[1] * a[1] * p[1],
                    w[1] * a[0] * p[1] - w[2] * (-a[1]).exp(),
                ];
                (gp, ga)
            },
        )
    }

    fn sample_point(f: &ParamFn, rng: &mut Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            sample_vec(rng, f.param_dim(), -1.0, 1.0).into_inner(),
            sample_vec(rng, f.in_dim(), -1.0, 1.0).into_inner(),
            sample_vec(rng, f.out_dim(), -1.0, 1.0).into_inner(),
        )
    }

    #[test]
    fn composite_of_scalar_mults() {
        let h = compose_para(&scalar_mult(), &scalar_mult()).unwrap();
        assert_eq!(h.param_dim(), 2);
        assert_eq!(h.forward(&[1.0, 2.0], &[1.0]), vec![2.0]);
        // d(v w a)/dw = v a = 2, d/dv = w a = 1, d/da = v w = 2
        let (gp, ga) = h.pullback(&[1.0, 2.0], &[1.0], &[1.0]);
        assert_eq!(gp, vec![2.0, 1.0]);
        assert_eq!(ga, vec![2.0]);
        assert!(pullback_error(&h, &[1.0, 2.0], &[1.0], &[1.0], FD_STEP).unwrap() < 1e-8);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let err = compose_para(&wobble(), &scalar_mult()).unwrap_err();
        match err {
            Error::DimensionMismatch { expected, found, .. } => assert_eq!((expected, found), (3, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parallel_blocks() {
        let h = parallel_para(&scalar_mult(), &scalar_mult());
        assert_eq!(h.forward(&[2.0, 3.0], &[1.0, 1.0]), vec![2.0, 3.0]);
        let (gp, ga) = h.pullback(&[2.0, 3.0], &[5.0, 7.0], &[1.0, 10.0]);
        assert_eq!(gp, vec![5.0, 70.0]);
        assert_eq!(ga, vec![2.0, 30.0]);
    }

    #[test]
    fn identity_examples() {
        let id = identity_para(3);
        assert_eq!(id.forward(&[], &[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let id2 = identity_para(2);
        assert_eq!(id2.pullback(&[], &[0.0, 0.0], &[4.0, 5.0]), (vec![], vec![4.0, 5.0]));
    }

    #[test]
    fn unit_laws_on_samples() {
        let f = wobble();
        let left = compose_para(&identity_para(2), &f).unwrap();
        let right = compose_para(&f, &identity_para(3)).unwrap();
        let unit = parallel_para(&f, &identity_para(0));
        let mut rng = Rng::new(3);
        for _ in 0..20 {
            let (p, a, w) = sample_point(&f, &mut rng);
            assert_eq!(para_deviation(&f, &left, &p, &a, &w), 0.0);
            assert_eq!(para_deviation(&f, &right, &p, &a, &w), 0.0);
            assert_eq!(para_deviation(&f, &unit, &p, &a, &w), 0.0);
        }
    }

    #[test]
    fn swap_lift() {
        let s = braid_para(1, 1);
        assert_eq!(s.forward(&[], &[1.0, 2.0]), vec![2.0, 1.0]);
        let s21 = braid_para(2, 1);
        assert_eq!(s21.forward(&[], &[1.0, 2.0, 9.0]), vec![9.0, 1.0, 2.0]);
        assert!(pullback_error(&s21, &[], &[0.1, 0.2, 0.3], &[1.0, -2.0, 0.5], FD_STEP).unwrap() < 1e-8);
    }

    #[test]
    fn lifted_linear_map() {
        let m = [[2.0, -1.0], [0.5, 3.0], [1.0, 1.0]];
        let f = lift_function(
            2,
            3,
            "M",
            move |a| m.iter().map(|r| r[0] * a[0] + r[1] * a[1]).collect(),
            move |_, w| {
                (0..2).map(|i| (0..3).map(|j| m[j][i] * w[j]).sum()).collect()
            },
        );
        assert_eq!(f.forward(&[], &[1.0, 1.0]), vec![1.0, 3.5, 2.0]);
        let (gp, ga) = f.pullback(&[], &[0.0, 0.0], &[1.0, 0.0, 0.0]);
        assert!(gp.is_empty());
        assert_eq!(ga, vec![2.0, -1.0]);
    }

    #[test]
    fn lifted_identity_is_identity() {
        let lifted = lift_function(2, 2, "id", |a| a.to_vec(), |_, w| w.to_vec());
        assert_eq!(para_deviation(&lifted, &identity_para(2), &[], &[0.3, -4.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn param_constant_examples() {
        let c = param_constant(2);
        assert_eq!(c.forward(&[7.0, 8.0], &[]), vec![7.0, 8.0]);
        assert_eq!(c.pullback(&[7.0, 8.0], &[], &[1.0, 0.0]), (vec![1.0, 0.0], vec![]));
    }

    #[test]
    fn weight_tying_factorisation() {
        // (P, 1_P) ∥ id_A followed by the absorbed body reproduces (P, I).
        let f = wobble();
        let factored = compose_para(
            &parallel_para(&param_constant(f.param_dim()), &identity_para(f.in_dim())),
            &f.absorb_params(),
        )
        .unwrap();
        let mut rng = Rng::new(11);
        for _ in 0..20 {
            let (p, a, w) = sample_point(&f, &mut rng);
            assert!(para_deviation(&f, &factored, &p, &a, &w) <= 1e-15);
        }
    }

    #[test]
    fn pullbacks_match_finite_differences() {
        let mut rng = Rng::new(5);
        let f = wobble();
        let g = ParamFn::new(
            1,
            3,
            1,
            "dot",
            |p, b| vec![p[0] * (b[0] + b[1] * b[2])],
            |p, b, w| (vec![w[0] * (b[0] + b[1] * b[2])], vec![w[0] * p[0], w[0] * p[0] * b[2], w[0] * p[0] * b[1]]),
        );
        let fg = compose_para(&f, &g).unwrap();
        let par = parallel_para(&f, &g);
        for h in [&f, &g, &fg, &par] {
            for _ in 0..5 {
                let (p, a, w) = sample_point(h, &mut rng);
                let e = pullback_error(h, &p, &a, &w, FD_STEP).unwrap();
                assert!(e <= 1e-5, "{}: {e}", h.label());
            }
        }
    }

    #[test]
    fn pullback_is_linear_in_cotangent() {
        let f = compose_para(&wobble(), &parallel_para(&identity_para(1), &braid_para(1, 1))).unwrap();
        let mut rng = Rng::new(9);
        for _ in 0..10 {
            let (p, a, w1) = sample_point(&f, &mut rng);
            let w2 = sample_vec(&mut rng, f.out_dim(), -1.0, 1.0).into_inner();
            let (s, t) = (rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            let mix: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| s * x + t * y).collect();
            let (gp, ga) = f.pullback(&p, &a, &mix);
            let (gp1, ga1) = f.pullback(&p, &a, &w1);
            let (gp2, ga2) = f.pullback(&p, &a, &w2);
            let comb = |x: &[f64], y: &[f64]| -> Vec<f64> {
                x.iter().zip(y).map(|(u, v)| s * u + t * v).collect()
            };
            assert!(crate::numeric::max_abs_diff(&gp, &comb(&gp1, &gp2)) <= 1e-9);
            assert!(crate::numeric::max_abs_diff(&ga, &comb(&ga1, &ga2)) <= 1e-9);
        }
    }
}
