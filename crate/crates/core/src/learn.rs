//! Learners `A → B`: a parameter space with implement, update and request
//! functions, composed in series and in parallel.
//!
//! The update and request are produced together by [`Learner::step`] so a
//! composite can share the upstream forward value between them. The request
//! half of a step carries its own `Result`: an update may succeed at a point
//! where the request is undefined.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::exec::Execution;
use crate::numeric::{concat, max_abs_diff, sample_vec, Rng, Tolerance};

/// Updated parameter and requested input for one training datum.
#[derive(Debug)]
pub struct Step {
    pub update: Vec<f64>,
    pub request: Result<Vec<f64>>,
}

type ImplementFn = dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync;
type StepFn = dyn Fn(&[f64], &[f64], &[f64]) -> Result<Step> + Send + Sync;

#[derive(Clone)]
pub struct Learner {
    param_dim: usize,
    in_dim: usize,
    out_dim: usize,
    label: String,
    implement: Arc<ImplementFn>,
    step: Arc<StepFn>,
}

impl fmt::Debug for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Learner")
            .field("label", &self.label)
            .field("param_dim", &self.param_dim)
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .finish()
    }
}

impl Learner {
    /// A learner from three total functions.
    pub fn new<I, U, R>(
        param_dim: usize,
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        implement: I,
        update: U,
        request: R,
    ) -> Self
    where
        I: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        U: Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        R: Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Learner::from_step(
            param_dim,
            in_dim,
            out_dim,
            label,
            move |p, a| Ok(implement(p, a)),
            move |p, a, b| {
                Ok(Step {
                    update: update(p, a, b),
                    request: Ok(request(p, a, b)),
                })
            },
        )
    }

    /// A learner from a fallible implementation and a combined update–request.
    pub fn from_step<I, S>(
        param_dim: usize,
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        implement: I,
        step: S,
    ) -> Self
    where
        I: Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
        S: Fn(&[f64], &[f64], &[f64]) -> Result<Step> + Send + Sync + 'static,
    {
        Learner {
            param_dim,
            in_dim,
            out_dim,
            label: label.into(),
            implement: Arc::new(implement),
            step: Arc::new(step),
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

    pub fn implement(&self, p: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        self.check_pa(p, a)?;
        let out = (self.implement)(p, a)?;
        check_dim(&format!("{} implement result", self.label), self.out_dim, out.len())?;
        check_finite(&format!("{} implement", self.label), &out)?;
        Ok(out)
    }

    pub fn step(&self, p: &[f64], a: &[f64], b: &[f64]) -> Result<Step> {
        self.check_pa(p, a)?;
        check_dim(&format!("{} target", self.label), self.out_dim, b.len())?;
        let Step { update, request } = (self.step)(p, a, b)?;
        check_dim(&format!("{} update result", self.label), self.param_dim, update.len())?;
        check_finite(&format!("{} update", self.label), &update)?;
        let request = request.and_then(|r| {
            check_dim(&format!("{} request result", self.label), self.in_dim, r.len())?;
            check_finite(&format!("{} request", self.label), &r)?;
            Ok(r)
        });
        Ok(Step { update, request })
    }

    pub fn update(&self, p: &[f64], a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.step(p, a, b)?.update)
    }

    pub fn request(&self, p: &[f64], a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.step(p, a, b)?.request
    }

    fn check_pa(&self, p: &[f64], a: &[f64]) -> Result<()> {
        check_dim(&format!("{} parameter", self.label), self.param_dim, p.len())?;
        check_dim(&format!("{} input", self.label), self.in_dim, a.len())
    }
}

/// Series composite. Parameters are `[p | q]`; the upstream implementation
/// is evaluated once per call and its value shared by both halves.
pub fn compose_learn(first: &Learner, second: &Learner) -> Result<Learner> {
    if first.out_dim != second.in_dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "compose_learn: out_dim of `{}` vs in_dim of `{}`",
                first.label, second.label
            ),
            expected: first.out_dim,
            found: second.in_dim,
        });
    }
    let np = first.param_dim;
    let (l1, l2) = (first.clone(), second.clone());
    let (m1, m2) = (first.clone(), second.clone());
    Ok(Learner::from_step(
        first.param_dim + second.param_dim,
        first.in_dim,
        second.out_dim,
        format!("({} * {})", first.label, second.label),
        move |pq, a| l2.implement(&pq[np..], &l1.implement(&pq[..np], a)?),
        move |pq, a, c| {
            let (p, q) = pq.split_at(np);
            let b = m1.implement(p, a)?;
            let downstream = m2.step(q, &b, c)?;
            let wanted = downstream.request?;
            let upstream = m1.step(p, a, &wanted)?;
            Ok(Step {
                update: concat(&upstream.update, &downstream.update),
                request: upstream.request,
            })
        },
    ))
}

/// Parallel product, blockwise in every slot.
pub fn parallel_learn(left: &Learner, right: &Learner) -> Learner {
    let (np, na, nb) = (left.param_dim, left.in_dim, left.out_dim);
    let (l1, l2) = (left.clone(), right.clone());
    let (m1, m2) = (left.clone(), right.clone());
    Learner::from_step(
        left.param_dim + right.param_dim,
        left.in_dim + right.in_dim,
        left.out_dim + right.out_dim,
        format!("({} || {})", left.label, right.label),
        move |pq, ac| {
            Ok(concat(
                &l1.implement(&pq[..np], &ac[..na])?,
                &l2.implement(&pq[np..], &ac[na..])?,
            ))
        },
        move |pq, ac, bd| {
            let s1 = m1.step(&pq[..np], &ac[..na], &bd[..nb])?;
            let s2 = m2.step(&pq[np..], &ac[na..], &bd[nb..])?;
            let request = match (s1.request, s2.request) {
                (Ok(r1), Ok(r2)) => Ok(concat(&r1, &r2)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            };
            Ok(Step {
                update: concat(&s1.update, &s2.update),
                request,
            })
        },
    )
}

/// `(ℝ⁰, id, !, π₂)`: the request hands the target straight back.
pub fn identity_learn(n: usize) -> Learner {
    Learner::new(
        0,
        n,
        n,
        format!("id{n}"),
        |_, a| a.to_vec(),
        |_, _, _| Vec::new(),
        |_, _, b| b.to_vec(),
    )
}

/// `(ℝ⁰, σ, !, σ∘π₂)` on `ℝⁿ ∥ ℝᵐ`.
pub fn braid_learn(n: usize, m: usize) -> Learner {
    Learner::new(
        0,
        n + m,
        n + m,
        format!("swap{n},{m}"),
        move |_, ab| concat(&ab[n..], &ab[..n]),
        |_, _, _| Vec::new(),
        move |_, _, ba| concat(&ba[m..], &ba[..m]),
    )
}

/// Boxes that random parameters, inputs and targets are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub param: (f64, f64),
    pub input: (f64, f64),
    pub target: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            param: (-1.0, 1.0),
            input: (-1.0, 1.0),
            target: (-1.0, 1.0),
        }
    }
}

impl SampleBox {
    /// Inputs and targets in the unit interval, as cross entropy expects.
    pub fn unit_interval() -> Self {
        SampleBox {
            param: (-1.0, 1.0),
            input: (0.0, 1.0),
            target: (0.0, 1.0),
        }
    }

    pub fn draw(
        &self,
        rng: &mut Rng,
        param_dim: usize,
        in_dim: usize,
        out_dim: usize,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            sample_vec(rng, param_dim, self.param.0, self.param.1).into_inner(),
            sample_vec(rng, in_dim, self.input.0, self.input.1).into_inner(),
            sample_vec(rng, out_dim, self.target.0, self.target.1).into_inner(),
        )
    }
}

/// How many independent random points to test, and how.
#[derive(Debug, Clone, Copy)]
pub struct Trials {
    pub count: usize,
    pub seed: u64,
    pub sample: SampleBox,
    pub exec: Execution,
}

impl Trials {
    pub fn new(count: usize, seed: u64) -> Self {
        Trials {
            count,
            seed,
            sample: SampleBox::default(),
            exec: Execution::default(),
        }
    }

    pub fn with_sample(mut self, sample: SampleBox) -> Self {
        self.sample = sample;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

/// Largest coordinatewise disagreement per learner function.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Deviation {
    pub implement: f64,
    pub update: f64,
    pub request: f64,
}

impl Deviation {
    pub fn max(&self) -> f64 {
        self.implement.max(self.update).max(self.request)
    }

    pub fn merge(self, other: Deviation) -> Deviation {
        Deviation {
            implement: self.implement.max(other.implement),
            update: self.update.max(other.update),
            request: self.request.max(other.request),
        }
    }
}

/// Outcome of comparing two learners at random points.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Comparison {
    pub deviation: Deviation,
    /// Points where some coordinate fell outside the tolerance.
    pub failures: usize,
    /// Trials that produced a comparable point.
    pub evaluated: usize,
    /// Trials abandoned after every resample hit a domain error on both sides.
    pub skipped: usize,
}

impl Comparison {
    pub fn passes(&self) -> bool {
        self.failures == 0 && self.skipped == 0
    }

    /// Pools two comparisons as if their points had been drawn together.
    pub fn merge(self, other: Comparison) -> Self {
        Comparison {
            deviation: self.deviation.merge(other.deviation),
            failures: self.failures + other.failures,
            evaluated: self.evaluated + other.evaluated,
            skipped: self.skipped + other.skipped,
        }
    }

    fn absorb(mut self, point: PointResult) -> Self {
        match point {
            PointResult::Compared { deviation, ok } => {
                self.deviation = self.deviation.merge(deviation);
                self.evaluated += 1;
                if !ok {
                    self.failures += 1;
                }
            }
            PointResult::Skipped => self.skipped += 1,
        }
        self
    }
}

const MAX_RESAMPLES: usize = 10;

enum PointResult {
    Compared { deviation: Deviation, ok: bool },
    Skipped,
}

enum Probe {
    Both(Vec<f64>, Vec<f64>),
    BothFailed,
    OneFailed,
}

fn probe(x: Option<Vec<f64>>, y: Option<Vec<f64>>) -> Probe {
    match (x, y) {
        (Some(x), Some(y)) => Probe::Both(x, y),
        (None, None) => Probe::BothFailed,
        _ => Probe::OneFailed,
    }
}

fn split(step: Result<Step>) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    match step {
        Ok(s) => (Some(s.update), s.request.ok()),
        Err(_) => (None, None),
    }
}

/// A reparametrisation `P → P′` under which two learners are compared.
pub type Reparam<'a> = &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync);

/// Compares `l1` at `p` with `l2` at `f(p)`, per the equivalence of learners:
/// `I′(f p) = I(p)`, `U′(f p) = f(U p)`, `r′(f p) = r(p)`.
fn compare_point(
    l1: &Learner,
    l2: &Learner,
    reparam: Option<Reparam<'_>>,
    tol: Tolerance,
    p: &[f64],
    a: &[f64],
    b: &[f64],
) -> Option<PointResult> {
    let fp = reparam.map_or_else(|| p.to_vec(), |f| f(p));
    let mut dev = Deviation::default();
    let mut ok = true;
    let mut domain_failures = 0;
    let within = |x: &[f64], y: &[f64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(u, v)| tol.accepts(*u, *v))
    };

    let (u1, r1) = split(l1.step(p, a, b));
    let (u2, r2) = split(l2.step(&fp, a, b));
    let u1 = u1.map(|u| reparam.map_or(u.clone(), |f| f(&u)));
    let pairs = [
        (&mut dev.implement, l1.implement(p, a).ok(), l2.implement(&fp, a).ok()),
        (&mut dev.update, u1, u2),
        (&mut dev.request, r1, r2),
    ];
    for (slot, x, y) in pairs {
        match probe(x, y) {
            Probe::Both(x, y) => {
                *slot = slot.max(max_abs_diff(&x, &y));
                ok &= within(&x, &y);
            }
            Probe::BothFailed => domain_failures += 1,
            Probe::OneFailed => {
                *slot = f64::INFINITY;
                ok = false;
            }
        }
    }

    if domain_failures > 0 && ok {
        // Undefined on both sides: worth another draw.
        return None;
    }
    Some(PointResult::Compared { deviation: dev, ok })
}

/// Compares two learners of the same type at `trials.count` random points,
/// resampling (up to 10 times) points where both sides hit a domain error.
pub fn compare_learners(
    l1: &Learner,
    l2: &Learner,
    reparam: Option<Reparam<'_>>,
    tol: Tolerance,
    trials: &Trials,
) -> Result<Comparison> {
    check_dim("compared learners' input", l1.in_dim, l2.in_dim)?;
    check_dim("compared learners' output", l1.out_dim, l2.out_dim)?;
    if reparam.is_none() {
        check_dim("compared learners' parameter", l1.param_dim, l2.param_dim)?;
    }
    let sample = trials.sample;
    let seed = trials.seed;
    let points = trials.exec.map(trials.count, |i| {
        let mut rng = Rng::stream(seed, i as u64);
        for _ in 0..MAX_RESAMPLES {
            let (p, a, b) = sample.draw(&mut rng, l1.param_dim, l1.in_dim, l1.out_dim);
            if let Some(r) = compare_point(l1, l2, reparam, tol, &p, &a, &b) {
                return r;
            }
        }
        PointResult::Skipped
    });
    Ok(points
        .into_iter()
        .fold(Comparison::default(), Comparison::absorb))
}

/// Agreement of implement, update and request at `trials` random points
/// under the identity reparametrisation. Deciding equivalence under an
/// arbitrary bijection is out of reach; see [`equivalent_under`].
pub fn equivalent_extensionally(
    l1: &Learner,
    l2: &Learner,
    trials: usize,
    tol: Tolerance,
    rng: &mut Rng,
) -> bool {
    let plan = Trials::new(trials, rng.next_u64());
    compare_learners(l1, l2, None, tol, &plan).is_ok_and(|c| c.passes())
}

/// Like [`equivalent_extensionally`], with a caller-supplied bijection of
/// parameter spaces.
pub fn equivalent_under(
    l1: &Learner,
    l2: &Learner,
    reparam: Reparam<'_>,
    trials: usize,
    tol: Tolerance,
    rng: &mut Rng,
) -> bool {
    let plan = Trials::new(trials, rng.next_u64());
    compare_learners(l1, l2, Some(reparam), tol, &plan).is_ok_and(|c| c.passes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// λ under quadratic error, written out by hand.
    fn scalar_mult(eps: f64) -> Learner {
        Learner::new(
            1,
            1,
            1,
            "lambda",
            |w, x| vec![w[0] * x[0]],
            move |w, x, y| vec![w[0] - eps * x[0] * (w[0] * x[0] - y[0])],
            |w, x, y| vec![x[0] - w[0] * (w[0] * x[0] - y[0])],
        )
    }

    fn bias(eps: f64) -> Learner {
        Learner::new(
            1,
            0,
            1,
            "beta",
            |w, _| vec![w[0]],
            move |w, _, y| vec![(1.0 - eps) * w[0] + eps * y[0]],
            |_, _, _| Vec::new(),
        )
    }

    /// Not gradient-based: an arbitrary smooth learner `ℝ² → ℝ` with two parameters.
    fn odd_learner() -> Learner {
        Learner::new(
            2,
            2,
            1,
            "odd",
            |p, a| vec![(p[0] * a[0] + p[1] * a[1]).tanh()],
            |p, a, b| vec![p[0] + 0.3 * b[0] * a[1], p[1] * (a[0] - b[0]).cos()],
            |p, a, b| vec![a[0] - p[1] * b[0], a[1] * b[0] + p[0]],
        )
    }

    #[test]
    fn composite_of_two_scalar_mults() {
        let eps = 0.1;
        let c = compose_learn(&scalar_mult(eps), &scalar_mult(eps)).unwrap();
        let pq = [1.0, 2.0];
        assert_eq!(c.implement(&pq, &[1.0]).unwrap(), vec![2.0]);
        let step = c.step(&pq, &[1.0], &[0.0]).unwrap();
        // b' = 1 - 2(2·1 - 0) = -3;  w ← 1 - 0.1·1·(1 - (-3));  v ← 2 - 0.1·1·(2 - 0)
        assert!((step.update[0] - 0.6).abs() < 1e-15);
        assert!((step.update[1] - 1.8).abs() < 1e-15);
        assert_eq!(step.request.unwrap(), vec![-3.0]);
    }

    #[test]
    fn compose_rejects_mismatch() {
        assert!(matches!(
            compose_learn(&odd_learner(), &odd_learner()),
            Err(Error::DimensionMismatch { expected: 1, found: 2, .. })
        ));
    }

    #[test]
    fn identity_examples() {
        let id = identity_learn(1);
        assert_eq!(id.request(&[], &[7.0], &[3.0]).unwrap(), vec![3.0]);
        assert_eq!(identity_learn(2).implement(&[], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert!(id.update(&[], &[7.0], &[3.0]).unwrap().is_empty());
    }

    #[test]
    fn braid_examples() {
        let s = braid_learn(2, 1);
        assert_eq!(s.implement(&[], &[1.0, 2.0, 9.0]).unwrap(), vec![9.0, 1.0, 2.0]);
        let s11 = braid_learn(1, 1);
        assert_eq!(s11.request(&[], &[1.0, 2.0], &[5.0, 7.0]).unwrap(), vec![7.0, 5.0]);
        let twice = compose_learn(&braid_learn(2, 1), &braid_learn(1, 2)).unwrap();
        assert!(equivalent_extensionally(&twice, &identity_learn(3), 50, Tolerance::EXACT, &mut Rng::new(1)));
    }

    #[test]
    fn degenerate_braid_is_identity() {
        assert!(equivalent_extensionally(
            &identity_learn(1),
            &braid_learn(1, 0),
            20,
            Tolerance::EXACT,
            &mut Rng::new(2)
        ));
    }

    #[test]
    fn equivalence_examples() {
        let mut rng = Rng::new(3);
        let l = odd_learner();
        assert!(equivalent_extensionally(&l, &l, 30, Tolerance::EXACT, &mut rng));
        // λ: ℝ → ℝ vs β: ℝ⁰ → ℝ differ already in type.
        assert!(!equivalent_extensionally(&scalar_mult(0.1), &bias(0.1), 30, Tolerance::EXACT, &mut rng));
        assert!(!equivalent_extensionally(&scalar_mult(0.1), &scalar_mult(0.2), 30, Tolerance::EXACT, &mut rng));
    }

    #[test]
    fn unit_and_associativity_laws() {
        let mut rng = Rng::new(4);
        let l = odd_learner();
        let tol = Tolerance::EXACT;
        let left = compose_learn(&identity_learn(2), &l).unwrap();
        let right = compose_learn(&l, &identity_learn(1)).unwrap();
        assert!(equivalent_extensionally(&left, &l, 100, tol, &mut rng));
        assert!(equivalent_extensionally(&right, &l, 100, tol, &mut rng));

        let l2 = scalar_mult(0.3);
        let l3 = compose_learn(&scalar_mult(0.2), &scalar_mult(0.7)).unwrap();
        let a = compose_learn(&compose_learn(&l, &l2).unwrap(), &l3).unwrap();
        let b = compose_learn(&l, &compose_learn(&l2, &l3).unwrap()).unwrap();
        assert!(equivalent_extensionally(&a, &b, 100, tol, &mut rng));
    }

    #[test]
    fn parallel_request_splits() {
        let pair = parallel_learn(&odd_learner(), &scalar_mult(0.1));
        let (p, q) = ([0.3, -0.2], [1.5]);
        let (a, c) = ([0.4, 0.9], [2.0]);
        let (b, d) = ([0.1], [-1.0]);
        let r = pair
            .request(&concat(&p, &q), &concat(&a, &c), &concat(&b, &d))
            .unwrap();
        let mut expect = odd_learner().request(&p, &a, &b).unwrap();
        expect.extend(scalar_mult(0.1).request(&q, &c, &d).unwrap());
        assert_eq!(r, expect);
    }

    #[test]
    fn interchange_law() {
        let mut rng = Rng::new(5);
        let (l1, l2) = (odd_learner(), scalar_mult(0.1));
        let (l3, l4) = (scalar_mult(0.4), compose_learn(&scalar_mult(0.2), &scalar_mult(0.5)).unwrap());
        let lhs = parallel_learn(&compose_learn(&l1, &l2).unwrap(), &compose_learn(&l3, &l4).unwrap());
        let rhs = compose_learn(&parallel_learn(&l1, &l3), &parallel_learn(&l2, &l4)).unwrap();
        // [p1 p2 | p3 p4] vs [p1 p3 | p2 p4]: reorder blocks.
        let (n1, n2, n3) = (l1.param_dim(), l2.param_dim(), l3.param_dim());
        let shuffle = move |p: &[f64]| -> Vec<f64> {
            let (a, rest) = p.split_at(n1);
            let (b, rest) = rest.split_at(n2);
            let (c, d) = rest.split_at(n3);
            [a, c, b, d].concat()
        };
        assert!(equivalent_under(&lhs, &rhs, &shuffle, 100, Tolerance::EXACT, &mut rng));
    }

    #[test]
    fn braid_naturality() {
        let mut rng = Rng::new(6);
        let (l1, l2) = (odd_learner(), scalar_mult(0.3));
        let lhs = compose_learn(&parallel_learn(&l1, &l2), &braid_learn(1, 1)).unwrap();
        let rhs = compose_learn(&braid_learn(2, 1), &parallel_learn(&l2, &l1)).unwrap();
        let swap = |p: &[f64]| concat(&p[2..], &p[..2]);
        assert!(equivalent_under(&lhs, &rhs, &swap, 100, Tolerance::EXACT, &mut rng));
    }

    #[test]
    fn upstream_implement_runs_once_per_update() {
        static CALLS: AtomicUsize = AtomicUsize::new(0);
        let counted = Learner::new(
            1,
            1,
            1,
            "counted",
            |w, x| {
                CALLS.fetch_add(1, Ordering::SeqCst);
                vec![w[0] * x[0]]
            },
            |w, _, _| w.to_vec(),
            |_, x, _| x.to_vec(),
        );
        let c = compose_learn(&counted, &scalar_mult(0.1)).unwrap();
        CALLS.store(0, Ordering::SeqCst);
        c.update(&[1.0, 2.0], &[3.0], &[0.0]).unwrap();
        assert_eq!(CALLS.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn dimension_errors_are_structured() {
        let l = odd_learner();
        assert!(matches!(
            l.implement(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1, .. })
        ));
        assert!(l.update(&[1.0, 2.0], &[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn nan_outputs_surface_as_errors() {
        let bad = Learner::new(0, 1, 1, "bad", |_, a| vec![a[0].ln()], |_, _, _| vec![], |_, a, _| a.to_vec());
        assert!(matches!(bad.implement(&[], &[-1.0]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn parallel_and_sequential_comparisons_agree() {
        let l = odd_learner();
        let r = compose_learn(&identity_learn(2), &l).unwrap();
        let plan = Trials::new(64, 99);
        let a = compare_learners(&l, &r, None, Tolerance::EXACT, &plan.with_exec(Execution::Sequential)).unwrap();
        let b = compare_learners(&l, &r, None, Tolerance::EXACT, &plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluated, 64);
    }
}
