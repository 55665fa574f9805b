//! The two-layer network `A = B ++ C` worked by hand: layer `B: 2 → 2` with
//! connections `(1,1), (1,2), (2,1)` and layer `C: 2 → 1` fully connected,
//! sigmoid throughout, quadratic error.
//!
//! The hand-derived update and request formulas are written out below as
//! printed (`displayed_*`) and, where a row is misprinted, as it should
//! read (`corrected_*`). The suite checks both against the learners the
//! descent functor builds.

use serde_json::{json, Value};

use crate::descent::{descend, DescentConfig};
use crate::error::Result;
use crate::error_models::quadratic;
use crate::learn::{compare_learners, compose_learn, Learner, Trials};
use crate::nnet::{implement_network, layer_param_fn, sigmoid, Layer, Network};
use crate::numeric::{max_abs_diff, sample_vec, Rng, Tolerance};

use super::suites::{cases, CHAIN_RULE};
use super::{Check, Discrepancy, Report, VerifyOptions};

/// Step size used when comparing against the printed formulas. Any value
/// works; a non-unit one exposes a stray `ε` in a request.
pub const DISPLAY_EPS: f64 = 0.01;

pub const COORDINATES: [&str; 8] = ["p11", "p12", "p21", "p1b", "p2b", "q1", "q2", "qb"];

fn dsigma(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s)
}

/// The network and its parameter layout `p₁₁ p₁₂ p₂₁ p₁b p₂b q₁ q₂ q_b`.
pub struct NetworkA;

impl NetworkA {
    pub fn layer_b() -> Layer {
        Layer::new(2, 2, &[(1, 1), (1, 2), (2, 1)]).expect("fixed layer")
    }

    pub fn layer_c() -> Layer {
        Layer::dense(2, 1)
    }

    pub fn network() -> Network {
        Network::new(2, vec![Self::layer_b(), Self::layer_c()]).expect("fixed network")
    }
}

/// A point `(p, q, a, c)`, plus a target `b` for layer `B` on its own.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: [f64; 8],
    pub a: [f64; 2],
    pub c: f64,
    pub b: [f64; 2],
}

impl Point {
    fn draw(rng: &mut Rng) -> Point {
        let x = sample_vec(rng, 8, -1.0, 1.0);
        let a = sample_vec(rng, 2, -1.0, 1.0);
        let t = sample_vec(rng, 3, 0.0, 1.0);
        Point {
            x: x.as_slice().try_into().expect("8"),
            a: [a[0], a[1]],
            c: t[0],
            b: [t[1], t[2]],
        }
    }

    fn p(&self) -> &[f64] {
        &self.x[..5]
    }

    fn q(&self) -> &[f64] {
        &self.x[5..]
    }
}

/// Shared subexpressions `β₁, β₂, γ` and `(I_A − c) σ̇(γ)`.
struct Terms {
    beta1: f64,
    beta2: f64,
    gamma: f64,
    err: f64,
}

fn terms(pt: &Point) -> Terms {
    let [p11, p12, p21, p1b, p2b, q1, q2, qb] = pt.x;
    let [a1, a2] = pt.a;
    let beta1 = p11 * a1 + p12 * a2 + p1b;
    let beta2 = p21 * a1 + p2b;
    let gamma = q1 * sigmoid(beta1) + q2 * sigmoid(beta2) + qb;
    let err = (sigmoid(gamma) - pt.c) * dsigma(gamma);
    Terms { beta1, beta2, gamma, err }
}

pub fn displayed_i_a(pt: &Point) -> f64 {
    sigmoid(terms(pt).gamma)
}

/// `U_A` as printed; its `p₂b` row carries `q₁` where `q₂` is due.
pub fn displayed_u_a(eps: f64, pt: &Point) -> [f64; 8] {
    let t = terms(pt);
    let [p11, p12, p21, p1b, p2b, q1, q2, qb] = pt.x;
    let [a1, a2] = pt.a;
    let (d1, d2) = (dsigma(t.beta1), dsigma(t.beta2));
    [
        p11 - eps * t.err * q1 * d1 * a1,
        p12 - eps * t.err * q1 * d1 * a2,
        p21 - eps * t.err * q2 * d2 * a1,
        p1b - eps * t.err * q1 * d1,
        p2b - eps * t.err * q1 * d2,
        q1 - eps * t.err * sigmoid(t.beta1),
        q2 - eps * t.err * sigmoid(t.beta2),
        qb - eps * t.err,
    ]
}

pub fn corrected_u_a(eps: f64, pt: &Point) -> [f64; 8] {
    let t = terms(pt);
    let mut u = displayed_u_a(eps, pt);
    u[4] = pt.x[4] - eps * t.err * pt.x[6] * dsigma(t.beta2);
    u
}

/// `r_A` as printed, with a factor `ε` that requests do not carry.
pub fn displayed_r_a(eps: f64, pt: &Point) -> [f64; 2] {
    let t = terms(pt);
    let [p11, p12, p21, _, _, q1, q2, _] = pt.x;
    let (d1, d2) = (dsigma(t.beta1), dsigma(t.beta2));
    [
        pt.a[0] - eps * t.err * (q1 * d1 * p11 + q2 * d2 * p21),
        pt.a[1] - eps * t.err * q1 * d1 * p12,
    ]
}

pub fn corrected_r_a(pt: &Point) -> [f64; 2] {
    displayed_r_a(1.0, pt)
}

fn layer_b_terms(pt: &Point) -> (f64, f64, f64, f64) {
    let t = terms(pt);
    let e1 = sigmoid(t.beta1) - pt.b[0];
    let e2 = sigmoid(t.beta2) - pt.b[1];
    (e1 * dsigma(t.beta1), e2 * dsigma(t.beta2), e1, dsigma(t.beta1))
}

/// `U_B` as printed; its `p₁b` row uses the second output's error.
pub fn displayed_u_b(eps: f64, pt: &Point) -> [f64; 5] {
    let t = terms(pt);
    let [p11, p12, p21, p1b, p2b, ..] = pt.x;
    let [a1, a2] = pt.a;
    let (g1, g2, _, _) = layer_b_terms(pt);
    let e2 = sigmoid(t.beta2) - pt.b[1];
    [
        p11 - eps * g1 * a1,
        p12 - eps * g1 * a2,
        p21 - eps * g2 * a1,
        p1b - eps * e2 * dsigma(t.beta1),
        p2b - eps * g2,
    ]
}

pub fn corrected_u_b(eps: f64, pt: &Point) -> [f64; 5] {
    let (g1, ..) = layer_b_terms(pt);
    let mut u = displayed_u_b(eps, pt);
    u[3] = pt.x[3] - eps * g1;
    u
}

/// `r_B` as printed: the first row has lost a bracket (so the second term
/// is added) and the second row applies `σ` to the error.
pub fn displayed_r_b(pt: &Point) -> [f64; 2] {
    let [p11, p12, p21, ..] = pt.x;
    let (g1, g2, e1, d1) = layer_b_terms(pt);
    [pt.a[0] - g1 * p11 + g2 * p21, pt.a[1] - sigmoid(e1) * d1 * p12]
}

pub fn corrected_r_b(pt: &Point) -> [f64; 2] {
    let [p11, p12, p21, ..] = pt.x;
    let (g1, g2, ..) = layer_b_terms(pt);
    [pt.a[0] - (g1 * p11 + g2 * p21), pt.a[1] - g1 * p12]
}

fn layer_c_terms(q: &[f64], b: &[f64], c: f64) -> (f64, f64) {
    let g = q[0] * b[0] + q[1] * b[1] + q[2];
    (g, (sigmoid(g) - c) * dsigma(g))
}

pub fn displayed_u_c(eps: f64, q: &[f64], b: &[f64], c: f64) -> [f64; 3] {
    let (_, e) = layer_c_terms(q, b, c);
    [q[0] - eps * e * b[0], q[1] - eps * e * b[1], q[2] - eps * e]
}

pub fn displayed_r_c(q: &[f64], b: &[f64], c: f64) -> [f64; 2] {
    let (_, e) = layer_c_terms(q, b, c);
    [b[0] - e * q[0], b[1] - e * q[1]]
}

/// Both lines of the hand check that `(U_B ∗ U_C)₁₁ = (U_A)₁₁`.
pub fn displayed_p11_chain(eps: f64, pt: &Point) -> [f64; 2] {
    let t = terms(pt);
    let i = [sigmoid(t.beta1), sigmoid(t.beta2)];
    let s = displayed_r_c(pt.q(), &i, pt.c);
    let (g, _) = layer_c_terms(pt.q(), &i, pt.c);
    let p11 = pt.x[0];
    let a1 = pt.a[0];
    [
        p11 - eps * (i[0] - s[0]) * dsigma(t.beta1) * a1,
        p11 - eps * (sigmoid(g) - pt.c) * dsigma(g) * pt.x[5] * dsigma(t.beta1) * a1,
    ]
}

struct Learners {
    composed: Learner,
    monolithic: Learner,
    b: Learner,
    c: Learner,
}

fn learners(eps: f64) -> Result<Learners> {
    let cfg = DescentConfig::new(eps, quadratic())?;
    let act = crate::nnet::builtin_activation("sigmoid")?;
    let b = descend(&cfg, &layer_param_fn(&NetworkA::layer_b(), &act));
    let c = descend(&cfg, &layer_param_fn(&NetworkA::layer_c(), &act));
    Ok(Learners {
        composed: compose_learn(&b, &c)?,
        monolithic: descend(&cfg, &implement_network(&NetworkA::network(), &act)),
        b,
        c,
    })
}

/// Every quantity the suite compares at one point.
struct Evaluated {
    composed_u: Vec<f64>,
    composed_r: Vec<f64>,
    composed_i: f64,
    mono_u: Vec<f64>,
    mono_r: Vec<f64>,
    u_b: Vec<f64>,
    r_b: Vec<f64>,
    u_c: Vec<f64>,
    r_c: Vec<f64>,
}

fn evaluate(l: &Learners, pt: &Point) -> Result<Evaluated> {
    let s = l.composed.step(&pt.x, &pt.a, &[pt.c])?;
    let m = l.monolithic.step(&pt.x, &pt.a, &[pt.c])?;
    let sb = l.b.step(pt.p(), &pt.a, &pt.b)?;
    // layer C on its own, at the hidden values B actually produces
    let hidden = l.b.implement(pt.p(), &pt.a)?;
    let sc = l.c.step(pt.q(), &hidden, &[pt.c])?;
    Ok(Evaluated {
        composed_u: s.update,
        composed_r: s.request?,
        composed_i: l.composed.implement(&pt.x, &pt.a)?[0],
        mono_u: m.update,
        mono_r: m.request?,
        u_b: sb.update,
        r_b: sb.request?,
        u_c: sc.update,
        r_c: sc.request?,
    })
}

/// Running maxima of every compared quantity, in a fixed order.
const ROWS: [&str; 25] = [
    "I_A",
    "U_A.p11",
    "U_A.p12",
    "U_A.p21",
    "U_A.p1b",
    "U_A.q1",
    "U_A.q2",
    "U_A.qb",
    "U_A.p2b.corrected",
    "r_A.corrected",
    "U_B.p11",
    "U_B.p12",
    "U_B.p21",
    "U_B.p2b",
    "U_B.p1b.corrected",
    "r_B.corrected",
    "U_C",
    "r_C",
    "p11_chain.first_line",
    "p11_chain.second_line",
    // printed forms that disagree
    "U_A.p2b",
    "r_A",
    "U_B.p1b",
    "r_B.1",
    "r_B.2",
];

fn deviations(eps: f64, pt: &Point, ev: &Evaluated) -> [f64; 25] {
    let d = |x: f64, y: f64| (x - y).abs();
    let u_a = displayed_u_a(eps, pt);
    let u_b = displayed_u_b(eps, pt);
    let r_b = displayed_r_b(pt);
    let hidden = [sigmoid(terms(pt).beta1), sigmoid(terms(pt).beta2)];
    let chain = displayed_p11_chain(eps, pt);
    let (cu, cr) = (&ev.composed_u, &ev.composed_r);
    [
        d(displayed_i_a(pt), ev.composed_i),
        d(u_a[0], cu[0]),
        d(u_a[1], cu[1]),
        d(u_a[2], cu[2]),
        d(u_a[3], cu[3]),
        d(u_a[5], cu[5]),
        d(u_a[6], cu[6]),
        d(u_a[7], cu[7]),
        d(corrected_u_a(eps, pt)[4], cu[4]),
        max_abs_diff(&corrected_r_a(pt), cr),
        d(u_b[0], ev.u_b[0]),
        d(u_b[1], ev.u_b[1]),
        d(u_b[2], ev.u_b[2]),
        d(u_b[4], ev.u_b[4]),
        d(corrected_u_b(eps, pt)[3], ev.u_b[3]),
        max_abs_diff(&corrected_r_b(pt), &ev.r_b),
        max_abs_diff(&displayed_u_c(eps, pt.q(), &hidden, pt.c), &ev.u_c),
        max_abs_diff(&displayed_r_c(pt.q(), &hidden, pt.c), &ev.r_c),
        d(chain[0], cu[0]),
        d(chain[1], cu[0]),
        d(u_a[4], cu[4]),
        max_abs_diff(&displayed_r_a(eps, pt), cr),
        d(u_b[3], ev.u_b[3]),
        d(r_b[0], ev.r_b[0]),
        d(r_b[1], ev.r_b[1]),
    ]
}

const NOTES: [&str; 5] = [
    "printed row uses q1; the functor (and the chain rule) give q2",
    "printed request carries a factor eps; requests are eps-free, and the eps = 1 reading matches",
    "printed row uses the second output's error (I_B(p,a)_2 - b_2); the functor gives the first",
    "printed row lost a bracket, adding the second term; the bracketed reading matches",
    "printed row applies sigma to the error; without it the row matches",
];

fn side_by_side(eps: f64, pt: &Point, ev: &Evaluated) -> Value {
    let u_a = displayed_u_a(eps, pt);
    let fixed_u = corrected_u_a(eps, pt);
    let r_a = displayed_r_a(eps, pt);
    let fixed_r = corrected_r_a(pt);
    let row = |name: &str, composed: f64, mono: f64, shown: f64, fixed: f64| {
        let mut v = json!({
            "coordinate": name,
            "composed": composed,
            "monolithic": mono,
            "display": shown,
        });
        if shown != fixed {
            v["display_corrected"] = json!(fixed);
        }
        v
    };
    json!({
        "eps": eps,
        "point": {
            "p": pt.p(),
            "q": pt.q(),
            "a": pt.a,
            "c": pt.c,
        },
        "U_A": (0..8)
            .map(|k| row(COORDINATES[k], ev.composed_u[k], ev.mono_u[k], u_a[k], fixed_u[k]))
            .collect::<Vec<_>>(),
        "r_A": (0..2)
            .map(|k| row(&format!("a{}", k + 1), ev.composed_r[k], ev.mono_r[k], r_a[k], fixed_r[k]))
            .collect::<Vec<_>>(),
    })
}

pub(super) fn suite(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(CHAIN_RULE);
    let eps = DISPLAY_EPS;
    let l = learners(eps)?;

    let plan = Trials::new(opts.trials, opts.seed).with_exec(opts.exec);
    let c = compare_learners(&l.composed, &l.monolithic, None, Tolerance::absolute(tol), &plan)?;
    report.push(Check::from_comparison("composed_vs_monolithic", &c, tol));

    let rows = cases(opts, 70, |rng| {
        let pt = Point::draw(rng);
        let ev = evaluate(&l, &pt)?;
        Ok((deviations(eps, &pt, &ev), pt))
    })?;
    let col = |k: usize| rows.iter().map(|(r, _)| r[k]).fold(0.0, f64::max);
    for (k, name) in ROWS.iter().enumerate().take(20) {
        report.push(Check::new(*name, col(k), tol));
    }
    for (k, note) in NOTES.iter().enumerate() {
        report.discrepancy(Discrepancy::new(ROWS[20 + k], col(20 + k), *note));
    }

    let first = rows[0].1;
    report.details = side_by_side(eps, &first, &evaluate(&l, &first)?);
    Ok(())
}
