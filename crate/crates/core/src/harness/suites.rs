use crate::bimonoid::{
    self, act_learner, bias, build_neuron, closed_form as cf, counit, delta, eta, mu, scalar_mult, tie_weights,
    LinearMap,
};
use crate::descent::{descend, verify_functoriality, verify_monoidality, DescentConfig};
use crate::error::Result;
use crate::error_models::{cross_entropy, quadratic, xy_error, ErrorModel};
use crate::exec::Execution;
use crate::learn::{
    braid_learn, compare_learners, compose_learn, identity_learn, parallel_learn, Comparison, Learner, SampleBox,
    Trials,
};
use crate::nnet::{builtin_activation, implement_network, layer_param_fn, Activation, Layer, Network};
use crate::numeric::{finite_diff_pullback, max_abs_diff, max_rel_err, sample_vec, Rng, Tolerance, FD_STEP};
use crate::para::{
    braid_para, compose_para, identity_para, param_constant, parallel_para, pullback_error, ParamFn,
};

use super::{Check, Discrepancy, Report, VerifyOptions};

pub(super) const EXACT: f64 = 1e-12;
pub(super) const CHAIN_RULE: f64 = 1e-9;
pub(super) const GRADIENT: f64 = 1e-5;
pub(super) const STEP: f64 = 0.01;
/// Random points examined per randomly drawn case.
const POINTS_PER_CASE: usize = 5;

/// Runs `f` once per trial on its own random stream, in trial order.
pub(super) fn cases<T, F>(opts: &VerifyOptions, salt: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut Rng) -> Result<T> + Sync + Send,
{
    let seed = opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    opts.exec
        .map(opts.trials, |i| f(&mut Rng::stream(seed, i as u64)))
        .into_iter()
        .collect()
}

pub(super) fn pooled(results: Vec<Comparison>) -> Comparison {
    results.into_iter().fold(Comparison::default(), Comparison::merge)
}

pub(super) fn worst(results: Vec<f64>) -> f64 {
    results.into_iter().fold(0.0, f64::max)
}

/// A few points per case; the outer loop over cases is what runs in parallel.
pub(super) fn points(rng: &mut Rng, sample: SampleBox) -> Trials {
    Trials::new(POINTS_PER_CASE, rng.next_u64())
        .with_sample(sample)
        .with_exec(Execution::Sequential)
}

pub(super) fn width(rng: &mut Rng) -> usize {
    1 + rng.below(4)
}

/// A layer keeping each possible connection with probability ¾.
pub(super) fn random_layer(rng: &mut Rng, n_in: usize, n_out: usize) -> Layer {
    let mut conn = Vec::new();
    for j in 1..=n_out {
        for i in 1..=n_in {
            if rng.below(4) != 0 {
                conn.push((j, i));
            }
        }
    }
    Layer::new(n_in, n_out, &conn).expect("connections drawn in range")
}

pub(super) fn sigmoid() -> Activation {
    builtin_activation("sigmoid").expect("builtin")
}

pub(super) fn sigmoid_layer(rng: &mut Rng, n_in: usize, n_out: usize) -> ParamFn {
    layer_param_fn(&random_layer(rng, n_in, n_out), &sigmoid())
}

fn config(model: ErrorModel) -> Result<DescentConfig> {
    DescentConfig::new(STEP, model)
}

/// Reorders consecutive parameter blocks of the given sizes.
fn shuffle(sizes: Vec<usize>, order: Vec<usize>) -> impl Fn(&[f64]) -> Vec<f64> + Sync {
    move |p| {
        let mut starts = vec![0];
        for s in &sizes {
            starts.push(starts.last().unwrap() + s);
        }
        order.iter().flat_map(|&k| p[starts[k]..starts[k + 1]].iter().copied()).collect()
    }
}

type ParaReparam<'a> = Option<&'a dyn Fn(&[f64]) -> Vec<f64>>;

/// Worst forward/pullback disagreement between `f` at `p` and `g` at `R p`.
fn para_gap(f: &ParamFn, g: &ParamFn, reparam: ParaReparam<'_>, rng: &mut Rng) -> f64 {
    let mut dev: f64 = 0.0;
    for _ in 0..POINTS_PER_CASE {
        let p = sample_vec(rng, f.param_dim(), -1.0, 1.0).into_inner();
        let a = sample_vec(rng, f.in_dim(), -1.0, 1.0).into_inner();
        let w = sample_vec(rng, f.out_dim(), -1.0, 1.0).into_inner();
        let q = reparam.map_or_else(|| p.clone(), |r| r(&p));
        let (gp, ga) = f.pullback(&p, &a, &w);
        let (gq, gb) = g.pullback(&q, &a, &w);
        let gp = reparam.map_or(gp.clone(), |r| r(&gp));
        dev = dev
            .max(max_abs_diff(&f.forward(&p, &a), &g.forward(&q, &a)))
            .max(max_abs_diff(&gp, &gq))
            .max(max_abs_diff(&ga, &gb));
    }
    dev
}

pub(super) fn learn_axioms(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(EXACT);
    let t = Tolerance::absolute(tol);
    let cfg = config(quadratic())?;
    let learner = |rng: &mut Rng, n, m| descend(&cfg, &sigmoid_layer(rng, n, m));
    let sample = SampleBox::default();

    let c = pooled(cases(opts, 11, |rng| {
        let (n, m) = (width(rng), width(rng));
        let l = learner(rng, n, m);
        let left = compose_learn(&identity_learn(n), &l)?;
        let right = compose_learn(&l, &identity_learn(m))?;
        let pts = points(rng, sample);
        Ok(compare_learners(&left, &l, None, t, &pts)?.merge(compare_learners(&right, &l, None, t, &pts)?))
    })?);
    report.push(Check::from_comparison("learn.identity", &c, tol));

    let c = pooled(cases(opts, 12, |rng| {
        let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
        let (l1, l2, l3) = (learner(rng, w[0], w[1]), learner(rng, w[1], w[2]), learner(rng, w[2], w[3]));
        let lhs = compose_learn(&compose_learn(&l1, &l2)?, &l3)?;
        let rhs = compose_learn(&l1, &compose_learn(&l2, &l3)?)?;
        compare_learners(&lhs, &rhs, None, t, &points(rng, sample))
    })?);
    report.push(Check::from_comparison("learn.associativity", &c, tol));

    let c = pooled(cases(opts, 13, |rng| {
        let w: Vec<usize> = (0..6).map(|_| width(rng)).collect();
        let l1 = learner(rng, w[0], w[1]);
        let l2 = learner(rng, w[2], w[3]);
        let l3 = learner(rng, w[1], w[4]);
        let l4 = learner(rng, w[3], w[5]);
        let lhs = compose_learn(&parallel_learn(&l1, &l2), &parallel_learn(&l3, &l4))?;
        let rhs = parallel_learn(&compose_learn(&l1, &l3)?, &compose_learn(&l2, &l4)?);
        let sizes = [&l1, &l2, &l3, &l4].iter().map(|l| l.param_dim()).collect();
        let r = shuffle(sizes, vec![0, 2, 1, 3]);
        compare_learners(&lhs, &rhs, Some(&r), t, &points(rng, sample))
    })?);
    report.push(Check::from_comparison("learn.interchange", &c, tol));

    let c = pooled(cases(opts, 14, |rng| {
        let (n, m) = (rng.below(4), rng.below(4));
        let twice = compose_learn(&braid_learn(n, m), &braid_learn(m, n))?;
        compare_learners(&twice, &identity_learn(n + m), None, t, &points(rng, sample))
    })?);
    report.push(Check::from_comparison("learn.braid_involution", &c, tol));

    let c = pooled(cases(opts, 15, |rng| {
        let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
        let l1 = learner(rng, w[0], w[1]);
        let l2 = learner(rng, w[2], w[3]);
        let lhs = compose_learn(&parallel_learn(&l1, &l2), &braid_learn(w[1], w[3]))?;
        let rhs = compose_learn(&braid_learn(w[0], w[2]), &parallel_learn(&l2, &l1))?;
        let r = shuffle(vec![l1.param_dim(), l2.param_dim()], vec![1, 0]);
        compare_learners(&lhs, &rhs, Some(&r), t, &points(rng, sample))
    })?);
    report.push(Check::from_comparison("learn.braid_naturality", &c, tol));
    Ok(())
}

pub(super) fn para_axioms(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(EXACT);

    let d = worst(cases(opts, 21, |rng| {
        let (n, m) = (width(rng), width(rng));
        let f = sigmoid_layer(rng, n, m);
        let left = compose_para(&identity_para(n), &f)?;
        let right = compose_para(&f, &identity_para(m))?;
        Ok(para_gap(&left, &f, None, rng).max(para_gap(&right, &f, None, rng)))
    })?);
    report.push(Check::new("para.identity", d, tol));

    let d = worst(cases(opts, 22, |rng| {
        let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
        let (f, g, h) = (sigmoid_layer(rng, w[0], w[1]), sigmoid_layer(rng, w[1], w[2]), sigmoid_layer(rng, w[2], w[3]));
        let lhs = compose_para(&compose_para(&f, &g)?, &h)?;
        let rhs = compose_para(&f, &compose_para(&g, &h)?)?;
        Ok(para_gap(&lhs, &rhs, None, rng))
    })?);
    report.push(Check::new("para.associativity", d, tol));

    let d = worst(cases(opts, 23, |rng| {
        let w: Vec<usize> = (0..6).map(|_| width(rng)).collect();
        let f1 = sigmoid_layer(rng, w[0], w[1]);
        let f2 = sigmoid_layer(rng, w[2], w[3]);
        let f3 = sigmoid_layer(rng, w[1], w[4]);
        let f4 = sigmoid_layer(rng, w[3], w[5]);
        let lhs = compose_para(&parallel_para(&f1, &f2), &parallel_para(&f3, &f4))?;
        let rhs = parallel_para(&compose_para(&f1, &f3)?, &compose_para(&f2, &f4)?);
        let r = shuffle([&f1, &f2, &f3, &f4].iter().map(|f| f.param_dim()).collect(), vec![0, 2, 1, 3]);
        Ok(para_gap(&lhs, &rhs, Some(&r), rng))
    })?);
    report.push(Check::new("para.interchange", d, tol));

    let d = worst(cases(opts, 24, |rng| {
        let (n, m) = (rng.below(4), rng.below(4));
        let twice = compose_para(&braid_para(n, m), &braid_para(m, n))?;
        Ok(para_gap(&twice, &identity_para(n + m), None, rng))
    })?);
    report.push(Check::new("para.braid_involution", d, tol));

    let d = worst(cases(opts, 25, |rng| {
        let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
        let f = sigmoid_layer(rng, w[0], w[1]);
        let g = sigmoid_layer(rng, w[2], w[3]);
        let lhs = compose_para(&parallel_para(&f, &g), &braid_para(w[1], w[3]))?;
        let rhs = compose_para(&braid_para(w[0], w[2]), &parallel_para(&g, &f))?;
        let r = shuffle(vec![f.param_dim(), g.param_dim()], vec![1, 0]);
        Ok(para_gap(&lhs, &rhs, Some(&r), rng))
    })?);
    report.push(Check::new("para.braid_naturality", d, tol));
    Ok(())
}

pub(super) fn functoriality(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let chain = opts.tol(CHAIN_RULE);
    let exact = opts.tol(EXACT);
    for (salt, model) in [(31, quadratic()), (32, xy_error())] {
        let cfg = config(model)?;
        let name = cfg.model().name().to_string();

        let c = pooled(cases(opts, salt, |rng| {
            let (n, m, k) = (width(rng), width(rng), width(rng));
            let (f, g) = (sigmoid_layer(rng, n, m), sigmoid_layer(rng, m, k));
            verify_functoriality(&cfg, &f, &g, Tolerance::absolute(chain), &points(rng, SampleBox::default()))
        })?);
        report.push(Check::from_comparison(format!("descent.series.{name}"), &c, chain));

        let c = pooled(cases(opts, salt + 10, |rng| {
            let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
            let (f, g) = (sigmoid_layer(rng, w[0], w[1]), sigmoid_layer(rng, w[2], w[3]));
            verify_monoidality(&cfg, &f, &g, Tolerance::absolute(exact), &points(rng, SampleBox::default()))
        })?);
        report.push(Check::from_comparison(format!("descent.parallel.{name}"), &c, exact));

        let c = pooled(cases(opts, salt + 20, |rng| {
            let n = rng.below(5);
            let l = descend(&cfg, &identity_para(n));
            compare_learners(&l, &identity_learn(n), None, Tolerance::absolute(exact), &points(rng, SampleBox::default()))
        })?);
        report.push(Check::from_comparison(format!("descent.identity.{name}"), &c, exact));
    }

    // a whole network against the composite of its layers' learners
    let cfg = config(quadratic())?;
    let c = pooled(cases(opts, 36, |rng| {
        let mut widths = vec![width(rng)];
        for _ in 0..1 + rng.below(3) {
            widths.push(width(rng));
        }
        let layers: Vec<Layer> = widths.windows(2).map(|w| random_layer(rng, w[0], w[1])).collect();
        let net = Network::new(widths[0], layers.clone())?;
        let whole = descend(&cfg, &implement_network(&net, &sigmoid()));
        let mut parts = descend(&cfg, &layer_param_fn(&layers[0], &sigmoid()));
        for l in &layers[1..] {
            parts = compose_learn(&parts, &descend(&cfg, &layer_param_fn(l, &sigmoid())))?;
        }
        compare_learners(&whole, &parts, None, Tolerance::absolute(chain), &points(rng, SampleBox::default()))
    })?);
    report.push(Check::from_comparison("descent.series.network", &c, chain));
    Ok(())
}

fn compare_on(
    opts: &VerifyOptions,
    salt: u64,
    lhs: &Learner,
    rhs: &Learner,
    tol: f64,
) -> Result<Comparison> {
    let trials = Trials::new(opts.trials, opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)).with_exec(opts.exec);
    compare_learners(lhs, rhs, None, Tolerance::absolute(tol), &trials)
}

fn seq(parts: &[&Learner]) -> Result<Learner> {
    let mut acc = parts[0].clone();
    for l in &parts[1..] {
        acc = compose_learn(&acc, l)?;
    }
    Ok(acc)
}

pub(super) fn bimonoid(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(EXACT);
    let cfg = config(quadratic())?;
    let (m, u, d, c) = (mu(&cfg), eta(&cfg), delta(&cfg), counit(&cfg));

    let rows = cases(opts, 41, |rng| {
        let a = sample_vec(rng, 3, -1.0, 1.0);
        let (a1, a2, a3) = (a[0], a[1], a[2]);
        let r_mu = m.request(&[], &[a1, a2], &[a3])?;
        let r_eta = u.request(&[], &[], &[a1])?;
        let r_counit = c.request(&[], &[a1], &[])?;
        Ok([
            max_abs_diff(&m.implement(&[], &[a1, a2])?, &[cf::i_mu(a1, a2)]),
            max_abs_diff(&r_mu, &cf::r_mu(a1, a2, a3)),
            max_abs_diff(&u.implement(&[], &[])?, &[cf::i_eta()]),
            if r_eta.is_empty() { 0.0 } else { f64::INFINITY },
            max_abs_diff(&d.implement(&[], &[a1])?, &cf::i_delta(a1)),
            max_abs_diff(&d.request(&[], &[a1], &[a2, a3])?, &[cf::r_delta(a1, a2, a3)]),
            if c.implement(&[], &[a1])?.is_empty() { 0.0 } else { f64::INFINITY },
            max_abs_diff(&r_counit, &[cf::r_counit_as_tabulated(a1)]),
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let names = [
        "table.mu.implement",
        "table.mu.request",
        "table.eta.implement",
        "table.eta.request",
        "table.delta.implement",
        "table.delta.request",
        "table.counit.implement",
    ];
    for (k, name) in names.iter().enumerate() {
        report.push(Check::new(*name, col(k), tol));
    }
    report.discrepancy(Discrepancy::new(
        "table.counit.request",
        col(7),
        "the table lists r(a) = 0; the functor gives r(a) = a, which counitality requires",
    ));

    let id1 = identity_learn(1);
    let laws: Vec<(&str, Learner, Learner)> = vec![
        ("mu.associativity", seq(&[&parallel_learn(&m, &id1), &m])?, seq(&[&parallel_learn(&id1, &m), &m])?),
        ("eta.left_unit", seq(&[&parallel_learn(&u, &id1), &m])?, id1.clone()),
        ("eta.right_unit", seq(&[&parallel_learn(&id1, &u), &m])?, id1.clone()),
        ("delta.coassociativity", seq(&[&d, &parallel_learn(&d, &id1)])?, seq(&[&d, &parallel_learn(&id1, &d)])?),
        ("counit.left", seq(&[&d, &parallel_learn(&c, &id1)])?, id1.clone()),
        ("counit.right", seq(&[&d, &parallel_learn(&id1, &c)])?, id1.clone()),
        (
            "bimonoid.mu_delta",
            seq(&[&m, &d])?,
            seq(&[
                &parallel_learn(&d, &d),
                &parallel_learn(&parallel_learn(&id1, &braid_learn(1, 1)), &id1),
                &parallel_learn(&m, &m),
            ])?,
        ),
        ("bimonoid.eta_delta", seq(&[&u, &d])?, parallel_learn(&u, &u)),
        ("bimonoid.mu_counit", seq(&[&m, &c])?, parallel_learn(&c, &c)),
        ("bimonoid.eta_counit", seq(&[&u, &c])?, identity_learn(0)),
    ];
    for (k, (name, lhs, rhs)) in laws.iter().enumerate() {
        let cmp = compare_on(opts, 42 + k as u64, lhs, rhs, tol)?;
        report.push(Check::from_comparison(format!("axiom.{name}"), &cmp, tol));
    }

    let xy = config(xy_error())?;
    let (mx, dx) = (mu(&xy), delta(&xy));
    let rows = cases(opts, 43, |rng| {
        let a = sample_vec(rng, 3, -1.0, 1.0);
        Ok([
            max_abs_diff(&mx.request(&[], &[a[0], a[1]], &[a[2]])?, &cf::r_mu_xy(a[0], a[1], a[2])),
            max_abs_diff(&dx.request(&[], &[a[0]], &[a[1], a[2]])?, &[cf::r_delta_xy(a[0], a[1], a[2])]),
        ])
    })?;
    report.push(Check::new("xy.mu.request", rows.iter().map(|r| r[0]).fold(0.0, f64::max), tol));
    report.push(Check::new("xy.delta.request", rows.iter().map(|r| r[1]).fold(0.0, f64::max), tol));
    Ok(())
}

/// `(w₁, w₂, x, y) ↦ (F(w₁, x), F(w₂, y))` as a trivially parametrised body.
fn two_sites(f: &ParamFn) -> ParamFn {
    let (np, na) = (f.param_dim(), f.in_dim());
    let doubled = parallel_para(f, f).absorb_params();
    // absorbed inputs are (w₁, w₂, x, y) already
    debug_assert_eq!(doubled.in_dim(), 2 * (np + na));
    doubled
}

pub(super) fn neurons(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let chain = opts.tol(CHAIN_RULE);
    let exact = opts.tol(EXACT);
    let cfg = config(quadratic())?;
    for name in ["identity", "sigmoid"] {
        let act = builtin_activation(name)?;
        for n in 1..=4 {
            let neuron = build_neuron(n, &act, &cfg)?;
            let layer = descend(&cfg, &layer_param_fn(&Layer::dense(n, 1), &act));
            let c = compare_on(opts, 50 + n as u64, &neuron, &layer, chain)?;
            report.push(Check::from_comparison(format!("neuron.{name}.{n}"), &c, chain));
        }
    }

    let sig = sigmoid();
    let rows = cases(opts, 55, |rng| {
        let eps = rng.uniform(0.01, 1.0);
        let cfg = DescentConfig::new(eps, quadratic())?;
        let v = sample_vec(rng, 3, -2.0, 2.0);
        let (w, x, y) = (v[0], v[1], v[2]);
        let s = scalar_mult(&cfg).step(&[w], &[x], &[y])?;
        Ok([
            (s.update[0] - cf::u_lambda(eps, w, x, y)).abs(),
            (s.request?[0] - cf::r_lambda(w, x, y)).abs(),
            (bias(&cfg).update(&[w], &[], &[y])?[0] - cf::u_beta(eps, w, y)).abs(),
            (act_learner(&sig, &cfg).request(&[], &[x], &[y])?[0]
                - cf::r_sigma(sig.derivative(x), sig.value(x), x, y))
            .abs(),
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    for (k, name) in ["lambda.update", "lambda.request", "beta.update", "sigma.request"].iter().enumerate() {
        report.push(Check::new(format!("closed_form.{name}"), col(k), exact));
    }

    let grad = opts.tol(GRADIENT);
    let rows = cases(opts, 56, |rng| {
        let (n, m) = (width(rng), width(rng));
        let f = sigmoid_layer(rng, n, m);
        let tied = tie_weights(&two_sites(&f), f.param_dim(), 2)?;
        let p = sample_vec(rng, f.param_dim(), -1.0, 1.0);
        let a = sample_vec(rng, 2 * n, -1.0, 1.0);
        let w = sample_vec(rng, 2 * m, -1.0, 1.0);
        let (g1, _) = f.pullback(&p, &a[..n], &w[..m]);
        let (g2, _) = f.pullback(&p, &a[n..], &w[m..]);
        let summed: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| x + y).collect();
        let (gp, _) = tied.pullback(&p, &a, &w);
        let fd = finite_diff_pullback(|q: &[f64]| tied.forward(q, &a), &p, &w, FD_STEP)?;
        Ok([max_abs_diff(&gp, &summed), max_rel_err(&gp, &fd)])
    })?;
    report.push(Check::new(
        "tie_weights.sum_of_sites",
        rows.iter().map(|r| r[0]).fold(0.0, f64::max),
        exact,
    ));
    report.push(Check::relative(
        "tie_weights.finite_difference",
        rows.iter().map(|r| r[1]).fold(0.0, f64::max),
        grad,
    ));
    Ok(())
}

type Builder = fn(&mut Rng) -> Result<ParamFn>;

/// Every parametrised function the library can build, at random shapes.
pub(crate) fn builtin_param_fns() -> Vec<(&'static str, Builder)> {
    fn act_layer(rng: &mut Rng, name: &str) -> Result<ParamFn> {
        let (n, m) = (width(rng), width(rng));
        Ok(layer_param_fn(&random_layer(rng, n, m), &builtin_activation(name)?))
    }
    vec![
        ("layer.identity", |rng| act_layer(rng, "identity")),
        ("layer.sigmoid", |rng| act_layer(rng, "sigmoid")),
        ("layer.tanh", |rng| act_layer(rng, "tanh")),
        ("network", |rng| {
            let mut widths = vec![width(rng)];
            for _ in 0..rng.below(4) {
                widths.push(width(rng));
            }
            let layers = widths.windows(2).map(|w| random_layer(rng, w[0], w[1])).collect();
            Ok(implement_network(&Network::new(widths[0], layers)?, &sigmoid()))
        }),
        ("identity", |rng| Ok(identity_para(rng.below(5)))),
        ("param_constant", |rng| Ok(param_constant(rng.below(5)))),
        ("braid", |rng| Ok(braid_para(rng.below(4), rng.below(4)))),
        ("scalar_mult", |_| Ok(bimonoid::scalar_mult_para())),
        ("activation.sigmoid", |rng| Ok(bimonoid::activation_para(&sigmoid(), width(rng)))),
        ("activation.tanh", |rng| Ok(bimonoid::activation_para(&builtin_activation("tanh")?, width(rng)))),
        ("linear", |rng| {
            let (r, c) = (rng.below(4), rng.below(4));
            let entries = sample_vec(rng, r * c, -2.0, 2.0).into_inner();
            Ok(bimonoid::linear_para(&LinearMap::new(r, c, entries)?))
        }),
        ("compose", |rng| {
            let (n, m, k) = (width(rng), width(rng), width(rng));
            compose_para(&sigmoid_layer(rng, n, m), &sigmoid_layer(rng, m, k))
        }),
        ("parallel", |rng| {
            let w: Vec<usize> = (0..4).map(|_| width(rng)).collect();
            Ok(parallel_para(&sigmoid_layer(rng, w[0], w[1]), &sigmoid_layer(rng, w[2], w[3])))
        }),
        ("absorb_params", |rng| {
            let (n, m) = (width(rng), width(rng));
            Ok(sigmoid_layer(rng, n, m).absorb_params())
        }),
        ("tie_weights", |rng| {
            let (n, m) = (width(rng), width(rng));
            let f = sigmoid_layer(rng, n, m);
            tie_weights(&two_sites(&f), f.param_dim(), 2)
        }),
    ]
}

pub(super) fn gradients(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(GRADIENT);
    for (k, (name, build)) in builtin_param_fns().into_iter().enumerate() {
        let e = worst(cases(opts, 60 + k as u64, |rng| {
            let f = build(rng)?;
            let p = sample_vec(rng, f.param_dim(), -1.0, 1.0);
            let a = sample_vec(rng, f.in_dim(), -1.0, 1.0);
            let w = sample_vec(rng, f.out_dim(), -1.0, 1.0);
            pullback_error(&f, &p, &a, &w, FD_STEP)
        })?);
        report.push(Check::relative(format!("pullback.{name}"), e, tol));
    }

    for (salt, model, low) in [(90, quadratic(), -1.0), (91, cross_entropy(), 0.0), (92, xy_error(), -1.0)] {
        let cfg = config(model.clone())?;
        let e = worst(cases(opts, salt, |rng| {
            let (n, m) = (width(rng), width(rng));
            let f = sigmoid_layer(rng, n, m);
            let p = sample_vec(rng, f.param_dim(), -1.0, 1.0).into_inner();
            let a = sample_vec(rng, n, low, 1.0).into_inner();
            let b = sample_vec(rng, m, low, 1.0).into_inner();
            let u = descend(&cfg, &f).update(&p, &a, &b)?;
            let grad: Vec<f64> = p.iter().zip(&u).map(|(x, y)| (x - y) / STEP).collect();
            let total = |q: &[f64]| crate::error_models::total_error(&model, &f, q, &a, &b).map(|e| vec![e.value()]);
            // total error at p ± h stays finite: sigmoid outputs never reach 0 or 1 here
            let fd = finite_diff_pullback(|q: &[f64]| total(q).unwrap_or_else(|_| vec![f64::NAN]), &p, &[1.0], FD_STEP)?;
            Ok(max_rel_err(&grad, &fd))
        })?);
        report.push(Check::relative(format!("descent.update_gradient.{}", model.name()), e, tol));
    }
    Ok(())
}
