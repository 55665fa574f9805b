//! Averaged cross entropy on sigmoid networks.
//!
//! Besides functoriality, this suite puts three request formulas side by
//! side: the implemented one (dividing by `α` of the input width), the one
//! dividing by `α` of the output width, and the closed form
//!
//! ```text
//! rᵢ = aᵢ − (|A|/|B|) aᵢ(1 − aᵢ) Σⱼ (Iⱼ − bⱼ) / (Iⱼ(1 − Iⱼ)) ∂Iⱼ/∂aᵢ
//! ```
//!
//! together with the textbook update `p − ε Σⱼ (Iⱼ − bⱼ)/(Iⱼ(1 − Iⱼ)) ∂Iⱼ/∂p`.

use serde_json::json;

use crate::descent::{descend, verify_functoriality, DescentConfig, RequestScaling};
use crate::error::Result;
use crate::error_models::cross_entropy;
use crate::learn::SampleBox;
use crate::numeric::{max_abs_diff, max_rel_err, sample_vec, Rng, Tolerance};
use crate::para::{compose_para, ParamFn};

use super::suites::{cases, points, pooled, sigmoid_layer, width, CHAIN_RULE, STEP};
use super::{Check, Discrepancy, Report, VerifyOptions};

/// Jacobian rows `∂Iⱼ/∂p` and `∂Iⱼ/∂a`, one pullback per output.
fn jacobian(f: &ParamFn, p: &[f64], a: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..f.out_dim())
        .map(|j| {
            let mut e = vec![0.0; f.out_dim()];
            e[j] = 1.0;
            f.pullback(p, a, &e)
        })
        .collect()
}

/// `Σⱼ (Iⱼ − bⱼ)/(Iⱼ(1 − Iⱼ)) ∂Iⱼ/∂·` in the parameter and input slots.
fn weighted_jacobian(f: &ParamFn, p: &[f64], a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let out = f.forward(p, a);
    let mut gp = vec![0.0; p.len()];
    let mut ga = vec![0.0; a.len()];
    for (j, (jp, ja)) in jacobian(f, p, a).into_iter().enumerate() {
        let z = out[j];
        let k = (z - b[j]) / (z * (1.0 - z));
        gp.iter_mut().zip(&jp).for_each(|(g, d)| *g += k * d);
        ga.iter_mut().zip(&ja).for_each(|(g, d)| *g += k * d);
    }
    (gp, ga)
}

pub fn displayed_request(f: &ParamFn, p: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ratio = a.len() as f64 / b.len() as f64;
    let (_, ga) = weighted_jacobian(f, p, a, b);
    a.iter().zip(&ga).map(|(&ai, g)| ai - ratio * ai * (1.0 - ai) * g).collect()
}

pub fn displayed_update(eps: f64, f: &ParamFn, p: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let (gp, _) = weighted_jacobian(f, p, a, b);
    p.iter().zip(&gp).map(|(pk, g)| pk - eps * g).collect()
}

struct Net {
    f: ParamFn,
    p: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn draw_net(rng: &mut Rng) -> Result<Net> {
    let (n, h, m) = (width(rng), width(rng), width(rng));
    let f = compose_para(&sigmoid_layer(rng, n, h), &sigmoid_layer(rng, h, m))?;
    let p = sample_vec(rng, f.param_dim(), -1.0, 1.0).into_inner();
    let a = sample_vec(rng, n, 0.0, 1.0).into_inner();
    let b = sample_vec(rng, m, 0.0, 1.0).into_inner();
    Ok(Net { f, p, a, b })
}

/// Componentwise `(a − r₁)/(a − r₂)`, skipping negligible denominators.
fn correction_ratios(a: &[f64], r1: &[f64], r2: &[f64]) -> Vec<Option<f64>> {
    a.iter()
        .zip(r1.iter().zip(r2))
        .map(|(ai, (x, y))| {
            let den = ai - y;
            (den.abs() > 1e-6).then(|| (ai - x) / den)
        })
        .collect()
}

pub(super) fn suite(opts: &VerifyOptions, report: &mut Report) -> Result<()> {
    let tol = opts.tol(CHAIN_RULE);
    let domain = DescentConfig::new(STEP, cross_entropy())?;
    let codomain = domain.clone().with_scaling(RequestScaling::Codomain);
    let sample = SampleBox::unit_interval();

    let series = |cfg: &DescentConfig, salt| -> Result<_> {
        Ok(pooled(cases(opts, salt, |rng| {
            let (n, m, k) = (width(rng), width(rng), width(rng));
            let (f, g) = (sigmoid_layer(rng, n, m), sigmoid_layer(rng, m, k));
            verify_functoriality(cfg, &f, &g, Tolerance::absolute(tol), &points(rng, sample))
        })?))
    };
    report.push(Check::from_comparison("series.domain_scaling", &series(&domain, 80)?, tol));
    let cod = series(&codomain, 80)?;
    report.discrepancy(Discrepancy::new(
        "series.codomain_scaling",
        cod.deviation.max(),
        "normalising requests by alpha of the output width breaks series functoriality when widths differ",
    ));

    let rows = cases(opts, 81, |rng| {
        let net = draw_net(rng)?;
        let (f, p, a, b) = (&net.f, &net.p, &net.a, &net.b);
        let r_dom = descend(&domain, f).request(p, a, b)?;
        let r_cod = descend(&codomain, f).request(p, a, b)?;
        let u = descend(&domain, f).update(p, a, b)?;
        let shown_r = displayed_request(f, p, a, b);
        let shown_u = displayed_update(STEP, f, p, a, b);
        let expected = a.len() as f64 / b.len() as f64;
        let ratios: Vec<f64> = correction_ratios(a, &r_dom, &r_cod).into_iter().flatten().collect();
        let update_ratios: Vec<f64> = correction_ratios(p, &u, &shown_u).into_iter().flatten().collect();
        Ok([
            max_abs_diff(&r_dom, &shown_r),
            max_rel_err(&ratios, &vec![expected; ratios.len()]),
            max_abs_diff(&r_cod, &shown_r),
            max_abs_diff(&u, &shown_u),
            max_rel_err(&update_ratios, &vec![-1.0 / b.len() as f64; update_ratios.len()]),
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    report.push(Check::new("request.matches_closed_form", col(0), tol));
    report.push(Check::relative("request.correction_ratio_is_in_over_out_width", col(1), tol));
    report.discrepancy(Discrepancy::new(
        "request.codomain_scaling_vs_closed_form",
        col(2),
        "output-width normalisation drops the |A|/|B| factor of the closed form",
    ));
    report.push(Check::relative("update.ratio_to_closed_form_is_minus_inverse_out_width", col(4), tol));
    report.discrepancy(Discrepancy::new(
        "update.closed_form",
        col(3),
        "the closed-form update neither averages over outputs nor matches the sign of e(x, y) = y ln x + (1 - y) ln(1 - x); \
         its step is -|B| times the implemented one",
    ));

    // one network printed in full
    let mut rng = Rng::new(opts.seed ^ 0x5eed_ce11);
    let net = draw_net(&mut rng)?;
    let (f, p, a, b) = (&net.f, &net.p, &net.a, &net.b);
    let r_dom = descend(&domain, f).request(p, a, b)?;
    let r_cod = descend(&codomain, f).request(p, a, b)?;
    report.details = json!({
        "in_width": a.len(),
        "out_width": b.len(),
        "in_over_out_width": a.len() as f64 / b.len() as f64,
        "input": a,
        "target": b,
        "request_domain_scaling": r_dom,
        "request_codomain_scaling": r_cod,
        "request_closed_form": displayed_request(f, p, a, b),
        "correction_ratio_domain_over_codomain": correction_ratios(a, &r_dom, &r_cod),
    });
    Ok(())
}
