//! Turns a validated `RunConfig` into an actual iteration: resolves the
//! penalty, builds the per-iteration approximate operator from the schedule,
//! locates the exact fixed point, runs the loop, and collects every derived
//! constant for the manifest.

use iprox::algorithms::{
    self, contraction_factor, fixed_point_solve, optimal_tau, AlgoError, Order, SmoothTerm,
    SplitKind, Trace,
};
use iprox::approx::{
    lipschitz_pair, sigma_bound, ApproxError, ApproxKind, ApproxOperator, Constants, ErrorPolicy,
    PsiFamily, Selector, SlackPolicy,
};
use iprox::hjprox::HJConfig;
use iprox::penalties::Penalty;
use iprox::Schedule;
use serde::Serialize;

use crate::config::{build_penalty, build_schedule, order, split_kind, RunConfig};

#[derive(Debug, Serialize)]
pub struct DerivedConstants {
    pub l_psi: f64,
    pub rho: f64,
    pub lambda: f64,
    pub tau: f64,
    pub mu: Option<f64>,
    pub l_f: Option<f64>,
    pub l_g: f64,
    pub gamma_g: f64,
    pub sigma: f64,
    pub l_composite: f64,
    pub ball_radius: Option<f64>,
    pub target: Vec<f64>,
}

pub struct RunResult {
    pub trace: Trace,
    pub derived: DerivedConstants,
}

fn fail(msg: impl Into<String>) -> String {
    msg.into()
}

/// Approximate operator at error level `eps`, with the adversarial anchor
/// (where applicable) pointed at the exact fixed point.
fn build_operator(
    cfg: &RunConfig,
    p: &Penalty,
    lambda: f64,
    eps: f64,
    anchor: &[f64],
) -> Result<ApproxOperator, ApproxError> {
    let seed = cfg.approx.seed;
    let policy = cfg.approx.policy.as_str();
    let err_policy = || {
        if policy == "random" {
            ErrorPolicy::RandomSphere
        } else {
            ErrorPolicy::Adversarial { anchor: anchor.to_vec() }
        }
    };
    match cfg.approx.kind.as_str() {
        "exact" => ApproxOperator::exact(p.clone(), lambda),
        "a" => ApproxOperator::type_a(p.clone(), lambda, eps, err_policy(), seed),
        "b" => ApproxOperator::type_b(p.clone(), lambda, eps, err_policy(), seed),
        "c" => {
            let sp = if policy == "boundary" { SlackPolicy::Boundary } else { SlackPolicy::Center };
            ApproxOperator::type_c(p.clone(), lambda, eps, sp, seed)
        }
        "d" => {
            let family = if policy == "shrink" {
                PsiFamily::Shrink { n: cfg.approx.shrink_n }
            } else {
                let mut e = vec![0.0; p.dim];
                e[0] = eps;
                PsiFamily::GaussianBump { e }
            };
            ApproxOperator::type_d(p.clone(), lambda, eps, family, cfg.approx.k_bound, seed)
        }
        "e" => {
            let sel = match policy {
                "steiner" => Selector::Steiner,
                "boundary" => Selector::Boundary,
                _ => Selector::Center,
            };
            ApproxOperator::type_e(p.clone(), lambda, eps, sel, seed)
        }
        "f" => ApproxOperator::type_f(
            p.clone(),
            HJConfig { lambda, eps: eps.max(1e-12), samples: cfg.approx.samples, seed },
        ),
        other => Err(ApproxError::Unsupported(
            ApproxKind::A,
            format!("unknown kind `{other}` reached the runner"),
        )),
    }
}

/// Per-step error-envelope increment matching the displayed limit-ball
/// numerators (g-first uses gamma + sigma(eps); f-first uses gamma + eps).
fn err_increment(
    kind: Option<(SplitKind, Order)>,
    a_kind: ApproxKind,
    eps: f64,
    c: &Constants,
    l_r: f64,
) -> f64 {
    let sigma = sigma_bound(a_kind, eps, c).unwrap_or(0.0);
    let gamma = lipschitz_pair(a_kind, eps, c).map(|p| p.gamma).unwrap_or(0.0);
    match kind {
        None | Some((SplitKind::FB, _)) => gamma + sigma,
        Some((SplitKind::PR, Order::GFirst)) => 2.0 * (gamma + sigma),
        Some((SplitKind::PR, Order::FFirst)) => 2.0 * l_r * (gamma + eps),
        Some((SplitKind::DR, Order::GFirst)) => gamma + sigma,
        Some((SplitKind::DR, Order::FFirst)) => l_r * (gamma + eps),
    }
}

pub fn execute(cfg: &RunConfig, seed_override: Option<u64>) -> Result<RunResult, String> {
    let mut cfg = cfg.clone();
    if let Some(s) = seed_override {
        cfg.approx.seed = s;
    }
    let p = build_penalty(&cfg.penalty).map_err(fail)?;
    let sched: Schedule = build_schedule(&cfg.schedule);
    let lambda = cfg.algorithm.lambda;
    let a_kind = ApproxKind::from_name(&cfg.approx.kind);
    let eps0 = if cfg.approx.kind == "exact" { 0.0 } else { sched.eps(0).max(cfg.approx.eps) };
    // Per-step prox parameter: lambda for the proximal point method, tau for
    // the splitting compositions; the quality/regularity constants follow it.
    let row = |consts: &Constants| -> Result<(iprox::LipschitzPair, f64), String> {
        let pair = match a_kind {
            Some(k) => lipschitz_pair(k, eps0, consts).map_err(|e| e.to_string())?,
            None => lipschitz_pair(ApproxKind::A, 0.0, consts).map_err(|e| e.to_string())?,
        };
        let sigma = match a_kind {
            Some(k) => sigma_bound(k, eps0, consts).map_err(|e| e.to_string())?,
            None => 0.0,
        };
        Ok((pair, sigma))
    };

    let eps_at = |k: usize| -> f64 {
        if cfg.approx.kind == "exact" {
            0.0
        } else {
            sched.eps(k).max(0.0)
        }
    };

    match cfg.algorithm.kind.as_str() {
        "ppa" => {
            let consts = Constants::for_penalty(&p, lambda);
            let (pair, sigma0) = row(&consts)?;
            let exact = ApproxOperator::exact(p.clone(), lambda).map_err(|e| e.to_string())?;
            // Exact PPA fixed points are the penalty minimizers; solve for one.
            let target = fixed_point_solve(&|x| Ok(exact.evaluate(x)?), &cfg.algorithm.x0, 1e-12)
                .map_err(|e| fail(format!("exact fixed point: {e:?}")))?;
            let l_g = pair.l;
            let err = |k: usize| match a_kind {
                Some(ak) => err_increment(None, ak, eps_at(k), &consts, 0.0),
                None => 0.0,
            };
            let trace = algorithms::proximal_point_run(
                &|k| build_operator(&cfg, &p, lambda, eps_at(k), &target),
                &cfg.algorithm.x0,
                cfg.algorithm.iterations,
                &target,
                l_g,
                &err,
            )
            .map_err(|e| fail(format!("iteration: {e:?}")))?;
            let radius = if l_g < 1.0 && !sched.is_vanishing() {
                Some((pair.gamma + sigma0) / (1.0 - l_g))
            } else {
                None
            };
            Ok(RunResult {
                trace,
                derived: DerivedConstants {
                    l_psi: consts.l_psi,
                    rho: consts.rho,
                    lambda,
                    tau: lambda,
                    mu: None,
                    l_f: None,
                    l_g,
                    gamma_g: pair.gamma,
                    sigma: sigma0,
                    l_composite: l_g,
                    ball_radius: radius,
                    target,
                },
            })
        }
        alg => {
            let kind = split_kind(alg).ok_or_else(|| fail(format!("unknown algorithm `{alg}`")))?;
            let ord = order(&cfg.algorithm.order);
            let diag = cfg.algorithm.f_diag.clone();
            let center = cfg.algorithm.f_center.clone();
            if diag.len() != p.dim || center.len() != p.dim {
                return Err(fail(format!(
                    "smooth term dimension {} does not match penalty dimension {}",
                    diag.len(),
                    p.dim
                )));
            }
            let mu = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            let l_f = diag.iter().cloned().fold(0.0, f64::max);
            let tau =
                if cfg.algorithm.tau > 0.0 { cfg.algorithm.tau } else { optimal_tau(kind, mu, l_f) };
            let consts = Constants::for_penalty(&p, tau);
            let (pair, sigma0) = row(&consts)?;
            let f = SmoothTerm::quadratic_diag(diag, center);
            let l_r = algorithms::l_r(mu, l_f, tau);
            let l_comp = contraction_factor(kind, pair.l, mu, l_f, tau)
                .map_err(|e| fail(format!("{e:?}")))?;

            let compose = |g: ApproxOperator| match kind {
                SplitKind::FB => algorithms::fb_operator(g, f.clone(), tau),
                SplitKind::PR => algorithms::pr_operator(g, f.clone(), tau, ord),
                SplitKind::DR => algorithms::dr_operator(g, f.clone(), tau, ord),
            };
            let exact_op = compose(ApproxOperator::exact(p.clone(), tau).map_err(|e| e.to_string())?);
            let target = fixed_point_solve(&|x| exact_op.apply(x), &cfg.algorithm.x0, 1e-12)
                .map_err(|e| fail(format!("exact fixed point: {e:?}")))?;

            let err = |k: usize| match a_kind {
                Some(ak) => err_increment(Some((kind, ord)), ak, eps_at(k), &consts, l_r),
                None => 0.0,
            };
            let trace = algorithms::run_splitting(
                &|k| {
                    let g = build_operator(&cfg, &p, tau, eps_at(k), &target)
                        .map_err(|e| AlgoError::InvalidParameter(e.to_string()))?;
                    Ok(compose(g))
                },
                &cfg.algorithm.x0,
                cfg.algorithm.iterations,
                &target,
                l_comp,
                &err,
            )
            .map_err(|e| fail(format!("iteration: {e:?}")))?;

            let radius = if !sched.is_vanishing() {
                algorithms::ball_radius(kind, ord, l_comp, pair.gamma, sigma0, eps0, l_r).ok()
            } else {
                None
            };
            Ok(RunResult {
                trace,
                derived: DerivedConstants {
                    l_psi: consts.l_psi,
                    rho: consts.rho,
                    lambda: tau,
                    tau,
                    mu: Some(mu),
                    l_f: Some(l_f),
                    l_g: pair.l,
                    gamma_g: pair.gamma,
                    sigma: sigma0,
                    l_composite: l_comp,
                    ball_radius: radius,
                    target,
                },
            })
        }
    }
}
