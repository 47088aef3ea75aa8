//! Fixed-point iterations with inexact proximal steps: plain proximal
//! point, the inertial Krasnosel'skii-Mann scheme, and forward-backward /
//! Peaceman-Rachford / Douglas-Rachford compositions, together with their
//! contraction factors, predicted limit-ball radii, and local diagnostics.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{ApproxError, ApproxOperator};
use crate::linalg::{add, axpy, dist, is_finite, norm, scale, sub};
use crate::penalties::PenaltyError;

#[derive(Debug, Error)]
pub enum AlgoError {
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error("non-finite iterate at step {0}")]
    NonFinite(usize),
    #[error("iterate norm exceeded 1e9 at step {0}")]
    Diverged(usize),
    #[error("no contraction: composite factor {0} >= 1")]
    NoContraction(f64),
    #[error("fixed-point budget exhausted; best residual {0}")]
    BudgetExhausted(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A smooth strongly convex term with its gradient and resolvent.
#[derive(Clone)]
pub struct SmoothTerm {
    pub mu: f64,
    pub l_f: f64,
    grad: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// `prox_{tau f}`: first argument is tau.
    prox: Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>,
}

impl SmoothTerm {
    /// Separable quadratic `f(x) = 1/2 sum q_i (x_i - c_i)^2`.
    pub fn quadratic_diag(q: Vec<f64>, c: Vec<f64>) -> Self {
        assert_eq!(q.len(), c.len());
        assert!(q.iter().all(|t| *t > 0.0), "quadratic weights must be positive");
        let mu = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let l_f = q.iter().cloned().fold(0.0f64, f64::max);
        let (qg, cg) = (q.clone(), c.clone());
        let grad = move |x: &[f64]| -> Vec<f64> {
            x.iter().zip(&qg).zip(&cg).map(|((t, qi), ci)| qi * (t - ci)).collect()
        };
        let prox = move |tau: f64, y: &[f64]| -> Vec<f64> {
            y.iter()
                .zip(&q)
                .zip(&c)
                .map(|((t, qi), ci)| (t + tau * qi * ci) / (1.0 + tau * qi))
                .collect()
        };
        SmoothTerm { mu, l_f, grad: Arc::new(grad), prox: Arc::new(prox) }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    pub fn prox(&self, tau: f64, y: &[f64]) -> Vec<f64> {
        (self.prox)(tau, y)
    }
}

/// An instrumented operator closure; `evals` counts applications.
#[derive(Clone)]
pub struct Operator {
    f: Arc<dyn Fn(&[f64]) -> Result<Vec<f64>, AlgoError> + Send + Sync>,
    evals: Arc<AtomicUsize>,
}

impl Operator {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, AlgoError> + Send + Sync + 'static,
    {
        Operator { f: Arc::new(f), evals: Arc::new(AtomicUsize::new(0)) }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, AlgoError> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        (self.f)(x)
    }

    pub fn eval_count(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    FB,
    PR,
    DR,
}

impl SplitKind {
    pub fn name(&self) -> &'static str {
        match self {
            SplitKind::FB => "fb",
            SplitKind::PR => "pr",
            SplitKind::DR => "dr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    GFirst,
    FFirst,
}

impl Order {
    pub fn name(&self) -> &'static str {
        match self {
            Order::GFirst => "g_first",
            Order::FFirst => "f_first",
        }
    }
}

/// `T = g(Id - tau grad f)`.
pub fn fb_operator(g: ApproxOperator, f: SmoothTerm, tau: f64) -> Operator {
    Operator::new(move |x: &[f64]| Ok(g.evaluate(&axpy(x, -tau, &f.grad(x)))?))
}

fn reflect(y: &[f64], x: &[f64]) -> Vec<f64> {
    sub(&scale(y, 2.0), x)
}

/// `(2g - Id)(2 prox_{tau f} - Id)` when the g reflection is applied last
/// (`GFirst` names which reflection carries the approximation error bound),
/// and the reverse composition for `FFirst`.
pub fn pr_operator(g: ApproxOperator, f: SmoothTerm, tau: f64, order: Order) -> Operator {
    Operator::new(move |x: &[f64]| {
        Ok(match order {
            Order::GFirst => {
                let a = reflect(&f.prox(tau, x), x);
                reflect(&g.evaluate(&a)?, &a)
            }
            Order::FFirst => {
                let a = reflect(&g.evaluate(x)?, x);
                reflect(&f.prox(tau, &a), &a)
            }
        })
    })
}

/// `(Id + T_PR)/2`.
pub fn dr_operator(g: ApproxOperator, f: SmoothTerm, tau: f64, order: Order) -> Operator {
    let pr = pr_operator(g, f, tau, order);
    Operator::new(move |x: &[f64]| Ok(scale(&add(x, &pr.apply(x)?), 0.5)))
}

/// Gradient-step contraction factor of `Id - tau grad f`.
pub fn l_gm(mu: f64, l_f: f64, tau: f64) -> f64 {
    (1.0 - tau * mu).abs().max((1.0 - tau * l_f).abs())
}

/// Reflected-resolvent contraction factor of `2 prox_{tau f} - Id`.
pub fn l_r(mu: f64, l_f: f64, tau: f64) -> f64 {
    ((1.0 - tau * mu) / (1.0 + tau * mu)).max((tau * l_f - 1.0) / (tau * l_f + 1.0))
}

pub fn optimal_tau(kind: SplitKind, mu: f64, l_f: f64) -> f64 {
    match kind {
        SplitKind::FB => 2.0 / (mu + l_f),
        SplitKind::PR | SplitKind::DR => 1.0 / (mu * l_f).sqrt(),
    }
}

/// Composite contraction factor of the splitting operator.
pub fn contraction_factor(
    kind: SplitKind,
    l_g: f64,
    mu: f64,
    l_f: f64,
    tau: f64,
) -> Result<f64, AlgoError> {
    if tau <= 0.0 {
        return Err(AlgoError::InvalidParameter(format!("tau {tau} must be positive")));
    }
    if mu > l_f {
        return Err(AlgoError::InvalidParameter(format!("mu {mu} exceeds L_f {l_f}")));
    }
    Ok(match kind {
        SplitKind::FB => l_g * l_gm(mu, l_f, tau),
        SplitKind::PR => (2.0 * l_g + 1.0) * l_r(mu, l_f, tau),
        SplitKind::DR => (l_g + 0.5) * l_r(mu, l_f, tau) + 0.5,
    })
}

/// Predicted limit-ball radius around the exact fixed point. The f-first
/// orders use the raw eps in place of sigma(eps), matching the displayed
/// radii for those compositions.
pub fn ball_radius(
    kind: SplitKind,
    order: Order,
    l_composite: f64,
    gamma: f64,
    sigma: f64,
    eps: f64,
    l_r: f64,
) -> Result<f64, AlgoError> {
    if l_composite >= 1.0 {
        return Err(AlgoError::NoContraction(l_composite));
    }
    let d = 1.0 - l_composite;
    Ok(match (kind, order) {
        (SplitKind::FB, _) => (gamma + sigma) / d,
        (SplitKind::PR, Order::GFirst) => 2.0 * (gamma + sigma) / d,
        (SplitKind::PR, Order::FFirst) => 2.0 * l_r * (gamma + eps) / d,
        (SplitKind::DR, Order::GFirst) => (gamma + sigma) / d,
        (SplitKind::DR, Order::FFirst) => l_r * (gamma + eps) / d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub iterates: Vec<Vec<f64>>,
    pub dist_to_target: Vec<f64>,
    pub residuals: Vec<f64>,
    pub bound_envelope: Vec<f64>,
}

impl Trace {
    /// Max distance over the last 20% of iterations.
    pub fn tail_max_dist(&self) -> f64 {
        let n = self.dist_to_target.len();
        let start = n - (n / 5).max(1);
        self.dist_to_target[start..].iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_dist(&self) -> f64 {
        *self.dist_to_target.last().unwrap_or(&f64::NAN)
    }
}

fn guard(x: &[f64], k: usize) -> Result<(), AlgoError> {
    if !is_finite(x) {
        return Err(AlgoError::NonFinite(k));
    }
    if norm(x) > 1e9 {
        return Err(AlgoError::Diverged(k));
    }
    Ok(())
}

/// Generic driver `x_{k+1} = op(k, x_k)` with the proof-side error envelope
/// `L^{k+1} ||x_0 - x*|| + sum_j err_{k-j} L^j` recorded alongside.
pub fn run_iteration(
    op: &dyn Fn(usize, &[f64]) -> Result<Vec<f64>, AlgoError>,
    x0: &[f64],
    iters: usize,
    target: &[f64],
    l_op: f64,
    err_at: &dyn Fn(usize) -> f64,
) -> Result<Trace, AlgoError> {
    let mut x = x0.to_vec();
    let d0 = dist(x0, target);
    let mut iterates = vec![x.clone()];
    let mut dist_to_target = vec![d0];
    let mut residuals = Vec::with_capacity(iters);
    let mut bound_envelope = vec![d0];
    // envelope recursion: env_{k+1} = L * env_k + err_k
    let mut env = d0;
    for k in 0..iters {
        let next = op(k, &x)?;
        guard(&next, k)?;
        residuals.push(dist(&next, &x));
        env = l_op * env + err_at(k);
        bound_envelope.push(env);
        dist_to_target.push(dist(&next, target));
        iterates.push(next.clone());
        x = next;
    }
    Ok(Trace { iterates, dist_to_target, residuals, bound_envelope })
}

/// Inexact proximal point `x_{k+1} = g_k(x_k)` with per-iteration operators
/// supplied by the factory.
pub fn proximal_point_run(
    g_at: &dyn Fn(usize) -> Result<ApproxOperator, ApproxError>,
    x0: &[f64],
    iters: usize,
    target: &[f64],
    l_g: f64,
    err_at: &dyn Fn(usize) -> f64,
) -> Result<Trace, AlgoError> {
    run_iteration(&|k, x| Ok(g_at(k)?.evaluate(x)?), x0, iters, target, l_g, err_at)
}

/// Splitting iteration `x_{k+1} = T_k(x_k)` with per-iteration composites.
pub fn run_splitting(
    op_at: &dyn Fn(usize) -> Result<Operator, AlgoError>,
    x0: &[f64],
    iters: usize,
    target: &[f64],
    l_op: f64,
    err_at: &dyn Fn(usize) -> f64,
) -> Result<Trace, AlgoError> {
    run_iteration(&|k, x| op_at(k)?.apply(x), x0, iters, target, l_op, err_at)
}

/// Parameter sequences for the inertial Krasnosel'skii-Mann scheme, indexed
/// k = 0..K.
#[derive(Debug, Clone, PartialEq)]
pub struct KMParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub eps_seq: Vec<Vec<f64>>,
    pub rho_seq: Vec<Vec<f64>>,
    pub theta_seq: Vec<Vec<f64>>,
}

impl KMParams {
    /// Plain KM: no inertia, constant relaxation, zero errors.
    pub fn plain(lambda: f64, horizon: usize, dim: usize) -> Self {
        KMParams {
            alpha: vec![0.0; horizon],
            beta: vec![0.0; horizon],
            lambda: vec![lambda; horizon],
            eps_seq: vec![vec![0.0; dim]; horizon],
            rho_seq: vec![vec![0.0; dim]; horizon],
            theta_seq: vec![vec![0.0; dim]; horizon],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMReport {
    pub valid: bool,
    pub violations: Vec<String>,
    /// The compatibility supremum over the horizon.
    pub compatibility_sup: f64,
}

/// Evaluate every clause of the parameter assumption over the horizon.
pub fn validate_km_params(p: &KMParams, horizon: usize) -> KMReport {
    let k = horizon.min(p.alpha.len()).min(p.beta.len()).min(p.lambda.len());
    let mut violations = Vec::new();
    if k == 0 {
        violations.push("empty parameter sequences".to_string());
        return KMReport { valid: false, violations, compatibility_sup: f64::NEG_INFINITY };
    }
    let a_max = p.alpha[..k].iter().cloned().fold(0.0f64, f64::max);
    let b_max = p.beta[..k].iter().cloned().fold(0.0f64, f64::max);
    if p.alpha[..k].iter().any(|t| *t < 0.0) || a_max >= 1.0 {
        violations.push(format!("alpha_k must lie in [0, A] with A < 1; max is {a_max}"));
    }
    if p.beta[..k].iter().any(|t| *t < 0.0) || b_max > 1.0 {
        violations.push(format!("beta_k must lie in [0, 1]; max is {b_max}"));
    }
    let l_min = p.lambda[..k].iter().cloned().fold(f64::INFINITY, f64::min);
    let l_max = p.lambda[..k].iter().cloned().fold(0.0f64, f64::max);
    if l_min <= 0.0 || l_max >= 1.0 {
        violations.push(format!("lambda_k must lie in [l, L] inside (0,1); range is [{l_min}, {l_max}]"));
    }
    // mu_k = (1 - lambda_k) alpha_k + lambda_k beta_k nondecreasing
    let mu: Vec<f64> = (0..k)
        .map(|i| (1.0 - p.lambda[i]) * p.alpha[i] + p.lambda[i] * p.beta[i])
        .collect();
    if mu.windows(2).any(|w| w[1] < w[0] - 1e-15) {
        violations.push("mu_k = (1-lambda_k)alpha_k + lambda_k beta_k must be nondecreasing".to_string());
    }
    // compatibility supremum over k >= 1
    let mut sup = f64::NEG_INFINITY;
    for i in 1..k {
        let (al, be, la) = (p.alpha[i], p.beta[i], p.lambda[i]);
        let term = (1.0 - la) * al * (1.0 + al) + la * be * (1.0 + be)
            + (1.0 / la - 1.0) * al * (1.0 - al)
            - (1.0 / p.lambda[i - 1] - 1.0) * (1.0 - p.alpha[i - 1]);
        sup = sup.max(term);
    }
    // The compatibility supremum is reported, not gated on: its displayed
    // sign convention rejects even the plain (alpha = beta = 0) scheme,
    // which provably converges, so validity rests on the interval clauses.
    KMReport { valid: violations.is_empty(), violations, compatibility_sup: sup }
}

/// The inertial KM scheme:
/// `y_k = x_k + alpha_k (x_k - x_{k-1}) + eps_k`,
/// `z_k = x_k + beta_k (x_k - x_{k-1}) + rho_k`,
/// `x_{k+1} = (1 - lambda_k) y_k + lambda_k T(z_k) + theta_k`.
pub fn km_run(
    t: &Operator,
    p: &KMParams,
    x0: &[f64],
    iters: usize,
    target: &[f64],
) -> Result<Trace, AlgoError> {
    let k_max = iters.min(p.alpha.len());
    let mut x_prev = x0.to_vec();
    let mut x = x0.to_vec();
    let d0 = dist(x0, target);
    let mut iterates = vec![x.clone()];
    let mut dist_to_target = vec![d0];
    let mut residuals = Vec::new();
    for k in 0..k_max {
        let diff = sub(&x, &x_prev);
        let y = add(&axpy(&x, p.alpha[k], &diff), &p.eps_seq[k]);
        let z = add(&axpy(&x, p.beta[k], &diff), &p.rho_seq[k]);
        let tz = t.apply(&z)?;
        let mut next = axpy(&scale(&y, 1.0 - p.lambda[k]), p.lambda[k], &tz);
        next = add(&next, &p.theta_seq[k]);
        guard(&next, k)?;
        residuals.push(dist(&next, &x));
        dist_to_target.push(dist(&next, target));
        iterates.push(next.clone());
        x_prev = x;
        x = next;
    }
    let n = iterates.len();
    Ok(Trace { iterates, dist_to_target, residuals, bound_envelope: vec![f64::NAN; n] })
}

/// Damped fixed-point iteration `x <- (1-theta) x + theta op(x)`; theta
/// starts at 1 and halves whenever the residual increases (floor 1/64).
pub fn fixed_point_solve(
    op: &dyn Fn(&[f64]) -> Result<Vec<f64>, AlgoError>,
    x0: &[f64],
    tol: f64,
) -> Result<Vec<f64>, AlgoError> {
    let budget = 20_000usize;
    let mut x = x0.to_vec();
    let mut theta = 1.0f64;
    let mut prev_res = f64::INFINITY;
    let mut best_res = f64::INFINITY;
    for k in 0..budget {
        let fx = op(&x)?;
        guard(&fx, k)?;
        let res = dist(&fx, &x);
        if res <= tol {
            return Ok(x);
        }
        if res > prev_res {
            theta = (theta * 0.5).max(1.0 / 64.0);
        }
        prev_res = res;
        best_res = best_res.min(res);
        x = axpy(&scale(&x, 1.0 - theta), theta, &fx);
        guard(&x, k)?;
    }
    Err(AlgoError::BudgetExhausted(best_res))
}

fn jacobian(
    op: &dyn Fn(&[f64]) -> Result<Vec<f64>, AlgoError>,
    x: &[f64],
    h: f64,
) -> Result<Vec<Vec<f64>>, AlgoError> {
    let n = x.len();
    let mut j = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[col] += h;
        xm[col] -= h;
        let fp = op(&xp)?;
        let fm = op(&xm)?;
        if !is_finite(&fp) || !is_finite(&fm) {
            return Err(AlgoError::NonFinite(0));
        }
        for row in 0..n {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn cubic_roots_moduli(c2: f64, c1: f64, c0: f64) -> [f64; 3] {
    // roots of t^3 - c2 t^2 + c1 t - c0
    let s = c2 / 3.0;
    let p = c1 - 3.0 * s * s;
    let q = -2.0 * s * s * s + c1 * s - c0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc >= 0.0 {
        // three real roots, trigonometric form
        if p.abs() < 1e-300 {
            let r = s;
            return [r.abs(), r.abs(), r.abs()];
        }
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (m * (theta - 2.0 * std::f64::consts::PI * i as f64 / 3.0).cos() + s).abs();
        }
        out
    } else {
        // one real root; complex pair modulus from the deflated quadratic
        let half = -q / 2.0;
        let rad = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let t = (half + rad).cbrt() + (half - rad).cbrt();
        let r = t + s;
        let b = r - c2;
        let c = c1 + r * b;
        [r.abs(), c.max(0.0).sqrt(), c.max(0.0).sqrt()]
    }
}

/// Spectral radius of the central finite-difference Jacobian of `op` at
/// `x`. Exact eigen-solve for dim <= 3; for larger dims the operator
/// 2-norm (largest singular value) is reported instead.
pub fn spectral_radius_at(
    op: &dyn Fn(&[f64]) -> Result<Vec<f64>, AlgoError>,
    x: &[f64],
    h: f64,
) -> Result<f64, AlgoError> {
    let j = jacobian(op, x, h)?;
    let n = x.len();
    Ok(match n {
        1 => j[0][0].abs(),
        2 => {
            let tr = j[0][0] + j[1][1];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let r = disc.sqrt();
                ((tr + r) / 2.0).abs().max(((tr - r) / 2.0).abs())
            } else {
                det.sqrt()
            }
        }
        3 => {
            let tr = j[0][0] + j[1][1] + j[2][2];
            let m01 = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let m02 = j[0][0] * j[2][2] - j[0][2] * j[2][0];
            let m12 = j[1][1] * j[2][2] - j[1][2] * j[2][1];
            let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            cubic_roots_moduli(tr, m01 + m02 + m12, det)
                .into_iter()
                .fold(0.0f64, f64::max)
        }
        _ => {
            // power iteration on J^T J
            let mut v = vec![1.0 / (n as f64).sqrt(); n];
            let mut lam = 0.0;
            for _ in 0..500 {
                // w = J v; u = J^T w
                let w: Vec<f64> = (0..n).map(|r| (0..n).map(|c| j[r][c] * v[c]).sum()).collect();
                let u: Vec<f64> = (0..n).map(|c| (0..n).map(|r| j[r][c] * w[r]).sum()).collect();
                let nu = norm(&u);
                if nu < 1e-300 {
                    return Ok(0.0);
                }
                v = scale(&u, 1.0 / nu);
                lam = nu;
            }
            lam.sqrt()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{ApproxOperator, ErrorPolicy};
    use crate::penalties::Penalty;
    use crate::schedule::Schedule;

    fn exact_op(p: &Penalty, lambda: f64) -> ApproxOperator {
        ApproxOperator::exact(p.clone(), lambda).unwrap()
    }

    #[test]
    fn exact_proximal_point_linear_rate() {
        let p = Penalty::sq_l2(1.0, 1);
        let g = exact_op(&p, 1.0);
        let tr = proximal_point_run(&|_| Ok(g.clone()), &[4.0], 40, &[0.0], 0.5, &|_| 0.0).unwrap();
        for w in tr.dist_to_target.windows(2) {
            if w[0] > 1e-14 {
                assert!(w[1] / w[0] <= 0.5 + 1e-6);
            }
        }
        assert!(tr.final_dist() < 1e-11);
    }

    #[test]
    fn constant_error_limsup_within_ball() {
        let p = Penalty::sq_l2(1.0, 1);
        let eps = 0.05;
        let g = ApproxOperator::type_a(p.clone(), 1.0, eps, ErrorPolicy::Adversarial { anchor: vec![0.0] }, 3).unwrap();
        let l_g = p.l_psi(1.0);
        let radius = eps / (1.0 - l_g);
        let tr = proximal_point_run(&|_| Ok(g.clone()), &[3.0], 300, &[0.0], l_g, &|_| eps).unwrap();
        assert!(tr.tail_max_dist() <= radius + 1e-8, "{} > {}", tr.tail_max_dist(), radius);
        // envelope dominates the observed distance at every k
        for (d, e) in tr.dist_to_target.iter().zip(&tr.bound_envelope) {
            assert!(d <= &(e + 1e-10));
        }
    }

    #[test]
    fn geometric_schedule_converges() {
        let p = Penalty::sq_l2(1.0, 1);
        let sched = Schedule::geometric(0.1, 0.0, 0.7);
        let g_at = |k: usize| {
            ApproxOperator::type_a(
                p.clone(),
                1.0,
                sched.eps(k),
                ErrorPolicy::RandomSphere,
                9,
            )
        };
        let tr = proximal_point_run(&g_at, &[2.0], 400, &[0.0], 0.5, &|k| sched.eps(k)).unwrap();
        assert!(tr.final_dist() < 1e-6, "final dist {}", tr.final_dist());
    }

    #[test]
    fn contraction_factors() {
        // optimal tau for FB: L_FB = (L_f - mu)/(L_f + mu) when L_g = 1
        let (mu, lf) = (1.0, 4.0);
        let tau = optimal_tau(SplitKind::FB, mu, lf);
        let c = contraction_factor(SplitKind::FB, 1.0, mu, lf, tau).unwrap();
        assert!((c - 0.6).abs() < 1e-14);
        // perfectly conditioned f: L_GM = 0
        let c = contraction_factor(SplitKind::FB, 10.0, 2.0, 2.0, 0.5).unwrap();
        assert_eq!(c, 0.0);
        // L_g = 10 admits contraction when mu/L_f is close to 1
        let tau = optimal_tau(SplitKind::FB, 0.99, 1.0);
        assert!(contraction_factor(SplitKind::FB, 10.0, 0.99, 1.0, tau).unwrap() < 1.0);
        assert!(contraction_factor(SplitKind::FB, 1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn ball_radius_formulas() {
        let r = ball_radius(SplitKind::FB, Order::GFirst, 0.5, 0.1, 0.2, 0.0, 0.3).unwrap();
        assert!((r - 0.6).abs() < 1e-15);
        let r = ball_radius(SplitKind::PR, Order::GFirst, 0.5, 0.1, 0.2, 0.0, 0.3).unwrap();
        assert!((r - 1.2).abs() < 1e-15);
        let r = ball_radius(SplitKind::DR, Order::FFirst, 0.5, 0.1, 0.0, 0.2, 0.3).unwrap();
        assert!((r - 0.18).abs() < 1e-15);
        assert_eq!(ball_radius(SplitKind::FB, Order::GFirst, 0.5, 0.0, 0.0, 0.0, 0.3).unwrap(), 0.0);
        assert!(ball_radius(SplitKind::FB, Order::GFirst, 1.0, 0.1, 0.1, 0.0, 0.3).is_err());
    }

    #[test]
    fn fb_fixed_point_is_stationary() {
        // minimizer of f + phi satisfies x = prox_phi(x - tau grad f(x)) only
        // when tau = lambda; use lambda = tau so the target is argmin(f + phi)
        let p = Penalty::sq_l2(1.0, 1);
        let f = SmoothTerm::quadratic_diag(vec![2.0], vec![3.0]);
        let tau = 0.4;
        let g = exact_op(&p, tau);
        let op = fb_operator(g, f.clone(), tau);
        // argmin (x-3)^2 + x^2/2: 2(x-3) + x = 0 -> x = 2
        let x_star = vec![2.0];
        let fx = op.apply(&x_star).unwrap();
        assert!(dist(&fx, &x_star) < 1e-10);
        assert_eq!(op.eval_count(), 1);
    }

    #[test]
    fn dr_is_average_of_pr() {
        let p = Penalty::l1(1.0, 2);
        let f = SmoothTerm::quadratic_diag(vec![1.0, 2.0], vec![1.0, -1.0]);
        let g = exact_op(&p, 0.5);
        let pr = pr_operator(g.clone(), f.clone(), 0.5, Order::GFirst);
        let dr = dr_operator(g, f, 0.5, Order::GFirst);
        let x = vec![0.7, -1.3];
        let want = scale(&add(&x, &pr.apply(&x).unwrap()), 0.5);
        assert_eq!(dr.apply(&x).unwrap(), want);
    }

    #[test]
    fn pr_orders_differ_with_fixed_error() {
        let p = Penalty::sq_l2(1.0, 2);
        let f = SmoothTerm::quadratic_diag(vec![1.0, 3.0], vec![0.5, 0.5]);
        let e = ErrorPolicy::Fixed(vec![0.05, 0.0]);
        let g = ApproxOperator::type_a(p, 0.5, 0.05, e, 0).unwrap();
        let a = pr_operator(g.clone(), f.clone(), 0.5, Order::GFirst);
        let b = pr_operator(g, f, 0.5, Order::FFirst);
        let x = vec![1.0, 2.0];
        assert!(dist(&a.apply(&x).unwrap(), &b.apply(&x).unwrap()) > 1e-6);
    }

    #[test]
    fn km_validation_clauses() {
        let p = KMParams::plain(0.5, 10, 1);
        let r = validate_km_params(&p, 10);
        assert!(r.valid, "{:?}", r.violations);

        let mut bad = KMParams::plain(0.5, 10, 1);
        bad.lambda = vec![1.0; 10];
        assert!(!validate_km_params(&bad, 10).valid);

        let mut inertial = KMParams::plain(0.5, 10, 1);
        inertial.alpha = vec![0.3; 10];
        inertial.beta = vec![0.3; 10];
        let r = validate_km_params(&inertial, 10);
        // the compatibility expression is reported either way
        assert!(r.compatibility_sup.is_finite());
    }

    #[test]
    fn km_plain_converges_on_prox() {
        let p = Penalty::l1(1.0, 1);
        let g = exact_op(&p, 1.0);
        let t = Operator::new(move |x: &[f64]| Ok(g.evaluate(x)?));
        let params = KMParams::plain(0.5, 300, 1);
        let tr = km_run(&t, &params, &[4.0], 300, &[0.0]).unwrap();
        assert!(tr.final_dist() < 1e-6);
        // Fejer: operator residual nonincreasing
        let g2 = exact_op(&p, 1.0);
        let mut prev = f64::INFINITY;
        for x in &tr.iterates {
            let r = dist(&g2.evaluate(x).unwrap(), x);
            assert!(r <= prev + 1e-12);
            prev = r;
        }
    }

    #[test]
    fn fixed_point_solver_finds_and_fails() {
        // type (a) with fixed e on sq_l2(gamma): fixed point (1+gamma)/gamma * e
        let gam = 1.0;
        let p = Penalty::sq_l2(gam, 2);
        let e = vec![0.1, 0.0];
        let g = ApproxOperator::type_a(p, 1.0, 0.1, ErrorPolicy::Fixed(e.clone()), 0).unwrap();
        let x = fixed_point_solve(&|x| Ok(g.evaluate(x)?), &[0.0, 0.0], 1e-9).unwrap();
        assert!(dist(&x, &scale(&e, (1.0 + gam) / gam)) < 1e-8);

        // constant penalty: prox + e has no fixed point
        let p = Penalty::constant(0.0, 2);
        let g = ApproxOperator::type_a(p, 1.0, 0.1, ErrorPolicy::Fixed(vec![0.1, 0.0]), 0).unwrap();
        assert!(matches!(
            fixed_point_solve(&|x| Ok(g.evaluate(x)?), &[0.0, 0.0], 1e-9),
            Err(AlgoError::BudgetExhausted(_))
        ));
    }

    #[test]
    fn spectral_radius_cases() {
        // prox of sq_l2 is linear with factor 1/(1+gamma)
        let p = Penalty::sq_l2(3.0, 2);
        let g = exact_op(&p, 1.0);
        let r = spectral_radius_at(&|x| Ok(g.evaluate(x)?), &[1.0, -1.0], 1e-5).unwrap();
        assert!((r - 0.25).abs() < 1e-8);
        // identity
        let r = spectral_radius_at(&|x| Ok(x.to_vec()), &[0.3], 1e-5).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
        // rotation-scaling with complex eigenvalues, modulus sqrt(det)
        let r = spectral_radius_at(
            &|x| Ok(vec![0.5 * x[0] - 0.5 * x[1], 0.5 * x[0] + 0.5 * x[1]]),
            &[0.0, 0.0],
            1e-5,
        )
        .unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-8);
        // 3D diagonal
        let r = spectral_radius_at(
            &|x| Ok(vec![0.2 * x[0], -0.7 * x[1], 0.4 * x[2]]),
            &[0.1, 0.1, 0.1],
            1e-5,
        )
        .unwrap();
        assert!((r - 0.7).abs() < 1e-7);
    }

    #[test]
    fn splitting_run_respects_ball() {
        let p = Penalty::sq_l2(1.0, 1);
        let f = SmoothTerm::quadratic_diag(vec![2.0], vec![3.0]);
        let tau = optimal_tau(SplitKind::FB, f.mu, f.l_f);
        let eps = 0.02;
        let l_g = p.l_psi(tau);
        let l = contraction_factor(SplitKind::FB, l_g, f.mu, f.l_f, tau).unwrap();
        // exact reference fixed point
        let g0 = exact_op(&p, tau);
        let exact = fb_operator(g0, f.clone(), tau);
        let target = fixed_point_solve(&|x| exact.apply(x), &[0.0], 1e-12).unwrap();
        let sigma = eps; // type (a)
        let radius = ball_radius(SplitKind::FB, Order::GFirst, l, 0.0, sigma, eps, 0.0).unwrap();
        let g = ApproxOperator::type_a(p, tau, eps, ErrorPolicy::Adversarial { anchor: target.clone() }, 5).unwrap();
        let op = fb_operator(g, f, tau);
        let tr = run_splitting(&|_| Ok(op.clone()), &[5.0], 400, &target, l, &|_| sigma).unwrap();
        assert!(tr.tail_max_dist() <= radius + 1e-8, "{} > {}", tr.tail_max_dist(), radius);
    }
}
