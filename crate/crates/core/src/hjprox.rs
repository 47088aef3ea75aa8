//! Sampling-based proximal approximation (kind f): the prox is written as a
//! Gaussian softmin expectation ratio and estimated by self-normalized
//! importance weighting with max-shift stabilization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dist, norm};
use crate::penalties::{Penalty, PenaltyError};

const BLOCK: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HJConfig {
    /// Envelope parameter; the operator approximates `prox_{lambda phi}`.
    pub lambda: f64,
    /// Viscosity / temperature.
    pub eps: f64,
    /// Monte-Carlo sample count.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HJEstimate {
    pub point: Vec<f64>,
    /// Effective sample size (Sum w)^2 / Sum w^2, in (0, M].
    pub ess: f64,
    /// Delta-method standard error of the weighted mean, per coordinate.
    pub stderr: Vec<f64>,
    /// Samples dropped because the penalty evaluated non-finite.
    pub rejected: usize,
}

impl HJEstimate {
    pub fn stderr_norm(&self) -> f64 {
        norm(&self.stderr)
    }
}

fn mix(seed: u64, block: u64, salt: u64) -> u64 {
    // splitmix64 over the combined words; block order must not matter for
    // anything except which substream a sample comes from.
    let mut z = seed ^ block.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt.rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn point_salt(x: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in x {
        for b in t.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Draw `count` proposal points `y_i ~ N(center, eps*lambda*I)` and the
/// log-weights targeting the softmin measure `N(x, eps*lambda*I) e^{-phi/eps}`:
/// `-phi(y)/eps - (||y-x||^2 - ||y-center||^2) / (2 eps lambda)`.
/// The correction term makes the weighted expectation independent of the
/// proposal center, so pilots may recenter freely.  Non-finite penalty
/// values are rejected.
fn draw(
    p: &Penalty,
    cfg: &HJConfig,
    x: &[f64],
    center: &[f64],
    stage: u64,
    count: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, usize), PenaltyError> {
    let std = (cfg.eps * cfg.lambda).sqrt();
    let two_var = 2.0 * cfg.eps * cfg.lambda;
    let salt = point_salt(x);
    let mut ys = Vec::with_capacity(count);
    let mut logw = Vec::with_capacity(count);
    let mut rejected = 0usize;
    let blocks = count.div_ceil(BLOCK);
    for b in 0..blocks {
        let take = BLOCK.min(count - b * BLOCK);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, b as u64 | (stage << 32), salt));
        for _ in 0..take {
            let y: Vec<f64> = center
                .iter()
                .map(|&c| c + std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let v = p.eval(&y)?;
            if !v.is_finite() {
                rejected += 1;
                continue;
            }
            let mut corr = 0.0;
            for k in 0..x.len() {
                corr += (y[k] - x[k]) * (y[k] - x[k]) - (y[k] - center[k]) * (y[k] - center[k]);
            }
            logw.push(-v / cfg.eps - corr / two_var);
            ys.push(y);
        }
    }
    Ok((ys, logw, rejected))
}

fn weighted_mean(ys: &[Vec<f64>], logw: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let shift = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(shift.is_finite(), "all weights underflowed despite max-shift");
    let w: Vec<f64> = logw.iter().map(|a| (a - shift).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|t| t * t).sum();
    let mut mean = vec![0.0; dim];
    for (yi, wi) in ys.iter().zip(&w) {
        for k in 0..dim {
            mean[k] += wi * yi[k];
        }
    }
    for m in &mut mean {
        *m /= sw;
    }
    // Var of the ratio estimator: sum w_i^2 (y_i - mean)^2 / (sum w)^2.
    let mut var = vec![0.0; dim];
    for (yi, wi) in ys.iter().zip(&w) {
        for k in 0..dim {
            let d = yi[k] - mean[k];
            var[k] += wi * wi * d * d;
        }
    }
    let stderr: Vec<f64> = var.iter().map(|v| (v / (sw * sw)).sqrt()).collect();
    (mean, stderr, sw * sw / sw2)
}

/// Self-normalized estimate of the softmin expectation ratio
/// `E[y w(y)] / E[w(y)]`, `w = exp(-phi/eps)`, which equals the approximate
/// prox output `g_f(x) = x - lambda grad u_eps(x)`.
pub fn type_f_prox(p: &Penalty, cfg: &HJConfig, x: &[f64]) -> Result<HJEstimate, PenaltyError> {
    let dim = x.len();
    // Two pilot stages walk the proposal center into the softmin bulk
    // (naive sampling at x has vanishing overlap for small eps); the final
    // stage carries the estimate.  The correction weights keep every stage
    // unbiased for the same ratio.
    let pilot = (cfg.samples / 4).max(1);
    let (ys, logw, _) = draw(p, cfg, x, x, 1, pilot)?;
    let (m1, _, _) = weighted_mean(&ys, &logw, dim);
    let (ys, logw, _) = draw(p, cfg, x, &m1, 2, pilot)?;
    let (m2, _, _) = weighted_mean(&ys, &logw, dim);
    let (ys, logw, rejected) = draw(p, cfg, x, &m2, 3, cfg.samples)?;
    let (mean, stderr, ess) = weighted_mean(&ys, &logw, dim);
    Ok(HJEstimate { point: mean, ess, stderr, rejected })
}

/// Stabilized log-mean-exp estimate of the smoothed envelope
/// `u_eps(x) = -eps log E_{y~N(x, eps lambda)}[exp(-phi(y)/eps)]`.
pub fn viscous_envelope_value(p: &Penalty, cfg: &HJConfig, x: &[f64]) -> Result<f64, PenaltyError> {
    // recenter via the prox pilots, then log-mean-exp over the corrected
    // weights (the same change-of-proposal identity holds for the mean)
    let dim = x.len();
    let pilot = (cfg.samples / 4).max(1);
    let (ys, logw, _) = draw(p, cfg, x, x, 1, pilot)?;
    let (m1, _, _) = weighted_mean(&ys, &logw, dim);
    let (ys, logw, _) = draw(p, cfg, x, &m1, 2, pilot)?;
    let (m2, _, _) = weighted_mean(&ys, &logw, dim);
    let (_, logw, _) = draw(p, cfg, x, &m2, 3, cfg.samples)?;
    let shift = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m = logw.len() as f64;
    let s: f64 = logw.iter().map(|a| (a - shift).exp()).sum();
    Ok(-cfg.eps * (shift + (s / m).ln()))
}

/// Closed-form smoothed envelope for the separable quadratic
/// `phi = (gamma/2)||x||^2`, used as the oracle in tests:
/// per coordinate `(eps/2) ln(1 + gamma lambda) + gamma x_k^2 / (2 (1 + gamma lambda))`.
pub fn quadratic_envelope_oracle(gamma: f64, cfg: &HJConfig, x: &[f64]) -> f64 {
    let c = 1.0 + gamma * cfg.lambda;
    x.iter()
        .map(|t| 0.5 * cfg.eps * c.ln() + gamma * t * t / (2.0 * c))
        .sum()
}

#[derive(Debug, Clone)]
pub struct SigmaFReport {
    pub worst_gap: f64,
    pub bound: f64,
    pub mc_slack: f64,
    pub pass: bool,
    pub min_ess: f64,
}

/// Compare the sampling estimator against the exact prox over a cloud:
/// the worst gap must stay below `sqrt(N (1/lambda - rho)^-1 eps)` plus
/// three standard errors of Monte-Carlo slack.
pub fn sigma_f_check(p: &Penalty, cfg: &HJConfig, cloud: &[Vec<f64>]) -> Result<SigmaFReport, PenaltyError> {
    let n = p.dim as f64;
    let bound = (n * cfg.eps / (1.0 / cfg.lambda - p.rho())).sqrt();
    let mut worst = 0.0f64;
    let mut slack = 0.0f64;
    let mut min_ess = f64::INFINITY;
    for x in cloud {
        let est = type_f_prox(p, cfg, x)?;
        let exact = p.prox(cfg.lambda, x)?;
        let gap = dist(&est.point, &exact);
        if gap > worst {
            worst = gap;
            slack = 3.0 * est.stderr_norm();
        }
        min_ess = min_ess.min(est.ess);
    }
    Ok(SigmaFReport { worst_gap: worst, bound, mc_slack: slack, pass: worst <= bound + slack, min_ess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::point_cloud;

    fn cfg(eps: f64, lambda: f64, seed: u64) -> HJConfig {
        HJConfig { lambda, eps, samples: 100_000, seed }
    }

    #[test]
    fn const_penalty_recovers_input() {
        let p = Penalty::constant(3.0, 2);
        let c = cfg(0.05, 0.5, 1);
        let x = vec![1.5, -0.5];
        let est = type_f_prox(&p, &c, &x).unwrap();
        assert!(dist(&est.point, &x) <= 3.0 * est.stderr_norm());
        // weights are uniform up to the proposal-recentering correction
        assert!(est.ess > 0.95 * c.samples as f64);
        assert!((viscous_envelope_value(&p, &c, &x).unwrap() - 3.0).abs() < 5e-3);
    }

    #[test]
    fn quadratic_prox_within_bound() {
        // gamma = 1, lambda = 0.5, x = 2: prox = 4/3
        let p = Penalty::sq_l2(1.0, 1);
        let c = cfg(0.01, 0.5, 2);
        let est = type_f_prox(&p, &c, &[2.0]).unwrap();
        let bound = (0.5 * 0.01f64).sqrt();
        assert!(
            (est.point[0] - 4.0 / 3.0).abs() <= bound + 3.0 * est.stderr[0],
            "estimate {} off prox 4/3 beyond {} + slack",
            est.point[0],
            bound
        );
    }

    #[test]
    fn quadratic_envelope_matches_oracle() {
        let p = Penalty::sq_l2(2.0, 1);
        let c = cfg(0.05, 0.5, 3);
        let x = [1.2];
        let got = viscous_envelope_value(&p, &c, &x).unwrap();
        let want = quadratic_envelope_oracle(2.0, &c, &x);
        // log-mean-exp slack scales like eps / sqrt(ESS)
        assert!((got - want).abs() < 5e-3, "envelope {got} vs oracle {want}");
    }

    #[test]
    fn envelope_dominates_moreau_up_to_sqrt_eps() {
        // u_eps >= u - C sqrt(eps) on an l1 grid; fitted C stays modest
        let p = Penalty::l1(1.0, 1);
        let c = cfg(0.02, 0.5, 4);
        for x in [-2.0, -0.5, 0.0, 0.7, 1.9] {
            let u_eps = viscous_envelope_value(&p, &c, &[x]).unwrap();
            let u = p.moreau_envelope(0.5, &[x]).unwrap();
            assert!(u_eps >= u - 2.0 * c.eps.sqrt(), "x={x}: {u_eps} vs moreau {u}");
        }
    }

    #[test]
    fn l1_estimate_approaches_soft_threshold() {
        let p = Penalty::l1(1.0, 1);
        let x = [2.0];
        let mut prev_gap = f64::INFINITY;
        for eps in [0.2, 0.05, 0.0125] {
            let c = cfg(eps, 0.5, 5);
            let est = type_f_prox(&p, &c, &x).unwrap();
            let gap = (est.point[0] - 1.5).abs(); // soft threshold of 2 at 0.5
            assert!(gap <= prev_gap + 3.0 * est.stderr[0] + 0.02);
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05);
    }

    #[test]
    fn sigma_f_report_passes_on_catalog() {
        let c = cfg(0.01, 0.5, 6);
        let cloud = point_cloud(1, 8, 2.0, 7);
        for p in [Penalty::sq_l2(1.0, 1), Penalty::l1(1.0, 1), Penalty::mcp(1.0, 2.0, 1)] {
            let r = sigma_f_check(&p, &c, &cloud).unwrap();
            assert!(r.pass, "{}: gap {} > bound {} + {}", p.name(), r.worst_gap, r.bound, r.mc_slack);
            assert!(r.min_ess > 0.01 * c.samples as f64);
        }
    }

    #[test]
    fn estimates_are_deterministic() {
        let p = Penalty::l1(1.0, 2);
        let c = cfg(0.05, 0.5, 11);
        let x = vec![0.8, -1.1];
        let a = type_f_prox(&p, &c, &x).unwrap();
        let b = type_f_prox(&p, &c, &x).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn envelope_curvature_bounded_by_inverse_lambda() {
        // second difference of u_eps on a 1D grid stays below 1/lambda
        let p = Penalty::sq_l2(1.0, 1);
        let c = HJConfig { lambda: 0.5, eps: 0.05, samples: 200_000, seed: 12 };
        let h = 0.25;
        for x in [-1.0, 0.0, 1.0] {
            let um = viscous_envelope_value(&p, &c, &[x - h]).unwrap();
            let u0 = viscous_envelope_value(&p, &c, &[x]).unwrap();
            let up = viscous_envelope_value(&p, &c, &[x + h]).unwrap();
            let second = (up - 2.0 * u0 + um) / (h * h);
            assert!(second <= 1.0 / c.lambda + 1e-2 + 0.05);
        }
    }

    #[test]
    fn nonexpansive_on_convex_penalty() {
        let p = Penalty::l2(1.0, 2);
        let c = cfg(0.02, 0.5, 13);
        let cloud = point_cloud(2, 12, 3.0, 15);
        for i in 0..cloud.len() {
            for j in (i + 1)..cloud.len() {
                let a = type_f_prox(&p, &c, &cloud[i]).unwrap();
                let b = type_f_prox(&p, &c, &cloud[j]).unwrap();
                let dxy = dist(&cloud[i], &cloud[j]);
                let slack = 3.0 * (a.stderr_norm() + b.stderr_norm());
                assert!(dist(&a.point, &b.point) <= dxy + slack);
            }
        }
    }
}
