//! Approximate proximal operators of kinds (a)-(f): constructors, the
//! quality bound sigma(eps) and (L, gamma) Lipschitz pairs per kind, plus
//! empirical estimators used to confront the bounds with measurements.
//!
//! All operators approximate `prox_{lambda phi}`; internally lambda is
//! folded into the penalty, so the potential is
//! `psi(y) = ||y||^2 / 2 - lambda * u_lambda(y)` and `grad psi = prox_{lambda phi}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hjprox::{type_f_prox, HJConfig};
use crate::linalg::{add, dist, dot, norm, scale, sub, unit_or};
use crate::penalties::{Penalty, PenaltyError};
use crate::sets::ConvexSet;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error("policy violates the eps budget: {0}")]
    PolicyRejected(String),
    #[error("construction self-test failed: {0}")]
    SelfTest(String),
    #[error("kind {0:?} unsupported for this penalty/selector combination: {1}")]
    Unsupported(ApproxKind, String),
    #[error("missing constant `{0}` for this bound")]
    MissingConstant(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApproxKind {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl ApproxKind {
    pub fn name(&self) -> &'static str {
        match self {
            ApproxKind::A => "a",
            ApproxKind::B => "b",
            ApproxKind::C => "c",
            ApproxKind::D => "d",
            ApproxKind::E => "e",
            ApproxKind::F => "f",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "a" => Some(ApproxKind::A),
            "b" => Some(ApproxKind::B),
            "c" => Some(ApproxKind::C),
            "d" => Some(ApproxKind::D),
            "e" => Some(ApproxKind::E),
            "f" => Some(ApproxKind::F),
            _ => None,
        }
    }
}

/// Additive error / perturbation policy for kinds (a) and (b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ErrorPolicy {
    /// A fixed vector with norm <= eps.
    Fixed(Vec<f64>),
    /// Seeded uniform direction on the eps-sphere, derived per point.
    RandomSphere,
    /// Radially outward from `anchor` (the known fixed point / minimizer),
    /// with a seeded direction when the input coincides with the anchor.
    Adversarial { anchor: Vec<f64> },
}

/// Output selector for kind (c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlackPolicy {
    /// z = exact prox (always admissible).
    Center,
    /// Maximal admissible displacement along a seeded direction.
    Boundary,
}

/// Analytic smoothed-potential family for kind (d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PsiFamily {
    /// psi + eps * exp(-||x - e||^2 / 2) with ||e|| = eps.
    GaussianBump { e: Vec<f64> },
    /// psi - ||x||^2 / (2n); the sup gap on the test box must stay <= eps.
    Shrink { n: f64 },
}

/// Member selector for kind (e).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Selector {
    Center,
    Steiner,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Policy {
    Error(ErrorPolicy),
    Slack(SlackPolicy),
    Family(PsiFamily),
    Select(Selector),
    Sampling(HJConfig),
    Exact,
}

/// Structural constants feeding the per-kind bounds. `rho` and `lambda`
/// refer to the scaled penalty `lambda phi` (so `rho = lambda * rho_phi`
/// and the quality/Lipschitz table reads off directly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub l_psi: f64,
    pub rho: f64,
    pub lambda: f64,
    pub n_dim: usize,
    pub l_eps: Option<f64>,
    pub tau: Option<f64>,
}

impl Constants {
    pub fn for_penalty(p: &Penalty, lambda: f64) -> Self {
        Constants {
            l_psi: p.l_psi(lambda),
            rho: lambda * p.rho(),
            lambda,
            n_dim: p.dim,
            l_eps: None,
            tau: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzPair {
    pub l: f64,
    pub gamma: f64,
}

/// Table row sigma(eps): worst-case distance to the exact prox per kind.
pub fn sigma_bound(kind: ApproxKind, eps: f64, c: &Constants) -> Result<f64, ApproxError> {
    Ok(match kind {
        ApproxKind::A => eps,
        ApproxKind::B => c.l_psi * eps,
        // negative (strongly convex) rho is clamped: the (c)-row bound is
        // derived for the weakly convex enlargement, and sqrt(eps) is the
        // provable convex-case value
        ApproxKind::C => (eps / (1.0 - c.rho.max(0.0))).sqrt(),
        ApproxKind::D => {
            let l_eps = c.l_eps.ok_or(ApproxError::MissingConstant("l_eps"))?;
            2.0 * (l_eps * eps).sqrt()
        }
        ApproxKind::E => (2.0 * c.l_psi * eps).sqrt(),
        // rho in Constants is lambda-scaled, so the displayed
        // N (lambda^-1 - rho_phi)^-1 eps reads N lambda (1 - rho)^-1 eps.
        ApproxKind::F => (c.n_dim as f64 * c.lambda / (1.0 - c.rho) * eps).sqrt(),
    })
}

/// Table row (L, gamma): the Lipschitz pair per kind.
pub fn lipschitz_pair(kind: ApproxKind, eps: f64, c: &Constants) -> Result<LipschitzPair, ApproxError> {
    Ok(match kind {
        ApproxKind::A => LipschitzPair { l: c.l_psi, gamma: 2.0 * eps },
        ApproxKind::B => LipschitzPair { l: c.l_psi, gamma: 2.0 * c.l_psi * eps },
        // rho clamped as in the sigma row
        ApproxKind::C => LipschitzPair {
            l: 1.0 / (1.0 - c.rho.max(0.0)),
            gamma: (2.0 * eps / (1.0 - c.rho.max(0.0))).sqrt(),
        },
        ApproxKind::D => LipschitzPair {
            l: c.l_eps.ok_or(ApproxError::MissingConstant("l_eps"))?,
            gamma: 0.0,
        },
        ApproxKind::E => LipschitzPair { l: c.l_psi, gamma: (2.0 * c.l_psi * eps).sqrt() },
        ApproxKind::F => {
            if c.rho > 0.0 {
                let tau = c.tau.ok_or(ApproxError::MissingConstant("tau"))?;
                LipschitzPair { l: 1.0 + tau / c.lambda, gamma: 0.0 }
            } else {
                LipschitzPair { l: c.l_psi, gamma: 0.0 }
            }
        }
    })
}

/// One approximate proximal operator: immutable, deterministic given
/// `(input point, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxOperator {
    pub kind: ApproxKind,
    pub eps: f64,
    pub penalty: Penalty,
    pub lambda: f64,
    pub seed: u64,
    policy: Policy,
}

fn point_hash(x: &[f64]) -> u64 {
    // FNV-1a over the raw bit patterns; stable across runs and platforms.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in x {
        for b in t.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn seeded_unit(seed: u64, x: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ point_hash(x));
    loop {
        let v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 {
            return scale(&v, 1.0 / n);
        }
    }
}

impl ApproxOperator {
    pub fn exact(p: Penalty, lambda: f64) -> Result<Self, ApproxError> {
        p.prox(lambda, &vec![0.0; p.dim])?;
        Ok(ApproxOperator { kind: ApproxKind::A, eps: 0.0, penalty: p, lambda, seed: 0, policy: Policy::Exact })
    }

    pub fn type_a(p: Penalty, lambda: f64, eps: f64, policy: ErrorPolicy, seed: u64) -> Result<Self, ApproxError> {
        if let ErrorPolicy::Fixed(e) = &policy {
            if e.len() != p.dim {
                return Err(ApproxError::PolicyRejected("fixed error has wrong dimension".into()));
            }
            if norm(e) > eps + 1e-15 {
                return Err(ApproxError::PolicyRejected(format!(
                    "fixed error norm {} exceeds eps {eps}",
                    norm(e)
                )));
            }
        }
        p.prox(lambda, &vec![0.0; p.dim])?;
        Ok(ApproxOperator { kind: ApproxKind::A, eps, penalty: p, lambda, seed, policy: Policy::Error(policy) })
    }

    pub fn type_b(p: Penalty, lambda: f64, eps: f64, policy: ErrorPolicy, seed: u64) -> Result<Self, ApproxError> {
        let mut op = Self::type_a(p, lambda, eps, policy, seed)?;
        op.kind = ApproxKind::B;
        Ok(op)
    }

    pub fn type_c(p: Penalty, lambda: f64, eps: f64, policy: SlackPolicy, seed: u64) -> Result<Self, ApproxError> {
        if policy == SlackPolicy::Boundary
            && !matches!(p.kind, crate::penalties::PenaltyKind::SqL2 { .. })
            && p.dim != 1
        {
            return Err(ApproxError::Unsupported(
                ApproxKind::C,
                "boundary construction needs a closed-form eps-subdifferential or dim 1".into(),
            ));
        }
        let op = ApproxOperator { kind: ApproxKind::C, eps, penalty: p, lambda, seed, policy: Policy::Slack(policy) };
        // Construction-time self-test: the inclusion must hold at a few probes.
        if op.penalty.dim <= 2 {
            for (i, t) in [-2.3, 0.4, 1.7].iter().enumerate() {
                let y: Vec<f64> = (0..op.penalty.dim).map(|j| t + 0.3 * (i + j) as f64).collect();
                let z = op.evaluate(&y)?;
                let v = sub(&y, &z);
                if !check_inclusion_eps_rho(&op.penalty, op.lambda, &z, &v, eps, op.penalty.rho())? {
                    return Err(ApproxError::SelfTest(format!("inclusion fails at probe {y:?}")));
                }
            }
        }
        Ok(op)
    }

    pub fn type_d(p: Penalty, lambda: f64, eps: f64, family: PsiFamily, k_bound: f64, seed: u64) -> Result<Self, ApproxError> {
        match &family {
            PsiFamily::GaussianBump { e } => {
                if e.len() != p.dim || (norm(e) - eps).abs() > 1e-12 {
                    return Err(ApproxError::PolicyRejected(format!(
                        "gaussian bump center must satisfy ||e|| = eps, got {}",
                        norm(e)
                    )));
                }
                // sup |psi_eps - psi| = eps by construction (bump amplitude).
            }
            PsiFamily::Shrink { n } => {
                // sup over the test box of ||x||^2/(2n) must stay below eps.
                let sup = (p.dim as f64) * k_bound * k_bound / (2.0 * n);
                if sup > eps + 1e-12 {
                    return Err(ApproxError::PolicyRejected(format!(
                        "shrink(n={n}) gap {sup} exceeds eps {eps} on the box [-{k_bound},{k_bound}]^{}",
                        p.dim
                    )));
                }
            }
        }
        Ok(ApproxOperator { kind: ApproxKind::D, eps, penalty: p, lambda, seed, policy: Policy::Family(family) })
    }

    pub fn type_e(p: Penalty, lambda: f64, eps: f64, selector: Selector, seed: u64) -> Result<Self, ApproxError> {
        if selector == Selector::Boundary
            && !matches!(p.kind, crate::penalties::PenaltyKind::SqL2 { .. })
        {
            // Only the exact-ball case guarantees boundary points are members.
            return Err(ApproxError::Unsupported(
                ApproxKind::E,
                "boundary selector requires the exact-ball subdifferential (sq_l2)".into(),
            ));
        }
        Ok(ApproxOperator { kind: ApproxKind::E, eps, penalty: p, lambda, seed, policy: Policy::Select(selector) })
    }

    pub fn type_f(p: Penalty, cfg: HJConfig) -> Result<Self, ApproxError> {
        if 1.0 / cfg.lambda - p.rho() <= 0.0 {
            return Err(ApproxError::PolicyRejected("need 1/lambda - rho > 0".into()));
        }
        Ok(ApproxOperator {
            kind: ApproxKind::F,
            eps: cfg.eps,
            penalty: p,
            lambda: cfg.lambda,
            seed: cfg.seed,
            policy: Policy::Sampling(cfg),
        })
    }

    pub fn constants(&self) -> Constants {
        let mut c = Constants::for_penalty(&self.penalty, self.lambda);
        if let Policy::Family(f) = &self.policy {
            c.l_eps = Some(match f {
                PsiFamily::GaussianBump { .. } => self.penalty.l_psi(self.lambda) + self.eps,
                PsiFamily::Shrink { n } => self.penalty.l_psi(self.lambda) - 1.0 / n,
            });
        }
        c
    }

    pub fn sigma_bound(&self) -> Result<f64, ApproxError> {
        sigma_bound(self.kind, self.eps, &self.constants())
    }

    pub fn lipschitz_pair(&self) -> Result<LipschitzPair, ApproxError> {
        lipschitz_pair(self.kind, self.eps, &self.constants())
    }

    fn error_vector(&self, policy: &ErrorPolicy, y: &[f64]) -> Vec<f64> {
        match policy {
            ErrorPolicy::Fixed(e) => e.clone(),
            ErrorPolicy::RandomSphere => scale(&seeded_unit(self.seed, y), self.eps),
            ErrorPolicy::Adversarial { anchor } => {
                let d = sub(y, anchor);
                let u = unit_or(&d, &seeded_unit(self.seed, y));
                scale(&u, self.eps)
            }
        }
    }

    /// The potential whose gradient the operator approximates:
    /// `psi(y) = ||y||^2/2 - lambda u_lambda(y)`, so `grad psi = prox_{lambda phi}`.
    pub fn psi(&self, y: &[f64]) -> Result<f64, ApproxError> {
        Ok(0.5 * dot(y, y) - self.lambda * self.penalty.moreau_envelope(self.lambda, y)?)
    }

    /// The smoothed potential of a type-(d) operator.
    pub fn psi_eps(&self, y: &[f64]) -> Result<f64, ApproxError> {
        let base = self.psi(y)?;
        match &self.policy {
            Policy::Family(PsiFamily::GaussianBump { e }) => {
                let d = dist(y, e);
                Ok(base + self.eps * (-0.5 * d * d).exp())
            }
            Policy::Family(PsiFamily::Shrink { n }) => Ok(base - dot(y, y) / (2.0 * n)),
            _ => Err(ApproxError::Unsupported(self.kind, "psi_eps is type (d) only".into())),
        }
    }

    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>, ApproxError> {
        let prox = || self.penalty.prox(self.lambda, y);
        Ok(match &self.policy {
            Policy::Exact => prox()?,
            Policy::Error(pol) => match self.kind {
                ApproxKind::A => add(&prox()?, &self.error_vector(pol, y)),
                _ => self.penalty.prox(self.lambda, &add(y, &self.error_vector(pol, y)))?,
            },
            Policy::Slack(SlackPolicy::Center) => prox()?,
            Policy::Slack(SlackPolicy::Boundary) => self.type_c_boundary(y)?,
            Policy::Family(PsiFamily::GaussianBump { e }) => {
                let d = sub(y, e);
                let w = self.eps * (-0.5 * dot(&d, &d)).exp();
                sub(&prox()?, &scale(&d, w))
            }
            Policy::Family(PsiFamily::Shrink { n }) => sub(&prox()?, &scale(y, 1.0 / n)),
            Policy::Select(sel) => {
                let (set, exact) = self.penalty.psi_eps_subdifferential(self.eps, y)?;
                let pick = match sel {
                    Selector::Center => prox()?,
                    Selector::Steiner => set.steiner_point(),
                    Selector::Boundary => {
                        debug_assert!(exact);
                        // one direction per operator, not per point: the
                        // boundary offset then cancels in two-point
                        // differences and the (L_psi, gamma) pair holds
                        let dir = seeded_unit(self.seed, &vec![0.0; y.len()]);
                        set.extreme_point(&dir)
                            .expect("ball sets always expose extreme points")
                    }
                };
                if !set.contains(&pick, 1e-9) {
                    return Err(ApproxError::SelfTest(format!(
                        "selector output {pick:?} escapes the eps-subdifferential at {y:?}"
                    )));
                }
                pick
            }
            Policy::Sampling(cfg) => type_f_prox(&self.penalty, cfg, y)?.point,
        })
    }

    /// Kind-(c) boundary output: maximal displacement from the exact prox
    /// along a seeded direction that keeps the defining inclusion true.
    fn type_c_boundary(&self, y: &[f64]) -> Result<Vec<f64>, ApproxError> {
        use crate::penalties::PenaltyKind;
        if let PenaltyKind::SqL2 { gamma } = self.penalty.kind {
            // With c = lambda*gamma: z = (y - s)/(1+c), ||s|| = sqrt(2*c*eps),
            // placing y - z on the boundary of the eps-subdifferential ball.
            let c = self.lambda * gamma;
            let s = scale(&seeded_unit(self.seed, y), (2.0 * c * self.eps).sqrt());
            return Ok(scale(&sub(y, &s), 1.0 / (1.0 + c)));
        }
        // 1D: bisect on the displacement magnitude from the prox point.
        let z0 = self.penalty.prox(self.lambda, y)?;
        let dir = if seeded_unit(self.seed, y)[0] >= 0.0 { 1.0 } else { -1.0 };
        let rho = self.penalty.rho();
        let admissible = |t: f64| -> Result<bool, ApproxError> {
            let z = vec![z0[0] + t * dir];
            let v = sub(y, &z);
            check_inclusion_eps_rho(&self.penalty, self.lambda, &z, &v, self.eps, rho)
        };
        let mut hi = (self.eps.sqrt() * 4.0).max(1e-3);
        while admissible(hi)? && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(vec![z0[0] + lo * dir])
    }
}

/// Brute-force check of `v` belonging to the (eps, rho)-subdifferential of
/// `lambda * phi` at `z`: the defining inequality is tested on a grid over
/// the penalty's domain box. Dim <= 2 only.
pub fn check_inclusion_eps_rho(
    p: &Penalty,
    lambda: f64,
    z: &[f64],
    v: &[f64],
    eps: f64,
    rho: f64,
) -> Result<bool, ApproxError> {
    let bound = p.domain_bound;
    let phi = |x: &[f64]| lambda * p.eval(x).unwrap();
    let rho_t = lambda * rho;
    let phi_z = phi(z);
    // Allow grid-resolution slack proportional to the local Lipschitz scale.
    let slack = 1e-9;
    let holds = |x: &[f64]| {
        let d = sub(x, z);
        dot(v, &d) <= phi(x) - phi_z + 0.5 * rho_t * dot(&d, &d) + eps + slack
    };
    match p.dim {
        1 => {
            let n = 4000;
            for i in 0..=n {
                let x = -bound + 2.0 * bound * i as f64 / n as f64;
                if !holds(&[x]) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        2 => {
            let n = 220;
            for i in 0..=n {
                let x = -bound + 2.0 * bound * i as f64 / n as f64;
                for j in 0..=n {
                    let yv = -bound + 2.0 * bound * j as f64 / n as f64;
                    if !holds(&[x, yv]) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        d => Err(ApproxError::Unsupported(ApproxKind::C, format!("inclusion oracle needs dim <= 2, got {d}"))),
    }
}

/// Worst observed distance to the exact prox over a point cloud.
pub fn empirical_sigma(g: &ApproxOperator, cloud: &[Vec<f64>]) -> Result<f64, ApproxError> {
    let mut worst: f64 = 0.0;
    for x in cloud {
        let gx = g.evaluate(x)?;
        let px = g.penalty.prox(g.lambda, x)?;
        worst = worst.max(dist(&gx, &px));
    }
    Ok(worst)
}

/// Minimal L with `||g(x) - g(y)|| <= L ||x - y|| + gamma` over all cloud
/// pairs, for the supplied (theoretical) gamma.
pub fn empirical_lipschitz(
    g: &ApproxOperator,
    cloud: &[Vec<f64>],
    gamma: f64,
) -> Result<LipschitzPair, ApproxError> {
    let vals: Vec<Vec<f64>> = cloud.iter().map(|x| g.evaluate(x)).collect::<Result<_, _>>()?;
    let mut l: f64 = 0.0;
    for i in 0..cloud.len() {
        for j in (i + 1)..cloud.len() {
            let dx = dist(&cloud[i], &cloud[j]);
            if dx < 1e-9 {
                continue;
            }
            let dg = dist(&vals[i], &vals[j]);
            l = l.max((dg - gamma) / dx);
        }
    }
    Ok(LipschitzPair { l: l.max(0.0), gamma })
}

/// Hausdorff distance between two balls: `||c1 - c2|| + |r1 - r2|`.
pub fn hausdorff_ball_distance(s1: &ConvexSet, s2: &ConvexSet) -> Result<f64, ApproxError> {
    match (s1, s2) {
        (
            ConvexSet::Ball { center: c1, radius: r1 },
            ConvexSet::Ball { center: c2, radius: r2 },
        ) => Ok(dist(c1, c2) + (r1 - r2).abs()),
        _ => Err(ApproxError::Unsupported(ApproxKind::E, "hausdorff_ball_distance needs two balls".into())),
    }
}

/// Seeded cloud of test points in the box `[-bound, bound]^dim`.
pub fn point_cloud(dim: usize, n: usize, bound: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-bound..bound)).collect())
        .collect()
}
