//! Catalog of test penalties with closed-form proximal operators, Moreau
//! envelopes, and the convex potential `psi` whose gradient is `prox_phi`.
//!
//! Every entry also exposes structural constants: the weak-convexity
//! modulus `rho`, the strong-convexity modulus `mu` (zero when merely
//! convex), and the Lipschitz constant `L_psi` of `prox_{lambda phi}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm, scale, sub};
use crate::sets::ConvexSet;

#[derive(Debug, Error, PartialEq)]
pub enum PenaltyError {
    #[error("dimension mismatch: penalty has dim {expected}, point has dim {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("prox parameter {lambda} at or above the prox bound {bound}")]
    LambdaOutOfRange { lambda: f64, bound: f64 },
    #[error("no closed form for the epsilon-subdifferential of `{0}`")]
    NoClosedForm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PenaltyKind {
    /// (gamma/2) ||x||^2, gamma-strongly convex.
    SqL2 { gamma: f64 },
    /// gamma ||x||_2.
    L2 { gamma: f64 },
    /// gamma ||x||_1.
    L1 { gamma: f64 },
    /// (1/2) x^T Q x with diagonal positive Q.
    AnisoQuad { diag: Vec<f64> },
    /// Constant penalty; prox is the identity.
    Const { c: f64 },
    /// Minimax concave penalty, separable, weakly convex with rho = 1/b.
    Mcp { lam: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub kind: PenaltyKind,
    pub dim: usize,
    /// Radius limiting grid-oracle evaluation.
    pub domain_bound: f64,
}

fn mcp_scalar(t: f64, lam: f64, b: f64) -> f64 {
    let a = t.abs();
    if a <= b * lam {
        lam * a - t * t / (2.0 * b)
    } else {
        b * lam * lam / 2.0
    }
}

/// Firm thresholding: prox of the scalar MCP with prox parameter `lambda < b`.
fn mcp_prox_scalar(y: f64, lambda: f64, lam: f64, b: f64) -> f64 {
    let a = y.abs();
    if a <= lambda * lam {
        0.0
    } else if a <= b * lam {
        y.signum() * (a - lambda * lam) / (1.0 - lambda / b)
    } else {
        y
    }
}

impl Penalty {
    pub fn sq_l2(gamma: f64, dim: usize) -> Self {
        Penalty { kind: PenaltyKind::SqL2 { gamma }, dim, domain_bound: 10.0 }
    }
    pub fn l2(gamma: f64, dim: usize) -> Self {
        Penalty { kind: PenaltyKind::L2 { gamma }, dim, domain_bound: 10.0 }
    }
    pub fn l1(gamma: f64, dim: usize) -> Self {
        Penalty { kind: PenaltyKind::L1 { gamma }, dim, domain_bound: 10.0 }
    }
    pub fn aniso_quad(diag: Vec<f64>) -> Self {
        let dim = diag.len();
        Penalty { kind: PenaltyKind::AnisoQuad { diag }, dim, domain_bound: 10.0 }
    }
    pub fn constant(c: f64, dim: usize) -> Self {
        Penalty { kind: PenaltyKind::Const { c }, dim, domain_bound: 10.0 }
    }
    pub fn mcp(lam: f64, b: f64, dim: usize) -> Self {
        Penalty { kind: PenaltyKind::Mcp { lam, b }, dim, domain_bound: 10.0 }
    }

    /// Build a catalog entry from its CLI name and `key=value` parameters.
    pub fn from_name(name: &str, params: &[(String, f64)], dim: usize) -> Result<Self, PenaltyError> {
        let get = |key: &str, default: f64| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        match name {
            "sq_l2" => Ok(Penalty::sq_l2(get("gamma", 1.0), dim)),
            "l2" => Ok(Penalty::l2(get("gamma", 1.0), dim)),
            "l1" => Ok(Penalty::l1(get("gamma", 1.0), dim)),
            "aniso_quad" => {
                let mut diag: Vec<f64> = Vec::with_capacity(dim);
                for i in 0..dim {
                    diag.push(get(&format!("q{i}"), 1.0 + i as f64));
                }
                Ok(Penalty::aniso_quad(diag))
            }
            "const" => Ok(Penalty::constant(get("c", 0.0), dim)),
            "mcp" => {
                let b = get("b", 2.0);
                if b <= 1.0 {
                    return Err(PenaltyError::InvalidParameter(
                        "mcp requires b > 1 so that rho = 1/b < 1".into(),
                    ));
                }
                Ok(Penalty::mcp(get("lam", 1.0), b, dim))
            }
            _ => Err(PenaltyError::InvalidParameter(format!("unknown penalty `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PenaltyKind::SqL2 { .. } => "sq_l2",
            PenaltyKind::L2 { .. } => "l2",
            PenaltyKind::L1 { .. } => "l1",
            PenaltyKind::AnisoQuad { .. } => "aniso_quad",
            PenaltyKind::Const { .. } => "const",
            PenaltyKind::Mcp { .. } => "mcp",
        }
    }

    /// Weak-convexity modulus.
    pub fn rho(&self) -> f64 {
        match self.kind {
            PenaltyKind::Mcp { b, .. } => 1.0 / b,
            _ => 0.0,
        }
    }

    /// Strong-convexity modulus (zero for merely convex entries).
    pub fn mu(&self) -> f64 {
        match &self.kind {
            PenaltyKind::SqL2 { gamma } => *gamma,
            PenaltyKind::AnisoQuad { diag } => diag.iter().cloned().fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    /// Lipschitz constant of `prox_{lambda phi}`: 1/(1 + lambda mu) for
    /// strongly convex entries, 1/(1 - lambda rho) for weakly convex ones.
    pub fn l_psi(&self, lambda: f64) -> f64 {
        let rho = self.rho();
        if rho > 0.0 {
            1.0 / (1.0 - lambda * rho)
        } else {
            1.0 / (1.0 + lambda * self.mu())
        }
    }

    /// Upper bound on lambda for the prox to stay single-valued (1/rho for
    /// weakly convex entries, +inf otherwise).
    pub fn prox_bound(&self) -> f64 {
        let rho = self.rho();
        if rho > 0.0 {
            1.0 / rho
        } else {
            f64::INFINITY
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), PenaltyError> {
        if x.len() != self.dim {
            return Err(PenaltyError::DimMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    fn check_lambda(&self, lambda: f64) -> Result<(), PenaltyError> {
        let bound = self.prox_bound();
        if lambda <= 0.0 || lambda >= bound {
            return Err(PenaltyError::LambdaOutOfRange { lambda, bound });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PenaltyError> {
        self.check_dim(x)?;
        Ok(match &self.kind {
            PenaltyKind::SqL2 { gamma } => 0.5 * gamma * dot(x, x),
            PenaltyKind::L2 { gamma } => gamma * norm(x),
            PenaltyKind::L1 { gamma } => gamma * x.iter().map(|t| t.abs()).sum::<f64>(),
            PenaltyKind::AnisoQuad { diag } => {
                0.5 * x.iter().zip(diag).map(|(t, q)| q * t * t).sum::<f64>()
            }
            PenaltyKind::Const { c } => *c,
            PenaltyKind::Mcp { lam, b } => x.iter().map(|t| mcp_scalar(*t, *lam, *b)).sum(),
        })
    }

    /// Closed-form `prox_{lambda phi}(y)`. At multivalued boundary points
    /// (MCP thresholds) the smaller-norm minimizer is returned.
    pub fn prox(&self, lambda: f64, y: &[f64]) -> Result<Vec<f64>, PenaltyError> {
        self.check_dim(y)?;
        self.check_lambda(lambda)?;
        Ok(match &self.kind {
            PenaltyKind::SqL2 { gamma } => scale(y, 1.0 / (1.0 + lambda * gamma)),
            PenaltyKind::L2 { gamma } => {
                let t = lambda * gamma;
                let n = norm(y);
                scale(y, 1.0 - t / n.max(t))
            }
            PenaltyKind::L1 { gamma } => {
                let t = lambda * gamma;
                y.iter().map(|v| v.signum() * (v.abs() - t).max(0.0)).collect()
            }
            PenaltyKind::AnisoQuad { diag } => {
                y.iter().zip(diag).map(|(v, q)| v / (1.0 + lambda * q)).collect()
            }
            PenaltyKind::Const { .. } => y.to_vec(),
            PenaltyKind::Mcp { lam, b } => {
                y.iter().map(|v| mcp_prox_scalar(*v, lambda, *lam, *b)).collect()
            }
        })
    }

    /// Moreau envelope `u_lambda(y) = phi(z) + ||z - y||^2 / (2 lambda)` at
    /// the closed-form prox point `z`.
    pub fn moreau_envelope(&self, lambda: f64, y: &[f64]) -> Result<f64, PenaltyError> {
        let z = self.prox(lambda, y)?;
        let d = sub(&z, y);
        Ok(self.eval(&z)? + dot(&d, &d) / (2.0 * lambda))
    }

    /// Potential `psi(y) = ||y||^2 / 2 - u_1(y)` (additive constant fixed to
    /// zero); its gradient is `prox_phi` wherever the prox is continuous.
    pub fn psi(&self, y: &[f64]) -> Result<f64, PenaltyError> {
        Ok(0.5 * dot(y, y) - self.moreau_envelope(1.0, y)?)
    }

    /// Closed-form epsilon-subdifferential of `phi` at `x` for the convex
    /// entries that admit one: `sq_l2` (any dim), `l2` (any dim), `l1` (1D).
    pub fn eps_subdifferential(&self, eps: f64, x: &[f64]) -> Result<ConvexSet, PenaltyError> {
        self.check_dim(x)?;
        if eps < 0.0 {
            return Err(PenaltyError::InvalidParameter("eps must be >= 0".into()));
        }
        match &self.kind {
            // d_eps[(g/2)||.||^2](x) = { s : ||s - g x||^2 <= 2 g eps }
            // (quadratic case of Hiriart-Urruty/Lemarechal Ex. XI.1.1.2)
            PenaltyKind::SqL2 { gamma } => {
                Ok(ConvexSet::ball(scale(x, *gamma), (2.0 * gamma * eps).sqrt()))
            }
            // d_eps[g||.||](x) = { s : ||s|| <= g, g||x|| - <s,x> <= eps }
            PenaltyKind::L2 { gamma } => {
                let g = *gamma;
                let xc = x.to_vec();
                let nx = norm(x);
                Ok(ConvexSet::support_fn(
                    x.len(),
                    {
                        let xc = xc.clone();
                        // sigma_K(u) = max { <s,u> : ||s|| <= g, <s,x> >= g||x|| - eps }
                        move |u: &[f64]| support_ball_halfspace(u, g, &xc, g * nx - eps)
                    },
                    move |s: &[f64]| norm(s) <= g + 1e-12 && g * norm(&xc) - dot(s, &xc) <= eps + 1e-12,
                ))
            }
            PenaltyKind::L1 { gamma } if self.dim == 1 => {
                let g = *gamma;
                let t = x[0];
                let (lo, hi) = if t > 0.0 {
                    ((g - eps / t).max(-g), g)
                } else if t < 0.0 {
                    (-g, (-g + eps / (-t)).min(g))
                } else {
                    (-g, g)
                };
                Ok(ConvexSet::segment(vec![lo], vec![hi]))
            }
            _ => Err(PenaltyError::NoClosedForm(self.name().to_string())),
        }
    }

    /// Epsilon-subdifferential of the potential `psi` at `x`. Exact ball for
    /// `sq_l2`; for other entries the enclosing ball
    /// `B(prox(x), sqrt(2 L_psi eps))` is returned together with an `exact`
    /// flag.
    pub fn psi_eps_subdifferential(
        &self,
        eps: f64,
        x: &[f64],
    ) -> Result<(ConvexSet, bool), PenaltyError> {
        self.check_dim(x)?;
        match &self.kind {
            PenaltyKind::SqL2 { gamma } => {
                // psi = ||x||^2 / (2(g+1)): ball of radius sqrt(2 eps/(g+1)),
                // which coincides with the generic enclosing radius here
                let c = 1.0 / (gamma + 1.0);
                Ok((ConvexSet::ball(scale(x, c), (2.0 * eps * c).sqrt()), true))
            }
            _ => {
                let center = self.prox(1.0, x)?;
                let r = (2.0 * self.l_psi(1.0) * eps).sqrt();
                Ok((ConvexSet::ball(center, r), false))
            }
        }
    }

    /// Prox of the elastic-net style penalty `gamma (phi + alpha ||.||^2)`,
    /// computed directly (not through the scaling-transfer identity).
    pub fn prox_elastic(
        &self,
        gamma: f64,
        alpha: f64,
        z: &[f64],
    ) -> Result<Vec<f64>, PenaltyError> {
        self.check_dim(z)?;
        let s = 1.0 + 2.0 * alpha * gamma;
        Ok(match &self.kind {
            PenaltyKind::SqL2 { gamma: g } => scale(z, 1.0 / (1.0 + gamma * g + 2.0 * alpha * gamma)),
            PenaltyKind::L1 { gamma: g } => z
                .iter()
                .map(|v| v.signum() * (v.abs() - gamma * g).max(0.0) / s)
                .collect(),
            PenaltyKind::L2 { gamma: g } => {
                let n = norm(z);
                let t = gamma * g;
                scale(z, (n - t).max(0.0) / (n.max(1e-300) * s))
            }
            PenaltyKind::AnisoQuad { diag } => z
                .iter()
                .zip(diag)
                .map(|(v, q)| v / (1.0 + gamma * q + 2.0 * alpha * gamma))
                .collect(),
            PenaltyKind::Const { .. } => scale(z, 1.0 / s),
            PenaltyKind::Mcp { .. } => {
                // No separate closed form; callers cross-check this entry
                // against a grid oracle.
                return Err(PenaltyError::NoClosedForm("mcp elastic prox".into()));
            }
        })
    }

    /// Both sides of the scaling-transfer identity
    /// `prox_{gamma(phi + alpha ||.||^2)}(z) = prox_{gamma phi / (2 alpha gamma + 1)}(z / (2 alpha gamma + 1))`.
    pub fn prox_scaling_transfer(
        &self,
        gamma: f64,
        alpha: f64,
        z: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), PenaltyError> {
        let s = 2.0 * alpha * gamma + 1.0;
        let rhs = self.prox(gamma / s, &scale(z, 1.0 / s))?;
        let lhs = match self.prox_elastic(gamma, alpha, z) {
            Ok(v) => v,
            Err(PenaltyError::NoClosedForm(_)) => {
                // 1D grid oracle on phi + alpha ||.||^2.
                if self.dim != 1 {
                    return Err(PenaltyError::NoClosedForm(self.name().to_string()));
                }
                let zz = z.to_vec();
                let p = self.clone();
                let obj = move |x: &[f64]| {
                    p.eval(x).unwrap() + alpha * x[0] * x[0] + (x[0] - zz[0]).powi(2) / (2.0 * gamma)
                };
                vec![crate::oracle::grid_min_1d(&obj, self.domain_bound).0]
            }
            Err(e) => return Err(e),
        };
        Ok((lhs, rhs))
    }

    /// Split `phi = smooth + convex`: the smooth gradient `x -> rho x` and the
    /// convexified penalty `phi + (rho/2)||.||^2` (returned as a closure pair
    /// whose prox is computed through the scaling-transfer identity).
    pub fn weakly_convex_split(&self, gamma: f64) -> Result<SplitScheme, PenaltyError> {
        let rho = self.rho();
        if rho > 0.0 && !(gamma > 0.0 && gamma < 1.0 / rho) {
            return Err(PenaltyError::InvalidParameter(format!(
                "gamma {gamma} outside (0, {})",
                1.0 / rho
            )));
        }
        Ok(SplitScheme { penalty: self.clone(), rho, gamma })
    }
}

/// The convexification scheme from the weakly-convex-to-convex splitting:
/// one step is `x <- prox_{gamma(phi + rho/2 ||.||^2)}(x - gamma rho x)`.
pub struct SplitScheme {
    penalty: Penalty,
    pub rho: f64,
    pub gamma: f64,
}

impl SplitScheme {
    pub fn smooth_grad(&self, x: &[f64]) -> Vec<f64> {
        scale(x, self.rho)
    }

    pub fn convex_part_eval(&self, x: &[f64]) -> Result<f64, PenaltyError> {
        Ok(self.penalty.eval(x)? + 0.5 * self.rho * dot(x, x))
    }

    pub fn step(&self, x: &[f64]) -> Result<Vec<f64>, PenaltyError> {
        let forward = scale(x, 1.0 - self.gamma * self.rho);
        // alpha = rho/2 in the transfer identity.
        let s = self.gamma * self.rho + 1.0;
        self.penalty.prox(self.gamma / s, &scale(&forward, 1.0 / s))
    }
}

/// Support function of `{ s : ||s|| <= r, <s, x> >= c }` (a ball capped by a
/// half-space), evaluated by maximizing over the cap boundary analytically.
fn support_ball_halfspace(u: &[f64], r: f64, x: &[f64], c: f64) -> f64 {
    let nx = norm(x);
    if nx < 1e-14 || c <= -r * nx {
        // Constraint inactive: plain ball.
        return r * norm(u);
    }
    let c = c.min(r * nx);
    // Decompose u into components along x and orthogonal to x; the maximizer
    // lies in span(x, u).
    let xhat = scale(x, 1.0 / nx);
    let a = dot(u, &xhat);
    let perp = sub(u, &scale(&xhat, a));
    let b = norm(&perp);
    let t0 = c / nx; // minimal along-x coordinate of s
    // s = p * xhat + q * perp_hat, p >= t0, p^2 + q^2 <= r^2; maximize a p + b q.
    // Unconstrained-on-cap maximizer: p = r a / ||u||.
    let nu = (a * a + b * b).sqrt();
    if nu < 1e-300 {
        return 0.0;
    }
    let p_star = r * a / nu;
    if p_star >= t0 {
        r * nu
    } else {
        // Clamp to the cap boundary p = t0.
        let q = (r * r - t0 * t0).max(0.0).sqrt();
        a * t0 + b * q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use crate::oracle;

    #[test]
    fn eval_basics() {
        let p = Penalty::sq_l2(1.0, 2);
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), 0.0);
        let p = Penalty::l2(1.0, 2);
        assert!((p.eval(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        let p = Penalty::mcp(1.0, 2.0, 1);
        assert_eq!(p.eval(&[0.0]).unwrap(), 0.0);
        assert!(p.eval(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn prox_sq_l2_closed_form() {
        let p = Penalty::sq_l2(3.0, 2);
        let y = [2.0, -4.0];
        let z = p.prox(1.0, &y).unwrap();
        assert!(dist(&z, &[0.5, -1.0]) < 1e-15);
    }

    #[test]
    fn prox_l2_matches_grid_oracle() {
        let p = Penalty::l2(1.0, 2);
        let z = p.prox(1.0, &[3.0, 4.0]).unwrap();
        assert!(dist(&z, &[2.4, 3.2]) < 1e-12);
        let obj = |x: &[f64]| p.eval(x).unwrap() + 0.5 * dist(x, &[3.0, 4.0]).powi(2);
        let (zg, _) = oracle::grid_min_2d(&obj, 6.0);
        assert!(dist(&z, &zg) < 1e-5);
    }

    #[test]
    fn prox_const_is_identity() {
        let p = Penalty::constant(7.0, 3);
        let y = [1.0, -2.0, 0.5];
        assert_eq!(p.prox(1.0, &y).unwrap(), y.to_vec());
    }

    #[test]
    fn prox_mcp_matches_grid_oracle() {
        let p = Penalty::mcp(1.0, 2.0, 1);
        for y in [-3.0, -1.7, -0.5, 0.0, 0.4, 1.2, 1.9, 2.5, 4.0] {
            let z = p.prox(1.0, &[y]).unwrap();
            let obj = |x: &[f64]| p.eval(x).unwrap() + 0.5 * (x[0] - y).powi(2);
            let (zg, _) = oracle::grid_min_1d(&obj, 8.0);
            assert!(
                (z[0] - zg).abs() < 1e-5,
                "mcp prox mismatch at y={y}: closed {} vs grid {zg}",
                z[0]
            );
        }
    }

    #[test]
    fn prox_rejects_lambda_above_bound() {
        let p = Penalty::mcp(1.0, 2.0, 1);
        assert!(matches!(
            p.prox(2.0, &[1.0]),
            Err(PenaltyError::LambdaOutOfRange { .. })
        ));
    }

    #[test]
    fn moreau_envelope_values() {
        // sq_l2 gamma=1, lambda=1, y=2 -> 1
        let p = Penalty::sq_l2(1.0, 1);
        assert!((p.moreau_envelope(1.0, &[2.0]).unwrap() - 1.0).abs() < 1e-14);
        // l1 gamma=1, lambda=1, y=0.5 -> Huber value 0.125
        let p = Penalty::l1(1.0, 1);
        assert!((p.moreau_envelope(1.0, &[0.5]).unwrap() - 0.125).abs() < 1e-14);
        let obj = |x: &[f64]| p.eval(x).unwrap() + 0.5 * (x[0] - 0.5).powi(2);
        let (_, val) = oracle::grid_min_1d(&obj, 5.0);
        assert!((val - 0.125).abs() < 1e-9);
    }

    #[test]
    fn moreau_at_minimizer_equals_value() {
        let p = Penalty::l1(1.0, 2);
        assert!((p.moreau_envelope(1.0, &[0.0, 0.0]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn psi_closed_forms() {
        // sq_l2: psi(y) = ||y||^2 / (2(gamma+1))
        let p = Penalty::sq_l2(3.0, 2);
        let y = [1.0, 2.0];
        assert!((p.psi(&y).unwrap() - dot(&y, &y) / 8.0).abs() < 1e-14);
        // l2: psi constant inside the ball of radius gamma
        let p = Penalty::l2(1.0, 2);
        let a = p.psi(&[0.1, 0.2]).unwrap();
        let b = p.psi(&[-0.3, 0.4]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn psi_gradient_is_prox() {
        let p = Penalty::l1(1.0, 2);
        let y = [1.7, -2.3];
        let h = 1e-5;
        let z = p.prox(1.0, &y).unwrap();
        for i in 0..2 {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[i] += h;
            ym[i] -= h;
            let g = (p.psi(&yp).unwrap() - p.psi(&ym).unwrap()) / (2.0 * h);
            assert!((g - z[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn eps_subdiff_closed_forms() {
        // sq_l2: ball center gamma*x radius sqrt(2*gamma*eps)
        let p = Penalty::sq_l2(2.0, 2);
        let s = p.eps_subdifferential(0.5, &[1.0, 0.0]).unwrap();
        match s {
            ConvexSet::Ball { center, radius } => {
                assert!(dist(&center, &[2.0, 0.0]) < 1e-15);
                assert!((radius - 2.0f64.sqrt()).abs() < 1e-15);
            }
            _ => panic!("expected ball"),
        }
        // l2 at 0: whole ball of radius gamma
        let p = Penalty::l2(1.5, 2);
        let s = p.eps_subdifferential(0.3, &[0.0, 0.0]).unwrap();
        assert!(s.contains(&[1.4, 0.0], 1e-9));
        assert!(!s.contains(&[1.6, 0.0], 1e-9));
        // l1 1D at x=2, eps=0: {1}
        let p = Penalty::l1(1.0, 1);
        match p.eps_subdifferential(0.0, &[2.0]).unwrap() {
            ConvexSet::Segment { a, b } => {
                assert!((a[0] - 1.0).abs() < 1e-15 && (b[0] - 1.0).abs() < 1e-15);
            }
            _ => panic!("expected segment"),
        }
        assert!(matches!(
            Penalty::mcp(1.0, 2.0, 1).eps_subdifferential(0.1, &[1.0]),
            Err(PenaltyError::NoClosedForm(_))
        ));
    }

    #[test]
    fn scaling_transfer_holds() {
        let p = Penalty::l1(1.0, 1);
        let (lhs, rhs) = p.prox_scaling_transfer(1.0, 0.5, &[3.0]).unwrap();
        assert!(dist(&lhs, &rhs) < 1e-12);
        let p = Penalty::l2(1.0, 2);
        let (lhs, rhs) = p.prox_scaling_transfer(2.0, 0.25, &[1.0, 1.0]).unwrap();
        assert!(dist(&lhs, &rhs) < 1e-10);
        // mcp with alpha >= rho/2 convexifies; both sides via independent paths
        let p = Penalty::mcp(1.0, 2.0, 1);
        let (lhs, rhs) = p.prox_scaling_transfer(1.0, 0.25, &[1.0]).unwrap();
        assert!(dist(&lhs, &rhs) < 1e-4);
    }

    #[test]
    fn weakly_convex_split_scheme() {
        // convex entry: smooth part vanishes
        let p = Penalty::l1(1.0, 1);
        let s = p.weakly_convex_split(0.5).unwrap();
        assert_eq!(s.smooth_grad(&[2.0]), vec![0.0]);
        assert_eq!(s.convex_part_eval(&[2.0]).unwrap(), 2.0);

        // mcp: convexified part passes a sampled midpoint-convexity test
        let p = Penalty::mcp(1.0, 2.0, 1);
        let s = p.weakly_convex_split(1.0).unwrap();
        let mut t = -3.0;
        while t < 3.0 {
            let mut u = t + 0.1;
            while u < 3.0 {
                let mid = s.convex_part_eval(&[(t + u) / 2.0]).unwrap();
                let avg = (s.convex_part_eval(&[t]).unwrap() + s.convex_part_eval(&[u]).unwrap()) / 2.0;
                assert!(mid <= avg + 1e-12, "midpoint convexity fails at ({t},{u})");
                u += 0.37;
            }
            t += 0.29;
        }

        // one scheme step decreases phi from a non-critical start
        let x0 = [1.2];
        let x1 = s.step(&x0).unwrap();
        assert!(p.eval(&x1).unwrap() < p.eval(&x0).unwrap());
    }

    #[test]
    fn prox_is_l_psi_lipschitz() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cat = [
            Penalty::sq_l2(1.0, 2),
            Penalty::l2(1.0, 2),
            Penalty::l1(1.0, 2),
            Penalty::aniso_quad(vec![1.0, 3.0]),
            Penalty::constant(0.0, 2),
            Penalty::mcp(1.0, 2.0, 2),
        ];
        for p in &cat {
            let l = p.l_psi(1.0);
            for _ in 0..200 {
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let dz = dist(&p.prox(1.0, &x).unwrap(), &p.prox(1.0, &y).unwrap());
                assert!(dz <= l * dist(&x, &y) + 1e-12, "{} not L_psi-Lipschitz", p.name());
            }
        }
    }
}
