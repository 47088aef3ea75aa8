//! Convex set values returned by set-valued maps: balls and segments carry
//! exact closed forms, everything else is represented through its support
//! function plus a membership predicate.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{add, dist, dot, norm, scale, sub};

type SupportClosure = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MemberClosure = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum ConvexSet {
    Ball { center: Vec<f64>, radius: f64 },
    Segment { a: Vec<f64>, b: Vec<f64> },
    SupportFn { dim: usize, support: SupportClosure, member: MemberClosure },
}

impl fmt::Debug for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexSet::Ball { center, radius } => {
                write!(f, "Ball(center={center:?}, radius={radius})")
            }
            ConvexSet::Segment { a, b } => write!(f, "Segment({a:?} -> {b:?})"),
            ConvexSet::SupportFn { dim, .. } => write!(f, "SupportFn(dim={dim})"),
        }
    }
}

impl ConvexSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        ConvexSet::Ball { center, radius }
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Self {
        ConvexSet::Segment { a, b }
    }

    pub fn support_fn<S, M>(dim: usize, support: S, member: M) -> Self
    where
        S: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        M: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        ConvexSet::SupportFn { dim, support: Arc::new(support), member: Arc::new(member) }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Segment { a, .. } => a.len(),
            ConvexSet::SupportFn { dim, .. } => *dim,
        }
    }

    /// Support function `sigma_K(u) = sup { <s, u> : s in K }`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } => dot(center, u) + radius * norm(u),
            ConvexSet::Segment { a, b } => dot(a, u).max(dot(b, u)),
            ConvexSet::SupportFn { support, .. } => support(u),
        }
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        match self {
            ConvexSet::Ball { center, radius } => dist(s, center) <= radius + tol,
            ConvexSet::Segment { a, b } => {
                let ab = sub(b, a);
                let len2 = dot(&ab, &ab);
                let t = if len2 < 1e-300 { 0.0 } else { (dot(&sub(s, a), &ab) / len2).clamp(0.0, 1.0) };
                dist(s, &add(a, &scale(&ab, t))) <= tol
            }
            ConvexSet::SupportFn { member, .. } => member(s),
        }
    }

    /// Point of `K` farthest in direction `u` (exact for balls and
    /// segments; unsupported for support-function sets).
    pub fn extreme_point(&self, u: &[f64]) -> Option<Vec<f64>> {
        match self {
            ConvexSet::Ball { center, radius } => {
                let n = norm(u);
                if n < 1e-300 {
                    return Some(center.clone());
                }
                Some(add(center, &scale(u, radius / n)))
            }
            ConvexSet::Segment { a, b } => {
                Some(if dot(a, u) >= dot(b, u) { a.clone() } else { b.clone() })
            }
            ConvexSet::SupportFn { .. } => None,
        }
    }

    /// Steiner point: exact for balls (center) and segments (midpoint); for
    /// support-function sets, spherical quadrature of `n * u * sigma(u)` with
    /// 256 angular nodes in 2D and a 302-node Fibonacci sphere in 3D.
    pub fn steiner_point(&self) -> Vec<f64> {
        match self {
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Segment { a, b } => scale(&add(a, b), 0.5),
            ConvexSet::SupportFn { dim, support, .. } => match dim {
                1 => {
                    let hi = support(&[1.0]);
                    let lo = -support(&[-1.0]);
                    vec![0.5 * (lo + hi)]
                }
                2 => {
                    let n = 256usize;
                    let mut acc = vec![0.0; 2];
                    for i in 0..n {
                        let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                        let u = [th.cos(), th.sin()];
                        let s = support(&u);
                        acc[0] += u[0] * s;
                        acc[1] += u[1] * s;
                    }
                    scale(&acc, 2.0 / n as f64)
                }
                3 => {
                    let n = 302usize;
                    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
                    let mut acc = vec![0.0; 3];
                    for i in 0..n {
                        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                        let r = (1.0 - z * z).sqrt();
                        let th = golden * i as f64;
                        let u = [r * th.cos(), r * th.sin(), z];
                        let s = support(&u);
                        for k in 0..3 {
                            acc[k] += u[k] * s;
                        }
                    }
                    scale(&acc, 3.0 / n as f64)
                }
                _ => panic!("steiner_point: quadrature only available for dim <= 3"),
            },
        }
    }

    /// Hausdorff distance to a ball, via `sup_u |sigma_K(u) - sigma_B(u)|`
    /// over the same quadrature nodes used for the Steiner point.
    pub fn hausdorff_to_ball(&self, center: &[f64], radius: f64) -> f64 {
        let b = ConvexSet::ball(center.to_vec(), radius);
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        match dim {
            1 => {
                for u in [[1.0], [-1.0]] {
                    worst = worst.max((self.support(&u) - b.support(&u)).abs());
                }
            }
            2 => {
                for i in 0..256 {
                    let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / 256.0;
                    let u = [th.cos(), th.sin()];
                    worst = worst.max((self.support(&u) - b.support(&u)).abs());
                }
            }
            3 => {
                let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
                for i in 0..302 {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / 302.0;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    let u = [r * th.cos(), r * th.sin(), z];
                    worst = worst.max((self.support(&u) - b.support(&u)).abs());
                }
            }
            _ => panic!("hausdorff_to_ball: dim <= 3 only"),
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_support_and_membership() {
        let s = ConvexSet::ball(vec![1.0, 0.0], 2.0);
        assert!((s.support(&[1.0, 0.0]) - 3.0).abs() < 1e-15);
        assert!(s.contains(&[3.0, 0.0], 1e-12));
        assert!(!s.contains(&[3.1, 0.0], 1e-12));
    }

    #[test]
    fn segment_projection_membership() {
        let s = ConvexSet::segment(vec![0.0, 0.0], vec![2.0, 0.0]);
        assert!(s.contains(&[1.0, 0.0], 1e-12));
        assert!(!s.contains(&[1.0, 0.1], 1e-3));
        assert_eq!(s.steiner_point(), vec![1.0, 0.0]);
    }

    #[test]
    fn steiner_of_ball_is_center_via_quadrature() {
        // exercise the quadrature path by wrapping a ball as a support fn
        let c = vec![0.5, -0.25];
        let cc = c.clone();
        let s = ConvexSet::support_fn(
            2,
            move |u: &[f64]| dot(&cc, u) + 1.5 * norm(u),
            |_s: &[f64]| true,
        );
        let st = s.steiner_point();
        assert!(dist(&st, &c) < 1e-12);

        let c3 = vec![0.1, 0.2, -0.3];
        let cc3 = c3.clone();
        let s3 = ConvexSet::support_fn(
            3,
            move |u: &[f64]| dot(&cc3, u) + 2.0 * norm(u),
            |_s: &[f64]| true,
        );
        assert!(dist(&s3.steiner_point(), &c3) < 1e-2);
    }

    #[test]
    fn hausdorff_to_matching_ball_is_zero() {
        let s = ConvexSet::ball(vec![1.0, 1.0], 0.5);
        assert!(s.hausdorff_to_ball(&[1.0, 1.0], 0.5) < 1e-14);
        assert!((s.hausdorff_to_ball(&[1.0, 1.0], 0.7) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn extreme_point_on_ball_boundary() {
        let s = ConvexSet::ball(vec![0.0, 0.0], 2.0);
        let p = s.extreme_point(&[3.0, 4.0]).unwrap();
        assert!(dist(&p, &[1.2, 1.6]) < 1e-14);
    }
}
