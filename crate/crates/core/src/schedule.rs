//! Per-iteration error schedules (eps_k, gamma_k).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    Constant,
    /// eps0 * ratio^k with ratio in (0, 1).
    Geometric { ratio: f64 },
    /// eps0 / (k+1)^p with p > 0.
    Power { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub eps0: f64,
    pub gamma0: f64,
}

impl Schedule {
    pub fn constant(eps0: f64, gamma0: f64) -> Self {
        Schedule { kind: ScheduleKind::Constant, eps0, gamma0 }
    }

    pub fn geometric(eps0: f64, gamma0: f64, ratio: f64) -> Self {
        assert!(ratio > 0.0 && ratio < 1.0, "geometric ratio must lie in (0,1)");
        Schedule { kind: ScheduleKind::Geometric { ratio }, eps0, gamma0 }
    }

    pub fn power(eps0: f64, gamma0: f64, p: f64) -> Self {
        assert!(p > 0.0, "power exponent must be positive");
        Schedule { kind: ScheduleKind::Power { p }, eps0, gamma0 }
    }

    fn factor(&self, k: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => 1.0,
            ScheduleKind::Geometric { ratio } => ratio.powi(k as i32),
            ScheduleKind::Power { p } => ((k + 1) as f64).powf(-p),
        }
    }

    pub fn eps(&self, k: usize) -> f64 {
        self.eps0 * self.factor(k)
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.gamma0 * self.factor(k)
    }

    pub fn is_vanishing(&self) -> bool {
        !matches!(self.kind, ScheduleKind::Constant) || (self.eps0 == 0.0 && self.gamma0 == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let s = Schedule::constant(0.1, 0.2);
        assert_eq!(s.eps(0), 0.1);
        assert_eq!(s.eps(100), 0.1);
        assert_eq!(s.gamma(7), 0.2);
        assert!(!s.is_vanishing());

        let s = Schedule::geometric(1.0, 0.0, 0.5);
        assert_eq!(s.eps(3), 0.125);
        assert!(s.is_vanishing());

        let s = Schedule::power(1.0, 1.0, 1.0);
        assert!((s.eps(3) - 0.25).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn rejects_bad_ratio() {
        Schedule::geometric(1.0, 0.0, 1.0);
    }
}
