//! Shared fixtures for the criterion benchmarks: a deterministic point
//! cloud and ready-made operators so the benches measure evaluation cost,
//! not setup.

use iprox::algorithms::{fb_operator, optimal_tau, Operator, SmoothTerm, SplitKind};
use iprox::approx::{ApproxOperator, ErrorPolicy};
use iprox::hjprox::HJConfig;
use iprox::approx::point_cloud;
use iprox::penalties::Penalty;

pub fn cloud(dim: usize, n: usize) -> Vec<Vec<f64>> {
    point_cloud(dim, n, 5.0, 42)
}

pub fn catalog(dim: usize) -> Vec<(&'static str, Penalty)> {
    vec![
        ("sq_l2", Penalty::sq_l2(1.0, dim)),
        ("l1", Penalty::l1(1.0, dim)),
        ("l2", Penalty::l2(1.0, dim)),
    ]
}

pub fn noisy_operator(p: &Penalty, eps: f64) -> ApproxOperator {
    ApproxOperator::type_a(p.clone(), 1.0, eps, ErrorPolicy::RandomSphere, 42).unwrap()
}

pub fn sampling_operator(p: &Penalty, samples: usize) -> ApproxOperator {
    ApproxOperator::type_f(p.clone(), HJConfig { lambda: 0.5, eps: 0.1, samples, seed: 42 })
        .unwrap()
}

pub fn fb_composite(dim: usize) -> Operator {
    let p = Penalty::sq_l2(1.0, dim);
    let diag: Vec<f64> = (0..dim).map(|i| 1.0 + i as f64 / dim as f64).collect();
    let mu = diag[0];
    let l_f = *diag.last().unwrap();
    let tau = optimal_tau(SplitKind::FB, mu, l_f);
    let f = SmoothTerm::quadratic_diag(diag, vec![0.5; dim]);
    let g = ApproxOperator::type_a(p, tau, 0.05, ErrorPolicy::RandomSphere, 42).unwrap();
    fb_operator(g, f, tau)
}
