//! Independent grid minimizers used to cross-check closed forms. Slow on
//! purpose: a coarse scan locates the basin, golden-section (1D) or local
//! grid refinement (2D) polishes the answer.

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` over `[-bound, bound]` by a 200k-point scan followed by
/// golden-section refinement. Returns `(argmin, min)`.
pub fn grid_min_1d(f: &dyn Fn(&[f64]) -> f64, bound: f64) -> (f64, f64) {
    let n = 200_000usize;
    let step = 2.0 * bound / n as f64;
    let mut best_i = 0usize;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let x = -bound + i as f64 * step;
        let v = f(&[x]);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = -bound + best_i.saturating_sub(1) as f64 * step;
    let mut b = (-bound + (best_i + 1) as f64 * step).min(bound);
    // Golden-section search; the basin may be nonsmooth but is unimodal on
    // the bracketing interval for all catalog objectives.
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(&[c]);
    let mut fd = f(&[d]);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(&[c]);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(&[d]);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(&[x]))
}

/// Minimize `f` over the square `[-bound, bound]^2` with a 700x700 scan and
/// three rounds of 41x41 local refinement. Returns `(argmin, min)`.
pub fn grid_min_2d(f: &dyn Fn(&[f64]) -> f64, bound: f64) -> (Vec<f64>, f64) {
    let n = 700usize;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut half = bound;
    let mut best = f64::INFINITY;
    let mut bx = 0.0;
    let mut by = 0.0;
    for round in 0..4 {
        let m = if round == 0 { n } else { 40 };
        let step = 2.0 * half / m as f64;
        for i in 0..=m {
            let x = cx - half + i as f64 * step;
            for j in 0..=m {
                let y = cy - half + j as f64 * step;
                let v = f(&[x, y]);
                if v < best {
                    best = v;
                    bx = x;
                    by = y;
                }
            }
        }
        cx = bx;
        cy = by;
        half = step * 2.0;
    }
    (vec![bx, by], best)
}

/// Central finite difference of `f` along coordinate `i` at `x`.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// True when `x` is within `band` of a nonsmooth locus listed in `loci`
/// (each locus is a coordinate hyperplane value applied per component).
pub fn near_locus(x: &[f64], loci: &[f64], band: f64) -> bool {
    x.iter().any(|t| loci.iter().any(|l| (t.abs() - l).abs() < band || (t - l).abs() < band))
}
