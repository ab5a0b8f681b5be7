//! Independent reference computations for the integration tests.
//!
//! Nothing here calls the closed forms it is used to check.

#![allow(dead_code)]

/// 5-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]` with `panels`
/// equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let panel: f64 = GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        total += half * panel;
    }
    total
}

/// `∫₀ᵗ 2^(γτ) dτ` by quadrature, with enough panels that each spans at most
/// a quarter of an e-fold.
pub fn quad_delta_ratio(gamma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let efolds = gamma * t * std::f64::consts::LN_2;
    let panels = ((efolds * 4.0).ceil() as usize).max(8);
    integrate(|tau| (gamma * tau).exp2(), 0.0, t, panels)
}

/// Relative loss built from the quadrature, `(1 + ΔC/(scale·C0))^(−κ)`.
pub fn quad_relative_loss(kappa: f64, gamma: f64, t: f64, scale: f64) -> f64 {
    (1.0 + quad_delta_ratio(gamma, t) / scale).powf(-kappa)
}

/// Bisection for the first `t ≥ 0` with `f(t) = target`, where `f` is
/// decreasing. The upper bracket is doubled until it straddles the target;
/// iteration stops once the midpoint no longer moves.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    if f(0.0) <= target {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > target {
        lo = hi;
        hi *= 2.0;
        assert!(hi.is_finite(), "failed to bracket");
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Result of the log-grid search for the compute-optimal split.
#[derive(Debug, Clone, Copy)]
pub struct GridMin {
    pub n: f64,
    pub loss: f64,
    /// Largest loss change to an adjacent grid point at the minimizer.
    pub resolution: f64,
}

/// Brute-force minimum of `A·N^−α + B·(K/N)^−β + E` over `points`
/// log-spaced `N` in `[n_lo, n_hi]`, with `K = C/6`. Ties go to smaller N.
#[allow(clippy::too_many_arguments)]
pub fn grid_minimize(
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    e_floor: f64,
    compute_c: f64,
    n_lo: f64,
    n_hi: f64,
    points: usize,
) -> GridMin {
    let k = compute_c / 6.0;
    let (l_lo, l_hi) = (n_lo.ln(), n_hi.ln());
    let step = (l_hi - l_lo) / (points - 1) as f64;
    let loss = |i: usize| {
        let n = (l_lo + step * i as f64).exp();
        a * n.powf(-alpha) + b * (k / n).powf(-beta) + e_floor
    };
    let mut best = 0;
    let mut best_loss = loss(0);
    for i in 1..points {
        let l = loss(i);
        if l < best_loss {
            best = i;
            best_loss = l;
        }
    }
    let left = if best > 0 { loss(best - 1) } else { best_loss };
    let right = if best + 1 < points {
        loss(best + 1)
    } else {
        best_loss
    };
    GridMin {
        n: (l_lo + step * best as f64).exp(),
        loss: best_loss,
        resolution: (left - best_loss).max(right - best_loss),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
