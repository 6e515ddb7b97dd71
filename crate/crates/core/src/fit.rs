//! Line fits and a derivative-free minimizer.

use alloc::vec::Vec;
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;


#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination, 1 for an exact line.
    pub r_squared: f64,
}

/// Ordinary least squares for `y ≈ slope·x + intercept`. Needs two distinct abscissae.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy <= 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Exponential fit `v_ρ ≈ C e^{−γρ}` of a profile sampled on rings `ρ = 0, 1, …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingFit {
    pub gamma: f64,
    pub prefactor: f64,
    /// R² of the log-linear fit; 1 when floor-saturated.
    pub quality: f64,
    /// Rings above the floor that entered the fit.
    pub rings_used: usize,
    /// Fewer than two rings above the floor: compact support, `γ = ∞`.
    pub floor_saturated: bool,
}

/// Values at or below `1e-14·max` are treated as the numerical floor.
pub const RING_FLOOR: f64 = 1e-14;

/// Least-squares fit of `log v_ρ` against `ρ` over the non-floor rings.
/// `None` if every ring is zero.
pub fn ring_decay_fit(rings: &[f64]) -> Option<RingFit> {
    let max = rings.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = rings
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > RING_FLOOR * max)
        .map(|(r, &v)| (r as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Some(RingFit { gamma: f64::INFINITY, prefactor: max, quality: 1.0, rings_used: pts.len(), floor_saturated: true });
    }
    let fit = fit_line(&pts)?;
    Some(RingFit {
        gamma: -fit.slope,
        prefactor: fit.intercept.exp(),
        quality: fit.r_squared,
        rings_used: pts.len(),
        floor_saturated: false,
    })
}

/// Nelder–Mead on a 2-dimensional objective. Returns the best point and value.
pub fn nelder_mead2<F>(f: F, start: [f64; 2], step: f64, tol: f64, max_iter: usize) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> f64,
{
    let mut simplex: Vec<([f64; 2], f64)> = [start, [start[0] + step, start[1]], [start[0], start[1] + step]]
        .into_iter()
        .map(|p| (p, f(p)))
        .collect();
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = simplex[1..]
            .iter()
            .map(|p| (p.0[0] - simplex[0].0[0]).abs().max((p.0[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if spread <= tol * (1.0 + simplex[0].1.abs()) && size <= tol.sqrt() {
            break;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let refl = lerp(worst.0, centroid, 2.0);
        let fr = f(refl);
        if fr < simplex[0].1 {
            let exp = lerp(worst.0, centroid, 3.0);
            let fe = f(exp);
            simplex[2] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (refl, fr);
        } else {
            let (anchor, fa) = if fr < worst.1 { (refl, fr) } else { (worst.0, worst.1) };
            let con = lerp(centroid, anchor, 0.5);
            let fc = f(con);
            if fc < fa {
                simplex[2] = (con, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex[1..].iter_mut() {
                    let p = lerp(best, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}
