use alloc::vec;
use alloc::vec::Vec;

use super::energy::Functional;
use super::ProblemSpec;
use crate::lattice::{LatticeField, Site, Window};
use crate::spectrum::{SpectralProjector, Side};
use crate::{Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

/// Radii and reference vectors of the linking set
/// `M^[k] = {y + t z0k : y ∈ Ran P₋^[k], t ≥ r, ‖y‖² + t² ≤ ρ²}`.
#[derive(Clone, Debug)]
pub struct LinkingSet {
    pub k: usize,
    pub k_ref: usize,
    /// Unit vector in `Ran P₊` on the reference window.
    pub z0: LatticeField,
    /// Normalized `P₊^[k] S^[k] z0`.
    pub z0k: LatticeField,
    /// `‖P₊^[k] S^[k] z0‖`, required to exceed 2/3.
    pub overlap_norm: f64,
    pub seed: Site,
    pub seed_component: usize,
    pub delta: f64,
    /// `½(‖C‖ + |λ| + δ/2)`.
    pub c1: f64,
    /// Coefficient of the quartic lower bound, `λσ/(4N₄⁴)` times the ℓ⁴ mass of z0.
    pub c3: f64,
    pub n4: f64,
    pub t_star: f64,
    pub r: f64,
    pub rho: f64,
    pub m1: f64,
    pub big_m1: f64,
}

/// `J(t* z0k)` is guaranteed to be at least this when `‖V‖ ≤ δ/2`.
pub fn critical_floor(delta: f64, lambda: f64, sigma: f64) -> f64 {
    delta * delta / (16.0 * lambda * sigma)
}

fn seed_candidates(seed: Site, d: usize) -> Vec<(Site, usize)> {
    let mut out = Vec::new();
    for radius in 0..=2i64 {
        for a in -radius..=radius {
            for b in -radius..=radius {
                if a.abs().max(b.abs()) == radius {
                    for c in 0..d {
                        out.push(([seed[0] + a, seed[1] + b], c));
                    }
                }
            }
        }
    }
    out
}

/// Normalized `P₊ δ` on the reference window, cycling through nearby sites
/// and components until the projection is non-degenerate.
pub fn reference_vector(spec: &ProblemSpec, k_ref: usize, seed: Site) -> Result<(LatticeField, Site, usize)> {
    let gap = spec.gap().ok_or(Error::NotInGap { lambda: spec.lambda() })?;
    let fib = spec.fibered();
    let p = SpectralProjector::new(fib.as_ref(), k_ref, gap.lower, gap.upper, Side::Plus)?;
    let w = p.window();
    for (site, c) in seed_candidates(seed, spec.d()) {
        if w.cell_index(site).is_none() {
            continue;
        }
        let z = p.apply(&LatticeField::delta(w, spec.d(), site, c, 1.0)?)?;
        let n = z.norm_l2();
        if n >= 1e-8 {
            let vals = z.values().iter().map(|v| v.re / n).collect::<Vec<_>>();
            return Ok((LatticeField::from_real(w, spec.d(), &vals)?, site, c));
        }
    }
    Err(Error::DegenerateZ0)
}

/// Linking set for period `k`, with both spectral projectors of `C^[k]`.
pub fn build_linking_set(
    spec: &ProblemSpec,
    k: usize,
    seed: Site,
    k_ref: usize,
) -> Result<(LinkingSet, SpectralProjector, SpectralProjector)> {
    let gap = spec.gap().ok_or(Error::NotInGap { lambda: spec.lambda() })?;
    let (lambda, sigma) = (spec.lambda(), spec.sigma());
    let delta = gap.isolation(lambda);
    let (z0, seed, seed_component) = reference_vector(spec, k_ref, seed)?;
    let fib = spec.fibered();
    let (pp, pm) = SpectralProjector::pair(fib.as_ref(), k, gap.lower, gap.upper)?;
    let raw = pp.apply(&z0.periodize(spec.window(k)))?;
    let overlap_norm = raw.norm_l2();
    if overlap_norm <= 2.0 / 3.0 {
        return Err(Error::PeriodTooSmall { k, overlap: overlap_norm });
    }
    let vals: Vec<f64> = raw.values().iter().map(|v| v.re / overlap_norm).collect();
    let z0k = LatticeField::from_real(pp.window(), spec.d(), &vals)?;

    let kernel = pp.kernel();
    let n4 = match spec.window(k) {
        Window::HalfStrip { .. } => kernel.row_sum_bound(),
        _ => kernel.lp_certificate()?.n_p(4.0),
    };
    let c1 = 0.5 * (spec.op_norm() + lambda.abs() + 0.5 * delta);
    let c2 = lambda * sigma / (4.0 * n4.powi(4));
    let l4 = |f: &LatticeField| f.norm_lp(4.0).powi(4);
    let c3 = c2 * (0.5 * l4(&z0)).min(l4(&z0k));
    let t_star = (delta / (2.0 * lambda * sigma)).sqrt();
    let r_bound = t_star.min((delta * delta / (32.0 * c1 * lambda * sigma)).sqrt());
    let r = 0.9 * r_bound;
    // (δ/4)ρ² must dominate sup_t (C₁+δ/4)t² − C₃t⁴ = (C₁+δ/4)²/(4C₃)
    let a = c1 + 0.25 * delta;
    let rho = (a * a / (delta * c3)).sqrt().max(2.0 * t_star);
    let set = LinkingSet {
        k,
        k_ref,
        z0,
        z0k,
        overlap_norm,
        seed,
        seed_component,
        delta,
        c1,
        c3,
        n4,
        t_star,
        r,
        rho,
        m1: 0.5 * r,
        big_m1: rho,
    };
    Ok((set, pp, pm))
}

/// `(R^[k] a, z0)` summed over the stored cell of `a`.
pub fn reference_overlap(a: &LatticeField, z0: &LatticeField) -> f64 {
    let d = a.d();
    a.window()
        .sites()
        .enumerate()
        .filter(|(_, s)| z0.window().cell_index(*s).is_some())
        .map(|(i, s)| (0..d).map(|c| a.values()[i * d + c].re * z0.get(s, c).re).sum::<f64>())
        .sum()
}

/// Outcome of the constrained ascent.
#[derive(Clone, Debug)]
pub struct LinkingMaximum {
    pub a: LatticeField,
    pub energy: f64,
    pub t: f64,
    pub y_norm: f64,
    pub iterations: usize,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Projection onto `{t ≥ r} ∩ {‖y‖² + t² ≤ ρ²}`.
fn project(y: &mut [f64], t: &mut f64, r: f64, rho: f64) {
    *t = t.clamp(r, rho);
    let ny = dot(y, y).sqrt();
    let room = (rho * rho - *t * *t).max(0.0).sqrt();
    if ny > room {
        let s = if ny > 0.0 { room / ny } else { 0.0 };
        y.iter_mut().for_each(|v| *v *= s);
    }
}

/// Projected gradient ascent with Armijo backtracking of `J^[k]` over
/// `M^[k]`, started from `t* z0k`.
pub fn linking_maximize(spec: &ProblemSpec, set: &LinkingSet, p_minus: &SpectralProjector) -> Result<LinkingMaximum> {
    let window = set.z0k.window();
    let f = Functional::new(spec, window)?;
    let z = set.z0k.real_parts();
    let n = z.len();
    let assemble = |y: &[f64], t: f64| -> Vec<f64> { y.iter().zip(&z).map(|(a, b)| a + t * b).collect() };
    let mut y = vec![0.0; n];
    let mut t = set.t_star.clamp(set.r, set.rho);
    let mut x = assemble(&y, t);
    let mut val = f.value(&x);
    let mut g = vec![0.0; n];
    let mut step = 1.0 / (spec.op_norm() + spec.lambda().abs() + 1.0);
    let max_iter = 20_000;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        f.gradient(&x, &mut g);
        let gy = p_minus.apply_real(&g);
        let gt = dot(&g, &z);
        let mut accepted = None;
        while step > 1e-16 {
            let mut ny: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a + step * b).collect();
            let mut nt = t + step * gt;
            project(&mut ny, &mut nt, set.r, set.rho);
            let nx = assemble(&ny, nt);
            let nv = f.value(&nx);
            let moved: f64 = ny.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + (nt - t).powi(2);
            let ascent = dot(&gy, &ny.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()) + gt * (nt - t);
            if nv >= val + 1e-4 * ascent {
                accepted = Some((ny, nt, nx, nv, moved.sqrt()));
                break;
            }
            step *= 0.5;
        }
        let Some((ny, nt, nx, nv, moved)) = accepted else { break };
        // y stays in Ran P₋ up to round-off; re-project to stop drift
        y = p_minus.apply_real(&ny);
        t = nt;
        x = if moved > 0.0 { assemble(&y, t) } else { nx };
        val = if moved > 0.0 { f.value(&x) } else { nv };
        if moved < 1e-8 {
            break;
        }
        step *= 2.0;
    }
    let y_norm = dot(&y, &y).sqrt();
    let to_boundary = (t - set.r).min(set.rho - (y_norm * y_norm + t * t).sqrt());
    if to_boundary <= 1e-6 * set.rho {
        let start = assemble(&vec![0.0; n], set.t_star.clamp(set.r, set.rho));
        return Err(Error::BoundaryMaximum { boundary_value: val, interior_value: f.value(&start) });
    }
    Ok(LinkingMaximum { a: LatticeField::from_real(window, spec.d(), &x)?, energy: val, t, y_norm, iterations })
}
