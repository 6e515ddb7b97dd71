use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fiber_eigenvalues;
use crate::fit::nelder_mead2;
use crate::lattice::BlockStencil;
use crate::{Error, Result};

/// Uniform `M×M` Brillouin-zone grid `2πj/M`, wrapped into `[−π, π)`,
/// in row-major order over `(j₁, j₂)`.
pub fn bz_grid(m: usize) -> Vec<[f64; 2]> {
    let wrap = |j: usize| {
        let x = 2.0 * PI * j as f64 / m as f64;
        if x >= PI {
            x - 2.0 * PI
        } else {
            x
        }
    };
    (0..m * m).map(|i| [wrap(i / m), wrap(i % m)]).collect()
}

/// Sorted fiber eigenvalues sampled on a BZ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BandStructure {
    pub m: usize,
    pub kappas: Vec<[f64; 2]>,
    /// `bands[p][j]`: j-th eigenvalue (ascending) at `kappas[p]`.
    pub bands: Vec<Vec<f64>>,
}

impl BandStructure {
    pub fn d(&self) -> usize {
        self.bands.first().map_or(0, Vec::len)
    }

    /// `(min, max)` of sheet `j` over the grid, with the arg-extrema.
    pub fn sheet_range(&self, j: usize) -> ((f64, usize), (f64, usize)) {
        let mut lo = (f64::INFINITY, 0);
        let mut hi = (f64::NEG_INFINITY, 0);
        for (p, b) in self.bands.iter().enumerate() {
            if b[j] < lo.0 {
                lo = (b[j], p);
            }
            if b[j] > hi.0 {
                hi = (b[j], p);
            }
        }
        (lo, hi)
    }
}

/// Samples `C(κ)` on the `M×M` grid. Requires `M ≥ 2R+1`.
pub fn band_structure(stencil: &BlockStencil, m: usize) -> Result<BandStructure> {
    check_grid(stencil, m)?;
    let kappas = bz_grid(m);
    let bands = kappas.iter().map(|&k| fiber_eigenvalues(stencil, k)).collect();
    Ok(BandStructure { m, kappas, bands })
}

pub fn check_grid(stencil: &BlockStencil, m: usize) -> Result<()> {
    if m < 2 * stencil.radius() + 1 {
        return Err(Error::InvalidParameter(format!(
            "BZ grid {m} must be at least 2R+1 = {}",
            2 * stencil.radius() + 1
        )));
    }
    Ok(())
}

/// Open interval between band sheets `below` and `below + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGap {
    pub lower: f64,
    pub upper: f64,
    /// Index of the highest sheet below the gap.
    pub below: usize,
    pub inf_positive: bool,
    pub spectrum_below: bool,
    pub spectrum_above: bool,
}

impl SpectralGap {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// All hypotheses for the soliton search hold.
    pub fn qualifies(&self) -> bool {
        self.inf_positive && self.spectrum_below && self.spectrum_above && self.width() > 0.0
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lower < lambda && lambda < self.upper
    }

    /// `dist(λ, Spec C)` for λ inside the gap.
    pub fn isolation(&self, lambda: f64) -> f64 {
        (lambda - self.lower).min(self.upper - lambda)
    }

    fn with_edges(lower: f64, upper: f64, below: usize) -> Self {
        Self { lower, upper, below, inf_positive: lower > 0.0, spectrum_below: true, spectrum_above: true }
    }
}

/// Gaps visible on the sampling grid, without refinement.
pub fn find_gaps(bands: &BandStructure) -> Vec<SpectralGap> {
    let mut gaps = Vec::new();
    for j in 0..bands.d().saturating_sub(1) {
        let (_, (max_below, _)) = bands.sheet_range(j);
        let ((min_above, _), _) = bands.sheet_range(j + 1);
        if min_above - max_below > 1e-9 {
            gaps.push(SpectralGap::with_edges(max_below, min_above, j));
        }
    }
    gaps
}

/// Pushes the grid gap edges outward by local optimization of the bounding
/// sheets; the result never widens the grid gap.
pub fn refine_gap(stencil: &BlockStencil, bands: &BandStructure, gap: &SpectralGap) -> SpectralGap {
    let step = 2.0 * PI / bands.m as f64;
    let j = gap.below;
    let extremum = |sheet: usize, sign: f64| -> f64 {
        // start from the best few grid points to escape shallow local optima
        let mut starts: Vec<(f64, usize)> =
            bands.bands.iter().enumerate().map(|(p, b)| (sign * b[sheet], p)).collect();
        starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = starts[0].0;
        for &(_, p) in starts.iter().take(4) {
            let f = |k: [f64; 2]| sign * fiber_eigenvalues(stencil, k)[sheet];
            let (_, v) = nelder_mead2(f, bands.kappas[p], step, 1e-13, 400);
            best = best.min(v);
        }
        sign * best
    };
    let lower = extremum(j, -1.0).max(gap.lower);
    let upper = extremum(j + 1, 1.0).min(gap.upper);
    SpectralGap::with_edges(lower, upper, j)
}

/// Grid gaps refined by [`refine_gap`], dropping any that close.
pub fn find_refined_gaps(stencil: &BlockStencil, bands: &BandStructure) -> Vec<SpectralGap> {
    find_gaps(bands)
        .iter()
        .map(|g| refine_gap(stencil, bands, g))
        .filter(|g| g.width() > 1e-9)
        .collect()
}

/// `‖C‖_{B(ℓ²)} = sup_κ ρ(C(κ))`, from the extreme sheets after refinement.
pub fn operator_norm(stencil: &BlockStencil, bands: &BandStructure) -> f64 {
    let d = bands.d();
    let step = 2.0 * PI / bands.m as f64;
    let ((_, pmin), _) = bands.sheet_range(0);
    let (_, (_, pmax)) = bands.sheet_range(d - 1);
    let (_, top) = nelder_mead2(|k| -fiber_eigenvalues(stencil, k)[d - 1], bands.kappas[pmax], step, 1e-13, 400);
    let (_, bottom) = nelder_mead2(|k| fiber_eigenvalues(stencil, k)[0], bands.kappas[pmin], step, 1e-13, 400);
    let grid = bands.bands.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    grid.max(-top).max(-bottom).max(top.abs()).max(bottom.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_has_no_gap() {
        let b = band_structure(&BlockStencil::laplacian(), 16).unwrap();
        assert!(find_gaps(&b).is_empty());
        let ((lo, _), (hi, _)) = b.sheet_range(0);
        assert!(lo.abs() < 1e-12 && (hi - 8.0).abs() < 1e-12);
    }

    #[test]
    fn identity_has_no_qualifying_gap() {
        let b = band_structure(&BlockStencil::identity(2), 5).unwrap();
        assert!(find_gaps(&b).is_empty());
        assert!(b.bands.iter().flatten().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diatomic_gap_is_refined_to_analytic_edges() {
        let s = BlockStencil::diatomic(5.0, 1.0, 0.5);
        // odd grid misses κ₁ = π, so the grid gap is too wide
        let b = band_structure(&s, 9).unwrap();
        let (_, (hi, _)) = b.sheet_range(0);
        assert!(hi < 4.5 && hi > 3.5);
        let raw = find_gaps(&b);
        assert_eq!(raw.len(), 1);
        assert!(raw[0].width() > 1.0 + 1e-3);
        let g = find_refined_gaps(&s, &b);
        assert_eq!(g.len(), 1);
        assert!((g[0].lower - 4.5).abs() < 1e-7 && (g[0].upper - 5.5).abs() < 1e-7, "{g:?}");
        assert!(g[0].qualifies());
        assert!((operator_norm(&s, &b) - 6.5).abs() < 1e-9);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(band_structure(&BlockStencil::laplacian(), 2).is_err());
    }

    #[test]
    fn grid_is_wrapped() {
        let g = bz_grid(4);
        assert!(g.iter().flatten().all(|&x| (-PI..PI).contains(&x)));
        assert_eq!(g.len(), 16);
    }
}
