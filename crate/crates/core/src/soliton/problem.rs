use alloc::boxed::Box;
use alloc::format;

use crate::lattice::{BlockStencil, DiagonalDefect, HalfSpaceStencil, LatticeOperator, Site, Window};
use crate::spectrum::{band_structure, find_refined_gaps, operator_norm, Fibered, SpectralGap, StripFibers};
use crate::{Error, Result};

/// Whole space or the half space `N × Z` truncated to a strip of `width` columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    WholeSpace,
    HalfSpace { width: usize },
}

/// One soliton problem `Ca + Va − λ(1+σ|a|²)a = 0`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    stencil: BlockStencil,
    half: Option<HalfSpaceStencil>,
    defect: DiagonalDefect,
    lambda: f64,
    sigma: f64,
    gap: Option<SpectralGap>,
    op_norm: f64,
    geometry: Geometry,
}

impl ProblemSpec {
    /// `gap` may be absent for problems with no two-sided gap (then only
    /// direct Newton refinement is available). `op_norm` is `‖C‖_{B(ℓ²)}`.
    /// Half-space problems require `mirror_symmetric`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        stencil: BlockStencil,
        defect: DiagonalDefect,
        lambda: f64,
        sigma: f64,
        gap: Option<SpectralGap>,
        op_norm: f64,
        geometry: Geometry,
        mirror_symmetric: bool,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        if let Some(c) = defect.max_component() {
            if c >= stencil.d() {
                return Err(Error::InvalidParameter(format!("defect component {c} out of range for d = {}", stencil.d())));
            }
        }
        if let Some(g) = gap {
            // λ at a band edge breaks every radius formula
            if !g.contains(lambda) || g.isolation(lambda) < 1e-6 * g.width() {
                return Err(Error::NotInGap { lambda });
            }
        }
        let half = match geometry {
            Geometry::WholeSpace => None,
            Geometry::HalfSpace { width } => {
                if width == 0 {
                    return Err(Error::InvalidParameter("strip width must be positive".into()));
                }
                Some(HalfSpaceStencil::new(stencil.clone(), mirror_symmetric)?)
            }
        };
        Ok(Self { stencil, half, defect, lambda, sigma, gap, op_norm, geometry })
    }

    /// Samples bands on an `m×m` grid and selects the refined gap containing λ.
    pub fn from_bands(
        stencil: BlockStencil,
        defect: DiagonalDefect,
        lambda: f64,
        sigma: f64,
        m: usize,
        geometry: Geometry,
        mirror_symmetric: bool,
    ) -> Result<Self> {
        let bands = band_structure(&stencil, m)?;
        let gap = find_refined_gaps(&stencil, &bands)
            .into_iter()
            .find(|g| g.qualifies() && g.contains(lambda))
            .ok_or(Error::NotInGap { lambda })?;
        let op_norm = operator_norm(&stencil, &bands);
        Self::new(stencil, defect, lambda, sigma, Some(gap), op_norm, geometry, mirror_symmetric)
    }

    pub fn stencil(&self) -> &BlockStencil {
        &self.stencil
    }

    pub fn defect(&self) -> &DiagonalDefect {
        &self.defect
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gap(&self) -> Option<SpectralGap> {
        self.gap
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn d(&self) -> usize {
        self.stencil.d()
    }

    /// `δ = dist(λ, Spec C)`.
    pub fn isolation(&self) -> Option<f64> {
        self.gap.map(|g| g.isolation(self.lambda))
    }

    /// Defect premise `2‖V‖₁ < δ`.
    pub fn defect_admissible(&self) -> bool {
        self.isolation().is_some_and(|delta| 2.0 * self.defect.norm_l1() < delta)
    }

    pub fn operator(&self) -> &dyn LatticeOperator {
        match &self.half {
            Some(h) => h,
            None => &self.stencil,
        }
    }

    pub fn half_space(&self) -> Option<&HalfSpaceStencil> {
        self.half.as_ref()
    }

    pub fn fibered(&self) -> Box<dyn Fibered + '_> {
        match (&self.half, self.geometry) {
            (Some(h), Geometry::HalfSpace { width }) => Box::new(StripFibers { half: h, width }),
            _ => Box::new(self.stencil.clone()),
        }
    }

    /// Working window for period `k`: a centered cell, or the strip.
    pub fn window(&self, k: usize) -> Window {
        match self.geometry {
            Geometry::WholeSpace => Window::centered(k),
            Geometry::HalfSpace { width } => Window::half_strip(width, k),
        }
    }

    /// Bulk site used to seed `z0` when none is given.
    pub fn default_seed(&self) -> Site {
        match self.geometry {
            Geometry::WholeSpace => [0, 0],
            Geometry::HalfSpace { width } => [width.div_ceil(2) as i64, 0],
        }
    }
}
