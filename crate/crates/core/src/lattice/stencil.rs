use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{LatticeOperator, Site, Window};
use crate::fit::fit_line;
use crate::{Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

/// Euclidean length of an offset.
pub fn offset_len(m: Site) -> f64 {
    ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt()
}

pub(crate) fn fro(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Translation-invariant kernel `{C_{0,m}}` with `(Ca)_n = Σ_m C_{0,m} a_{n+m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStencil {
    d: usize,
    radius: usize,
    /// Sorted by offset.
    blocks: Vec<(Site, DMatrix<f64>)>,
    decay_alpha: f64,
    decay_beta: f64,
}

impl BlockStencil {
    /// Validates dimensions, the symmetry `C_{0,m} = C_{0,-m}ᵀ` and the decay
    /// certificate `‖C_{0,m}‖_F ≤ α e^{-β|m|}`.
    pub fn new(d: usize, blocks: Vec<(Site, DMatrix<f64>)>, alpha: f64, beta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidStencil("d must be positive".into()));
        }
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidStencil(format!("decay constants must be positive (alpha={alpha}, beta={beta})")));
        }
        let mut blocks = blocks;
        blocks.sort_by_key(|b| b.0);
        for w in blocks.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidStencil(format!("duplicate offset {:?}", w[0].0)));
            }
        }
        let scale = blocks.iter().map(|b| fro(&b.1)).fold(0.0, f64::max);
        let mut radius = 0;
        for (m, c) in &blocks {
            if c.nrows() != d || c.ncols() != d {
                return Err(Error::InvalidStencil(format!("block {m:?} is not {d}x{d}")));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidStencil(format!("block {m:?} has non-finite entries")));
            }
            radius = radius.max(m[0].unsigned_abs().max(m[1].unsigned_abs()) as usize);
            let neg = [-m[0], -m[1]];
            let mirror = blocks.binary_search_by_key(&neg, |b| b.0).ok().map(|i| &blocks[i].1);
            let asym = match mirror {
                Some(t) => fro(&(c - t.transpose())),
                None => fro(c),
            };
            if asym > 1e-12 * scale {
                return Err(Error::InvalidStencil(format!("C(m) != C(-m)^T at offset {m:?} (mismatch {asym:e})")));
            }
            let norm = fro(c);
            let bound = alpha * (-beta * offset_len(*m)).exp();
            if norm > bound * (1.0 + 1e-12) {
                return Err(Error::DecayCertificateViolated { offset: *m, norm, bound });
            }
        }
        Ok(Self { d, radius, blocks, decay_alpha: alpha, decay_beta: beta })
    }

    /// Like [`BlockStencil::new`] with β fitted by least squares on
    /// `log‖C_{0,m}‖` against `|m|` and the smallest α certifying every block.
    pub fn with_fitted_decay(d: usize, blocks: Vec<(Site, DMatrix<f64>)>) -> Result<Self> {
        let beta = fit_decay_beta(&blocks)?;
        let alpha = blocks
            .iter()
            .map(|(m, c)| fro(c) * (beta * offset_len(*m)).exp())
            .fold(0.0, f64::max);
        let alpha = if alpha > 0.0 { alpha } else { 1.0 };
        Self::new(d, blocks, alpha, beta)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn blocks(&self) -> &[(Site, DMatrix<f64>)] {
        &self.blocks
    }

    pub fn block(&self, offset: Site) -> Option<&DMatrix<f64>> {
        self.blocks.binary_search_by_key(&offset, |b| b.0).ok().map(|i| &self.blocks[i].1)
    }

    /// `C_{0,m}`, zero when not stored.
    pub fn block_or_zero(&self, offset: Site) -> DMatrix<f64> {
        self.block(offset).cloned().unwrap_or_else(|| DMatrix::zeros(self.d, self.d))
    }

    pub fn decay_alpha(&self) -> f64 {
        self.decay_alpha
    }

    pub fn decay_beta(&self) -> f64 {
        self.decay_beta
    }

    /// `max_m ‖C_{0,m}‖ e^{β|m|}`; the certificate holds iff this is ≤ α.
    pub fn decay_certificate(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(m, c)| fro(c) * (self.decay_beta * offset_len(*m)).exp())
            .fold(0.0, f64::max)
    }

    /// `Σ_m ‖C_{0,m}‖_F`, an upper bound on the operator norm of C.
    pub fn norm_bound(&self) -> f64 {
        self.blocks.iter().map(|(_, c)| fro(c)).sum()
    }

    /// Whether `C_{0,Fm} = C_{0,m}` with `F(m₁,m₂) = (−m₁,m₂)`.
    pub fn mirror_invariant(&self) -> bool {
        self.blocks.iter().all(|(m, c)| match self.block([-m[0], m[1]]) {
            Some(t) => t == c,
            None => c.iter().all(|x| *x == 0.0),
        })
    }

    /// Identity: `C_{0,0} = I_d`.
    pub fn identity(d: usize) -> Self {
        Self::scalar(d, 1.0)
    }

    /// `C_{0,0} = c·I_d`.
    pub fn scalar(d: usize, c: f64) -> Self {
        Self::new(d, alloc::vec![([0, 0], DMatrix::identity(d, d) * c)], (c.abs() * (d as f64).sqrt()).max(1e-300), 1.0)
            .expect("scalar stencil")
    }

    /// d=1 five-point Laplacian, `4 − 2cos κ₁ − 2cos κ₂`.
    pub fn laplacian() -> Self {
        let b = |x: f64| DMatrix::from_element(1, 1, x);
        Self::with_fitted_decay(
            1,
            alloc::vec![([0, 0], b(4.0)), ([1, 0], b(-1.0)), ([-1, 0], b(-1.0)), ([0, 1], b(-1.0)), ([0, -1], b(-1.0))],
        )
        .expect("laplacian")
    }

    /// Two-site chain along e₁: onsite ε, intra-cell hopping t₁, inter-cell t₂.
    /// Bands `ε ± |t₁ + t₂ e^{iκ₁}|`.
    pub fn diatomic(onsite: f64, t1: f64, t2: f64) -> Self {
        let c00 = DMatrix::from_row_slice(2, 2, &[onsite, t1, t1, onsite]);
        let cp = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, t2, 0.0]);
        let cm = cp.transpose();
        Self::with_fitted_decay(2, alloc::vec![([0, 0], c00), ([1, 0], cp), ([-1, 0], cm)]).expect("diatomic")
    }

    /// Dimer whose chain runs along e₂, weakly coupled along e₁ by `-s·I`.
    /// Invariant under `m₁ → −m₁`; bands `ε ± |t₁ + t₂ e^{iκ₂}| − 2s cos κ₁`.
    pub fn mirror_dimer(onsite: f64, t1: f64, t2: f64, s: f64) -> Self {
        let c00 = DMatrix::from_row_slice(2, 2, &[onsite, t1, t1, onsite]);
        let cp = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, t2, 0.0]);
        let cm = cp.transpose();
        let side = DMatrix::identity(2, 2) * -s;
        Self::with_fitted_decay(
            2,
            alloc::vec![([0, 0], c00), ([0, 1], cp), ([0, -1], cm), ([1, 0], side.clone()), ([-1, 0], side)],
        )
        .expect("mirror dimer")
    }

    /// Dense matrix of C on a periodic or box window.
    pub fn dense(&self, window: Window) -> Result<DMatrix<f64>> {
        self.check_window(&window)?;
        let d = self.d;
        let n = window.num_sites() * d;
        let mut out = DMatrix::zeros(n, n);
        for (i, site) in window.sites().enumerate() {
            for (o, c) in &self.blocks {
                if let Some(j) = window.index([site[0] + o[0], site[1] + o[1]]) {
                    for a in 0..d {
                        for b in 0..d {
                            out[(i * d + a, j * d + b)] += c[(a, b)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Least-squares slope of `log‖C_{0,m}‖` against `|m|`, negated.
pub fn fit_decay_beta(blocks: &[(Site, DMatrix<f64>)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = blocks
        .iter()
        .map(|(m, c)| (offset_len(*m), fro(c)))
        .filter(|p| p.1 > 0.0)
        .map(|(r, n)| (r, n.ln()))
        .collect();
    let distinct = pts.iter().any(|p| (p.0 - pts[0].0).abs() > 0.0);
    if !distinct {
        // a single shell carries no rate information; any β certifies it
        return Ok(1.0);
    }
    let fit = fit_line(&pts).ok_or(Error::DecayTooSlow { beta: 0.0 })?;
    let beta = -fit.slope;
    if !(beta > 0.0) {
        return Err(Error::DecayTooSlow { beta });
    }
    Ok(beta)
}

impl LatticeOperator for BlockStencil {
    fn d(&self) -> usize {
        self.d
    }

    fn check_window(&self, window: &Window) -> Result<()> {
        match *window {
            Window::Periodic { period, .. } if period < 2 * self.radius + 1 => {
                Err(Error::WindowTooSmall { period, radius: self.radius })
            }
            Window::HalfStrip { .. } => Err(Error::WindowMismatch),
            _ => Ok(()),
        }
    }

    fn apply_real(&self, window: &Window, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        for (i, site) in window.sites().enumerate() {
            let y = &mut out[i * d..(i + 1) * d];
            y.fill(0.0);
            for (o, c) in &self.blocks {
                if let Some(j) = window.index([site[0] + o[0], site[1] + o[1]]) {
                    let xj = &x[j * d..(j + 1) * d];
                    for a in 0..d {
                        let mut s = 0.0;
                        for b in 0..d {
                            s += c[(a, b)] * xj[b];
                        }
                        y[a] += s;
                    }
                }
            }
        }
    }
}
