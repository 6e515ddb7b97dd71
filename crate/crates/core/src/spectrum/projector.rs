use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{hermitian_eigen, Fibered};
use crate::dft::Dft2;
use crate::fit::{ring_decay_fit, RingFit};
use crate::lattice::{BlockStencil, LatticeField, Window};
use crate::{Complex, Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

/// Which side of the gap a projector keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Eigenvalues closer than this form one cluster.
const CLUSTER_WIDTH: f64 = 1e-10;
/// Eigenvalues inside `(lower + ε, upper − ε)` violate the gap.
const GAP_EPS: f64 = 1e-9;

/// Spectral projector `P±^[k]` of a fibered periodic operator, stored as
/// one `Π(κ)` per point of the DFT grid.
#[derive(Clone, Debug)]
pub struct SpectralProjector {
    k: usize,
    side: Side,
    window: Window,
    d: usize,
    fiber_dim: usize,
    dft: Dft2,
    multipliers: Vec<DMatrix<Complex>>,
    rank: usize,
}

impl SpectralProjector {
    /// Both projectors from a single pass of fiber diagonalizations.
    pub fn pair<F: Fibered + ?Sized>(op: &F, k: usize, lower: f64, upper: f64) -> Result<(Self, Self)> {
        if k == 0 {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        op.operator().check_window(&op.window(k))?;
        let grid = op.grid(k);
        let dft = Dft2::new(grid);
        let fd = op.fiber_dim();
        let mid = 0.5 * (lower + upper);
        let mut plus = Vec::with_capacity(dft.len());
        let mut minus = Vec::with_capacity(dft.len());
        let mut rank_plus = 0;
        for idx in 0..dft.len() {
            let (vals, vecs) = hermitian_eigen(&op.fiber(dft.kappa(idx)));
            if let Some(&v) = vals.iter().find(|&&v| v > lower + GAP_EPS && v < upper - GAP_EPS) {
                return Err(Error::GapViolated { eigenvalue: v, lower, upper });
            }
            let mut p = DMatrix::zeros(fd, fd);
            let mut start = 0;
            while start < vals.len() {
                let mut end = start + 1;
                while end < vals.len() && vals[end] - vals[end - 1] < CLUSTER_WIDTH {
                    end += 1;
                }
                let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
                if mean > mid {
                    for c in start..end {
                        let v = vecs.column(c);
                        p += v * v.adjoint();
                    }
                    rank_plus += end - start;
                }
                start = end;
            }
            let q = DMatrix::identity(fd, fd) - &p;
            plus.push(p);
            minus.push(q);
        }
        let window = op.window(k);
        let total = dft.len() * fd;
        let make = |side, multipliers, rank| Self { k, side, window, d: op.d(), fiber_dim: fd, dft: dft.clone(), multipliers, rank };
        Ok((make(Side::Plus, plus, rank_plus), make(Side::Minus, minus, total - rank_plus)))
    }

    pub fn new<F: Fibered + ?Sized>(op: &F, k: usize, lower: f64, upper: f64, side: Side) -> Result<Self> {
        let (p, m) = Self::pair(op, k, lower, upper)?;
        Ok(if side == Side::Plus { p } else { m })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Number of fiber eigenvectors kept; equals the trace.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace(&self) -> f64 {
        self.multipliers.iter().map(|p| p.trace().re).sum()
    }

    pub fn apply(&self, a: &LatticeField) -> Result<LatticeField> {
        if a.window() != self.window || a.d() != self.d {
            return Err(Error::WindowMismatch);
        }
        let mut data = a.values().to_vec();
        self.apply_in_place(&mut data);
        LatticeField::from_values(self.window, self.d, data)
    }

    /// Projection of a real vector, imaginary round-off dropped.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.apply_in_place(&mut data);
        data.iter().map(|z| z.re).collect()
    }

    fn apply_in_place(&self, data: &mut [Complex]) {
        let fd = self.fiber_dim;
        self.dft.forward(data, fd);
        let mut tmp = vec![Complex::new(0.0, 0.0); fd];
        for (idx, p) in self.multipliers.iter().enumerate() {
            let x = &mut data[idx * fd..(idx + 1) * fd];
            for (i, t) in tmp.iter_mut().enumerate() {
                *t = (0..fd).map(|j| p[(i, j)] * x[j]).sum();
            }
            x.copy_from_slice(&tmp);
        }
        self.dft.inverse(data, fd);
    }

    /// Real-space kernel `G(o) = (1/N) Σ_κ Π(κ) e^{iκ·o}`, so that
    /// `(Pa)_n = Σ_m G(n − m) a_m`.
    pub fn kernel(&self) -> ProjectorKernel {
        let fd = self.fiber_dim;
        let b = fd * fd;
        let mut data = vec![Complex::new(0.0, 0.0); self.dft.len() * b];
        for (idx, p) in self.multipliers.iter().enumerate() {
            for i in 0..fd {
                for j in 0..fd {
                    data[idx * b + i * fd + j] = p[(i, j)];
                }
            }
        }
        self.dft.inverse(&mut data, b);
        let max_imag = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let blocks = (0..self.dft.len())
            .map(|idx| DMatrix::from_fn(fd, fd, |i, j| data[idx * b + i * fd + j].re))
            .collect();
        ProjectorKernel { grid: self.dft.shape(), d: self.d, fiber_dim: fd, window: self.window, blocks, max_imag }
    }
}

/// Real-space kernel of a projector on its DFT grid.
#[derive(Clone, Debug)]
pub struct ProjectorKernel {
    grid: [usize; 2],
    d: usize,
    fiber_dim: usize,
    window: Window,
    blocks: Vec<DMatrix<f64>>,
    max_imag: f64,
}

impl ProjectorKernel {
    /// Largest imaginary part dropped when the kernel was made real.
    pub fn max_imag(&self) -> f64 {
        self.max_imag
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `G(o)` for any offset, reduced modulo the grid.
    pub fn offset_block(&self, o: [i64; 2]) -> &DMatrix<f64> {
        let g = self.grid;
        let i1 = o[0].rem_euclid(g[0] as i64) as usize;
        let i2 = o[1].rem_euclid(g[1] as i64) as usize;
        &self.blocks[i1 * g[1] + i2]
    }

    /// `K_{n,m}`, a `d×d` block, for sites of the window.
    pub fn entry(&self, n: [i64; 2], m: [i64; 2]) -> DMatrix<f64> {
        match self.window {
            Window::HalfStrip { .. } => {
                let g = self.offset_block([0, n[1] - m[1]]);
                let (r, c) = ((n[0] - 1) as usize * self.d, (m[0] - 1) as usize * self.d);
                g.view((r, c), (self.d, self.d)).into_owned()
            }
            _ => self.offset_block([n[0] - m[0], n[1] - m[1]]).clone(),
        }
    }

    /// Minimal-image representatives `o ∈ [−⌊k/2⌋, k−1−⌊k/2⌋]²` of a whole-space kernel.
    fn minimal_image(&self) -> Result<(usize, Vec<ImageBlock<'_>>)> {
        if self.grid[0] != self.grid[1] || self.fiber_dim != self.d {
            return Err(Error::WindowMismatch);
        }
        let k = self.grid[0];
        let h = (k / 2) as i64;
        let mut out = Vec::with_capacity(k * k);
        for a in -h..k as i64 - h {
            for b in -h..k as i64 - h {
                out.push(([a, b], self.offset_block([a, b])));
            }
        }
        Ok((k, out))
    }

    /// `C₁ = sup_{n,i} Σ_{m,j} |K^{ij}_{n,m}|`, the largest absolute row sum.
    pub fn row_sum_bound(&self) -> f64 {
        let fd = self.fiber_dim;
        let mut rows = vec![0.0; fd];
        for blk in &self.blocks {
            for i in 0..fd {
                rows[i] += (0..fd).map(|j| blk[(i, j)].abs()).sum::<f64>();
            }
        }
        rows.iter().copied().fold(0.0, f64::max)
    }

    /// Certificate `N_p = C₁^{1−1/p} (C₁ + C₃)^{1/p}` bounding `‖P‖_{ℓᵖ_k→ℓᵖ_k}`.
    ///
    /// `C₃ = sup_{m∈Y_k, j} Σ_{n∉Y_k, i} |K^{ij}_{n,m}|` is the kernel mass
    /// leaving the cell, evaluated on the minimal-image kernel.
    pub fn lp_certificate(&self) -> Result<LpCertificate> {
        let (k, img) = self.minimal_image()?;
        let d = self.d;
        let h = (k / 2) as i64;
        let c1 = self.row_sum_bound();
        let mut c3: f64 = 0.0;
        for j in 0..d {
            // colsum(o) = Σ_i |G(o)^{ij}| on a k×k array indexed by o + h
            let mut prefix = vec![0.0; (k + 1) * (k + 1)];
            for (o, blk) in &img {
                let (a, b) = ((o[0] + h) as usize, (o[1] + h) as usize);
                prefix[(a + 1) * (k + 1) + b + 1] = (0..d).map(|i| blk[(i, j)].abs()).sum::<f64>();
            }
            for a in 1..=k {
                for b in 1..=k {
                    prefix[a * (k + 1) + b] +=
                        prefix[(a - 1) * (k + 1) + b] + prefix[a * (k + 1) + b - 1] - prefix[(a - 1) * (k + 1) + b - 1];
                }
            }
            let total = prefix[k * (k + 1) + k];
            let rect = |a0: usize, a1: usize, b0: usize, b1: usize| {
                prefix[a1 * (k + 1) + b1] - prefix[a0 * (k + 1) + b1] - prefix[a1 * (k + 1) + b0] + prefix[a0 * (k + 1) + b0]
            };
            // o ranges with m + o ∈ [0,k): o ∈ [−m, k−1−m], shifted by h into array coordinates
            let span = |m: i64| {
                let lo = (-m).max(-h) + h;
                let hi = (k as i64 - 1 - m).min(k as i64 - 1 - h) + h;
                (lo as usize, hi as usize + 1)
            };
            for m1 in 0..k as i64 {
                let (a0, a1) = span(m1);
                for m2 in 0..k as i64 {
                    let (b0, b1) = span(m2);
                    c3 = c3.max(total - rect(a0, a1, b0, b1));
                }
            }
        }
        Ok(LpCertificate { c1, c3: c3.max(0.0) })
    }

    /// Exponential fit of the largest block norm on Chebyshev rings
    /// `|o|∞ = ρ ≤ k/4` of the minimal-image kernel.
    pub fn decay_fit(&self) -> Result<RingFit> {
        let (k, img) = self.minimal_image()?;
        let rmax = k / 4;
        let mut rings = vec![0.0f64; rmax + 1];
        for (o, blk) in img {
            let r = o[0].unsigned_abs().max(o[1].unsigned_abs()) as usize;
            if r <= rmax {
                let n = blk.iter().map(|x| x * x).sum::<f64>().sqrt();
                rings[r] = rings[r].max(n);
            }
        }
        let fit = ring_decay_fit(&rings).ok_or(Error::TooFewAnnuli { period: k })?;
        if !(fit.gamma > 0.0) {
            return Err(Error::NoDecay { gamma: fit.gamma });
        }
        Ok(fit)
    }
}

type ImageBlock<'a> = ([i64; 2], &'a DMatrix<f64>);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpCertificate {
    pub c1: f64,
    pub c3: f64,
}

impl LpCertificate {
    pub fn n_p(&self, p: f64) -> f64 {
        self.c1.powf(1.0 - 1.0 / p) * (self.c1 + self.c3).powf(1.0 / p)
    }
}

/// Kernel decay fit of a projector; see [`ProjectorKernel::decay_fit`].
pub fn kernel_decay_fit(p: &SpectralProjector) -> Result<RingFit> {
    p.kernel().decay_fit()
}

fn lp_ratio(p: &SpectralProjector, x: &[f64], pw: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|t| t.abs().powf(pw)).sum::<f64>().powf(1.0 / pw);
    let nx = norm(x);
    if nx == 0.0 {
        return 0.0;
    }
    norm(&p.apply_real(x)) / nx
}

/// Lower bound on `‖P‖_{ℓᵖ_k→ℓᵖ_k}`: the best ratio over seeded random
/// trial fields, half dense and half supported on a few sites, plus every
/// single-component delta at the window origin.
pub fn lp_norm_probe(p: &SpectralProjector, pw: f64, trials: usize, seed: u64) -> f64 {
    let n = p.window.num_sites() * p.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut x = vec![0.0; n];
    for c in 0..p.d {
        x.fill(0.0);
        x[c] = 1.0;
        best = best.max(lp_ratio(p, &x, pw));
    }
    for t in 0..trials {
        x.fill(0.0);
        if t % 2 == 0 {
            x.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        } else {
            for _ in 0..rng.gen_range(1..=3usize) {
                let i = rng.gen_range(0..n);
                x[i] = rng.gen_range(-1.0..1.0);
            }
        }
        best = best.max(lp_ratio(p, &x, pw));
    }
    best
}

/// `‖R^[k] P₊^[k] S^[k] z − R P₊^{[K_ref]} S z‖₂` along `ks`, with centered
/// periodic cells and `K_ref = k_ref`.
pub fn projection_convergence(
    stencil: &BlockStencil,
    lower: f64,
    upper: f64,
    z: &LatticeField,
    ks: &[usize],
    k_ref: usize,
) -> Result<Vec<f64>> {
    if let Some(&kmax) = ks.iter().max() {
        if k_ref < 4 * kmax {
            return Err(Error::InvalidParameter(format!("reference period {k_ref} must be at least 4·max k = {}", 4 * kmax)));
        }
    }
    let reference = SpectralProjector::new(stencil, k_ref, lower, upper, Side::Plus)?;
    let big = reference.apply(&z.periodize(Window::centered(k_ref)))?;
    ks.iter()
        .map(|&k| {
            let p = SpectralProjector::new(stencil, k, lower, upper, Side::Plus)?;
            let pk = p.apply(&z.periodize(Window::centered(k)))?;
            // R^[k] is zero outside the small cell, which sits inside the reference cell
            let err: f64 = big
                .window()
                .sites()
                .flat_map(|s| (0..z.d()).map(move |c| (s, c)))
                .map(|(s, c)| {
                    let small = if pk.window().cell_index(s).is_some() { pk.get(s, c) } else { Complex::new(0.0, 0.0) };
                    (small - big.get(s, c)).norm_sqr()
                })
                .sum();
            Ok(err.sqrt())
        })
        .collect()
}
