use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::lattice::{BlockStencil, HalfSpaceStencil, LatticeOperator, Window};
use crate::Complex;

/// `C(κ) = Σ_m C_{0,m} e^{iκ·m}`.
pub fn bloch_matrix(stencil: &BlockStencil, kappa: [f64; 2]) -> DMatrix<Complex> {
    let d = stencil.d();
    let mut out = DMatrix::zeros(d, d);
    for (m, c) in stencil.blocks() {
        let ph = Complex::from_polar(1.0, kappa[0] * m[0] as f64 + kappa[1] * m[1] as f64);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += ph * c[(i, j)];
            }
        }
    }
    out
}

/// Eigen-decomposition of the Hermitian part, eigenvalues sorted ascending.
pub fn hermitian_eigen(h: &DMatrix<Complex>) -> (Vec<f64>, DMatrix<Complex>) {
    let herm = (h + h.adjoint()) * Complex::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(h.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Sorted eigenvalues of `C(κ)`.
pub fn fiber_eigenvalues(stencil: &BlockStencil, kappa: [f64; 2]) -> Vec<f64> {
    hermitian_eigen(&bloch_matrix(stencil, kappa)).0
}

/// Union of fiber eigenvalues at `κ ∈ (2π/k)Z²`, sorted; equal to the
/// spectrum of the periodic operator `C^[k]`.
pub fn periodic_spectrum(stencil: &BlockStencil, k: usize) -> Vec<f64> {
    let mut all = Vec::with_capacity(k * k * stencil.d());
    let step = 2.0 * core::f64::consts::PI / k as f64;
    for j1 in 0..k {
        for j2 in 0..k {
            all.extend(fiber_eigenvalues(stencil, [j1 as f64 * step, j2 as f64 * step]));
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

/// An operator on a periodic window that the discrete Bloch transform
/// block-diagonalizes. Field layout and DFT layout coincide:
/// flat index `(i₁·g₂ + i₂)·fiber_dim + x`.
pub trait Fibered {
    /// Components per site.
    fn d(&self) -> usize;
    fn fiber_dim(&self) -> usize;
    /// DFT grid for period `k`.
    fn grid(&self, k: usize) -> [usize; 2];
    /// Window the fields live on for period `k`.
    fn window(&self, k: usize) -> Window;
    fn fiber(&self, kappa: [f64; 2]) -> DMatrix<Complex>;
    /// Same operator in real space.
    fn operator(&self) -> &dyn LatticeOperator;
}

impl Fibered for BlockStencil {
    fn d(&self) -> usize {
        BlockStencil::d(self)
    }

    fn fiber_dim(&self) -> usize {
        BlockStencil::d(self)
    }

    fn grid(&self, k: usize) -> [usize; 2] {
        [k, k]
    }

    fn window(&self, k: usize) -> Window {
        Window::centered(k)
    }

    fn fiber(&self, kappa: [f64; 2]) -> DMatrix<Complex> {
        bloch_matrix(self, kappa)
    }

    fn operator(&self) -> &dyn LatticeOperator {
        self
    }
}

/// Half-space operator on the strip `n₁ ∈ 1..=width`, periodic in `n₂`.
#[derive(Clone, Debug)]
pub struct StripFibers<'a> {
    pub half: &'a HalfSpaceStencil,
    pub width: usize,
}

impl Fibered for StripFibers<'_> {
    fn d(&self) -> usize {
        self.half.base().d()
    }

    fn fiber_dim(&self) -> usize {
        self.width * self.half.base().d()
    }

    fn grid(&self, k: usize) -> [usize; 2] {
        [1, k]
    }

    fn window(&self, k: usize) -> Window {
        Window::half_strip(self.width, k)
    }

    fn fiber(&self, kappa: [f64; 2]) -> DMatrix<Complex> {
        self.half.strip_fiber(self.width, kappa[1])
    }

    fn operator(&self) -> &dyn LatticeOperator {
        self.half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn model_fibers() {
        let id = bloch_matrix(&BlockStencil::identity(2), [0.3, -1.1]);
        assert_eq!(id, DMatrix::identity(2, 2));
        let lap = BlockStencil::laplacian();
        assert!(bloch_matrix(&lap, [0.0, 0.0])[(0, 0)].norm() < 1e-15);
        assert!((bloch_matrix(&lap, [PI, PI])[(0, 0)] - Complex::new(8.0, 0.0)).norm() < 1e-14);
        let dia = BlockStencil::diatomic(5.0, 1.0, 0.5);
        let k1 = 0.7;
        let c = bloch_matrix(&dia, [k1, 0.2]);
        let off = Complex::new(1.0, 0.0) + Complex::from_polar(0.5, -k1);
        assert!((c[(0, 1)] - off).norm() < 1e-15);
        let ev = fiber_eigenvalues(&dia, [k1, 0.2]);
        let h = (Complex::new(1.0, 0.0) + Complex::from_polar(0.5, k1)).norm();
        assert!((ev[0] - (5.0 - h)).abs() < 1e-13 && (ev[1] - (5.0 + h)).abs() < 1e-13);
    }

    #[test]
    fn fibers_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = BlockStencil::mirror_dimer(5.0, 1.0, 0.5, 0.1);
        for _ in 0..100 {
            let kappa = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            let c = bloch_matrix(&s, kappa);
            let diff = &c - c.adjoint();
            assert!(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn dense_periodic_spectrum_matches_fibers() {
        let s = BlockStencil::mirror_dimer(5.0, 1.0, 0.5, 0.1);
        for k in [3, 4, 5] {
            let dense = s.dense(Window::centered(k)).unwrap();
            let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let fib = periodic_spectrum(&s, k);
            assert!(ev.iter().zip(&fib).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn strip_fiber_matches_dense_strip() {
        let h = HalfSpaceStencil::new(BlockStencil::mirror_dimer(5.0, 1.0, 0.5, 0.1), true).unwrap();
        let (w, k) = (3, 5);
        let strip = StripFibers { half: &h, width: w };
        let dense = h.dense(Window::half_strip(w, k)).unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut fib = Vec::new();
        for j in 0..k {
            fib.extend(hermitian_eigen(&strip.fiber([0.0, 2.0 * PI * j as f64 / k as f64])).0);
        }
        fib.sort_by(f64::total_cmp);
        assert!(ev.iter().zip(&fib).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}
