//! Capacitance stencils from disk geometry.
//!
//! Each Bloch fiber `C(κ)` comes from discrete quasi-periodic Laplace
//! problems on the exterior of the disks in one cell: `V_j = 1` on disk
//! `j`, `0` on the others, `V(x + e_i) = e^{iκ_i} V(x)`. The 5-point
//! energy form gives `C^{ij}(κ) = Σ_edges w conj(ΔV_i) ΔV_j`, which is
//! Hermitian positive semidefinite by construction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{BlockStencil, LatticeGeometry, Site};
use crate::linalg::conjugate_gradient;
use crate::{Complex, Error, Result};

/// How disk boundaries enter the 5-point scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryScheme {
    /// Nodes inside a disk carry its Dirichlet value.
    Staircase,
    /// As `Staircase`, but an edge leaving the exterior ends at the exact
    /// circle crossing: weight `w/θ` with `θ` the exterior fraction.
    CutEdge,
}

/// Fewest grid nodes a disk must contain.
pub const MIN_NODES_PER_DISK: usize = 8;

#[derive(Clone, Copy, Debug)]
struct Edge {
    p: usize,
    q: usize,
    w: f64,
    /// 0: inside the cell, 1: wraps across e₁, 2: wraps across e₂.
    wrap: u8,
}

/// Discretized unit cell: `N×N` nodes `(i h₁, j h₂)`, index `i·N + j`.
#[derive(Clone, Debug)]
pub struct CellGrid {
    n: usize,
    h: [f64; 2],
    d: usize,
    /// Resonator containing each node, if any.
    labels: Vec<Option<usize>>,
    /// Unknown number of each exterior node.
    unknown: Vec<Option<usize>>,
    n_unknowns: usize,
    edges: Vec<Edge>,
    scheme: BoundaryScheme,
}

/// Fraction along the segment `a → b` where it first enters the disk.
fn crossing_fraction(a: [f64; 2], b: [f64; 2], c: [f64; 2], r: f64) -> f64 {
    let dx = [b[0] - a[0], b[1] - a[1]];
    let fx = [a[0] - c[0], a[1] - c[1]];
    let qa = dx[0] * dx[0] + dx[1] * dx[1];
    let qb = 2.0 * (fx[0] * dx[0] + fx[1] * dx[1]);
    let qc = fx[0] * fx[0] + fx[1] * fx[1] - r * r;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    ((-qb - disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0)
}

impl CellGrid {
    /// Orthogonal lattices only; every disk must contain at least
    /// [`MIN_NODES_PER_DISK`] nodes.
    pub fn new(geom: &LatticeGeometry, n: usize, scheme: BoundaryScheme) -> Result<Self> {
        if !geom.is_orthogonal() {
            return Err(Error::InvalidGeometry("the cell solver supports orthogonal lattice vectors only".into()));
        }
        if n < 8 {
            return Err(Error::InvalidParameter(format!("grid resolution must be at least 8, got {n}")));
        }
        let a = [geom.e1()[0].abs(), geom.e2()[1].abs()];
        let h = [a[0] / n as f64, a[1] / n as f64];
        let pos = |idx: usize| [(idx / n) as f64 * h[0], (idx % n) as f64 * h[1]];
        let mut labels = vec![None; n * n];
        let mut counts = vec![0usize; geom.d()];
        for (idx, label) in labels.iter_mut().enumerate() {
            let x = pos(idx);
            for (j, (c, &r)) in geom.centers().iter().zip(geom.radii()).enumerate() {
                if (x[0] - c[0]).hypot(x[1] - c[1]) < r {
                    *label = Some(j);
                    counts[j] += 1;
                }
            }
        }
        if let Some(j) = counts.iter().position(|&c| c < MIN_NODES_PER_DISK) {
            return Err(Error::InvalidParameter(format!(
                "resonator {j} contains {} grid nodes, need at least {MIN_NODES_PER_DISK}; increase grid_n",
                counts[j]
            )));
        }
        let mut unknown = vec![None; n * n];
        let mut n_unknowns = 0;
        for (idx, l) in labels.iter().enumerate() {
            if l.is_none() {
                unknown[idx] = Some(n_unknowns);
                n_unknowns += 1;
            }
        }
        let mut edges = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                let p = i * n + j;
                for (dir, w) in [(0usize, h[1] / h[0]), (1, h[0] / h[1])] {
                    let (qi, qj, wrap) = if dir == 0 {
                        if i + 1 == n { (0, j, 1) } else { (i + 1, j, 0) }
                    } else if j + 1 == n {
                        (i, 0, 2)
                    } else {
                        (i, j + 1, 0)
                    };
                    let q = qi * n + qj;
                    let mut w = w;
                    if scheme == BoundaryScheme::CutEdge {
                        // unwrapped neighbour position
                        let xp = pos(p);
                        let xq = if dir == 0 { [xp[0] + h[0], xp[1]] } else { [xp[0], xp[1] + h[1]] };
                        let theta = match (labels[p], labels[q]) {
                            (None, Some(jq)) => crossing_fraction(xp, xq, geom.centers()[jq], geom.radii()[jq]),
                            (Some(jp), None) => crossing_fraction(xq, xp, geom.centers()[jp], geom.radii()[jp]),
                            _ => 1.0,
                        };
                        // a node sitting on the circle is effectively a boundary node
                        w /= theta.max(1e-2);
                    }
                    edges.push(Edge { p, q, w, wrap });
                }
            }
        }
        Ok(Self { n, h, d: geom.d(), labels, unknown, n_unknowns, edges, scheme })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn scheme(&self) -> BoundaryScheme {
        self.scheme
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    /// Resonator index of node `(i, j)`, `None` for exterior nodes.
    pub fn label(&self, i: usize, j: usize) -> Option<usize> {
        self.labels[i * self.n + j]
    }

    fn phases(kappa: [f64; 2]) -> [Complex; 3] {
        [Complex::new(1.0, 0.0), Complex::from_polar(1.0, kappa[0]), Complex::from_polar(1.0, kappa[1])]
    }

    /// Stiffness matrix of the exterior unknowns applied to `x`.
    fn apply(&self, ph: &[Complex; 3], x: &[Complex], out: &mut [Complex]) {
        out.fill(Complex::new(0.0, 0.0));
        for e in &self.edges {
            let phi = ph[e.wrap as usize];
            match (self.unknown[e.p], self.unknown[e.q]) {
                (Some(a), Some(b)) => {
                    out[a] += (x[a] - phi * x[b]) * e.w;
                    out[b] += (x[b] - phi.conj() * x[a]) * e.w;
                }
                (Some(a), None) => out[a] += x[a] * e.w,
                (None, Some(b)) => out[b] += x[b] * e.w,
                (None, None) => {}
            }
        }
    }

    /// Discrete quasi-periodic Laplace problem with Dirichlet value
    /// `data[j]` on resonator `j`. Returns the potential on every node.
    pub fn solve(&self, kappa: [f64; 2], data: &[Complex]) -> Result<Vec<Complex>> {
        if data.len() != self.d {
            return Err(Error::InvalidParameter(format!("need {} Dirichlet values, got {}", self.d, data.len())));
        }
        let ph = Self::phases(kappa);
        let mut b = vec![Complex::new(0.0, 0.0); self.n_unknowns];
        for e in &self.edges {
            let phi = ph[e.wrap as usize];
            match (self.unknown[e.p], self.unknown[e.q], self.labels[e.p], self.labels[e.q]) {
                (Some(a), None, _, Some(jq)) => b[a] += phi * data[jq] * e.w,
                (None, Some(bq), Some(jp), _) => b[bq] += phi.conj() * data[jp] * e.w,
                _ => {}
            }
        }
        let (x, _) = conjugate_gradient(|u, out| self.apply(&ph, u, out), &b, 1e-11, 10 * self.n_unknowns + 100)?;
        let mut v = vec![Complex::new(0.0, 0.0); self.n * self.n];
        for (idx, val) in v.iter_mut().enumerate() {
            *val = match (self.unknown[idx], self.labels[idx]) {
                (Some(u), _) => x[u],
                (None, Some(j)) => data[j],
                (None, None) => unreachable!(),
            };
        }
        Ok(v)
    }

    /// `Σ_edges w conj(ΔU) ΔV` for two full-node potentials.
    fn energy_pairing(&self, ph: &[Complex; 3], u: &[Complex], v: &[Complex]) -> Complex {
        self.edges
            .iter()
            .map(|e| {
                let phi = ph[e.wrap as usize];
                let du = phi * u[e.q] - u[e.p];
                let dv = phi * v[e.q] - v[e.p];
                du.conj() * dv * e.w
            })
            .sum()
    }
}

/// `C(κ)` of the disk lattice, `d×d` Hermitian positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochCapacitance {
    pub kappa: [f64; 2],
    pub matrix: DMatrix<Complex>,
}

/// Solves the `d` cell problems at `κ` and forms the energy pairing.
pub fn bloch_capacitance(grid: &CellGrid, kappa: [f64; 2]) -> Result<BlochCapacitance> {
    let d = grid.d;
    let ph = CellGrid::phases(kappa);
    let pots: Vec<Vec<Complex>> = (0..d)
        .map(|j| {
            let mut data = vec![Complex::new(0.0, 0.0); d];
            data[j] = Complex::new(1.0, 0.0);
            grid.solve(kappa, &data)
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let c = grid.energy_pairing(&ph, &pots[i], &pots[j]);
            m[(i, j)] = c;
            m[(j, i)] = c.conj();
        }
        m[(i, i)].im = 0.0;
    }
    Ok(BlochCapacitance { kappa, matrix: m })
}

/// Grid points whose fibers must actually be solved: one representative of
/// each `{κ, −κ}` pair (mod 2π) on the `M×M` grid, as indices into
/// [`crate::spectrum::bz_grid`].
pub fn independent_kappas(m: usize) -> Vec<usize> {
    (0..m * m)
        .filter(|&p| {
            let (a, b) = (p / m, p % m);
            let q = ((m - a) % m) * m + (m - b) % m;
            p <= q
        })
        .collect()
}

/// Completes samples on [`independent_kappas`] to the full grid using
/// `C(−κ) = conj C(κ)`.
pub fn complete_by_conjugation(m: usize, samples: &[(usize, DMatrix<Complex>)]) -> Result<Vec<DMatrix<Complex>>> {
    let mut full: Vec<Option<DMatrix<Complex>>> = vec![None; m * m];
    for (p, c) in samples {
        let (a, b) = (p / m, p % m);
        let q = ((m - a) % m) * m + (m - b) % m;
        full[q] = Some(c.map(|z| z.conj()));
        full[*p] = Some(c.clone());
    }
    full.into_iter()
        .enumerate()
        .map(|(p, c)| c.ok_or_else(|| Error::InvalidParameter(format!("missing BZ sample {p}"))))
        .collect()
}

/// Inverse Bloch transform `C_{0,m} = (1/M²) Σ_κ C(κ) e^{−iκ·m}` over
/// `|m|∞ ≤ R`, followed by realness and symmetry certification and the
/// decay fit. `fibers` are in [`crate::spectrum::bz_grid`] order.
pub fn realspace_stencil_from_samples(m: usize, fibers: &[DMatrix<Complex>], radius: usize) -> Result<BlockStencil> {
    if m < 2 * radius + 1 {
        return Err(Error::InvalidParameter(format!("BZ grid {m} must be at least 2R+1 = {}", 2 * radius + 1)));
    }
    if fibers.len() != m * m || fibers.is_empty() {
        return Err(Error::InvalidParameter("fiber count does not match the BZ grid".into()));
    }
    let d = fibers[0].nrows();
    let kappas = crate::spectrum::bz_grid(m);
    let r = radius as i64;
    let mut raw: Vec<(Site, DMatrix<f64>)> = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let mut acc = DMatrix::<Complex>::zeros(d, d);
            for (k, c) in kappas.iter().zip(fibers) {
                acc += c * Complex::from_polar(1.0, -(k[0] * a as f64 + k[1] * b as f64));
            }
            acc /= Complex::new((m * m) as f64, 0.0);
            let leak = acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if leak > 1e-8 {
                return Err(Error::ImaginaryLeak { value: leak });
            }
            raw.push(([a, b], acc.map(|z| z.re)));
        }
    }
    let fro = |x: &DMatrix<f64>| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c00 = raw.iter().find(|(o, _)| *o == [0, 0]).map(|(_, c)| fro(c)).unwrap_or(0.0);
    let scale = raw.iter().map(|(_, c)| fro(c)).fold(0.0, f64::max);
    let mut blocks = Vec::new();
    for (o, c) in &raw {
        if (o[0], o[1]) < (0, 0) {
            continue;
        }
        let neg = [-o[0], -o[1]];
        let t = &raw.iter().find(|(p, _)| *p == neg).expect("symmetric range").1;
        let asym = fro(&(c - t.transpose()));
        if asym > 1e-10 * scale.max(1e-300) {
            return Err(Error::InvalidStencil(format!("recovered blocks break C(m) = C(-m)^T at {o:?} by {asym:e}")));
        }
        // store the symmetric average so the invariant holds exactly
        let sym = (c + t.transpose()) * 0.5;
        if fro(&sym) < 1e-12 * c00 {
            continue;
        }
        if *o == [0, 0] {
            blocks.push((*o, sym));
        } else {
            blocks.push((neg, sym.transpose()));
            blocks.push((*o, sym));
        }
    }
    BlockStencil::with_fitted_decay(d, blocks)
}

/// Sequential pipeline: fibers on the `M×M` grid, then the inverse transform.
pub fn realspace_stencil(grid: &CellGrid, m: usize, radius: usize) -> Result<BlockStencil> {
    let kappas = crate::spectrum::bz_grid(m);
    let samples = independent_kappas(m)
        .into_iter()
        .map(|p| bloch_capacitance(grid, kappas[p]).map(|c| (p, c.matrix)))
        .collect::<Result<Vec<_>>>()?;
    realspace_stencil_from_samples(m, &complete_by_conjugation(m, &samples)?, radius)
}

/// Smallest eigenvalue of the Dirichlet quasi-periodic Laplacian on the
/// exterior nodes at one `κ`, by inverse iteration.
pub fn exterior_eigenvalue(grid: &CellGrid, kappa: [f64; 2]) -> Result<f64> {
    let ph = CellGrid::phases(kappa);
    let n = grid.n_unknowns;
    let mut x = vec![Complex::new(1.0, 0.0); n];
    let mut ax = vec![Complex::new(0.0, 0.0); n];
    let norm = |v: &[Complex]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut estimate = f64::INFINITY;
    for _ in 0..200 {
        let nx = norm(&x);
        x.iter_mut().for_each(|z| *z /= nx);
        grid.apply(&ph, &x, &mut ax);
        let rq: f64 = x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum();
        let resid = x.iter().zip(&ax).map(|(a, b)| (b - a * rq).norm_sqr()).sum::<f64>().sqrt();
        if (estimate - rq).abs() <= 1e-12 * rq.abs() || resid <= 1e-10 * rq.abs() {
            estimate = rq;
            break;
        }
        estimate = rq;
        x = conjugate_gradient(|u, out| grid.apply(&ph, u, out), &x, 1e-12, 10 * n + 100)?.0;
    }
    Ok(estimate / (grid.h[0] * grid.h[1]))
}

/// `min_κ` of [`exterior_eigenvalue`] over the `M×M` grid. The returned
/// floor is strictly positive; `λ₀` is half of it.
pub fn exterior_spectrum_floor(grid: &CellGrid, m: usize) -> Result<f64> {
    let kappas = crate::spectrum::bz_grid(m);
    let mut floor = f64::INFINITY;
    for p in independent_kappas(m) {
        floor = floor.min(exterior_eigenvalue(grid, kappas[p])?);
    }
    if !(floor > 0.0) {
        return Err(Error::NonPositiveFloor { value: floor });
    }
    Ok(floor)
}

/// Reciprocal-lattice shift used by gauge checks.
pub fn shift_kappa(kappa: [f64; 2], by: [i32; 2]) -> [f64; 2] {
    [kappa[0] + 2.0 * PI * by[0] as f64, kappa[1] + 2.0 * PI * by[1] as f64]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{bloch_matrix, bz_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(r: f64) -> LatticeGeometry {
        LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], vec![[0.5, 0.5]], vec![r], 1.0).unwrap()
    }

    fn max_abs(m: &DMatrix<Complex>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let g = CellGrid::new(&single(0.25), 16, BoundaryScheme::Staircase).unwrap();
        let v = g.solve([0.4, -1.0], &[Complex::new(0.0, 0.0)]).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn antiperiodic_problem_obeys_maximum_principle() {
        let g = CellGrid::new(&single(0.25), 24, BoundaryScheme::Staircase).unwrap();
        let v = g.solve([PI, PI], &[Complex::new(1.0, 0.0)]).unwrap();
        assert!(v.iter().all(|z| z.im.abs() < 1e-12));
        assert!(v.iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn under_resolved_disk_is_rejected() {
        assert!(CellGrid::new(&single(0.05), 16, BoundaryScheme::Staircase).is_err());
        let skew = LatticeGeometry::new([1.0, 0.0], [0.5, 1.0], vec![[0.75, 0.5]], vec![0.2], 1.0).unwrap();
        assert!(matches!(CellGrid::new(&skew, 16, BoundaryScheme::Staircase), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn fibers_are_hermitian_psd_and_gauge_covariant() {
        let g = CellGrid::new(&single(0.25), 16, BoundaryScheme::Staircase).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let k = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            let c = bloch_capacitance(&g, k).unwrap().matrix;
            assert!(c[(0, 0)].re > 0.0 && c[(0, 0)].im == 0.0);
            let shifted = bloch_capacitance(&g, shift_kappa(k, [1, -1])).unwrap().matrix;
            assert!(max_abs(&(&c - &shifted)) < 1e-10 * max_abs(&c));
            let neg = bloch_capacitance(&g, [-k[0], -k[1]]).unwrap().matrix;
            assert!(max_abs(&(&neg - c.map(|z| z.conj()))) < 1e-10 * max_abs(&c));
        }
        // constant potential at κ = 0 carries no energy
        assert!(bloch_capacitance(&g, [0.0, 0.0]).unwrap().matrix[(0, 0)].norm() < 1e-10);
    }

    #[test]
    fn symmetric_pair_has_swap_eigenvector() {
        let geom = LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], vec![[0.3, 0.5], [0.7, 0.5]], vec![0.12, 0.12], 1.0).unwrap();
        let g = CellGrid::new(&geom, 32, BoundaryScheme::Staircase).unwrap();
        let c = bloch_capacitance(&g, [0.0, 0.0]).unwrap().matrix;
        let v = nalgebra::DVector::from_element(2, Complex::new(1.0, 0.0));
        let cv = &c * &v;
        let lam = (v.adjoint() * &cv)[(0, 0)] / Complex::new(2.0, 0.0);
        assert!((cv - v * lam).iter().all(|z| z.norm() < 1e-8 * max_abs(&c).max(1.0)));
        let herm = &c - c.adjoint();
        assert!(max_abs(&herm) < 1e-10);
    }

    #[test]
    fn synthetic_fibers_invert_to_laplacian() {
        let m = 7;
        let fibers: Vec<DMatrix<Complex>> = bz_grid(m).iter().map(|&k| bloch_matrix(&BlockStencil::laplacian(), k)).collect();
        let s = realspace_stencil_from_samples(m, &fibers, 2).unwrap();
        assert_eq!(s.blocks().len(), 5);
        assert!((s.block([0, 0]).unwrap()[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((s.block([0, -1]).unwrap()[(0, 0)] + 1.0).abs() < 1e-12);
        let constant = vec![DMatrix::from_element(1, 1, Complex::new(2.5, 0.0)); m * m];
        let s = realspace_stencil_from_samples(m, &constant, 3).unwrap();
        assert_eq!(s.blocks().len(), 1);
        assert!(realspace_stencil_from_samples(9, &vec![DMatrix::zeros(1, 1); 81], 5).is_err());
    }

    #[test]
    fn broken_conjugation_symmetry_leaks() {
        let m = 5;
        let fibers: Vec<DMatrix<Complex>> = bz_grid(m)
            .iter()
            .map(|k| DMatrix::from_element(1, 1, Complex::new(2.0 + k[0].sin(), 0.0)))
            .collect();
        assert!(matches!(realspace_stencil_from_samples(m, &fibers, 1), Err(Error::ImaginaryLeak { .. })));
    }

    #[test]
    fn floor_is_positive_and_shrinks_with_the_disk() {
        let f = |r: f64| exterior_spectrum_floor(&CellGrid::new(&single(r), 16, BoundaryScheme::Staircase).unwrap(), 3).unwrap();
        let (small, large) = (f(0.15), f(0.3));
        assert!(small > 0.0 && small < large);
    }

    #[test]
    fn conjugate_pairs_cover_the_grid() {
        for m in [4, 5, 17] {
            let idx = independent_kappas(m);
            let samples: Vec<_> = idx.iter().map(|&p| (p, DMatrix::from_element(1, 1, Complex::new(p as f64, 1.0)))).collect();
            assert!(complete_by_conjugation(m, &samples).is_ok());
        }
    }
}
