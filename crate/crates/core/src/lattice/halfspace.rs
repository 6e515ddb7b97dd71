use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{BlockStencil, LatticeOperator, Site, Window};
use crate::{Complex, Error, Result};

/// `F(m₁, m₂) = (−m₁, m₂)`.
pub fn reflect(m: Site) -> Site {
    [-m[0], m[1]]
}

/// Capacitance operator of the half-space crystal on `N × Z`:
/// `C^half_{n,m} = C_{n,m} − C_{n,Fm}` for `n₁, m₁ ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpaceStencil {
    base: BlockStencil,
    base_mirror_invariant: bool,
}

impl HalfSpaceStencil {
    /// The reflection identity presumes a square lattice with a mirror
    /// symmetric cell; `mirror_symmetric` is the caller's assertion of that.
    pub fn new(base: BlockStencil, mirror_symmetric: bool) -> Result<Self> {
        if !mirror_symmetric {
            return Err(Error::SymmetryNotAsserted);
        }
        let base_mirror_invariant = base.mirror_invariant();
        Ok(Self { base, base_mirror_invariant })
    }

    pub fn base(&self) -> &BlockStencil {
        &self.base
    }

    /// Whether the stored blocks satisfy `C_{0,Fm} = C_{0,m}`, which makes
    /// the half-space operator self-adjoint.
    pub fn base_mirror_invariant(&self) -> bool {
        self.base_mirror_invariant
    }

    /// `C^half_{n,m}`, computed literally as `C_{0,m−n} − C_{0,Fm−n}`.
    pub fn entry(&self, n: Site, m: Site) -> DMatrix<f64> {
        let fm = reflect(m);
        self.base.block_or_zero([m[0] - n[0], m[1] - n[1]]) - self.base.block_or_zero([fm[0] - n[0], fm[1] - n[1]])
    }

    /// Bloch fiber of the strip operator in `n₂`: a `(W·d)²` matrix
    /// `H(κ₂)[(n₁,i),(m₁,j)] = Σ_{o₂} C^half_{(n₁,0),(m₁,o₂)} e^{iκ₂ o₂}`.
    pub fn strip_fiber(&self, width: usize, kappa2: f64) -> DMatrix<Complex> {
        let d = self.base.d();
        let mut h = DMatrix::zeros(width * d, width * d);
        let r = self.base.radius() as i64;
        for n1 in 1..=width as i64 {
            for m1 in 1..=width as i64 {
                for o2 in -r..=r {
                    let e = self.entry([n1, 0], [m1, o2]);
                    let ph = Complex::from_polar(1.0, kappa2 * o2 as f64);
                    for a in 0..d {
                        for b in 0..d {
                            h[((n1 - 1) as usize * d + a, (m1 - 1) as usize * d + b)] += ph * e[(a, b)];
                        }
                    }
                }
            }
        }
        h
    }

    /// Dense matrix on a half-strip window, tabulated entry by entry.
    pub fn dense_entries(&self, window: Window) -> Result<DMatrix<f64>> {
        self.check_window(&window)?;
        let d = self.base.d();
        let sites: Vec<Site> = window.sites().collect();
        let k = window.period().unwrap_or(1) as i64;
        let r = self.base.radius() as i64;
        let mut out = DMatrix::zeros(sites.len() * d, sites.len() * d);
        for (i, n) in sites.iter().enumerate() {
            for (j, m) in sites.iter().enumerate() {
                // nearest periodic image of m in the n₂ direction
                let mut dm = (m[1] - n[1]).rem_euclid(k);
                if dm > r {
                    dm -= k;
                }
                if dm.abs() > r {
                    continue;
                }
                let e = self.entry(*n, [m[0], n[1] + dm]);
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] = e[(a, b)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl LatticeOperator for HalfSpaceStencil {
    fn d(&self) -> usize {
        self.base.d()
    }

    fn check_window(&self, window: &Window) -> Result<()> {
        match *window {
            Window::HalfStrip { period, .. } if period < 2 * self.base.radius() + 1 => {
                Err(Error::WindowTooSmall { period, radius: self.base.radius() })
            }
            Window::HalfStrip { .. } => Ok(()),
            _ => Err(Error::WindowMismatch),
        }
    }

    fn apply_real(&self, window: &Window, x: &[f64], out: &mut [f64]) {
        let d = self.base.d();
        for (i, n) in window.sites().enumerate() {
            let y = &mut out[i * d..(i + 1) * d];
            y.fill(0.0);
            for (o, c) in self.base.blocks() {
                let m = [n[0] + o[0], n[1] + o[1]];
                // direct term: m = n + o; image term: Fm = n + o
                for (target, sign) in [(m, 1.0), (reflect(m), -1.0)] {
                    if let Some(j) = window.index(target) {
                        let xj = &x[j * d..(j + 1) * d];
                        for a in 0..d {
                            let mut s = 0.0;
                            for b in 0..d {
                                s += c[(a, b)] * xj[b];
                            }
                            y[a] += sign * s;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_must_be_asserted() {
        assert_eq!(HalfSpaceStencil::new(BlockStencil::laplacian(), false), Err(Error::SymmetryNotAsserted));
    }

    #[test]
    fn laplacian_edge_entry() {
        let h = HalfSpaceStencil::new(BlockStencil::laplacian(), true).unwrap();
        assert_eq!(h.entry([1, 0], [1, 0])[(0, 0)], 4.0);
        // n=(1,0), m=(1,0) is fine; the image of m=(1,0) is two sites away
        assert_eq!(h.entry([2, 0], [1, 0])[(0, 0)], -1.0);
    }

    #[test]
    fn radius_zero_is_diagonal() {
        let h = HalfSpaceStencil::new(BlockStencil::scalar(2, 3.0), true).unwrap();
        assert_eq!(h.entry([1, 0], [1, 0]), DMatrix::identity(2, 2) * 3.0);
        assert_eq!(h.entry([1, 0], [2, 0]), DMatrix::zeros(2, 2));
    }

    #[test]
    fn applied_matrix_matches_tabulated_entries_bitwise() {
        let s = BlockStencil::new(
            1,
            alloc::vec![
                ([0, 0], DMatrix::from_element(1, 1, 4.0)),
                ([1, 0], DMatrix::from_element(1, 1, -1.0)),
                ([-1, 0], DMatrix::from_element(1, 1, -1.0)),
                ([2, 0], DMatrix::from_element(1, 1, -0.3)),
                ([-2, 0], DMatrix::from_element(1, 1, -0.3)),
                ([0, 1], DMatrix::from_element(1, 1, -1.0)),
                ([0, -1], DMatrix::from_element(1, 1, -1.0)),
            ],
            5.0,
            0.1,
        )
        .unwrap();
        let h = HalfSpaceStencil::new(s, true).unwrap();
        let w = Window::half_strip(4, 5);
        assert_eq!(h.dense(w).unwrap(), h.dense_entries(w).unwrap());
        // n=(1,0), m=(1,0): image offset (−2,0) carries −0.3
        assert_eq!(h.entry([1, 0], [1, 0])[(0, 0)], 4.0 + 0.3);
    }
}
