use alloc::format;
use alloc::vec::Vec;


use crate::{Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

/// Periodic lattice `e₁Z + e₂Z` with `d` disk resonators per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGeometry {
    e1: [f64; 2],
    e2: [f64; 2],
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
    n_e: f64,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl LatticeGeometry {
    /// Checks that the lattice vectors are independent and that the disks
    /// are pairwise disjoint and strictly inside the cell `[0,1)e₁ + [0,1)e₂`.
    pub fn new(e1: [f64; 2], e2: [f64; 2], centers: Vec<[f64; 2]>, radii: Vec<f64>, n_e: f64) -> Result<Self> {
        let det = cross(e1, e2);
        if !(det.abs() > 1e-12) {
            return Err(Error::InvalidGeometry("lattice vectors are linearly dependent".into()));
        }
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::InvalidGeometry("need one radius per resonator and at least one resonator".into()));
        }
        if !(n_e > 0.0) {
            return Err(Error::InvalidGeometry(format!("exterior index must be positive, got {n_e}")));
        }
        let (l1, l2) = (e1[0].hypot(e1[1]), e2[0].hypot(e2[1]));
        for (j, (c, &r)) in centers.iter().zip(&radii).enumerate() {
            if !(r > 0.0) {
                return Err(Error::InvalidGeometry(format!("resonator {j}: radius must be positive")));
            }
            // distances to the four edge lines of the parallelogram
            let s = cross(*c, e2) / det;
            let t = cross(e1, *c) / det;
            let h1 = det.abs() / l2; // cell height across the e₂ edges
            let h2 = det.abs() / l1;
            let dists = [s * h1, (1.0 - s) * h1, t * h2, (1.0 - t) * h2];
            if dists.iter().any(|&x| x <= r) {
                return Err(Error::InvalidGeometry(format!("resonator {j} is not strictly inside the unit cell")));
            }
        }
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let dist = (centers[i][0] - centers[j][0]).hypot(centers[i][1] - centers[j][1]);
                if dist <= radii[i] + radii[j] {
                    return Err(Error::InvalidGeometry(format!("resonators {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { e1, e2, centers, radii, n_e })
    }

    pub fn e1(&self) -> [f64; 2] {
        self.e1
    }

    pub fn e2(&self) -> [f64; 2] {
        self.e2
    }

    pub fn d(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Exterior index; inert for the λ = 0 cell problems.
    pub fn n_e(&self) -> f64 {
        self.n_e
    }

    pub fn is_orthogonal(&self) -> bool {
        self.e1[1] == 0.0 && self.e2[0] == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_disks() {
        assert!(LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], alloc::vec![[0.5, 0.5]], alloc::vec![0.3], 1.0).is_ok());
        assert!(LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], alloc::vec![[0.5, 0.5]], alloc::vec![0.5], 1.0).is_err());
        assert!(LatticeGeometry::new([1.0, 0.0], [2.0, 0.0], alloc::vec![[0.5, 0.5]], alloc::vec![0.1], 1.0).is_err());
        let two = alloc::vec![[0.3, 0.5], [0.7, 0.5]];
        assert!(LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], two.clone(), alloc::vec![0.15, 0.15], 1.0).is_ok());
        assert!(LatticeGeometry::new([1.0, 0.0], [0.0, 1.0], two, alloc::vec![0.2, 0.2], 1.0).is_err());
    }

    #[test]
    fn skewed_cell() {
        let g = LatticeGeometry::new([1.0, 0.0], [0.5, 1.0], alloc::vec![[0.75, 0.5]], alloc::vec![0.2], 1.0).unwrap();
        assert!(!g.is_orthogonal());
        assert!(LatticeGeometry::new([1.0, 0.0], [0.5, 1.0], alloc::vec![[0.3, 0.5]], alloc::vec![0.2], 1.0).is_err());
    }
}
