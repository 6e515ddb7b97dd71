//! Separable two-dimensional discrete Fourier transform on small periodic
//! grids, with an arbitrary number of interleaved components per grid point.
//!
//! Conventions: the forward transform is `â(κ) = Σ_n e^{-iκ·n} a_n` with
//! `κ_j = 2πj/g`, the inverse carries the `1/(g₁g₂)` factor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::Complex;
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug)]
pub struct Dft2 {
    shape: [usize; 2],
    // twiddles[axis][j] = e^{-2πi j / g}
    twiddles: [Vec<Complex>; 2],
}

impl Dft2 {
    pub fn new(shape: [usize; 2]) -> Self {
        let tw = |g: usize| -> Vec<Complex> {
            (0..g)
                .map(|j| {
                    let t = -2.0 * PI * j as f64 / g as f64;
                    Complex::new(t.cos(), t.sin())
                })
                .collect()
        };
        Self { shape, twiddles: [tw(shape[0]), tw(shape[1])] }
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Wave vector of the grid point with linear index `idx`.
    pub fn kappa(&self, idx: usize) -> [f64; 2] {
        let j1 = idx / self.shape[1];
        let j2 = idx % self.shape[1];
        [
            2.0 * PI * j1 as f64 / self.shape[0] as f64,
            2.0 * PI * j2 as f64 / self.shape[1] as f64,
        ]
    }

    pub fn forward(&self, data: &mut [Complex], block: usize) {
        self.transform(data, block, false);
    }

    pub fn inverse(&self, data: &mut [Complex], block: usize) {
        self.transform(data, block, true);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex], block: usize, inverse: bool) {
        let [g1, g2] = self.shape;
        assert_eq!(data.len(), g1 * g2 * block, "DFT buffer length");
        let twiddle = |axis: usize, p: usize| {
            let w = self.twiddles[axis][p];
            if inverse {
                w.conj()
            } else {
                w
            }
        };
        if g2 > 1 {
            let mut line = vec![Complex::new(0.0, 0.0); g2 * block];
            for i1 in 0..g1 {
                let row = &mut data[i1 * g2 * block..(i1 + 1) * g2 * block];
                for v in line.iter_mut() {
                    *v = Complex::new(0.0, 0.0);
                }
                for j in 0..g2 {
                    for n in 0..g2 {
                        let w = twiddle(1, (j * n) % g2);
                        let src = &row[n * block..(n + 1) * block];
                        let dst = &mut line[j * block..(j + 1) * block];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
                row.copy_from_slice(&line);
            }
        }
        if g1 > 1 {
            let stride = g2 * block;
            let mut line = vec![Complex::new(0.0, 0.0); g1 * block];
            for i2 in 0..g2 {
                for v in line.iter_mut() {
                    *v = Complex::new(0.0, 0.0);
                }
                for j in 0..g1 {
                    for n in 0..g1 {
                        let w = twiddle(0, (j * n) % g1);
                        let base = n * stride + i2 * block;
                        for x in 0..block {
                            line[j * block + x] += w * data[base + x];
                        }
                    }
                }
                for j in 0..g1 {
                    let base = j * stride + i2 * block;
                    data[base..base + block].copy_from_slice(&line[j * block..(j + 1) * block]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex], shape: [usize; 2], block: usize) -> Vec<Complex> {
        let [g1, g2] = shape;
        let mut out = vec![Complex::new(0.0, 0.0); data.len()];
        for j1 in 0..g1 {
            for j2 in 0..g2 {
                for n1 in 0..g1 {
                    for n2 in 0..g2 {
                        let phase = -2.0 * PI * ((j1 * n1) as f64 / g1 as f64 + (j2 * n2) as f64 / g2 as f64);
                        let w = Complex::new(phase.cos(), phase.sin());
                        for x in 0..block {
                            out[(j1 * g2 + j2) * block + x] += w * data[(n1 * g2 + n2) * block + x];
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_direct_sum_and_inverts() {
        for shape in [[3usize, 4usize], [1, 5], [6, 6]] {
            let block = 2;
            let data: Vec<Complex> = (0..shape[0] * shape[1] * block)
                .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 1.1).cos()))
                .collect();
            let dft = Dft2::new(shape);
            let mut fwd = data.clone();
            dft.forward(&mut fwd, block);
            let expect = naive(&data, shape, block);
            for (a, b) in fwd.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-12);
            }
            dft.inverse(&mut fwd, block);
            for (a, b) in fwd.iter().zip(&data) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
