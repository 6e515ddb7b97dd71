//! Lattice geometry, block stencils, fields and the nonlinear residual.

mod defect;
mod field;
mod geometry;
mod halfspace;
mod stencil;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

pub use defect::{DefectEntry, DiagonalDefect};
pub use field::{LatticeField, Window};
pub use geometry::LatticeGeometry;
pub use halfspace::{reflect, HalfSpaceStencil};
pub use stencil::{fit_decay_beta, offset_len, BlockStencil};

use crate::{Complex, Error, Result};

/// Lattice index `(n₁, n₂) ∈ Z²`.
pub type Site = [i64; 2];

/// A real linear operator acting on fields over some family of windows.
pub trait LatticeOperator {
    fn d(&self) -> usize;

    /// Whether the operator is defined on `window`.
    fn check_window(&self, window: &Window) -> Result<()>;

    /// `out = A x` for real vectors in field layout. The window must have
    /// passed [`LatticeOperator::check_window`].
    fn apply_real(&self, window: &Window, x: &[f64], out: &mut [f64]);

    fn apply(&self, a: &LatticeField) -> Result<LatticeField> {
        let w = a.window();
        self.check_window(&w)?;
        if a.d() != self.d() {
            return Err(Error::WindowMismatch);
        }
        let re: Vec<f64> = a.values().iter().map(|z| z.re).collect();
        let mut out_re = vec![0.0; re.len()];
        self.apply_real(&w, &re, &mut out_re);
        let values = if a.is_real() {
            out_re.iter().map(|&x| Complex::new(x, 0.0)).collect()
        } else {
            let im: Vec<f64> = a.values().iter().map(|z| z.im).collect();
            let mut out_im = vec![0.0; im.len()];
            self.apply_real(&w, &im, &mut out_im);
            out_re.iter().zip(&out_im).map(|(&r, &i)| Complex::new(r, i)).collect()
        };
        LatticeField::from_values(w, a.d(), values)
    }

    /// Dense matrix on `window`, one column per applied unit vector.
    fn dense(&self, window: Window) -> Result<DMatrix<f64>> {
        self.check_window(&window)?;
        let n = window.num_sites() * self.d();
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_real(&window, &e, &mut col);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(out)
    }
}

/// `r = Ca + Va − λ(1 + σ|a|²)a` with `|a|²a` taken componentwise, and `‖r‖₂`.
pub fn nonlinear_residual<O: LatticeOperator + ?Sized>(
    op: &O,
    defect: &DiagonalDefect,
    lambda: f64,
    sigma: f64,
    a: &LatticeField,
) -> Result<(LatticeField, f64)> {
    if let Some(c) = defect.max_component() {
        if c >= a.d() {
            return Err(Error::WindowMismatch);
        }
    }
    let mut r = op.apply(a)?;
    let w = a.window();
    let d = a.d();
    let diag = defect.diagonal(&w, d);
    for ((ri, ai), vi) in r.values_mut().iter_mut().zip(a.values()).zip(&diag) {
        *ri += ai * *vi - ai * (lambda * (1.0 + sigma * ai.norm_sqr()));
    }
    let n = r.norm_l2();
    Ok((r, n))
}
