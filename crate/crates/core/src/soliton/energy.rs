use alloc::vec;
use alloc::vec::Vec;

use super::ProblemSpec;
use crate::lattice::{nonlinear_residual, LatticeField, LatticeOperator, Window};
use crate::{Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

fn check(spec: &ProblemSpec, a: &LatticeField) -> Result<()> {
    spec.operator().check_window(&a.window())?;
    if a.d() != spec.d() {
        return Err(Error::WindowMismatch);
    }
    Ok(())
}

/// `J(a) = ½(Ca,a) − ½λ‖a‖² + ½(Va,a) − ¼λσ‖a‖₄⁴` on the window of `a`.
pub fn energy(spec: &ProblemSpec, a: &LatticeField) -> Result<f64> {
    check(spec, a)?;
    let ca = spec.operator().apply(a)?;
    let quad = a.inner(&ca)?;
    let scale = ca.norm_l2() * a.norm_l2();
    if quad.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidParameter(alloc::format!("energy has imaginary part {:e}", quad.im)));
    }
    let w = a.window();
    let v = spec.defect().diagonal(&w, a.d());
    let (mut n2, mut vq, mut n4) = (0.0, 0.0, 0.0);
    for (z, vi) in a.values().iter().zip(&v) {
        let s = z.norm_sqr();
        n2 += s;
        vq += vi * s;
        n4 += s * s;
    }
    let (l, sg) = (spec.lambda(), spec.sigma());
    Ok(0.5 * quad.re - 0.5 * l * n2 + 0.5 * vq - 0.25 * l * sg * n4)
}

/// `J′(a) = Ca − λa + Va − λσ|a|²a`, which is the soliton residual itself.
pub fn energy_gradient(spec: &ProblemSpec, a: &LatticeField) -> Result<LatticeField> {
    check(spec, a)?;
    Ok(nonlinear_residual(spec.operator(), spec.defect(), spec.lambda(), spec.sigma(), a)?.0)
}

/// `J` and its derivatives on real vectors of one fixed window.
pub(crate) struct Functional<'a> {
    op: &'a dyn LatticeOperator,
    pub window: Window,
    vdiag: Vec<f64>,
    lambda: f64,
    sigma: f64,
    scratch: core::cell::RefCell<Vec<f64>>,
}

impl<'a> Functional<'a> {
    pub fn new(spec: &'a ProblemSpec, window: Window) -> Result<Self> {
        spec.operator().check_window(&window)?;
        let n = window.num_sites() * spec.d();
        Ok(Self {
            op: spec.operator(),
            window,
            vdiag: spec.defect().diagonal(&window, spec.d()),
            lambda: spec.lambda(),
            sigma: spec.sigma(),
            scratch: core::cell::RefCell::new(vec![0.0; n]),
        })
    }

    pub fn len(&self) -> usize {
        self.vdiag.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut cx = self.scratch.borrow_mut();
        self.op.apply_real(&self.window, x, &mut cx);
        let (l, s) = (self.lambda, self.sigma);
        x.iter()
            .zip(cx.iter())
            .zip(&self.vdiag)
            .map(|((&xi, &ci), &vi)| 0.5 * xi * ci - 0.5 * l * xi * xi + 0.5 * vi * xi * xi - 0.25 * l * s * xi.powi(4))
            .sum()
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.op.apply_real(&self.window, x, out);
        let (l, s) = (self.lambda, self.sigma);
        for ((o, &xi), &vi) in out.iter_mut().zip(x).zip(&self.vdiag) {
            *o += (vi - l) * xi - l * s * xi * xi * xi;
        }
    }

    /// Hessian `C − λ + V − 3λσ diag(x²)` applied to `u`.
    pub fn hessian_apply(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        self.op.apply_real(&self.window, u, out);
        let (l, s) = (self.lambda, self.sigma);
        for (((o, &ui), &xi), &vi) in out.iter_mut().zip(u).zip(x).zip(&self.vdiag) {
            *o += (vi - l - 3.0 * l * s * xi * xi) * ui;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BlockStencil, DefectEntry, DiagonalDefect};
    use crate::soliton::Geometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(stencil: BlockStencil, defect: DiagonalDefect, lambda: f64, sigma: f64) -> ProblemSpec {
        ProblemSpec::new(stencil, defect, lambda, sigma, None, 0.0, Geometry::WholeSpace, false).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let s = spec(BlockStencil::identity(1), DiagonalDefect::empty(), 1.0, 2.0);
        let w = Window::centered(3);
        assert_eq!(energy(&s, &LatticeField::zeros(w, 1)).unwrap(), 0.0);
        let a = LatticeField::delta(w, 1, [0, 0], 0, 1.0).unwrap();
        assert!((energy(&s, &a).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(energy_gradient(&s, &LatticeField::zeros(w, 1)).unwrap().norm_l2(), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let v = DiagonalDefect::new(alloc::vec![DefectEntry { site: [0, 0], component: 1, value: -0.1 }]).unwrap();
        let s = spec(BlockStencil::diatomic(5.0, 1.0, 0.5), v, 5.0, 1.0);
        let w = Window::centered(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = w.num_sites() * 2;
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = LatticeField::from_real(w, 2, &x).unwrap();
            let g = energy_gradient(&s, &a).unwrap();
            let exact: f64 = g.real_parts().iter().zip(&b).map(|(p, q)| p * q).sum();
            let h = 1e-5;
            let shifted = |t: f64| {
                let y: Vec<f64> = x.iter().zip(&b).map(|(p, q)| p + t * q).collect();
                energy(&s, &LatticeField::from_real(w, 2, &y).unwrap()).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }

    #[test]
    fn real_functional_agrees_with_field_api() {
        let s = spec(BlockStencil::diatomic(5.0, 1.0, 0.5), DiagonalDefect::empty(), 5.0, 1.0);
        let w = Window::centered(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = Functional::new(&s, w).unwrap();
        let a = LatticeField::from_real(w, 2, &x).unwrap();
        assert!((f.value(&x) - energy(&s, &a).unwrap()).abs() < 1e-12);
        let mut g = vec![0.0; 32];
        f.gradient(&x, &mut g);
        let gf = energy_gradient(&s, &a).unwrap().real_parts();
        assert!(g.iter().zip(&gf).all(|(p, q)| (p - q).abs() < 1e-12));
    }
}
