use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::energy::Functional;
use super::ProblemSpec;
use crate::lattice::LatticeField;
use crate::linalg::{minres, norm};
use crate::{Error, Result};

const MAX_ITER: usize = 50;
/// Largest system solved densely when MINRES fails.
const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub a: LatticeField,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Target `‖J′(a)‖ < 1e-10·max(1, ‖a‖)`.
pub fn residual_tolerance(a_norm: f64) -> f64 {
    1e-10 * a_norm.max(1.0)
}

fn solve_dense(f: &Functional, x: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        f.hessian_apply(x, &e, &mut col);
        jac.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    let scale = jac.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let eig = SymmetricEigen::new(jac);
    let emin = eig.eigenvalues.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
    if emin.abs() < 1e-13 * scale {
        return Err(Error::SingularJacobian { eigenvalue: emin });
    }
    let q = &eig.eigenvectors;
    let coeff = q.transpose() * DVector::from_column_slice(rhs);
    let scaled = DVector::from_iterator(n, coeff.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c / l));
    Ok((q * scaled).iter().copied().collect())
}

/// Damped Newton on the real soliton equation `J′(a) = 0`, with
/// matrix-free MINRES for the Jacobian `C − λ + V − 3λσ diag(a²)`.
pub fn newton_refine(spec: &ProblemSpec, a0: &LatticeField) -> Result<NewtonOutcome> {
    let window = a0.window();
    if a0.d() != spec.d() {
        return Err(Error::WindowMismatch);
    }
    let f = Functional::new(spec, window)?;
    let n = f.len();
    let mut x = a0.real_parts();
    let mut g = vec![0.0; n];
    f.gradient(&x, &mut g);
    let mut res = norm(&g);
    let mut iterations = 0;
    let mut polished = false;
    loop {
        let converged = res < residual_tolerance(norm(&x));
        if converged && (polished || iterations == 0) {
            break;
        }
        if iterations >= MAX_ITER {
            if converged {
                break;
            }
            return Err(Error::NewtonDiverged { iterations, residual: res });
        }
        iterations += 1;
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let (mut dx, stats) = minres(|u, out| f.hessian_apply(&x, u, out), &rhs, 1e-14, 20 * n + 100);
        if !(stats.relative_residual < 1e-8) {
            if n > DENSE_LIMIT {
                return Err(Error::SolverStalled { iterations: stats.iterations, residual: stats.relative_residual });
            }
            dx = solve_dense(&f, &x, &rhs)?;
        }
        let mut s = 1.0;
        let mut trial = vec![0.0; n];
        let mut tg = vec![0.0; n];
        loop {
            for i in 0..n {
                trial[i] = x[i] + s * dx[i];
            }
            f.gradient(&trial, &mut tg);
            let tr = norm(&tg);
            if tr <= (1.0 - 1e-4 * s) * res || (converged && tr <= res) {
                x.copy_from_slice(&trial);
                core::mem::swap(&mut g, &mut tg);
                res = tr;
                break;
            }
            s *= 0.5;
            if s < 1e-10 {
                if converged {
                    // polishing could not improve further
                    polished = true;
                    break;
                }
                return Err(Error::NewtonDiverged { iterations, residual: res });
            }
        }
        if converged {
            polished = true;
        }
    }
    Ok(NewtonOutcome { a: LatticeField::from_real(window, spec.d(), &x)?, residual_norm: res, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BlockStencil, DiagonalDefect, Window};
    use crate::soliton::Geometry;

    fn scalar_spec(c: f64) -> ProblemSpec {
        ProblemSpec::new(BlockStencil::scalar(1, c), DiagonalDefect::empty(), 1.0, 1.0, None, c, Geometry::WholeSpace, false)
            .unwrap()
    }

    #[test]
    fn single_site_root() {
        let s = scalar_spec(2.0);
        let a0 = LatticeField::from_real(Window::centered(1), 1, &[0.7]).unwrap();
        let out = newton_refine(&s, &a0).unwrap();
        assert!((out.a.values()[0].re - 1.0).abs() < 1e-12);
        assert!(out.residual_norm < 1e-14);
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let s = scalar_spec(2.0);
        let a0 = LatticeField::from_real(Window::centered(1), 1, &[1.0]).unwrap();
        let out = newton_refine(&s, &a0).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.a, a0);
    }
}
