//! Matrix-free Krylov solvers and small dense helpers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::{Complex, Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// True relative residual ‖b − Ax‖ / ‖b‖ after the last iteration.
    pub relative_residual: f64,
}

fn cnorm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn cdot(u: &[Complex], v: &[Complex]) -> Complex {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Conjugate gradients for a Hermitian positive definite operator.
pub fn conjugate_gradient<A>(apply: A, b: &[Complex], tol: f64, max_iter: usize) -> Result<(Vec<Complex>, SolveStats)>
where
    A: Fn(&[Complex], &mut [Complex]),
{
    let n = b.len();
    let mut x = vec![Complex::new(0.0, 0.0); n];
    let bnorm = cnorm(b);
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![Complex::new(0.0, 0.0); n];
    let mut rs = cdot(&r, &r).re;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        apply(&p, &mut ap);
        let pap = cdot(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(Error::SingularSystem);
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rs_new = cdot(&r, &r).re;
        if rs_new.sqrt() <= tol * bnorm {
            break;
        }
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
        rs = rs_new;
    }
    apply(&x, &mut ap);
    let res: f64 = b.iter().zip(&ap).map(|(bi, ai)| (bi - ai).norm_sqr()).sum::<f64>().sqrt();
    let stats = SolveStats { iterations, relative_residual: res / bnorm };
    if stats.relative_residual > tol * 10.0 {
        return Err(Error::SolverStalled { iterations, residual: stats.relative_residual });
    }
    Ok((x, stats))
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// MINRES for a real symmetric (possibly indefinite) operator.
///
/// Returns the iterate together with the true relative residual; the
/// caller decides whether that is good enough.
pub fn minres<A>(mut apply: A, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, SolveStats)
where
    A: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let beta1 = norm(b);
    if beta1 == 0.0 {
        return (x, SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = b.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let (mut oldb, mut beta, mut dbar, mut epsln) = (0.0, beta1, 0.0, 0.0);
    let (mut phibar, mut cs, mut sn) = (beta1, -1.0, 0.0);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        apply(&v, &mut y);
        if iterations >= 2 {
            let c = beta / oldb;
            for i in 0..n {
                y[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for i in 0..n {
            y[i] -= c * r2[i];
        }
        core::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm(&y);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        core::mem::swap(&mut w1, &mut w2);
        core::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= tol * beta1 || beta == 0.0 {
            break;
        }
    }
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let res: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum::<f64>().sqrt();
    (x, SolveStats { iterations, relative_residual: res / beta1 })
}

/// Frobenius norm, an upper bound for the spectral norm.
pub fn frobenius<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.clone().modulus_squared()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minres_solves_indefinite_system() {
        // tridiagonal with an indefinite diagonal
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -2.5 } else { 3.0 }).collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += 0.7 * x[i - 1];
                }
                if i + 1 < n {
                    s += 0.7 * x[i + 1];
                }
                y[i] = s;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (_x, stats) = minres(apply, &b, 1e-14, 500);
        assert!(stats.relative_residual < 1e-12, "{stats:?}");
    }

    #[test]
    fn cg_solves_hermitian_system() {
        let n = 30;
        let phase = Complex::from_polar(1.0, 0.3);
        // periodic chain with a twisted bond, shifted to be positive definite
        let apply = |x: &[Complex], y: &mut [Complex]| {
            for i in 0..n {
                let right = if i + 1 < n { x[i + 1] } else { phase * x[0] };
                let left = if i > 0 { x[i - 1] } else { phase.conj() * x[n - 1] };
                y[i] = x[i] * 2.5 - right - left;
            }
        };
        let b: Vec<Complex> = (0..n).map(|i| Complex::new(1.0, i as f64 * 0.1)).collect();
        let (x, stats) = conjugate_gradient(apply, &b, 1e-12, 200).unwrap();
        assert!(stats.relative_residual < 1e-11);
        let mut ax = vec![Complex::new(0.0, 0.0); n];
        apply(&x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).norm() < 1e-9));
    }
}
