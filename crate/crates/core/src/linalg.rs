//! Small vector helpers and the eigensolvers used for ground states and
//! no-photon steady states.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::C64;

pub fn zero_vec(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// Scales `a` to unit norm and returns the previous norm.
pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

pub fn normalized(a: &[C64]) -> Vec<C64> {
    let mut v = a.to_vec();
    normalize(&mut v);
    v
}

/// `|<a|b>|^2` for normalized inputs.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    dot(a, b).norm_sqr() / (norm_sqr(a) * norm_sqr(b))
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Lowest eigenpair of a Hermitian sparse operator by explicitly restarted
/// Lanczos with full reorthogonalization.
///
/// Converged when `||H x - theta x|| < tol`. The starting vector comes from
/// a fixed seed, so repeated calls return the same vector.
pub fn lowest_eigenpair(h: &SparseOperator, tol: f64) -> Result<(f64, Vec<C64>)> {
    let dim = h.dim();
    if dim == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    if dim == 1 {
        return Ok((h.get(0, 0).re, vec![C64::new(1.0, 0.0)]));
    }
    let krylov = dim.min(60);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut x: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    normalize(&mut x);

    let max_restarts = 500;
    let mut residual = f64::INFINITY;
    for _ in 0..max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![x.clone()];
        let mut alpha = Vec::with_capacity(krylov);
        let mut beta: Vec<f64> = Vec::with_capacity(krylov);
        let mut w = zero_vec(dim);
        for k in 0..krylov {
            h.apply_into(&basis[k], &mut w);
            let a = dot(&basis[k], &w).re;
            alpha.push(a);
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for v in &basis {
                    let p = dot(v, &w);
                    axpy(-p, v, &mut w);
                }
            }
            let b = norm(&w);
            if k + 1 == krylov || b < 1e-13 * (1.0 + a.abs()) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = alpha[k];
            if k + 1 < m {
                t[(k, k + 1)] = beta[k];
                t[(k + 1, k)] = beta[k];
            }
        }
        let eig = t.symmetric_eigen();
        let (imin, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let y = eig.eigenvectors.column(imin);
        x = zero_vec(dim);
        for (k, v) in basis.iter().take(m).enumerate() {
            axpy(C64::new(y[k], 0.0), v, &mut x);
        }
        normalize(&mut x);
        h.apply_into(&x, &mut w);
        axpy(C64::new(-theta, 0.0), &x, &mut w);
        residual = norm(&w);
        if residual < tol {
            return Ok((theta, x));
        }
    }
    Err(Error::NoConvergence { residual, iterations: max_restarts })
}

/// Full spectrum of a Hermitian operator through a dense decomposition,
/// ascending.
pub fn dense_eigenvalues(h: &SparseOperator) -> Vec<f64> {
    let mut ev: Vec<f64> = h.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of a general complex matrix via its Schur form.
///
/// Returns eigenvalues and unit right eigenvectors (as columns). The
/// triangular factor is back-substituted column by column; degenerate
/// eigenvalues are regularized with a tiny shift.
pub fn general_eigen(m: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    let n = m.nrows();
    let (q, t) = nalgebra::Schur::new(m.clone()).unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-14 * scale;
    let lambdas: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambdas[k];
            if d.norm() < eps {
                d = C64::new(eps, 0.0);
            }
            y[i] = -s / d;
        }
        let v = &q * y;
        let nv = v.norm();
        vecs.set_column(k, &(v / C64::new(nv, 0.0)));
    }
    (lambdas, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{hop_op, FockBasis};

    #[test]
    fn lanczos_matches_dense() {
        let b = FockBasis::bosons(5, 3).unwrap();
        let mut h = SparseOperator::zeros(b.tag(), b.dim());
        for i in 0..4 {
            h = h.add_op(&hop_op(&b, i, i + 1, None).unwrap()).unwrap();
            h = h.add_op(&hop_op(&b, i + 1, i, None).unwrap()).unwrap();
        }
        let (e0, v) = lowest_eigenpair(&h, 1e-10).unwrap();
        let dense = dense_eigenvalues(&h);
        assert!((e0 - dense[0]).abs() < 1e-9);
        let hv = h.apply(&v);
        let r: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e0).norm_sqr()).sum::<f64>().sqrt();
        assert!(r < 1e-10);
    }

    #[test]
    fn general_eigen_reconstructs() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, -0.5),
                C64::new(0.2, 0.1),
                C64::new(0.0, 0.0),
                C64::new(0.3, 0.0),
                C64::new(-1.0, -0.1),
                C64::new(0.5, 0.5),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.2, -2.0),
            ],
        );
        let (l, v) = general_eigen(&m);
        for k in 0..3 {
            let col = v.column(k).into_owned();
            let res = &m * &col - &col * l[k];
            assert!(res.norm() < 1e-12, "residual {}", res.norm());
        }
    }
}
