//! Thick-free restarted Lanczos for the lowest eigenpair of a real symmetric
//! operator acting on complex vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{inner, norm};
use crate::{Error, Result};

pub(crate) const KRYLOV_DIM: usize = 60;

pub(crate) struct Run {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn project_out(w: &mut [Complex64], basis: &[&[Complex64]]) {
    for q in basis {
        let c = inner(q, w);
        for (a, b) in w.iter_mut().zip(q.iter()) {
            *a -= c * b;
        }
    }
}

/// Lowest eigenpair of `op` in the complement of `deflate` (orthonormal vectors).
pub(crate) fn lowest<F>(
    op: F,
    start: &[Complex64],
    deflate: &[&[Complex64]],
    krylov: usize,
    tol: f64,
    max_matvecs: usize,
) -> Result<Run>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = start.len();
    let krylov = krylov.max(1).min(dim);
    let mut x = start.to_vec();
    project_out(&mut x, deflate);
    project_out(&mut x, deflate);
    let n0 = norm(&x);
    if n0 < 1e-14 {
        return Err(Error::NoSolution {
            detail: "start vector lies in the deflated space".into(),
        });
    }
    x.iter_mut().for_each(|c| *c /= n0);

    let mut matvecs = 0;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let mut q: Vec<Vec<Complex64>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut scale = 0.0f64;
        for j in 0..krylov {
            op(&q[j], &mut w);
            matvecs += 1;
            let a = inner(&q[j], &w).re;
            alpha.push(a);
            scale = scale.max(a.abs());
            for _ in 0..2 {
                let refs: Vec<&[Complex64]> = q.iter().map(Vec::as_slice).collect();
                project_out(&mut w, &refs);
                project_out(&mut w, deflate);
            }
            let b = norm(&w);
            if j + 1 == krylov || b <= 1e-13 * scale.max(1.0) {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|c| c / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .cloned()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let y = eig.eigenvectors.column(imin);
        x.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (i, qi) in q.iter().take(m).enumerate() {
            for (a, b) in x.iter_mut().zip(qi) {
                *a += b * y[i];
            }
        }
        project_out(&mut x, deflate);
        let nx = norm(&x);
        x.iter_mut().for_each(|c| *c /= nx);

        op(&x, &mut w);
        matvecs += 1;
        let value = inner(&x, &w).re;
        let mut r = w.clone();
        for (a, b) in r.iter_mut().zip(&x) {
            *a -= b * value;
        }
        project_out(&mut r, deflate);
        let residual = norm(&r);
        if residual <= tol {
            return Ok(Run {
                value,
                vector: x,
                residual,
                matvecs,
            });
        }
        if matvecs >= max_matvecs {
            return Err(Error::NotConverged {
                iterations: matvecs,
                residual,
            });
        }
    }
}
