//! Dense eigen and least-squares routines on top of nalgebra, with the
//! ordering and sign conventions the rest of the crate relies on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100_000;

/// Eigenpairs of a symmetric matrix, eigenvalues in nonincreasing order.
///
/// `vectors[k]` is the unit eigenvector for `values[k]`, with its
/// largest-magnitude entry (first one on ties) made positive.
#[derive(Debug, Clone)]
pub(crate) struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigendecomposition of a row-major `n × n` symmetric matrix.
pub(crate) fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let m = DMatrix::from_row_slice(n, n, matrix);
    let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric(format!("eigendecomposition of a {n} x {n} matrix did not converge")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// QR factorization of a row-major `n × p` design matrix, `n >= p`.
pub(crate) struct Qr {
    qr: nalgebra::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Qr {
    /// Fails when the design has fewer rows than columns or is numerically
    /// rank-deficient.
    pub fn new(design: &[f64], n: usize, p: usize) -> Result<Self> {
        if n < p {
            return Err(Error::Numeric(format!("{n} observations cannot fit {p} coefficients")));
        }
        let x = DMatrix::from_row_slice(n, p, design);
        let scale = x.column_iter().map(|c| c.norm()).fold(1.0f64, f64::max);
        let qr = x.qr();
        if qr.r().diagonal().iter().any(|d| d.abs() <= 1e-10 * scale) {
            return Err(Error::Numeric(format!("design matrix ({n} x {p}) is rank-deficient")));
        }
        Ok(Self { qr })
    }

    /// Least-squares coefficients for `y`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let r = self.qr.r();
        let qty = self.qr.q().transpose() * nalgebra::DVector::from_column_slice(y);
        let beta = r.solve_upper_triangular(&qty).expect("rank checked at construction");
        beta.iter().copied().collect()
    }
}
