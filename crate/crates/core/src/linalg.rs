//! Leading singular vectors with a deterministic sign convention.
//!
//! Subspaces are taken from a symmetric eigendecomposition of the smaller Gram
//! matrix. Mode sizes of an embedded tensor are small (a window length or a
//! window count), so a full decomposition is cheap and exactly reproducible.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Matrix with orthonormal columns.
///
/// In every column the entry of largest magnitude is nonnegative (ties go to the
/// lowest row), so a subspace basis produced here is reproducible bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(DMatrix<f64>);

impl OrthonormalBasis {
    /// Wraps a matrix, checking `U^T U = I` to `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.ncols() > m.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} orthonormal columns cannot fit in {} rows",
                m.ncols(),
                m.nrows()
            )));
        }
        let dev = (m.transpose() * &m - DMatrix::identity(m.ncols(), m.ncols())).amax();
        if !(dev <= tol) {
            return Err(Error::InvalidParameter(format!(
                "columns are not orthonormal (max deviation {dev:e})"
            )));
        }
        Ok(OrthonormalBasis(m))
    }

    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        OrthonormalBasis(m)
    }

    pub fn identity(n: usize) -> Self {
        OrthonormalBasis(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn rank(&self) -> usize {
        self.0.ncols()
    }

    /// Largest entry of `|U^T U - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rank();
        (self.0.transpose() * &self.0 - DMatrix::identity(r, r)).amax()
    }
}

/// The `r` dominant left singular vectors of `a`.
pub fn leading_singular_vectors(a: &DMatrix<f64>, r: usize) -> Result<OrthonormalBasis> {
    let (rows, cols) = a.shape();
    if r == 0 || r > rows.min(cols) {
        return Err(Error::InvalidRank {
            mode: 0,
            rank: r,
            reason: format!("need 1 <= r <= min({rows}, {cols})"),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("singular vector input"));
    }
    if rows <= cols {
        return Ok(dominant_eigenvectors(a * a.transpose(), r));
    }
    // tall: eigenvectors V of A^T A, then U = A V / sigma
    let (v, values) = top_eigenpairs(a.transpose() * a, r);
    let mut u = a * v;
    for (j, &lambda) in values.iter().enumerate() {
        if lambda > 0.0 {
            u.column_mut(j).unscale_mut(lambda.sqrt());
        }
    }
    let u = orthonormalize_columns(u, None);
    Ok(OrthonormalBasis(apply_sign_convention(u)))
}

/// Top-`r` eigenvectors of a symmetric positive semidefinite matrix, sign-fixed.
/// `r` may exceed the matrix rank: null-space directions complete the basis.
pub(crate) fn dominant_eigenvectors(gram: DMatrix<f64>, r: usize) -> OrthonormalBasis {
    let (v, _) = top_eigenpairs(gram, r);
    OrthonormalBasis(apply_sign_convention(v))
}

fn top_eigenpairs(gram: DMatrix<f64>, r: usize) -> (DMatrix<f64>, Vec<f64>) {
    let n = gram.nrows();
    debug_assert!(r <= n);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let cols: Vec<DVector<f64>> = order[..r]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let values = order[..r].iter().map(|&i| eig.eigenvalues[i]).collect();
    (DMatrix::from_columns(&cols), values)
}

pub(crate) fn apply_sign_convention(mut u: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in u.column_iter_mut() {
        let mut best = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    u
}

/// Modified Gram-Schmidt (two passes) over the columns of `m`, orthogonal to
/// `against` when given. Columns that collapse numerically are replaced by the
/// first standard basis vectors that still have a component left.
pub(crate) fn orthonormalize_columns(
    m: DMatrix<f64>,
    against: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    let rows = m.nrows();
    let mut basis: Vec<DVector<f64>> = against
        .map(|a| a.column_iter().map(|c| c.into_owned()).collect())
        .unwrap_or_default();
    let fixed = basis.len();
    let mut next_unit = 0usize;
    for col in m.column_iter() {
        let scale = col.norm();
        let mut v = col.into_owned();
        if !project_out(&mut v, &basis, scale) {
            loop {
                assert!(next_unit < rows, "more columns than rows");
                let mut e = DVector::zeros(rows);
                e[next_unit] = 1.0;
                next_unit += 1;
                if project_out(&mut e, &basis, 1.0) {
                    v = e;
                    break;
                }
            }
        }
        basis.push(v);
    }
    DMatrix::from_columns(&basis[fixed..])
}

/// Removes components along `basis` and normalizes. Returns false if less than
/// `1e-10 * scale` remains.
fn project_out(v: &mut DVector<f64>, basis: &[DVector<f64>], scale: f64) -> bool {
    if !(scale > 0.0) {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(v);
            v.axpy(-d, b, 1.0);
        }
    }
    let n = v.norm();
    if n <= 1e-10 * scale {
        return false;
    }
    v.unscale_mut(n);
    true
}
