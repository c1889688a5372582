use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result, Scalar};

/// Rejects non-square, non-finite or asymmetric matrices. Entries may
/// differ from their mirror by a few ulps of the matrix scale.
pub(crate) fn check_symmetric<T: Scalar>(m: &DMatrix<T>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    let scale = m.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let tol = scale * T::lit(1e-12);
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix with eigenpairs ordered by
/// `key` descending (ties keep solver order), and each eigenvector's sign
/// fixed so its largest-magnitude entry is positive.
pub(crate) fn sorted_symmetric_eigen<T: Scalar>(
    m: &DMatrix<T>,
    key: impl Fn(T) -> T,
) -> Result<(Vec<T>, DMatrix<T>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::try_new(sym, T::default_epsilon(), 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        key(eig.eigenvalues[b])
            .partial_cmp(&key(eig.eigenvalues[a]))
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}
