//! Small dense helpers shared by the design and beamforming code.

use nalgebra::SymmetricEigen;

use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Real inner product `Re(aᴴ b)` on `ℂᴹ` viewed as `ℝ²ᴹ`.
pub fn real_inner(a: &CVector, b: &CVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// `xᴴ A x` without forming intermediate matrices.
pub fn quadratic_form(a: &CMatrix, x: &CVector) -> Complex64 {
    x.dotc(&(a * x))
}

/// Largest absolute deviation of `a` from its own conjugate transpose.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenpair with the algebraically largest eigenvalue of a Hermitian matrix.
///
/// The returned eigenvector has unit norm and is rotated so that its
/// largest-magnitude entry is real and positive, which makes the result
/// deterministic up to degenerate eigenspaces.
pub fn max_eigenpair(a: &CMatrix) -> Result<(f64, CVector)> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::dim(format!(
            "eigen-solve needs a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in eigen-solve input".into()));
    }
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigen-solver did not converge".into()))?;
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mut v: CVector = eig.eigenvectors.column(idx).into_owned();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("non-empty eigenvector");
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
    Ok((value, v))
}
