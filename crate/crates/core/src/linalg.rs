//! Small dense complex linear algebra used on the hot paths.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Determinant of the `r x r` row-major matrix stored in `buf`, by LU
/// factorization with partial pivoting. `buf` is overwritten by the factors.
pub fn lu_determinant_in_place(buf: &mut [Complex64], r: usize) -> Complex64 {
    assert_eq!(buf.len(), r * r, "buffer does not hold an r x r matrix");
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..r {
        let mut pivot = col;
        let mut best = buf[col * r + col].norm();
        for row in col + 1..r {
            let mag = buf[row * r + col].norm();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..r {
                buf.swap(col * r + k, pivot * r + k);
            }
            det = -det;
        }
        let diag = buf[col * r + col];
        det *= diag;
        for row in col + 1..r {
            let factor = buf[row * r + col] / diag;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col + 1..r {
                let upper = buf[col * r + k];
                buf[row * r + k] -= factor * upper;
            }
        }
    }
    det
}

/// Determinant of a square complex matrix (LU with partial pivoting).
pub fn lu_determinant(a: &DMatrix<Complex64>) -> Complex64 {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let r = a.nrows();
    let mut buf: Vec<Complex64> = (0..r * r).map(|idx| a[(idx / r, idx % r)]).collect();
    lu_determinant_in_place(&mut buf, r)
}

/// Frobenius norm; an upper bound on the spectral norm.
pub fn frobenius_norm(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm as the square root of the largest eigenvalue of the
/// Hermitian matrix `A^H A`.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let gram = a.adjoint() * a;
    gram.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .sqrt()
}
