//! Small fixed-size linear algebra for 3×3 systems.

use crate::scalar::Scalar;

/// Row-major 3×3 matrix.
pub type Mat3<T> = [[T; 3]; 3];

pub fn trace<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Sum of the three principal 2×2 minors.
pub fn principal_minor_sum<T: Scalar>(m: &Mat3<T>) -> T {
    (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
}

/// Coefficients `(s1, s2, s3)` of the characteristic polynomial
/// `λ³ + s1 λ² + s2 λ + s3` of `m`.
pub fn char_poly<T: Scalar>(m: &Mat3<T>) -> [T; 3] {
    [-trace(m), principal_minor_sum(m), -det(m)]
}

pub fn mat_vec<T: Scalar>(m: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn norm<T: Scalar, const N: usize>(v: &[T; N]) -> T {
    v.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt()
}

/// Solves `m · x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot is exactly zero or the result is not finite.
pub fn solve<T: Scalar>(m: &Mat3<T>, b: &[T; 3]) -> Option<[T; 3]> {
    let mut a = *m;
    let mut r = *b;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot][col] == T::zero() {
            return None;
        }
        a.swap(col, pivot);
        r.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, &src) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *dst = *dst - f * src;
            }
            r[row] = r[row] - f * r[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = r[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_needs_pivoting() {
        let m: Mat3<f64> = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let x = solve(&m, &[5.0, 3.0, 6.0]).unwrap();
        let back = mat_vec(&m, &x);
        for i in 0..3 {
            assert!((back[i] - [5.0, 3.0, 6.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_returns_none() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]];
        assert!(solve(&m, &[1.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn char_poly_of_diagonal() {
        // (λ-1)(λ-2)(λ-3) = λ³ - 6λ² + 11λ - 6
        let m = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
        assert_eq!(char_poly(&m), [-6.0, 11.0, -6.0]);
    }
}
