use num_traits::{One, Zero};

use super::{op_norm, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Inverse by LU factorization with partial pivoting.
pub fn inverse<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let scale = m.max_abs().max(T::min_positive_value());
    let threshold = T::epsilon() * T::lit(n.max(1) as f64) * scale;
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .fold((col, T::zero()), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot_mag <= threshold {
            return Err(Error::Singular {
                measured: pivot_mag.to_f64_lossy(),
            });
        }
        if pivot_row != col {
            perm.swap(pivot_row, col);
            for j in 0..n {
                let tmp = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = lu[(col, j)];
                lu[(col, j)] = tmp;
            }
        }
        let pivot = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / pivot;
            if factor.is_zero() {
                continue;
            }
            lu[(r, col)] = factor;
            for j in col + 1..n {
                let u = lu[(col, j)];
                lu[(r, j)] -= factor * u;
            }
        }
    }

    let mut inv = Matrix::zeros(n, n);
    let mut x = vec![C::zero(); n];
    for target in 0..n {
        // solve L U x = P e_target
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if perm[i] == target { C::one() } else { C::zero() };
        }
        for i in 0..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= lu[(i, k)] * x[k];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= lu[(i, k)] * x[k];
            }
            x[i] = acc / lu[(i, i)];
        }
        for (i, &xi) in x.iter().enumerate() {
            inv[(i, target)] = xi;
        }
    }
    Ok(inv)
}

/// Spectral condition number `‖m‖ ‖m⁻¹‖`.
pub fn condition_number<T: Real>(m: &Matrix<T>, inv: &Matrix<T>) -> T {
    op_norm(m) * op_norm(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_inverse_is_exact() {
        let i = Matrix::<f64>::identity(5);
        assert_eq!(inverse(&i).unwrap(), i);
    }

    #[test]
    fn random_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Matrix::<f64>::from_fn(7, 7, |_, _| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let inv = inverse(&m).unwrap();
        assert!((&m.matmul(&inv) - &Matrix::identity(7)).fro_norm() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let m = Matrix::<f64>::from_rows(&[&[(1., 0.), (2., 0.)], &[(2., 0.), (4., 0.)]]);
        assert!(matches!(inverse(&m), Err(Error::Singular { .. })));
    }
}
