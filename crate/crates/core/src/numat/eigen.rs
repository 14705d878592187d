//! Hermitian eigendecomposition and the spectral functions built on it.
//!
//! Householder reduction to a real symmetric tridiagonal matrix followed by
//! implicit QL with Wilkinson-type shifts.

use num_traits::{One, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct HermEig<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> HermEig<T> {
    /// `V diag(f(λ)) V*`
    pub fn apply_fn(&self, f: impl Fn(T) -> C<T>) -> Matrix<T> {
        let n = self.values.len();
        let fv: Vec<C<T>> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * fv[j]);
        scaled.matmul(&self.vectors.adjoint())
    }
}

pub fn hermitian_asymmetry<T: Real>(m: &Matrix<T>) -> T {
    (m - &m.adjoint()).fro_norm()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Inputs whose anti-Hermitian part exceeds `tol · (1 + ‖m‖_F)` are rejected.
pub fn herm_eig<T: Real>(m: &Matrix<T>) -> Result<HermEig<T>> {
    herm_eig_tol(m, T::default_tol())
}

pub fn herm_eig_tol<T: Real>(m: &Matrix<T>, tol: T) -> Result<HermEig<T>> {
    check_hermitian(m, tol)?;
    let (values, vectors) = decompose(m, true)?;
    Ok(HermEig {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Ascending eigenvalues only.
pub fn herm_eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    check_hermitian(m, T::default_tol())?;
    Ok(decompose(m, false)?.0)
}

fn check_hermitian<T: Real>(m: &Matrix<T>, tol: T) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let asym = hermitian_asymmetry(m);
    if asym > tol * (T::one() + m.fro_norm()) {
        return Err(Error::NotHermitian {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Spectral norm: square root of the largest eigenvalue of `m* m`.
pub fn op_norm<T: Real>(m: &Matrix<T>) -> T {
    if m.rows() == 0 || m.cols() == 0 {
        return T::zero();
    }
    let gram = if m.rows() < m.cols() {
        m.matmul(&m.adjoint())
    } else {
        m.adjoint().matmul(m)
    };
    let (values, _) = decompose(&gram, false).expect("QL iteration failed on a Gram matrix");
    values.last().copied().unwrap_or_else(T::zero).max(T::zero()).sqrt()
}

/// Applies `f` eigenvalue-wise to a Hermitian matrix.
pub fn herm_fn<T: Real>(m: &Matrix<T>, f: impl Fn(T) -> C<T>) -> Result<Matrix<T>> {
    Ok(herm_eig(m)?.apply_fn(f))
}

/// Matrix exponential of a Hermitian matrix.
pub fn herm_exp<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    herm_fn(m, |l| cr(l.exp()))
}

/// Principal square root of an invertible Hermitian matrix: λ ↦ √λ for
/// λ > 0 and λ ↦ i√|λ| for λ < 0.
pub fn principal_sqrt<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = herm_eig(m)?;
    let largest = eig.values.iter().fold(T::zero(), |acc, l| acc.max(l.abs()));
    let smallest = eig.values.iter().fold(T::infinity(), |acc, l| acc.min(l.abs()));
    if eig.values.is_empty() || smallest <= T::default_tol() * largest.max(T::one()) {
        return Err(Error::Singular {
            measured: smallest.to_f64_lossy(),
        });
    }
    Ok(eig.apply_fn(|l| {
        if l > T::zero() {
            cr(l.sqrt())
        } else {
            c(T::zero(), (-l).sqrt())
        }
    }))
}

/// Core routine. The input is read through its lower triangle.
fn decompose<T: Real>(m: &Matrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Matrix<T>>)> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0, 0))));
    }
    let (mut d, mut e, q) = tridiagonalize(m, want_vectors);
    let mut z = want_vectors.then(|| {
        let mut z = vec![T::zero(); n * n];
        for i in 0..n {
            z[i * n + i] = T::one();
        }
        z
    });
    tql(&mut d, &mut e, z.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // V = (Q Φ) Z with real Z, columns permuted into ascending order
            let mut v = Matrix::zeros(n, n);
            for r in 0..n {
                for (col, &src) in order.iter().enumerate() {
                    let mut acc = C::zero();
                    for k in 0..n {
                        let zk = z[k * n + src];
                        if zk != T::zero() {
                            acc += q[(r, k)] * zk;
                        }
                    }
                    v[(r, col)] = acc;
                }
            }
            Some(v)
        }
        _ => None,
    };
    Ok((values, vectors))
}

/// Householder reduction. Returns the real diagonal, the real (nonnegative)
/// off-diagonal and, if requested, the unitary `QΦ` with `m = QΦ T (QΦ)*`.
fn tridiagonalize<T: Real>(m: &Matrix<T>, want_q: bool) -> (Vec<T>, Vec<T>, Option<Matrix<T>>) {
    let n = m.rows();
    // work on a Hermitian copy built from the lower triangle
    let mut a = Matrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)].conj() });
    for i in 0..n {
        a[(i, i)] = cr(a[(i, i)].re);
    }
    let mut q = want_q.then(|| Matrix::<T>::identity(n));
    let two = T::lit(2.0);

    let mut v: Vec<C<T>> = Vec::with_capacity(n);
    let mut p: Vec<C<T>> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        v.clear();
        v.extend((0..len).map(|i| a[(k + 1 + i, k)]));
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == T::zero() {
            C::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // trailing block B <- H B H with H = I - 2 v v*
        p.clear();
        for i in 0..len {
            let mut acc = C::zero();
            for j in 0..len {
                acc += a[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p.push(acc);
        }
        let cval: T = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * *pi).re).sum();
        for i in 0..len {
            p[i] -= v[i] * cval;
        }
        for i in 0..len {
            for j in 0..len {
                let upd = (v[i] * p[j].conj() + p[i] * v[j].conj()) * two;
                a[(k + 1 + i, k + 1 + j)] -= upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 1..len {
            a[(k + 1 + i, k)] = C::zero();
            a[(k, k + 1 + i)] = C::zero();
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let mut s: C<T> = C::zero();
                for i in 0..len {
                    s += q[(r, k + 1 + i)] * v[i];
                }
                if s.is_zero() {
                    continue;
                }
                for i in 0..len {
                    q[(r, k + 1 + i)] -= s * v[i].conj() * two;
                }
            }
        }
    }

    let d: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![T::zero(); n];
    let mut phi = C::<T>::one();
    let mut phases = Vec::with_capacity(n);
    phases.push(phi);
    for i in 0..n.saturating_sub(1) {
        let ei = a[(i + 1, i)];
        let mag = ei.norm();
        e[i] = mag;
        if mag > T::zero() {
            phi *= ei / mag;
        }
        phases.push(phi);
    }
    if let Some(q) = q.as_mut() {
        for r in 0..n {
            for (col, ph) in phases.iter().enumerate() {
                q[(r, col)] *= *ph;
            }
        }
    }
    (d, e, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix; `e[i]` couples `i`
/// and `i + 1`. `z` is row-major `n x n` and accumulates the rotations.
fn tql<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>, n: usize) -> Result<()> {
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numat::pauli;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
        Matrix::from_fn(n, n, |_, _| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn sigma3_spectrum() {
        let e = herm_eig(&pauli::<f64>(3)).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn sigma1_eigenvectors_up_to_phase() {
        let e = herm_eig(&pauli::<f64>(1)).unwrap();
        assert_close(e.values[0], -1.0, 1e-15);
        assert_close(e.values[1], 1.0, 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let lo = e.vectors.column(0);
        let hi = e.vectors.column(1);
        // |<expected, v>| = 1
        let ov = |v: &[C<f64>], sign: f64| (v[0] * s + v[1] * (sign * s)).norm();
        assert_close(ov(&lo, -1.0), 1.0, 1e-14);
        assert_close(ov(&hi, 1.0), 1.0, 1e-14);
    }

    #[test]
    fn reconstruction_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 10, 17] {
            let m = random_matrix(n, &mut rng).hermitian_part();
            let e = herm_eig(&m).unwrap();
            let rebuilt = e.apply_fn(cr);
            assert!((&rebuilt - &m).fro_norm() < 1e-12 * m.fro_norm().max(1.0));
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            assert!((&vv - &Matrix::identity(n)).fro_norm() < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_and_diagonal_inputs() {
        let m = Matrix::<f64>::from_real_diag(&[3.0, -1.0, 3.0, 0.0]);
        let e = herm_eig(&m).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0, 3.0, 3.0]);
        let z = Matrix::<f64>::zeros(3, 3);
        assert_eq!(herm_eig(&z).unwrap().values, vec![0.0; 3]);
    }

    #[test]
    fn rejects_non_hermitian_with_measured_asymmetry() {
        let m = Matrix::<f64>::from_rows(&[&[(0., 0.), (1., 0.)], &[(0., 0.), (0., 0.)]]);
        match herm_eig(&m) {
            Err(Error::NotHermitian { asymmetry }) => assert_close(asymmetry, 2f64.sqrt(), 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn op_norm_trivial_cases() {
        assert_close(op_norm(&Matrix::<f64>::from_real_diag(&[1.0, -3.0])), 3.0, 1e-15);
        assert_close(op_norm(&pauli::<f64>(1)), 1.0, 1e-15);
        assert_eq!(op_norm(&Matrix::<f64>::zeros(4, 4)), 0.0);
    }

    #[test]
    fn op_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let m = random_matrix(8, &mut rng);
            let gram = m.adjoint().matmul(&m);
            // power iteration oracle on m* m
            let mut v: Vec<C<f64>> = (0..8).map(|i| C::new(1.0 + i as f64 * 0.1, 0.3)).collect();
            let mut lambda = 0.0;
            for _ in 0..5000 {
                let w = gram.mul_vec(&v);
                let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                lambda = norm;
                v = w.into_iter().map(|z| z / norm).collect();
            }
            let oracle = lambda.sqrt();
            let got = op_norm(&m);
            assert!((got - oracle).abs() <= 1e-8 * oracle, "{got} vs {oracle}");
        }
    }

    #[test]
    fn op_norm_rectangular() {
        let row = Matrix::<f64>::from_rows(&[&[(3., 0.), (0., 4.)]]);
        assert_close(op_norm(&row), 5.0, 1e-14);
        assert_close(op_norm(&row.adjoint()), 5.0, 1e-14);
    }

    #[test]
    fn principal_sqrt_branches() {
        let s = principal_sqrt(&Matrix::<f64>::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&Matrix::from_real_diag(&[2.0, 3.0])) < 1e-14);
        let s = principal_sqrt(&Matrix::<f64>::from_real_diag(&[-1.0])).unwrap();
        assert!(s.max_abs_diff(&Matrix::from_diag(&[C::new(0.0, 1.0)])) < 1e-15);
    }

    #[test]
    fn principal_sqrt_rejects_singular() {
        let m = Matrix::<f64>::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(principal_sqrt(&m), Err(Error::Singular { .. })));
    }

    #[test]
    fn principal_sqrt_of_indefinite_is_normal_and_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = random_matrix(6, &mut rng).hermitian_part();
        // shift eigenvalues away from zero on both sides
        let e = herm_eig(&m).unwrap();
        m = e.apply_fn(|l| cr(if l >= 0.0 { l + 0.5 } else { l - 0.5 }));
        let s = principal_sqrt(&m).unwrap();
        let scale = m.fro_norm();
        assert!((&s.matmul(&s) - &m).fro_norm() < 1e-10 * scale);
        assert!(s.commutator(&m).fro_norm() < 1e-10 * scale);
        let normal = &s.matmul(&s.adjoint()) - &s.adjoint().matmul(&s);
        assert!(normal.fro_norm() < 1e-10 * scale);
    }

    #[test]
    fn single_precision_instance() {
        let m = Matrix::<f32>::from_real_diag(&[2.0, -5.0]);
        assert!((op_norm(&m) - 5.0).abs() < 1e-5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Matrix::<f32>::from_fn(5, 5, |_, _| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .hermitian_part();
        let e = herm_eig(&x).unwrap();
        assert!((&e.apply_fn(cr) - &x).fro_norm() < 1e-5);
    }
}
