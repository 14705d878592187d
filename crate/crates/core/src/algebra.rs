//! Finitely generated *-algebras of matrices, stored as a Hilbert–Schmidt
//! orthonormal spanning set so that "for all a, b in A" becomes a finite loop.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{mismatch, Error, Result};
use crate::numat::{op_norm, Matrix};
use crate::scalar::{Real, C};

/// A unital *-closed matrix algebra given by generators and an orthonormal
/// basis of its span.
#[derive(Clone, Debug, PartialEq)]
pub struct StarAlgebra<T> {
    dim_h: usize,
    generators: Vec<Matrix<T>>,
    basis: Vec<Matrix<T>>,
}

impl<T: Real> StarAlgebra<T> {
    /// The one-dimensional algebra `ℂ·I`.
    pub fn scalars(dim_h: usize) -> Self {
        let unit = Matrix::identity(dim_h).scale_real(T::one() / T::lit(dim_h.max(1) as f64).sqrt());
        Self {
            dim_h,
            generators: Vec::new(),
            basis: vec![unit],
        }
    }

    /// Closure of `{I} ∪ generators ∪ generators*` under products, with the
    /// default tolerance and `max_dim = dim_h²`.
    pub fn generated_by(generators: Vec<Matrix<T>>) -> Result<Self> {
        let n = match generators.first() {
            Some(g) => g.rows(),
            None => return Err(Error::InvalidBasis("no generators and no dimension given".into())),
        };
        Self::span_closure(generators, T::default_tol(), n * n)
    }

    /// Builds the smallest unital *-algebra containing `generators`.
    ///
    /// Products of basis elements are Gram–Schmidt reduced (twice) against the
    /// current span and adopted when the remainder exceeds `tol·(1 + ‖x‖)`.
    pub fn span_closure(generators: Vec<Matrix<T>>, tol: T, max_dim: usize) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidBasis("no generators and no dimension given".into()));
        };
        let dim_h = first.rows();
        for g in &generators {
            if !g.is_square() {
                return Err(Error::NotSquare {
                    rows: g.rows(),
                    cols: g.cols(),
                });
            }
            if g.rows() != dim_h {
                return Err(mismatch(
                    format!("{dim_h}x{dim_h}"),
                    format!("{}x{}", g.rows(), g.cols()),
                ));
            }
        }
        Self::closure_from(dim_h, generators, tol, max_dim)
    }

    /// Like [`span_closure`](Self::span_closure) but accepts an empty
    /// generator list (giving `ℂ·I`).
    pub fn span_closure_in(dim_h: usize, generators: Vec<Matrix<T>>, tol: T, max_dim: usize) -> Result<Self> {
        if generators.is_empty() {
            return Ok(Self::scalars(dim_h));
        }
        Self::span_closure(generators, tol, max_dim)
    }

    fn closure_from(dim_h: usize, generators: Vec<Matrix<T>>, tol: T, max_dim: usize) -> Result<Self> {
        let mut basis: Vec<Matrix<T>> = Vec::new();
        let mut seeds = vec![Matrix::identity(dim_h)];
        for g in &generators {
            seeds.push(g.clone());
            seeds.push(g.adjoint());
        }
        for s in seeds {
            adopt(&mut basis, s, tol, max_dim)?;
        }
        let mut processed = 0;
        while processed < basis.len() {
            let newest = basis[processed].clone();
            for i in 0..=processed {
                let other = basis[i].clone();
                adopt(&mut basis, other.matmul(&newest), tol, max_dim)?;
                adopt(&mut basis, newest.matmul(&other), tol, max_dim)?;
            }
            processed += 1;
        }
        Ok(Self {
            dim_h,
            generators,
            basis,
        })
    }

    /// Reassembles an algebra from stored parts, validating orthonormality
    /// and closure at `tol`.
    pub fn from_parts(generators: Vec<Matrix<T>>, basis: Vec<Matrix<T>>, tol: T) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(Error::InvalidBasis("empty basis".into()));
        };
        let dim_h = first.rows();
        for m in basis.iter().chain(&generators) {
            if m.shape() != (dim_h, dim_h) {
                return Err(mismatch(
                    format!("{dim_h}x{dim_h}"),
                    format!("{}x{}", m.rows(), m.cols()),
                ));
            }
        }
        let alg = Self {
            dim_h,
            generators,
            basis,
        };
        let ortho = alg.orthonormality_residual();
        if ortho > tol {
            return Err(Error::InvalidBasis(format!(
                "not orthonormal: residual {:e}",
                ortho.to_f64_lossy()
            )));
        }
        let id = alg.membership_residual_unchecked(&Matrix::identity(dim_h));
        if id > tol * T::lit(dim_h as f64).sqrt().max(T::one()) {
            return Err(Error::InvalidBasis(format!(
                "identity not in span: residual {:e}",
                id.to_f64_lossy()
            )));
        }
        for (i, g) in alg.generators.iter().enumerate() {
            let r = alg.membership_residual_unchecked(g);
            if r > tol * (T::one() + g.fro_norm()) {
                return Err(Error::InvalidBasis(format!(
                    "generator {i} not in span: residual {:e}",
                    r.to_f64_lossy()
                )));
            }
        }
        let closure = alg.closure_residual();
        if closure > tol {
            return Err(Error::InvalidBasis(format!(
                "span not closed under products/adjoints: residual {:e}",
                closure.to_f64_lossy()
            )));
        }
        Ok(alg)
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn generators(&self) -> &[Matrix<T>] {
        &self.generators
    }

    pub fn basis(&self) -> &[Matrix<T>] {
        &self.basis
    }

    /// Dimension of the algebra as a vector space.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `max |⟨bᵢ, bⱼ⟩ − δᵢⱼ|`
    pub fn orthonormality_residual(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate().skip(i) {
                let target = if i == j { C::one() } else { C::zero() };
                worst = worst.max((a.hs_inner(b) - target).norm());
            }
        }
        worst
    }

    /// Largest relative membership residual of `bᵢ bⱼ` and `bᵢ*`.
    pub fn closure_residual(&self) -> T {
        let n = self.basis.len();
        (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let p = self.basis[i].matmul(&self.basis[j]);
                let mut r = self.membership_residual_unchecked(&p) / (T::one() + p.fro_norm());
                if j == 0 {
                    let adj = self.basis[i].adjoint();
                    r = r.max(self.membership_residual_unchecked(&adj));
                }
                r
            })
            .reduce(T::zero, T::max)
    }

    /// Hilbert–Schmidt coefficients `⟨bᵢ, x⟩`.
    pub fn coefficients(&self, x: &Matrix<T>) -> Result<Vec<C<T>>> {
        self.check_dim(x)?;
        Ok(self.basis.iter().map(|b| b.hs_inner(x)).collect())
    }

    /// `Σ cᵢ bᵢ`
    pub fn combination(&self, coeffs: &[C<T>]) -> Result<Matrix<T>> {
        if coeffs.len() != self.basis.len() {
            return Err(mismatch(self.basis.len(), coeffs.len()));
        }
        let mut out = Matrix::zeros(self.dim_h, self.dim_h);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, b);
        }
        Ok(out)
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let coeffs = self.coefficients(x)?;
        self.combination(&coeffs)
    }

    /// `‖x − Σ⟨bᵢ,x⟩bᵢ‖` in Hilbert–Schmidt norm.
    pub fn membership_residual(&self, x: &Matrix<T>) -> Result<T> {
        self.check_dim(x)?;
        Ok(self.membership_residual_unchecked(x))
    }

    fn membership_residual_unchecked(&self, x: &Matrix<T>) -> T {
        let mut r = x.clone();
        for b in &self.basis {
            let c = b.hs_inner(&r);
            r.axpy(-c, b);
        }
        r.fro_norm()
    }

    /// `max_b ‖[x, b]‖` over the basis (operator norm).
    pub fn commutant_residual(&self, x: &Matrix<T>) -> Result<T> {
        self.check_dim(x)?;
        Ok(self
            .basis
            .par_iter()
            .map(|b| op_norm(&x.commutator(b)))
            .reduce(T::zero, T::max))
    }

    fn check_dim(&self, x: &Matrix<T>) -> Result<()> {
        if x.shape() != (self.dim_h, self.dim_h) {
            return Err(mismatch(
                format!("{0}x{0}", self.dim_h),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        Ok(())
    }

    /// Image of the algebra under `x ↦ f(x)` applied to generators and basis
    /// (for unitary changes of frame, tensor factors, ...). The caller is
    /// responsible for `f` being a *-homomorphism preserving the HS inner
    /// product up to a common factor; the basis is renormalized.
    pub fn map(&self, f: impl Fn(&Matrix<T>) -> Matrix<T>) -> Self {
        let basis: Vec<Matrix<T>> = self
            .basis
            .iter()
            .map(|b| {
                let m = f(b);
                let n = m.fro_norm();
                m.scale_real(T::one() / n)
            })
            .collect();
        let dim_h = basis.first().map_or(self.dim_h, Matrix::rows);
        Self {
            dim_h,
            generators: self.generators.iter().map(f).collect(),
            basis,
        }
    }
}

fn adopt<T: Real>(basis: &mut Vec<Matrix<T>>, x: Matrix<T>, tol: T, max_dim: usize) -> Result<bool> {
    let threshold = tol * (T::one() + x.fro_norm());
    let mut r = x;
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.hs_inner(&r);
            if !c.is_zero() {
                r.axpy(-c, b);
            }
        }
    }
    let norm = r.fro_norm();
    if norm <= threshold {
        return Ok(false);
    }
    if basis.len() >= max_dim {
        return Err(Error::ClosureTooLarge {
            max_dim,
            reached: basis.len() + 1,
        });
    }
    basis.push(r.scale_real(T::one() / norm));
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numat::pauli;

    #[test]
    fn identity_generates_scalars() {
        let a = StarAlgebra::<f64>::generated_by(vec![Matrix::identity(2)]).unwrap();
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn sigma_x_generates_two_dims() {
        let a = StarAlgebra::<f64>::generated_by(vec![pauli(1)]).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn two_paulis_generate_everything() {
        let a = StarAlgebra::<f64>::generated_by(vec![pauli(1), pauli(3)]).unwrap();
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn max_dim_enforced() {
        let err = StarAlgebra::<f64>::span_closure(vec![pauli(1), pauli(3)], 1e-9, 3).unwrap_err();
        assert!(matches!(err, Error::ClosureTooLarge { max_dim: 3, .. }));
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let err = StarAlgebra::<f64>::span_closure(vec![pauli(1), Matrix::identity(3)], 1e-9, 9);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn membership_examples() {
        let a = StarAlgebra::<f64>::generated_by(vec![pauli(3)]).unwrap();
        assert!(a.membership_residual(&Matrix::identity(2)).unwrap() < 1e-12);
        let x = pauli::<f64>(1);
        assert!((a.membership_residual(&x).unwrap() - x.fro_norm()).abs() < 1e-12);
        assert!(a.commutant_residual(&Matrix::scalar(2, C::new(3.0, 1.0))).unwrap() < 1e-15);
        assert!(a.membership_residual(&Matrix::identity(3)).is_err());
    }

    #[test]
    fn from_parts_round_trip_and_rejection() {
        let a = StarAlgebra::<f64>::generated_by(vec![pauli(1)]).unwrap();
        let b = StarAlgebra::from_parts(a.generators().to_vec(), a.basis().to_vec(), 1e-9).unwrap();
        assert_eq!(a, b);
        // basis {I/√2, σ¹/√2} without closure partner for σ³ generator
        let err = StarAlgebra::from_parts(vec![pauli(3)], a.basis().to_vec(), 1e-9);
        assert!(matches!(err, Err(Error::InvalidBasis(_))));
    }
}
