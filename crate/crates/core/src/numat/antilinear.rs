use serde::{Deserialize, Serialize};

use super::{kron, op_norm, Matrix};
use crate::error::{mismatch, Error, Result};
use crate::scalar::{Real, C};

/// A sign ±1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.as_i8()
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Antiunitary operator `v ↦ U conj(v)` with `J² = square_sign`.
#[derive(Clone, Debug, PartialEq)]
pub struct Antilinear<T> {
    unitary: Matrix<T>,
    square_sign: Sign,
}

impl<T: Real> Antilinear<T> {
    /// Validates unitarity and the square sign at tolerance `tol` (absolute,
    /// in operator norm).
    pub fn new(unitary: Matrix<T>, square_sign: Sign, tol: T) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::NotSquare {
                rows: unitary.rows(),
                cols: unitary.cols(),
            });
        }
        let j = Self { unitary, square_sign };
        let ures = j.unitarity_residual();
        if ures > tol {
            return Err(Error::NotUnitary {
                residual: ures.to_f64_lossy(),
            });
        }
        let sres = j.square_residual();
        if sres > tol {
            return Err(Error::SquareSign {
                residual: sres.to_f64_lossy(),
            });
        }
        Ok(j)
    }

    /// Plain complex conjugation on `ℂⁿ`.
    pub fn conjugation(n: usize) -> Self {
        Self {
            unitary: Matrix::identity(n),
            square_sign: Sign::Plus,
        }
    }

    pub fn unitary(&self) -> &Matrix<T> {
        &self.unitary
    }

    pub fn square_sign(&self) -> Sign {
        self.square_sign
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    /// `‖U U* − I‖`
    pub fn unitarity_residual(&self) -> T {
        op_norm(&(&self.unitary.matmul(&self.unitary.adjoint()) - &Matrix::identity(self.dim())))
    }

    /// `‖U conj(U) − ε I‖`
    pub fn square_residual(&self) -> T {
        let sq = self.unitary.matmul(&self.unitary.conj());
        op_norm(&(&sq - &Matrix::scalar(self.dim(), C::from(self.square_sign.value::<T>()))))
    }

    /// The sign ε for which `U conj(U) ≈ ε I` is closer.
    pub fn measured_square_sign(&self) -> Sign {
        let sq = self.unitary.matmul(&self.unitary.conj());
        let n = self.dim();
        let plus = (&sq - &Matrix::identity(n)).fro_norm();
        let minus = (&sq + &Matrix::identity(n)).fro_norm();
        if plus <= minus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `J v = U conj(v)`
    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        if v.len() != self.dim() {
            return Err(mismatch(self.dim(), v.len()));
        }
        let cv: Vec<C<T>> = v.iter().map(|z| z.conj()).collect();
        Ok(self.unitary.mul_vec(&cv))
    }

    /// The linear operator `J m J⁻¹ = U conj(m) U*`.
    pub fn conjugate(&self, m: &Matrix<T>) -> Result<Matrix<T>> {
        if m.shape() != (self.dim(), self.dim()) {
            return Err(mismatch(
                format!("{0}x{0}", self.dim()),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        Ok(self.conjugate_unchecked(m))
    }

    pub(crate) fn conjugate_unchecked(&self, m: &Matrix<T>) -> Matrix<T> {
        self.unitary.matmul(&m.conj()).matmul(&self.unitary.adjoint())
    }

    /// `J' ⊗ J''`
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            unitary: kron(&self.unitary, &other.unitary),
            square_sign: self.square_sign * other.square_sign,
        }
    }

    /// `W J W*` for a unitary `W`: unitary part `W U Wᵀ`.
    pub fn unitarily_conjugated(&self, w: &Matrix<T>) -> Self {
        Self {
            unitary: w.matmul(&self.unitary).matmul(&w.transpose()),
            square_sign: self.square_sign,
        }
    }
}

/// Matrix `M` with `v ↦ M conj(v)` equal to the antilinear composite
/// `d ∘ J ∘ n`, namely `M = d U conj(n)`.
pub fn al_compose_sign<T: Real>(d: &Matrix<T>, j: &Antilinear<T>, n: &Matrix<T>) -> Result<Matrix<T>> {
    let dim = j.dim();
    for m in [d, n] {
        if m.shape() != (dim, dim) {
            return Err(mismatch(format!("{dim}x{dim}"), format!("{}x{}", m.rows(), m.cols())));
        }
    }
    Ok(d.matmul(j.unitary()).matmul(&n.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numat::pauli;
    use proptest::prelude::*;

    fn cm(entries: &[f64]) -> Matrix<f64> {
        // 2x2 complex matrix from 8 reals
        Matrix::from_fn(2, 2, |i, j| C::new(entries[4 * i + 2 * j], entries[4 * i + 2 * j + 1]))
    }

    #[test]
    fn conjugation_on_c2() {
        let j = Antilinear::<f64>::conjugation(2);
        let v = j.apply(&[C::new(1.0, 2.0), C::new(0.0, -3.0)]).unwrap();
        assert_eq!(v, vec![C::new(1.0, -2.0), C::new(0.0, 3.0)]);
        // J (i σ²) J⁻¹ = i σ² since the entries of iσ² are real
        let isy = pauli::<f64>(2).scale(C::i());
        assert!(j.conjugate(&isy).unwrap().max_abs_diff(&isy) < 1e-15);
    }

    #[test]
    fn quaternionic_structure_squares_to_minus_one() {
        let u = pauli::<f64>(2).scale(C::i());
        let j = Antilinear::new(u, Sign::Minus, 1e-12).unwrap();
        let v = [C::new(0.3, -1.0), C::new(2.0, 0.5)];
        let jj = j.apply(&j.apply(&v).unwrap()).unwrap();
        for (a, b) in jj.iter().zip(v.iter()) {
            assert!((a + b).norm() < 1e-15);
        }
        assert!(Antilinear::new(pauli::<f64>(2).scale(C::i()), Sign::Plus, 1e-12).is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let u = Matrix::<f64>::scalar(2, C::new(2.0, 0.0));
        assert!(matches!(
            Antilinear::new(u, Sign::Plus, 1e-12),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn wrong_dimension_reported() {
        let j = Antilinear::<f64>::conjugation(2);
        assert!(matches!(
            j.apply(&[C::new(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(j.conjugate(&Matrix::identity(3)).is_err());
    }

    #[test]
    fn tensor_sign_multiplies() {
        let a = Antilinear::new(pauli::<f64>(2).scale(C::i()), Sign::Minus, 1e-12).unwrap();
        let t = a.tensor(&a);
        assert_eq!(t.square_sign(), Sign::Plus);
        assert!(t.square_residual() < 1e-14);
    }

    #[test]
    fn composite_matches_pointwise_action() {
        let j = Antilinear::new(pauli::<f64>(2).scale(C::i()), Sign::Minus, 1e-12).unwrap();
        let d = cm(&[1., 0., 2., 1., 0., -1., 3., 0.]);
        let n = cm(&[0., 1., 1., 0., -2., 0., 0., 0.5]);
        let m = al_compose_sign(&d, &j, &n).unwrap();
        let v = [C::new(0.7, 0.1), C::new(-0.2, 1.1)];
        let direct = d.mul_vec(&j.apply(&n.mul_vec(&v)).unwrap());
        let conj: Vec<_> = v.iter().map(|z| z.conj()).collect();
        let via = m.mul_vec(&conj);
        for (a, b) in direct.iter().zip(via.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn sign_serializes_as_integer() {
        assert_eq!(serde_json::to_string(&Sign::Minus).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Sign>("1").unwrap(), Sign::Plus);
        assert!(serde_json::from_str::<Sign>("0").is_err());
    }

    fn entries() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 8)
    }

    proptest! {
        #[test]
        fn conjugation_is_multiplicative(a in entries(), b in entries()) {
            let j = Antilinear::new(pauli::<f64>(2).scale(C::i()), Sign::Minus, 1e-12).unwrap();
            let (a, b) = (cm(&a), cm(&b));
            let lhs = j.conjugate(&a.matmul(&b)).unwrap();
            let rhs = j.conjugate(&a).unwrap().matmul(&j.conjugate(&b).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn conjugation_commutes_with_adjoint(a in entries()) {
            let j = Antilinear::new(pauli::<f64>(3), Sign::Plus, 1e-12).unwrap();
            let a = cm(&a);
            let lhs = j.conjugate(&a.adjoint()).unwrap();
            let rhs = j.conjugate(&a).unwrap().adjoint();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn kron_mixed_product(a in entries(), b in entries(), c in entries(), d in entries()) {
            let (a, b, c, d) = (cm(&a), cm(&b), cm(&c), cm(&d));
            let lhs = kron(&a, &b).matmul(&kron(&c, &d));
            let rhs = kron(&a.matmul(&c), &b.matmul(&d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn op_norm_submultiplicative(a in entries(), b in entries()) {
            let (a, b) = (cm(&a), cm(&b));
            prop_assert!(op_norm(&a.matmul(&b)) <= op_norm(&a) * op_norm(&b) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn tensor_conjugation_factorizes(a in entries(), b in entries()) {
            let j1 = Antilinear::new(pauli::<f64>(2).scale(C::i()), Sign::Minus, 1e-12).unwrap();
            let j2 = Antilinear::new(pauli::<f64>(1), Sign::Plus, 1e-12).unwrap();
            let (a, b) = (cm(&a), cm(&b));
            let lhs = j1.tensor(&j2).conjugate(&kron(&a, &b)).unwrap();
            let rhs = kron(&j1.conjugate(&a).unwrap(), &j2.conjugate(&b).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
