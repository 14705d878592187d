//! Real spectral triples, multitwisted structures on them, and numerical
//! checkers for every condition such a structure is supposed to satisfy.

mod checks;
mod pairs;
mod report;

pub use checks::{
    check_epsilon_prime, check_epsilon_prime_untwisted, check_first_order, check_grading_twist, check_mt_first_order,
    check_mt_first_order_ad_nu, check_mt_zero_order, check_mt_zero_order_ad_nu, check_regularity,
    check_twist_representative, check_zero_order, run_all, structural_entries,
};
pub use report::{AssertSet, ConditionEntry, ConditionReport, STRUCTURAL_IDS};

use crate::algebra::StarAlgebra;
use crate::error::{mismatch, Error, Result};
use crate::numat::{condition_number, hermitian_asymmetry, inverse, op_norm, Antilinear, Matrix, Sign};
use crate::scalar::Real;

/// Default upper bound for the condition number of a twist.
pub const DEFAULT_CONDITION_BOUND: f64 = 1e8;

/// A grading operator together with the sign in `γJ = ±Jγ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grading<T> {
    pub gamma: Matrix<T>,
    pub sign: Sign,
}

/// `(A, H, D, J)` with the declared sign `ε′` and an optional grading.
///
/// `ε` is carried by `J` itself (its square sign).
#[derive(Clone, Debug, PartialEq)]
pub struct Triple<T> {
    algebra: StarAlgebra<T>,
    d: Matrix<T>,
    j: Antilinear<T>,
    epsilon_prime: Sign,
    grading: Option<Grading<T>>,
}

impl<T: Real> Triple<T> {
    /// Validates dimensions, hermiticity of `D` and, if present, the grading
    /// relations `γ² = 1`, `γ = γ*`, `γD = −Dγ`, `[γ, A] = 0`, `γU = ±U conj(γ)`,
    /// all at the scalar's default tolerance.
    pub fn new(
        algebra: StarAlgebra<T>,
        d: Matrix<T>,
        j: Antilinear<T>,
        epsilon_prime: Sign,
        grading: Option<Grading<T>>,
    ) -> Result<Self> {
        Self::with_tolerance(algebra, d, j, epsilon_prime, grading, T::default_tol())
    }

    pub fn with_tolerance(
        algebra: StarAlgebra<T>,
        d: Matrix<T>,
        j: Antilinear<T>,
        epsilon_prime: Sign,
        grading: Option<Grading<T>>,
        tol: T,
    ) -> Result<Self> {
        let t = Self::assemble(algebra, d, j, epsilon_prime, grading)?;
        let asym = hermitian_asymmetry(&t.d);
        if asym > tol * op_norm(&t.d).max(T::one()) {
            return Err(Error::NotHermitian {
                asymmetry: asym.to_f64_lossy(),
            });
        }
        if let Some(g) = &t.grading {
            for (what, residual) in checks::grading_residuals(&t, g) {
                if residual > tol {
                    return Err(Error::InvalidGrading {
                        what,
                        residual: residual.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(t)
    }

    /// Dimension checks only; used where a construction reports rather than
    /// enforces hermiticity.
    pub(crate) fn assemble(
        algebra: StarAlgebra<T>,
        d: Matrix<T>,
        j: Antilinear<T>,
        epsilon_prime: Sign,
        grading: Option<Grading<T>>,
    ) -> Result<Self> {
        let n = algebra.dim_h();
        let expect = |m: &Matrix<T>| -> Result<()> {
            if m.shape() != (n, n) {
                return Err(mismatch(format!("{n}x{n}"), format!("{}x{}", m.rows(), m.cols())));
            }
            Ok(())
        };
        expect(&d)?;
        expect(j.unitary())?;
        if let Some(g) = &grading {
            expect(&g.gamma)?;
        }
        Ok(Self {
            algebra,
            d,
            j,
            epsilon_prime,
            grading,
        })
    }

    pub fn dim_h(&self) -> usize {
        self.algebra.dim_h()
    }

    pub fn algebra(&self) -> &StarAlgebra<T> {
        &self.algebra
    }

    pub fn d(&self) -> &Matrix<T> {
        &self.d
    }

    pub fn j(&self) -> &Antilinear<T> {
        &self.j
    }

    /// `ε` in `J² = ε`.
    pub fn epsilon(&self) -> Sign {
        self.j.square_sign()
    }

    pub fn epsilon_prime(&self) -> Sign {
        self.epsilon_prime
    }

    pub fn grading(&self) -> Option<&Grading<T>> {
        self.grading.as_ref()
    }

    pub fn is_even(&self) -> bool {
        self.grading.is_some()
    }

    pub fn without_grading(mut self) -> Self {
        self.grading = None;
        self
    }
}

/// One summand `D_ℓ` with its twist `ν_ℓ`.
///
/// `algebra_twist`, when set, is an operator `ρ` whose adjoint action is used
/// as `ν̄_ℓ` on algebra elements in place of `Ad ν_ℓ` (the two must agree on
/// `A`; [`check_twist_representative`] measures that).
#[derive(Clone, Debug, PartialEq)]
pub struct Summand<T> {
    d: Matrix<T>,
    nu: Matrix<T>,
    nu_inv: Matrix<T>,
    algebra_twist: Option<(Matrix<T>, Matrix<T>)>,
}

impl<T: Real> Summand<T> {
    pub fn new(d: Matrix<T>, nu: Matrix<T>) -> Result<Self> {
        if d.shape() != nu.shape() || !d.is_square() {
            return Err(mismatch(
                format!("{}x{} square", d.rows(), d.cols()),
                format!("{}x{}", nu.rows(), nu.cols()),
            ));
        }
        let nu_inv = inverse(&nu)?;
        Ok(Self {
            d,
            nu,
            nu_inv,
            algebra_twist: None,
        })
    }

    /// `ν_ℓ = I`, stored exactly.
    pub fn untwisted(d: Matrix<T>) -> Self {
        let n = d.rows();
        Self {
            d,
            nu: Matrix::identity(n),
            nu_inv: Matrix::identity(n),
            algebra_twist: None,
        }
    }

    pub fn with_algebra_twist(mut self, rho: Matrix<T>) -> Result<Self> {
        if rho.shape() != self.nu.shape() {
            return Err(mismatch(
                format!("{}x{}", self.nu.rows(), self.nu.cols()),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        let rho_inv = inverse(&rho)?;
        self.algebra_twist = Some((rho, rho_inv));
        Ok(self)
    }

    pub fn d(&self) -> &Matrix<T> {
        &self.d
    }

    /// Same twist (and algebra twist) with a different operator.
    pub fn with_operator(&self, d: Matrix<T>) -> Self {
        Self { d, ..self.clone() }
    }

    pub fn nu(&self) -> &Matrix<T> {
        &self.nu
    }

    pub fn nu_inv(&self) -> &Matrix<T> {
        &self.nu_inv
    }

    pub fn algebra_twist(&self) -> Option<&Matrix<T>> {
        self.algebra_twist.as_ref().map(|(r, _)| r)
    }

    /// Operators `(r, r⁻¹)` whose adjoint action realizes `ν̄_ℓ` on `A`.
    pub(crate) fn effective_twist(&self) -> (&Matrix<T>, &Matrix<T>) {
        match &self.algebra_twist {
            Some((r, ri)) => (r, ri),
            None => (&self.nu, &self.nu_inv),
        }
    }

    /// `ν̄_ℓ(b)` as used by the twisted conditions.
    pub fn twist(&self, b: &Matrix<T>) -> Matrix<T> {
        let (r, ri) = self.effective_twist();
        r.matmul(b).matmul(ri)
    }

    /// `ν̄_ℓ⁻¹(b)`.
    pub fn twist_inv(&self, b: &Matrix<T>) -> Matrix<T> {
        let (r, ri) = self.effective_twist();
        ri.matmul(b).matmul(r)
    }

    pub fn condition_number(&self) -> T {
        condition_number(&self.nu, &self.nu_inv)
    }

    pub fn is_untwisted(&self) -> bool {
        self.algebra_twist.is_none() && self.nu == Matrix::identity(self.nu.rows())
    }

    pub(crate) fn map(&self, f: &impl Fn(&Matrix<T>) -> Matrix<T>) -> Self {
        Self {
            d: f(&self.d),
            nu: f(&self.nu),
            nu_inv: f(&self.nu_inv),
            algebra_twist: self.algebra_twist.as_ref().map(|(r, ri)| (f(r), f(ri))),
        }
    }
}

/// `ν b ν⁻¹`.
pub fn twist_ad<T: Real>(nu: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if nu.shape() != b.shape() {
        return Err(mismatch(
            format!("{}x{}", nu.rows(), nu.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    let inv = inverse(nu)?;
    Ok(nu.matmul(b).matmul(&inv))
}

/// A real spectral triple with a decomposition `D = Σ D_ℓ` and twists.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedTriple<T> {
    triple: Triple<T>,
    summands: Vec<Summand<T>>,
}

impl<T: Real> TwistedTriple<T> {
    /// Validates `Σ D_ℓ = D` and twist conditioning at default settings.
    pub fn new(triple: Triple<T>, summands: Vec<Summand<T>>) -> Result<Self> {
        Self::with_bounds(triple, summands, T::default_tol(), T::lit(DEFAULT_CONDITION_BOUND))
    }

    pub fn with_bounds(triple: Triple<T>, summands: Vec<Summand<T>>, tol: T, condition_bound: T) -> Result<Self> {
        if summands.is_empty() {
            return Err(Error::Precondition("at least one summand is required".into()));
        }
        let n = triple.dim_h();
        for s in &summands {
            if s.d.shape() != (n, n) {
                return Err(mismatch(format!("{n}x{n}"), format!("{}x{}", s.d.rows(), s.d.cols())));
            }
        }
        let gap = summand_gap(&triple, &summands);
        if gap > tol * op_norm(triple.d()).max(T::one()) {
            return Err(Error::SummandSum {
                gap: gap.to_f64_lossy(),
            });
        }
        for (index, s) in summands.iter().enumerate() {
            let condition = s.condition_number();
            // negated so that a NaN condition number is rejected too
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            let too_large = !(condition <= condition_bound);
            if too_large {
                return Err(Error::IllConditionedTwist {
                    index,
                    condition: condition.to_f64_lossy(),
                    bound: condition_bound.to_f64_lossy(),
                });
            }
        }
        Ok(Self { triple, summands })
    }

    /// The trivial structure `N = 1`, `ν = I`.
    pub fn untwisted(triple: Triple<T>) -> Self {
        let s = Summand::untwisted(triple.d().clone());
        Self {
            triple,
            summands: vec![s],
        }
    }

    pub(crate) fn from_parts_unchecked(triple: Triple<T>, summands: Vec<Summand<T>>) -> Self {
        Self { triple, summands }
    }

    pub fn triple(&self) -> &Triple<T> {
        &self.triple
    }

    pub fn summands(&self) -> &[Summand<T>] {
        &self.summands
    }

    pub fn into_parts(self) -> (Triple<T>, Vec<Summand<T>>) {
        (self.triple, self.summands)
    }

    pub fn is_untwisted(&self) -> bool {
        self.summands.iter().all(Summand::is_untwisted)
    }

    /// Conjugates every piece of data by the unitary `w`: operators go to
    /// `w x w*` and `J` to `wJw*`.
    pub fn conjugated_by(&self, w: &Matrix<T>) -> Self {
        let wa = w.adjoint();
        let f = |x: &Matrix<T>| w.matmul(x).matmul(&wa);
        let t = &self.triple;
        let triple = Triple {
            algebra: t.algebra.map(f),
            d: f(&t.d),
            j: t.j.unitarily_conjugated(w),
            epsilon_prime: t.epsilon_prime,
            grading: t.grading.as_ref().map(|g| Grading {
                gamma: f(&g.gamma),
                sign: g.sign,
            }),
        };
        Self {
            triple,
            summands: self.summands.iter().map(|s| s.map(&f)).collect(),
        }
    }
}

/// `‖Σ D_ℓ − D‖`
pub(crate) fn summand_gap<T: Real>(triple: &Triple<T>, summands: &[Summand<T>]) -> T {
    let mut total = Matrix::zeros(triple.dim_h(), triple.dim_h());
    for s in summands {
        total = &total + &s.d;
    }
    op_norm(&(&total - triple.d()))
}
