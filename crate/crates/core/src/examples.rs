//! Finite "fuzzy" models: the rational noncommutative torus in GNS form,
//! its conformally rescaled (asymmetric) version, and a circle bundle over
//! the 3-torus.
//!
//! The derivations of the smooth torus are replaced by inner derivations
//! `ad(h_j)` on the GNS space `H₀ = M_q` (with Hilbert–Schmidt inner product
//! and column-stacking vectorization). Every builder records this in its
//! provenance string.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::StarAlgebra;
use crate::constructions::{exp_hermitian, multiconformal_rescale};
use crate::error::{mismatch, Error, Result};
use crate::numat::{inverse, kron, op_norm, pauli, principal_sqrt, Antilinear, Matrix, Sign};
use crate::scalar::{c, cr, Real, C};
use crate::triple::{AssertSet, Grading, Summand, Triple, TwistedTriple};

/// Modeling caveat attached to every builder.
pub const MODEL_NOTE: &str =
    "finite model: derivations realized as inner derivations ad(h_j) on the GNS space of M_q (theta = p/q)";

/// Conditions asserted for the untwisted builders.
pub const UNTWISTED_ASSERTS: &str =
    "structural,zero_order,first_order,epsilon_prime_untwisted,mt_zero_order,mt_first_order,epsilon_prime,regularity";

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Clock `C = diag(1, λ, …, λ^{q−1})` and shift `S e_k = e_{k−1}` (indices
/// mod `q`) with `λ = e^{2πi p/q}`, so that `S C = λ C S`. Phases that are
/// multiples of a quarter turn are exact.
pub fn clock_shift<T: Real>(q: usize, p: usize) -> Result<(Matrix<T>, Matrix<T>)> {
    if q == 0 {
        return Err(Error::InvalidParams("q must be positive".into()));
    }
    if gcd(p, q) != 1 {
        return Err(Error::InvalidParams(format!(
            "gcd(p, q) must be 1, got p = {p}, q = {q}"
        )));
    }
    let two_pi = T::PI() + T::PI();
    let diag: Vec<C<T>> = (0..q)
        .map(|k| {
            // reduce the exponent mod q before forming the angle
            let r = (p * k) % q;
            if (4 * r).is_multiple_of(q) {
                let (o, z) = (T::one(), T::zero());
                return [c(o, z), c(z, o), c(-o, z), c(z, -o)][4 * r / q];
            }
            let angle = two_pi * T::lit(r as f64) / T::lit(q as f64);
            c(angle.cos(), angle.sin())
        })
        .collect();
    let clock = Matrix::from_diag(&diag);
    let shift = Matrix::from_fn(q, q, |i, j| {
        if j == (i + 1) % q {
            C::new(T::one(), T::zero())
        } else {
            C::new(T::zero(), T::zero())
        }
    });
    Ok((clock, shift))
}

/// The GNS space of `M_q`: vectors are `vec(X)` with column stacking,
/// `vec(X)[i + j q] = X[i, j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gns {
    pub q: usize,
}

impl Gns {
    pub fn new(q: usize) -> Self {
        Self { q }
    }

    pub fn dim(&self) -> usize {
        self.q * self.q
    }

    /// `X ↦ a X`, i.e. `1 ⊗ a`.
    pub fn leftmult<T: Real>(&self, a: &Matrix<T>) -> Matrix<T> {
        kron(&Matrix::identity(self.q), a)
    }

    /// `X ↦ X b`, i.e. `bᵀ ⊗ 1`.
    pub fn rightmult<T: Real>(&self, b: &Matrix<T>) -> Matrix<T> {
        kron(&b.transpose(), &Matrix::identity(self.q))
    }

    /// `X ↦ [h, X]`.
    pub fn ad<T: Real>(&self, h: &Matrix<T>) -> Matrix<T> {
        &self.leftmult(h) - &self.rightmult(h)
    }

    /// Permutation with `P vec(X) = vec(Xᵀ)`.
    pub fn transposition<T: Real>(&self) -> Matrix<T> {
        let q = self.q;
        let mut p = Matrix::zeros(q * q, q * q);
        for i in 0..q {
            for j in 0..q {
                p[(i + j * q, j + i * q)] = cr(T::one());
            }
        }
        p
    }

    /// Tomita conjugation `X ↦ X*`.
    pub fn tomita<T: Real>(&self) -> Antilinear<T> {
        Antilinear::new(self.transposition(), Sign::Plus, T::default_tol()).expect("transposition is a real involution")
    }
}

/// Parameters shared by the fuzzy builders.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyParams<T> {
    pub q: usize,
    pub p: usize,
    /// Overrides for `h₁, h₂, h₃` (each `q × q`, Hermitian).
    pub h: [Option<Matrix<T>>; 3],
}

impl<T: Real> FuzzyParams<T> {
    pub fn new(q: usize, p: usize) -> Self {
        Self {
            q,
            p,
            h: [None, None, None],
        }
    }

    pub fn with_h(mut self, index: usize, h: Matrix<T>) -> Self {
        self.h[index] = Some(h);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidParams(format!("q must be at least 2, got {}", self.q)));
        }
        clock_shift::<T>(self.q, self.p)?;
        for h in self.h.iter().flatten() {
            if h.shape() != (self.q, self.q) {
                return Err(mismatch(
                    format!("{0}x{0}", self.q),
                    format!("{}x{}", h.rows(), h.cols()),
                ));
            }
            let asym = crate::numat::hermitian_asymmetry(h);
            if asym > T::default_tol() * op_norm(h).max(T::one()) {
                return Err(Error::NotHermitian {
                    asymmetry: asym.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// `h₁ = (C + C*)/2`, `h₂ = (S + S*)/2`, `h₃ = diag(0, …, q−1)` unless
    /// overridden.
    pub fn derivations(&self) -> Result<[Matrix<T>; 3]> {
        self.validate()?;
        let (cl, sh) = clock_shift::<T>(self.q, self.p)?;
        let defaults = [
            cl.hermitian_part(),
            sh.hermitian_part(),
            Matrix::from_real_diag(&(0..self.q).map(|k| T::lit(k as f64)).collect::<Vec<_>>()),
        ];
        let mut out = defaults;
        for (slot, h) in out.iter_mut().zip(&self.h) {
            if let Some(h) = h {
                *slot = h.clone();
            }
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        let overridden: Vec<String> = self
            .h
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_some())
            .map(|(i, _)| format!("h{}", i + 1))
            .collect();
        if overridden.is_empty() {
            format!("q={} p={}", self.q, self.p)
        } else {
            format!("q={} p={} overridden={}", self.q, self.p, overridden.join("+"))
        }
    }
}

/// A built model: the structure, the conditions it is claimed to satisfy and
/// a provenance string (builder, parameters, modeling note, `asserts=`).
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub triple: TwistedTriple<T>,
    pub asserts: AssertSet,
    pub provenance: String,
}

impl<T> Model<T> {
    fn new(triple: TwistedTriple<T>, asserts: &str, builder: &str, params: String) -> Self {
        let asserts_set: AssertSet = asserts.parse().expect("builder assert sets are well formed");
        let provenance = format!("builder={builder} {params}; {MODEL_NOTE}; asserts={asserts}");
        Self {
            triple,
            asserts: asserts_set,
            provenance,
        }
    }
}

/// Extracts the `asserts=` token from a provenance string.
pub fn asserts_from_provenance(provenance: &str) -> Option<AssertSet> {
    provenance
        .split(|ch: char| ch.is_whitespace() || ch == ';')
        .find_map(|tok| tok.strip_prefix("asserts="))
        .and_then(|s| s.parse().ok())
}

/// `1₂ ⊗ leftmult(a)` for `a ∈ M_q`: the spinor-trivial representation.
pub fn lift<T: Real>(q: usize, a: &Matrix<T>) -> Matrix<T> {
    kron(&Matrix::identity(2), &Gns::new(q).leftmult(a))
}

/// The spinor-trivial algebra `1₂ ⊗ L(M_q)` generated by clock and shift.
pub fn torus_algebra<T: Real>(q: usize, p: usize) -> Result<StarAlgebra<T>> {
    let (cl, sh) = clock_shift::<T>(q, p)?;
    let n = 2 * q * q;
    StarAlgebra::span_closure(vec![lift(q, &cl), lift(q, &sh)], T::default_tol(), n * n)
}

fn spinor_op<T: Real>(k: usize, op: &Matrix<T>) -> Matrix<T> {
    kron(&pauli(k), op)
}

/// Even fuzzy 2-torus, `D = σ¹ ⊗ ad h₁ + σ² ⊗ ad h₂` split into its two
/// terms, `γ = σ³ ⊗ 1`, `J = (iσ² ⊗ P)∘conj`.
///
/// Signs: `J² = −1`, `ε′ = +1`, `γJ = −Jγ`.
pub fn fuzzy_torus2<T: Real>(params: &FuzzyParams<T>) -> Result<Model<T>> {
    let [h1, h2, _] = params.derivations()?;
    let q = params.q;
    let gns = Gns::new(q);
    let d1 = spinor_op(1, &gns.ad(&h1));
    let d2 = spinor_op(2, &gns.ad(&h2));
    let u = kron(&pauli::<T>(2).scale(C::i()), &gns.transposition());
    let j = Antilinear::new(u, Sign::Minus, T::default_tol())?;
    let gamma = spinor_op(3, &Matrix::identity(q * q));
    let triple = Triple::new(
        torus_algebra(q, params.p)?,
        &d1 + &d2,
        j,
        Sign::Plus,
        Some(Grading {
            gamma,
            sign: Sign::Minus,
        }),
    )?;
    let tt = TwistedTriple::new(triple, vec![Summand::untwisted(d1), Summand::untwisted(d2)])?;
    Ok(Model::new(
        tt,
        &format!("{UNTWISTED_ASSERTS},grading_twist"),
        "fuzzy-torus2",
        params.describe(),
    ))
}

/// Even fuzzy circle, `D = σ¹ ⊗ ad h₁`, `γ = σ³ ⊗ 1`, `J = (σ³ ⊗ P)∘conj`.
///
/// Signs: `J² = +1`, `ε′ = +1`, `γJ = Jγ`.
pub fn fuzzy_circle_even<T: Real>(params: &FuzzyParams<T>) -> Result<Model<T>> {
    let [h1, _, _] = params.derivations()?;
    let q = params.q;
    let gns = Gns::new(q);
    let d = spinor_op(1, &gns.ad(&h1));
    let u = kron(&pauli::<T>(3), &gns.transposition());
    let j = Antilinear::new(u, Sign::Plus, T::default_tol())?;
    let gamma = spinor_op(3, &Matrix::identity(q * q));
    let triple = Triple::new(
        torus_algebra(q, params.p)?,
        d.clone(),
        j,
        Sign::Plus,
        Some(Grading {
            gamma,
            sign: Sign::Plus,
        }),
    )?;
    let tt = TwistedTriple::new(triple, vec![Summand::untwisted(d)])?;
    Ok(Model::new(
        tt,
        &format!("{UNTWISTED_ASSERTS},grading_twist"),
        "fuzzy-circle-even",
        params.describe(),
    ))
}

/// Odd fuzzy 3-torus, `D = Σⱼ σʲ ⊗ ad hⱼ`, `J = (σ² ⊗ P)∘conj`; one summand
/// per direction when `split`, else a single summand.
///
/// Signs: `J² = −1`, `ε′ = +1`.
pub fn fuzzy_torus3<T: Real>(params: &FuzzyParams<T>, split: bool) -> Result<Model<T>> {
    let hs = params.derivations()?;
    let q = params.q;
    let gns = Gns::new(q);
    let parts: Vec<Matrix<T>> = hs
        .iter()
        .enumerate()
        .map(|(k, h)| spinor_op(k + 1, &gns.ad(h)))
        .collect();
    let mut d = Matrix::zeros(2 * q * q, 2 * q * q);
    for p in &parts {
        d = &d + p;
    }
    let u = kron(&pauli::<T>(2), &gns.transposition());
    let j = Antilinear::new(u, Sign::Minus, T::default_tol())?;
    let triple = Triple::new(torus_algebra(q, params.p)?, d.clone(), j, Sign::Plus, None)?;
    let summands = if split {
        parts.into_iter().map(Summand::untwisted).collect()
    } else {
        vec![Summand::untwisted(d)]
    };
    let tt = TwistedTriple::new(triple, summands)?;
    Ok(Model::new(
        tt,
        UNTWISTED_ASSERTS,
        "fuzzy-torus3",
        format!("{} split={split}", params.describe()),
    ))
}

/// Random Hermitian `q × q` matrix with Gaussian entries, normalized to
/// operator norm 1.
pub fn random_hermitian<T: Real>(q: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let mut draw = || -> T { T::lit(StandardNormal.sample(rng)) };
    let m = Matrix::from_fn(q, q, |_, _| c(draw(), draw()));
    let h = m.hermitian_part();
    let n = op_norm(&h);
    h.scale_real(T::one() / n)
}

/// `exp(spread · x)` with `x` from [`random_hermitian`] seeded by `seed`.
pub fn random_positive<T: Real>(q: usize, seed: u64, spread: T) -> Result<Matrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    exp_hermitian(&random_hermitian::<T>(q, &mut rng), spread)
}

/// Fuzzy 2-torus rescaled summand-wise by `k₁, k₂ ∈ M_q` (lifted to the
/// spinor-trivial algebra): `D̃ = Jk₁J⁻¹ σ¹ ad h₁ Jk₁J⁻¹ + Jk₂J⁻¹ σ² ad h₂ Jk₂J⁻¹`
/// with twists `ν_ℓ = k_ℓ⁻¹ Jk_ℓJ⁻¹`.
pub fn asymmetric_torus<T: Real>(params: &FuzzyParams<T>, k1: &Matrix<T>, k2: &Matrix<T>) -> Result<Model<T>> {
    asymmetric_torus_labeled(params, k1, k2, "explicit")
}

/// [`asymmetric_torus`] with `k_ℓ = exp(spread · x_ℓ)` for seeded random
/// Hermitian `x_ℓ`.
pub fn asymmetric_torus_seeded<T: Real>(params: &FuzzyParams<T>, seed: u64, spread: T) -> Result<Model<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x1 = random_hermitian::<T>(params.q, &mut rng);
    let x2 = random_hermitian::<T>(params.q, &mut rng);
    let k1 = exp_hermitian(&x1, spread)?;
    let k2 = exp_hermitian(&x2, spread)?;
    asymmetric_torus_labeled(params, &k1, &k2, &format!("seed={seed} spread={spread}"))
}

fn asymmetric_torus_labeled<T: Real>(
    params: &FuzzyParams<T>,
    k1: &Matrix<T>,
    k2: &Matrix<T>,
    label: &str,
) -> Result<Model<T>> {
    let q = params.q;
    for k in [k1, k2] {
        if k.shape() != (q, q) {
            return Err(mismatch(format!("{q}x{q}"), format!("{}x{}", k.rows(), k.cols())));
        }
    }
    let base = fuzzy_torus2(params)?;
    let tt = multiconformal_rescale(&base.triple, &[lift(q, k1), lift(q, k2)])?;
    Ok(Model::new(
        tt,
        "structural,mt_zero_order,mt_first_order,epsilon_prime,regularity,grading_twist",
        "asymmetric-torus",
        format!("{} k={label}", params.describe()),
    ))
}

/// The circle bundle model together with the operators it is built from.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleBundle<T> {
    pub model: Model<T>,
    /// `w = σ³ ⊗ 1 − σ¹ ⊗ ω₁ − σ² ⊗ ω₂`
    pub w: Matrix<T>,
    /// Connection one-form `σ¹ ⊗ ω₁ + σ² ⊗ ω₂ + σ³ ⊗ 1`.
    pub connection: Matrix<T>,
    /// `ω₁, ω₂` as `q × q` matrices.
    pub omegas: [Matrix<T>; 2],
    /// `principal_sqrt(w)`
    pub sqrt_w: Matrix<T>,
}

/// Default invariant coupling functions: with `n = h₃/(q−1)`,
/// `ω₁ = t(n + ½)` and `ω₂ = t(n² − 0.3 n)`.
pub fn default_omegas<T: Real>(h3: &Matrix<T>, q: usize, t: T) -> [Matrix<T>; 2] {
    let n = h3.scale_real(T::one() / T::lit((q - 1).max(1) as f64));
    let id = Matrix::identity(q);
    let w1 = (&n + &id.scale_real(T::lit(0.5))).scale_real(t);
    let w2 = (&n.matmul(&n) - &n.scale_real(T::lit(0.3))).scale_real(t);
    [w1, w2]
}

/// Circle bundle over the fuzzy 3-torus with invariant connection data
/// `ω₁, ω₂` (polynomials in `h₃` by default, scaled by `t`).
///
/// Summands: `D₍₂₎ = σ¹ ⊗ ad h₁ + σ² ⊗ ad h₂` (untwisted) and
/// `D_w = JwJ⁻¹ (1 ⊗ ad h₃)` with twist `ν₂ = w^{-1/2} J w^{1/2} J⁻¹`; on `A`
/// the twist acts as `x ↦ w^{-1/2} x w^{1/2}`, which is stored as the
/// summand's algebra twist representative.
pub fn circle_bundle<T: Real>(
    params: &FuzzyParams<T>,
    t: T,
    omegas: Option<[Matrix<T>; 2]>,
) -> Result<CircleBundle<T>> {
    let [h1, h2, h3] = params.derivations()?;
    let q = params.q;
    let gns = Gns::new(q);
    let omegas = match omegas {
        Some(o) => o,
        None => default_omegas(&h3, q, t),
    };
    let tol = T::default_tol();
    for (i, w) in omegas.iter().enumerate() {
        if w.shape() != (q, q) {
            return Err(mismatch(format!("{q}x{q}"), format!("{}x{}", w.rows(), w.cols())));
        }
        let comm = op_norm(&w.commutator(&h3));
        if comm > tol * (op_norm(w) * op_norm(&h3)).max(T::one()) {
            return Err(Error::Precondition(format!(
                "omega_{} does not commute with h3 (||[omega, h3]|| = {:e})",
                i + 1,
                comm.to_f64_lossy()
            )));
        }
    }
    let l1 = gns.leftmult(&omegas[0]);
    let l2 = gns.leftmult(&omegas[1]);
    let iq = Matrix::identity(q * q);
    let w = &(&spinor_op(3, &iq) - &spinor_op(1, &l1)) - &spinor_op(2, &l2);
    let connection = &(&spinor_op(1, &l1) + &spinor_op(2, &l2)) + &spinor_op(3, &iq);

    let u = kron(&pauli::<T>(2), &gns.transposition());
    let j = Antilinear::new(u, Sign::Minus, tol)?;
    let d2 = &spinor_op(1, &gns.ad(&h1)) + &spinor_op(2, &gns.ad(&h2));
    let jw = j.conjugate(&w)?;
    let dw = jw.matmul(&kron(&Matrix::identity(2), &gns.ad(&h3)));

    let s = principal_sqrt(&w)?;
    let s_inv = inverse(&s)?;
    let nu2 = s_inv.matmul(&j.conjugate(&s)?);
    let triple = Triple::new(torus_algebra(q, params.p)?, &d2 + &dw, j, Sign::Plus, None)?;
    let summands = vec![
        Summand::untwisted(d2),
        Summand::new(dw, nu2)?.with_algebra_twist(s_inv)?,
    ];
    let tt = TwistedTriple::new(triple, summands)?;
    let model = Model::new(
        tt,
        "structural,mt_zero_order,mt_first_order",
        "circle-bundle",
        format!("{} t={t}", params.describe()),
    );
    Ok(CircleBundle {
        model,
        w,
        connection,
        omegas,
        sqrt_w: s,
    })
}

/// `w² − 1 ⊗ (1 + ω₁² + ω₂²)`, which vanishes because distinct Pauli
/// matrices anticommute and the `ωᵢ` commute.
pub fn circle_bundle_square_defect<T: Real>(cb: &CircleBundle<T>) -> T {
    let q = cb.omegas[0].rows();
    let [w1, w2] = &cb.omegas;
    let inner = &(&Matrix::identity(q) + &w1.matmul(w1)) + &w2.matmul(w2);
    let expected = lift(q, &inner);
    op_norm(&(&cb.w.matmul(&cb.w) - &expected))
}

/// Hermitian `x ∈ Cl_D(A) ∖ A` for the fuzzy 2-torus: `γ (1 ⊗ L(h₁))`,
/// normalized. It commutes with its own `J`-conjugate, which the Clifford
/// rescaling needs.
pub fn clifford_direction<T: Real>(params: &FuzzyParams<T>) -> Result<Matrix<T>> {
    let [h1, _, _] = params.derivations()?;
    let q = params.q;
    let x = spinor_op(3, &Gns::new(q).leftmult(&h1));
    let n = op_norm(&x);
    Ok(x.scale_real(T::one() / n))
}
