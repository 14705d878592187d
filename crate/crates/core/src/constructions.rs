//! New multitwisted triples from old: tensor products, fluctuations by
//! one-forms and (multi)conformal rescalings.

use rayon::prelude::*;

use crate::algebra::StarAlgebra;
use crate::error::{mismatch, Error, Result};
use crate::numat::{herm_eig, hermitian_asymmetry, inverse, kron, op_norm, Matrix, Sign};
use crate::scalar::{cr, floor_one, Real};
use crate::triple::{
    check_epsilon_prime_untwisted, check_first_order, check_regularity, check_zero_order, ConditionEntry, Summand,
    Triple, TwistedTriple,
};

/// Spectral gap required of a positive rescaling element: smallest
/// eigenvalue above this fraction of the largest.
pub const POSITIVITY_RATIO: f64 = 1e-6;

fn tol_of<T: Real>() -> f64 {
    T::default_tol().to_f64_lossy()
}

// ---------------------------------------------------------------------------
// tensor product

/// Product of an even triple (with `γ′J′ = J′γ′`) and an arbitrary one.
///
/// `D = D′ ⊗ 1 + γ′ ⊗ D″`, `J = J′ ⊗ J″`, summands `D′_ℓ ⊗ 1` with twists
/// `ν′_ℓ ⊗ 1` followed by `γ′ ⊗ D″_ℓ` with twists `1 ⊗ ν″_ℓ`. The result is
/// not graded.
pub fn tensor_product<T: Real>(first: &TwistedTriple<T>, second: &TwistedTriple<T>) -> Result<TwistedTriple<T>> {
    let t1 = first.triple();
    let t2 = second.triple();
    let g = t1
        .grading()
        .ok_or_else(|| Error::Precondition("first factor of a tensor product must be even".into()))?;
    if g.sign != Sign::Plus {
        return Err(Error::Precondition(
            "first factor must satisfy gamma J = J gamma (grading sign +1)".into(),
        ));
    }
    if t1.epsilon_prime() != t2.epsilon_prime() {
        return Err(Error::Precondition(format!(
            "factors have different eps' ({} and {})",
            t1.epsilon_prime(),
            t2.epsilon_prime()
        )));
    }
    let (n1, n2) = (t1.dim_h(), t2.dim_h());
    let i1 = Matrix::identity(n1);
    let i2 = Matrix::identity(n2);

    let pick = |a: &StarAlgebra<T>| -> Vec<Matrix<T>> {
        if a.generators().is_empty() {
            a.basis().to_vec()
        } else {
            a.generators().to_vec()
        }
    };
    let mut gens: Vec<Matrix<T>> = pick(t1.algebra()).iter().map(|a| kron(a, &i2)).collect();
    gens.extend(pick(t2.algebra()).iter().map(|b| kron(&i1, b)));
    let n = n1 * n2;
    let algebra = StarAlgebra::span_closure(gens, T::default_tol(), n * n)?;

    let d = &kron(t1.d(), &i2) + &kron(&g.gamma, t2.d());
    let j = t1.j().tensor(t2.j());
    let triple = Triple::new(algebra, d, j, t1.epsilon_prime(), None)?;

    let mut summands = Vec::with_capacity(first.summands().len() + second.summands().len());
    for s in first.summands() {
        let mut out = Summand::new(kron(s.d(), &i2), kron(s.nu(), &i2))?;
        if let Some(r) = s.algebra_twist() {
            out = out.with_algebra_twist(kron(r, &i2))?;
        }
        summands.push(out);
    }
    for s in second.summands() {
        let mut out = Summand::new(kron(&g.gamma, s.d()), kron(&i1, s.nu()))?;
        if let Some(r) = s.algebra_twist() {
            out = out.with_algebra_twist(kron(&i1, r))?;
        }
        summands.push(out);
    }
    TwistedTriple::new(triple, summands)
}

// ---------------------------------------------------------------------------
// one-forms and fluctuations

/// `ω = Σᵢ aᵢ [D, bᵢ]` together with its per-summand pieces
/// `ω_ℓ = Σᵢ aᵢ [D_ℓ, bᵢ]` (or with summand-specific term lists).
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm<T> {
    pub total: Matrix<T>,
    pub per_summand: Vec<Matrix<T>>,
    /// Terms per summand, after symmetrization if requested.
    pub terms: Vec<Vec<(Matrix<T>, Matrix<T>)>>,
    pub selfadjoint: bool,
}

impl<T: Real> OneForm<T> {
    /// `‖ω − ω*‖`
    pub fn asymmetry(&self) -> T {
        op_norm(&(&self.total - &self.total.adjoint()))
    }

    pub fn negated(&self) -> Self {
        Self {
            total: -&self.total,
            per_summand: self.per_summand.iter().map(|w| -w).collect(),
            terms: self
                .terms
                .iter()
                .map(|ts| ts.iter().map(|(a, b)| (-a, b.clone())).collect())
                .collect(),
            selfadjoint: self.selfadjoint,
        }
    }
}

/// Adds the formal adjoint of every term with weight ½, so that
/// `Σ aᵢ[D,bᵢ]` becomes its Hermitian part when `D = D*`:
/// `(a[D,b])* = b*[D,a*] − [D,b*a*]`.
fn symmetrized<T: Real>(terms: &[(Matrix<T>, Matrix<T>)]) -> Vec<(Matrix<T>, Matrix<T>)> {
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(3 * terms.len());
    for (a, b) in terms {
        let n = a.rows();
        let (a_star, b_star) = (a.adjoint(), b.adjoint());
        out.push((a.scale_real(half), b.clone()));
        out.push((b_star.scale_real(half), a_star.clone()));
        out.push((Matrix::identity(n).scale_real(-half), b_star.matmul(&a_star)));
    }
    out
}

fn form_for<T: Real>(d: &Matrix<T>, terms: &[(Matrix<T>, Matrix<T>)]) -> Matrix<T> {
    let mut w = Matrix::zeros(d.rows(), d.cols());
    for (a, b) in terms {
        w = &w + &a.matmul(&d.commutator(b));
    }
    w
}

fn check_members<T: Real>(alg: &StarAlgebra<T>, terms: &[(Matrix<T>, Matrix<T>)]) -> Result<()> {
    let tol = T::default_tol();
    for (i, (a, b)) in terms.iter().enumerate() {
        for (name, x) in [("a", a), ("b", b)] {
            let r = alg.membership_residual(x)?;
            if r > tol * floor_one(x.fro_norm()) {
                return Err(Error::NotInAlgebra {
                    what: format!("one-form coefficient {name}_{i}"),
                    residual: r.to_f64_lossy(),
                });
            }
        }
    }
    Ok(())
}

/// Builds `ω_ℓ = Σᵢ aᵢ[D_ℓ, bᵢ]` for every summand from one term list.
///
/// With `symmetrize` the terms are replaced by the union with their formal
/// adjoints (weight ½ each), which makes `ω = ω*`.
pub fn make_one_form<T: Real>(
    tt: &TwistedTriple<T>,
    terms: &[(Matrix<T>, Matrix<T>)],
    symmetrize: bool,
) -> Result<OneForm<T>> {
    let per: Vec<Vec<(Matrix<T>, Matrix<T>)>> = vec![terms.to_vec(); tt.summands().len()];
    make_one_form_per_summand(tt, &per, symmetrize)
}

/// As [`make_one_form`], with a separate term list for each summand.
pub fn make_one_form_per_summand<T: Real>(
    tt: &TwistedTriple<T>,
    terms: &[Vec<(Matrix<T>, Matrix<T>)>],
    symmetrize: bool,
) -> Result<OneForm<T>> {
    let t = tt.triple();
    if terms.len() != tt.summands().len() {
        return Err(mismatch(
            format!("{} term lists", tt.summands().len()),
            format!("{}", terms.len()),
        ));
    }
    for ts in terms {
        check_members(t.algebra(), ts)?;
    }
    let terms: Vec<Vec<(Matrix<T>, Matrix<T>)>> = if symmetrize {
        terms.iter().map(|ts| symmetrized(ts)).collect()
    } else {
        terms.to_vec()
    };
    let per_summand: Vec<Matrix<T>> = tt
        .summands()
        .par_iter()
        .zip(terms.par_iter())
        .map(|(s, ts)| form_for(s.d(), ts))
        .collect();
    let mut total = Matrix::zeros(t.dim_h(), t.dim_h());
    for w in &per_summand {
        total = &total + w;
    }
    let asym = op_norm(&(&total - &total.adjoint()));
    let selfadjoint = asym <= T::default_tol() * floor_one(op_norm(&total));
    Ok(OneForm {
        total,
        per_summand,
        terms,
        selfadjoint,
    })
}

fn require_selfadjoint<T: Real>(w: &OneForm<T>, n: usize, count: usize) -> Result<()> {
    if w.total.shape() != (n, n) || w.per_summand.len() != count {
        return Err(mismatch(
            format!("{n}x{n} form with {count} pieces"),
            format!(
                "{}x{} form with {} pieces",
                w.total.rows(),
                w.total.cols(),
                w.per_summand.len()
            ),
        ));
    }
    let asym = w.asymmetry();
    if asym > T::default_tol() * floor_one(op_norm(&w.total)) {
        return Err(Error::NotHermitian {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `D_ω = D + ω`, summands `D_ℓ + ω_ℓ`, twists unchanged.
pub fn fluctuate_plain<T: Real>(tt: &TwistedTriple<T>, w: &OneForm<T>) -> Result<TwistedTriple<T>> {
    let t = tt.triple();
    require_selfadjoint(w, t.dim_h(), tt.summands().len())?;
    let d = t.d() + &w.total;
    let summands: Vec<Summand<T>> = tt
        .summands()
        .iter()
        .zip(&w.per_summand)
        .map(|(s, wl)| s.with_operator(s.d() + wl))
        .collect();
    let triple = Triple::new(
        t.algebra().clone(),
        d,
        t.j().clone(),
        t.epsilon_prime(),
        t.grading().cloned(),
    )?;
    TwistedTriple::new(triple, summands)
}

/// What [`fluctuate_eps`] measured about its output.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsFluctuation<T> {
    pub triple: TwistedTriple<T>,
    /// `‖D′ − D′*‖ / max(‖D′‖, 1)` for the new total operator.
    pub hermiticity_defect: f64,
    /// Same for each correction `ε′ ν_ℓ J ω_ℓ J⁻¹ ν_ℓ`.
    pub correction_hermiticity: Vec<f64>,
    /// `[(D_ω)′_ℓ, a] = [(D_ω)_ℓ, a]` over all summands and basis elements.
    pub commutator_gap: ConditionEntry,
    pub notes: Vec<String>,
}

/// `(D_ω)′_ℓ = D_ℓ + ω_ℓ + ε′ ν_ℓ J ω_ℓ J⁻¹ ν_ℓ`.
///
/// Requires regularity of every twist. Hermiticity of the result is measured
/// and returned, not enforced; the grading is kept only if the new operator
/// still anticommutes with it.
pub fn fluctuate_eps<T: Real>(tt: &TwistedTriple<T>, w: &OneForm<T>) -> Result<EpsFluctuation<T>> {
    let t = tt.triple();
    let tol = tol_of::<T>();
    require_selfadjoint(w, t.dim_h(), tt.summands().len())?;
    for e in check_regularity(tt, tol) {
        if !e.pass {
            return Err(Error::Precondition(format!(
                "twist {} is not regular (relative residual {:e})",
                e.summand.unwrap_or(0),
                e.relative_residual
            )));
        }
    }
    let sign = cr(t.epsilon_prime().value::<T>());
    let mut corrections = Vec::with_capacity(tt.summands().len());
    let mut summands = Vec::with_capacity(tt.summands().len());
    let mut total = Matrix::zeros(t.dim_h(), t.dim_h());
    for (s, wl) in tt.summands().iter().zip(&w.per_summand) {
        let corr = s.nu().matmul(&t.j().conjugate_unchecked(wl)).matmul(s.nu()).scale(sign);
        let d_new = &(s.d() + wl) + &corr;
        total = &total + &d_new;
        summands.push(s.with_operator(d_new));
        corrections.push(corr);
    }

    let rel_asym = |m: &Matrix<T>| (hermitian_asymmetry(m) / floor_one(op_norm(m))).to_f64_lossy();
    let hermiticity_defect = rel_asym(&total);
    let correction_hermiticity = corrections.iter().map(rel_asym).collect();

    let mut notes = vec!["boundedness of nu_l J omega_l J^-1 nu_l: automatic (finite-dimensional)".to_string()];
    let mut grading = t.grading().cloned();
    if let Some(g) = &grading {
        let anti = op_norm(&g.gamma.anticommutator(&total)) / floor_one(op_norm(&total));
        if anti.to_f64_lossy() > tol {
            notes.push(format!(
                "grading dropped: fluctuated operator does not anticommute with gamma (relative {:e})",
                anti.to_f64_lossy()
            ));
            grading = None;
        }
    }
    if hermiticity_defect > tol {
        notes.push(format!(
            "fluctuated operator is not selfadjoint (relative defect {hermiticity_defect:e})"
        ));
    }

    let basis = t.algebra().basis();
    let a_norm = basis.iter().map(op_norm).fold(T::zero(), T::max);
    let (gap, natural) = corrections
        .iter()
        .map(|c| {
            let gap = basis
                .par_iter()
                .map(|a| op_norm(&c.commutator(a)))
                .reduce(T::zero, T::max);
            (gap, op_norm(c) * a_norm)
        })
        .fold((T::zero(), T::zero()), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    let commutator_gap = ConditionEntry::new(
        "commutator_equality",
        "[(D_w)'_l, a] = [(D_w)_l, a]",
        None,
        gap.to_f64_lossy(),
        floor_one(natural).to_f64_lossy(),
        tol,
    );

    let triple = Triple::assemble(t.algebra().clone(), total, t.j().clone(), t.epsilon_prime(), grading)?;
    Ok(EpsFluctuation {
        triple: TwistedTriple::from_parts_unchecked(triple, summands),
        hermiticity_defect,
        correction_hermiticity,
        commutator_gap,
        notes,
    })
}

// ---------------------------------------------------------------------------
// rescalings

fn require_positive<T: Real>(k: &Matrix<T>, what: &str) -> Result<()> {
    let eig = herm_eig(k)?;
    let min = eig.values.first().copied().unwrap_or(T::zero());
    let max = eig.values.last().copied().unwrap_or(T::zero());
    // negated so that NaN eigenvalues are rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let bad = !(min > T::lit(POSITIVITY_RATIO) * max) || max <= T::zero();
    if bad {
        return Err(Error::NotPositive {
            what: what.to_string(),
            min: min.to_f64_lossy(),
            max: max.to_f64_lossy(),
        });
    }
    Ok(())
}

fn require_member<T: Real>(alg: &StarAlgebra<T>, x: &Matrix<T>, what: &str) -> Result<T> {
    let r = alg.membership_residual(x)?;
    if r > T::default_tol() * floor_one(x.fro_norm()) {
        return Err(Error::NotInAlgebra {
            what: what.to_string(),
            residual: r.to_f64_lossy(),
        });
    }
    Ok(r)
}

/// Rescales each summand by a positive `k_ℓ ∈ A`:
/// `D_ℓ ↦ (Jk_ℓJ⁻¹) D_ℓ (Jk_ℓJ⁻¹)` with twist `ν_ℓ = k_ℓ⁻¹ Jk_ℓJ⁻¹`.
///
/// The input must be untwisted, and each summand must satisfy the ordinary
/// first-order condition.
pub fn multiconformal_rescale<T: Real>(tt: &TwistedTriple<T>, ks: &[Matrix<T>]) -> Result<TwistedTriple<T>> {
    let t = tt.triple();
    if ks.len() != tt.summands().len() {
        return Err(mismatch(
            format!("{} rescaling elements", tt.summands().len()),
            ks.len(),
        ));
    }
    if !tt.is_untwisted() {
        return Err(Error::Precondition(
            "multiconformal rescaling needs identity twists".into(),
        ));
    }
    let tol = tol_of::<T>();
    for (l, s) in tt.summands().iter().enumerate() {
        let e = check_first_order(t, s.d(), Some(l), tol);
        if !e.pass {
            return Err(Error::Precondition(format!(
                "summand {l} violates the first-order condition (relative residual {:e})",
                e.relative_residual
            )));
        }
    }
    let mut summands = Vec::with_capacity(ks.len());
    let mut total = Matrix::zeros(t.dim_h(), t.dim_h());
    for (l, (s, k)) in tt.summands().iter().zip(ks).enumerate() {
        let what = format!("k_{}", l + 1);
        require_member(t.algebra(), k, &what)?;
        require_positive(k, &what)?;
        let kk = t.j().conjugate(k)?;
        let d = kk.matmul(s.d()).matmul(&kk);
        let nu = inverse(k)?.matmul(&kk);
        total = &total + &d;
        summands.push(Summand::new(d, nu)?);
    }
    let triple = Triple::new(
        t.algebra().clone(),
        total,
        t.j().clone(),
        t.epsilon_prime(),
        t.grading().cloned(),
    )?;
    TwistedTriple::new(triple, summands)
}

/// `Cl_D(A)`: the algebra generated by `A` and `[D, A]`.
pub fn clifford_algebra<T: Real>(t: &Triple<T>) -> Result<StarAlgebra<T>> {
    let alg = t.algebra();
    let seeds: Vec<Matrix<T>> = if alg.generators().is_empty() {
        alg.basis().to_vec()
    } else {
        alg.generators().to_vec()
    };
    let mut gens = seeds.clone();
    gens.extend(seeds.iter().map(|a| t.d().commutator(a)));
    let n = t.dim_h();
    StarAlgebra::span_closure(gens, T::default_tol(), n * n)
}

/// Output of [`clifford_rescale`].
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordRescaling<T> {
    pub triple: TwistedTriple<T>,
    pub clifford_dim: usize,
    /// `membership_residual(k, Cl_D(A))`
    pub k_membership: f64,
    /// `membership_residual(k, A)`; large when `k` genuinely leaves `A`.
    pub k_outside_algebra: f64,
    /// `‖[k, JkJ⁻¹]‖ / ‖k‖²`; every claimed condition of the rescaled
    /// structure relies on this vanishing.
    pub k_commutator: f64,
    pub k_hermitian: bool,
    pub k_positive: bool,
    /// Basis index `b` maximizing `membership_residual(ν b ν⁻¹, A)`, and that
    /// residual (relative to `‖ν b ν⁻¹‖`).
    pub automorphism_witness: (usize, f64),
    pub grading_kept: bool,
    pub notes: Vec<String>,
}

/// Rescaling by an invertible `k ∈ Cl_D(A)`:
/// `D_k = JkJ⁻¹ D JkJ⁻¹`, single twist `ν = k⁻¹ JkJ⁻¹`.
///
/// The input must satisfy the untwisted zero-order, first-order and `ε′`
/// conditions. `ν̄ = Ad ν` need not preserve `A`; the report carries a
/// witness.
pub fn clifford_rescale<T: Real>(tt: &TwistedTriple<T>, k: &Matrix<T>) -> Result<CliffordRescaling<T>> {
    let t = tt.triple();
    let tol = tol_of::<T>();
    for e in [
        check_zero_order(t, tol),
        check_first_order(t, t.d(), None, tol),
        check_epsilon_prime_untwisted(t, t.d(), None, tol),
    ] {
        if !e.pass {
            return Err(Error::Precondition(format!(
                "{} fails on the input (relative residual {:e})",
                e.id, e.relative_residual
            )));
        }
    }
    if !tt.is_untwisted() {
        return Err(Error::Precondition(
            "Clifford rescaling needs an untwisted input".into(),
        ));
    }
    let cl = clifford_algebra(t)?;
    let k_membership = require_member(&cl, k, "k")?.to_f64_lossy();
    let k_outside_algebra = t.algebra().membership_residual(k)?.to_f64_lossy();
    let k_inv = inverse(k)?;

    let kn = op_norm(k);
    let k_hermitian = hermitian_asymmetry(k) <= T::default_tol() * floor_one(kn);
    let k_positive = k_hermitian && require_positive(k, "k").is_ok();
    let mut notes = Vec::new();
    if !k_positive {
        notes.push("k is not Hermitian positive; conditions are measured, not expected".to_string());
    }

    let kk = t.j().conjugate(k)?;
    let k_commutator = (op_norm(&k.commutator(&kk)) / floor_one(kn * kn)).to_f64_lossy();
    if k_commutator > tol {
        notes.push(format!(
            "k does not commute with JkJ^-1 (relative {k_commutator:e}); twisted conditions are not expected to hold"
        ));
    }
    let d = kk.matmul(t.d()).matmul(&kk);
    let nu = k_inv.matmul(&kk);

    let mut grading = t.grading().cloned();
    if let Some(g) = &grading {
        let c = op_norm(&g.gamma.commutator(k)) / floor_one(kn);
        if c.to_f64_lossy() > tol {
            notes.push(format!(
                "grading dropped: k does not commute with gamma (relative {:e})",
                c.to_f64_lossy()
            ));
            grading = None;
        }
    }
    let grading_kept = grading.is_some();

    let summand = Summand::new(d.clone(), nu)?;
    let automorphism_witness = t
        .algebra()
        .basis()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let img = summand.twist(b);
            let r = t.algebra().membership_residual(&img).unwrap_or(T::nan()) / floor_one(img.fro_norm());
            (i, r.to_f64_lossy())
        })
        .reduce(
            || (0, f64::NEG_INFINITY),
            |x, y| if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x },
        );

    let triple = Triple::new(t.algebra().clone(), d, t.j().clone(), t.epsilon_prime(), grading)?;
    Ok(CliffordRescaling {
        triple: TwistedTriple::new(triple, vec![summand])?,
        clifford_dim: cl.len(),
        k_membership,
        k_outside_algebra,
        k_commutator,
        k_hermitian,
        k_positive,
        automorphism_witness,
        grading_kept,
        notes,
    })
}

/// `exp(s x)` for Hermitian `x`.
pub fn exp_hermitian<T: Real>(x: &Matrix<T>, s: T) -> Result<Matrix<T>> {
    crate::numat::herm_fn(x, |l| cr((s * l).exp()))
}

/// `n_terms` seeded pairs `(a, b)` of random algebra elements (Gaussian
/// coefficients on the basis, each element scaled to Hilbert–Schmidt norm
/// `scale`). Feed them to [`make_one_form`] with `symmetrize = true` to get
/// a random selfadjoint one-form.
pub fn random_terms<T: Real>(alg: &StarAlgebra<T>, seed: u64, n_terms: usize, scale: T) -> Vec<(Matrix<T>, Matrix<T>)> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut element = || {
        let coeffs: Vec<crate::scalar::C<T>> = (0..alg.len())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                crate::scalar::C::new(T::lit(re), T::lit(im))
            })
            .collect();
        let x = alg.combination(&coeffs).expect("coefficient count matches basis");
        let n = x.fro_norm();
        x.scale_real(scale / n)
    };
    (0..n_terms).map(|_| (element(), element())).collect()
}
