use rayon::prelude::*;

use super::pairs::worst_pair;
use super::report::{ConditionEntry, ConditionReport};
use super::{summand_gap, Grading, Summand, Triple, TwistedTriple};
use crate::error::{Error, Result};
use crate::numat::{hermitian_asymmetry, op_norm, Matrix, Sign};
use crate::scalar::{cr, floor_one, Real};

/// How `ν̄_ℓ` acts on algebra elements.
#[derive(Clone, Copy, PartialEq, Eq)]
enum TwistMode {
    /// The summand's algebra twist representative if it has one, else `Ad ν_ℓ`.
    Effective,
    /// Always `Ad ν_ℓ`.
    Literal,
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64_lossy()
}

fn scaled<T: Real>(id: &str, relation: &str, summand: Option<usize>, abs: T, natural: T, tol: f64) -> ConditionEntry {
    ConditionEntry::new(id, relation, summand, f(abs), f(floor_one(natural)), tol)
}

fn norms<T: Real>(ms: &[Matrix<T>]) -> Vec<T> {
    ms.par_iter().map(op_norm).collect()
}

fn max_of<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::zero(), T::max)
}

/// `[a, J b J⁻¹] = 0` for all basis pairs.
pub fn check_zero_order<T: Real>(t: &Triple<T>, tol: f64) -> ConditionEntry {
    let basis = t.algebra().basis();
    let j = t.j();
    let jb: Vec<Matrix<T>> = basis.par_iter().map(|b| j.conjugate_unchecked(b)).collect();
    let bn = norms(basis);
    let (abs, witness) = worst_pair(basis.len(), basis.len(), |ia, ib| vec![basis[ia].commutator(&jb[ib])]);
    let natural = max_of(&bn) * max_of(&bn);
    scaled("zero_order", "[a, J b J^-1] = 0", None, abs, natural, tol).with_witness(witness)
}

/// `[[d, a], J b J⁻¹] = 0` for all basis pairs.
pub fn check_first_order<T: Real>(t: &Triple<T>, d: &Matrix<T>, summand: Option<usize>, tol: f64) -> ConditionEntry {
    let basis = t.algebra().basis();
    let j = t.j();
    let jb: Vec<Matrix<T>> = basis.par_iter().map(|b| j.conjugate_unchecked(b)).collect();
    let comms: Vec<Matrix<T>> = basis.par_iter().map(|a| d.commutator(a)).collect();
    let cn = norms(&comms);
    let bn = norms(basis);
    let (abs, witness) = worst_pair(basis.len(), basis.len(), |ia, ib| {
        vec![&comms[ia].matmul(&jb[ib]) - &jb[ib].matmul(&comms[ia])]
    });
    let vacuous = is_vacuous(&cn, d, tol);
    scaled(
        "first_order",
        "[[D, a], J b J^-1] = 0",
        summand,
        abs,
        max_of(&cn) * max_of(&bn),
        tol,
    )
    .with_witness(witness)
    .vacuous(vacuous)
}

fn is_vacuous<T: Real>(comm_norms: &[T], d: &Matrix<T>, tol: f64) -> bool {
    max_of(comm_norms) <= T::lit(tol) * floor_one(op_norm(d))
}

/// `D J = ε′ J D` for the given operator, i.e. `‖d U − ε′ U conj(d)‖`.
pub fn check_epsilon_prime_untwisted<T: Real>(
    t: &Triple<T>,
    d: &Matrix<T>,
    summand: Option<usize>,
    tol: f64,
) -> ConditionEntry {
    let u = t.j().unitary();
    let sign = cr(t.epsilon_prime().value::<T>());
    let lhs = d.matmul(u);
    let rhs = u.matmul(&d.conj()).scale(sign);
    scaled(
        "epsilon_prime_untwisted",
        "D J = eps' J D",
        summand,
        op_norm(&(&lhs - &rhs)),
        op_norm(d),
        tol,
    )
}

struct TwistedImages<T> {
    /// `J ν̄(b) J⁻¹`
    fwd: Vec<Matrix<T>>,
    /// `J ν̄⁻¹(b) J⁻¹`
    back: Vec<Matrix<T>>,
    /// `max(‖ν̄(b)‖, ‖ν̄⁻¹(b)‖)` per basis element
    norms: Vec<T>,
}

fn twisted_images<T: Real>(t: &Triple<T>, s: &Summand<T>, mode: TwistMode) -> TwistedImages<T> {
    let (r, ri) = match mode {
        TwistMode::Effective => s.effective_twist(),
        TwistMode::Literal => (s.nu(), s.nu_inv()),
    };
    let j = t.j();
    let parts: Vec<(Matrix<T>, Matrix<T>, T)> = t
        .algebra()
        .basis()
        .par_iter()
        .map(|b| {
            let fwd = r.matmul(b).matmul(ri);
            let back = ri.matmul(b).matmul(r);
            let n = op_norm(&fwd).max(op_norm(&back));
            (j.conjugate_unchecked(&fwd), j.conjugate_unchecked(&back), n)
        })
        .collect();
    let mut out = TwistedImages {
        fwd: Vec::with_capacity(parts.len()),
        back: Vec::with_capacity(parts.len()),
        norms: Vec::with_capacity(parts.len()),
    };
    for (a, b, n) in parts {
        out.fwd.push(a);
        out.back.push(b);
        out.norms.push(n);
    }
    out
}

fn mt_zero_order_impl<T: Real>(tt: &TwistedTriple<T>, tol: f64, mode: TwistMode, id: &str) -> Vec<ConditionEntry> {
    let t = tt.triple();
    let basis = t.algebra().basis();
    let an = norms(basis);
    tt.summands()
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let img = twisted_images(t, s, mode);
            let (abs, witness) = worst_pair(basis.len(), basis.len(), |ia, ib| {
                vec![basis[ia].commutator(&img.fwd[ib]), basis[ia].commutator(&img.back[ib])]
            });
            scaled(
                id,
                "[a, J nu(b) J^-1] = 0 = [a, J nu^-1(b) J^-1]",
                Some(l),
                abs,
                max_of(&an) * max_of(&img.norms),
                tol,
            )
            .with_witness(witness)
        })
        .collect()
}

fn mt_first_order_impl<T: Real>(tt: &TwistedTriple<T>, tol: f64, mode: TwistMode, id: &str) -> Vec<ConditionEntry> {
    let t = tt.triple();
    let basis = t.algebra().basis();
    tt.summands()
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let img = twisted_images(t, s, mode);
            let comms: Vec<Matrix<T>> = basis.par_iter().map(|a| s.d().commutator(a)).collect();
            let cn = norms(&comms);
            let (abs, witness) = worst_pair(basis.len(), basis.len(), |ia, ib| {
                vec![&comms[ia].matmul(&img.fwd[ib]) - &img.back[ib].matmul(&comms[ia])]
            });
            let vacuous = is_vacuous(&cn, s.d(), tol);
            scaled(
                id,
                "[D_l, a] J nu(b) J^-1 = J nu^-1(b) J^-1 [D_l, a]",
                Some(l),
                abs,
                max_of(&cn) * max_of(&img.norms),
                tol,
            )
            .with_witness(witness)
            .vacuous(vacuous)
        })
        .collect()
}

/// Twisted zero-order condition, both equalities, one entry per summand.
pub fn check_mt_zero_order<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    mt_zero_order_impl(tt, tol, TwistMode::Effective, "mt_zero_order")
}

/// As [`check_mt_zero_order`] but always with `ν̄ = Ad ν`, ignoring any
/// algebra twist representative.
pub fn check_mt_zero_order_ad_nu<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    mt_zero_order_impl(tt, tol, TwistMode::Literal, "mt_zero_order_ad_nu")
}

/// Twisted first-order condition, one entry per summand.
pub fn check_mt_first_order<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    mt_first_order_impl(tt, tol, TwistMode::Effective, "mt_first_order")
}

pub fn check_mt_first_order_ad_nu<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    mt_first_order_impl(tt, tol, TwistMode::Literal, "mt_first_order_ad_nu")
}

fn epsilon_prime_defect<T: Real>(t: &Triple<T>, s: &Summand<T>, sign: Sign) -> T {
    let u = t.j().unitary();
    let lhs = s.d().matmul(u).matmul(&s.nu().conj());
    let rhs = s.nu().matmul(u).matmul(&s.d().conj()).scale(cr(sign.value::<T>()));
    op_norm(&(&lhs - &rhs))
}

/// `D_ℓ J ν_ℓ = ε′ ν_ℓ J D_ℓ`, one entry per summand.
pub fn check_epsilon_prime<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    let t = tt.triple();
    tt.summands()
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let abs = epsilon_prime_defect(t, s, t.epsilon_prime());
            scaled(
                "epsilon_prime",
                "D_l J nu_l = eps' nu_l J D_l",
                Some(l),
                abs,
                op_norm(s.d()) * op_norm(s.nu()),
                tol,
            )
        })
        .collect()
}

fn measured_signs<T: Real>(tt: &TwistedTriple<T>) -> Vec<i8> {
    let t = tt.triple();
    tt.summands()
        .iter()
        .map(|s| {
            let plus = epsilon_prime_defect(t, s, Sign::Plus);
            let minus = epsilon_prime_defect(t, s, Sign::Minus);
            if plus <= minus {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// `ν_ℓ J ν_ℓ = J`, one entry per summand.
pub fn check_regularity<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    let u = tt.triple().j().unitary();
    tt.summands()
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let m = s.nu().matmul(u).matmul(&s.nu().conj());
            let n = op_norm(s.nu());
            scaled("regularity", "nu_l J nu_l = J", Some(l), op_norm(&(&m - u)), n * n, tol)
        })
        .collect()
}

/// `γ ν_ℓ² = ν_ℓ² γ`; an error on odd triples.
pub fn check_grading_twist<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Result<Vec<ConditionEntry>> {
    let g = tt
        .triple()
        .grading()
        .ok_or_else(|| Error::Precondition("grading condition requires an even triple".into()))?;
    let gn = op_norm(&g.gamma);
    Ok(tt
        .summands()
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let sq = s.nu().matmul(s.nu());
            scaled(
                "grading_twist",
                "gamma nu_l^2 = nu_l^2 gamma",
                Some(l),
                op_norm(&g.gamma.commutator(&sq)),
                gn * op_norm(&sq),
                tol,
            )
        })
        .collect())
}

/// For summands carrying an algebra twist representative `ρ`: measures
/// `ρ b ρ⁻¹ = ν b ν⁻¹` over the basis.
pub fn check_twist_representative<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    let basis = tt.triple().algebra().basis();
    tt.summands()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.algebra_twist().is_some())
        .map(|(l, s)| {
            let (r, ri) = s.effective_twist();
            let (abs, natural) = basis
                .par_iter()
                .map(|b| {
                    let via_rho = r.matmul(b).matmul(ri);
                    let via_nu = s.nu().matmul(b).matmul(s.nu_inv());
                    (op_norm(&(&via_rho - &via_nu)), op_norm(&via_rho).max(op_norm(&via_nu)))
                })
                .reduce(|| (T::zero(), T::zero()), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            scaled(
                "twist_representative",
                "rho b rho^-1 = nu b nu^-1 on A",
                Some(l),
                abs,
                natural,
                tol,
            )
        })
        .collect()
}

/// `(id, relation, absolute, natural scale)` for each grading relation.
fn grading_measurements<T: Real>(t: &Triple<T>, g: &Grading<T>) -> Vec<(&'static str, &'static str, T, T)> {
    let n = t.dim_h();
    let gamma = &g.gamma;
    let gn = op_norm(gamma);
    let dn = op_norm(t.d());
    let involution = op_norm(&(&gamma.matmul(gamma) - &Matrix::identity(n))).max(hermitian_asymmetry(gamma));
    let anti = op_norm(&gamma.anticommutator(t.d()));
    let (comm, comm_scale) = t
        .algebra()
        .basis()
        .par_iter()
        .map(|b| (op_norm(&gamma.commutator(b)), gn * op_norm(b)))
        .reduce(|| (T::zero(), T::zero()), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    let u = t.j().unitary();
    let jsign = op_norm(&(&gamma.matmul(u) - &u.matmul(&gamma.conj()).scale(cr(g.sign.value::<T>()))));
    vec![
        ("grading_involution", "gamma^2 = 1, gamma = gamma*", involution, gn * gn),
        ("grading_anticommutes_d", "gamma D = -D gamma", anti, gn * dn),
        ("grading_commutes_algebra", "[gamma, a] = 0", comm, comm_scale),
        ("grading_j_sign", "gamma J = +-J gamma", jsign, gn),
    ]
}

/// Relative residuals of the grading relations, for validation.
pub(super) fn grading_residuals<T: Real>(t: &Triple<T>, g: &Grading<T>) -> Vec<(&'static str, T)> {
    grading_measurements(t, g)
        .into_iter()
        .map(|(id, _, abs, natural)| (id, abs / floor_one(natural)))
        .collect()
}

/// Hermiticity of `D`, `Σ D_ℓ = D`, unitarity and square sign of `J`, the
/// grading relations and twist representatives.
pub fn structural_entries<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> Vec<ConditionEntry> {
    let t = tt.triple();
    let n = t.dim_h();
    let dn = op_norm(t.d());
    let mut out = vec![
        scaled(
            "d_hermitian",
            "D = D*",
            None,
            op_norm(&(t.d() - &t.d().adjoint())),
            dn,
            tol,
        ),
        scaled(
            "summand_sum",
            "sum_l D_l = D",
            None,
            summand_gap(t, tt.summands()),
            dn,
            tol,
        ),
    ];
    let u = t.j().unitary();
    out.push(scaled(
        "j_unitary",
        "U U* = 1",
        None,
        op_norm(&(&u.matmul(&u.adjoint()) - &Matrix::identity(n))),
        T::one(),
        tol,
    ));
    out.push(scaled(
        "j_square_sign",
        "J^2 = eps",
        None,
        t.j().square_residual(),
        T::one(),
        tol,
    ));
    if let Some(g) = t.grading() {
        for (id, rel, abs, natural) in grading_measurements(t, g) {
            out.push(scaled(id, rel, None, abs, natural, tol));
        }
    }
    out.extend(check_twist_representative(tt, tol));
    out
}

/// Runs every structural check and condition checker, in a fixed order.
pub fn run_all<T: Real>(tt: &TwistedTriple<T>, tol: f64) -> ConditionReport {
    let t = tt.triple();
    let mut entries = structural_entries(tt, tol);
    entries.push(check_zero_order(t, tol));
    entries.push(check_first_order(t, t.d(), None, tol));
    entries.push(check_epsilon_prime_untwisted(t, t.d(), None, tol));
    let has_rho = tt.summands().iter().any(|s| s.algebra_twist().is_some());
    entries.extend(check_mt_zero_order(tt, tol));
    if has_rho {
        entries.extend(check_mt_zero_order_ad_nu(tt, tol));
    }
    entries.extend(check_mt_first_order(tt, tol));
    if has_rho {
        entries.extend(check_mt_first_order_ad_nu(tt, tol));
    }
    entries.extend(check_epsilon_prime(tt, tol));
    entries.extend(check_regularity(tt, tol));
    if let Ok(g) = check_grading_twist(tt, tol) {
        entries.extend(g);
    }

    let mut notes = vec!["compact resolvent: finite-dimensional, automatic".to_string()];
    for (l, s) in tt.summands().iter().enumerate() {
        let asym = hermitian_asymmetry(s.d());
        if asym > T::lit(tol) * floor_one(op_norm(s.d())) {
            notes.push(format!(
                "summand {l}: D_l is not selfadjoint (asymmetry {:e}); only the total D is required to be",
                f(asym)
            ));
        }
        notes.push(format!(
            "summand {l}: twist condition number {:e}",
            f(s.condition_number())
        ));
        if s.algebra_twist().is_some() {
            notes.push(format!(
                "summand {l}: twisted conditions use the algebra twist representative; *_ad_nu entries use Ad(nu_l) literally"
            ));
        }
    }
    ConditionReport {
        tolerance: tol,
        entries,
        measured_epsilon_prime: measured_signs(tt),
        notes,
    }
}
