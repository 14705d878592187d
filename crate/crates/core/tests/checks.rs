use multitwist::algebra::StarAlgebra;
use multitwist::examples::{
    asymmetric_torus_seeded, circle_bundle, clock_shift, fuzzy_circle_even, fuzzy_torus2, fuzzy_torus3, FuzzyParams,
    Gns,
};
use multitwist::numat::{herm_fn, op_norm, pauli, Antilinear, Matrix};
use multitwist::triple::*;
use multitwist::{constructions, ConditionReport, Error, Sign, C};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// `L(M_q)` on `M_q` with `D = ad h`, `h = (C + C*)/2`.
fn gns_triple(q: usize, j: Antilinear<f64>) -> Triple<f64> {
    let g = Gns::new(q);
    let (c, s) = clock_shift::<f64>(q, 1).unwrap();
    let alg = StarAlgebra::generated_by(vec![g.leftmult(&c), g.leftmult(&s)]).unwrap();
    let h = (&c + &c.adjoint()).scale_real(0.5);
    Triple::new(alg, g.ad(&h), j, Sign::Minus, None).unwrap()
}

fn random_unitary(n: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = Matrix::from_fn(n, n, |_, _| {
        use rand::Rng;
        C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .hermitian_part();
    herm_fn(&h, |l: f64| C::new(l.cos(), l.sin())).unwrap()
}

fn models() -> Vec<(&'static str, TwistedTriple<f64>)> {
    let p = FuzzyParams::<f64>::new(2, 1);
    vec![
        ("torus2", fuzzy_torus2(&p).unwrap().triple),
        ("circle_even", fuzzy_circle_even(&p).unwrap().triple),
        ("torus3", fuzzy_torus3(&p, true).unwrap().triple),
        ("asym", asymmetric_torus_seeded(&p, 3, 0.5).unwrap().triple),
        ("bundle", circle_bundle(&p, 0.3, None).unwrap().model.triple),
    ]
}

#[test]
fn twist_ad_examples() {
    let b = Matrix::<f64>::from_rows(&[&[(1.0, 0.0), (2.0, 1.0)], &[(0.0, -1.0), (3.0, 0.0)]]);
    assert!(twist_ad(&Matrix::identity(2), &b).unwrap().max_abs_diff(&b) < 1e-15);
    let nu = Matrix::from_real_diag(&[2.0, 1.0]);
    let e12 = Matrix::from_rows(&[&[(0.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]]);
    assert!(twist_ad(&nu, &e12).unwrap().max_abs_diff(&e12.scale_real(2.0)) < 1e-15);
    assert!(matches!(
        twist_ad(&Matrix::zeros(2, 2), &e12),
        Err(Error::Singular { .. })
    ));
}

#[test]
fn gns_triple_satisfies_untwisted_conditions() {
    for q in 2..=4 {
        let t = gns_triple(q, Gns::new(q).tomita());
        assert!(check_zero_order(&t, TOL).relative_residual < 1e-12);
        let fo = check_first_order(&t, t.d(), None, TOL);
        assert!(fo.relative_residual < 1e-12 && !fo.vacuous);
        assert!(check_epsilon_prime_untwisted(&t, t.d(), None, TOL).relative_residual < 1e-12);
    }
}

#[test]
fn sabotaged_real_structure_fails_zero_order_with_witness() {
    let t = gns_triple(3, Antilinear::conjugation(9));
    let e = check_zero_order(&t, TOL);
    assert!(e.relative_residual > 0.1, "{e:?}");
    assert!(!e.pass);
    let (ia, ib) = e.witness.expect("witness");
    let basis = t.algebra().basis();
    let direct = op_norm(&basis[ia].commutator(&t.j().conjugate(&basis[ib]).unwrap()));
    assert!((direct - e.absolute_residual).abs() < 1e-12);
}

#[test]
fn scalar_algebra_is_trivially_fine() {
    let alg = StarAlgebra::<f64>::scalars(2);
    let t = Triple::new(alg, pauli(3), Antilinear::conjugation(2), Sign::Plus, None).unwrap();
    assert_eq!(check_zero_order(&t, TOL).absolute_residual, 0.0);
    let fo = check_first_order(&t, t.d(), None, TOL);
    assert_eq!(fo.absolute_residual, 0.0);
    assert!(fo.vacuous);
}

#[test]
fn first_order_in_commutant_is_flagged_vacuous() {
    let q = 3;
    let g = Gns::new(q);
    let t = gns_triple(q, g.tomita());
    let (c, _) = clock_shift::<f64>(q, 1).unwrap();
    let d = g.rightmult(&(&c + &c.adjoint()));
    let e = check_first_order(&t, &d, Some(0), TOL);
    assert!(e.vacuous && e.pass);
}

#[test]
fn regularity_of_constant_twist() {
    let t = gns_triple(2, Gns::new(2).tomita());
    let nu = Matrix::scalar(4, C::new(2.0, 0.0));
    let tt = TwistedTriple::new(t, vec![Summand::new(Matrix::zeros(4, 4), nu).unwrap()]);
    // D = ad h ≠ 0 but the only summand is zero
    assert!(matches!(tt, Err(Error::SummandSum { .. })));

    let t = gns_triple(2, Gns::new(2).tomita());
    let d = t.d().clone();
    let tt = TwistedTriple::new(t, vec![Summand::new(d, Matrix::scalar(4, C::new(2.0, 0.0))).unwrap()]).unwrap();
    let e = &check_regularity(&tt, TOL)[0];
    assert!((e.relative_residual - 0.75).abs() < 1e-12);
    assert!(!e.pass);
}

#[test]
fn ill_conditioned_twist_is_rejected() {
    let t = gns_triple(2, Gns::new(2).tomita());
    let d = t.d().clone();
    let nu = Matrix::from_real_diag(&[1.0, 1.0, 1.0, 1e-10]);
    let r = TwistedTriple::new(t, vec![Summand::new(d, nu).unwrap()]);
    assert!(matches!(r, Err(Error::IllConditionedTwist { index: 0, .. })));
}

#[test]
fn grading_twist_examples() {
    let m = fuzzy_torus2(&FuzzyParams::<f64>::new(2, 1)).unwrap();
    let (t, summands) = m.triple.into_parts();
    let n = t.dim_h();
    // ν diagonal in the grading eigenbasis commutes with γ
    let nu = multitwist::numat::kron(&Matrix::from_real_diag(&[2.0, 0.5]), &Matrix::identity(n / 2));
    let d0 = summands[0].d().clone();
    let d1 = summands[1].d().clone();
    let tt = TwistedTriple::new(t.clone(), vec![Summand::new(d0, nu).unwrap(), Summand::untwisted(d1)]).unwrap();
    assert!(check_grading_twist(&tt, TOL)
        .unwrap()
        .iter()
        .all(|e| e.relative_residual < 1e-15));

    let odd = TwistedTriple::untwisted(t.without_grading());
    assert!(matches!(check_grading_twist(&odd, TOL), Err(Error::Precondition(_))));
}

#[test]
fn identity_twist_reduces_exactly_to_untwisted_conditions() {
    for (name, tt) in models() {
        let (t, summands) = tt.into_parts();
        let untwisted: Vec<Summand<f64>> = summands.iter().map(|s| Summand::untwisted(s.d().clone())).collect();
        let tt = TwistedTriple::new(t.clone(), untwisted).unwrap();
        let z = check_zero_order(&t, TOL);
        for e in check_mt_zero_order(&tt, TOL) {
            assert_eq!(e.relative_residual, z.relative_residual, "{name}");
        }
        for (l, e) in check_mt_first_order(&tt, TOL).into_iter().enumerate() {
            let u = check_first_order(&t, tt.summands()[l].d(), Some(l), TOL);
            assert_eq!(e.relative_residual, u.relative_residual, "{name}");
            assert_eq!(e.vacuous, u.vacuous, "{name}");
        }
        for (l, e) in check_epsilon_prime(&tt, TOL).into_iter().enumerate() {
            let u = check_epsilon_prime_untwisted(&t, tt.summands()[l].d(), Some(l), TOL);
            assert_eq!(e.relative_residual, u.relative_residual, "{name}");
        }
        for e in check_regularity(&tt, TOL) {
            assert_eq!(e.absolute_residual, 0.0, "{name}");
        }
    }
}

#[test]
fn residuals_are_unitarily_covariant() {
    for (i, (name, tt)) in models().into_iter().enumerate() {
        let w = random_unitary(tt.triple().dim_h(), 100 + i as u64);
        let a = run_all(&tt, TOL);
        let b = run_all(&tt.conjugated_by(&w), TOL);
        assert_eq!(a.entries.len(), b.entries.len(), "{name}");
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.id, y.id);
            assert!(
                (x.relative_residual - y.relative_residual).abs() < 1e-10,
                "{name} {}: {} vs {}",
                x.id,
                x.relative_residual,
                y.relative_residual
            );
        }
    }
}

#[test]
fn one_forms_are_unitarily_covariant() {
    let tt = asymmetric_torus_seeded(&FuzzyParams::<f64>::new(2, 1), 1, 0.4)
        .unwrap()
        .triple;
    let w = random_unitary(tt.triple().dim_h(), 9);
    let conj = |x: &Matrix<f64>| w.matmul(x).matmul(&w.adjoint());
    let terms = constructions::random_terms(tt.triple().algebra(), 4, 2, 1.0);
    let moved: Vec<_> = terms.iter().map(|(a, b)| (conj(a), conj(b))).collect();
    let f = constructions::make_one_form(&tt, &terms, true).unwrap();
    let g = constructions::make_one_form(&tt.conjugated_by(&w), &moved, true).unwrap();
    assert!(op_norm(&(&g.total - &conj(&f.total))) < 1e-10 * (1.0 + op_norm(&f.total)));
    for (x, y) in f.per_summand.iter().zip(&g.per_summand) {
        assert!(op_norm(&(y - &conj(x))) < 1e-10 * (1.0 + op_norm(x)));
    }
}

#[test]
fn report_round_trips_through_json_and_is_deterministic() {
    for (name, tt) in models() {
        let a = run_all(&tt, TOL);
        let b = run_all(&tt, TOL);
        let sa = serde_json::to_string(&a).unwrap();
        assert_eq!(sa, serde_json::to_string(&b).unwrap(), "{name}");
        let back: ConditionReport = serde_json::from_str(&sa).unwrap();
        assert_eq!(back, a, "{name}");
    }
}

#[test]
fn entries_are_consistent() {
    for (name, tt) in models() {
        let r = run_all(&tt, TOL);
        assert_eq!(r.measured_epsilon_prime.len(), tt.summands().len());
        for e in &r.entries {
            assert!(e.scale >= 1.0, "{name} {}", e.id);
            assert_eq!(e.relative_residual, e.absolute_residual / e.scale);
            assert_eq!(e.pass, e.relative_residual <= TOL, "{name} {}", e.id);
        }
    }
}

#[test]
fn builders_pass_their_assert_sets() {
    for q in 2..=3 {
        let p = FuzzyParams::<f64>::new(q, 1);
        for m in [
            fuzzy_torus2(&p).unwrap(),
            fuzzy_circle_even(&p).unwrap(),
            fuzzy_torus3(&p, true).unwrap(),
        ] {
            let v = run_all(&m.triple, TOL).evaluate(&m.asserts);
            assert!(v.passed, "{}: {v:?}", m.provenance);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pass_iff_within_tolerance(tol_exp in -16.0f64..0.0, seed in 0u64..1000) {
        let tol = 10f64.powf(tol_exp);
        let tt = asymmetric_torus_seeded(&FuzzyParams::<f64>::new(2, 1), seed, 0.5).unwrap().triple;
        for e in run_all(&tt, tol).entries {
            prop_assert_eq!(e.pass, e.relative_residual <= tol);
        }
    }
}
