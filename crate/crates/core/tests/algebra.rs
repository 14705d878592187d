use multitwist::algebra::StarAlgebra;
use multitwist::examples::{clock_shift, Gns};
use multitwist::numat::{op_norm, pauli, Antilinear, Matrix};
use multitwist::{Error, C};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit_combination(alg: &StarAlgebra<f64>, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let coeffs: Vec<C<f64>> = (0..alg.len())
        .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let x = alg.combination(&coeffs).unwrap();
    let n = x.fro_norm();
    x.scale_real(1.0 / n)
}

#[test]
fn closure_dimensions() {
    assert_eq!(
        StarAlgebra::<f64>::generated_by(vec![Matrix::identity(2)])
            .unwrap()
            .len(),
        1
    );
    assert_eq!(StarAlgebra::<f64>::generated_by(vec![pauli(1)]).unwrap().len(), 2);
    let (c, s) = clock_shift::<f64>(2, 1).unwrap();
    assert_eq!(StarAlgebra::generated_by(vec![c, s]).unwrap().len(), 4);
    let (c, s) = clock_shift::<f64>(5, 2).unwrap();
    assert_eq!(StarAlgebra::generated_by(vec![c, s]).unwrap().len(), 25);
}

#[test]
fn closure_is_unital_star_closed_and_orthonormal() {
    let (c, s) = clock_shift::<f64>(3, 1).unwrap();
    let g = Gns::new(3);
    let alg = StarAlgebra::generated_by(vec![g.leftmult(&c), g.leftmult(&s)]).unwrap();
    assert_eq!(alg.len(), 9);
    assert!(alg.orthonormality_residual() < 1e-10);
    assert!(alg.closure_residual() < 1e-9);
    assert!(alg.membership_residual(&Matrix::identity(9)).unwrap() < 1e-12);
}

#[test]
fn closure_is_idempotent() {
    let (c, s) = clock_shift::<f64>(3, 1).unwrap();
    let alg = StarAlgebra::generated_by(vec![c, s]).unwrap();
    let again = StarAlgebra::span_closure(alg.basis().to_vec(), 1e-9, 9).unwrap();
    assert_eq!(again.len(), alg.len());
}

#[test]
fn membership_examples() {
    let alg = StarAlgebra::<f64>::generated_by(vec![pauli(3)]).unwrap();
    assert!(alg.membership_residual(&Matrix::identity(2)).unwrap() < 1e-12);
    let off = pauli::<f64>(1).scale(C::new(2.0, 0.0));
    assert!((alg.membership_residual(&off).unwrap() - off.fro_norm()).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_unit_combination(&alg, &mut rng).scale_real(7.0);
    assert!(alg.membership_residual(&x).unwrap() < 1e-10 * x.fro_norm());
}

#[test]
fn commutant_examples() {
    let (c, s) = clock_shift::<f64>(3, 1).unwrap();
    let g = Gns::new(3);
    let alg = StarAlgebra::generated_by(vec![g.leftmult(&c), g.leftmult(&s)]).unwrap();
    assert!(alg.commutant_residual(&Matrix::identity(9)).unwrap() < 1e-15);
    assert!(alg.commutant_residual(&Matrix::scalar(9, C::new(0.0, 2.5))).unwrap() < 1e-15);
    let right = g.rightmult(&(&c + &s.scale(C::new(0.3, -0.2))));
    assert!(alg.commutant_residual(&right).unwrap() < 1e-12);
}

#[test]
fn errors_are_reported() {
    assert!(matches!(
        StarAlgebra::<f64>::span_closure(vec![Matrix::zeros(2, 3)], 1e-9, 4),
        Err(Error::NotSquare { .. })
    ));
    let (c, s) = clock_shift::<f64>(3, 1).unwrap();
    assert!(matches!(
        StarAlgebra::span_closure(vec![c, s], 1e-9, 5),
        Err(Error::ClosureTooLarge { max_dim: 5, .. })
    ));
}

#[test]
fn span_bound_over_basis_pairs() {
    // A zero-order defect (sabotaged J = plain conjugation on the GNS space)
    // is bilinear in (a, b); on unit-norm combinations it is bounded by
    // (basis size)^2 times the worst basis-pair defect.
    let (c, s) = clock_shift::<f64>(3, 1).unwrap();
    let g = Gns::new(3);
    let alg = StarAlgebra::generated_by(vec![g.leftmult(&c), g.leftmult(&s)]).unwrap();
    let j = Antilinear::<f64>::conjugation(9);
    let defect = |a: &Matrix<f64>, b: &Matrix<f64>| op_norm(&a.commutator(&j.conjugate(b).unwrap()));
    let mut worst_pair = 0.0f64;
    for a in alg.basis() {
        for b in alg.basis() {
            worst_pair = worst_pair.max(defect(a, b));
        }
    }
    assert!(worst_pair > 0.1);
    let n = alg.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let a = random_unit_combination(&alg, &mut rng);
        let b = random_unit_combination(&alg, &mut rng);
        assert!(defect(&a, &b) <= n * n * worst_pair);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_bounded_and_idempotent(entries in prop::collection::vec(-1.0f64..1.0, 2 * 9 * 2), take in 1usize..3) {
        let gens: Vec<Matrix<f64>> = entries
            .chunks(18)
            .take(take)
            .map(|v| Matrix::from_fn(3, 3, |i, j| C::new(v[2 * (3 * i + j)], v[2 * (3 * i + j) + 1])))
            .collect();
        let alg = StarAlgebra::span_closure(gens, 1e-9, 9).unwrap();
        prop_assert!(alg.len() <= 9);
        prop_assert!(alg.orthonormality_residual() < 1e-10);
        let again = StarAlgebra::span_closure(alg.basis().to_vec(), 1e-9, 9).unwrap();
        prop_assert_eq!(again.len(), alg.len());
    }
}
