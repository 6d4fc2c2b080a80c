use std::collections::BTreeMap;

use super::*;
use crate::markov_models::{
    random_chaos, ChaosSpec, Cube, Materialized, ModelTag, OrnsteinUhlenbeck, Poisson,
};
use crate::rational::{from_usize, int, ratio};

fn nat() -> Spectrum {
    Spectrum::Naturals
}

fn ou_h2(ou: &OrnsteinUhlenbeck) -> crate::markov_models::PolyFunction {
    ou.from_terms([(vec![2], int(1)), (vec![0], int(-1))]).unwrap()
}

#[test]
fn carre_du_champ_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    assert_eq!(carre_du_champ(&ou, &x, &x).unwrap(), ou.constant(int(1)));

    let cube = Cube::new(2).unwrap();
    let f = cube.walsh(&[0, 1]).unwrap();
    assert_eq!(carre_du_champ(&cube, &f, &f).unwrap(), cube.constant(int(2)));

    let poisson = Poisson::with_truncation(int(1), 20).unwrap();
    let g = poisson.from_fn(|j| int(j as i64 - 1));
    let gamma = carre_du_champ(&poisson, &g, &g).unwrap();
    for j in 0..gamma.valid_len() {
        assert_eq!(gamma.values()[j], ratio(1 + j as i64, 2), "j = {j}");
    }
}

#[test]
fn poisson_gamma_matches_difference_formula() {
    let theta = ratio(5, 3);
    let model = Poisson::with_truncation(theta.clone(), 25).unwrap();
    let f = model.from_fn(|j| ratio((j * j) as i64 - 3, 2));
    let gamma = carre_du_champ(&model, &f, &f).unwrap();
    let v = f.values();
    for j in 0..gamma.valid_len() {
        let up = &v[j + 1] - &v[j];
        let down = if j == 0 { v[0].clone() } else { &v[j] - &v[j - 1] };
        let want = (&theta * &up * &up + from_usize(j) * &down * &down) / int(2);
        assert_eq!(gamma.values()[j], want);
    }
}

#[test]
fn carre_du_champ_is_symmetric() {
    let cube = Cube::new(3).unwrap();
    let f = cube.from_fn(|x| ratio(x as i64 - 2, 3));
    let g = cube.from_fn(|x| int((x as i64 * 7) % 5));
    assert_eq!(
        carre_du_champ(&cube, &f, &g).unwrap(),
        carre_du_champ(&cube, &g, &f).unwrap()
    );
}

#[test]
fn iterated_gradient_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    assert_eq!(iterated_gradient(&ou, &x, &x, 0).unwrap(), ou.multiply(&x, &x).unwrap());
    assert_eq!(iterated_gradient(&ou, &x, &x, 2).unwrap(), ou.constant(int(1)));

    let cube = Cube::new(2).unwrap();
    let f = cube.walsh(&[0, 1]).unwrap();
    assert_eq!(iterated_gradient(&cube, &f, &f, 2).unwrap(), cube.constant(int(4)));
}

#[test]
fn second_gradient_is_hessian_plus_gradient_on_ou() {
    let ou = OrnsteinUhlenbeck::new(2).unwrap();
    let f = ou
        .from_terms([(vec![3, 1], int(1)), (vec![0, 2], ratio(-1, 2)), (vec![1, 0], int(3))])
        .unwrap();
    let g2 = iterated_gradient(&ou, &f, &f, 2).unwrap();
    let want = ou.add(&ou.hessian_sq(&f).unwrap(), &ou.gradient_sq(&f).unwrap()).unwrap();
    assert_eq!(g2, want);
}

#[test]
fn towers() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    let t = build_gamma_tower(&ou, &x, 3).unwrap();
    assert!(t.gradients().iter().all(|g| *g == ou.constant(int(1))));

    let cube = Cube::new(2).unwrap();
    let f = cube.walsh(&[0, 1]).unwrap();
    let t = build_gamma_tower(&cube, &f, 3).unwrap();
    let values: Vec<_> = t.gradients().iter().map(|g| cube.constant_value(g).unwrap()).collect();
    assert_eq!(values, vec![int(2), int(4), int(8)]);

    let h = ou_h2(&ou);
    let t = build_gamma_tower(&ou, &h, 2).unwrap();
    assert_eq!(t.eigenvalue, int(2));
    assert_eq!(*t.level(1), ou.monomial(vec![2], int(4)));
    let want = ou.from_terms([(vec![2], int(4)), (vec![0], int(4))]).unwrap();
    assert_eq!(*t.level(2), want);
    let cross = ou.add(&ou.hessian_sq(&h).unwrap(), &ou.gradient_sq(&h).unwrap()).unwrap();
    assert_eq!(*t.level(2), cross);
}

#[test]
fn tower_rejects_non_eigenfunction() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let f = ou.monomial(vec![2], int(1));
    assert!(matches!(
        build_gamma_tower(&ou, &f, 2),
        Err(ChaosError::NotEigenfunction(_))
    ));
    assert!(build_gamma_tower(&ou, &ou.variable(0).unwrap(), 0).is_err());
}

#[test]
fn q_of_gamma_examples() {
    let ou = OrnsteinUhlenbeck::new(2).unwrap();
    let f = ou.monomial(vec![1, 1], int(1));
    let q2 = q_of_gamma(&nat(), &ou, &f, 2).unwrap();
    assert_eq!(q2, ou.constant(int(2)));
    assert_eq!(q2, ou.derivative_tensor_sq(&f, 2).unwrap());
    assert!(q_of_gamma(&nat(), &ou, &f, 3).unwrap().is_zero());

    let cube = Cube::new(2).unwrap();
    let w = cube.walsh(&[0, 1]).unwrap();
    assert!(cube.is_zero(&q_of_gamma(&nat(), &cube, &w, 3).unwrap()));
}

#[test]
fn q_k_of_gamma_is_kth_derivative_norm_on_ou() {
    for seed in 0..5 {
        let spec = random_chaos(ModelTag::Ou, 3, 3, seed).unwrap();
        let Materialized::Ou(ou, f) = spec.materialize().unwrap() else { panic!() };
        let q3 = q_of_gamma(&nat(), &ou, &f, 3).unwrap();
        assert_eq!(q3, ou.derivative_tensor_sq(&f, 3).unwrap());
    }
}

#[test]
fn chaos_criterion() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let h = ou_h2(&ou);
    let r = is_chaos(&nat(), &ou, &h, 1).unwrap();
    assert!(r.failed());
    assert!(is_chaos(&nat(), &ou, &h, 2).unwrap().passed());
    let not_eigen = ou.monomial(vec![2], int(1));
    assert!(is_chaos(&nat(), &ou, &not_eigen, 2).unwrap().failed());

    let ou3 = OrnsteinUhlenbeck::new(3).unwrap();
    let coeffs = BTreeMap::from([
        (vec![3, 0, 0], ratio(1, 2)),
        (vec![1, 1, 1], int(-2)),
        (vec![0, 2, 1], int(3)),
    ]);
    let spec = ChaosSpec::hermite(3, 3, coeffs).unwrap();
    let f = spec.materialize_ou(&ou3).unwrap();
    let r = is_chaos(&nat(), &ou3, &f, 3).unwrap();
    assert!(r.passed(), "{r}");

    for seed in 0..5 {
        let spec = random_chaos(ModelTag::Cube, 6, 3, seed).unwrap();
        let Materialized::Cube(cube, f) = spec.materialize().unwrap() else { panic!() };
        assert!(is_chaos(&nat(), &cube, &f, 3).unwrap().passed());
    }
}

#[test]
fn q_k_constancy_matches_chaos_on_cube_and_ou() {
    let cube = Cube::new(4).unwrap();
    // Mixed-degree function: an eigenfunction only if the degrees agree.
    let a = cube.walsh(&[0, 1]).unwrap();
    let b = cube.walsh(&[2, 3]).unwrap();
    let f = cube.add(&a, &cube.scale(&b, &int(3)).unwrap()).unwrap();
    let analysis = analyze_chaos(&nat(), &cube, &f, 2, 3).unwrap();
    assert!(analysis.is_chaos());
    assert!(analysis.q_k_constant.is_some());
    assert!(analysis.derivative_relation);
}

#[test]
fn poisson_first_charlier_is_not_a_chaos() {
    let model = Poisson::with_truncation(int(1), 40).unwrap();
    let c1 = model.charlier(1).unwrap();
    let r = is_chaos(&nat(), &model, &c1, 1).unwrap();
    assert_eq!(r.lhs, int(1));
    assert!(r.failed());
    let analysis = analyze_chaos(&nat(), &model, &c1, 1, 2).unwrap();
    // Q_2(Gamma)(c_1) = (theta - j) / 4 = -c_1 / 4.
    let want = model.scale(&c1, &ratio(-1, 4)).unwrap();
    assert!(model.equal(&analysis.q_next, &want));
}

#[test]
fn gradient_exchange_guards_and_values() {
    let cube = Cube::new(3).unwrap();
    let f = cube.walsh(&[0, 2]).unwrap();
    assert!(verify_gradient_exchange(&cube, &f, 1, 0).is_err());
    assert!(verify_gradient_exchange(&cube, &f, 0, 1).is_err());
    for n in 1..=3 {
        for m in 1..=3 {
            assert!(verify_gradient_exchange(&cube, &f, n, m).unwrap().passed());
        }
    }
}

#[test]
fn gradient_exchange_on_poisson_within_tolerance() {
    let model = Poisson::new(ratio(1, 2)).unwrap();
    let c2 = model.charlier(2).unwrap();
    let r = verify_gradient_exchange(&model, &c2, 1, 2).unwrap();
    assert_eq!(r.kind, CheckKind::Tolerance);
    assert!(r.passed(), "{r}");
    // A tiny truncation pushes every integrand onto the boundary.
    let small = Poisson::with_truncation(int(3), 6).unwrap();
    let c2 = small.charlier(2).unwrap();
    let r = verify_gradient_exchange(&small, &c2, 2, 2).unwrap();
    assert_eq!(r.status, Status::Skip);
    assert!(r.note.starts_with("boundary-skip"), "{r}");
}

#[test]
fn chaos_identity_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    let r = verify_chaos_identity(&nat(), &ou, &x, 1).unwrap();
    assert!(r.passed());
    let red = verify_low_order_reduction(&nat(), &ou, &x, 1).unwrap();
    assert!(red.passed());

    let h = ou.scale(&ou_h2(&ou), &ratio(3, 7)).unwrap();
    assert!(verify_chaos_identity(&nat(), &ou, &h, 2).unwrap().passed());
    assert!(verify_low_order_reduction(&nat(), &ou, &h, 2).unwrap().passed());

    let spec = random_chaos(ModelTag::Cube, 8, 3, 42).unwrap();
    let Materialized::Cube(cube, f) = spec.materialize().unwrap() else { panic!() };
    let r = verify_chaos_identity(&nat(), &cube, &f, 3).unwrap();
    assert!(r.passed());
    assert!(matches!(
        verify_low_order_reduction(&nat(), &cube, &f, 3),
        Err(ChaosError::InvalidDegree(_))
    ));
    assert!(matches!(
        verify_chaos_identity(&nat(), &cube, &f, 2),
        Err(ChaosError::NotChaos(_))
    ));
}

#[test]
fn variance_bound_examples() {
    // h_2 = x^2 - 1 has norm^2 2; normalized values are these divided by 4.
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let r = verify_variance_bound(&nat(), &ou, &ou_h2(&ou), 2).unwrap();
    assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(32), int(64)));
    assert_eq!(r.lhs / int(4), int(8));
    assert_eq!(r.rhs / int(4), int(16));

    let cube = Cube::new(2).unwrap();
    let f = cube.walsh(&[0, 1]).unwrap();
    let r = verify_variance_bound(&nat(), &cube, &f, 2).unwrap();
    assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(0), int(0)));
    assert!(r.passed());

    let ou2 = OrnsteinUhlenbeck::new(2).unwrap();
    let f = ou2.monomial(vec![1, 1], int(1));
    let r = verify_variance_bound(&nat(), &ou2, &f, 2).unwrap();
    assert_eq!((r.lhs.clone(), r.rhs.clone(), r.residual.clone()), (int(4), int(8), int(4)));
}

#[test]
fn fourth_moment_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let reports = fourth_moment_form(&ou, &ou_h2(&ou), 2).unwrap();
    assert!(reports.iter().all(VerificationReport::passed));
    let bound = reports.iter().find(|r| r.identity == "fourth_moment_bound").unwrap();
    // int F^4 = 60 for x^2 - 1; normalized by c^2 = 4: 8 <= 4 (15/3 - 1) = 16.
    assert_eq!(bound.lhs, int(32));
    assert_eq!(bound.rhs, int(64));

    let x = ou.variable(0).unwrap();
    let reports = fourth_moment_form(&ou, &x, 1).unwrap();
    let bound = reports.iter().find(|r| r.identity == "fourth_moment_bound").unwrap();
    assert_eq!((bound.lhs.clone(), bound.rhs.clone()), (int(0), int(0)));

    let cube = Cube::new(2).unwrap();
    let err = fourth_moment_form(&cube, &cube.walsh(&[0]).unwrap(), 1).unwrap_err();
    assert!(err.to_string().contains("diffusion identity unavailable"));
}

#[test]
fn integral_of_q_k() {
    let spec = random_chaos(ModelTag::Cube, 5, 2, 9).unwrap();
    let Materialized::Cube(cube, f) = spec.materialize().unwrap() else { panic!() };
    let inst = ChaosInstance::new(&nat(), &cube, &f, 2, 3).unwrap();
    let r = inst.integral_of_q().unwrap();
    assert!(r.passed());
    // Q_2(l_2) = 2 (2 - 1) = 2 with int F^2 = 1.
    assert_eq!(r.rhs, int(2));
}

#[test]
fn spectral_constants_on_naturals() {
    for k in 1..=10 {
        for r in verify_spectral_constants(&nat(), k).unwrap() {
            assert!(r.passed(), "{r}");
        }
    }
    let s = Spectrum::explicit(vec![int(0), ratio(1, 2), ratio(3, 2), int(4)]).unwrap();
    for k in 1..=2 {
        assert!(verify_spectral_constants(&s, k).unwrap().iter().all(|r| r.passed()));
    }
}

#[test]
fn spectral_rows_use_comma_free_labels() {
    let s = Spectrum::explicit(vec![int(0), int(1), ratio(3, 2), int(2)]).unwrap();
    let rows = spectral_condition_reports(&s, 3, 10).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.csv_row().split(',').count(), 9);
        assert!(r.passed());
    }
}

#[test]
fn curvature_rigidity_examples() {
    let ou = OrnsteinUhlenbeck::new(3).unwrap();
    let f = ou
        .from_terms([
            (vec![1, 0, 0], int(2)),
            (vec![0, 1, 0], ratio(-1, 3)),
            (vec![0, 0, 1], int(5)),
        ])
        .unwrap();
    let r = ou.check_curvature_rigidity(&int(1), &f).unwrap();
    assert!(r.passed(), "{r}");
    assert!(r.note.contains("Gamma = 262/9"));

    let ou1 = OrnsteinUhlenbeck::new(1).unwrap();
    let x2 = ou1.monomial(vec![2], int(1));
    let r = ou1.check_curvature_rigidity(&int(1), &x2).unwrap();
    assert!(r.passed());
    assert_eq!(r.lhs, int(4));

    // Cube: recorded, not asserted.
    let cube = Cube::new(3).unwrap();
    let g = cube.from_fn(|x| int((x as i64 * 5 + 1) % 7 - 3));
    let r = cube.check_curvature_rigidity(&int(1), &g).unwrap();
    assert!(r.note.contains("min Gamma_2 - rho Gamma"));
}

#[test]
fn ou_chain_rule_holds() {
    let ou = OrnsteinUhlenbeck::new(2).unwrap();
    let f = ou.from_terms([(vec![1, 1], int(1)), (vec![2, 0], int(-1))]).unwrap();
    let g = ou.from_terms([(vec![0, 3], int(2)), (vec![1, 0], int(1))]).unwrap();
    let phi = RationalPoly::from_dense([int(1), int(-2), int(0), ratio(1, 3)]);
    let lhs = carre_du_champ(&ou, &ou.compose(&phi, &f).unwrap(), &g).unwrap();
    let dphi = ou.compose(&phi.derivative(), &f).unwrap();
    let rhs = ou.multiply(&dphi, &carre_du_champ(&ou, &f, &g).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn cube_is_not_a_diffusion() {
    // phi(x) = x^2, f = x_1: phi(f) = 1 so Gamma(phi(f), g) = 0, while
    // phi'(f) Gamma(f, g) = 2 x_1 Gamma(x_1, x_1) = 2 x_1.
    let cube = Cube::new(2).unwrap();
    let x1 = cube.coordinate(0).unwrap();
    let phi_f = cube.multiply(&x1, &x1).unwrap();
    let lhs = carre_du_champ(&cube, &phi_f, &x1).unwrap();
    let rhs = cube
        .multiply(&cube.scale(&x1, &int(2)).unwrap(), &carre_du_champ(&cube, &x1, &x1).unwrap())
        .unwrap();
    assert!(cube.is_zero(&lhs));
    assert_eq!(rhs, cube.scale(&x1, &int(2)).unwrap());
    assert!(!cube.equal(&lhs, &rhs));
}

#[test]
fn even_sign_route() {
    let spec = random_chaos(ModelTag::Cube, 5, 2, 3).unwrap();
    let Materialized::Cube(cube, f) = spec.materialize().unwrap() else { panic!() };
    let r = verify_even_sign_route(&nat(), &cube, &f, 2).unwrap();
    assert!(r.passed());
    assert!(verify_even_sign_route(&nat(), &cube, &f, 3).is_err());
}
