use super::*;
use crate::gamma_calculus::CheckKind;
use crate::markov_models::{random_chaos, Cube, Materialized, ModelTag, OrnsteinUhlenbeck};
use crate::rational::{int, ratio};

fn nat() -> Spectrum {
    Spectrum::Naturals
}

fn h2(ou: &OrnsteinUhlenbeck, c: Rational) -> crate::markov_models::PolyFunction {
    ou.from_terms([(vec![2], c.clone()), (vec![0], -c)]).unwrap()
}

#[test]
fn normal_bound_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let b = normal_bound(&nat(), &ou, &ou.variable(0).unwrap(), 1).unwrap();
    assert_eq!(b.variance_term.value, int(0));
    assert_eq!(b.kolmogorov, 0.0);

    // h_2 = x^2 - 1 with norm^2 2: Var Gamma = 32, normalized 8.
    let b = normal_bound(&nat(), &ou, &h2(&ou, int(1)), 2).unwrap();
    assert_eq!(b.var_gamma.value, int(32));
    assert_eq!(b.norm_sq.value, int(2));
    assert!((b.normalized_kolmogorov() - 8f64.sqrt() / 2.0).abs() < 1e-15);
    assert_eq!(b.total_variation, 2.0 * b.kolmogorov);

    // Two pairs: normalized Var Gamma = 4/m = 2, bound 1/sqrt(2).
    let ou4 = OrnsteinUhlenbeck::new(4).unwrap();
    let g = ou4
        .from_terms([(vec![1, 1, 0, 0], int(1)), (vec![0, 0, 1, 1], int(1))])
        .unwrap();
    let b = normal_bound(&nat(), &ou4, &g, 2).unwrap();
    assert_eq!(&b.var_gamma.value / (&b.norm_sq.value * &b.norm_sq.value), int(2));
    assert!((b.normalized_kolmogorov() - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn normal_bound_errors() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x2 = ou.monomial(vec![2], int(1));
    assert!(matches!(
        normal_bound(&nat(), &ou, &x2, 2),
        Err(ChaosError::NotEigenfunction(_))
    ));
    assert!(normal_bound(&nat(), &ou, &ou.variable(0).unwrap(), 2).is_err());
}

#[test]
fn gamma_bound_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let f = h2(&ou, ratio(1, 2));
    let b = gamma_bound(&nat(), &ou, &f, 2, &ratio(1, 2)).unwrap();
    assert_eq!(b.discrepancy.value, int(0));
    assert_eq!(b.var_u.unwrap().value, int(0));
    assert_eq!(b.kolmogorov, 0.0);

    let x = ou.variable(0).unwrap();
    let b = gamma_bound(&nat(), &ou, &x, 1, &int(1)).unwrap();
    assert_eq!(b.discrepancy.value, int(1));
    assert_eq!(b.kolmogorov, 1.0);
    assert_eq!(b.var_u.unwrap().value, int(1));

    let b = gamma_bound(&nat(), &ou, &x, 1, &int(3)).unwrap();
    assert!(b.var_u.is_none());
    // int (1 - x - 3)^2 = 4 + 1.
    assert_eq!(b.discrepancy.value, int(5));

    assert!(gamma_bound(&nat(), &ou, &x, 1, &int(0)).is_err());
    assert!(gamma_bound(&nat(), &ou, &x, 1, &int(-1)).is_err());
}

#[test]
fn gamma_constants_on_naturals() {
    assert_eq!(gamma_variance_constants(&nat(), 2).unwrap(), (int(-8), int(-8)));
    assert!(gamma_variance_constants(&nat(), 0).is_err());
}

#[test]
fn gamma_variance_bound_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let f = h2(&ou, ratio(1, 2));
    let reports = verify_gamma_variance_bound(&nat(), &ou, &f, 2, &ratio(1, 2)).unwrap();
    assert!(reports.iter().all(VerificationReport::passed), "{reports:?}");
    assert_eq!((reports[0].lhs.clone(), reports[0].rhs.clone()), (int(0), int(0)));

    let cube = Cube::new(2).unwrap();
    let g = cube.walsh(&[0, 1]).unwrap();
    let reports = verify_gamma_variance_bound(&nat(), &cube, &g, 2, &int(1)).unwrap();
    assert!(reports.iter().all(VerificationReport::passed));
    assert_eq!((reports[0].lhs.clone(), reports[0].rhs.clone()), (int(4), int(8)));

    // Rescaling h_2 so that int F^2 = 1 changes every term consistently.
    let scaled = h2(&ou, ratio(1, 1));
    let err = verify_gamma_variance_bound(&nat(), &ou, &scaled, 2, &int(1)).unwrap_err();
    assert!(matches!(err, ChaosError::InvalidParameter(_)));
    let reports = verify_gamma_variance_bound(&nat(), &ou, &scaled, 2, &int(2)).unwrap();
    assert!(reports.iter().all(VerificationReport::passed));
}

#[test]
fn gamma_variance_identity_on_random_chaos() {
    for (model, n, k) in [(ModelTag::Cube, 6, 1), (ModelTag::Cube, 6, 3), (ModelTag::Ou, 3, 3)] {
        for seed in 0..4 {
            let spec = random_chaos(model, n, k, seed).unwrap();
            let reports = match spec.materialize().unwrap() {
                Materialized::Cube(m, f) => verify_gamma_variance_bound(&nat(), &m, &f, k, &int(1)),
                Materialized::Ou(m, f) => verify_gamma_variance_bound(&nat(), &m, &f, k, &int(1)),
                Materialized::Poisson(..) => unreachable!(),
            }
            .unwrap();
            for r in reports {
                assert!(r.passed(), "{r}");
            }
        }
    }
}

#[test]
fn gamma_fourth_moment_examples() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let reports = verify_gamma_fourth_moment(&ou, &h2(&ou, int(1)), 2, &int(2)).unwrap();
    assert!(reports.iter().all(VerificationReport::passed));
    let bound = reports.last().unwrap();
    assert_eq!((bound.lhs.clone(), bound.rhs.clone()), (int(6), int(12)));
    assert_eq!(reports.len(), 3);

    for d in 1..=5usize {
        let ou = OrnsteinUhlenbeck::new(d).unwrap();
        let mut terms = vec![(vec![0; d], int(-(d as i64)))];
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 2;
            terms.push((e, int(1)));
        }
        let f = ou.from_terms(terms).unwrap();
        let p = int(2 * d as i64);
        let reports = verify_gamma_fourth_moment(&ou, &f, 2, &p).unwrap();
        let bound = reports.last().unwrap();
        assert_eq!(bound.lhs, int(6 * d as i64));
        assert_eq!(bound.rhs, int(12 * d as i64));
        assert!(reports.iter().all(|r| r.passed() && (r.kind != CheckKind::Exact || r.residual.is_zero())));
    }
}

#[test]
fn gamma_fourth_moment_guards() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    assert!(matches!(
        verify_gamma_fourth_moment(&ou, &x, 1, &int(1)),
        Err(ChaosError::InvalidDegree(_))
    ));
    let cube = Cube::new(2).unwrap();
    assert!(matches!(
        verify_gamma_fourth_moment(&cube, &cube.walsh(&[0, 1]).unwrap(), 2, &int(1)),
        Err(ChaosError::NonDiffusion(_))
    ));
}

#[test]
fn scaling_contract() {
    let spec = random_chaos(ModelTag::Cube, 6, 2, 11).unwrap();
    let Materialized::Cube(cube, f) = spec.materialize().unwrap() else { panic!() };
    let c = ratio(3, 2);
    let base = normal_bound(&nat(), &cube, &f, 2).unwrap();
    let scaled = normal_bound(&nat(), &cube, &cube.scale(&f, &c).unwrap(), 2).unwrap();
    let c4 = &c * &c * &c * &c;
    assert_eq!(scaled.var_gamma.value, &base.var_gamma.value * c4);
    assert!((scaled.spread() - 2.25 * base.spread()).abs() < 1e-12);
}

#[test]
fn cdf_values() {
    let v = normal_cdf(1.0);
    assert!((v - 0.841_344_746_068_542_9).abs() < 1e-15, "{v:e} {:e}", v - 0.841_344_746_068_542_9);
    assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    assert_eq!(normal_cdf(0.0), 0.5);
    for x in [0.1, 1.0, 4.0] {
        assert!((gamma_cdf(1.0, x) - (1.0 - f64::exp(-x))).abs() < 1e-14);
        assert!((gamma_cdf(0.5, x) - libm::erf(x.sqrt())).abs() < 1e-14);
    }
    assert_eq!(gamma_cdf(0.5, -1.0), 0.0);
}

#[test]
fn kolmogorov_helpers() {
    let mut s = vec![0.0];
    assert_eq!(kolmogorov_from_samples(&mut s, Target::Normal), 0.5);
    let mut s = vec![3.0, -3.0];
    let d = kolmogorov_from_samples(&mut s, Target::Normal);
    assert!((d - (0.5 - normal_cdf(-3.0))).abs() < 1e-15);
    assert!((dkw_error(1_000_000) - (40f64.ln() / 2e6).sqrt()).abs() < 1e-18);
}

#[test]
fn two_point_distance_is_exact() {
    let cube = Cube::new(3).unwrap();
    let x1 = cube.coordinate(0).unwrap();
    let d = estimate_distance(&cube, &x1, &int(0), Target::Normal, Method::Exact, 0, 0).unwrap();
    assert!((d.estimate - (normal_cdf(1.0) - 0.5)).abs() < 1e-12);
    assert!((d.estimate - 0.341_344_746_068_542_9).abs() < 1e-12);
    assert_eq!(d.standard_error, 0.0);
    assert_eq!(d.estimator, Estimator::ExactEnumeration);
}

#[test]
fn monte_carlo_distances() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    let n = 200_000;
    let d = estimate_distance(&ou, &x, &int(0), Target::Normal, Method::MonteCarlo, n, 5).unwrap();
    assert!(d.estimate < 2.0 * d.standard_error, "{d:?}");

    let f = h2(&ou, ratio(1, 2));
    let d = estimate_distance(&ou, &f, &ratio(1, 2), Target::Gamma(0.5), Method::MonteCarlo, n, 6)
        .unwrap();
    assert!(d.estimate < 2.0 * d.standard_error, "{d:?}");
    // Against the wrong target the distance is visible.
    let d = estimate_distance(&ou, &f, &ratio(1, 2), Target::Gamma(1.0), Method::MonteCarlo, n, 6)
        .unwrap();
    assert!(d.estimate > 0.1);
}

#[test]
fn distance_errors() {
    let ou = OrnsteinUhlenbeck::new(1).unwrap();
    let x = ou.variable(0).unwrap();
    let zero = int(0);
    assert!(estimate_distance(&ou, &x, &zero, Target::Normal, Method::MonteCarlo, 0, 1).is_err());
    assert!(estimate_distance(&ou, &x, &zero, Target::Normal, Method::Exact, 10, 1).is_err());
    assert!(estimate_distance(&ou, &x, &zero, Target::Gamma(0.0), Method::MonteCarlo, 10, 1).is_err());
}

#[test]
fn monte_carlo_is_deterministic() {
    let cube = Cube::new(4).unwrap();
    let f = cube.walsh(&[0, 1, 2]).unwrap();
    let run = || estimate_distance(&cube, &f, &int(0), Target::Normal, Method::MonteCarlo, 100_000, 3).unwrap();
    let a = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(run);
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    // The sampled two-point law sits near the exact value.
    let exact = estimate_distance(&cube, &f, &int(0), Target::Normal, Method::Exact, 0, 0).unwrap();
    assert!((a.estimate - exact.estimate).abs() < 3.0 * a.standard_error);
}
