//! Stein-method distance bounds for eigenfunctions against the standard
//! normal and the gamma laws `g_p`, plus empirical Kolmogorov distances.
//!
//! For `-LF = l F` the normal bound reads
//! `|E phi(F) - E phi(Z)| <= (C/l) (int (Gamma - l)^2)^(1/2)`,
//! and the gamma bound replaces `l` inside the integral by `l (F + p)`.
//! `C = 1` for half-line indicators (Kolmogorov distance) and `C = 2` for
//! total variation.

pub(crate) mod distance;

use num_traits::{One, Signed, Zero};

pub use distance::{
    dkw_error, estimate_distance, gamma_cdf, kolmogorov_from_atoms, kolmogorov_from_samples,
    kolmogorov_from_weighted, monte_carlo, normal_cdf, DistanceSource, EmpiricalDistance, Estimator, Method, Target, DKW_DELTA,
    MAX_EXACT_CUBE_DIM,
};

use crate::error::{ChaosError, Result};
use crate::gamma_calculus::{
    apply_poly_half_l, carre_du_champ, eigenvalue_of, spectrum_value, ChaosInstance,
    VerificationReport, DEFAULT_SPECTRAL_RANGE,
};
use crate::markov_models::{Integral, MarkovModel};
use crate::rational::{fmt_rational, int, ratio, to_f64, Rational};
use crate::spectrum_polys::{build_r, build_t, check_spectral_condition, pi_k, Spectrum};

/// Kolmogorov constant for half-line indicators.
pub const KOLMOGOROV_CONSTANT: f64 = 1.0;
/// Total-variation constant.
pub const TOTAL_VARIATION_CONSTANT: f64 = 2.0;

fn sqrt_f64(r: &Rational) -> f64 {
    to_f64(r).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinNormalBound {
    pub eigenvalue: Rational,
    /// `int F^2`.
    pub norm_sq: Integral,
    /// `int (Gamma - l)^2`.
    pub variance_term: Integral,
    /// `Var Gamma`; agrees with `variance_term` when `int F^2 = 1`.
    pub var_gamma: Integral,
    pub kolmogorov: f64,
    pub total_variation: f64,
}

impl SteinNormalBound {
    /// Assembles a bound from exact ingredients.
    pub fn from_parts(
        eigenvalue: Rational,
        norm_sq: Integral,
        variance_term: Integral,
        var_gamma: Integral,
    ) -> Result<Self> {
        if !eigenvalue.is_positive() {
            return Err(ChaosError::InvalidParameter(format!(
                "normal bound needs a positive eigenvalue, got {}",
                fmt_rational(&eigenvalue)
            )));
        }
        let kolmogorov = KOLMOGOROV_CONSTANT * sqrt_f64(&variance_term.value) / to_f64(&eigenvalue);
        Ok(Self {
            total_variation: TOTAL_VARIATION_CONSTANT / KOLMOGOROV_CONSTANT * kolmogorov,
            kolmogorov,
            eigenvalue,
            norm_sq,
            variance_term,
            var_gamma,
        })
    }

    /// `sqrt(Var Gamma) / l`, which scales like `c^2` under `F -> cF`.
    pub fn spread(&self) -> f64 {
        sqrt_f64(&self.var_gamma.value) / to_f64(&self.eigenvalue)
    }

    /// Kolmogorov bound for `F / ||F||`: `sqrt(Var Gamma) / (l int F^2)`.
    pub fn normalized_kolmogorov(&self) -> f64 {
        self.spread() / to_f64(&self.norm_sq.value)
    }
}

fn require_eigenvalue<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<Rational> {
    let target = spectrum_value(spectrum, k)?;
    let found = eigenvalue_of(model, f)?;
    if found != target {
        return Err(ChaosError::NotEigenfunction(format!(
            " with eigenvalue l_{k} = {} (found {})",
            fmt_rational(&target),
            fmt_rational(&found)
        )));
    }
    if target.is_zero() {
        return Err(ChaosError::InvalidDegree("eigenvalue 0 gives no Stein bound".into()));
    }
    Ok(target)
}

fn var_of<M: MarkovModel>(model: &M, g: &M::Function) -> Result<Integral> {
    let g2 = model.integrate(&model.multiply(g, g)?)?;
    let g1 = model.integrate(g)?;
    Ok(g2.minus(&g1.times(&g1)))
}

/// Normal Stein bound for an eigenfunction at `l_k`.
pub fn normal_bound<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<SteinNormalBound> {
    let lambda = require_eigenvalue(spectrum, model, f, k)?;
    let gamma = carre_du_champ(model, f, f)?;
    let shifted = model.linear_combination(&[(Rational::one(), &gamma), (-lambda.clone(), &model.constant(Rational::one()))])?;
    let variance_term = model.integrate(&model.multiply(&shifted, &shifted)?)?;
    let norm_sq = model.integrate(&model.multiply(f, f)?)?;
    SteinNormalBound::from_parts(lambda, norm_sq, variance_term, var_of(model, &gamma)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinGammaBound {
    pub p: Rational,
    pub eigenvalue: Rational,
    pub norm_sq: Integral,
    /// `int (Gamma - l (F + p))^2`.
    pub discrepancy: Integral,
    /// `Var(Gamma - l F)`, reported when `int F^2 = p`.
    pub var_u: Option<Integral>,
    pub kolmogorov: f64,
    pub total_variation: f64,
}

/// Gamma Stein bound for `F + p` against `g_p`.
pub fn gamma_bound<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
    p: &Rational,
) -> Result<SteinGammaBound> {
    if !p.is_positive() {
        return Err(ChaosError::InvalidParameter(format!(
            "gamma target needs p > 0, got {}",
            fmt_rational(p)
        )));
    }
    let lambda = require_eigenvalue(spectrum, model, f, k)?;
    let gamma = carre_du_champ(model, f, f)?;
    let one = model.constant(Rational::one());
    let u = model.linear_combination(&[(Rational::one(), &gamma), (-lambda.clone(), f)])?;
    let shifted = model.linear_combination(&[(Rational::one(), &u), (-(&lambda * p), &one)])?;
    let discrepancy = model.integrate(&model.multiply(&shifted, &shifted)?)?;
    let norm_sq = model.integrate(&model.multiply(f, f)?)?;
    let var_u = if norm_sq.value == *p {
        let var_u = var_of(model, &u)?;
        if discrepancy.is_exact() && var_u.is_exact() && var_u.value != discrepancy.value {
            return Err(ChaosError::InternalInvariant(
                "gamma discrepancy differs from Var(Gamma - l F) at int F^2 = p".into(),
            ));
        }
        Some(var_u)
    } else {
        None
    };
    let kolmogorov = KOLMOGOROV_CONSTANT * sqrt_f64(&discrepancy.value) / to_f64(&lambda);
    Ok(SteinGammaBound {
        p: p.clone(),
        eigenvalue: lambda,
        norm_sq,
        discrepancy,
        var_u,
        total_variation: TOTAL_VARIATION_CONSTANT / KOLMOGOROV_CONSTANT * kolmogorov,
        kolmogorov,
    })
}

/// `(A_k, B_k)` with `A_k = 2 (-1)^k l_k R_{k+1}(l_k/2) / pi_{k-1}` and
/// `B_k = (-1)^k l_k^2 R_{k+1}(l_k/2) / pi_{k-1}`.
pub fn gamma_variance_constants(spectrum: &Spectrum, k: usize) -> Result<(Rational, Rational)> {
    if k == 0 {
        return Err(ChaosError::InvalidDegree("gamma variance bound needs k >= 1".into()));
    }
    let lambda = spectrum_value(spectrum, k)?;
    let r_half = build_r(spectrum, k)?.eval(&(&lambda / int(2)));
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
    let pi = pi_k(spectrum, k - 1)?;
    let a = int(2) * &sign * &lambda * &r_half / &pi;
    let b = &sign * &lambda * &lambda * &r_half / &pi;
    Ok((a, b))
}

fn require_norm<M: MarkovModel>(inst: &ChaosInstance<'_, M>, p: &Rational) -> Result<()> {
    if !p.is_positive() {
        return Err(ChaosError::InvalidParameter(format!(
            "gamma target needs p > 0, got {}",
            fmt_rational(p)
        )));
    }
    if inst.norm_sq.value != *p {
        return Err(ChaosError::InvalidParameter(format!(
            "int F^2 = {} but p = {}",
            fmt_rational(&inst.norm_sq.value),
            fmt_rational(p)
        )));
    }
    Ok(())
}

/// Gamma variance inequality for a `k`-chaos with `int F^2 = p`:
/// `Var(Gamma - l F) <= l int F^2 Gamma + A int F Gamma - p B - p^2 l^2`.
///
/// Returns the inequality and, as a second report, the exact identity it
/// comes from,
/// `(-1)^k int U T_{k+1}(L/2) U - pi_{k-1} Var U + pi_k int F^2 Gamma
///  + pi_{k-1} (A int F Gamma - p B - p^2 l^2) = 0` with `U = Gamma - l F`.
pub fn verify_gamma_variance_bound<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
    p: &Rational,
) -> Result<Vec<VerificationReport>> {
    let inst = ChaosInstance::new(spectrum, model, f, k, k + 1)?;
    require_norm(&inst, p)?;
    let l = &inst.lambda;
    let (a, b) = gamma_variance_constants(spectrum, k)?;
    let u = model.linear_combination(&[(Rational::one(), inst.gamma()), (-l.clone(), f)])?;
    let var_u = var_of(model, &u)?;
    let f2g = inst.f2_gamma()?;
    let fg = inst.f_gamma()?;
    let tail = Integral::exact(-(p * &b) - p * p * l * l);
    let rhs = f2g.scale(l).plus(&fg.scale(&a)).plus(&tail);

    let cond = check_spectral_condition(spectrum, k, DEFAULT_SPECTRAL_RANGE)?;
    let ctx = |r: VerificationReport| r.with_context(model.tag(), model.dimension(), k);
    let bound = VerificationReport::integral_inequality("gamma_variance_bound", &var_u, &rhs);
    let bound = if cond.holds() {
        bound.with_note(format!(
            "p = {}; spectral condition checked for n <= {}",
            fmt_rational(p),
            cond.checked_up_to
        ))
    } else {
        bound.skipped(format!(
            "spectral condition fails at n = {}",
            cond.violations[0].0
        ))
    };

    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
    let t = build_t(spectrum, k)?;
    let t_u = apply_poly_half_l(model, &t, &u)?;
    let form = model.integrate(&model.multiply(&u, &t_u)?)?.scale(&sign);
    let pi_prev = pi_k(spectrum, k - 1)?;
    let pi_cur = pi_k(spectrum, k)?;
    let lhs = form
        .minus(&var_u.scale(&pi_prev))
        .plus(&f2g.scale(&pi_cur))
        .plus(&fg.scale(&a).plus(&tail).scale(&pi_prev));
    let identity =
        VerificationReport::integral_equality("gamma_variance_identity", &lhs, &Integral::exact(Rational::zero()));
    Ok(vec![ctx(bound), ctx(identity)])
}

/// The even-`k` diffusion form
/// `(3/k^2) Var(Gamma - l_k F) <= int F^4 - 6 int F^3 + 6p - 3p^2`
/// on the natural spectrum, together with the two diffusion moment
/// identities it rests on.
pub fn verify_gamma_fourth_moment<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    k: usize,
    p: &Rational,
) -> Result<Vec<VerificationReport>> {
    if k == 0 || k % 2 == 1 {
        return Err(ChaosError::InvalidDegree(format!(
            "gamma fourth-moment form needs even k >= 2 (got {k})"
        )));
    }
    if !model.is_diffusion() {
        return Err(ChaosError::NonDiffusion(model.tag().to_string()));
    }
    let spectrum = Spectrum::Naturals;
    let inst = ChaosInstance::new(&spectrum, model, f, k, k + 1)?;
    require_norm(&inst, p)?;
    let l = &inst.lambda;
    let f4 = inst.moment(4)?;
    let f3 = inst.moment(3)?;
    let u = model.linear_combination(&[(Rational::one(), inst.gamma()), (-l.clone(), f)])?;
    let lhs = var_of(model, &u)?.scale(&ratio(3, (k * k) as i64));
    let rhs = f4
        .minus(&f3.scale(&int(6)))
        .plus(&Integral::exact(int(6) * p - int(3) * p * p));
    let ctx = |r: VerificationReport| r.with_context(model.tag(), model.dimension(), k);
    let mut reports: Vec<VerificationReport> = inst
        .fourth_moment_form()?
        .into_iter()
        .filter(|r| r.identity.starts_with("diffusion_"))
        .collect();
    reports.push(ctx(
        VerificationReport::integral_inequality("gamma_fourth_moment_bound", &lhs, &rhs)
            .with_note(format!("p = {}", fmt_rational(p))),
    ));
    Ok(reports)
}

#[cfg(test)]
mod tests;
