//! Curvature-dimension checks `Gamma_2(f) >= rho Gamma(f)`.

use num_traits::{One, Signed};

use super::{eigenvalue_of, IteratedGradients, VerificationReport};
use crate::error::Result;
use crate::markov_models::{Cube, MarkovModel, OrnsteinUhlenbeck, Poisson};
use crate::rational::{fmt_rational, Rational};

pub trait CurvatureRigidity: MarkovModel {
    /// Examines `Gamma_2(f) - rho Gamma(f)`. When `f` is an eigenfunction
    /// with eigenvalue `rho`, also requires `Gamma(f)` to be constant.
    fn check_curvature_rigidity(
        &self,
        rho: &Rational,
        f: &Self::Function,
    ) -> Result<VerificationReport>;
}

fn gap<M: MarkovModel>(model: &M, rho: &Rational, f: &M::Function) -> Result<(M::Function, M::Function)> {
    let mut it = IteratedGradients::new(model, f, None)?;
    let gamma = it.gamma(1)?;
    let gamma2 = it.gamma(2)?;
    let diff = model.linear_combination(&[(Rational::one(), &gamma2), (-rho.clone(), &gamma)])?;
    Ok((diff, gamma))
}

fn rigidity_note<M: MarkovModel>(
    model: &M,
    rho: &Rational,
    f: &M::Function,
    gamma: &M::Function,
) -> Option<(bool, String)> {
    match eigenvalue_of(model, f) {
        Ok(l) if l == *rho => {
            let constant = model.constant_value(gamma);
            let note = match &constant {
                Some(c) => format!("eigenvalue rho; Gamma = {}", fmt_rational(c)),
                None => "eigenvalue rho; Gamma not constant".to_string(),
            };
            Some((constant.is_some(), note))
        }
        _ => None,
    }
}

/// Pointwise version for models with a finite represented state space.
fn pointwise<M: MarkovModel>(
    model: &M,
    rho: &Rational,
    f: &M::Function,
) -> Result<VerificationReport> {
    let (diff, gamma) = gap(model, rho, f)?;
    let min = model
        .pointwise_min(&diff)
        .expect("finite state space has a minimum");
    let mut report = VerificationReport::inequality("curvature_rigidity", Rational::from_integer(0.into()), min.clone())
        .with_context(model.tag(), model.dimension(), 0)
        .with_note(format!(
            "rho = {}; min Gamma_2 - rho Gamma = {}",
            fmt_rational(rho),
            fmt_rational(&min)
        ));
    if let Some((constant, note)) = rigidity_note(model, rho, f, &gamma) {
        report.note = format!("{}; {note}", report.note);
        // Rigidity is only claimed under the curvature condition.
        if !min.is_negative() {
            report = report.require(constant, "Gamma should be constant");
        }
    }
    Ok(report)
}

impl CurvatureRigidity for Cube {
    fn check_curvature_rigidity(&self, rho: &Rational, f: &Self::Function) -> Result<VerificationReport> {
        pointwise(self, rho, f)
    }
}

impl CurvatureRigidity for Poisson {
    fn check_curvature_rigidity(&self, rho: &Rational, f: &Self::Function) -> Result<VerificationReport> {
        pointwise(self, rho, f)
    }
}

impl CurvatureRigidity for OrnsteinUhlenbeck {
    /// `Gamma_2(f) - rho Gamma(f) = |Hess f|^2 + (1 - rho) |grad f|^2`
    /// exactly; both summands are sums of squares, so the difference is
    /// nonnegative whenever `rho <= 1`.
    fn check_curvature_rigidity(&self, rho: &Rational, f: &Self::Function) -> Result<VerificationReport> {
        let (diff, gamma) = gap(self, rho, f)?;
        let hess = self.hessian_sq(f)?;
        let grad = self.gradient_sq(f)?;
        let sos = self.linear_combination(&[
            (Rational::one(), &hess),
            (Rational::one() - rho, &grad),
        ])?;
        let lhs = self.integrate(&diff)?.value;
        let rhs = self.integrate(&sos)?.value;
        let mut report = VerificationReport::exact("curvature_rigidity", lhs, rhs)
            .with_context(self.tag(), self.dimension(), 0)
            .require(self.equal(&diff, &sos), "Gamma_2 - rho Gamma differs from the square form")
            .require(self.equal(&gamma, &grad), "Gamma differs from |grad f|^2")
            .with_note(format!("rho = {}", fmt_rational(rho)));
        if *rho > Rational::one() {
            report = report.with_note(format!(
                "rho = {} exceeds the curvature 1; nonnegativity not structural",
                fmt_rational(rho)
            ));
        }
        if let Some((constant, note)) = rigidity_note(self, rho, f, &gamma) {
            report.note = format!("{}; {note}", report.note);
            if *rho <= Rational::one() {
                report = report.require(constant, "Gamma should be constant");
            }
        }
        Ok(report)
    }
}
