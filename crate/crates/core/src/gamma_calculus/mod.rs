//! Carré du champ, iterated gradients and the chaos identities built on
//! them, written once against [`MarkovModel`].
//!
//! `Gamma_0(f, g) = f g` and
//! `Gamma_m(f, g) = 1/2 [L Gamma_{m-1}(f, g) - Gamma_{m-1}(f, Lg) - Gamma_{m-1}(g, Lf)]`.
//! For an eigenfunction `-LF = lambda F` the hierarchy collapses to
//! `Gamma_m = (L/2 + lambda)^{m-1} Gamma`; towers are built both ways and
//! compared exactly.

mod curvature;
mod operator;
mod report;

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

pub use curvature::CurvatureRigidity;
pub use operator::{cube_operator_polynomial, verify_spectral_positivity, PositivityComparison};
pub use report::{CheckKind, Status, VerificationReport, CSV_HEADER};

use crate::error::{ChaosError, Result};
use crate::markov_models::{Integral, MarkovModel};
use crate::rational::{fmt_rational, int, ratio, Rational};
use crate::spectrum_polys::{
    build_q, build_r, build_t, check_spectral_condition, pi_k, RationalPoly, Spectrum,
};

/// Eigenvalues checked by bound verifications on rule spectra.
pub const DEFAULT_SPECTRAL_RANGE: usize = 200;

fn half() -> Rational {
    ratio(1, 2)
}

fn sign(k: usize) -> Rational {
    if k.is_multiple_of(2) {
        int(1)
    } else {
        int(-1)
    }
}

/// `Gamma(f, g) = 1/2 [L(fg) - f Lg - g Lf]`.
pub fn carre_du_champ<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    g: &M::Function,
) -> Result<M::Function> {
    let lfg = model.apply_l(&model.multiply(f, g)?)?;
    let f_lg = model.multiply(f, &model.apply_l(g)?)?;
    let g_lf = model.multiply(g, &model.apply_l(f)?)?;
    let h = half();
    model.linear_combination(&[(h.clone(), &lfg), (-h.clone(), &f_lg), (-h, &g_lf)])
}

/// Memoized raw recursion for `Gamma_m(L^a f, L^b g)`.
///
/// `Gamma_m(L^a f, L^b g) = 1/2 [L Gamma_{m-1}(a, b) - Gamma_{m-1}(a, b+1) - Gamma_{m-1}(a+1, b)]`,
/// so every level reuses the previous one instead of expanding the bracket
/// from scratch.
pub struct IteratedGradients<'a, M: MarkovModel> {
    model: &'a M,
    f_powers: Vec<M::Function>,
    /// `None` when `g = f`, in which case states are symmetric in `(a, b)`.
    g_powers: Option<Vec<M::Function>>,
    memo: HashMap<(usize, usize, usize), M::Function>,
}

impl<'a, M: MarkovModel> IteratedGradients<'a, M> {
    pub fn new(model: &'a M, f: &M::Function, g: Option<&M::Function>) -> Result<Self> {
        model.check(f)?;
        if let Some(g) = g {
            model.check(g)?;
        }
        Ok(Self {
            model,
            f_powers: vec![f.clone()],
            g_powers: g.map(|g| vec![g.clone()]),
            memo: HashMap::new(),
        })
    }

    fn power(&mut self, of_g: bool, a: usize) -> Result<M::Function> {
        let powers = match (&mut self.g_powers, of_g) {
            (Some(g), true) => g,
            _ => &mut self.f_powers,
        };
        while powers.len() <= a {
            let next = self.model.apply_l(powers.last().expect("nonempty"))?;
            powers.push(next);
        }
        Ok(powers[a].clone())
    }

    pub fn state(&mut self, m: usize, a: usize, b: usize) -> Result<M::Function> {
        let key = if self.g_powers.is_none() && b < a {
            (m, b, a)
        } else {
            (m, a, b)
        };
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let (m, a, b) = key;
        let value = if m == 0 {
            let fa = self.power(false, a)?;
            let gb = self.power(true, b)?;
            self.model.multiply(&fa, &gb)?
        } else {
            let base = self.state(m - 1, a, b)?;
            let l_base = self.model.apply_l(&base)?;
            let right = self.state(m - 1, a, b + 1)?;
            let left = self.state(m - 1, a + 1, b)?;
            let h = half();
            self.model.linear_combination(&[
                (h.clone(), &l_base),
                (-h.clone(), &right),
                (-h, &left),
            ])?
        };
        self.memo.insert(key, value.clone());
        Ok(value)
    }

    pub fn gamma(&mut self, m: usize) -> Result<M::Function> {
        self.state(m, 0, 0)
    }
}

/// `Gamma_m(f, g)` by the raw recursion; `m = 0` gives `f g`.
pub fn iterated_gradient<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    g: &M::Function,
    m: usize,
) -> Result<M::Function> {
    IteratedGradients::new(model, f, Some(g))?.gamma(m)
}

/// `lambda` with `-L f = lambda f`.
pub fn eigenvalue_of<M: MarkovModel>(model: &M, f: &M::Function) -> Result<Rational> {
    if model.is_zero(f) {
        return Err(ChaosError::NotEigenfunction(" (zero function)".into()));
    }
    let lf = model.apply_l(f)?;
    if model.is_zero(&lf) {
        return Ok(Rational::zero());
    }
    model
        .proportionality(&lf, f)
        .map(|c| -c)
        .ok_or_else(|| ChaosError::NotEigenfunction(String::new()))
}

/// `p(L/2) f` by Horner's scheme in the operator.
pub fn apply_poly_half_l<M: MarkovModel>(
    model: &M,
    p: &RationalPoly,
    f: &M::Function,
) -> Result<M::Function> {
    let dense = p.dense();
    let mut acc = model.scale(f, &Rational::zero())?;
    for c in dense.iter().rev() {
        let l_acc = model.apply_l(&acc)?;
        acc = model.linear_combination(&[(half(), &l_acc), (c.clone(), f)])?;
    }
    Ok(acc)
}

/// `[F^2, Gamma_1, ..., Gamma_m]` for an eigenfunction `F`.
#[derive(Clone, Debug)]
pub struct GammaTower<F> {
    pub function: F,
    pub eigenvalue: Rational,
    levels: Vec<F>,
}

impl<F> GammaTower<F> {
    /// `Gamma_m(F)`; `m = 0` is `F^2`.
    pub fn level(&self, m: usize) -> &F {
        &self.levels[m]
    }

    /// Highest level available.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `[Gamma_1, ..., Gamma_m]`.
    pub fn gradients(&self) -> &[F] {
        &self.levels[1..]
    }
}

/// Builds `Gamma_1..Gamma_{m_max}` by the eigenfunction shortcut and by the
/// raw recursion, failing hard if they ever disagree.
pub fn build_gamma_tower<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    m_max: usize,
) -> Result<GammaTower<M::Function>> {
    if m_max == 0 {
        return Err(ChaosError::InvalidParameter("tower depth must be at least 1".into()));
    }
    let lambda = eigenvalue_of(model, f)?;
    let mut raw = IteratedGradients::new(model, f, None)?;
    let mut levels = vec![raw.gamma(0)?];
    let gamma = carre_du_champ(model, f, f)?;
    if !model.equal(&gamma, &raw.gamma(1)?) {
        return Err(ChaosError::InternalInvariant(
            "carre du champ disagrees with the first iterated gradient".into(),
        ));
    }
    levels.push(gamma);
    for m in 2..=m_max {
        let prev = &levels[m - 1];
        let l_prev = model.apply_l(prev)?;
        let shortcut = model.linear_combination(&[(half(), &l_prev), (lambda.clone(), prev)])?;
        if !model.equal(&shortcut, &raw.gamma(m)?) {
            return Err(ChaosError::InternalInvariant(format!(
                "eigenfunction shortcut and raw recursion disagree at level {m}"
            )));
        }
        levels.push(shortcut);
    }
    Ok(GammaTower {
        function: f.clone(),
        eigenvalue: lambda,
        levels,
    })
}

/// `sum_{i>=1} q_i Gamma_i` for `q(X) = sum q_i X^i`.
pub fn poly_of_gamma<M: MarkovModel>(
    model: &M,
    tower: &GammaTower<M::Function>,
    q: &RationalPoly,
) -> Result<M::Function> {
    let degree = q.degree().unwrap_or(0);
    if degree > tower.depth() {
        return Err(ChaosError::InvalidParameter(format!(
            "tower of depth {} cannot evaluate a degree-{degree} polynomial",
            tower.depth()
        )));
    }
    let terms: Vec<(Rational, &M::Function)> = q
        .terms()
        .filter(|(i, _)| *i >= 1)
        .map(|(i, c)| (c.clone(), tower.level(i)))
        .collect();
    model.linear_combination(&terms)
}

/// `Q_k(Gamma)(F)`.
pub fn q_of_gamma<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<M::Function> {
    let q = build_q(spectrum, k)?;
    let tower = build_gamma_tower(model, f, k.max(1))?;
    poly_of_gamma(model, &tower, &q)
}

/// `l_k`, erroring when the spectrum is too short.
pub fn spectrum_value(spectrum: &Spectrum, k: usize) -> Result<Rational> {
    spectrum.require(k + 1)?;
    Ok(spectrum.eigenvalue(k).expect("required above"))
}

/// Everything the chaos criterion looks at, computed once.
#[derive(Clone, Debug)]
pub struct ChaosAnalysis<F> {
    pub tower: GammaTower<F>,
    pub degree: usize,
    pub target_eigenvalue: Rational,
    pub q_k: F,
    pub q_next: F,
    pub q_next_is_zero: bool,
    pub q_k_constant: Option<Rational>,
    /// `L Q_k(Gamma) = 2 Q_{k+1}(Gamma)`.
    pub derivative_relation: bool,
}

impl<F> ChaosAnalysis<F> {
    pub fn eigenvalue_matches(&self) -> bool {
        self.tower.eigenvalue == self.target_eigenvalue
    }

    pub fn is_chaos(&self) -> bool {
        self.eigenvalue_matches() && self.q_next_is_zero
    }
}

pub fn analyze_chaos<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
    depth: usize,
) -> Result<ChaosAnalysis<M::Function>> {
    if k == 0 {
        return Err(ChaosError::InvalidDegree("chaos degree must be at least 1".into()));
    }
    let target = spectrum_value(spectrum, k)?;
    let tower = build_gamma_tower(model, f, depth.max(k + 1))?;
    let q_k = poly_of_gamma(model, &tower, &build_q(spectrum, k)?)?;
    let q_next = poly_of_gamma(model, &tower, &build_q(spectrum, k + 1)?)?;
    let l_qk = model.apply_l(&q_k)?;
    let twice_next = model.scale(&q_next, &int(2))?;
    Ok(ChaosAnalysis {
        q_next_is_zero: model.is_zero(&q_next),
        q_k_constant: model.constant_value(&q_k),
        derivative_relation: model.equal(&l_qk, &twice_next),
        degree: k,
        target_eigenvalue: target,
        tower,
        q_k,
        q_next,
    })
}

/// The chaos criterion: `-LF = l_k F` and `Q_{k+1}(Gamma)(F) = 0`.
///
/// `lhs` is the eigenvalue found, `rhs` is `l_k`. Failure is reported, not
/// raised; a function that is not an eigenfunction at all fails with a note.
pub fn is_chaos<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<VerificationReport> {
    let ctx = |r: VerificationReport| r.with_context(model.tag(), model.dimension(), k);
    let target = spectrum_value(spectrum, k)?;
    let analysis = match analyze_chaos(spectrum, model, f, k, k + 1) {
        Ok(a) => a,
        Err(ChaosError::NotEigenfunction(_)) => {
            let mut r = VerificationReport::exact("chaos", Rational::zero(), target);
            r.status = Status::Fail;
            return Ok(ctx(r.with_note("not an eigenfunction of -L")));
        }
        Err(e) => return Err(e),
    };
    let constant = match &analysis.q_k_constant {
        Some(c) => format!("Q_k(Gamma)(F) = {}", fmt_rational(c)),
        None => "Q_k(Gamma)(F) not constant".to_string(),
    };
    let report = VerificationReport::exact(
        "chaos",
        analysis.tower.eigenvalue.clone(),
        analysis.target_eigenvalue.clone(),
    )
    .with_note(format!(
        "{constant}; L Q_k = 2 Q_(k+1): {}",
        analysis.derivative_relation
    ))
    .require(analysis.q_next_is_zero, "Q_(k+1)(Gamma)(F) is not zero");
    Ok(ctx(report))
}

/// A verified `k`-chaos with its tower and the integrals shared by the
/// identity checks.
pub struct ChaosInstance<'a, M: MarkovModel> {
    pub model: &'a M,
    pub spectrum: Spectrum,
    pub degree: usize,
    pub lambda: Rational,
    pub tower: GammaTower<M::Function>,
    /// `int F^2 d mu`.
    pub norm_sq: Integral,
}

impl<'a, M: MarkovModel> ChaosInstance<'a, M> {
    /// Errors with [`ChaosError::NotChaos`] unless `F` is a `k`-chaos.
    pub fn new(
        spectrum: &Spectrum,
        model: &'a M,
        f: &M::Function,
        k: usize,
        depth: usize,
    ) -> Result<Self> {
        let analysis = analyze_chaos(spectrum, model, f, k, depth)?;
        if !analysis.eigenvalue_matches() {
            return Err(ChaosError::NotChaos(format!(
                "eigenvalue {} differs from l_{k} = {}",
                fmt_rational(&analysis.tower.eigenvalue),
                fmt_rational(&analysis.target_eigenvalue)
            )));
        }
        if !analysis.q_next_is_zero {
            return Err(ChaosError::NotChaos(format!(
                "Q_{}(Gamma)(F) does not vanish",
                k + 1
            )));
        }
        let norm_sq = model.integrate(analysis.tower.level(0))?;
        Ok(Self {
            model,
            spectrum: spectrum.clone(),
            degree: k,
            lambda: analysis.target_eigenvalue,
            tower: analysis.tower,
            norm_sq,
        })
    }

    pub fn function(&self) -> &M::Function {
        &self.tower.function
    }

    pub fn gamma(&self) -> &M::Function {
        self.tower.level(1)
    }

    fn context(&self, r: VerificationReport) -> VerificationReport {
        r.with_context(self.model.tag(), self.model.dimension(), self.degree)
    }

    pub fn integrate(&self, f: &M::Function) -> Result<Integral> {
        self.model.integrate(f)
    }

    pub fn integrate_product(&self, f: &M::Function, g: &M::Function) -> Result<Integral> {
        self.model.integrate(&self.model.multiply(f, g)?)
    }

    /// `int F^2 Gamma`.
    pub fn f2_gamma(&self) -> Result<Integral> {
        self.integrate_product(self.tower.level(0), self.gamma())
    }

    /// `int F Gamma`.
    pub fn f_gamma(&self) -> Result<Integral> {
        self.integrate_product(self.function(), self.gamma())
    }

    /// `int F^p`.
    pub fn moment(&self, p: usize) -> Result<Integral> {
        let mut acc = self.model.constant(Rational::one());
        for _ in 0..p {
            acc = self.model.multiply(&acc, self.function())?;
        }
        self.integrate(&acc)
    }

    /// `Var Gamma = int Gamma^2 - (int Gamma)^2`.
    pub fn var_gamma(&self) -> Result<Integral> {
        let g2 = self.integrate_product(self.gamma(), self.gamma())?;
        let g1 = self.integrate(self.gamma())?;
        Ok(g2.minus(&g1.times(&g1)))
    }

    /// `int Gamma_n Gamma_m = int Gamma_{n-1} Gamma_{m+1}` for `n, m >= 1`.
    pub fn gradient_exchange(&self, n: usize, m: usize) -> Result<VerificationReport> {
        if n == 0 || m == 0 {
            return Err(ChaosError::InvalidParameter(format!(
                "gradient exchange needs n, m >= 1 (got n={n}, m={m})"
            )));
        }
        if n.max(m + 1) > self.tower.depth() {
            return Err(ChaosError::InvalidParameter(format!(
                "tower depth {} too small for n={n}, m={m}",
                self.tower.depth()
            )));
        }
        let lhs = self.integrate_product(self.tower.level(n), self.tower.level(m))?;
        let rhs = self.integrate_product(self.tower.level(n - 1), self.tower.level(m + 1))?;
        Ok(self.context(
            VerificationReport::integral_equality("gradient_exchange", &lhs, &rhs)
                .with_note(format!("n={n} m={m}")),
        ))
    }

    /// `pi_{k-1} int Gamma^2 = pi_k int F^2 Gamma + (-1)^k int Gamma T_{k+1}(L/2) Gamma`.
    pub fn variance_identity(&self) -> Result<VerificationReport> {
        let k = self.degree;
        let gamma = self.gamma();
        let t = build_t(&self.spectrum, k)?;
        let t_gamma = apply_poly_half_l(self.model, &t, gamma)?;
        let lhs = self
            .integrate_product(gamma, gamma)?
            .scale(&pi_k(&self.spectrum, k - 1)?);
        let rhs = self
            .f2_gamma()?
            .scale(&pi_k(&self.spectrum, k)?)
            .plus(&self.integrate_product(gamma, &t_gamma)?.scale(&sign(k)));
        Ok(self.context(VerificationReport::integral_equality(
            "chaos_variance_identity",
            &lhs,
            &rhs,
        )))
    }

    /// The explicit forms for `k = 1` and `k = 2`:
    /// `int Gamma^2 = l_1 int F^2 Gamma` and
    /// `1/2 int Gamma L Gamma - l_1 int Gamma^2 + l_1 l_2 int F^2 Gamma = 0`.
    pub fn low_order_reduction(&self) -> Result<VerificationReport> {
        let gamma = self.gamma();
        let l1 = spectrum_value(&self.spectrum, 1)?;
        let g2 = self.integrate_product(gamma, gamma)?;
        let f2g = self.f2_gamma()?;
        let report = match self.degree {
            1 => VerificationReport::integral_equality(
                "low_order_reduction",
                &g2,
                &f2g.scale(&l1),
            ),
            2 => {
                let l2 = spectrum_value(&self.spectrum, 2)?;
                let gl = self.integrate_product(gamma, &self.model.apply_l(gamma)?)?;
                let lhs = gl
                    .scale(&half())
                    .minus(&g2.scale(&l1))
                    .plus(&f2g.scale(&(&l1 * &l2)));
                VerificationReport::integral_equality(
                    "low_order_reduction",
                    &lhs,
                    &Integral::exact(Rational::zero()),
                )
            }
            k => {
                return Err(ChaosError::InvalidDegree(format!(
                    "explicit reduction exists for k = 1, 2 only (got {k})"
                )))
            }
        };
        Ok(self.context(report))
    }

    /// `Var Gamma <= l_k (int F^2 Gamma - l_k c^2)` with `c = int F^2`,
    /// checked only when the spectral sign condition holds on `0..=n_max`.
    pub fn variance_bound(&self, n_max: usize) -> Result<VerificationReport> {
        let cond = check_spectral_condition(&self.spectrum, self.degree, n_max)?;
        let report = variance_bound_report(
            "chaos_variance_bound",
            &self.var_gamma()?,
            &self.f2_gamma()?,
            &self.norm_sq,
            &self.lambda,
        );
        let coverage = if cond.truncated {
            format!("spectral condition checked for n <= {}", cond.checked_up_to)
        } else {
            "spectral condition checked on the whole spectrum".to_string()
        };
        let report = if cond.holds() {
            report.with_note(coverage)
        } else {
            report.skipped(format!(
                "spectral condition fails at n = {}",
                cond.violations[0].0
            ))
        };
        Ok(self.context(report))
    }

    /// Diffusion-only identities and the fourth-moment bound:
    /// `l int F^4 = 3 int F^2 Gamma`, `l int F^3 = 2 int F Gamma`,
    /// `l (int F^4 / 3 - c^2) = int F^2 Gamma - l c^2` and
    /// `Var Gamma <= l^2 (int F^4 / 3 - c^2)`.
    pub fn fourth_moment_form(&self) -> Result<Vec<VerificationReport>> {
        if !self.model.is_diffusion() {
            return Err(ChaosError::NonDiffusion(self.model.tag().to_string()));
        }
        let l = &self.lambda;
        let f4 = self.moment(4)?;
        let f3 = self.moment(3)?;
        let f2g = self.f2_gamma()?;
        let fg = self.f_gamma()?;
        let c2 = self.norm_sq.times(&self.norm_sq);
        let third = ratio(1, 3);
        let reduced = f4.scale(&third).minus(&c2);
        let reports = vec![
            VerificationReport::integral_equality(
                "diffusion_fourth_moment",
                &f4.scale(l),
                &f2g.scale(&int(3)),
            ),
            VerificationReport::integral_equality(
                "diffusion_third_moment",
                &f3.scale(l),
                &fg.scale(&int(2)),
            ),
            VerificationReport::integral_equality(
                "fourth_moment_identity",
                &reduced.scale(l),
                &f2g.minus(&c2.scale(l)),
            ),
            VerificationReport::integral_inequality(
                "fourth_moment_bound",
                &self.var_gamma()?,
                &reduced.scale(&(l * l)),
            ),
        ];
        Ok(reports.into_iter().map(|r| self.context(r)).collect())
    }

    /// `int Q_k(Gamma)(F) = Q_k(l_k) int F^2`.
    pub fn integral_of_q(&self) -> Result<VerificationReport> {
        let q = build_q(&self.spectrum, self.degree)?;
        let lhs = self.integrate(&poly_of_gamma(self.model, &self.tower, &q)?)?;
        let rhs = self.norm_sq.scale(&q.eval(&self.lambda));
        Ok(self.context(VerificationReport::integral_equality(
            "integral_of_q",
            &lhs,
            &rhs,
        )))
    }
}

fn variance_bound_report(
    identity: &str,
    var_gamma: &Integral,
    f2_gamma: &Integral,
    norm_sq: &Integral,
    lambda: &Rational,
) -> VerificationReport {
    let rhs = f2_gamma
        .minus(&norm_sq.times(norm_sq).scale(lambda))
        .scale(lambda);
    VerificationReport::integral_inequality(identity, var_gamma, &rhs)
}

/// `int Gamma_n Gamma_m = int Gamma_{n-1} Gamma_{m+1}` for an eigenfunction.
pub fn verify_gradient_exchange<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    n: usize,
    m: usize,
) -> Result<VerificationReport> {
    if n == 0 || m == 0 {
        return Err(ChaosError::InvalidParameter(format!(
            "gradient exchange needs n, m >= 1 (got n={n}, m={m})"
        )));
    }
    let tower = build_gamma_tower(model, f, n.max(m + 1))?;
    let int = |a: usize, b: usize| model.integrate(&model.multiply(tower.level(a), tower.level(b))?);
    let lhs = int(n, m)?;
    let rhs = int(n - 1, m + 1)?;
    Ok(
        VerificationReport::integral_equality("gradient_exchange", &lhs, &rhs)
            .with_context(model.tag(), model.dimension(), 0)
            .with_note(format!("n={n} m={m}")),
    )
}

/// The exact variance identity for a `k`-chaos.
pub fn verify_chaos_identity<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<VerificationReport> {
    ChaosInstance::new(spectrum, model, f, k, k + 1)?.variance_identity()
}

pub fn verify_low_order_reduction<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<VerificationReport> {
    ChaosInstance::new(spectrum, model, f, k, k + 1)?.low_order_reduction()
}

pub fn verify_variance_bound<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<VerificationReport> {
    ChaosInstance::new(spectrum, model, f, k, k + 1)?.variance_bound(DEFAULT_SPECTRAL_RANGE)
}

pub fn fourth_moment_form<M: MarkovModel>(
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<Vec<VerificationReport>> {
    if !model.is_diffusion() {
        return Err(ChaosError::NonDiffusion(model.tag().to_string()));
    }
    ChaosInstance::new(&model.spectrum(), model, f, k, k + 1)?.fourth_moment_form()
}

/// For even `k`, the variance bound only needs `Q_{k+1}(Gamma)(F) >= 0`
/// pointwise. Checks the bound for an `l_k`-eigenfunction whenever that
/// sign condition holds; skips otherwise.
pub fn verify_even_sign_route<M: MarkovModel>(
    spectrum: &Spectrum,
    model: &M,
    f: &M::Function,
    k: usize,
) -> Result<VerificationReport> {
    if k == 0 || k % 2 == 1 {
        return Err(ChaosError::InvalidDegree(format!(
            "sign route applies to even k >= 2 (got {k})"
        )));
    }
    let analysis = analyze_chaos(spectrum, model, f, k, k + 1)?;
    let ctx = |r: VerificationReport| r.with_context(model.tag(), model.dimension(), k);
    if !analysis.eigenvalue_matches() {
        return Err(ChaosError::NotEigenfunction(format!(
            " with eigenvalue l_{k} = {}",
            fmt_rational(&analysis.target_eigenvalue)
        )));
    }
    let Some(min) = model.pointwise_min(&analysis.q_next) else {
        return Ok(ctx(VerificationReport::skip(
            "even_sign_route",
            "no pointwise evaluation on this model",
        )));
    };
    if min.is_negative() {
        return Ok(ctx(VerificationReport::skip(
            "even_sign_route",
            format!("Q_(k+1)(Gamma)(F) has minimum {}", fmt_rational(&min)),
        )));
    }
    let tower = &analysis.tower;
    let gamma = tower.level(1);
    let g2 = model.integrate(&model.multiply(gamma, gamma)?)?;
    let g1 = model.integrate(gamma)?;
    let var = g2.minus(&g1.times(&g1));
    let f2g = model.integrate(&model.multiply(tower.level(0), gamma)?)?;
    let c = model.integrate(tower.level(0))?;
    let report = variance_bound_report("even_sign_route", &var, &f2g, &c, &analysis.target_eigenvalue)
        .with_note(if analysis.q_next_is_zero {
            "F is a chaos"
        } else {
            "F is not a chaos; Q_(k+1)(Gamma)(F) >= 0"
        });
    Ok(ctx(report))
}

/// Checks `Q_{k+1}'(0) = (-1)^k pi_k`, `R_{k+1}(l_k) = (-1)^{k+1} pi_{k-1}`
/// and `X^2 R_{k+1} + Q_{k+1}'(0) X = Q_{k+1}`.
pub fn verify_spectral_constants(spectrum: &Spectrum, k: usize) -> Result<Vec<VerificationReport>> {
    let q = build_q(spectrum, k + 1)?;
    let r = build_r(spectrum, k)?;
    let lk = spectrum_value(spectrum, k)?;
    let q1 = q.coeff(1);
    let label = |rep: VerificationReport| {
        rep.with_model_label(spectrum_label(spectrum))
            .with_context_degree(k)
    };
    let rebuilt = &(&RationalPoly::monomial(Rational::one(), 2) * &r)
        + &RationalPoly::monomial(q1.clone(), 1);
    Ok(vec![
        label(VerificationReport::exact(
            "linear_coefficient",
            q1,
            sign(k) * pi_k(spectrum, k)?,
        )),
        label(VerificationReport::exact(
            "remainder_at_top",
            r.eval(&lk),
            -sign(k) * pi_k(spectrum, k - 1)?,
        )),
        label(
            VerificationReport::exact("polynomial_reconstruction", Rational::zero(), Rational::zero())
                .require(rebuilt == q, "X^2 R + Q'(0) X differs from Q"),
        ),
    ])
}

/// Comma-free spectrum label for CSV rows.
pub fn spectrum_label(spectrum: &Spectrum) -> String {
    match spectrum {
        Spectrum::Naturals => "spectrum:nat".to_string(),
        Spectrum::Explicit(v) => {
            let parts: Vec<String> = v.iter().map(fmt_rational).collect();
            format!("spectrum:[{}]", parts.join(" "))
        }
    }
}

impl VerificationReport {
    fn with_context_degree(mut self, k: usize) -> Self {
        self.degree = k;
        self
    }
}

/// Spectral sign condition as one report per checked index.
pub fn spectral_condition_reports(
    spectrum: &Spectrum,
    k: usize,
    n_max: usize,
) -> Result<Vec<VerificationReport>> {
    let cond = check_spectral_condition(spectrum, k, n_max)?;
    Ok(cond
        .values
        .into_iter()
        .map(|(n, v)| {
            let mut r = VerificationReport::inequality("spectral_condition", v, Rational::zero())
                .with_model_label(spectrum_label(spectrum))
                .with_context_degree(k);
            r.dimension = n;
            r
        })
        .collect())
}

#[cfg(test)]
mod tests;
