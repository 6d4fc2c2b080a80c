//! Built-in sequences of chaos used by the convergence experiments.
//!
//! * `paired-product`: `G = sum_b prod_{i in b} x_i` over `m = N/k` disjoint
//!   blocks of `k` coordinates (pairs when `k = 2`), normalized by `sqrt m`.
//! * `constant-coefficient`: `G = sum_{i<j} x_i x_j`. For the normal
//!   experiment it is normalized by `sqrt(N(N-1)/2)`; for the gamma
//!   experiment `F = G / N` with `p = (N-1)/(2N)`, so that `F + p` tends to
//!   `g_{1/2}`.
//! * `exact-gamma`: `F = sum_i (x_i^2 - 1)/2` with `p = N/2`; `F + p` has law
//!   `g_{N/2}` exactly.
//! * `random(seed)`: [`random_chaos`], already of unit norm.
//!
//! Normalizations by square roots keep every reported quantity rational:
//! fourth moments and `Var Gamma` are homogeneous, so they are computed on
//! `G` and divided by `(int G^2)^2`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{ChaosError, Result};
use crate::gamma_calculus::{ChaosInstance, VerificationReport};
use crate::markov_models::{
    cube_distribution, random_chaos, sample_cube, sample_iid, sample_ou, Cube, CubeFunction,
    Materialized, MarkovModel, ModelTag, OrnsteinUhlenbeck, PolyFunction,
};
use crate::rational::{factorial, from_usize, int, pow, ratio, to_f64, Rational};
use crate::spectrum_polys::Spectrum;
use crate::stein_bounds::{
    distance::checked_count, kolmogorov_from_weighted, MAX_EXACT_CUBE_DIM, monte_carlo, verify_gamma_fourth_moment,
    EmpiricalDistance, Estimator, Target,
};

/// Largest OU dimension handled symbolically by the paired family.
pub const SYMBOLIC_OU_PAIRED: usize = 8;
/// Largest OU dimension handled symbolically by the constant-coefficient family.
pub const SYMBOLIC_OU_CONSTANT: usize = 5;
/// Largest cube dimension handled by enumeration.
pub const SYMBOLIC_CUBE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    PairedProduct,
    ConstantCoefficient,
    ExactGamma,
    Random { seed: u64 },
}

impl FromStr for Family {
    type Err = ChaosError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "paired-product" => Ok(Family::PairedProduct),
            "constant-coefficient" => Ok(Family::ConstantCoefficient),
            "exact-gamma" => Ok(Family::ExactGamma),
            _ => {
                let seed = s
                    .strip_prefix("random(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| ChaosError::InvalidParameter(format!("unknown family `{s}`")))?;
                seed.trim()
                    .parse()
                    .map(|seed| Family::Random { seed })
                    .map_err(|_| ChaosError::InvalidParameter(format!("bad family seed `{seed}`")))
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PairedProduct => write!(f, "paired-product"),
            Family::ConstantCoefficient => write!(f, "constant-coefficient"),
            Family::ExactGamma => write!(f, "exact-gamma"),
            Family::Random { seed } => write!(f, "random({seed})"),
        }
    }
}

/// Where an exact value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactSource {
    Symbolic,
    ClosedForm,
}

/// Exact normal-experiment quantities for the normalized `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalExact {
    pub dimension: usize,
    pub degree: usize,
    /// `int F^4` with `int F^2 = 1`.
    pub fourth_moment: Rational,
    /// `Var Gamma(F)` with `int F^2 = 1`.
    pub var_gamma: Rational,
    pub source: ExactSource,
}

impl NormalExact {
    /// Kolmogorov Stein bound `sqrt(Var Gamma) / k`.
    pub fn stein_bound(&self) -> f64 {
        to_f64(&self.var_gamma).sqrt() / self.degree as f64
    }

    /// `k^2 (int F^4 / 3 - 1)`, the fourth-moment upper bound on `Var Gamma`
    /// (diffusion models only).
    pub fn fourth_moment_bound(&self) -> Rational {
        from_usize(self.degree * self.degree) * (&self.fourth_moment / int(3) - int(1))
    }
}

/// Exact gamma-experiment quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaExact {
    pub dimension: usize,
    pub degree: usize,
    pub p: Rational,
    /// `int F^4 - 6 int F^3 + 6p - 3p^2`.
    pub criterion: Rational,
    /// `Var(Gamma - k F)`.
    pub var_u: Rational,
    /// `criterion - (3/k^2) var_u`.
    pub slack: Rational,
    pub source: ExactSource,
}

impl GammaExact {
    fn new(dimension: usize, degree: usize, p: Rational, criterion: Rational, var_u: Rational, source: ExactSource) -> Self {
        let slack = &criterion - ratio(3, (degree * degree) as i64) * &var_u;
        Self {
            dimension,
            degree,
            p,
            criterion,
            var_u,
            slack,
            source,
        }
    }
}

fn block_count(n: usize, k: usize) -> Result<usize> {
    if k == 0 || n == 0 || !n.is_multiple_of(k) {
        return Err(ChaosError::InvalidParameter(format!(
            "paired-product needs N divisible by k (N={n}, k={k})"
        )));
    }
    Ok(n / k)
}

fn require_degree_two(family: &Family, k: usize) -> Result<()> {
    if k != 2 {
        return Err(ChaosError::InvalidDegree(format!("{family} family has degree 2, not {k}")));
    }
    Ok(())
}

fn unsupported(model: ModelTag, family: &Family, what: &str) -> ChaosError {
    ChaosError::InvalidParameter(format!("{family} family unavailable for {model} in the {what} experiment"))
}

fn binomial_weights(m: usize) -> Vec<Rational> {
    let total = Rational::from_integer(BigInt::one() << m);
    let fm = factorial(m);
    (0..=m)
        .map(|j| Rational::from_integer(&fm / (factorial(j) * factorial(m - j))) / &total)
        .collect()
}

/// `E phi(S)` for `S` a sum of `m` independent signs.
fn sign_sum_expectation(m: usize, phi: impl Fn(&Rational) -> Rational) -> Rational {
    binomial_weights(m)
        .into_iter()
        .enumerate()
        .map(|(j, w)| w * phi(&int(2 * j as i64 - m as i64)))
        .sum()
}

/// Closed forms for the paired and constant-coefficient families.
pub fn normal_exact_closed_form(model: ModelTag, family: &Family, n: usize, k: usize) -> Result<NormalExact> {
    let (fourth_moment, var_gamma) = match (model, family) {
        (ModelTag::Ou, Family::PairedProduct) => {
            let m = from_usize(block_count(n, k)?);
            let three = |e: usize| pow(&int(3), e);
            let kk = from_usize(k);
            let block_var = &kk * three(k - 1) + &kk * (&kk - int(1)) * three(k.saturating_sub(2)) - &kk * &kk;
            (int(3) + (three(k) - int(3)) / &m, block_var / &m)
        }
        (ModelTag::Cube, Family::PairedProduct) => {
            // Each block product is a fair sign; Gamma = k m is constant.
            let m = block_count(n, k)?;
            let mm = from_usize(m);
            (int(3) - int(2) / mm, Rational::zero())
        }
        (ModelTag::Ou, Family::ConstantCoefficient) => {
            require_degree_two(family, k)?;
            let t = ou_constant_traces(n)?;
            let c2 = &t.tr2 * &t.tr2 * int(4);
            let g4 = int(48) * &t.tr4 + int(12) * &t.tr2 * &t.tr2;
            (g4 / &c2, int(32) * &t.tr4 / c2)
        }
        (ModelTag::Cube, Family::ConstantCoefficient) => {
            require_degree_two(family, k)?;
            if n < 2 {
                return Err(ChaosError::InvalidParameter("constant-coefficient needs N >= 2".into()));
            }
            let nn = from_usize(n);
            let g = |s: &Rational| (s * s - &nn) / int(2);
            let gamma = |s: &Rational| &nn + (&nn - int(2)) * s * s;
            let c = sign_sum_expectation(n, |s| pow(&g(s), 2));
            let g4 = sign_sum_expectation(n, |s| pow(&g(s), 4));
            let mean = sign_sum_expectation(n, gamma);
            let sq = sign_sum_expectation(n, |s| pow(&gamma(s), 2));
            let c2 = &c * &c;
            (g4 / &c2, (sq - &mean * &mean) / c2)
        }
        _ => return Err(unsupported(model, family, "normal closed-form")),
    };
    Ok(NormalExact {
        dimension: n,
        degree: k,
        fourth_moment,
        var_gamma,
        source: ExactSource::ClosedForm,
    })
}

struct Traces {
    tr2: Rational,
    tr3: Rational,
    tr4: Rational,
}

/// Traces of `B^j` for `x^T B x = sum_{i<j} x_i x_j`.
fn ou_constant_traces(n: usize) -> Result<Traces> {
    if n < 2 {
        return Err(ChaosError::InvalidParameter("constant-coefficient needs N >= 2".into()));
    }
    let top = ratio(n as i64 - 1, 2);
    let rest = ratio(-1, 2);
    let mult = from_usize(n - 1);
    let tr = |e: usize| pow(&top, e) + &mult * pow(&rest, e);
    Ok(Traces {
        tr2: tr(2),
        tr3: tr(3),
        tr4: tr(4),
    })
}

fn ou_paired(ou: &OrnsteinUhlenbeck, n: usize, k: usize) -> Result<PolyFunction> {
    let m = block_count(n, k)?;
    ou.from_terms((0..m).map(|b| {
        let mut e = vec![0u32; n];
        e[b * k..(b + 1) * k].iter_mut().for_each(|x| *x = 1);
        (e, int(1))
    }))
}

fn ou_constant(ou: &OrnsteinUhlenbeck, n: usize) -> Result<PolyFunction> {
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut e = vec![0u32; n];
            e[i] = 1;
            e[j] = 1;
            terms.push((e, int(1)));
        }
    }
    ou.from_terms(terms)
}

fn cube_paired(cube: &Cube, n: usize, k: usize) -> Result<CubeFunction> {
    let m = block_count(n, k)?;
    let mut acc = cube.constant(Rational::zero());
    for b in 0..m {
        let block: Vec<usize> = (b * k..(b + 1) * k).collect();
        acc = cube.add(&acc, &cube.walsh(&block)?)?;
    }
    Ok(acc)
}

fn cube_constant(cube: &Cube, n: usize) -> Result<CubeFunction> {
    let mut acc = cube.constant(Rational::zero());
    for i in 0..n {
        for j in i + 1..n {
            acc = cube.add(&acc, &cube.walsh(&[i, j])?)?;
        }
    }
    Ok(acc)
}

fn homogeneous<M: MarkovModel>(model: &M, g: &M::Function, k: usize) -> Result<NormalExact> {
    let inst = ChaosInstance::new(&Spectrum::Naturals, model, g, k, k + 1)?;
    let c = inst.norm_sq.value.clone();
    if c.is_zero() {
        return Err(ChaosError::InvalidParameter("zero function".into()));
    }
    let c2 = &c * &c;
    Ok(NormalExact {
        dimension: model.dimension(),
        degree: k,
        fourth_moment: inst.moment(4)?.value / &c2,
        var_gamma: inst.var_gamma()?.value / c2,
        source: ExactSource::Symbolic,
    })
}

/// Symbolic computation through the model, any size (possibly slow).
pub fn normal_exact_symbolic(model: ModelTag, family: &Family, n: usize, k: usize) -> Result<NormalExact> {
    match (model, family) {
        (ModelTag::Ou, Family::PairedProduct) => {
            let ou = OrnsteinUhlenbeck::new(n)?;
            homogeneous(&ou, &ou_paired(&ou, n, k)?, k)
        }
        (ModelTag::Ou, Family::ConstantCoefficient) => {
            require_degree_two(family, k)?;
            let ou = OrnsteinUhlenbeck::new(n)?;
            homogeneous(&ou, &ou_constant(&ou, n)?, 2)
        }
        (ModelTag::Cube, Family::PairedProduct) => {
            let cube = Cube::new(n)?;
            homogeneous(&cube, &cube_paired(&cube, n, k)?, k)
        }
        (ModelTag::Cube, Family::ConstantCoefficient) => {
            require_degree_two(family, k)?;
            let cube = Cube::new(n)?;
            homogeneous(&cube, &cube_constant(&cube, n)?, 2)
        }
        (ModelTag::Cube | ModelTag::Ou, Family::Random { seed }) => {
            match random_chaos(model, n, k, *seed)?.materialize()? {
                Materialized::Cube(m, f) => homogeneous(&m, &f, k),
                Materialized::Ou(m, f) => homogeneous(&m, &f, k),
                Materialized::Poisson(..) => unreachable!("model is cube or OU"),
            }
        }
        _ => Err(unsupported(model, family, "normal")),
    }
}

/// Exact quantities: symbolic at small sizes, closed form above.
pub fn normal_exact(model: ModelTag, family: &Family, n: usize, k: usize) -> Result<NormalExact> {
    let small = match (model, family) {
        (_, Family::Random { .. }) => true,
        (ModelTag::Ou, Family::PairedProduct) => n <= SYMBOLIC_OU_PAIRED,
        (ModelTag::Ou, Family::ConstantCoefficient) => n <= SYMBOLIC_OU_CONSTANT,
        (ModelTag::Cube, _) => n <= SYMBOLIC_CUBE,
        _ => false,
    };
    if small {
        normal_exact_symbolic(model, family, n, k)
    } else {
        normal_exact_closed_form(model, family, n, k)
    }
}

fn normal_sample(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Exact law of `F` as `(value, probability)` pairs sorted by value, when
/// the family allows it.
pub fn normal_atoms(model: ModelTag, family: &Family, n: usize, k: usize) -> Result<Option<Vec<(f64, f64)>>> {
    if model != ModelTag::Cube {
        return Ok(None);
    }
    let signs = |count: usize| -> Vec<(f64, f64)> {
        let scale = (count as f64).sqrt();
        binomial_weights(count)
            .iter()
            .enumerate()
            .map(|(j, w)| ((2 * j) as f64 / scale - scale, to_f64(w)))
            .collect()
    };
    Ok(match family {
        Family::PairedProduct => Some(signs(block_count(n, k)?)),
        Family::ConstantCoefficient => {
            require_degree_two(family, k)?;
            // G = (S^2 - N)/2 with S = 2j - N.
            let c = (n * (n - 1) / 2) as f64;
            let mut atoms: Vec<(f64, f64)> = Vec::new();
            for (j, w) in binomial_weights(n).iter().enumerate() {
                let s = 2 * j as i64 - n as i64;
                let g = ((s * s - n as i64) / 2) as f64 / c.sqrt();
                atoms.push((g, to_f64(w)));
            }
            Some(merge_atoms(atoms))
        }
        Family::Random { seed } => {
            if n > MAX_EXACT_CUBE_DIM {
                return Ok(None);
            }
            let spec = random_chaos(model, n, k, *seed)?;
            let cube = Cube::new(n)?;
            let f = spec.materialize_cube(&cube)?;
            Some(
                cube_distribution(&f)
                    .iter()
                    .map(|a| (to_f64(&a.value), to_f64(&a.probability)))
                    .collect(),
            )
        }
        Family::ExactGamma => return Err(unsupported(model, family, "normal")),
    })
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, w) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// `n` draws of the normalized `F`.
pub fn normal_samples(model: ModelTag, family: &Family, dim: usize, k: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    let n = checked_count(n)?;
    Ok(match (model, family) {
        (ModelTag::Ou, Family::PairedProduct) => {
            let m = block_count(dim, k)?;
            let scale = (m as f64).sqrt();
            if k == 2 {
                // x y = (u^2 - v^2)/2 with u, v independent standard normals.
                let chi = ChiSquared::new(m as f64).expect("positive degrees of freedom");
                sample_iid(n, seed, |rng| (chi.sample(rng) - chi.sample(rng)) / (2.0 * scale))
            } else {
                sample_iid(n, seed, |rng| {
                    let total: f64 = (0..m)
                        .map(|_| (0..k).map(|_| normal_sample(rng)).product::<f64>())
                        .sum();
                    total / scale
                })
            }
        }
        (ModelTag::Ou, Family::ConstantCoefficient) => {
            require_degree_two(family, k)?;
            let c = (dim * (dim - 1) / 2) as f64;
            let draw = constant_coefficient_draw(dim)?;
            sample_iid(n, seed, |rng| draw(rng) / c.sqrt())
        }
        (ModelTag::Cube, Family::PairedProduct | Family::ConstantCoefficient) => {
            let atoms = normal_atoms(model, family, dim, k)?.expect("cube families enumerate");
            sample_atoms(&atoms, n, seed)
        }
        (ModelTag::Ou, Family::Random { seed: s }) => {
            let spec = random_chaos(model, dim, k, *s)?;
            let ou = OrnsteinUhlenbeck::new(dim)?;
            sample_ou(&spec.materialize_ou(&ou)?.compile(), n, seed)
        }
        (ModelTag::Cube, Family::Random { seed: s }) => {
            let cube = Cube::new(dim)?;
            sample_cube(&random_chaos(model, dim, k, *s)?.materialize_cube(&cube)?, n, seed)
        }
        _ => return Err(unsupported(model, family, "normal")),
    })
}

/// `sum_{i<j} x_i x_j` in law: with `z` the normalized coordinate sum and
/// `W ~ chi^2_{N-1}` independent, it equals `((N-1) z^2 - W) / 2`.
fn constant_coefficient_draw(dim: usize) -> Result<impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync> {
    if dim < 2 {
        return Err(ChaosError::InvalidParameter("constant-coefficient needs N >= 2".into()));
    }
    let chi = ChiSquared::new((dim - 1) as f64).expect("positive degrees of freedom");
    let a = (dim - 1) as f64;
    Ok(move |rng: &mut rand_chacha::ChaCha8Rng| {
        let z: f64 = rng.sample(StandardNormal);
        (a * z * z - chi.sample(rng)) / 2.0
    })
}

fn sample_atoms(atoms: &[(f64, f64)], n: usize, seed: u64) -> Vec<f64> {
    let mut cumulative = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for &(_, w) in atoms {
        acc += w;
        cumulative.push(acc);
    }
    sample_iid(n, seed, |rng| {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cumulative.partition_point(|&c| c <= u).min(atoms.len() - 1);
        atoms[i].0
    })
}

/// Empirical or exact Kolmogorov distance of the normalized `F` to `N(0,1)`.
///
/// Exact enumeration is used whenever the family admits it; otherwise `n`
/// Monte Carlo draws.
pub fn normal_distance(model: ModelTag, family: &Family, dim: usize, k: usize, n: usize, seed: u64) -> Result<EmpiricalDistance> {
    if let Some(atoms) = normal_atoms(model, family, dim, k)? {
        return Ok(EmpiricalDistance {
            target: Target::Normal,
            estimate: kolmogorov_from_weighted(&atoms, Target::Normal),
            estimator: Estimator::ExactEnumeration,
            standard_error: 0.0,
        });
    }
    Ok(monte_carlo(normal_samples(model, family, dim, k, n, seed)?, Target::Normal, seed))
}

fn exact_gamma_function(ou: &OrnsteinUhlenbeck, n: usize) -> Result<PolyFunction> {
    let mut terms = vec![(vec![0u32; n], ratio(-(n as i64), 2))];
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = 2;
        terms.push((e, ratio(1, 2)));
    }
    ou.from_terms(terms)
}

/// The function and its `p = int F^2` for a gamma family on OU.
pub fn gamma_function(family: &Family, n: usize, k: usize) -> Result<(OrnsteinUhlenbeck, PolyFunction, Rational)> {
    let ou = OrnsteinUhlenbeck::new(n)?;
    let f = match family {
        Family::ConstantCoefficient => {
            require_degree_two(family, k)?;
            ou.scale(&ou_constant(&ou, n)?, &ratio(1, n as i64))?
        }
        Family::ExactGamma => {
            require_degree_two(family, k)?;
            exact_gamma_function(&ou, n)?
        }
        Family::Random { seed } => random_chaos(ModelTag::Ou, n, k, *seed)?.materialize_ou(&ou)?,
        Family::PairedProduct => return Err(unsupported(ModelTag::Ou, family, "gamma")),
    };
    let p = ou.integrate(&ou.multiply(&f, &f)?)?.value;
    Ok((ou, f, p))
}

/// Symbolic gamma quantities with the verification reports behind them.
pub fn gamma_exact_symbolic(family: &Family, n: usize, k: usize) -> Result<(GammaExact, Vec<VerificationReport>)> {
    let (ou, f, p) = gamma_function(family, n, k)?;
    let reports = verify_gamma_fourth_moment(&ou, &f, k, &p)?;
    let bound = reports.last().expect("bound report present");
    let var_u = &bound.lhs * ratio((k * k) as i64, 3);
    let exact = GammaExact::new(n, k, p, bound.rhs.clone(), var_u, ExactSource::Symbolic);
    Ok((exact, reports))
}

/// Closed forms for the constant-coefficient and exact-gamma families.
pub fn gamma_exact_closed_form(family: &Family, n: usize, k: usize) -> Result<GammaExact> {
    require_degree_two(family, k)?;
    let nn = from_usize(n);
    match family {
        Family::ConstantCoefficient => {
            let t = ou_constant_traces(n)?;
            // F = x^T B x / N.
            let n3 = pow(&nn, 3);
            let n4 = pow(&nn, 4);
            let f4 = (int(48) * &t.tr4 + int(12) * &t.tr2 * &t.tr2) / &n4;
            let f3 = int(8) * &t.tr3 / &n3;
            let p = ratio(n as i64 - 1, 2 * n as i64);
            let criterion = &f4 - int(6) * f3 + int(6) * &p - int(3) * &p * &p;
            let var_u = int(2) * (&nn - int(1)) * (&nn + int(3)) / n3;
            Ok(GammaExact::new(n, k, p, criterion, var_u, ExactSource::ClosedForm))
        }
        Family::ExactGamma => Ok(GammaExact::new(
            n,
            k,
            &nn / int(2),
            Rational::zero(),
            Rational::zero(),
            ExactSource::ClosedForm,
        )),
        _ => Err(unsupported(ModelTag::Ou, family, "gamma closed-form")),
    }
}

/// Symbolic at small sizes, closed form above.
pub fn gamma_exact(family: &Family, n: usize, k: usize) -> Result<GammaExact> {
    let small = match family {
        Family::Random { .. } => true,
        Family::ConstantCoefficient => n <= SYMBOLIC_OU_CONSTANT,
        Family::ExactGamma => n <= SYMBOLIC_OU_PAIRED,
        Family::PairedProduct => return Err(unsupported(ModelTag::Ou, family, "gamma")),
    };
    if small {
        Ok(gamma_exact_symbolic(family, n, k)?.0)
    } else {
        gamma_exact_closed_form(family, n, k)
    }
}

/// Monte Carlo Kolmogorov distance of `F + p` to `g_p`.
pub fn gamma_distance(family: &Family, dim: usize, k: usize, n: usize, seed: u64) -> Result<EmpiricalDistance> {
    let n = checked_count(n)?;
    let (samples, p) = match family {
        Family::ConstantCoefficient => {
            require_degree_two(family, k)?;
            let draw = constant_coefficient_draw(dim)?;
            let p = (dim - 1) as f64 / (2 * dim) as f64;
            let scale = dim as f64;
            (sample_iid(n, seed, |rng| draw(rng) / scale + p), p)
        }
        Family::ExactGamma => {
            require_degree_two(family, k)?;
            let chi = ChiSquared::new(dim as f64).expect("positive degrees of freedom");
            (sample_iid(n, seed, |rng| chi.sample(rng) / 2.0), dim as f64 / 2.0)
        }
        Family::Random { .. } => {
            let (_, f, p) = gamma_function(family, dim, k)?;
            let shift = to_f64(&p);
            let mut out = sample_ou(&f.compile(), n, seed);
            out.iter_mut().for_each(|x| *x += shift);
            (out, shift)
        }
        Family::PairedProduct => return Err(unsupported(ModelTag::Ou, family, "gamma")),
    };
    Ok(monte_carlo(samples, Target::Gamma(p), seed))
}
