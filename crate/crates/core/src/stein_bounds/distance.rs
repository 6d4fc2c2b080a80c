//! Kolmogorov distances to the normal and gamma targets, computed exactly
//! from enumerated atoms or estimated from samples.

use std::fmt;

use num_traits::Zero;
use rayon::slice::ParallelSliceMut;
use statrs::function::gamma::gamma_lr;

use crate::error::{ChaosError, Result};
use crate::markov_models::{
    cube_distribution, sample_cube, sample_ou, sample_poisson, Atom, Cube, CubeFunction,
    MarkovModel, OrnsteinUhlenbeck, Poisson, PoissonFunction, PolyFunction,
};
use crate::rational::{to_f64, Rational};

/// Confidence level of the distribution-free error proxy.
pub const DKW_DELTA: f64 = 0.05;

/// Largest cube dimension enumerated by the exact path.
pub const MAX_EXACT_CUBE_DIM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Normal,
    /// Density `x^(p-1) e^(-x) / Gamma(p)` on `(0, inf)`.
    Gamma(f64),
}

impl Target {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Target::Normal => normal_cdf(x),
            Target::Gamma(p) => gamma_cdf(p, x),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Target::Gamma(p) if !(p.is_finite() && p > 0.0) => Err(ChaosError::InvalidParameter(
                format!("gamma target needs p > 0, got {p}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Normal => write!(f, "normal"),
            Target::Gamma(p) => write!(f, "gamma({p})"),
        }
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma `P(p, x)`, zero for `x <= 0`.
pub fn gamma_cdf(p: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(p, x)
    }
}

/// `sqrt(ln(2/delta) / 2n)` at `delta = 0.05`.
pub fn dkw_error(n: usize) -> f64 {
    ((2.0 / DKW_DELTA).ln() / (2.0 * n as f64)).sqrt()
}

/// `sup_x |P(F <= x) - target(x)|` for a finite law. Atoms must be sorted.
pub fn kolmogorov_from_atoms(atoms: &[Atom], target: Target) -> f64 {
    let points: Vec<(f64, f64)> = atoms
        .iter()
        .map(|a| (to_f64(&a.value), to_f64(&a.probability)))
        .collect();
    kolmogorov_from_weighted(&points, target)
}

/// Same as [`kolmogorov_from_atoms`] for `(value, probability)` pairs.
pub fn kolmogorov_from_weighted(points: &[(f64, f64)], target: Target) -> f64 {
    let mut below = 0.0;
    let mut sup: f64 = 0.0;
    for &(x, w) in points {
        let t = target.cdf(x);
        let above = below + w;
        sup = sup.max((t - below).abs()).max((above - t).abs());
        below = above;
    }
    sup
}

/// Kolmogorov distance of the empirical law of `samples`, which are sorted
/// in place.
pub fn kolmogorov_from_samples(samples: &mut [f64], target: Target) -> f64 {
    samples.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .fold(0.0f64, |sup, (i, &x)| {
            let t = target.cdf(x);
            sup.max(t - i as f64 / n).max((i + 1) as f64 / n - t)
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    ExactEnumeration,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistance {
    pub target: Target,
    pub estimate: f64,
    pub estimator: Estimator,
    /// Zero for exact enumeration, the DKW proxy otherwise.
    pub standard_error: f64,
}

/// Models whose image law can be enumerated or sampled.
pub trait DistanceSource: MarkovModel {
    fn exact_atoms(&self, f: &Self::Function) -> Option<Vec<Atom>>;
    fn draw(&self, f: &Self::Function, n: usize, seed: u64) -> Result<Vec<f64>>;
}

impl DistanceSource for Cube {
    fn exact_atoms(&self, f: &CubeFunction) -> Option<Vec<Atom>> {
        (self.dimension() <= MAX_EXACT_CUBE_DIM).then(|| cube_distribution(f))
    }

    fn draw(&self, f: &CubeFunction, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(sample_cube(f, n, seed))
    }
}

impl DistanceSource for OrnsteinUhlenbeck {
    fn exact_atoms(&self, _: &PolyFunction) -> Option<Vec<Atom>> {
        None
    }

    fn draw(&self, f: &PolyFunction, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(sample_ou(&f.compile(), n, seed))
    }
}

impl DistanceSource for Poisson {
    fn exact_atoms(&self, _: &PoissonFunction) -> Option<Vec<Atom>> {
        None
    }

    fn draw(&self, f: &PoissonFunction, n: usize, seed: u64) -> Result<Vec<f64>> {
        let out = sample_poisson(self, f, n, seed);
        if out.values.len() < n {
            return Err(ChaosError::InvalidParameter(
                "function has an empty valid region".into(),
            ));
        }
        Ok(out.values)
    }
}

/// Kolmogorov distance between the law of `F + shift` and `target`.
pub fn estimate_distance<M: DistanceSource>(
    model: &M,
    f: &M::Function,
    shift: &Rational,
    target: Target,
    method: Method,
    n: usize,
    seed: u64,
) -> Result<EmpiricalDistance> {
    target.validate()?;
    match method {
        Method::Exact => {
            let atoms = model.exact_atoms(f).ok_or_else(|| {
                ChaosError::InvalidParameter(format!(
                    "exact enumeration unavailable for {}",
                    model.tag()
                ))
            })?;
            let shifted: Vec<Atom> = atoms
                .into_iter()
                .map(|a| Atom {
                    value: a.value + shift,
                    probability: a.probability,
                })
                .collect();
            Ok(EmpiricalDistance {
                target,
                estimate: kolmogorov_from_atoms(&shifted, target),
                estimator: Estimator::ExactEnumeration,
                standard_error: 0.0,
            })
        }
        Method::MonteCarlo => {
            let mut samples = model.draw(f, checked_count(n)?, seed)?;
            if !shift.is_zero() {
                let s = to_f64(shift);
                samples.iter_mut().for_each(|x| *x += s);
            }
            Ok(monte_carlo(samples, target, seed))
        }
    }
}

pub(crate) fn checked_count(n: usize) -> Result<usize> {
    if n == 0 {
        Err(ChaosError::InvalidParameter("sample count must be positive".into()))
    } else {
        Ok(n)
    }
}

/// Wraps a sample into an [`EmpiricalDistance`].
pub fn monte_carlo(mut samples: Vec<f64>, target: Target, seed: u64) -> EmpiricalDistance {
    let n = samples.len();
    EmpiricalDistance {
        target,
        estimate: kolmogorov_from_samples(&mut samples, target),
        estimator: Estimator::MonteCarlo { n, seed },
        standard_error: dkw_error(n),
    }
}
