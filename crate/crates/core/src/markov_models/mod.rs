//! Exactly computable realizations of a symmetric Markov triple `(E, mu, L)`.
//!
//! * [`Cube`]: the discrete cube `{-1,+1}^N` with uniform measure and
//!   `L f = 1/2 sum_i D_i f`.
//! * [`OrnsteinUhlenbeck`]: polynomials on `R^N` under the standard Gaussian
//!   with `L f = Lap f - x . grad f`.
//! * [`Poisson`]: the one-dimensional Poisson(theta) birth-death operator on a
//!   truncated lattice `{0, ..., M}`.
//!
//! All three have spectrum `N` for `-L`.

mod chaos;
mod cube;
mod ou;
mod poisson;
mod sampling;

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

pub use chaos::{random_chaos, ChaosSpec, Materialized};
pub use cube::{Cube, CubeFunction};
pub use ou::{hermite_1d, CompiledPoly, Exponents, OrnsteinUhlenbeck, PolyFunction};
pub use poisson::{charlier_polynomial, Poisson, PoissonFunction};
pub use sampling::{
    cube_distribution, sample_cube, sample_iid, sample_ou, sample_ou_with, sample_poisson, Atom,
    PoissonSamples, SAMPLE_CHUNK,
};

use crate::error::{ChaosError, Result};
use crate::rational::Rational;
use crate::spectrum_polys::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelTag {
    Cube,
    Ou,
    Poisson,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelTag::Cube => "cube",
            ModelTag::Ou => "ou",
            ModelTag::Poisson => "poisson",
        })
    }
}

impl FromStr for ModelTag {
    type Err = ChaosError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cube" => Ok(ModelTag::Cube),
            "ou" => Ok(ModelTag::Ou),
            "poisson" => Ok(ModelTag::Poisson),
            other => Err(ChaosError::InvalidParameter(format!(
                "unknown model `{other}` (expected cube, ou or poisson)"
            ))),
        }
    }
}

/// An integral together with a bound on its deviation from the true value.
///
/// `error_bound` is zero for exact models. On the truncated Poisson lattice
/// it estimates the mass the truncation discards, and `reliable` is false
/// once that mass is too large for the value to mean anything.
#[derive(Clone, Debug, PartialEq)]
pub struct Integral {
    pub value: Rational,
    pub error_bound: Rational,
    pub reliable: bool,
}

impl Integral {
    pub fn exact(value: Rational) -> Self {
        Self {
            value,
            error_bound: Rational::zero(),
            reliable: true,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.error_bound.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            value: &self.value * c,
            error_bound: &self.error_bound * c.abs(),
            reliable: self.reliable,
        }
    }

    pub fn plus(&self, other: &Integral) -> Self {
        Self {
            value: &self.value + &other.value,
            error_bound: &self.error_bound + &other.error_bound,
            reliable: self.reliable && other.reliable,
        }
    }

    pub fn minus(&self, other: &Integral) -> Self {
        self.plus(&other.scale(&-Rational::from_integer(1.into())))
    }

    /// Product of two integrals, with first-order error propagation.
    pub fn times(&self, other: &Integral) -> Self {
        let err = &self.error_bound * other.value.abs()
            + &other.error_bound * self.value.abs()
            + &self.error_bound * &other.error_bound;
        Self {
            value: &self.value * &other.value,
            error_bound: err,
            reliable: self.reliable && other.reliable,
        }
    }
}

/// Operations every model supplies; the Gamma-calculus is written against
/// this trait only.
pub trait MarkovModel: Sync {
    type Function: Clone + fmt::Debug + Send + Sync;

    fn tag(&self) -> ModelTag;

    fn dimension(&self) -> usize;

    /// Whether `L` satisfies the chain rule (only Ornstein-Uhlenbeck does).
    fn is_diffusion(&self) -> bool;

    fn spectrum(&self) -> Spectrum {
        Spectrum::Naturals
    }

    /// Errors if `f` does not belong to this model instance.
    fn check(&self, f: &Self::Function) -> Result<()>;

    fn apply_l(&self, f: &Self::Function) -> Result<Self::Function>;

    fn multiply(&self, f: &Self::Function, g: &Self::Function) -> Result<Self::Function>;

    fn integrate(&self, f: &Self::Function) -> Result<Integral>;

    fn constant(&self, c: Rational) -> Self::Function;

    fn linear_combination(&self, terms: &[(Rational, &Self::Function)]) -> Result<Self::Function>;

    fn is_zero(&self, f: &Self::Function) -> bool;

    /// Equality on the part of the state space where both functions are known.
    fn equal(&self, f: &Self::Function, g: &Self::Function) -> bool;

    /// `Some(c)` when `f = c g`; `None` if not proportional or `g` vanishes.
    fn proportionality(&self, f: &Self::Function, g: &Self::Function) -> Option<Rational>;

    fn constant_value(&self, f: &Self::Function) -> Option<Rational>;

    /// Pointwise minimum over the represented state space; `None` where the
    /// state space is not finite (Ornstein-Uhlenbeck).
    fn pointwise_min(&self, f: &Self::Function) -> Option<Rational>;

    fn add(&self, f: &Self::Function, g: &Self::Function) -> Result<Self::Function> {
        let one = Rational::from_integer(1.into());
        self.linear_combination(&[(one.clone(), f), (one, g)])
    }

    fn sub(&self, f: &Self::Function, g: &Self::Function) -> Result<Self::Function> {
        let one = Rational::from_integer(1.into());
        self.linear_combination(&[(one.clone(), f), (-one, g)])
    }

    fn scale(&self, f: &Self::Function, c: &Rational) -> Result<Self::Function> {
        self.linear_combination(&[(c.clone(), f)])
    }
}

/// `index<TAB>p/q` dump, one line per point or term, sorted by index.
pub trait Dump {
    fn dump(&self) -> String;
}
