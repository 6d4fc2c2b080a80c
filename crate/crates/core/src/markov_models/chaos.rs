//! Coefficient descriptions of homogeneous chaos and their materialization.
//!
//! Three coefficient layouts exist:
//!
//! * product form (cube and OU): strictly increasing 1-based index tuples
//!   `i_1 < ... < i_k`, giving `F = sum a x_{i_1} ... x_{i_k}`;
//! * Hermite form (OU only): multi-indices of length `N` summing to `k`,
//!   giving `F = sum a He_{k_1}(x_1) ... He_{k_N}(x_N)` with monic `He`;
//! * Charlier form (Poisson only): a single key `(k)` giving `a C_k`.
//!
//! Text format: a header line `model,N,k` (model one of `cube`, `ou`,
//! `ou-hermite`, `poisson`) followed by `i_1,...,i_k<TAB>p/q` lines.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Cube, CubeFunction, MarkovModel, ModelTag, OrnsteinUhlenbeck, Poisson, PoissonFunction,
    PolyFunction,
};
use crate::error::{ChaosError, Result};
use crate::rational::{
    exact_sqrt, factorial, fmt_rational, int, parse_rational, Rational, ScaledSqrt,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaosSpec {
    pub model: ModelTag,
    pub dimension: usize,
    pub degree: usize,
    pub coefficients: BTreeMap<Vec<usize>, Rational>,
    /// Keys are Hermite multi-indices rather than index tuples (OU only).
    pub hermite: bool,
}

/// A materialized chaos together with its model.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Materialized {
    Cube(Cube, CubeFunction),
    Ou(OrnsteinUhlenbeck, PolyFunction),
    Poisson(Poisson, PoissonFunction),
}

impl ChaosSpec {
    pub fn new(
        model: ModelTag,
        dimension: usize,
        degree: usize,
        coefficients: BTreeMap<Vec<usize>, Rational>,
    ) -> Result<Self> {
        let spec = Self {
            model,
            dimension,
            degree,
            coefficients,
            hermite: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hermite(
        dimension: usize,
        degree: usize,
        coefficients: BTreeMap<Vec<usize>, Rational>,
    ) -> Result<Self> {
        let spec = Self {
            model: ModelTag::Ou,
            dimension,
            degree,
            coefficients,
            hermite: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() || self.coefficients.values().all(Zero::is_zero) {
            return Err(ChaosError::InvalidParameter("empty coefficient map".into()));
        }
        if self.hermite && self.model != ModelTag::Ou {
            return Err(ChaosError::InvalidParameter(
                "Hermite coefficients are only meaningful for the OU model".into(),
            ));
        }
        for key in self.coefficients.keys() {
            match (self.model, self.hermite) {
                (ModelTag::Poisson, _) => {
                    if self.dimension != 1 || key.as_slice() != [self.degree] {
                        return Err(ChaosError::InvalidParameter(format!(
                            "Poisson chaos is one-dimensional with the single key ({})",
                            self.degree
                        )));
                    }
                }
                (ModelTag::Ou, true) => {
                    if key.len() != self.dimension || key.iter().sum::<usize>() != self.degree {
                        return Err(ChaosError::InvalidDegree(format!(
                            "Hermite multi-index {key:?} must have length {} and weight {}",
                            self.dimension, self.degree
                        )));
                    }
                }
                _ => {
                    if key.len() != self.degree {
                        return Err(ChaosError::InvalidDegree(format!(
                            "index tuple {key:?} has length {}, expected {}",
                            key.len(),
                            self.degree
                        )));
                    }
                    if key.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(ChaosError::InvalidParameter(format!(
                            "index tuple {key:?} must be strictly increasing (no diagonal terms)"
                        )));
                    }
                    if key.iter().any(|&i| i == 0 || i > self.dimension) {
                        return Err(ChaosError::IndexOutOfRange(format!(
                            "index tuple {key:?} outside 1..={}",
                            self.dimension
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `int F^2 d mu` on the untruncated model. Poisson uses intensity 1.
    pub fn norm_sq(&self) -> Rational {
        self.coefficients
            .iter()
            .map(|(key, a)| a * a * self.basis_norm_sq(key))
            .sum()
    }

    fn basis_norm_sq(&self, key: &[usize]) -> Rational {
        match (self.model, self.hermite) {
            (ModelTag::Ou, true) => key
                .iter()
                .map(|&k| Rational::from_integer(factorial(k)))
                .product(),
            (ModelTag::Poisson, _) => Rational::from_integer(factorial(self.degree)),
            _ => Rational::one(),
        }
    }

    /// Coefficients relative to the orthonormal basis, as exact
    /// `rational * sqrt(integer)` scalars.
    pub fn orthonormal_coefficients(&self) -> BTreeMap<Vec<usize>, ScaledSqrt> {
        self.coefficients
            .iter()
            .map(|(key, a)| {
                let n = self.basis_norm_sq(key);
                let radicand: BigUint = n.to_integer().magnitude().clone();
                (key.clone(), ScaledSqrt::new(a.clone(), radicand))
            })
            .collect()
    }

    /// Scales all coefficients so that `norm_sq() == 1`, when the required
    /// factor is rational. Returns whether it succeeded.
    pub fn try_normalize(&mut self) -> bool {
        match exact_sqrt(&self.norm_sq()) {
            Some(s) if !s.is_zero() => {
                for v in self.coefficients.values_mut() {
                    *v = &*v / &s;
                }
                true
            }
            _ => false,
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for v in out.coefficients.values_mut() {
            *v = &*v * c;
        }
        out
    }

    /// Materializes with the default Poisson intensity 1.
    pub fn materialize(&self) -> Result<Materialized> {
        match self.model {
            ModelTag::Cube => {
                let cube = Cube::new(self.dimension)?;
                let f = self.materialize_cube(&cube)?;
                Ok(Materialized::Cube(cube, f))
            }
            ModelTag::Ou => {
                let ou = OrnsteinUhlenbeck::new(self.dimension)?;
                let f = self.materialize_ou(&ou)?;
                Ok(Materialized::Ou(ou, f))
            }
            ModelTag::Poisson => {
                let model = Poisson::new(int(1))?;
                let f = self.materialize_poisson(&model)?;
                Ok(Materialized::Poisson(model, f))
            }
        }
    }

    pub fn materialize_cube(&self, cube: &Cube) -> Result<CubeFunction> {
        self.validate()?;
        self.expect_model(ModelTag::Cube, cube.dimension())?;
        let mut coeffs = vec![Rational::zero(); cube.points()];
        for (key, a) in &self.coefficients {
            let mask = key.iter().fold(0usize, |m, &i| m | 1 << (i - 1));
            coeffs[mask] = a.clone();
        }
        cube.from_walsh(&coeffs)
    }

    pub fn materialize_ou(&self, ou: &OrnsteinUhlenbeck) -> Result<PolyFunction> {
        self.validate()?;
        self.expect_model(ModelTag::Ou, ou.dimension())?;
        let mut terms = Vec::new();
        let mut out = PolyFunction::zero(self.dimension);
        for (key, a) in &self.coefficients {
            if self.hermite {
                let h = ou.hermite(key)?;
                out = ou.linear_combination(&[(int(1), &out), (a.clone(), &h)])?;
            } else {
                let mut e = vec![0u32; self.dimension];
                for &i in key {
                    e[i - 1] = 1;
                }
                terms.push((e, a.clone()));
            }
        }
        if !self.hermite {
            out = ou.from_terms(terms)?;
        }
        Ok(out)
    }

    pub fn materialize_poisson(&self, model: &Poisson) -> Result<PoissonFunction> {
        self.validate()?;
        self.expect_model(ModelTag::Poisson, 1)?;
        let a = &self.coefficients[&vec![self.degree]];
        model.scale(&model.charlier(self.degree)?, a)
    }

    fn expect_model(&self, tag: ModelTag, dimension: usize) -> Result<()> {
        if self.model != tag || self.dimension != dimension {
            return Err(ChaosError::ModelMismatch(format!(
                "spec for {} N={} materialized on {} N={}",
                self.model, self.dimension, tag, dimension
            )));
        }
        Ok(())
    }

    /// Parses the text format written by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| ChaosError::parse(1, "missing header `model,N,k`"))?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ChaosError::parse(hline, "header must be `model,N,k`"));
        }
        let (model, hermite) = match fields[0] {
            "ou-hermite" => (ModelTag::Ou, true),
            other => (
                other
                    .parse::<ModelTag>()
                    .map_err(|e| ChaosError::parse(hline, e.to_string()))?,
                false,
            ),
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| ChaosError::parse(hline, format!("not a natural number: `{s}`")))
        };
        let dimension = num(fields[1])?;
        let degree = num(fields[2])?;
        let mut coefficients = BTreeMap::new();
        for (line, body) in lines {
            let (idx, value) = body
                .split_once('\t')
                .ok_or_else(|| ChaosError::parse(line, "expected `indices<TAB>p/q`"))?;
            let key = idx
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| ChaosError::parse(line, format!("bad index `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let value =
                parse_rational(value).map_err(|e| ChaosError::parse(line, e.to_string()))?;
            if coefficients.insert(key, value).is_some() {
                return Err(ChaosError::parse(line, "duplicate index tuple"));
            }
        }
        let spec = Self {
            model,
            dimension,
            degree,
            coefficients,
            hermite,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ChaosSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.hermite {
            "ou-hermite".to_string()
        } else {
            self.model.to_string()
        };
        writeln!(f, "{tag},{},{}", self.dimension, self.degree)?;
        for (key, a) in &self.coefficients {
            let idx: Vec<String> = key.iter().map(usize::to_string).collect();
            writeln!(f, "{}\t{}", idx.join(","), fmt_rational(a))?;
        }
        Ok(())
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Seeded random chaos of degree `k` in dimension `N`, normalized so that
/// `int F^2 d mu = 1` exactly.
///
/// A rational point on the unit sphere is obtained by inverse stereographic
/// projection of a random rational vector, which keeps the normalization
/// exact without irrational scalars. Poisson chaos is `+-C_k / sqrt(k!)`
/// and stays unnormalized unless `k!` is a square.
pub fn random_chaos(model: ModelTag, n: usize, k: usize, seed: u64) -> Result<ChaosSpec> {
    if k == 0 {
        return Err(ChaosError::InvalidDegree("chaos degree must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if model == ModelTag::Poisson {
        if n != 1 {
            return Err(ChaosError::InvalidParameter(
                "Poisson chaos is one-dimensional".into(),
            ));
        }
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        let mut spec = ChaosSpec::new(model, 1, k, BTreeMap::from([(vec![k], int(sign))]))?;
        spec.try_normalize();
        return Ok(spec);
    }
    if k > n {
        return Err(ChaosError::InvalidDegree(format!(
            "degree {k} exceeds dimension {n}"
        )));
    }
    let tuples = combinations(n, k);
    let d = tuples.len();
    // t_i = a_i / q with a_i in [-3, 3] keeps |t|^2 near 1 on average.
    let q = 2 * (d as f64).sqrt().ceil() as i64;
    let t: Vec<Rational> = (0..d - 1)
        .map(|_| Rational::new(rng.random_range(-3i64..=3).into(), q.into()))
        .collect();
    let t2: Rational = t.iter().map(|v| v * v).sum();
    let denom = &t2 + Rational::one();
    let special = rng.random_range(0..d);
    let sign = if rng.random_bool(0.5) { int(1) } else { int(-1) };
    let mut coefficients = BTreeMap::new();
    let mut free = t.iter();
    for (i, key) in tuples.into_iter().enumerate() {
        let v = if i == special {
            (&t2 - Rational::one()) / &denom
        } else {
            int(2) * free.next().expect("d - 1 free coordinates") / &denom
        };
        if !v.is_zero() {
            coefficients.insert(key, &sign * v);
        }
    }
    if coefficients.is_empty() {
        // Only possible when every draw vanished and |t| = 1; fall back.
        coefficients.insert((1..=k).collect(), sign);
    }
    ChaosSpec::new(model, n, k, coefficients)
}
