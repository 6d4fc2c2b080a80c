//! Polynomials on `R^N` under the standard Gaussian, with the
//! Ornstein-Uhlenbeck generator `L f = Lap f - x . grad f`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Dump, Integral, MarkovModel, ModelTag};
use crate::error::{ChaosError, Result};
use crate::rational::{double_factorial_odd, fmt_rational, to_f64, CompensatedSum, Rational};
use crate::spectrum_polys::RationalPoly;

/// Multi-exponent of a monomial, one entry per coordinate.
pub type Exponents = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrnsteinUhlenbeck {
    n: usize,
}

/// Sparse polynomial in `N` variables; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFunction {
    n: usize,
    terms: BTreeMap<Exponents, Rational>,
}

impl PolyFunction {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, exponents: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Converts to floating point for fast repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let factors = e
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0)
                        .map(|(i, &p)| (i, p as i32))
                        .collect();
                    (to_f64(c), factors)
                })
                .collect(),
        }
    }
}

/// Floating-point form of a [`PolyFunction`], evaluated with compensated
/// summation over monomials.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    n: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut sum = CompensatedSum::default();
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, p) in factors {
                t *= x[i].powi(p);
            }
            sum.add(t);
        }
        sum.value()
    }
}

/// Monic probabilists' Hermite polynomial `He_k`.
pub fn hermite_1d(k: usize) -> RationalPoly {
    let mut prev = RationalPoly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = RationalPoly::x();
    for j in 1..k {
        let next = &(&RationalPoly::x() * &cur) - &prev.scale(&Rational::from_integer(j.into()));
        prev = cur;
        cur = next;
    }
    cur
}

impl OrnsteinUhlenbeck {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ChaosError::InvalidParameter(
                "Ornstein-Uhlenbeck dimension must be at least 1".into(),
            ));
        }
        Ok(Self { n })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(ChaosError::IndexOutOfRange(format!(
                "coordinate {i} in dimension {}",
                self.n
            )));
        }
        Ok(())
    }

    /// `x_i` with 0-based `i`.
    pub fn variable(&self, i: usize) -> Result<PolyFunction> {
        self.check_index(i)?;
        let mut e = vec![0; self.n];
        e[i] = 1;
        Ok(self.monomial(e, Rational::one()))
    }

    pub fn monomial(&self, exponents: Exponents, c: Rational) -> PolyFunction {
        assert_eq!(exponents.len(), self.n, "exponent length must equal dimension");
        let mut f = PolyFunction::zero(self.n);
        f.add_term(exponents, c);
        f
    }

    pub fn from_terms(
        &self,
        terms: impl IntoIterator<Item = (Exponents, Rational)>,
    ) -> Result<PolyFunction> {
        let mut f = PolyFunction::zero(self.n);
        for (e, c) in terms {
            if e.len() != self.n {
                return Err(ChaosError::ModelMismatch(format!(
                    "exponent vector of length {} in dimension {}",
                    e.len(),
                    self.n
                )));
            }
            f.add_term(e, c);
        }
        Ok(f)
    }

    /// `phi(f)` for a univariate polynomial `phi`.
    pub fn compose(&self, phi: &RationalPoly, f: &PolyFunction) -> Result<PolyFunction> {
        self.check(f)?;
        let mut acc = PolyFunction::zero(self.n);
        for c in phi.dense().into_iter().rev() {
            acc = self.multiply(&acc, f)?;
            acc.add_term(vec![0; self.n], c);
        }
        Ok(acc)
    }

    /// `H_k(x) = prod_i He_{k_i}(x_i)`, monic in each coordinate.
    pub fn hermite(&self, multi_index: &[usize]) -> Result<PolyFunction> {
        if multi_index.len() != self.n {
            return Err(ChaosError::IndexOutOfRange(format!(
                "Hermite multi-index of length {} in dimension {}",
                multi_index.len(),
                self.n
            )));
        }
        let mut out = self.constant(Rational::one());
        for (i, &k) in multi_index.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let factor = self.compose(&hermite_1d(k), &self.variable(i)?)?;
            out = self.multiply(&out, &factor)?;
        }
        Ok(out)
    }

    /// `d f / d x_i`.
    pub fn partial(&self, f: &PolyFunction, i: usize) -> Result<PolyFunction> {
        self.check(f)?;
        self.check_index(i)?;
        let mut out = PolyFunction::zero(self.n);
        for (e, c) in &f.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[i].into()));
        }
        Ok(out)
    }

    /// `|grad f|^2`, assembled as a sum of squares.
    pub fn gradient_sq(&self, f: &PolyFunction) -> Result<PolyFunction> {
        let mut out = PolyFunction::zero(self.n);
        for i in 0..self.n {
            let d = self.partial(f, i)?;
            out = self.add(&out, &self.multiply(&d, &d)?)?;
        }
        Ok(out)
    }

    /// `|Hess f|^2 = sum_{i,j} (d_i d_j f)^2`.
    pub fn hessian_sq(&self, f: &PolyFunction) -> Result<PolyFunction> {
        let mut out = PolyFunction::zero(self.n);
        for i in 0..self.n {
            let di = self.partial(f, i)?;
            for j in 0..self.n {
                let dij = self.partial(&di, j)?;
                out = self.add(&out, &self.multiply(&dij, &dij)?)?;
            }
        }
        Ok(out)
    }

    /// `|grad^k f|^2`, the squared norm of the `k`-th derivative tensor.
    pub fn derivative_tensor_sq(&self, f: &PolyFunction, order: usize) -> Result<PolyFunction> {
        let mut layer = vec![f.clone()];
        for _ in 0..order {
            let mut next = Vec::with_capacity(layer.len() * self.n);
            for g in &layer {
                for i in 0..self.n {
                    next.push(self.partial(g, i)?);
                }
            }
            layer = next;
        }
        let mut out = PolyFunction::zero(self.n);
        for g in &layer {
            out = self.add(&out, &self.multiply(g, g)?)?;
        }
        Ok(out)
    }

    pub fn eval(&self, f: &PolyFunction, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &f.terms {
            let mut t = c.clone();
            for (xi, &p) in x.iter().zip(e) {
                for _ in 0..p {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }
}

impl MarkovModel for OrnsteinUhlenbeck {
    type Function = PolyFunction;

    fn tag(&self) -> ModelTag {
        ModelTag::Ou
    }

    fn dimension(&self) -> usize {
        self.n
    }

    fn is_diffusion(&self) -> bool {
        true
    }

    fn check(&self, f: &PolyFunction) -> Result<()> {
        if f.n != self.n {
            return Err(ChaosError::ModelMismatch(format!(
                "polynomial in {} variables used with Ornstein-Uhlenbeck N={}",
                f.n, self.n
            )));
        }
        Ok(())
    }

    fn apply_l(&self, f: &PolyFunction) -> Result<PolyFunction> {
        self.check(f)?;
        let mut out = PolyFunction::zero(self.n);
        for (e, c) in &f.terms {
            let degree: u32 = e.iter().sum();
            out.add_term(e.clone(), -(c * Rational::from_integer(degree.into())));
            for i in 0..self.n {
                if e[i] >= 2 {
                    let mut e2 = e.clone();
                    e2[i] -= 2;
                    let factor = BigInt::from(e[i]) * BigInt::from(e[i] - 1);
                    out.add_term(e2, c * Rational::from_integer(factor));
                }
            }
        }
        Ok(out)
    }

    fn multiply(&self, f: &PolyFunction, g: &PolyFunction) -> Result<PolyFunction> {
        self.check(f)?;
        self.check(g)?;
        let mut out = PolyFunction::zero(self.n);
        for (ea, ca) in &f.terms {
            for (eb, cb) in &g.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    fn integrate(&self, f: &PolyFunction) -> Result<Integral> {
        self.check(f)?;
        let mut acc = Rational::zero();
        'terms: for (e, c) in &f.terms {
            let mut moment = BigInt::one();
            for &p in e {
                if p % 2 == 1 {
                    continue 'terms;
                }
                moment *= double_factorial_odd(p as usize / 2);
            }
            acc += c * Rational::from_integer(moment);
        }
        Ok(Integral::exact(acc))
    }

    fn constant(&self, c: Rational) -> PolyFunction {
        self.monomial(vec![0; self.n], c)
    }

    fn linear_combination(&self, terms: &[(Rational, &PolyFunction)]) -> Result<PolyFunction> {
        let mut out = PolyFunction::zero(self.n);
        for (c, f) in terms {
            self.check(f)?;
            if c.is_zero() {
                continue;
            }
            for (e, v) in &f.terms {
                out.add_term(e.clone(), c * v);
            }
        }
        Ok(out)
    }

    fn is_zero(&self, f: &PolyFunction) -> bool {
        f.is_zero()
    }

    fn equal(&self, f: &PolyFunction, g: &PolyFunction) -> bool {
        f == g
    }

    fn proportionality(&self, f: &PolyFunction, g: &PolyFunction) -> Option<Rational> {
        let (e, gv) = g.terms.iter().next()?;
        let c = f.coefficient(e) / gv;
        let scaled = self.scale(g, &c).ok()?;
        (scaled == *f).then_some(c)
    }

    fn constant_value(&self, f: &PolyFunction) -> Option<Rational> {
        match f.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = f.terms.iter().next()?;
                e.iter().all(|&p| p == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn pointwise_min(&self, _f: &PolyFunction) -> Option<Rational> {
        None
    }
}

impl Dump for PolyFunction {
    fn dump(&self) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            let idx: Vec<String> = e.iter().map(u32::to_string).collect();
            out.push_str(&format!("{}\t{}\n", idx.join(","), fmt_rational(c)));
        }
        out
    }
}
