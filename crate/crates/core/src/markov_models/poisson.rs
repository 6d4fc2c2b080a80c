//! The one-dimensional Poisson(theta) birth-death operator
//! `L f(j) = theta D f(j+1) - j D f(j)`, with `D f(j) = f(j) - f(j-1)`,
//! on the truncated lattice `{0, ..., M}`.
//!
//! Truncation is tracked per function: `valid_len` counts the leading
//! lattice points whose values agree with the untruncated model. Every
//! application of `L` needs `f(j+1)`, so it shrinks the valid region by one.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Dump, Integral, MarkovModel, ModelTag};
use crate::error::{ChaosError, Result};
use crate::rational::{fmt_rational, from_usize, Rational};
use crate::spectrum_polys::RationalPoly;

/// Integrals whose discarded Poisson mass exceeds this are flagged unreliable.
const RELIABLE_TAIL: f64 = 1e-6;

/// Safety factor applied to the tail-mass error estimate.
const TAIL_SAFETY: i64 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Poisson {
    theta: Rational,
    truncation: usize,
    /// Unnormalized weights `theta^j / j!`.
    weights: Vec<Rational>,
    total: Rational,
    /// Upper bound on `sum_{j > M} theta^j / j!`, relative to `total`.
    truncation_tail: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonFunction {
    truncation: usize,
    theta: Rational,
    values: Vec<Rational>,
    valid_len: usize,
}

impl PoissonFunction {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, j: usize) -> Option<&Rational> {
        self.values.get(j)
    }

    /// Number of leading lattice points not affected by the truncation.
    pub fn valid_len(&self) -> usize {
        self.valid_len
    }

    pub fn valid_values(&self) -> &[Rational] {
        &self.values[..self.valid_len]
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Monic Charlier polynomial `C_k` for parameter `theta`, from
/// `C_{n+1} = (X - n - theta) C_n - n theta C_{n-1}`.
pub fn charlier_polynomial(theta: &Rational, k: usize) -> RationalPoly {
    let mut prev = RationalPoly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = RationalPoly::linear_factor(theta);
    for n in 1..k {
        let nr = from_usize(n);
        let next = &(&RationalPoly::linear_factor(&(&nr + theta)) * &cur) - &prev.scale(&(nr * theta));
        prev = cur;
        cur = next;
    }
    cur
}

/// Smallest `M` whose relative tail mass is below `1e-30`.
fn default_truncation(theta: f64) -> usize {
    let ln_theta = theta.ln();
    let mut ln_term = 0.0f64; // ln(theta^j / j!) at j = 0
    let mut ln_partial = 0.0f64;
    let mut j = 0usize;
    loop {
        let next = ln_term + ln_theta - ((j + 1) as f64).ln();
        // Tail beyond j is at most term_{j+1} / (1 - theta/(j+2)).
        let ratio = theta / (j + 2) as f64;
        if ratio < 1.0 {
            let ln_tail = next - (1.0 - ratio).ln();
            if ln_tail - ln_partial < -30.0 * std::f64::consts::LN_10 {
                return j.max(2);
            }
        }
        j += 1;
        ln_term = next;
        ln_partial = ln_partial.max(ln_term) + (-(ln_partial - ln_term).abs()).exp().ln_1p();
    }
}

impl Poisson {
    /// Poisson(theta) with the default truncation.
    pub fn new(theta: Rational) -> Result<Self> {
        if !theta.is_positive() {
            return Err(ChaosError::InvalidParameter(format!(
                "Poisson intensity must be positive, got {}",
                fmt_rational(&theta)
            )));
        }
        let m = default_truncation(theta.to_f64().unwrap_or(f64::MAX));
        Self::with_truncation(theta, m)
    }

    pub fn with_truncation(theta: Rational, truncation: usize) -> Result<Self> {
        if !theta.is_positive() {
            return Err(ChaosError::InvalidParameter(format!(
                "Poisson intensity must be positive, got {}",
                fmt_rational(&theta)
            )));
        }
        if truncation < 2 {
            return Err(ChaosError::InvalidParameter(
                "Poisson truncation must be at least 2".into(),
            ));
        }
        let mut weights = Vec::with_capacity(truncation + 1);
        let mut w = Rational::one();
        for j in 0..=truncation {
            if j > 0 {
                w = w * &theta / from_usize(j);
            }
            weights.push(w.clone());
        }
        let total: Rational = weights.iter().sum();
        let next = &w * &theta / from_usize(truncation + 1);
        let ratio = &theta / from_usize(truncation + 2);
        let truncation_tail = if ratio < Rational::one() {
            next / (Rational::one() - ratio) / &total
        } else {
            // Geometric bound unavailable; everything beyond M is suspect.
            Rational::one()
        };
        Ok(Self {
            theta,
            truncation,
            weights,
            total,
            truncation_tail,
        })
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Relative tail-mass bound of the lattice truncation itself.
    pub fn truncation_tail(&self) -> &Rational {
        &self.truncation_tail
    }

    pub fn function(&self, values: Vec<Rational>) -> Result<PoissonFunction> {
        if values.len() != self.truncation + 1 {
            return Err(ChaosError::ModelMismatch(format!(
                "Poisson lattice has {} points, got {} values",
                self.truncation + 1,
                values.len()
            )));
        }
        Ok(PoissonFunction {
            truncation: self.truncation,
            theta: self.theta.clone(),
            valid_len: values.len(),
            values,
        })
    }

    pub fn from_fn(&self, f: impl Fn(usize) -> Rational) -> PoissonFunction {
        let values = (0..=self.truncation).map(f).collect();
        self.function(values).expect("length matches by construction")
    }

    /// Evaluates a univariate polynomial at every lattice point.
    pub fn from_poly(&self, p: &RationalPoly) -> PoissonFunction {
        self.from_fn(|j| p.eval(&from_usize(j)))
    }

    /// The monic Charlier eigenfunction of degree `k`.
    pub fn charlier(&self, k: usize) -> Result<PoissonFunction> {
        if k > self.truncation {
            return Err(ChaosError::IndexOutOfRange(format!(
                "Charlier degree {k} exceeds truncation {}",
                self.truncation
            )));
        }
        Ok(self.from_poly(&charlier_polynomial(&self.theta, k)))
    }

    /// `int C_k^2 d mu = k! theta^k` on the untruncated lattice.
    pub fn charlier_norm_sq(&self, k: usize) -> Rational {
        let mut out = Rational::from_integer(crate::rational::factorial(k));
        for _ in 0..k {
            out *= &self.theta;
        }
        out
    }

    /// `D f(j) = f(j) - f(j-1)` with `f(-1) = 0`.
    pub fn difference(&self, f: &PoissonFunction) -> Result<PoissonFunction> {
        self.check(f)?;
        let values = (0..f.values.len())
            .map(|j| {
                if j == 0 {
                    f.values[0].clone()
                } else {
                    &f.values[j] - &f.values[j - 1]
                }
            })
            .collect();
        Ok(PoissonFunction {
            values,
            ..f.clone()
        })
    }

    fn combine_valid(&self, fs: &[&PoissonFunction]) -> usize {
        fs.iter().map(|f| f.valid_len).min().unwrap_or(self.truncation + 1)
    }
}

impl MarkovModel for Poisson {
    type Function = PoissonFunction;

    fn tag(&self) -> ModelTag {
        ModelTag::Poisson
    }

    fn dimension(&self) -> usize {
        1
    }

    fn is_diffusion(&self) -> bool {
        false
    }

    fn check(&self, f: &PoissonFunction) -> Result<()> {
        if f.truncation != self.truncation || f.theta != self.theta {
            return Err(ChaosError::ModelMismatch(format!(
                "function on Poisson(theta={}, M={}) used with Poisson(theta={}, M={})",
                fmt_rational(&f.theta),
                f.truncation,
                fmt_rational(&self.theta),
                self.truncation
            )));
        }
        Ok(())
    }

    fn apply_l(&self, f: &PoissonFunction) -> Result<PoissonFunction> {
        self.check(f)?;
        let m = self.truncation;
        let values = (0..=m)
            .map(|j| {
                let fj = &f.values[j];
                let up = if j < m {
                    &self.theta * (&f.values[j + 1] - fj)
                } else {
                    // f(M+1) is unknown; the slot is marked invalid below.
                    Rational::zero()
                };
                let down = if j > 0 {
                    from_usize(j) * (fj - &f.values[j - 1])
                } else {
                    Rational::zero()
                };
                up - down
            })
            .collect();
        Ok(PoissonFunction {
            values,
            valid_len: f.valid_len.saturating_sub(1).min(m),
            ..f.clone()
        })
    }

    fn multiply(&self, f: &PoissonFunction, g: &PoissonFunction) -> Result<PoissonFunction> {
        self.check(f)?;
        self.check(g)?;
        Ok(PoissonFunction {
            values: f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect(),
            valid_len: self.combine_valid(&[f, g]),
            ..f.clone()
        })
    }

    fn integrate(&self, f: &PoissonFunction) -> Result<Integral> {
        self.check(f)?;
        let valid = f.valid_len;
        let mut acc = Rational::zero();
        let mut inside = Rational::zero();
        for j in 0..valid {
            acc += &f.values[j] * &self.weights[j];
            inside += &self.weights[j];
        }
        let value = acc / &self.total;
        let outside = Rational::one() - inside / &self.total;
        let tail = outside + &self.truncation_tail;
        let sup = f.values[..valid]
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero);
        let error_bound = if tail.is_zero() || sup.is_zero() {
            Rational::zero()
        } else {
            tail.clone() * sup * Rational::from_integer(BigInt::from(TAIL_SAFETY))
        };
        let reliable = tail.to_f64().map(|t| t <= RELIABLE_TAIL).unwrap_or(false);
        Ok(Integral {
            value,
            error_bound,
            reliable,
        })
    }

    fn constant(&self, c: Rational) -> PoissonFunction {
        self.from_fn(|_| c.clone())
    }

    fn linear_combination(
        &self,
        terms: &[(Rational, &PoissonFunction)],
    ) -> Result<PoissonFunction> {
        let mut values = vec![Rational::zero(); self.truncation + 1];
        let mut valid = self.truncation + 1;
        for (c, f) in terms {
            self.check(f)?;
            valid = valid.min(f.valid_len);
            if c.is_zero() {
                continue;
            }
            for (acc, v) in values.iter_mut().zip(&f.values) {
                *acc += c * v;
            }
        }
        let mut out = self.function(values)?;
        out.valid_len = valid;
        Ok(out)
    }

    fn is_zero(&self, f: &PoissonFunction) -> bool {
        f.valid_values().iter().all(Zero::is_zero)
    }

    fn equal(&self, f: &PoissonFunction, g: &PoissonFunction) -> bool {
        let n = f.valid_len.min(g.valid_len);
        f.values[..n] == g.values[..n]
    }

    fn proportionality(&self, f: &PoissonFunction, g: &PoissonFunction) -> Option<Rational> {
        let n = f.valid_len.min(g.valid_len);
        let pivot = g.values[..n].iter().position(|v| !v.is_zero())?;
        let c = &f.values[pivot] / &g.values[pivot];
        (0..n)
            .all(|j| f.values[j] == &c * &g.values[j])
            .then_some(c)
    }

    fn constant_value(&self, f: &PoissonFunction) -> Option<Rational> {
        let vals = f.valid_values();
        let first = vals.first()?;
        vals.iter().all(|v| v == first).then(|| first.clone())
    }

    fn pointwise_min(&self, f: &PoissonFunction) -> Option<Rational> {
        f.valid_values().iter().min().cloned()
    }
}

impl Dump for PoissonFunction {
    fn dump(&self) -> String {
        let mut out = String::new();
        for (j, v) in self.valid_values().iter().enumerate() {
            out.push_str(&format!("{j}\t{}\n", fmt_rational(v)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn charlier_two_at_unit_intensity() {
        assert_eq!(charlier_polynomial(&int(1), 2).to_string(), "X^2 - 3X + 1");
    }

    #[test]
    fn centered_first_charlier_by_substitution() {
        let model = Poisson::with_truncation(int(1), 30).unwrap();
        let f = model.from_fn(|j| int(j as i64 - 1));
        let lf = model.apply_l(&f).unwrap();
        assert_eq!(lf.valid_len(), 30);
        for j in 0..30usize {
            // theta (f(j+1) - f(j)) - j (f(j) - f(j-1)) = 1 - j
            assert_eq!(lf.values()[j], int(1 - j as i64));
        }
    }

    #[test]
    fn charlier_eigen_relation_interior() {
        let model = Poisson::with_truncation(ratio(3, 2), 40).unwrap();
        for k in 0..6 {
            let c = model.charlier(k).unwrap();
            let lc = model.apply_l(&c).unwrap();
            let want = model.scale(&c, &-from_usize(k)).unwrap();
            assert!(model.equal(&lc, &want), "degree {k}");
        }
    }

    #[test]
    fn integrals_and_tail() {
        let model = Poisson::new(int(1)).unwrap();
        let one = model.constant(int(1));
        let i = model.integrate(&one).unwrap();
        assert_eq!(i.value, int(1));
        assert!(i.reliable);
        // Mean of j is theta up to the truncation tail.
        let j = model.from_fn(from_usize);
        let mean = model.integrate(&j).unwrap();
        let diff = (&mean.value - int(1)).abs();
        assert!(diff <= mean.error_bound);
        assert!(crate::rational::to_f64(model.truncation_tail()) < 1e-30);
    }

    #[test]
    fn charlier_orthogonality() {
        let theta = ratio(1, 2);
        let model = Poisson::new(theta).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let fa = model.charlier(a).unwrap();
                let fb = model.charlier(b).unwrap();
                let ip = model.integrate(&model.multiply(&fa, &fb).unwrap()).unwrap();
                let want = if a == b {
                    model.charlier_norm_sq(a)
                } else {
                    int(0)
                };
                assert!((&ip.value - want).abs() <= ip.error_bound);
            }
        }
    }

    #[test]
    fn guards() {
        assert!(Poisson::new(int(0)).is_err());
        assert!(Poisson::with_truncation(int(1), 1).is_err());
        let a = Poisson::with_truncation(int(1), 10).unwrap();
        let b = Poisson::with_truncation(int(1), 11).unwrap();
        assert!(b.apply_l(&a.constant(int(1))).is_err());
        assert!(a.charlier(11).is_err());
    }
}
