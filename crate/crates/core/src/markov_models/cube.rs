//! The discrete cube `{-1,+1}^N` under the uniform measure.
//!
//! Point `x` is stored at the index whose bit `i` is set exactly when
//! `x_{i+1} = -1`. Coordinates are 0-based in this API (`coordinate(0)` is
//! `x_1`).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Dump, Integral, MarkovModel, ModelTag};
use crate::error::{ChaosError, Result};
use crate::rational::{fmt_rational, Rational};

/// Largest supported dimension; `2^N` values are stored densely.
pub const MAX_CUBE_DIM: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cube {
    n: usize,
}

/// A function on the cube as `numer[x] / denom`, kept in lowest terms with a
/// positive common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeFunction {
    n: usize,
    numer: Vec<BigInt>,
    denom: BigInt,
}

impl CubeFunction {
    fn from_parts(n: usize, mut numer: Vec<BigInt>, mut denom: BigInt) -> Self {
        if denom.is_negative() {
            denom = -denom;
            numer.iter_mut().for_each(|v| *v = -&*v);
        }
        let mut g = denom.clone();
        for v in &numer {
            if g.is_one() {
                break;
            }
            g = g.gcd(v);
        }
        if !g.is_one() && !g.is_zero() {
            numer.iter_mut().for_each(|v| *v /= &g);
            denom /= &g;
        }
        Self { n, numer, denom }
    }

    pub fn from_values(n: usize, values: &[Rational]) -> Self {
        let denom = values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let numer = values
            .iter()
            .map(|v| v.numer() * (&denom / v.denom()))
            .collect();
        Self::from_parts(n, numer, denom)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.numer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn value(&self, index: usize) -> Rational {
        Rational::new(self.numer[index].clone(), self.denom.clone())
    }

    pub fn values(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    pub fn value_f64(&self, index: usize) -> f64 {
        crate::rational::to_f64(&self.value(index))
    }

    /// Exact Walsh coefficients `<f, W_A>`, indexed by the subset bitmask `A`.
    pub fn walsh_coefficients(&self) -> Vec<Rational> {
        let mut a = self.numer.clone();
        fwht(&mut a);
        let scale = &self.denom << self.n;
        a.into_iter()
            .map(|v| Rational::new(v, scale.clone()))
            .collect()
    }
}

/// In-place unnormalized Walsh-Hadamard transform. With the bit convention
/// above, `W_A(x) = (-1)^{popcount(A & x)}`, so the transform of `f` at `A`
/// is `sum_x f(x) W_A(x)`.
fn fwht(a: &mut [BigInt]) {
    let mut h = 1;
    while h < a.len() {
        for block in (0..a.len()).step_by(2 * h) {
            for i in block..block + h {
                let u = a[i].clone();
                let v = a[i + h].clone();
                a[i] = &u + &v;
                a[i + h] = u - v;
            }
        }
        h *= 2;
    }
}

impl Cube {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_CUBE_DIM {
            return Err(ChaosError::InvalidParameter(format!(
                "cube dimension {n} exceeds {MAX_CUBE_DIM}"
            )));
        }
        Ok(Self { n })
    }

    pub fn points(&self) -> usize {
        1 << self.n
    }

    pub fn function(&self, values: &[Rational]) -> Result<CubeFunction> {
        if values.len() != self.points() {
            return Err(ChaosError::ModelMismatch(format!(
                "cube N={} needs {} values, got {}",
                self.n,
                self.points(),
                values.len()
            )));
        }
        Ok(CubeFunction::from_values(self.n, values))
    }

    /// Builds `f` from integer-valued point evaluations.
    pub fn from_fn(&self, f: impl Fn(usize) -> Rational) -> CubeFunction {
        let values: Vec<Rational> = (0..self.points()).map(f).collect();
        CubeFunction::from_values(self.n, &values)
    }

    /// Value of coordinate `i` (0-based) at point index `x`.
    pub fn coordinate_at(x: usize, i: usize) -> i64 {
        if x >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn coordinate(&self, i: usize) -> Result<CubeFunction> {
        self.walsh(&[i])
    }

    /// `W_A(x) = prod_{i in A} x_i`, with 0-based coordinates.
    pub fn walsh(&self, subset: &[usize]) -> Result<CubeFunction> {
        let mut mask = 0usize;
        for &i in subset {
            if i >= self.n {
                return Err(ChaosError::IndexOutOfRange(format!(
                    "coordinate {i} on cube of dimension {}",
                    self.n
                )));
            }
            if mask >> i & 1 == 1 {
                return Err(ChaosError::IndexOutOfRange(format!(
                    "repeated coordinate {i} in Walsh subset"
                )));
            }
            mask |= 1 << i;
        }
        Ok(self.walsh_mask(mask))
    }

    pub fn walsh_mask(&self, mask: usize) -> CubeFunction {
        let numer = (0..self.points())
            .map(|x| {
                if (mask & x).count_ones().is_multiple_of(2) {
                    BigInt::one()
                } else {
                    -BigInt::one()
                }
            })
            .collect();
        CubeFunction {
            n: self.n,
            numer,
            denom: BigInt::one(),
        }
    }

    /// Inverse of [`CubeFunction::walsh_coefficients`].
    pub fn from_walsh(&self, coefficients: &[Rational]) -> Result<CubeFunction> {
        let base = self.function(coefficients)?;
        let mut a = base.numer;
        fwht(&mut a);
        Ok(CubeFunction::from_parts(self.n, a, base.denom))
    }

    /// `D_i f(x) = f(tau_i x) - f(x)`.
    pub fn difference(&self, f: &CubeFunction, i: usize) -> Result<CubeFunction> {
        self.check(f)?;
        if i >= self.n {
            return Err(ChaosError::IndexOutOfRange(format!("coordinate {i}")));
        }
        let numer = (0..self.points())
            .map(|x| &f.numer[x ^ (1 << i)] - &f.numer[x])
            .collect();
        Ok(CubeFunction::from_parts(self.n, numer, f.denom.clone()))
    }

    /// Dense matrix of `L` in the point basis, row `x` holding `(L f)(x)`
    /// coefficients.
    pub fn operator_matrix(&self) -> Vec<Vec<Rational>> {
        let p = self.points();
        let half = Rational::new(1.into(), 2.into());
        let diag = -Rational::new(BigInt::from(self.n), 2.into());
        (0..p)
            .map(|x| {
                let mut row = vec![Rational::zero(); p];
                row[x] = diag.clone();
                for i in 0..self.n {
                    row[x ^ (1 << i)] = half.clone();
                }
                row
            })
            .collect()
    }
}

impl MarkovModel for Cube {
    type Function = CubeFunction;

    fn tag(&self) -> ModelTag {
        ModelTag::Cube
    }

    fn dimension(&self) -> usize {
        self.n
    }

    fn is_diffusion(&self) -> bool {
        false
    }

    fn check(&self, f: &CubeFunction) -> Result<()> {
        if f.n != self.n || f.numer.len() != self.points() {
            return Err(ChaosError::ModelMismatch(format!(
                "function on cube N={} used with cube N={}",
                f.n, self.n
            )));
        }
        Ok(())
    }

    fn apply_l(&self, f: &CubeFunction) -> Result<CubeFunction> {
        self.check(f)?;
        let n = BigInt::from(self.n);
        let numer = (0..self.points())
            .map(|x| {
                let mut s = -(&n * &f.numer[x]);
                for i in 0..self.n {
                    s += &f.numer[x ^ (1 << i)];
                }
                s
            })
            .collect();
        Ok(CubeFunction::from_parts(self.n, numer, &f.denom * 2))
    }

    fn multiply(&self, f: &CubeFunction, g: &CubeFunction) -> Result<CubeFunction> {
        self.check(f)?;
        self.check(g)?;
        let numer = f.numer.iter().zip(&g.numer).map(|(a, b)| a * b).collect();
        Ok(CubeFunction::from_parts(self.n, numer, &f.denom * &g.denom))
    }

    fn integrate(&self, f: &CubeFunction) -> Result<Integral> {
        self.check(f)?;
        let total: BigInt = f.numer.iter().sum();
        Ok(Integral::exact(Rational::new(total, &f.denom << self.n)))
    }

    fn constant(&self, c: Rational) -> CubeFunction {
        CubeFunction::from_parts(
            self.n,
            vec![c.numer().clone(); self.points()],
            c.denom().clone(),
        )
    }

    fn linear_combination(&self, terms: &[(Rational, &CubeFunction)]) -> Result<CubeFunction> {
        for (_, f) in terms {
            self.check(f)?;
        }
        // Common denominator of coefficient/denominator ratios.
        let denom = terms
            .iter()
            .fold(BigInt::one(), |acc, (c, f)| acc.lcm(&(c.denom() * &f.denom)));
        let mut numer = vec![BigInt::zero(); self.points()];
        for (c, f) in terms {
            if c.is_zero() {
                continue;
            }
            let factor = c.numer() * (&denom / (c.denom() * &f.denom));
            for (acc, v) in numer.iter_mut().zip(&f.numer) {
                *acc += &factor * v;
            }
        }
        Ok(CubeFunction::from_parts(self.n, numer, denom))
    }

    fn is_zero(&self, f: &CubeFunction) -> bool {
        f.numer.iter().all(Zero::is_zero)
    }

    fn equal(&self, f: &CubeFunction, g: &CubeFunction) -> bool {
        // Both are in lowest terms, so representation equality suffices.
        f == g
    }

    fn proportionality(&self, f: &CubeFunction, g: &CubeFunction) -> Option<Rational> {
        let pivot = g.numer.iter().position(|v| !v.is_zero())?;
        let c = f.value(pivot) / g.value(pivot);
        let scaled = self.scale(g, &c).ok()?;
        self.equal(f, &scaled).then_some(c)
    }

    fn constant_value(&self, f: &CubeFunction) -> Option<Rational> {
        let first = f.numer.first()?;
        f.numer
            .iter()
            .all(|v| v == first)
            .then(|| Rational::new(first.clone(), f.denom.clone()))
    }

    fn pointwise_min(&self, f: &CubeFunction) -> Option<Rational> {
        f.numer
            .iter()
            .min()
            .map(|m| Rational::new(m.clone(), f.denom.clone()))
    }
}

impl Dump for CubeFunction {
    fn dump(&self) -> String {
        let width = self.n.div_ceil(4).max(1);
        let mut out = String::new();
        for x in 0..self.len() {
            out.push_str(&format!("{x:0width$x}\t{}\n", fmt_rational(&self.value(x))));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn bit_convention() {
        let cube = Cube::new(3).unwrap();
        let x2 = cube.coordinate(1).unwrap();
        // index 0b010 has x_2 = -1
        assert_eq!(x2.value(0b010), int(-1));
        assert_eq!(x2.value(0b101), int(1));
    }

    #[test]
    fn product_of_two_coordinates_under_l() {
        // Brute force: at each point, L f = 1/2 sum_i (f(tau_i x) - f(x)).
        let cube = Cube::new(2).unwrap();
        let f = cube.walsh(&[0, 1]).unwrap();
        let lf = cube.apply_l(&f).unwrap();
        for x in 0..4usize {
            let fx = Cube::coordinate_at(x, 0) * Cube::coordinate_at(x, 1);
            let mut acc = 0i64;
            for i in 0..2 {
                let y = x ^ (1 << i);
                acc += Cube::coordinate_at(y, 0) * Cube::coordinate_at(y, 1) - fx;
            }
            assert_eq!(lf.value(x), ratio(acc, 2));
            assert_eq!(lf.value(x), int(-2 * fx));
        }
    }

    #[test]
    fn multiply_by_one() {
        let cube = Cube::new(3).unwrap();
        let g = cube.from_fn(|x| ratio(x as i64 * 3 - 5, 7));
        let one = cube.constant(int(1));
        assert_eq!(cube.multiply(&one, &g).unwrap(), g);
    }

    #[test]
    fn integrate_walsh_is_zero() {
        let cube = Cube::new(3).unwrap();
        let f = cube.walsh(&[0, 1]).unwrap();
        assert_eq!(cube.integrate(&f).unwrap().value, int(0));
        assert_eq!(cube.integrate(&cube.constant(ratio(3, 4))).unwrap().value, ratio(3, 4));
    }

    #[test]
    fn walsh_round_trip() {
        let cube = Cube::new(4).unwrap();
        let f = cube.from_fn(|x| ratio((x * x) as i64 - 3, (x % 3 + 1) as i64));
        let coeffs = f.walsh_coefficients();
        assert_eq!(cube.from_walsh(&coeffs).unwrap(), f);
        let w = cube.walsh(&[1, 3]).unwrap().walsh_coefficients();
        for (mask, c) in w.iter().enumerate() {
            assert_eq!(*c, if mask == 0b1010 { int(1) } else { int(0) });
        }
    }

    #[test]
    fn walsh_eigenvalue_is_subset_size() {
        let cube = Cube::new(5).unwrap();
        for mask in 0..32usize {
            let w = cube.walsh_mask(mask);
            let lw = cube.apply_l(&w).unwrap();
            let k = Rational::from_integer(BigInt::from(mask.count_ones()));
            assert_eq!(cube.proportionality(&lw, &w), Some(-k));
        }
    }

    #[test]
    fn mismatch_and_bad_indices() {
        let c3 = Cube::new(3).unwrap();
        let c4 = Cube::new(4).unwrap();
        let f = c3.constant(int(1));
        assert!(matches!(c4.apply_l(&f), Err(ChaosError::ModelMismatch(_))));
        assert!(c3.walsh(&[3]).is_err());
        assert!(c3.walsh(&[1, 1]).is_err());
        assert!(c3.function(&[int(0)]).is_err());
        assert!(Cube::new(30).is_err());
    }

    #[test]
    fn dump_format() {
        let cube = Cube::new(2).unwrap();
        let f = cube.walsh(&[0]).unwrap();
        assert_eq!(f.dump(), "0\t1/1\n1\t-1/1\n2\t1/1\n3\t-1/1\n");
    }
}
