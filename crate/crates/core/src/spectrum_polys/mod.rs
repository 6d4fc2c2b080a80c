//! Spectral polynomials `Q_k`, `R_{k+1}`, `T_{k+1}`, the eigenvalue
//! products `pi_k`, and the sign condition on `T_{k+1}` over the spectrum.
//!
//! Everything here is exact; no floating point is involved.

mod poly;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

pub use poly::RationalPoly;

use crate::error::{ChaosError, Result};
use crate::rational::{fmt_rational, from_usize, int, parse_rational, Rational};

/// Initial segment of the point spectrum of `-L`, `0 = l_0 < l_1 < ...`.
#[derive(Clone, Debug, PartialEq)]
pub enum Spectrum {
    /// The rule `l_n = n`, generated on demand.
    Naturals,
    Explicit(Vec<Rational>),
}

impl Spectrum {
    pub fn naturals() -> Self {
        Spectrum::Naturals
    }

    pub fn explicit(eigenvalues: Vec<Rational>) -> Result<Self> {
        match eigenvalues.first() {
            None => return Err(ChaosError::InvalidSpectrum("empty spectrum".into())),
            Some(first) if !first.is_zero() => {
                return Err(ChaosError::InvalidSpectrum(format!(
                    "first eigenvalue must be 0, got {}",
                    fmt_rational(first)
                )))
            }
            _ => {}
        }
        if let Some(w) = eigenvalues.windows(2).find(|w| w[0] >= w[1]) {
            return Err(ChaosError::InvalidSpectrum(format!(
                "eigenvalues must be strictly increasing ({} >= {})",
                fmt_rational(&w[0]),
                fmt_rational(&w[1])
            )));
        }
        Ok(Spectrum::Explicit(eigenvalues))
    }

    /// `None` for the infinite rule form.
    pub fn len(&self) -> Option<usize> {
        match self {
            Spectrum::Naturals => None,
            Spectrum::Explicit(v) => Some(v.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn eigenvalue(&self, n: usize) -> Option<Rational> {
        match self {
            Spectrum::Naturals => Some(from_usize(n)),
            Spectrum::Explicit(v) => v.get(n).cloned(),
        }
    }

    /// Errors unless `l_0, ..., l_{count-1}` are all available.
    pub fn require(&self, count: usize) -> Result<()> {
        match self.len() {
            Some(available) if available < count => Err(ChaosError::InsufficientEigenvalues {
                needed: count,
                available,
            }),
            _ => Ok(()),
        }
    }

    fn lambda(&self, n: usize) -> Rational {
        self.eigenvalue(n)
            .expect("eigenvalue availability checked by caller")
    }

    /// Parses a config line `spectrum = nat` or `spectrum = [0, 1/2, ...]`.
    pub fn parse_line(line: &str) -> Result<Self> {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ChaosError::InvalidSpectrum(format!("missing `=` in `{line}`")))?;
        if key.trim() != "spectrum" {
            return Err(ChaosError::InvalidSpectrum(format!(
                "expected key `spectrum`, got `{}`",
                key.trim()
            )));
        }
        value.parse()
    }
}

impl FromStr for Spectrum {
    type Err = ChaosError;

    /// Parses the value part: `nat` or a bracketed list of rationals.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "nat" {
            return Ok(Spectrum::Naturals);
        }
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| {
                ChaosError::InvalidSpectrum(format!("expected `nat` or `[...]`, got `{s}`"))
            })?;
        let values = inner
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| parse_rational(t).map_err(|e| ChaosError::InvalidSpectrum(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Spectrum::explicit(values)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Naturals => write!(f, "nat"),
            Spectrum::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(fmt_rational).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

/// `Q_k(X) = prod_{i<k} (X - l_i)`; `Q_0 = 1`.
pub fn build_q(spectrum: &Spectrum, k: usize) -> Result<RationalPoly> {
    spectrum.require(k)?;
    Ok((0..k).fold(RationalPoly::one(), |acc, i| {
        &acc * &RationalPoly::linear_factor(&spectrum.lambda(i))
    }))
}

/// `R_{k+1}(X) = (Q_{k+1}(X) - Q_{k+1}'(0) X) / X^2`, for `k >= 1`.
pub fn build_r(spectrum: &Spectrum, k: usize) -> Result<RationalPoly> {
    if k == 0 {
        return Err(ChaosError::InvalidDegree("R_{k+1} requires k >= 1".into()));
    }
    let q = build_q(spectrum, k + 1)?;
    let linear = RationalPoly::monomial(q.coeff(1), 1);
    let x2 = RationalPoly::monomial(Rational::one(), 2);
    let (quotient, rem) = (&q - &linear).div_rem(&x2);
    if !rem.is_zero() {
        return Err(ChaosError::InternalInvariant(format!(
            "X^2 does not divide Q_{} - Q'(0) X (remainder {rem})",
            k + 1
        )));
    }
    Ok(quotient)
}

/// `T_{k+1}(X) = R_{k+1}(X + l_k) - R_{k+1}(l_k)`, for `k >= 1`.
pub fn build_t(spectrum: &Spectrum, k: usize) -> Result<RationalPoly> {
    let r = build_r(spectrum, k)?;
    let lk = spectrum.lambda(k);
    let shifted = r.shift(&lk);
    Ok(&shifted - &RationalPoly::constant(r.eval(&lk)))
}

/// `pi_k = l_1 ... l_k`, `pi_0 = 1`.
pub fn pi_k(spectrum: &Spectrum, k: usize) -> Result<Rational> {
    spectrum.require(k + 1)?;
    Ok((1..=k).fold(Rational::one(), |acc, i| acc * spectrum.lambda(i)))
}

/// Result of evaluating `(-1)^k T_{k+1}(-l_n / 2)` over `n = 0..=checked_up_to`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralConditionReport {
    pub degree: usize,
    /// Last index actually checked.
    pub checked_up_to: usize,
    /// Index requested by the caller; larger than `checked_up_to` when an
    /// explicit spectrum ran out.
    pub requested_up_to: usize,
    /// True when the spectrum continues past the checked range, so the
    /// condition is only established on a finite prefix.
    pub truncated: bool,
    pub values: Vec<(usize, Rational)>,
    pub violations: Vec<(usize, Rational)>,
}

impl SpectralConditionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates the sign condition `(-1)^k T_{k+1}(-l_n/2) <= 0` exactly.
pub fn check_spectral_condition(
    spectrum: &Spectrum,
    k: usize,
    n_max: usize,
) -> Result<SpectralConditionReport> {
    let t = build_t(spectrum, k)?;
    let last = match spectrum.len() {
        None => n_max,
        Some(len) => n_max.min(len - 1),
    };
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
    let half = Rational::new(1.into(), 2.into());
    let values: Vec<(usize, Rational)> = (0..=last)
        .map(|n| {
            let arg = -(spectrum.lambda(n) * &half);
            (n, &sign * t.eval(&arg))
        })
        .collect();
    let violations = values
        .iter()
        .filter(|(_, v)| v.is_positive())
        .cloned()
        .collect();
    let truncated = match spectrum.len() {
        None => true,
        Some(len) => last + 1 < len,
    };
    Ok(SpectralConditionReport {
        degree: k,
        checked_up_to: last,
        requested_up_to: n_max,
        truncated,
        values,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// Dense integer expansion of prod (X - r_i), independent of RationalPoly.
    fn brute_expand(roots: &[i64]) -> Vec<i64> {
        let mut c = vec![1i64];
        for r in roots {
            let mut next = vec![0i64; c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                next[i + 1] += v;
                next[i] -= r * v;
            }
            c = next;
        }
        c
    }

    fn ints(p: &RationalPoly) -> Vec<i64> {
        p.dense()
            .iter()
            .map(|c| {
                assert!(c.is_integer());
                i64::try_from(c.numer()).unwrap()
            })
            .collect()
    }

    #[test]
    fn q0_is_one() {
        assert_eq!(build_q(&Spectrum::Naturals, 0).unwrap(), RationalPoly::one());
    }

    #[test]
    fn q2_q3_match_closed_forms() {
        let s = Spectrum::explicit(vec![int(0), ratio(1, 3), ratio(5, 2), int(4)]).unwrap();
        let (l1, l2) = (ratio(1, 3), ratio(5, 2));
        let q2 = build_q(&s, 2).unwrap();
        assert_eq!(q2.dense(), vec![int(0), -l1.clone(), int(1)]);
        let q3 = build_q(&s, 3).unwrap();
        assert_eq!(
            q3.dense(),
            vec![int(0), &l1 * &l2, -(&l1 + &l2), int(1)]
        );
    }

    #[test]
    fn r4_t4_on_naturals_match_brute_force() {
        // Q_4 = X(X-1)(X-2)(X-3) expanded independently, linear term stripped.
        let q4 = brute_expand(&[0, 1, 2, 3]);
        assert_eq!(q4, vec![0, -6, 11, -6, 1]);
        let r4_expected: Vec<i64> = q4[2..].to_vec();
        assert_eq!(r4_expected, vec![11, -6, 1]);
        let r4 = build_r(&Spectrum::Naturals, 3).unwrap();
        assert_eq!(ints(&r4), r4_expected);

        // R_4(X + 3) by binomial expansion, minus R_4(3) = 2.
        let mut shifted = [0i64; 3];
        for (i, c) in r4_expected.iter().enumerate() {
            for j in 0..=i {
                let binom = [[1, 0, 0], [1, 1, 0], [1, 2, 1]][i][j];
                shifted[j] += c * binom * 3i64.pow((i - j) as u32);
            }
        }
        assert_eq!(shifted[0], 2);
        shifted[0] -= 2;
        let t4 = build_t(&Spectrum::Naturals, 3).unwrap();
        assert_eq!(ints(&t4), shifted.to_vec());
        assert_eq!(t4, RationalPoly::monomial(int(1), 2));
    }

    #[test]
    fn low_order_r_and_t() {
        let s = Spectrum::explicit(vec![int(0), ratio(2, 7), ratio(9, 5)]).unwrap();
        assert_eq!(build_r(&s, 1).unwrap(), RationalPoly::one());
        assert!(build_t(&s, 1).unwrap().is_zero());
        let r3 = build_r(&s, 2).unwrap();
        assert_eq!(r3.dense(), vec![-(ratio(2, 7) + ratio(9, 5)), int(1)]);
        assert_eq!(build_t(&s, 2).unwrap(), RationalPoly::x());
    }

    #[test]
    fn degree_zero_rejected_for_r_and_t() {
        assert!(matches!(
            build_r(&Spectrum::Naturals, 0),
            Err(ChaosError::InvalidDegree(_))
        ));
        assert!(build_t(&Spectrum::Naturals, 0).is_err());
    }

    #[test]
    fn insufficient_eigenvalues() {
        let s = Spectrum::explicit(vec![int(0), int(1)]).unwrap();
        assert!(build_q(&s, 2).is_ok());
        assert_eq!(
            build_q(&s, 3),
            Err(ChaosError::InsufficientEigenvalues {
                needed: 3,
                available: 2
            })
        );
        assert!(build_r(&s, 2).is_err());
        assert!(pi_k(&s, 2).is_err());
    }

    #[test]
    fn pi_values() {
        assert_eq!(pi_k(&Spectrum::Naturals, 0).unwrap(), int(1));
        assert_eq!(pi_k(&Spectrum::Naturals, 4).unwrap(), int(24));
        let s = Spectrum::explicit(vec![int(0), ratio(1, 2), ratio(3, 2)]).unwrap();
        // 1/2 * 3/2
        assert_eq!(pi_k(&s, 2).unwrap(), ratio(3, 4));
    }

    #[test]
    fn spectrum_validation_and_parse() {
        assert!(Spectrum::explicit(vec![int(1), int(2)]).is_err());
        assert!(Spectrum::explicit(vec![int(0), int(2), int(2)]).is_err());
        assert!(Spectrum::explicit(vec![]).is_err());
        assert_eq!(Spectrum::parse_line("spectrum = nat").unwrap(), Spectrum::Naturals);
        let s = Spectrum::parse_line("spectrum = [0, 1/2, 3/2, 4]").unwrap();
        assert_eq!(s.eigenvalue(2), Some(ratio(3, 2)));
        assert_eq!(s.to_string(), "[0/1, 1/2, 3/2, 4/1]");
        assert!(Spectrum::parse_line("spectrum = [0, x]").is_err());
        assert!(Spectrum::parse_line("spectrum [0]").is_err());
        assert!(Spectrum::parse_line("eigen = nat").is_err());
    }

    #[test]
    fn spectral_condition_low_degrees() {
        let r1 = check_spectral_condition(&Spectrum::Naturals, 1, 50).unwrap();
        assert!(r1.holds());
        assert!(r1.values.iter().all(|(_, v)| v.is_zero()));
        let r2 = check_spectral_condition(&Spectrum::Naturals, 2, 100).unwrap();
        assert!(r2.holds());
        for (n, v) in &r2.values {
            assert_eq!(*v, ratio(-(*n as i64), 2));
        }
        assert!(r2.truncated);
    }

    #[test]
    fn spectral_condition_explicit_coverage() {
        let s = Spectrum::explicit(vec![int(0), int(1), ratio(3, 2), int(2)]).unwrap();
        let r = check_spectral_condition(&s, 3, 10).unwrap();
        assert_eq!(r.checked_up_to, 3);
        assert_eq!(r.requested_up_to, 10);
        assert!(!r.truncated);
        assert_eq!(r.values.len(), 4);
    }
}
