//! Positivity of polynomials in `L` on the cube, decided two ways: as a
//! quadratic form on the explicit `2^N x 2^N` matrix, and through the
//! values `P(-n)` on the spectrum `{0, ..., N}`.

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{ChaosError, Result};
use crate::markov_models::{Cube, MarkovModel};
use crate::rational::{from_usize, Rational};
use crate::spectrum_polys::RationalPoly;

/// Largest cube dimension for explicit operator matrices.
pub const MAX_MATRIX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivityComparison {
    /// `int u P(L) u d mu >= 0` for every `u`.
    pub form_nonnegative: bool,
    /// `P(-n) >= 0` for `n = 0..=N`.
    pub spectral_nonnegative: bool,
}

impl PositivityComparison {
    pub fn agree(&self) -> bool {
        self.form_nonnegative == self.spectral_nonnegative
    }
}

/// `s * P(L)` as an integer matrix, where `s > 0` clears all denominators.
///
/// With `M = 2L = A - N I` (`A` the hypercube adjacency matrix) and
/// `P(L) = sum p_j (M/2)^j`, the scaled polynomial has integer coefficients
/// and Horner's scheme stays in `i128`.
pub fn cube_operator_polynomial(cube: &Cube, p: &RationalPoly) -> Result<Vec<Vec<i128>>> {
    let n = cube.dimension();
    if n > MAX_MATRIX_DIM {
        return Err(ChaosError::InvalidParameter(format!(
            "explicit operator matrix limited to N <= {MAX_MATRIX_DIM}"
        )));
    }
    let size = cube.points();
    let dense = p.dense();
    let degree = dense.len().saturating_sub(1);
    let lcm = dense
        .iter()
        .fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    let overflow = || ChaosError::InvalidParameter("operator polynomial overflows i128".into());
    let coeffs: Vec<i128> = dense
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let scaled = c * Rational::from_integer(&lcm << (degree - j));
            scaled.to_integer().to_i128().ok_or_else(overflow)
        })
        .collect::<Result<_>>()?;

    let mut m = vec![vec![0i128; size]; size];
    for (x, row) in m.iter_mut().enumerate() {
        row[x] = -(n as i128);
        for i in 0..n {
            row[x ^ (1 << i)] = 1;
        }
    }
    let identity_times = |c: i128| {
        let mut out = vec![vec![0i128; size]; size];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = c;
        }
        out
    };
    let mut acc = identity_times(*coeffs.last().unwrap_or(&0));
    for &c in coeffs.iter().rev().skip(1) {
        let mut next = identity_times(c);
        for i in 0..size {
            for k in 0..size {
                let a = acc[i][k];
                if a == 0 {
                    continue;
                }
                for j in 0..size {
                    let v = a.checked_mul(m[k][j]).ok_or_else(overflow)?;
                    next[i][j] = next[i][j].checked_add(v).ok_or_else(overflow)?;
                }
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Exact positive-semidefiniteness by fraction-free symmetric elimination.
///
/// Each Bareiss pivot has the sign of the true Schur pivot because the
/// previous pivot is always positive. A zero pivot with a vanishing row is
/// dropped, which leaves the remaining Schur complement unchanged.
fn is_psd(matrix: &[Vec<i128>]) -> bool {
    let n = matrix.len();
    let mut a: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut prev = BigInt::from(1);
    for i in 0..n {
        let pivot = a[i][i].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            if (i + 1..n).any(|j| !a[i][j].is_zero()) {
                return false;
            }
            continue;
        }
        for j in i + 1..n {
            for k in i + 1..n {
                let v = &pivot * &a[j][k] - &a[j][i] * &a[i][k];
                a[j][k] = v / &prev;
            }
        }
        prev = pivot;
    }
    true
}

/// Compares `int u P(L) u d mu >= 0` for all `u` against `P(-n) >= 0`.
pub fn verify_spectral_positivity(cube: &Cube, p: &RationalPoly) -> Result<PositivityComparison> {
    let matrix = cube_operator_polynomial(cube, p)?;
    let spectral_nonnegative = (0..=cube.dimension()).all(|n| !p.eval(&-from_usize(n)).is_negative());
    Ok(PositivityComparison {
        form_nonnegative: is_psd(&matrix),
        spectral_nonnegative,
    })
}
