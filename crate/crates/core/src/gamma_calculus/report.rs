use std::fmt;

use num_traits::{Signed, Zero};

use crate::markov_models::{Integral, ModelTag};
use crate::rational::{fmt_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated, e.g. because truncation makes the integrals meaningless.
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// `lhs = rhs` in exact arithmetic; `residual = lhs - rhs`.
    Exact,
    /// `lhs <= rhs`; `residual = rhs - lhs` is the slack.
    Inequality,
    /// Approximate equality on a truncated model; passes when
    /// `|residual| <= tolerance`.
    Tolerance,
}

/// Outcome of one identity or inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub identity: String,
    pub model: String,
    pub dimension: usize,
    pub degree: usize,
    pub seed: Option<u64>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub residual: Rational,
    pub tolerance: Rational,
    pub kind: CheckKind,
    pub status: Status,
    pub note: String,
}

pub const CSV_HEADER: &str = "identity,model,N,k,seed,lhs,rhs,residual,pass";

impl VerificationReport {
    fn blank(identity: &str, kind: CheckKind) -> Self {
        Self {
            identity: identity.to_string(),
            model: String::new(),
            dimension: 0,
            degree: 0,
            seed: None,
            lhs: Rational::zero(),
            rhs: Rational::zero(),
            residual: Rational::zero(),
            tolerance: Rational::zero(),
            kind,
            status: Status::Skip,
            note: String::new(),
        }
    }

    /// Exact equality between two rationals.
    pub fn exact(identity: &str, lhs: Rational, rhs: Rational) -> Self {
        let residual = &lhs - &rhs;
        let status = if residual.is_zero() {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            lhs,
            rhs,
            residual,
            status,
            ..Self::blank(identity, CheckKind::Exact)
        }
    }

    /// Claims `lhs <= rhs` between exact rationals.
    pub fn inequality(identity: &str, lhs: Rational, rhs: Rational) -> Self {
        let residual = &rhs - &lhs;
        let status = if residual.is_negative() {
            Status::Fail
        } else {
            Status::Pass
        };
        Self {
            lhs,
            rhs,
            residual,
            status,
            ..Self::blank(identity, CheckKind::Inequality)
        }
    }

    /// Equality between integrals that may carry truncation error.
    pub fn integral_equality(identity: &str, lhs: &Integral, rhs: &Integral) -> Self {
        if lhs.is_exact() && rhs.is_exact() {
            return Self::exact(identity, lhs.value.clone(), rhs.value.clone());
        }
        let residual = &lhs.value - &rhs.value;
        let tolerance = &lhs.error_bound + &rhs.error_bound;
        let mut out = Self {
            lhs: lhs.value.clone(),
            rhs: rhs.value.clone(),
            status: if residual.abs() <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            residual,
            tolerance,
            ..Self::blank(identity, CheckKind::Tolerance)
        };
        if !(lhs.reliable && rhs.reliable) {
            out = out.skipped("boundary-skip: integrand reaches the truncation boundary");
        }
        out
    }

    /// `lhs <= rhs` between integrals that may carry truncation error.
    pub fn integral_inequality(identity: &str, lhs: &Integral, rhs: &Integral) -> Self {
        let mut out = Self::inequality(identity, lhs.value.clone(), rhs.value.clone());
        if !(lhs.is_exact() && rhs.is_exact()) {
            out.tolerance = &lhs.error_bound + &rhs.error_bound;
            if out.residual >= -out.tolerance.clone() {
                out.status = Status::Pass;
            }
            if !(lhs.reliable && rhs.reliable) {
                out = out.skipped("boundary-skip: integrand reaches the truncation boundary");
            }
        }
        out
    }

    /// A check that was not run, with the reason.
    pub fn skip(identity: &str, note: impl Into<String>) -> Self {
        Self::blank(identity, CheckKind::Exact).skipped(note)
    }

    pub fn skipped(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Skip;
        self.note = note.into();
        self
    }

    pub fn with_context(mut self, model: ModelTag, dimension: usize, degree: usize) -> Self {
        self.model = model.to_string();
        self.dimension = dimension;
        self.degree = degree;
        self
    }

    pub fn with_model_label(mut self, label: impl Into<String>) -> Self {
        self.model = label.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Appends to the note, keeping anything already recorded.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {note}", self.note);
        }
        self
    }

    /// Fails the report unless `ok`, appending `why` to the note.
    pub fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.status = Status::Fail;
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(why);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn csv_row(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        let pass = match self.status {
            Status::Pass => "true",
            Status::Fail => "false",
            Status::Skip => "skip",
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.identity,
            self.model,
            self.dimension,
            self.degree,
            seed,
            fmt_rational(&self.lhs),
            fmt_rational(&self.rhs),
            fmt_rational(&self.residual),
            pass
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.csv_row())?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn exact_and_inequality_status() {
        assert!(VerificationReport::exact("a", int(3), int(3)).passed());
        assert!(VerificationReport::exact("a", int(3), int(2)).failed());
        let r = VerificationReport::inequality("b", int(8), int(16));
        assert!(r.passed());
        assert_eq!(r.residual, int(8));
        assert!(VerificationReport::inequality("b", int(2), int(1)).failed());
    }

    #[test]
    fn tolerance_and_skip() {
        let a = Integral {
            value: int(1),
            error_bound: ratio(1, 10),
            reliable: true,
        };
        let b = Integral::exact(ratio(21, 20));
        assert!(VerificationReport::integral_equality("t", &a, &b).passed());
        let c = Integral {
            reliable: false,
            ..a.clone()
        };
        let r = VerificationReport::integral_equality("t", &c, &b);
        assert_eq!(r.status, Status::Skip);
        assert!(r.note.starts_with("boundary-skip"));
    }

    #[test]
    fn csv_layout() {
        let r = VerificationReport::exact("gradient_exchange", ratio(1, 2), ratio(1, 2))
            .with_context(ModelTag::Cube, 4, 2)
            .with_seed(7);
        assert_eq!(r.csv_row(), "gradient_exchange,cube,4,2,7,1/2,1/2,0/1,true");
    }
}
