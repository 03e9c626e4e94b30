use serde::{Deserialize, Serialize};

use super::rule::malformed;
use super::StoppingRule;
use crate::classic::{minimal_embed_rule, ChipSequence, RandomizedRule, ThresholdTable};
use crate::error::Result;
use crate::measures::IntegerMeasure;
use crate::numerics::{Base4Expansion, Rational};
use crate::ui::{verify_matrix, MatrixVerdict, S3Digits, StoppingMatrix};

/// Output of a classifier, in the form `compile` accepts.
///
/// JSON: `{"type": "chips", "chips": [[-1, 2], [-3, 0]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Certificate {
    Thresholds {
        thresholds: ThresholdTable,
    },
    Chips {
        chips: ChipSequence,
    },
    /// Digits of the mass at 0 on `{-2, 0, 2}`.
    Digits {
        digits: Base4Expansion,
    },
    /// Digits for `{-2, …, 2}`.
    Digits3 {
        digits: S3Digits,
    },
    Matrix {
        matrix: StoppingMatrix,
    },
    Pairs {
        pairs: RandomizedRule,
    },
    Minimal {
        measure: IntegerMeasure,
    },
}

/// Builds the executable rule, rejecting certificates whose rule could not
/// run as stated (empty threshold tables, matrices stopping more classes
/// than are alive).
pub fn compile(certificate: &Certificate) -> Result<StoppingRule> {
    Ok(match certificate {
        Certificate::Thresholds { thresholds } => {
            if thresholds.entries().is_empty() {
                return Err(malformed("threshold table is empty"));
            }
            StoppingRule::MaxThreshold(thresholds.clone())
        }
        Certificate::Chips { chips } => StoppingRule::ExitComposition(chips.clone()),
        Certificate::Digits { digits } => {
            StoppingRule::PathCountMatrix(checked(StoppingMatrix::from_digits(digits)?)?)
        }
        Certificate::Digits3 { digits } => {
            StoppingRule::PathCountMatrix(checked(StoppingMatrix::from_s3_digits(
                &digits.zero,
                Some((&digits.minus_one, &digits.plus_one)),
            )?)?)
        }
        Certificate::Matrix { matrix } => StoppingRule::PathCountMatrix(checked(matrix.clone())?),
        Certificate::Pairs { pairs } => StoppingRule::RandomizedPair(pairs.clone()),
        Certificate::Minimal { measure } => StoppingRule::Minimal(minimal_embed_rule(measure)),
    })
}

/// The centered law a matrix embeds: its interior atoms plus the boundary
/// masses that center them.
pub fn matrix_law(m: &StoppingMatrix) -> Result<IntegerMeasure> {
    let b = m.boundary();
    let interior: Vec<(i64, Rational)> = (-b + 1..b).map(|s| (s, m.atom(s))).collect();
    let rest = Rational::one() - interior.iter().map(|(_, w)| w).sum::<Rational>();
    let moment: Rational = interior.iter().map(|(s, w)| Rational::from(*s) * w).sum();
    // p+ + p- = rest, b (p+ - p-) = -moment
    let half = Rational::frac(1, 2);
    let plus = (&rest - &moment / &Rational::from(b)) * &half;
    let minus = &rest - &plus;
    if plus.is_negative() || minus.is_negative() {
        return Err(malformed(format!(
            "matrix atoms cannot be completed to a centered law (interior mean {moment})"
        )));
    }
    IntegerMeasure::from_weights(interior.into_iter().chain([(-b, minus), (b, plus)]))
}

fn checked(m: StoppingMatrix) -> Result<StoppingMatrix> {
    let law = matrix_law(&m)?;
    match verify_matrix(&m, &law)? {
        MatrixVerdict::Violation(v) => Err(malformed(format!(
            "matrix infeasible at site {}{}: {:?}",
            v.site,
            v.stage.map(|n| format!(" stage {n}")).unwrap_or_default(),
            v.kind
        ))),
        _ => Ok(m),
    }
}
