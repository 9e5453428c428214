//! JSON and CSV rendering with fixed precision and embedded provenance.

use serde::Serialize;
use serde_json::{Map, Value};
use tvsched::communicability::ASYMPTOTIC_FALLBACK_POWER;
use tvsched::manipulation::BISECTION_TOLERANCE;
use tvsched::netgen::{INDUCTION_FORMULA, TRANSMISSION_FORMULA};
use tvsched::scheduling::{CHI_EPSILON, GREEDY_REGULARIZATION};
use tvsched::Scalar;

use crate::error::CliResult;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub const TIE_BREAK_POLICY: &str = "argmax ties go to the lowest node index; values within tie_rel of the \
maximum count as tied when comparing leaders across scales; exhaustive searches prefer the lexicographically \
smallest schedule among equal values; manipulation prefers the lowest trial index among equal scales";

/// Rounds to `SIGNIFICANT_DIGITS` significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every non-integer number in `value`. Object keys come out sorted
/// because `serde_json::Map` is ordered.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonicalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn to_value<S: Serialize>(item: &S) -> CliResult<Value> {
    Ok(canonicalize(serde_json::to_value(item)?))
}

/// Pretty JSON text with rounded numbers and a trailing newline.
pub fn render_json(value: Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(&canonicalize(value))?;
    text.push('\n');
    Ok(text)
}

/// CSV cell for a float: rounded, `NaN` for undefined values.
pub fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{}", round_sig(x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Formulas {
    pub transmission: &'static str,
    pub induction: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    pub chi_epsilon: f64,
    pub singular_rel: f64,
    pub symmetry_rel: f64,
    pub tie_rel: f64,
    pub condition_cap: f64,
    pub greedy_regularization: f64,
    pub bisection_tolerance: f64,
    pub asymptotic_fallback_power: usize,
}

/// Versions and numerical policy behind every report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub formulas: Formulas,
    pub thresholds: Thresholds,
    pub tie_break: &'static str,
    pub node_indexing: &'static str,
    pub significant_digits: usize,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            tool: "tvsched",
            version: env!("CARGO_PKG_VERSION"),
            formulas: Formulas {
                transmission: TRANSMISSION_FORMULA,
                induction: INDUCTION_FORMULA,
            },
            thresholds: Thresholds {
                chi_epsilon: CHI_EPSILON,
                singular_rel: f64::singular_rel(),
                symmetry_rel: f64::symmetry_rel(),
                tie_rel: f64::tie_rel(),
                condition_cap: f64::condition_cap(),
                greedy_regularization: GREEDY_REGULARIZATION,
                bisection_tolerance: BISECTION_TOLERANCE,
                asymptotic_fallback_power: ASYMPTOTIC_FALLBACK_POWER,
            },
            tie_break: TIE_BREAK_POLICY,
            node_indexing: "zero-based",
            significant_digits: SIGNIFICANT_DIGITS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-123456.7890123456), -123456.789012);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn keys_are_sorted_and_integers_kept() {
        let text = render_json(json!({"b": 1, "a": [0.1 + 0.2, 7]})).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": [\n    0.3,\n    7\n  ],\n  \"b\": 1\n}\n"
        );
    }

    #[test]
    fn nan_serializes_as_null() {
        let text = render_json(to_value(&f64::NAN).unwrap()).unwrap();
        assert_eq!(text, "null\n");
        assert_eq!(csv_float(f64::NAN), "NaN");
    }
}
