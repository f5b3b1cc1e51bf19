// SPDX-License-Identifier: Apache-2.0

//! Golden cases and the brute-force summation oracle.
//!
//! [`brute_force_eq1`] evaluates the generator's defining sum literally in
//! rational arithmetic. It shares no code with [`crate::generator`], which
//! works in half-LSB integers.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::closedform::{floor_i64, m_limit, to_decimal_string, u_max, GatedParams, Rational};
use crate::fixedpoint::{check_width, max_value, min_value, Word};
use crate::generator::{eval, GeneratorConfig, GeneratorMode};
use crate::resources::{gate_cost, Block};
use crate::{Error, Result};

pub const MAX_ORACLE_WIDTH: u32 = 12;

fn clamp(x: Rational, lo: Rational, hi: Rational) -> Rational {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

fn q(v: i64) -> Rational {
    Rational::from(v as i128)
}

/// `(1/N) * sum_k sat(sat(n + U(k), adder) - U(k), +-M)` with
/// `U(k) = -U_MAX + S/2 + (k-1) S`, `S = 2 U_MAX / N`, summed term by term.
///
/// The asymmetric mode shifts every offset by `alpha - U_MAX` and uses the
/// adder range `[-U_MAX, M]`; the gated mode uses `+-C`.
pub fn brute_force_eq1(n: i64, cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<Rational> {
    let width = cfg.width();
    if width > MAX_ORACLE_WIDTH {
        return Err(Error::UnsupportedWidth {
            block: "brute-force oracle",
            width,
        });
    }
    if n < min_value(width) || n > max_value(width) {
        return Err(Error::ValueOutOfRange { value: n, width });
    }
    let u = q(u_max(width));
    let m = q(m_limit(width));
    let len = cfg.len() as i128;
    let stride = u * 2 / len;
    let (shift, lo, hi) = match cfg.mode() {
        GeneratorMode::Symmetric | GeneratorMode::LogSqnl => (q(0), -u, u),
        GeneratorMode::Asymmetric { alpha } => (q(alpha) - u, -u, m),
        GeneratorMode::Gated => {
            let c = q(c_scale.ok_or(Error::MissingScale)?);
            (q(0), -c, c)
        }
    };
    let n = q(n);
    let mut total = Rational::from(0);
    for k in 0..len {
        let offset = -u + stride / 2 + stride * k + shift;
        let added = clamp(n + offset, lo, hi);
        total += clamp(added - offset, -m, m);
    }
    Ok(total / len)
}

/// The generator output derived from [`brute_force_eq1`]: floor, the LogSQNL
/// post-map where applicable, and an `R`-bit clip.
pub fn brute_force_output(n: i64, cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<i64> {
    let avg = floor_i64(&brute_force_eq1(n, cfg, c_scale)?);
    let width = cfg.width();
    let out = match cfg.mode() {
        GeneratorMode::LogSqnl => avg.div_euclid(2) + (1 << (width - 3)),
        _ => avg,
    };
    Ok(out.clamp(min_value(width), max_value(width)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Paper,
    Trivial,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenCase {
    pub id: String,
    pub module: String,
    pub config: Value,
    #[serde(default)]
    pub input: Value,
    pub expected: Value,
    pub tag: Tag,
    #[serde(default)]
    pub oracle: Option<String>,
}

fn schema(id: &str, reason: impl Into<String>) -> Error {
    Error::GoldenSchema {
        id: id.to_string(),
        reason: reason.into(),
    }
}

pub fn parse_goldens(text: &str) -> Result<Vec<GoldenCase>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let cases: Vec<GoldenCase> = serde_json::from_str(text)?;
    let mut seen = HashSet::new();
    for case in &cases {
        if !seen.insert(case.id.as_str()) {
            return Err(schema(&case.id, "duplicate id"));
        }
        let named = case.oracle.as_deref().is_some_and(|o| !o.trim().is_empty());
        if case.tag == Tag::Derived && !named {
            return Err(schema(&case.id, "DERIVED case must name its oracle"));
        }
    }
    Ok(cases)
}

pub fn load_goldens(path: impl AsRef<Path>) -> Result<Vec<GoldenCase>> {
    parse_goldens(&std::fs::read_to_string(path)?)
}

fn field<'a>(case: &'a GoldenCase, obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(&case.id, format!("missing `{key}`")))
}

fn int(case: &GoldenCase, obj: &Value, key: &str) -> Result<i64> {
    field(case, obj, key)?
        .as_i64()
        .ok_or_else(|| schema(&case.id, format!("`{key}` must be an integer")))
}

fn text<'a>(case: &'a GoldenCase, obj: &'a Value, key: &str) -> Result<&'a str> {
    field(case, obj, key)?
        .as_str()
        .ok_or_else(|| schema(&case.id, format!("`{key}` must be a string")))
}

fn width_of(case: &GoldenCase) -> Result<u32> {
    let w = int(case, &case.config, "width")?;
    u32::try_from(w).map_err(|_| schema(&case.id, "negative width"))
}

fn mode_of(case: &GoldenCase) -> Result<GeneratorMode> {
    Ok(match text(case, &case.config, "mode")? {
        "symmetric" => GeneratorMode::Symmetric,
        "logsqnl" => GeneratorMode::LogSqnl,
        "gated" => GeneratorMode::Gated,
        "asymmetric" => GeneratorMode::Asymmetric {
            alpha: int(case, &case.config, "alpha")?,
        },
        other => return Err(schema(&case.id, format!("unknown mode `{other}`"))),
    })
}

fn scale_of(case: &GoldenCase) -> Result<Option<i64>> {
    match case.config.get("c") {
        None | Some(Value::Null) => Ok(None),
        Some(_) => int(case, &case.config, "c").map(Some),
    }
}

/// Recomputes a case with the library and returns the actual value.
pub fn evaluate_case(case: &GoldenCase) -> Result<Value> {
    match case.module.as_str() {
        "resources" => {
            let kind = text(case, &case.config, "kind")?;
            let block = Block::from_kind(kind, width_of(case)?)?;
            Ok(Value::from(gate_cost(block)?))
        }
        "generator" => {
            let width = width_of(case)?;
            check_width(width)?;
            let len = int(case, &case.config, "n_len")?;
            let cfg = GeneratorConfig::new(width, len as u64, mode_of(case)?)?;
            let n = case
                .input
                .as_i64()
                .ok_or_else(|| schema(&case.id, "input must be an integer"))?;
            Ok(Value::from(
                eval(Word::new(n, width)?, &cfg, scale_of(case)?)?.value(),
            ))
        }
        "closedform" => {
            let width = width_of(case)?;
            let n = case
                .input
                .as_i64()
                .ok_or_else(|| schema(&case.id, "input must be an integer"))?;
            let params = GatedParams::new(width, int(case, &case.config, "c")?)?;
            let r = match text(case, &case.config, "fn")? {
                "gated" => crate::closedform::gated_exact(n, &params),
                "gated_error" => crate::closedform::gated_error_exact(n, &params),
                other => return Err(schema(&case.id, format!("unknown fn `{other}`"))),
            };
            Ok(Value::from(to_decimal_string(&r)))
        }
        other => Err(schema(&case.id, format!("unknown module `{other}`"))),
    }
}

/// Evaluates a case and compares it with its expected value.
pub fn check_case(case: &GoldenCase) -> Result<()> {
    let actual = evaluate_case(case)?;
    if actual == case.expected {
        Ok(())
    } else {
        Err(schema(
            &case.id,
            format!("expected {}, got {actual}", case.expected),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::sqnl_exact;

    fn golden_path(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("goldens")
            .join(name)
    }

    #[test]
    fn oracle_examples() {
        let cfg = GeneratorConfig::new(8, 128, GeneratorMode::Symmetric).unwrap();
        assert_eq!(brute_force_eq1(0, &cfg, None).unwrap(), q(0));
        assert_eq!(brute_force_eq1(64, &cfg, None).unwrap(), q(48));
        assert_eq!(sqnl_exact(64, 8).unwrap(), q(48));
        let gated = GeneratorConfig::new(8, 128, GeneratorMode::Gated).unwrap();
        assert_eq!(brute_force_eq1(40, &gated, Some(40)).unwrap(), q(24));
    }

    #[test]
    fn oracle_agrees_with_generator_at_r8_n8() {
        let cfg = GeneratorConfig::new(8, 8, GeneratorMode::Symmetric).unwrap();
        for n in -128..128 {
            let got = eval(Word::new(n, 8).unwrap(), &cfg, None).unwrap().value();
            assert_eq!(got, brute_force_output(n, &cfg, None).unwrap(), "n={n}");
        }
    }

    #[test]
    fn oracle_agrees_across_modes() {
        for width in [4u32, 6, 8] {
            let m = 1u64 << (width - 1);
            let u = u_max(width);
            for len in [2, 4, 8, m] {
                let mut modes = vec![
                    (GeneratorMode::Symmetric, None),
                    (GeneratorMode::LogSqnl, None),
                    (GeneratorMode::Gated, Some(u / 2)),
                ];
                for alpha in [0, u / 2, u] {
                    modes.push((GeneratorMode::Asymmetric { alpha }, None));
                }
                for (mode, c) in modes {
                    let cfg = GeneratorConfig::new(width, len, mode).unwrap();
                    for n in min_value(width)..=max_value(width) {
                        let got = eval(Word::new(n, width).unwrap(), &cfg, c).unwrap().value();
                        let want = brute_force_output(n, &cfg, c).unwrap();
                        assert_eq!(got, want, "R={width} N={len} {mode:?} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_rejects_wide_or_out_of_range() {
        let cfg = GeneratorConfig::new(16, 8, GeneratorMode::Symmetric).unwrap();
        assert!(brute_force_eq1(0, &cfg, None).is_err());
        let cfg = GeneratorConfig::new(8, 8, GeneratorMode::Symmetric).unwrap();
        assert!(brute_force_eq1(128, &cfg, None).is_err());
        let cfg = GeneratorConfig::new(8, 8, GeneratorMode::Gated).unwrap();
        assert_eq!(brute_force_eq1(1, &cfg, None), Err(Error::MissingScale));
    }

    #[test]
    fn table_file_has_thirteen_paper_rows() {
        let cases = load_goldens(golden_path("table1.json")).unwrap();
        assert_eq!(cases.len(), 13);
        for case in &cases {
            assert_eq!(case.tag, Tag::Paper);
            check_case(case).unwrap();
        }
    }

    #[test]
    fn every_committed_golden_passes() {
        for name in ["table1.json", "generator.json"] {
            for case in load_goldens(golden_path(name)).unwrap() {
                check_case(&case).unwrap();
            }
        }
    }

    #[test]
    fn empty_file_is_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.json");
        std::fs::write(&path, "").unwrap();
        assert!(load_goldens(&path).unwrap().is_empty());
        assert!(parse_goldens("[]").unwrap().is_empty());
    }

    #[test]
    fn derived_without_oracle_rejected() {
        let text = r#"[{"id": "x1", "module": "resources",
            "config": {"kind": "adder", "width": 8}, "expected": 72, "tag": "DERIVED"}]"#;
        let err = parse_goldens(text).unwrap_err();
        assert!(
            matches!(&err, Error::GoldenSchema { id, .. } if id == "x1"),
            "{err}"
        );
        let text = text.replace(
            "\"DERIVED\"",
            "\"DERIVED\", \"oracle\": \"9 gates per bit\"",
        );
        assert_eq!(parse_goldens(&text).unwrap().len(), 1);
    }

    #[test]
    fn schema_errors_name_the_case() {
        let dup = r#"[{"id": "a", "module": "m", "config": {}, "expected": 1, "tag": "TRIVIAL"},
                      {"id": "a", "module": "m", "config": {}, "expected": 1, "tag": "TRIVIAL"}]"#;
        assert!(matches!(
            parse_goldens(dup),
            Err(Error::GoldenSchema { .. })
        ));
        let bad_tag =
            r#"[{"id": "a", "module": "m", "config": {}, "expected": 1, "tag": "GUESS"}]"#;
        assert!(matches!(parse_goldens(bad_tag), Err(Error::Parse(_))));
        let case: GoldenCase = serde_json::from_str(
            r#"{"id": "w", "module": "resources", "config": {"kind": "adder", "width": 8},
                "expected": 73, "tag": "TRIVIAL"}"#,
        )
        .unwrap();
        let err = check_case(&case).unwrap_err();
        assert!(err.to_string().contains("golden case w"), "{err}");
    }
}
