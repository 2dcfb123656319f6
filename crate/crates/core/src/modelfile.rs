//! Line-oriented model file format.
//!
//! ```text
//! # comment
//! n 2
//! beta 1 -1
//! alpha 0 0
//! c 1 2 0.5 0
//! ```
//!
//! `c i j re im` sets the coupling between states `i < j` (1-based); the
//! conjugate entry is implied. Diagonal couplings are rejected because
//! `alpha` already carries the diagonal of `A`.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_float(line: usize, tok: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| syntax(line, format!("invalid number `{tok}`")))
}

/// Parses a model file. Structural checks beyond the grammar (lengths,
/// finiteness, band couplings) are left to [`crate::model::validate`].
pub fn parse(text: &str) -> Result<ModelSpec, ParseError> {
    let mut n: Option<usize> = None;
    let mut beta: Option<Vec<f64>> = None;
    let mut alpha: Option<Vec<f64>> = None;
    let mut couplings: Vec<(usize, usize, usize, Complex64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match key {
            "n" => {
                if n.is_some() {
                    return Err(syntax(line_no, "duplicate `n` line"));
                }
                if rest.len() != 1 {
                    return Err(syntax(line_no, "`n` takes exactly one integer"));
                }
                let v = rest[0]
                    .parse::<usize>()
                    .map_err(|_| syntax(line_no, format!("invalid state count `{}`", rest[0])))?;
                n = Some(v);
            }
            "beta" | "alpha" => {
                let slot = if key == "beta" { &mut beta } else { &mut alpha };
                if slot.is_some() {
                    return Err(syntax(line_no, format!("duplicate `{key}` line")));
                }
                let values = rest
                    .iter()
                    .map(|t| parse_float(line_no, t))
                    .collect::<Result<Vec<_>, _>>()?;
                *slot = Some(values);
            }
            "c" => {
                if rest.len() != 4 {
                    return Err(syntax(line_no, "`c` takes `i j re im`"));
                }
                let i = rest[0]
                    .parse::<usize>()
                    .map_err(|_| syntax(line_no, format!("invalid index `{}`", rest[0])))?;
                let j = rest[1]
                    .parse::<usize>()
                    .map_err(|_| syntax(line_no, format!("invalid index `{}`", rest[1])))?;
                if i == 0 || j == 0 {
                    return Err(syntax(line_no, "state indices are 1-based"));
                }
                if i == j {
                    return Err(syntax(
                        line_no,
                        "diagonal coupling not allowed; put the diagonal in `alpha`",
                    ));
                }
                if i > j {
                    return Err(syntax(line_no, "coupling lines need i < j"));
                }
                let re = parse_float(line_no, rest[2])?;
                let im = parse_float(line_no, rest[3])?;
                couplings.push((line_no, i - 1, j - 1, Complex64::new(re, im)));
            }
            other => return Err(syntax(line_no, format!("unknown keyword `{other}`"))),
        }
    }

    let n = n.ok_or(ParseError::Missing("n"))?;
    let beta = beta.ok_or(ParseError::Missing("beta"))?;
    let alpha = alpha.ok_or(ParseError::Missing("alpha"))?;
    let mut spec = ModelSpec {
        n,
        beta,
        alpha,
        coupling: nalgebra::DMatrix::zeros(n, n),
    };
    let mut seen = std::collections::HashSet::new();
    for (line_no, i, j, value) in couplings {
        if j >= n {
            return Err(syntax(
                line_no,
                format!("state index {} out of range for n = {n}", j + 1),
            ));
        }
        if !seen.insert((i, j)) {
            return Err(syntax(
                line_no,
                format!("duplicate coupling ({},{})", i + 1, j + 1),
            ));
        }
        spec.set_coupling(i, j, value);
    }
    Ok(spec)
}

/// Writes `spec` in model file syntax. Floats use the shortest decimal
/// representation that parses back to the same value; only nonzero upper
/// triangle couplings are emitted.
pub fn format(spec: &ModelSpec) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!("n {}\n", spec.n));
    out.push_str(&format!("beta {}\n", join(&spec.beta)));
    out.push_str(&format!("alpha {}\n", join(&spec.alpha)));
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let c = spec.coupling[(i, j)];
            if c.norm_sqr() > 0.0 {
                out.push_str(&format!("c {} {} {} {}\n", i + 1, j + 1, c.re, c.im));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, Violation};

    #[test]
    fn parses_two_state_model_with_comments() {
        let spec = parse(
            "# two-state\n\
             n 2\n\
             beta 1 -1   # slopes\n\
             alpha 0 0\n\
             \n\
             c 1 2 0.5 0\n",
        )
        .unwrap();
        assert_eq!(spec.n, 2);
        assert_eq!(spec.beta, vec![1.0, -1.0]);
        assert_eq!(spec.coupling[(0, 1)], Complex64::new(0.5, 0.0));
        assert_eq!(spec.coupling[(1, 0)], Complex64::new(0.5, 0.0));
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn conjugate_entry_is_implied() {
        let spec = parse("n 2\nbeta 1 0\nalpha 0 0\nc 1 2 0.3 0.24\n").unwrap();
        assert_eq!(spec.coupling[(1, 0)], Complex64::new(0.3, -0.24));
    }

    #[test]
    fn rejects_diagonal_and_misordered_couplings() {
        let err = parse("n 2\nbeta 1 0\nalpha 0 0\nc 1 1 0.3 0\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 4, .. }));
        assert!(parse("n 2\nbeta 1 0\nalpha 0 0\nc 2 1 0.3 0\n").is_err());
        assert!(parse("n 2\nbeta 1 0\nalpha 0 0\nc 1 3 0.3 0\n").is_err());
        assert!(parse("n 2\nbeta 1 0\nalpha 0 0\nc 1 2 0.3 0\nc 1 2 0.1 0\n").is_err());
    }

    #[test]
    fn missing_and_malformed_lines() {
        assert_eq!(parse("beta 1\nalpha 0\n"), Err(ParseError::Missing("n")));
        assert!(parse("n 1\nbeta x\nalpha 0\n").is_err());
        assert!(parse("n 1\nbeta 1\nalpha 0\ngamma 2\n").is_err());
    }

    #[test]
    fn length_mismatch_is_left_to_validation() {
        let spec = parse("n 3\nbeta 1 0\nalpha 0 0 0\n").unwrap();
        assert!(matches!(
            validate(&spec)[0],
            Violation::LengthMismatch { field: "beta", .. }
        ));
    }

    #[test]
    fn full_precision_round_trip() {
        let text = "n 3\nbeta 0.1 -0.30000000000000004 2\nalpha 1e-300 0 -0\nc 1 2 0.1 0.2\nc 2 3 -5.5 0\n";
        let spec = parse(text).unwrap();
        let again = parse(&format(&spec)).unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.beta[1], -0.30000000000000004);
    }
}
