//! Text map specifications.
//!
//! One `key = value` per line, `#` starts a comment. Either a family:
//!
//! ```text
//! family = logistic
//! lambda = 3.2          # or `feigenbaum`
//! ```
//!
//! Families and their keys: `logistic` (`lambda`), `tent` (`slope`, default 2),
//! `doubling`, `lorenz` (`c`, `alpha`, `shift`, `gap`, all optional),
//! `bimodal_halves` (`lambda`), `chebyshev3`, `contraction`.
//!
//! Or explicit branches, listed left to right and tiling `[0,1]`:
//!
//! ```text
//! name = tent
//! branch = 0 0.5 poly 0 2
//! branch = 0.5 1 poly 2 -2 decreasing
//! branch = 0.5 1 power <offset> <scale> <exponent> <phi0> <phi1> ...
//! piece = 0.6 poly -1 2      # continues the previous branch from x = 0.6
//! ```
//!
//! `poly` coefficients are in ascending order; `power` encodes
//! `offset + scale·|φ(x)|^exponent` with `φ` given by its ascending
//! coefficients. A trailing `increasing`/`decreasing` declares monotonicity,
//! which otherwise is read off the endpoint values.

use crate::catalog::{self, Family};
use crate::error::{Error, Result};
use crate::expr::Form;
use crate::interval::Interval;
use crate::map::{Branch, Piece, PiecewiseMap};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(s: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(b) = start.take() {
                out.push(Token { text: &s[b..i], column: offset + b + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push(Token { text: &s[b..], column: offset + b + 1 });
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn number(tok: &Token<'_>, line: usize) -> Result<f64> {
    tok.text
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, tok.column, format!("expected a number, found `{}`", tok.text)))
}

fn parse_form(toks: &[Token<'_>], line: usize, end_column: usize) -> Result<(Form, Option<bool>)> {
    let (kind, rest) = toks.split_first().ok_or_else(|| err(line, end_column, "missing form (`poly` or `power`)"))?;
    let mut rest = rest;
    let mut declared = None;
    if let Some(last) = rest.last() {
        match last.text {
            "increasing" | "inc" => declared = Some(true),
            "decreasing" | "dec" => declared = Some(false),
            _ => {}
        }
        if declared.is_some() {
            rest = &rest[..rest.len() - 1];
        }
    }
    let nums = rest.iter().map(|t| number(t, line)).collect::<Result<Vec<_>>>()?;
    let form = match kind.text {
        "poly" => {
            if nums.is_empty() {
                return Err(err(line, kind.column, "`poly` needs at least one coefficient"));
            }
            Form::poly(nums)
        }
        "power" => {
            if nums.len() < 4 {
                return Err(err(line, kind.column, "`power` needs offset, scale, exponent and φ coefficients"));
            }
            if nums[2] < 1.0 {
                return Err(err(line, rest[2].column, "exponent must be at least 1"));
            }
            Form::power(nums[0], nums[1], nums[3..].to_vec(), nums[2])
        }
        other => return Err(err(line, kind.column, format!("unknown form `{other}`"))),
    };
    Ok((form, declared))
}

/// Parse a map specification.
pub fn parse_map(text: &str) -> Result<PiecewiseMap> {
    let mut family: Option<(String, usize, usize)> = None;
    let mut params: Vec<(String, String, usize, usize)> = Vec::new();
    let mut name: Option<String> = None;
    let mut branches: Vec<(Branch, Option<bool>, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let eq = content.find('=').ok_or_else(|| {
            let col = content.len() - content.trim_start().len() + 1;
            err(line, col, "expected `key = value`")
        })?;
        let key = content[..eq].trim();
        let value_offset = eq + 1;
        let value = &content[value_offset..];
        let key_col = content.len() - content.trim_start().len() + 1;
        if key.is_empty() {
            return Err(err(line, key_col, "empty key"));
        }
        let value_col = value_offset + value.len() - value.trim_start().len() + 1;
        match key {
            "family" => family = Some((value.trim().to_string(), line, value_col)),
            "name" => name = Some(value.trim().to_string()),
            "branch" => {
                let toks = tokens(value, value_offset);
                if toks.len() < 3 {
                    return Err(err(line, value_col, "branch needs `<lo> <hi> <form> ...`"));
                }
                let lo = number(&toks[0], line)?;
                let hi = number(&toks[1], line)?;
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                    return Err(err(line, toks[0].column, format!("bad domain ({lo}, {hi})")));
                }
                if let Some((prev, _, _)) = branches.last() {
                    if lo < prev.domain.hi {
                        return Err(err(line, toks[0].column, "overlapping branch domains"));
                    }
                }
                let (form, declared) = parse_form(&toks[2..], line, content.len() + 1)?;
                let branch = Branch { domain: Interval::new(lo, hi), pieces: vec![Piece { start: lo, form }], increasing: true };
                branches.push((branch, declared, line));
            }
            "piece" => {
                let toks = tokens(value, value_offset);
                let (branch, declared, _) = branches
                    .last_mut()
                    .ok_or_else(|| err(line, key_col, "`piece` before any `branch`"))?;
                let start_tok = toks.first().ok_or_else(|| err(line, value_col, "piece needs a start"))?;
                let start = number(start_tok, line)?;
                let last_start = branch.pieces.last().map(|p| p.start).unwrap_or(branch.domain.lo);
                if start <= last_start || start >= branch.domain.hi {
                    return Err(err(line, start_tok.column, "piece start outside the current branch"));
                }
                let (form, d) = parse_form(&toks[1..], line, content.len() + 1)?;
                if d.is_some() {
                    *declared = d;
                }
                branch.pieces.push(Piece { start, form });
            }
            _ => params.push((key.to_string(), value.trim().to_string(), line, value_col)),
        }
    }

    if let Some((fam, line, col)) = family {
        if !branches.is_empty() {
            return Err(err(line, col, "`family` and explicit branches are mutually exclusive"));
        }
        let family = family_from(&fam, &params, line, col)?;
        let mut map = family.build();
        if let Some(n) = name {
            map.name = n;
        }
        return Ok(map);
    }
    if let Some((key, _, line, col)) = params.first() {
        return Err(err(*line, *col, format!("unknown key `{key}`")));
    }
    if branches.is_empty() {
        return Err(err(1, 1, "no `family` and no `branch` lines"));
    }
    let built = branches
        .into_iter()
        .map(|(mut b, declared, _)| {
            b.increasing = declared.unwrap_or_else(|| b.eval(b.domain.hi) >= b.eval(b.domain.lo));
            b
        })
        .collect();
    PiecewiseMap::new(name.unwrap_or_else(|| "explicit".into()), built)
}

fn family_from(fam: &str, params: &[(String, String, usize, usize)], line: usize, col: usize) -> Result<Family> {
    let get = |key: &str| -> Result<Option<f64>> {
        match params.iter().find(|(k, ..)| k == key) {
            None => Ok(None),
            Some((_, v, l, c)) if key == "lambda" && v == "feigenbaum" => {
                let _ = (l, c);
                Ok(Some(catalog::feigenbaum_parameter()))
            }
            Some((_, v, l, c)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| err(*l, *c, format!("expected a number for `{key}`, found `{v}`"))),
        }
    };
    let allowed: &[&str] = match fam {
        "logistic" | "bimodal_halves" => &["lambda"],
        "tent" => &["slope"],
        "lorenz" => &["c", "alpha", "shift", "gap"],
        "doubling" | "chebyshev3" | "contraction" => &[],
        other => return Err(err(line, col, format!("unknown family `{other}`"))),
    };
    if let Some((k, _, l, c)) = params.iter().find(|(k, ..)| !allowed.contains(&k.as_str())) {
        return Err(err(*l, *c, format!("family `{fam}` has no parameter `{k}`")));
    }
    let required = |key: &str| -> Result<f64> {
        get(key)?.ok_or_else(|| err(line, col, format!("family `{fam}` needs `{key}`")))
    };
    let family = match fam {
        "logistic" => {
            let lambda = required("lambda")?;
            if !(0.0..=4.0).contains(&lambda) {
                return Err(err(line, col, "logistic parameter must lie in [0, 4]"));
            }
            Family::Logistic { lambda }
        }
        "bimodal_halves" => {
            let lambda = required("lambda")?;
            if !(0.0 < lambda && lambda <= 4.0) {
                return Err(err(line, col, "bimodal parameter must lie in (0, 4]"));
            }
            Family::BimodalHalves { lambda }
        }
        "tent" => {
            let slope = get("slope")?.unwrap_or(2.0);
            if !(0.0 < slope && slope <= 2.0) {
                return Err(err(line, col, "tent slope must lie in (0, 2]"));
            }
            Family::Tent { slope }
        }
        "lorenz" => Family::Lorenz {
            c: get("c")?.unwrap_or(catalog::LORENZ_C),
            alpha: get("alpha")?.unwrap_or(catalog::LORENZ_ALPHA),
            shift: get("shift")?.unwrap_or(catalog::LORENZ_SHIFT),
            gap: get("gap")?.unwrap_or(catalog::LORENZ_GAP),
        },
        "doubling" => Family::Doubling,
        "chebyshev3" => Family::Chebyshev3,
        _ => Family::Contraction,
    };
    if let Family::Lorenz { c, alpha, shift, gap } = family {
        if !(0.0 < c && c < 1.0) || alpha < 1.0 || shift < 0.0 || gap < 0.0 || shift + gap > 1.0 {
            return Err(err(line, col, "lorenz parameters out of range"));
        }
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_spec() {
        let m = parse_map("# demo\nfamily = logistic\nlambda = 3.2\n").unwrap();
        assert_eq!(m.name, "logistic(3.2)");
        let f = parse_map("family = logistic\nlambda = feigenbaum").unwrap();
        assert!(f.name.starts_with("logistic(3.5699"));
    }

    #[test]
    fn explicit_branches_match_catalog() {
        let text = "name = tent\nbranch = 0 0.5 poly 0 2\nbranch = 0.5 1 poly 2 -2 decreasing\n";
        let m = parse_map(text).unwrap();
        let t = catalog::tent(2.0);
        for k in 0..50 {
            let x = (k as f64 + 0.3) / 50.0;
            assert_eq!(m.eval_unchecked(x), t.eval_unchecked(x));
        }
        assert!(!m.branch(1).increasing);
    }

    #[test]
    fn power_branches() {
        let text = "branch = 0 0.5 power 1 -0.5 2 1 -2\nbranch = 0.5 1 power 0 0.5 2 -1 2\n";
        let m = parse_map(text).unwrap();
        let d = m.check_nonflat().unwrap();
        assert_eq!(d[0].alpha_minus, 2.0);
        assert!(!d[0].continuous);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_map("family = logistic\nlambda = abc\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }
        match parse_map("branch = 0 0.6 poly 0 1\nbranch = 0.5 1 poly 0 1\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("overlapping"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_map("garbage line"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_map("branch = 0 1 poly 0 1 junk"), Err(Error::Parse { column: 23, .. })));
        assert!(matches!(parse_map("family = circle"), Err(Error::Parse { .. })));
    }
}
