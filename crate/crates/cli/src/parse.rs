//! Text forms for complex numbers and shift patterns on the command line.

use std::str::FromStr;

use dpse_core::solver::ShiftPattern;
use dpse_core::Complex64;

use crate::error::CliError;

/// Parses `2`, `-0.5`, `1.5i`, `-i`, `-0.05+0.5i`, `3e-2-1e1i`.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::usage(format!("cannot parse {text:?} as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return f64::from_str(&t).map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => f64::from_str(v).map_err(|_| bad())?,
    };
    let re = f64::from_str(re).map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Comma-separated complex list.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',').map(parse_complex).collect()
}

/// How the starting shifts are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSpec {
    Pattern(ShiftPattern),
    /// `p` ground-truth eigenvalues, each moved by `offset` in a seeded direction.
    Truth { offset: f64 },
}

/// Accepts `paper-fan`, `ring:<center>:<radius>`, `truth[:<offset>]`, or an
/// explicit comma-separated list.
pub fn parse_shift_spec(text: &str, fan_scale: Complex64) -> Result<ShiftSpec, CliError> {
    let t = text.trim();
    if t == "paper-fan" || t == "fan" {
        return Ok(ShiftSpec::Pattern(ShiftPattern::PaperFan { scale: fan_scale }));
    }
    if let Some(rest) = t.strip_prefix("ring:") {
        let (center, radius) = rest
            .rsplit_once(':')
            .ok_or_else(|| CliError::usage("ring shifts take the form ring:<center>:<radius>"))?;
        let radius: f64 = radius
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad ring radius {radius:?}")))?;
        if !(radius > 0.0) {
            return Err(CliError::usage("ring radius must be positive"));
        }
        return Ok(ShiftSpec::Pattern(ShiftPattern::Ring {
            center: parse_complex(center)?,
            radius,
        }));
    }
    if let Some(rest) = t.strip_prefix("truth") {
        let offset = match rest.strip_prefix(':') {
            Some(v) => v.trim().parse().map_err(|_| CliError::usage(format!("bad truth offset {v:?}")))?,
            None if rest.is_empty() => 0.05,
            None => return Err(CliError::usage(format!("unknown shift pattern {t:?}"))),
        };
        return Ok(ShiftSpec::Truth { offset });
    }
    Ok(ShiftSpec::Pattern(ShiftPattern::Explicit {
        shifts: parse_complex_list(t)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex(" -0.5").unwrap(), c(-0.5, 0.0));
        assert_eq!(parse_complex("1.5i").unwrap(), c(0.0, 1.5));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("-0.05+0.5i").unwrap(), c(-0.05, 0.5));
        assert_eq!(parse_complex("3e-2-1e1i").unwrap(), c(0.03, -10.0));
        assert_eq!(parse_complex("1e+2+1e-3j").unwrap(), c(100.0, 0.001));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn shift_specs() {
        let fan = c(-0.05, 0.5);
        assert_eq!(
            parse_shift_spec(" -0.5,-2.5", fan).unwrap(),
            ShiftSpec::Pattern(ShiftPattern::Explicit {
                shifts: vec![c(-0.5, 0.0), c(-2.5, 0.0)]
            })
        );
        assert_eq!(
            parse_shift_spec("paper-fan", fan).unwrap(),
            ShiftSpec::Pattern(ShiftPattern::PaperFan { scale: fan })
        );
        assert_eq!(
            parse_shift_spec("ring:-1+2i:0.5", fan).unwrap(),
            ShiftSpec::Pattern(ShiftPattern::Ring {
                center: c(-1.0, 2.0),
                radius: 0.5
            })
        );
        assert_eq!(parse_shift_spec("truth", fan).unwrap(), ShiftSpec::Truth { offset: 0.05 });
        assert_eq!(parse_shift_spec("truth:0.1", fan).unwrap(), ShiftSpec::Truth { offset: 0.1 });
        assert!(parse_shift_spec("ring:1", fan).is_err());
        assert!(parse_shift_spec("truthy", fan).is_err());
    }
}
