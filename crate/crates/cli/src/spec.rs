//! Input formats: operator specs, bivariate polynomials, flag values.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use minvset::{BiPoly, Complex64, ComplexPoly, DiffOperator};
use serde::{Deserialize, Serialize};

/// Malformed input. Maps to exit code 5.
#[derive(Debug)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

pub fn parse_err(msg: impl Into<String>) -> anyhow::Error {
    ParseError(msg.into()).into()
}

/// A coefficient written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Pair([f64; 2]),
    Real(f64),
}

impl Coef {
    pub fn value(self) -> Complex64 {
        match self {
            Coef::Pair([re, im]) => Complex64::new(re, im),
            Coef::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn pair(c: Complex64) -> Coef {
    Coef::Pair([c.re, c.im])
}

/// `{"name": ..., "coeffs": [Q_0, Q_1, ...]}` with each `Q_j` listed in
/// ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub coeffs: Vec<Vec<Coef>>,
}

impl OperatorSpec {
    pub fn from_operator(t: &DiffOperator, name: Option<String>) -> Self {
        OperatorSpec {
            name,
            coeffs: t
                .coeffs()
                .iter()
                .map(|q| q.coeffs().iter().copied().map(pair).collect())
                .collect(),
        }
    }

    pub fn operator(&self) -> anyhow::Result<DiffOperator> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (j, q) in self.coeffs.iter().enumerate() {
            let mut poly = Vec::with_capacity(q.len());
            for (i, c) in q.iter().enumerate() {
                let v = c.value();
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(parse_err(format!("coeffs[{j}][{i}] is not finite")));
                }
                poly.push(v);
            }
            coeffs.push(ComplexPoly::new(poly));
        }
        let t = DiffOperator::new(coeffs);
        if t.is_zero() {
            return Err(parse_err("operator has only zero coefficients"));
        }
        Ok(t)
    }

    /// Canonical form: trimmed coefficients written as pairs.
    pub fn canonical(&self) -> anyhow::Result<Self> {
        Ok(Self::from_operator(&self.operator()?, self.name.clone()))
    }
}

/// `{"coeffs": rows}` where `rows[i][j]` multiplies `x^i z^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiPolySpec {
    pub coeffs: Vec<Vec<Coef>>,
}

impl BiPolySpec {
    pub fn from_bipoly(b: &BiPoly) -> Self {
        BiPolySpec {
            coeffs: b
                .coeffs()
                .iter()
                .map(|r| r.iter().copied().map(pair).collect())
                .collect(),
        }
    }

    pub fn bipoly(&self) -> anyhow::Result<BiPoly> {
        let rows: Vec<Vec<Complex64>> = self
            .coeffs
            .iter()
            .map(|r| r.iter().map(|c| c.value()).collect())
            .collect();
        if rows
            .iter()
            .flatten()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(parse_err("bivariate coefficients must be finite"));
        }
        Ok(BiPoly::new(rows))
    }
}

fn json_err(what: &str, e: serde_json::Error) -> anyhow::Error {
    parse_err(format!("{what}: {e}"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| json_err(what, e))
}

pub fn read_operator(path: &Path) -> anyhow::Result<OperatorSpec> {
    let spec: OperatorSpec = read_json(path, "operator spec")?;
    spec.canonical()
}

pub fn parse_complex(s: &str) -> anyhow::Result<Complex64> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let cleaned = cleaned.replace('\u{2212}', "-");
    Complex64::from_str(&cleaned).map_err(|_| parse_err(format!("not a complex number: {s:?}")))
}

/// `a=1,b=-2` names coefficients from `x^m` downwards; `[q0, q1, ...]` lists
/// them in ascending order.
pub fn parse_family_poly(s: &str, m: usize) -> anyhow::Result<ComplexPoly> {
    let s = s.trim();
    if s.starts_with('[') {
        let coefs: Vec<Coef> = serde_json::from_str(s).map_err(|e| json_err("polynomial", e))?;
        return Ok(ComplexPoly::new(
            coefs.into_iter().map(Coef::value).collect(),
        ));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected name=value, got {part:?}")))?;
        let name = name.trim();
        let letter = match name.as_bytes() {
            [b] if b.is_ascii_lowercase() => (b - b'a') as usize,
            _ => {
                return Err(parse_err(format!(
                    "coefficient names are single letters, got {name:?}"
                )))
            }
        };
        if letter > m {
            return Err(parse_err(format!(
                "{name} would be a coefficient below x^0 for m = {m}"
            )));
        }
        coeffs[m - letter] = parse_complex(value)?;
    }
    Ok(ComplexPoly::new(coeffs))
}

/// `3..5` (inclusive), `3..=5` or `3,4,5`.
pub fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| parse_err(format!("bad degree {t:?} in {s:?}")))
    };
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(parse_err(format!("empty range {s:?}")));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<anyhow::Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(parse_err("degrees must be positive"));
    }
    Ok(out)
}

/// `WxH`, both positive.
pub fn parse_size(s: &str) -> anyhow::Result<[u32; 2]> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| parse_err(format!("expected WxH, got {s:?}")))?;
    let dim = |t: &str| match t.trim().parse::<u32>() {
        Ok(v) if v > 0 && v <= 16384 => Ok(v),
        _ => Err(parse_err(format!("bad image dimension {t:?}"))),
    };
    Ok([dim(w)?, dim(h)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips() {
        let text = r#"{"name":"levy","coeffs":[[2],[[0,1]],[0,1,1]]}"#;
        let spec: OperatorSpec = serde_json::from_str(text).unwrap();
        let canon = spec.canonical().unwrap();
        let again: OperatorSpec =
            serde_json::from_str(&serde_json::to_string(&canon).unwrap()).unwrap();
        assert_eq!(again, canon);
        assert_eq!(again.operator().unwrap(), spec.operator().unwrap());
    }

    #[test]
    fn zero_operator_is_rejected() {
        let spec: OperatorSpec = serde_json::from_str(r#"{"coeffs":[[0],[0,0]]}"#).unwrap();
        assert!(spec.operator().is_err());
    }

    #[test]
    fn family_letters_descend_from_the_top() {
        let q = parse_family_poly("a=1,b=0", 1).unwrap();
        assert_eq!(q, ComplexPoly::from_real(&[0.0, 1.0]));
        let q = parse_family_poly("a=2, c=1-i", 2).unwrap();
        assert_eq!(q.coeff(0), Complex64::new(1.0, -1.0));
        assert_eq!(q.coeff(2), Complex64::new(2.0, 0.0));
        assert!(parse_family_poly("c=1", 1).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("1,2,5").unwrap(), vec![1, 2, 5]);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("0..2").is_err());
    }

    #[test]
    fn complex_flags() {
        assert_eq!(
            parse_complex("\u{2212}2.25").unwrap(),
            Complex64::new(-2.25, 0.0)
        );
        assert_eq!(parse_complex("1 + 2i").unwrap(), Complex64::new(1.0, 2.0));
        assert!(parse_complex("abc").is_err());
        assert_eq!(parse_size("640x480").unwrap(), [640, 480]);
    }

    proptest::proptest! {
        #[test]
        fn operators_survive_json(
            raw in proptest::collection::vec(
                proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..5),
                1..5,
            )
        ) {
            let coeffs: Vec<ComplexPoly> = raw
                .iter()
                .map(|q| ComplexPoly::new(q.iter().map(|&(re, im)| Complex64::new(re, im)).collect()))
                .collect();
            let t = DiffOperator::new(coeffs);
            proptest::prop_assume!(!t.is_zero());
            let text = serde_json::to_string(&OperatorSpec::from_operator(&t, None)).unwrap();
            let back: OperatorSpec = serde_json::from_str(&text).unwrap();
            proptest::prop_assert_eq!(back.operator().unwrap(), t);
        }
    }
}
