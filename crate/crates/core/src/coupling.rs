//! Coupling constants: exact rationals, quadratic surds, and raw decimals.

use std::fmt;
use std::str::FromStr;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingSpec {
    /// `r/h` in lowest terms with `h >= 1`.
    Rational { r: i64, h: i64 },
    /// `a * sqrt(b) / c` with `b >= 0`; the radicand is not reduced.
    Surd { a: i64, b: i64, c: i64 },
    /// A decimal literal, kept at double-double precision. Never promoted to a
    /// rational even when the literal happens to be terminating.
    Real { value: DoubleDouble, text: String },
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl CouplingSpec {
    pub fn rational(r: i64, h: i64) -> Result<Self> {
        if h == 0 {
            return Err(Error::arg("zero denominator"));
        }
        let g = gcd(r, h).max(1);
        let sign = h.signum();
        Ok(CouplingSpec::Rational {
            r: sign * r / g,
            h: sign * h / g,
        })
    }

    pub fn surd(a: i64, b: i64, c: i64) -> Result<Self> {
        if b < 0 {
            return Err(Error::arg("negative radicand"));
        }
        if c == 0 {
            return Err(Error::arg("zero denominator"));
        }
        Ok(CouplingSpec::Surd { a, b, c })
    }

    pub fn real(value: f64) -> Self {
        CouplingSpec::Real {
            value: DoubleDouble::from_f64(value),
            text: format!("{value}"),
        }
    }

    /// The coupling value to roughly 32 significant digits.
    pub fn value_dd(&self) -> DoubleDouble {
        match *self {
            CouplingSpec::Rational { r, h } => {
                DoubleDouble::from_i128(r as i128) / DoubleDouble::from_i128(h as i128)
            }
            CouplingSpec::Surd { a, b, c } => {
                DoubleDouble::from_i128(b as i128).sqrt() * DoubleDouble::from_i128(a as i128)
                    / DoubleDouble::from_i128(c as i128)
            }
            CouplingSpec::Real { value, .. } => value,
        }
    }

    pub fn value(&self) -> f64 {
        self.value_dd().to_f64()
    }

    pub fn as_rational(&self) -> Option<(i64, i64)> {
        match *self {
            CouplingSpec::Rational { r, h } => Some((r, h)),
            _ => None,
        }
    }

    /// `J + eps` as a raw real. A zero shift returns the coupling unchanged.
    pub fn perturbed(&self, eps: f64) -> CouplingSpec {
        if eps == 0.0 {
            return self.clone();
        }
        CouplingSpec::Real {
            value: self.value_dd() + DoubleDouble::from_f64(eps),
            text: format!("{self}{eps:+e}"),
        }
    }
}

impl fmt::Display for CouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingSpec::Rational { r, h } if *h == 1 => write!(f, "{r}"),
            CouplingSpec::Rational { r, h } => write!(f, "{r}/{h}"),
            CouplingSpec::Surd { a, b, c } => {
                match *a {
                    1 => write!(f, "sqrt({b})")?,
                    -1 => write!(f, "-sqrt({b})")?,
                    _ => write!(f, "{a}*sqrt({b})")?,
                }
                if *c != 1 {
                    write!(f, "/{c}")?;
                }
                Ok(())
            }
            CouplingSpec::Real { text, .. } => f.write_str(text),
        }
    }
}

/// Cursor over the input with byte positions for error reporting.
struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(' ') {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.src[start..]
            .bytes()
            .take_while(u8::is_ascii_digit)
            .count();
        if digits == 0 {
            return Err(self.err("expected integer"));
        }
        self.pos += digits;
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::Parse {
                position: start,
                message: "integer out of range".into(),
            })
    }

    fn sqrt(&mut self) -> Result<i64> {
        if !self.eat("(") {
            return Err(self.err("expected '(' after sqrt"));
        }
        let b = self.integer()?;
        if !self.eat(")") {
            return Err(self.err("expected ')'"));
        }
        Ok(b)
    }
}

fn is_decimal_literal(s: &str) -> bool {
    s.contains(['.', 'e', 'E']) && !s.contains(['/', '*', '(']) && DoubleDouble::parse_decimal(s).is_some()
}

impl FromStr for CouplingSpec {
    type Err = Error;

    /// Accepts `r/h`, `[a*]sqrt(b)[/c]`, `a/sqrt(b)`, or a decimal literal.
    fn from_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse {
                position: 0,
                message: "empty coupling".into(),
            });
        }
        if is_decimal_literal(text) {
            let value = DoubleDouble::parse_decimal(text).expect("checked literal");
            return Ok(CouplingSpec::Real {
                value,
                text: text.trim().to_string(),
            });
        }

        let mut lx = Lexer { src: text, pos: 0 };
        let sign = if lx.eat("-") {
            -1
        } else {
            lx.eat("+");
            1
        };

        if lx.eat("sqrt") {
            let b = lx.sqrt()?;
            let c = if lx.eat("/") { lx.integer()? } else { 1 };
            if !lx.done() {
                return Err(lx.err("unexpected trailing input"));
            }
            return CouplingSpec::surd(sign, b, c).map_err(|e| lx.err(e.to_string()));
        }

        let lead = lx.integer()?;
        if lx.eat("*") {
            if !lx.eat("sqrt") {
                return Err(lx.err("expected sqrt after '*'"));
            }
            let b = lx.sqrt()?;
            let c = if lx.eat("/") { lx.integer()? } else { 1 };
            if !lx.done() {
                return Err(lx.err("unexpected trailing input"));
            }
            return CouplingSpec::surd(sign * lead, b, c).map_err(|e| lx.err(e.to_string()));
        }
        if lx.eat("/") {
            if lx.eat("sqrt") {
                // a/sqrt(b) = a*sqrt(b)/b
                let b = lx.sqrt()?;
                if !lx.done() {
                    return Err(lx.err("unexpected trailing input"));
                }
                return CouplingSpec::surd(sign * lead, b, b).map_err(|e| lx.err(e.to_string()));
            }
            let h = lx.integer()?;
            if !lx.done() {
                return Err(lx.err("unexpected trailing input"));
            }
            return CouplingSpec::rational(sign * lead, h).map_err(|e| lx.err(e.to_string()));
        }
        if lx.done() {
            return CouplingSpec::rational(sign * lead, 1);
        }
        Err(lx.err("unrecognised coupling syntax"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_in_lowest_terms() {
        assert_eq!(
            "7/20".parse::<CouplingSpec>().unwrap(),
            CouplingSpec::Rational { r: 7, h: 20 }
        );
        assert_eq!(
            "21/37".parse::<CouplingSpec>().unwrap(),
            CouplingSpec::Rational { r: 21, h: 37 }
        );
        assert_eq!(
            "4/6".parse::<CouplingSpec>().unwrap(),
            CouplingSpec::Rational { r: 2, h: 3 }
        );
        assert_eq!(
            "-3/9".parse::<CouplingSpec>().unwrap(),
            CouplingSpec::Rational { r: -1, h: 3 }
        );
    }

    #[test]
    fn integer_literal_is_rational_but_decimal_is_not() {
        assert_eq!(
            "2".parse::<CouplingSpec>().unwrap(),
            CouplingSpec::Rational { r: 2, h: 1 }
        );
        let half = "0.5".parse::<CouplingSpec>().unwrap();
        assert!(matches!(half, CouplingSpec::Real { .. }));
        assert_eq!(half.value(), 0.5);
    }

    #[test]
    fn parses_surds() {
        let j = "sqrt(5)/3".parse::<CouplingSpec>().unwrap();
        assert_eq!(j, CouplingSpec::Surd { a: 1, b: 5, c: 3 });
        assert!((j.value() - 5f64.sqrt() / 3.0).abs() < 1e-16);
        let j = "2*sqrt(3)/7".parse::<CouplingSpec>().unwrap();
        assert_eq!(j, CouplingSpec::Surd { a: 2, b: 3, c: 7 });
        let j = "1/sqrt(2)".parse::<CouplingSpec>().unwrap();
        assert!((j.value() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match "7/x".parse::<CouplingSpec>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        match "sqrt(5".parse::<CouplingSpec>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!("".parse::<CouplingSpec>().is_err());
        assert!("1/0".parse::<CouplingSpec>().is_err());
        assert!("3/4/5".parse::<CouplingSpec>().is_err());
    }

    #[test]
    fn surd_carries_extended_precision() {
        let j = CouplingSpec::surd(1, 5, 3).unwrap().value_dd();
        let back = j.mul_f64(3.0) * j.mul_f64(3.0) - DoubleDouble::from_f64(5.0);
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn display_round_trips() {
        for s in ["7/20", "sqrt(5)/3", "2*sqrt(3)/7", "-1/4", "3"] {
            let j: CouplingSpec = s.parse().unwrap();
            assert_eq!(j.to_string().parse::<CouplingSpec>().unwrap(), j);
        }
    }
}
