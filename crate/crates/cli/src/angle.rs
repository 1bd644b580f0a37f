//! Angle arguments: plain floats or small expressions such as `pi/3`,
//! `-2*pi/5`, `acos(0.25)`.
//!
//! ```text
//! expr   := ['-'] factor (('*' | '/') factor)*
//! factor := number | 'pi' | 'π' | 'acos(' expr ')' | '(' expr ')'
//! ```

use std::f64::consts::PI;

const MAX_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse angle {input:?} at byte {pos}: {reason}")]
pub struct AngleError {
    pub input: String,
    pub pos: usize,
    pub reason: String,
}

/// Parses an angle in radians. The result is always finite.
pub fn parse_angle(input: &str) -> Result<f64, AngleError> {
    let mut p = Parser { src: input, pos: 0, depth: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != input.len() {
        return Err(p.fail("unexpected trailing input"));
    }
    if !v.is_finite() {
        return Err(p.fail("value is not finite"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn fail(&self, reason: &str) -> AngleError {
        AngleError { input: self.src.to_string(), pos: self.pos, reason: reason.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, AngleError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.fail("expression nested too deeply"));
        }
        let negate = self.eat("-");
        let mut v = self.factor()?;
        loop {
            if self.eat("*") {
                v *= self.factor()?;
            } else if self.eat("/") {
                let d = self.factor()?;
                if d == 0.0 {
                    return Err(self.fail("division by zero"));
                }
                v /= d;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(if negate { -v } else { v })
    }

    fn factor(&mut self) -> Result<f64, AngleError> {
        if self.eat("pi") || self.eat("π") {
            return Ok(PI);
        }
        if self.eat("acos(") {
            let x = self.expr()?;
            if !self.eat(")") {
                return Err(self.fail("expected ')'"));
            }
            if !(-1.0..=1.0).contains(&x) {
                return Err(self.fail("acos argument outside [-1, 1]"));
            }
            return Ok(x.acos());
        }
        if self.eat("(") {
            let x = self.expr()?;
            if !self.eat(")") {
                return Err(self.fail("expected ')'"));
            }
            return Ok(x);
        }
        self.number()
    }

    fn number(&mut self) -> Result<f64, AngleError> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() {
            let b = bytes[end];
            let sign_after_exp = (b == b'+' || b == b'-') && end > 0 && matches!(bytes[end - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || sign_after_exp {
                end += 1;
            } else {
                break;
            }
        }
        if end == 0 {
            return Err(self.fail("expected a number, 'pi' or 'acos('"));
        }
        let text = &self.rest()[..end];
        let v: f64 = text.parse().map_err(|_| self.fail("malformed number"))?;
        self.pos += end;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    #[test]
    fn accepts_plain_and_symbolic_forms() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert!((parse_angle("pi/3").unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert_eq!(parse_angle(" π / 2 ").unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle("-2*pi/3").unwrap(), -2.0 * PI / 3.0);
        assert_eq!(parse_angle("acos(0.5)").unwrap(), 0.5f64.acos());
        assert_eq!(parse_angle("acos(1/4)").unwrap(), 0.25f64.acos());
        assert_eq!(parse_angle("(pi)/(4)").unwrap(), PI / 4.0);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "pi/", "abc", "1..2", "inf", "NaN", "acos(2)", "1/0", "pi pi", "((1)", "1e999"] {
            assert!(parse_angle(bad).is_err(), "{bad:?}");
        }
        let deep = format!("{}1{}", "(".repeat(100), ")".repeat(100));
        assert!(parse_angle(&deep).is_err());
    }
}
