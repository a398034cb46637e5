//! Recursive-descent parser for interaction polynomials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'i' | 'z' integer | 'conj' '(' expr ')' | '(' expr ')'
//! number := digits ('.' digits)?
//! ```

use alloc::string::ToString;
use alloc::vec;

use num_traits::{CheckedMul, One, Zero};

use super::poly::{Coeff, InteractionPoly, Rational};
use crate::error::{Error, ParseErrorKind, Result};

const MAX_EXPONENT: u32 = 64;

/// Parses `text` as a polynomial in `z1..zl` and `conj(z1)..conj(zl)`.
pub fn parse_interaction(text: &str, l: usize) -> Result<InteractionPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, l };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected());
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    l: usize,
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> Error {
        Error::Parse { pos: self.pos, kind }
    }

    fn unexpected(&self) -> Error {
        match core::str::from_utf8(&self.src[self.pos..]).ok().and_then(|s| s.chars().next()) {
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expr(&mut self) -> Result<InteractionPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<InteractionPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let den = self.unary()?;
                    let c = constant_value(&den).ok_or(Error::Parse {
                        pos: at,
                        kind: ParseErrorKind::NonPolynomial,
                    })?;
                    let inv = Coeff::one().div(&c).ok_or(Error::Parse {
                        pos: at,
                        kind: ParseErrorKind::DivisionByZero,
                    })?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<InteractionPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<InteractionPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let e = self.integer()?;
            if e > MAX_EXPONENT as u128 {
                return Err(Error::Parse { pos: at, kind: ParseErrorKind::BadExponent });
            }
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<InteractionPoly> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
        };
        match c {
            b'(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            b'0'..=b'9' | b'.' => {
                let r = self.number()?;
                Ok(InteractionPoly::constant(self.l, Coeff::real(r)))
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = self.pos;
                let ident = self.ident();
                match ident {
                    "i" => Ok(InteractionPoly::constant(self.l, Coeff::imag_unit())),
                    "conj" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        Ok(e.conj())
                    }
                    _ if ident.len() > 1
                        && ident.starts_with('z')
                        && ident[1..].bytes().all(|b| b.is_ascii_digit()) =>
                    {
                        let j: usize = ident[1..].parse().map_err(|_| Error::Parse {
                            pos: start,
                            kind: ParseErrorKind::Overflow,
                        })?;
                        if j == 0 || j > self.l {
                            return Err(Error::Parse {
                                pos: start,
                                kind: ParseErrorKind::ComponentOutOfRange { index: j, l: self.l },
                            });
                        }
                        InteractionPoly::variable(self.l, j - 1)
                    }
                    _ => Err(Error::Parse {
                        pos: start,
                        kind: ParseErrorKind::UnexpectedToken(ident.to_string()),
                    }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn integer(&mut self) -> Result<u128> {
        let start = self.pos;
        let mut v: u128 = 0;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((self.src[self.pos] - b'0') as u128))
                .ok_or(Error::Parse { pos: start, kind: ParseErrorKind::Overflow })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.unexpected());
        }
        Ok(v)
    }

    /// Decimal literal as an exact rational.
    fn number(&mut self) -> Result<Rational> {
        let start = self.pos;
        let overflow = || Error::Parse { pos: start, kind: ParseErrorKind::Overflow };
        let mut num = Rational::zero();
        let ten = Rational::from_integer(10);
        let mut digits = 0;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            let d = Rational::from_integer((self.src[self.pos] - b'0') as i128);
            num = num.checked_mul(&ten).ok_or_else(overflow)? + d;
            self.pos += 1;
            digits += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let mut scale = Rational::one();
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                scale = scale.checked_mul(&ten).ok_or_else(overflow)?;
                let d = Rational::from_integer((self.src[self.pos] - b'0') as i128);
                num = num.checked_mul(&ten).ok_or_else(overflow)? + d;
                self.pos += 1;
                digits += 1;
            }
            num /= scale;
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.unexpected());
        }
        Ok(num)
    }
}

/// Value of a polynomial consisting only of a constant term.
fn constant_value(p: &InteractionPoly) -> Option<Coeff> {
    let l = p.components();
    match p.monomials() {
        [] => Some(Coeff::zero()),
        [m] if m.holo == vec![0; l] && m.anti == vec![0; l] => Some(m.coeff),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::poly::rat;

    #[test]
    fn kappa_interaction() {
        let f = parse_interaction("conj(z1)^2 * z2", 2).unwrap();
        assert_eq!(f.monomials().len(), 1);
        let m = &f.monomials()[0];
        assert_eq!(m.coeff, Coeff::one());
        assert_eq!(m.holo, vec![0, 1]);
        assert_eq!(m.anti, vec![2, 0]);
    }

    #[test]
    fn shg_interaction() {
        let f = parse_interaction("(1/2)*conj(z1)*(z2^2 + z3^2)", 3).unwrap();
        assert_eq!(f.monomials().len(), 2);
        for m in f.monomials() {
            assert_eq!(m.coeff, Coeff::real(rat(1, 2)));
        }
    }

    #[test]
    fn zero_is_pruned() {
        assert!(parse_interaction("0*z1", 1).unwrap().is_zero());
    }

    #[test]
    fn decimals_and_imaginary_unit() {
        let f = parse_interaction("0.25*i*z1 - 1.5", 1).unwrap();
        assert_eq!(
            f.coeff_of(&[1], &[0]),
            Coeff::Exact { re: rat(0, 1), im: rat(1, 4) }
        );
        assert_eq!(f.coeff_of(&[0], &[0]), Coeff::real(rat(-3, 2)));
    }

    #[test]
    fn division_by_complex_constant() {
        let f = parse_interaction("z1/(1+i)", 1).unwrap();
        assert_eq!(f.coeff_of(&[1], &[0]), Coeff::Exact { re: rat(1, 2), im: rat(-1, 2) });
    }

    #[test]
    fn errors_carry_positions() {
        match parse_interaction("z1 + z3", 2) {
            Err(Error::Parse { pos: 5, kind: ParseErrorKind::ComponentOutOfRange { index: 3, l: 2 } }) => {}
            other => panic!("{other:?}"),
        }
        match parse_interaction("z1 / z2", 2) {
            Err(Error::Parse { pos: 3, kind: ParseErrorKind::NonPolynomial }) => {}
            other => panic!("{other:?}"),
        }
        match parse_interaction("z1 * ", 2) {
            Err(Error::Parse { kind: ParseErrorKind::UnexpectedEnd, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_interaction("abs(z1)", 1) {
            Err(Error::Parse { pos: 0, kind: ParseErrorKind::UnexpectedToken(_) }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_interaction("z1 z1", 1).is_err());
        assert!(parse_interaction("z1/0", 1).is_err());
    }
}
