//! Recursive-descent parser for rational expressions.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Exponents must be
//! nonnegative integer literals.

use num_bigint::BigInt;

use super::poly::Polynomial;
use super::ratfun::RationalFunction;
use super::scalar::FieldTag;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, AlgebraError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((pos, Tok::Int(s.parse().unwrap())));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|c| c.1).collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((pos, Tok::Sym(ch)));
            i += 1;
        } else {
            return Err(AlgebraError::Syntax { pos, message: format!("unexpected character '{ch}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    vars: Vec<&'a str>,
    field: FieldTag,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn syntax<T>(&self, message: &str) -> Result<T, AlgebraError> {
        Err(AlgebraError::Syntax { pos: self.pos(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<RationalFunction, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?)?;
            } else if self.eat('/') {
                let pos = self.pos();
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(AlgebraError::ZeroDivisorInExpression { pos });
                }
                acc = acc.div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction, AlgebraError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, AlgebraError> {
        let mut base = self.atom()?;
        while self.eat('^') {
            let pos = self.pos();
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.at += 1;
                    let e: u32 = n.try_into().map_err(|_| AlgebraError::BadExponent { pos })?;
                    base = base.pow(e);
                }
                _ => return Err(AlgebraError::BadExponent { pos }),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFunction, AlgebraError> {
        let pos = self.pos();
        let nvars = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(RationalFunction::constant(self.field.from_bigint(&n), nvars))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(RationalFunction::var(self.field, nvars, i)),
                    None => Err(AlgebraError::UnknownIdentifier { name, pos }),
                }
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.syntax("expected ')'");
                }
                Ok(inner)
            }
            Some(_) => self.syntax("expected a number, identifier or '('"),
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parses `text` as a rational function in `variables` (variable `i` is the
/// `i`-th name).
pub fn parse_expr<S: AsRef<str>>(
    text: &str,
    variables: &[S],
    field: FieldTag,
) -> Result<RationalFunction, AlgebraError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        vars: variables.iter().map(|s| s.as_ref()).collect(),
        field,
    };
    let out = p.expr()?;
    if p.at != p.toks.len() {
        return p.syntax("unexpected trailing input");
    }
    Ok(out)
}

/// Like [`parse_expr`] but requires the result to be a polynomial.
pub fn parse_polynomial<S: AsRef<str>>(
    text: &str,
    variables: &[S],
    field: FieldTag,
) -> Result<Polynomial, AlgebraError> {
    parse_expr(text, variables, field)?
        .as_polynomial()
        .ok_or_else(|| AlgebraError::NotPolynomial(text.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldTag = FieldTag::Rationals;

    #[test]
    fn catalan_update() {
        let r = parse_expr("2*(2*x+1)/(x+2)*y", &["x", "y"], Q).unwrap();
        assert_eq!(r.numerator().to_string(), "4*x1*x2 + 2*x2");
        assert_eq!(r.denominator().to_string(), "x1 + 2");
    }

    #[test]
    fn zero_and_cancellation() {
        let z = parse_expr("0", &["x"], Q).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.denominator().to_string(), "1");
        let r = parse_expr("(x^2-1)/(x-1)", &["x"], Q).unwrap();
        assert_eq!(r.to_string(), "x1 + 1");
    }

    #[test]
    fn precedence() {
        let v = ["x", "y"];
        assert_eq!(parse_expr("-x^2", &v, Q).unwrap(), parse_expr("-(x^2)", &v, Q).unwrap());
        assert_eq!(parse_expr("1-x-y", &v, Q).unwrap(), parse_expr("(1-x)-y", &v, Q).unwrap());
        assert_eq!(parse_expr("x/y*x", &v, Q).unwrap(), parse_expr("(x/y)*x", &v, Q).unwrap());
        assert_eq!(parse_expr("3/2*x", &v, Q).unwrap().to_string(), "3/2*x1");
        assert_eq!(parse_expr("2^3^2", &v, Q).unwrap().to_string(), "64");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_expr("x + z", &["x"], Q),
            Err(AlgebraError::UnknownIdentifier { name: "z".into(), pos: 4 })
        );
        assert_eq!(parse_expr("x/(x-x)", &["x"], Q), Err(AlgebraError::ZeroDivisorInExpression { pos: 2 }));
        assert_eq!(parse_expr("x^y", &["x", "y"], Q), Err(AlgebraError::BadExponent { pos: 2 }));
        assert_eq!(parse_expr("x^-1", &["x"], Q), Err(AlgebraError::BadExponent { pos: 2 }));
        assert!(matches!(parse_expr("(x", &["x"], Q), Err(AlgebraError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expr("x $", &["x"], Q), Err(AlgebraError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expr("x x", &["x"], Q), Err(AlgebraError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn prime_field_literals_reduce() {
        let f = FieldTag::prime(5).unwrap();
        assert_eq!(parse_expr("7*x + 10", &["x"], f).unwrap().to_string(), "2*x1");
    }
}
