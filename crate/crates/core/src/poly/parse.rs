//! Recursive-descent parser for polynomial expressions.
//!
//! Accepts the canonical text form (`3/4 * X1^2 X2^1 + ...`) as well as
//! everyday input such as `(X+1)(X-1/2)` or `2.5*X^2 - Y`. Variables are
//! `X1..Xm`; `X`, `Y`, `Z` are aliases for `X1`, `X2`, `X3`. Juxtaposition
//! means multiplication.

use num_traits::Zero;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(Rational),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Token::Minus);
                i += c.len_utf8();
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            'X' | 'x' | 'Y' | 'y' | 'Z' | 'z' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let var = if start == i {
                    match c.to_ascii_uppercase() {
                        'X' => 0,
                        'Y' => 1,
                        _ => 2,
                    }
                } else {
                    if !c.eq_ignore_ascii_case(&'X') {
                        return Err(Error::Parse(format!("unexpected variable {c}{}", &text[start..i])));
                    }
                    let n: usize = text[start..i]
                        .parse()
                        .map_err(|_| Error::Parse("bad variable index".into()))?;
                    if n == 0 {
                        return Err(Error::Parse("variables are numbered from X1".into()));
                    }
                    n - 1
                };
                out.push(Token::Var(var));
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                // An exponent is a bare integer, so `X^2/4` reads as `(X^2)/4`.
                let after_caret = out.last() == Some(&Token::Caret);
                let mut seen_slash = after_caret;
                while i < bytes.len() {
                    let b = bytes[i] as char;
                    if b.is_ascii_digit() || (b == '.' && !after_caret) {
                        i += 1;
                    } else if (b == 'e' || b == 'E')
                        && i + 1 < bytes.len()
                        && (bytes[i + 1].is_ascii_digit() || bytes[i + 1] == b'-' || bytes[i + 1] == b'+')
                    {
                        i += 2;
                    } else if b == '/' && !seen_slash && i + 1 < bytes.len() && (bytes[i + 1].is_ascii_digit() || bytes[i + 1] == b'.') {
                        seen_slash = true;
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token::Number(parse_rational(&text[start..i])?));
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?} in {text:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    num_vars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?)?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    match self.next() {
                        Some(Token::Number(n)) if !n.is_zero() => acc = acc.scale(&n.recip()),
                        _ => return Err(Error::Parse("only division by a nonzero number is supported".into())),
                    }
                }
                Some(Token::Number(_)) | Some(Token::Var(_)) | Some(Token::Open) => {
                    acc = acc.mul(&self.power()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let e = match self.next() {
                Some(Token::Number(n)) if n.is_integer() && n >= Rational::from_integer(0.into()) => {
                    n.to_integer().try_into().map_err(|_| Error::Parse("exponent too large".into()))?
                }
                _ => return Err(Error::Parse("expected a nonnegative integer exponent".into())),
            };
            return base.pow(e, 4 * super::DEFAULT_DEGREE_BUDGET);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.next() {
            Some(Token::Number(n)) => Ok(Polynomial::constant(self.num_vars, n)),
            Some(Token::Var(v)) => {
                if v >= self.num_vars {
                    return Err(Error::Parse(format!(
                        "variable X{} used with only {} variable(s)",
                        v + 1,
                        self.num_vars
                    )));
                }
                Ok(Polynomial::var(self.num_vars, v))
            }
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a polynomial expression in `num_vars` variables.
pub fn parse_polynomial(text: &str, num_vars: usize) -> Result<Polynomial> {
    if num_vars == 0 {
        return Err(Error::Invalid("num_vars must be at least 1".into()));
    }
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut parser = Parser { tokens, pos: 0, num_vars };
    let p = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Parse(format!("trailing input in {text:?}")));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn products_of_factors() {
        let p = parse_polynomial("(X+1)(X-1/2)", 1).unwrap();
        let expect = Polynomial::univariate(&[ratio(-1, 2), ratio(1, 2), int(1)]);
        assert_eq!(p, expect);
    }

    #[test]
    fn aliases_and_indices_agree() {
        assert_eq!(
            parse_polynomial("X*Y + z^2", 3).unwrap(),
            parse_polynomial("X1 X2 + X3^2", 3).unwrap()
        );
    }

    #[test]
    fn errors() {
        assert!(parse_polynomial("X2", 1).is_err());
        assert!(parse_polynomial("(X+1", 1).is_err());
        assert!(parse_polynomial("X^-1", 1).is_err());
        assert!(parse_polynomial("", 1).is_err());
        assert!(parse_polynomial("X0", 1).is_err());
        assert!(parse_polynomial("X $ 1", 1).is_err());
    }

    #[test]
    fn division_by_numbers() {
        assert_eq!(
            parse_polynomial("X^2/4", 1).unwrap(),
            parse_polynomial("1/4 X^2", 1).unwrap()
        );
        assert!(parse_polynomial("1/X", 1).is_err());
        assert!(parse_polynomial("X/0", 1).is_err());
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_polynomial("0.1 X", 1).unwrap();
        assert_eq!(p.eval(&[int(1)]).unwrap(), ratio(1, 10));
    }
}
