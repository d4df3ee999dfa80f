//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | ident | '(' expr ')' | func '(' expr ')'
//! exponent := signed integer | '(' signed rational ')'
//! ```

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::error::KernelError;
use super::expr::{Expr, Func};
use super::poly::Q;
use super::var::Var;

/// Parse with no declared parameters.
pub fn parse(text: &str) -> Result<Expr, KernelError> {
    parse_with(text, &BTreeSet::new())
}

/// Parse, accepting the given parameter names as identifiers.
pub fn parse_with(text: &str, params: &BTreeSet<String>) -> Result<Expr, KernelError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        params,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> KernelError {
        KernelError::Syntax {
            offset: self.pos,
            message: msg.to_string(),
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), KernelError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, KernelError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::neg(self.term()?));
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, KernelError> {
        let mut acc = self.factor()?;
        let mut factors = Vec::new();
        loop {
            if self.eat(b'*') {
                factors.push(acc);
                acc = self.factor()?;
            } else if self.eat(b'/') {
                factors.push(acc);
                let lhs = Expr::product(std::mem::take(&mut factors));
                acc = Expr::quotient(lhs, self.factor()?);
            } else {
                break;
            }
        }
        factors.push(acc);
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Expr, KernelError> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.factor()?));
        }
        let b = self.base()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            return Ok(Expr::power(b, e));
        }
        Ok(b)
    }

    fn exponent(&mut self) -> Result<Q, KernelError> {
        if self.eat(b'(') {
            let neg = self.sign();
            let n = self.integer()?;
            let d = if self.eat(b'/') {
                self.integer()?
            } else {
                BigInt::one()
            };
            if d.is_zero() {
                return Err(self.err("zero denominator in exponent"));
            }
            self.expect(b')')?;
            let r = Q::new(n, d);
            return Ok(if neg { -r } else { r });
        }
        let neg = self.sign();
        let n = self.integer()?;
        let r = Q::from_integer(n);
        Ok(if neg { -r } else { r })
    }

    fn sign(&mut self) -> bool {
        if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt, KernelError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn number(&mut self) -> Result<Q, KernelError> {
        let int = self.integer()?;
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let frac = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
            if frac.is_empty() {
                return Ok(Q::from_integer(int));
            }
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let f: BigInt = frac.parse().expect("digits parse");
            return Ok(Q::new(int * &scale + f, scale));
        }
        Ok(Q::from_integer(int))
    }

    fn base(&mut self) -> Result<Expr, KernelError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("expected number, identifier or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn ident(&mut self) -> Result<Expr, KernelError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
        let func = match name {
            "exp" => Some(Some(Func::Exp)),
            "ln" => Some(Some(Func::Ln)),
            "sin" => Some(Some(Func::Sin)),
            "cos" => Some(Some(Func::Cos)),
            "sqrt" | "cbrt" => Some(None),
            _ => None,
        };
        if let Some(f) = func {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(match (f, name) {
                (Some(f), _) => Expr::apply(f, arg),
                (None, "sqrt") => Expr::power(arg, Q::new(1.into(), 2.into())),
                (None, _) => Expr::power(arg, Q::new(1.into(), 3.into())),
            });
        }
        if let Some(v) = Var::from_name(name) {
            return Ok(Expr::var(v));
        }
        if self.params.contains(name) {
            return Ok(Expr::param(name));
        }
        let mut declared: Vec<String> = Var::ALL.iter().map(|v| v.name().to_string()).collect();
        declared.extend(self.params.iter().cloned());
        Err(KernelError::UnknownIdentifier {
            name: name.to_string(),
            offset: start,
            declared,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::expr::Node;

    #[test]
    fn zero_is_a_constant() {
        assert_eq!(parse("0").unwrap(), Expr::int(0));
    }

    #[test]
    fn quotient_node() {
        let e = parse("3*q^2/(2*p)").unwrap();
        assert!(matches!(e.node(), Node::Quotient(..)));
    }

    #[test]
    fn rational_exponent() {
        let e = parse("q^(3/2)").unwrap();
        match e.node() {
            Node::Power(b, r) => {
                assert_eq!(*b, Expr::var(Var::Q));
                assert_eq!(*r, Q::new(3.into(), 2.into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse("0.125").unwrap();
        assert_eq!(e, Expr::num(Q::new(1.into(), 8.into())));
    }

    #[test]
    fn syntax_error_offset() {
        match parse("q + * p") {
            Err(KernelError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_lists_names() {
        let mut ps = BTreeSet::new();
        ps.insert("mu".to_string());
        match parse_with("nu*p", &ps) {
            Err(KernelError::UnknownIdentifier { name, declared, offset }) => {
                assert_eq!(name, "nu");
                assert_eq!(offset, 0);
                assert!(declared.contains(&"mu".to_string()));
                assert!(declared.contains(&"q".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(parse("2 q").is_err());
        assert!(parse("2(q)").is_err());
    }
}
