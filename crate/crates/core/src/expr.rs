//! Text syntax for scalars, group elements and tree points.
//!
//! Scalars: integers, `t` (for `fq` fields), `+ - * / ^` and parentheses,
//! e.g. `-3/2` or `(1+t^2)/t`. Elements are juxtaposed factors:
//! `xp(c)`, `xm(c)`, `xp(k; c)`, `xm(k; c)`, `t(l, n)`, `torus(f; z)`,
//! `diag(f)`, `w`, `s0`, `s1` and parenthesized groups. Tree points are
//! `point(<element>, y)` with `y` rational.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::affine_sl2::AffElt;
use crate::sl2_rank1::{Sl2Elt, TreePoint};
use crate::valued_field::{FieldSpec, FpPoly, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("invalid element: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    XPlus { k: Option<i64>, c: Scalar },
    XMinus { k: Option<i64>, c: Scalar },
    TMu { l: i64, n: i64 },
    Torus { f: Scalar, z: Scalar },
    Diag(Scalar),
    W,
    S0,
    S1,
    Group(ElementExpr),
}

/// A product of factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementExpr(pub Vec<Factor>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointExpr {
    pub element: ElementExpr,
    pub y: BigRational,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::XPlus { k: None, c } => write!(f, "xp({c})"),
            Factor::XPlus { k: Some(k), c } => write!(f, "xp({k}; {c})"),
            Factor::XMinus { k: None, c } => write!(f, "xm({c})"),
            Factor::XMinus { k: Some(k), c } => write!(f, "xm({k}; {c})"),
            Factor::TMu { l, n } => write!(f, "t({l}, {n})"),
            Factor::Torus { f: a, z } => write!(f, "torus({a}; {z})"),
            Factor::Diag(a) => write!(f, "diag({a})"),
            Factor::W => f.write_str("w"),
            Factor::S0 => f.write_str("s0"),
            Factor::S1 => f.write_str("s1"),
            Factor::Group(e) => write!(f, "({e})"),
        }
    }
}

impl fmt::Display for ElementExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Display for PointExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "point({}, {})", self.element, self.y)
    }
}

fn invalid(msg: impl Into<String>) -> ExprError {
    ExprError::Validation(msg.into())
}

impl ElementExpr {
    pub fn single(f: Factor) -> Self {
        ElementExpr(vec![f])
    }

    /// Concatenation of products.
    pub fn product<'a>(parts: impl IntoIterator<Item = &'a ElementExpr>) -> Self {
        ElementExpr(
            parts
                .into_iter()
                .flat_map(|e| e.0.iter().cloned())
                .collect(),
        )
    }

    pub fn to_sl2(&self, field: FieldSpec) -> Result<Sl2Elt, ExprError> {
        let mut g = Sl2Elt::identity(field);
        for factor in &self.0 {
            let h = match factor {
                Factor::XPlus { k: None, c } => Sl2Elt::x_plus(c.clone()),
                Factor::XMinus { k: None, c } => Sl2Elt::x_minus(c.clone()),
                Factor::XPlus { .. } | Factor::XMinus { .. } => {
                    return Err(invalid("the exponent argument belongs to the affine group"))
                }
                Factor::Diag(f) => {
                    Sl2Elt::diag(f.clone()).map_err(|_| invalid("zero torus scalar"))?
                }
                Factor::W => Sl2Elt::w(field),
                Factor::Group(e) => e.to_sl2(field)?,
                other => return Err(invalid(format!("{other} is not an SL2 generator"))),
            };
            g = g.mul(&h);
        }
        Ok(g)
    }

    pub fn to_affine(&self, field: FieldSpec) -> Result<AffElt, ExprError> {
        let mut g = AffElt::identity(field);
        for factor in &self.0 {
            let h = match factor {
                Factor::XPlus { k, c } => AffElt::x_plus(k.unwrap_or(0), c.clone()),
                Factor::XMinus { k, c } => AffElt::x_minus(k.unwrap_or(0), c.clone()),
                Factor::TMu { l, n } => AffElt::t_mu(field, *l, *n),
                Factor::Torus { f, z } => {
                    AffElt::torus(f.clone(), z.clone()).map_err(|_| invalid("zero torus scalar"))?
                }
                Factor::Diag(f) => AffElt::torus(f.clone(), Scalar::one(field))
                    .map_err(|_| invalid("zero torus scalar"))?,
                Factor::W => AffElt::w(field),
                Factor::S0 => AffElt::s0(field),
                Factor::S1 => AffElt::s1(field),
                Factor::Group(e) => e.to_affine(field)?,
            };
            g = g.mul(&h);
        }
        Ok(g)
    }
}

impl PointExpr {
    pub fn to_point(&self, field: FieldSpec) -> Result<TreePoint, ExprError> {
        Ok(TreePoint::new(self.element.to_sl2(field)?, self.y.clone()))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: FieldSpec,
}

impl<'a> Parser<'a> {
    fn new(field: FieldSpec, src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            field,
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            position: self.pos,
            expected: expected.to_string(),
        })
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

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("'{}'", c as char))
        }
    }

    fn end(&mut self) -> Result<(), ExprError> {
        if self.peek().is_some() {
            self.err("end of input")
        } else {
            Ok(())
        }
    }

    fn digits(&mut self) -> Result<BigInt, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("digits");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(text.parse().expect("digit string"))
    }

    fn signed_int(&mut self) -> Result<i64, ExprError> {
        let neg = self.eat(b'-');
        let start = self.pos;
        let n = self.digits()?;
        let n: i64 = n.try_into().map_err(|_| ExprError::Syntax {
            position: start,
            expected: "a machine-sized integer".into(),
        })?;
        Ok(if neg { -n } else { n })
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            None
        }
    }

    // scalar := ['-'] term (('+' | '-') term)*
    fn scalar(&mut self) -> Result<Scalar, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.unary()?;
                acc = acc.try_div(&rhs).map_err(|_| {
                    ExprError::Validation(format!("division by zero at position {at}"))
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar, ExprError> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Scalar, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let e = self.signed_int()?;
            if e < 0 && base.is_zero() {
                return Err(ExprError::Validation(format!(
                    "division by zero at position {at}"
                )));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Scalar, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let s = self.scalar()?;
                self.expect(b')')?;
                Ok(s)
            }
            Some(c) if c.is_ascii_digit() => Ok(Scalar::from_bigint(self.field, &self.digits()?)),
            Some(b't') => {
                let at = self.pos;
                self.pos += 1;
                if self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric())
                {
                    self.pos = at;
                    return self.err("a scalar");
                }
                match self.field {
                    FieldSpec::RationalFunction { p } => Ok(Scalar::from_polys(
                        self.field,
                        FpPoly::monomial(p, 1, 1),
                        FpPoly::constant(p, 1),
                    )
                    .expect("nonzero denominator")),
                    FieldSpec::PAdic { .. } => Err(ExprError::Validation(format!(
                        "the variable t at position {at} needs an fq field"
                    ))),
                }
            }
            _ => self.err("a scalar"),
        }
    }

    fn rational(&mut self) -> Result<BigRational, ExprError> {
        let neg = self.eat(b'-');
        let num = self.digits()?;
        let den = if self.eat(b'/') {
            let at = self.pos;
            let d = self.digits()?;
            if d == BigInt::from(0) {
                return Err(ExprError::Validation(format!(
                    "zero denominator at position {at}"
                )));
            }
            d
        } else {
            BigInt::from(1)
        };
        let q = BigRational::new(num, den);
        Ok(if neg { -q } else { q })
    }

    /// `k; c` or `c` inside `xp(...)` / `xm(...)`.
    fn unipotent_args(&mut self) -> Result<(Option<i64>, Scalar), ExprError> {
        let save = self.pos;
        if let Ok(k) = self.signed_int() {
            if self.eat(b';') {
                return Ok((Some(k), self.scalar()?));
            }
        }
        self.pos = save;
        Ok((None, self.scalar()?))
    }

    fn factor(&mut self) -> Result<Factor, ExprError> {
        if self.eat(b'(') {
            let inner = self.product()?;
            self.expect(b')')?;
            return Ok(Factor::Group(inner));
        }
        let at = self.pos;
        let Some(name) = self.ident() else {
            return self.err("a generator");
        };
        let f = match name.as_str() {
            "xp" | "xm" => {
                self.expect(b'(')?;
                let (k, c) = self.unipotent_args()?;
                self.expect(b')')?;
                if name == "xp" {
                    Factor::XPlus { k, c }
                } else {
                    Factor::XMinus { k, c }
                }
            }
            "t" => {
                self.expect(b'(')?;
                let l = self.signed_int()?;
                self.expect(b',')?;
                let n = self.signed_int()?;
                self.expect(b')')?;
                Factor::TMu { l, n }
            }
            "torus" => {
                self.expect(b'(')?;
                let f = self.scalar()?;
                self.expect(b';')?;
                let z = self.scalar()?;
                self.expect(b')')?;
                Factor::Torus { f, z }
            }
            "diag" => {
                self.expect(b'(')?;
                let f = self.scalar()?;
                self.expect(b')')?;
                Factor::Diag(f)
            }
            "w" => Factor::W,
            "s0" => Factor::S0,
            "s1" => Factor::S1,
            _ => {
                self.pos = at;
                return self.err("one of xp, xm, t, torus, diag, w, s0, s1");
            }
        };
        Ok(f)
    }

    fn product(&mut self) -> Result<ElementExpr, ExprError> {
        let mut factors = vec![self.factor()?];
        while matches!(self.peek(), Some(c) if c == b'(' || c.is_ascii_alphabetic()) {
            factors.push(self.factor()?);
        }
        Ok(ElementExpr(factors))
    }

    fn point(&mut self) -> Result<PointExpr, ExprError> {
        let at = self.pos;
        if self.ident().as_deref() != Some("point") {
            self.pos = at;
            return self.err("'point'");
        }
        self.expect(b'(')?;
        let element = self.product()?;
        self.expect(b',')?;
        let y = self.rational()?;
        self.expect(b')')?;
        Ok(PointExpr { element, y })
    }
}

pub fn parse_scalar(field: FieldSpec, src: &str) -> Result<Scalar, ExprError> {
    let mut p = Parser::new(field, src);
    let s = p.scalar()?;
    p.end()?;
    Ok(s)
}

pub fn parse_element(field: FieldSpec, src: &str) -> Result<ElementExpr, ExprError> {
    let mut p = Parser::new(field, src);
    let e = p.product()?;
    p.end()?;
    Ok(e)
}

pub fn parse_point(field: FieldSpec, src: &str) -> Result<PointExpr, ExprError> {
    let mut p = Parser::new(field, src);
    let e = p.point()?;
    p.end()?;
    Ok(e)
}

/// Parse a rational number such as `-3/4`.
pub fn parse_rational(src: &str) -> Result<BigRational, ExprError> {
    let mut p = Parser::new(FieldSpec::PAdic { p: 2 }, src);
    let q = p.rational()?;
    p.end()?;
    Ok(q)
}
