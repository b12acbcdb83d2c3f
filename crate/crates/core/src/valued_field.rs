//! Exact arithmetic in a discretely valued field.
//!
//! Two families of fields are supported, both with value group `Z` and a
//! fixed uniformizer:
//!
//! * `p:<prime>`: the rationals with the `p`-adic valuation, uniformizer `p`;
//! * `fq:<prime>`: rational functions over `F_p` in the variable `t`, valued
//!   by the order of vanishing at `t = 0`, uniformizer `t`.
//!
//! Every [`Scalar`] is kept in canonical form (lowest terms, monic
//! denominator), so structural equality is field equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("{0} is not integral (negative valuation)")]
    NotIntegral(String),
    #[error("invalid field spec: {0}")]
    InvalidField(String),
}

/// The field `K` together with its valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FieldSpec {
    /// `Q` with the `p`-adic valuation.
    PAdic { p: u64 },
    /// `F_p(t)` with the `t`-adic valuation.
    RationalFunction { p: u64 },
}

/// Residue characteristics above this bound are rejected so that products
/// of two residues always fit in a `u64`.
const MAX_PRIME: u64 = 1 << 31;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn padic(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) || p >= MAX_PRIME {
            return Err(FieldError::InvalidField(format!(
                "{p} is not a supported prime"
            )));
        }
        Ok(FieldSpec::PAdic { p })
    }

    /// `F_q(t)`. Only prime `q` is supported.
    pub fn rational_function(q: u64) -> Result<Self, FieldError> {
        if !is_prime(q) || q >= MAX_PRIME {
            return Err(FieldError::InvalidField(format!(
                "{q} is not a supported prime (prime powers are not supported)"
            )));
        }
        Ok(FieldSpec::RationalFunction { p: q })
    }

    /// Characteristic of the residue field `O / wO`.
    pub fn residue_char(&self) -> u64 {
        match *self {
            FieldSpec::PAdic { p } | FieldSpec::RationalFunction { p } => p,
        }
    }

    pub fn uniformizer(&self) -> Scalar {
        match *self {
            FieldSpec::PAdic { p } => Scalar::from_int(*self, p as i64),
            FieldSpec::RationalFunction { p } => Scalar {
                field: *self,
                repr: Repr::Fn(RatFn::from_poly(FpPoly::monomial(p, 1, 1))),
            },
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::PAdic { p } => write!(f, "p:{p}"),
            FieldSpec::RationalFunction { p } => write!(f, "fq:{p}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad =
            || FieldError::InvalidField(format!("expected p:<prime> or fq:<prime>, got {s:?}"));
        let (kind, num) = s.split_once(':').ok_or_else(bad)?;
        let n: u64 = num.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "p" => FieldSpec::padic(n),
            "fq" => FieldSpec::rational_function(n),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for FieldSpec {
    type Error = FieldError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FieldSpec> for String {
    fn from(f: FieldSpec) -> String {
        f.to_string()
    }
}

/// A value of `w`: an integer or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// `self >= bound` for a rational bound.
    pub fn ge_rational(self, bound: &BigRational) -> bool {
        match self {
            Valuation::Infinite => true,
            Valuation::Finite(v) => BigRational::from_integer(BigInt::from(v)) >= *bound,
        }
    }

    pub fn ge(self, bound: i64) -> bool {
        self >= Valuation::Finite(bound)
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    // Fermat; p is prime.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Dense univariate polynomial over `F_p`, coefficients from low to high
/// degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = FpPoly {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        poly.trim();
        poly
    }

    pub fn zero(p: u64) -> Self {
        FpPoly {
            p,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(p: u64, c: u64) -> Self {
        FpPoly::new(p, vec![c])
    }

    pub fn monomial(p: u64, c: u64, deg: usize) -> Self {
        let mut coeffs = vec![0; deg + 1];
        coeffs[deg] = c;
        FpPoly::new(p, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> u64 {
        *self
            .coeffs
            .last()
            .expect("zero polynomial has no leading coefficient")
    }

    /// Order of vanishing at zero; `None` for the zero polynomial.
    pub fn ord0(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % p
            })
            .collect();
        FpPoly::new(p, coeffs)
    }

    pub fn neg(&self) -> FpPoly {
        let p = self.p;
        FpPoly::new(p, self.coeffs.iter().map(|&c| (p - c) % p).collect())
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> FpPoly {
        let p = self.p;
        FpPoly::new(p, self.coeffs.iter().map(|&a| a * (c % p) % p).collect())
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        FpPoly::new(p, out)
    }

    pub fn div_rem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let p = self.p;
        let mut rem = self.coeffs.clone();
        let dd = divisor.coeffs.len() - 1;
        if rem.len() <= dd {
            return (FpPoly::zero(p), self.clone());
        }
        let inv_lead = inv_mod(divisor.lead(), p);
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] * inv_lead % p;
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = (rem[k + j] + p - c * b % p) % p;
            }
        }
        rem.truncate(dd);
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.lead(), self.p))
    }

    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Truncation modulo `t^n`.
    pub fn truncate(&self, n: usize) -> FpPoly {
        FpPoly::new(self.p, self.coeffs.iter().take(n).copied().collect())
    }

    /// Inverse modulo `t^n`; requires a nonzero constant term.
    fn inv_series(&self, n: usize) -> FpPoly {
        let p = self.p;
        let c0 = self.coeffs[0];
        let inv0 = inv_mod(c0, p);
        let mut out = vec![0u64; n];
        for k in 0..n {
            // out[k] = -(sum_{j=1..k} a_j out[k-j]) / a_0, with out[0] = 1/a_0
            let mut acc = if k == 0 { 1 } else { 0 };
            for j in 1..=k {
                let a = self.coeffs.get(j).copied().unwrap_or(0);
                acc = (acc + p - a * out[k - j] % p) % p;
            }
            out[k] = acc * inv0 % p;
        }
        FpPoly::new(p, out)
    }

    fn fmt_sum(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{k}"),
            };
            terms.push(match (k, c) {
                (0, c) => c.to_string(),
                (_, 1) => mono,
                (_, c) => format!("{c}*{mono}"),
            });
        }
        terms.join("+")
    }

    fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }
}

/// Reduced ratio `num / den` over `F_p`, `den` monic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: FpPoly,
    den: FpPoly,
}

impl RatFn {
    fn from_poly(num: FpPoly) -> Self {
        let p = num.p;
        RatFn {
            num,
            den: FpPoly::constant(p, 1),
        }
    }

    pub fn new(num: FpPoly, den: FpPoly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: FpPoly, den: FpPoly) -> Self {
        let p = num.p;
        if num.is_zero() {
            return RatFn {
                num,
                den: FpPoly::constant(p, 1),
            };
        }
        let g = num.gcd(&den);
        let (mut n, _) = num.div_rem(&g);
        let (mut d, _) = den.div_rem(&g);
        let inv = inv_mod(d.lead(), p);
        n = n.scale(inv);
        d = d.scale(inv);
        RatFn { num: n, den: d }
    }

    pub fn numerator(&self) -> &FpPoly {
        &self.num
    }

    pub fn denominator(&self) -> &FpPoly {
        &self.den
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Rat(BigRational),
    Fn(RatFn),
}

/// An exact element of `K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    field: FieldSpec,
    repr: Repr,
}

fn padic_val_int(n: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

impl Scalar {
    pub fn zero(field: FieldSpec) -> Self {
        Scalar::from_int(field, 0)
    }

    pub fn one(field: FieldSpec) -> Self {
        Scalar::from_int(field, 1)
    }

    pub fn from_int(field: FieldSpec, n: i64) -> Self {
        Scalar::from_bigint(field, &BigInt::from(n))
    }

    pub fn from_bigint(field: FieldSpec, n: &BigInt) -> Self {
        let repr = match field {
            FieldSpec::PAdic { .. } => Repr::Rat(BigRational::from_integer(n.clone())),
            FieldSpec::RationalFunction { p } => {
                let r = n
                    .mod_floor(&BigInt::from(p))
                    .to_u64()
                    .expect("residue fits");
                Repr::Fn(RatFn::from_poly(FpPoly::constant(p, r)))
            }
        };
        Scalar { field, repr }
    }

    /// `n / d`; `d` must be nonzero in `K`.
    pub fn from_ratio(field: FieldSpec, n: i64, d: i64) -> Result<Self, FieldError> {
        Scalar::from_int(field, n).try_div(&Scalar::from_int(field, d))
    }

    /// Exact rational value (p-adic fields only).
    pub fn from_rational(field: FieldSpec, q: BigRational) -> Self {
        match field {
            FieldSpec::PAdic { .. } => Scalar {
                field,
                repr: Repr::Rat(q),
            },
            FieldSpec::RationalFunction { .. } => {
                let n = Scalar::from_bigint(field, q.numer());
                let d = Scalar::from_bigint(field, q.denom());
                n.try_div(&d)
                    .expect("denominator divisible by the characteristic")
            }
        }
    }

    /// Rational function `num / den` (`fq` fields only).
    pub fn from_polys(field: FieldSpec, num: FpPoly, den: FpPoly) -> Result<Self, FieldError> {
        match field {
            FieldSpec::RationalFunction { p } => {
                assert!(
                    num.p == p && den.p == p,
                    "polynomial characteristic mismatch"
                );
                Ok(Scalar {
                    field,
                    repr: Repr::Fn(RatFn::new(num, den)?),
                })
            }
            FieldSpec::PAdic { .. } => Err(FieldError::InvalidField(
                "polynomial scalars need an fq field".into(),
            )),
        }
    }

    pub fn uniformizer_pow(field: FieldSpec, n: i64) -> Self {
        field.uniformizer().pow(n)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rat(q) => Some(q),
            Repr::Fn(_) => None,
        }
    }

    pub fn as_ratfn(&self) -> Option<&RatFn> {
        match &self.repr {
            Repr::Fn(r) => Some(r),
            Repr::Rat(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(q) => q.is_zero(),
            Repr::Fn(r) => r.num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(q) => q.is_one(),
            Repr::Fn(r) => r.num.is_one() && r.den.is_one(),
        }
    }

    fn check_field(&self, other: &Scalar) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch(self.field, other.field))
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_field(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::Fn(a), Repr::Fn(b)) => Repr::Fn(RatFn::normalized(
                a.num.mul(&b.den).add(&b.num.mul(&a.den)),
                a.den.mul(&b.den),
            )),
            _ => unreachable!("repr follows field"),
        };
        Ok(Scalar {
            field: self.field,
            repr,
        })
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_field(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::Fn(a), Repr::Fn(b)) => {
                Repr::Fn(RatFn::normalized(a.num.mul(&b.num), a.den.mul(&b.den)))
            }
            _ => unreachable!("repr follows field"),
        };
        Ok(Scalar {
            field: self.field,
            repr,
        })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_field(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rat(q) => Repr::Rat(q.recip()),
            Repr::Fn(r) => Repr::Fn(RatFn::normalized(r.den.clone(), r.num.clone())),
        };
        Ok(Scalar {
            field: self.field,
            repr,
        })
    }

    fn neg_ref(&self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rat(q) => Repr::Rat(-q),
            Repr::Fn(r) => Repr::Fn(RatFn {
                num: r.num.neg(),
                den: r.den.clone(),
            }),
        };
        Scalar {
            field: self.field,
            repr,
        }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Scalar {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut result = Scalar::one(self.field);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        result
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        match &self.repr {
            Repr::Rat(q) => {
                let p = self.field.residue_char();
                Valuation::Finite(padic_val_int(q.numer(), p) - padic_val_int(q.denom(), p))
            }
            Repr::Fn(r) => Valuation::Finite(
                r.num.ord0().expect("nonzero") as i64 - r.den.ord0().expect("nonzero") as i64,
            ),
        }
    }

    /// Image of `self` in `O / w^n O`.
    pub fn reduce_mod(&self, n: u32) -> Result<ResidueElt, FieldError> {
        assert!(n >= 1, "residue level must be positive");
        if self.valuation() < Valuation::Finite(0) {
            return Err(FieldError::NotIntegral(self.to_string()));
        }
        let value = match &self.repr {
            Repr::Rat(q) => {
                let modulus = BigInt::from(self.field.residue_char()).pow(n);
                let den_inv = mod_inverse(q.denom(), &modulus);
                let v = (q.numer() * den_inv).mod_floor(&modulus);
                ResidueValue::Int(v.to_biguint().expect("non-negative"))
            }
            Repr::Fn(r) => {
                let n = n as usize;
                let inv = r.den.inv_series(n);
                ResidueValue::Poly(r.num.mul(&inv).truncate(n))
            }
        };
        Ok(ResidueElt {
            field: self.field,
            level: n,
            value,
        })
    }

    pub fn is_integral(&self) -> bool {
        self.valuation().ge(0)
    }

    pub fn is_unit_integral(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// `w(self) >= n`, i.e. `self` lies in `w^n O`.
    pub fn in_pi_n(&self, n: i64) -> bool {
        self.valuation().ge(n)
    }

    /// `w(self - 1) >= n`.
    pub fn in_one_plus_pi_n(&self, n: i64) -> bool {
        (self - &Scalar::one(self.field)).valuation().ge(n)
    }

    pub fn satisfies(&self, pred: RingPredicate) -> bool {
        match pred {
            RingPredicate::InO => self.is_integral(),
            RingPredicate::InUnitsO => self.is_unit_integral(),
            RingPredicate::InPiNO(n) => self.in_pi_n(n),
            RingPredicate::InOnePlusPiNO(n) => self.in_one_plus_pi_n(n),
        }
    }

    /// Parse a literal of the scalar grammar in `field`.
    pub fn parse(field: FieldSpec, src: &str) -> Result<Scalar, crate::expr::ExprError> {
        crate::expr::parse_scalar(field, src)
    }

    fn needs_parens(&self) -> bool {
        match &self.repr {
            Repr::Rat(_) => false,
            Repr::Fn(r) => r.den.is_one() && r.num.term_count() > 1,
        }
    }

    /// Printed form safe to embed as a factor of a larger scalar expression.
    pub fn to_factor_string(&self) -> String {
        if self.needs_parens() {
            format!("({self})")
        } else {
            self.to_string()
        }
    }
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> BigInt {
    let e = a.extended_gcd(modulus);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(modulus)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Repr::Fn(r) => {
                if r.den.is_one() {
                    return write!(f, "{}", r.num.fmt_sum());
                }
                let wrap = |poly: &FpPoly| {
                    if poly.term_count() > 1 {
                        format!("({})", poly.fmt_sum())
                    } else {
                        poly.fmt_sum()
                    }
                };
                write!(f, "{}/{}", wrap(&r.num), wrap(&r.den))
            }
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$try(rhs)
                    .expect("scalar operands from different fields")
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

/// Membership tests for the standard subsets of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingPredicate {
    InO,
    InUnitsO,
    InPiNO(i64),
    InOnePlusPiNO(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResidueValue {
    /// Representative in `[0, p^n)`.
    Int(BigUint),
    /// Polynomial of degree `< n`.
    Poly(FpPoly),
}

/// Element of `O / w^n O`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueElt {
    field: FieldSpec,
    level: u32,
    value: ResidueValue,
}

impl ResidueElt {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn value(&self) -> &ResidueValue {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            ResidueValue::Int(v) => v.is_zero(),
            ResidueValue::Poly(poly) => poly.is_zero(),
        }
    }

    fn combine(&self, other: &ResidueElt, add: bool) -> ResidueElt {
        assert_eq!(self.field, other.field, "residues from different fields");
        assert_eq!(self.level, other.level, "residues at different levels");
        let value = match (&self.value, &other.value) {
            (ResidueValue::Int(a), ResidueValue::Int(b)) => {
                let modulus = BigUint::from(self.field.residue_char()).pow(self.level);
                let v = if add { a + b } else { a * b };
                ResidueValue::Int(v % modulus)
            }
            (ResidueValue::Poly(a), ResidueValue::Poly(b)) => {
                let v = if add { a.add(b) } else { a.mul(b) };
                ResidueValue::Poly(v.truncate(self.level as usize))
            }
            _ => unreachable!("residue repr follows field"),
        };
        ResidueElt {
            field: self.field,
            level: self.level,
            value,
        }
    }

    pub fn add(&self, other: &ResidueElt) -> ResidueElt {
        self.combine(other, true)
    }

    pub fn mul(&self, other: &ResidueElt) -> ResidueElt {
        self.combine(other, false)
    }
}

impl fmt::Display for ResidueElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            ResidueValue::Int(v) => {
                write!(f, "{v} mod {}^{}", self.field.residue_char(), self.level)
            }
            ResidueValue::Poly(poly) => write!(f, "{} mod t^{}", poly.fmt_sum(), self.level),
        }
    }
}

/// `BigRational` from a small integer.
pub fn q_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `BigRational` from a small fraction.
pub fn q_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `BigRational` from a valuation known to be finite.
pub fn q_val(v: Valuation) -> Option<BigRational> {
    v.finite().map(q_int)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> FieldSpec {
        FieldSpec::padic(3).unwrap()
    }

    fn f2() -> FieldSpec {
        FieldSpec::rational_function(2).unwrap()
    }

    fn s(field: FieldSpec, src: &str) -> Scalar {
        Scalar::parse(field, src).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(FieldSpec::padic(4).is_err());
        assert!(FieldSpec::rational_function(4).is_err());
        assert_eq!("fq:2".parse::<FieldSpec>().unwrap(), f2());
        assert_eq!("p:3".parse::<FieldSpec>().unwrap(), p3());
        assert!("q:3".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let f = p3();
        assert!((Scalar::one(f) + Scalar::from_int(f, -1)).is_zero());
        assert_eq!(s(f, "2/3") * s(f, "9/4"), s(f, "3/2"));
        let g = f2();
        assert_eq!(s(g, "t/(1+t)").inv().unwrap(), s(g, "(1+t)/t"));
        assert_eq!(Scalar::zero(f).inv(), Err(FieldError::DivisionByZero));
        assert!(matches!(
            Scalar::one(f).try_add(&Scalar::one(g)),
            Err(FieldError::FieldMismatch(..))
        ));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(Scalar::zero(p3()).valuation(), Valuation::Infinite);
        assert_eq!(s(p3(), "18/5").valuation(), Valuation::Finite(2));
        assert_eq!(s(f2(), "t^3/(1+t)").valuation(), Valuation::Finite(3));
        assert_eq!(s(p3(), "5/27").valuation(), Valuation::Finite(-3));
    }

    #[test]
    fn reduce_mod_examples() {
        let r = s(p3(), "7/2").reduce_mod(1).unwrap();
        assert_eq!(r.value(), &ResidueValue::Int(BigUint::from(2u32)));
        assert!(matches!(
            s(p3(), "1/3").reduce_mod(1),
            Err(FieldError::NotIntegral(_))
        ));
        let r = s(f2(), "1+t^3").reduce_mod(2).unwrap();
        assert_eq!(r.value(), &ResidueValue::Poly(FpPoly::constant(2, 1)));
        // 1/(1+t) = 1 + t + t^2 + ... over F_2
        let r = s(f2(), "1/(1+t)").reduce_mod(3).unwrap();
        assert_eq!(
            r.value(),
            &ResidueValue::Poly(FpPoly::new(2, vec![1, 1, 1]))
        );
    }

    #[test]
    fn ring_predicate_examples() {
        assert!(s(p3(), "10").satisfies(RingPredicate::InOnePlusPiNO(2)));
        assert!(Scalar::one(p3()).satisfies(RingPredicate::InO));
        assert!(!s(p3(), "1/3").satisfies(RingPredicate::InPiNO(1)));
        assert!(s(p3(), "2/5").satisfies(RingPredicate::InUnitsO));
        assert!(!s(p3(), "3").satisfies(RingPredicate::InUnitsO));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(s(f2(), "(1+t^2)/t").to_string(), "(1+t^2)/t");
        assert_eq!(s(f2(), "t*t + 1").to_string(), "1+t^2");
        assert_eq!(s(p3(), "-6/4").to_string(), "-3/2");
        let g = FieldSpec::rational_function(5).unwrap();
        assert_eq!(s(g, "2*t/(3+t)").to_string(), "2*t/(3+t)");
        assert_eq!(s(g, "1/(2*t)").to_string(), "3/t");
    }

    #[test]
    fn poly_div_rem_and_gcd() {
        let a = FpPoly::new(3, vec![2, 0, 1]); // t^2 + 2 = (t+1)(t+2) over F_3
        let b = FpPoly::new(3, vec![1, 1]);
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q, FpPoly::new(3, vec![2, 1]));
        assert_eq!(a.gcd(&b), b);
    }
}
