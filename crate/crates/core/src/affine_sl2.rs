//! The affine group `G = SL_2(K[u, 1/u]) x| K^*`.
//!
//! Elements are pairs `(M, z)` with the law
//! `(M, z)(M1, z1) = (M . M1[u <- z u], z z1)`. The simple roots are
//! `alpha_1 = a` and `alpha_0 = delta - a`; on a torus element
//! `(diag(f, 1/f), z)` they take the values `f^2` and `z / f^2`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::root_data::{ApartmentVec, RootGenSys, RootVec};
use crate::sl2_rank1::Membership;
use crate::valued_field::{q_int, FieldSpec, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AffError {
    #[error("determinant is not 1")]
    NotUnimodular,
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("element is not a torus element")]
    NotTorus,
}

/// Element of `K[u, 1/u]` with no stored zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    field: FieldSpec,
    coeffs: BTreeMap<i64, Scalar>,
}

impl LaurentPoly {
    pub fn zero(field: FieldSpec) -> Self {
        LaurentPoly {
            field,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        LaurentPoly::monomial(0, c)
    }

    pub fn one(field: FieldSpec) -> Self {
        LaurentPoly::constant(Scalar::one(field))
    }

    pub fn monomial(k: i64, c: Scalar) -> Self {
        let field = c.field();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentPoly { field, coeffs }
    }

    pub fn from_terms(field: FieldSpec, terms: impl IntoIterator<Item = (i64, Scalar)>) -> Self {
        let mut p = LaurentPoly::zero(field);
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
    }

    fn add_term(&mut self, k: i64, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&k) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Scalar {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// The constant value, if the polynomial has degree zero.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.coeffs.len() {
            0 => Some(Scalar::zero(self.field)),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in &o.coeffs {
            out.add_term(*k, c);
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            field: self.field,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &LaurentPoly) -> LaurentPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.field);
        for (i, a) in &self.coeffs {
            for (j, b) in &o.coeffs {
                out.add_term(i + j, &(a * b));
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> LaurentPoly {
        LaurentPoly::from_terms(self.field, self.coeffs.iter().map(|(k, c)| (*k, c * s)))
    }

    /// `p(z u)`: the coefficient at `u^k` is multiplied by `z^k`.
    pub fn substitute(&self, z: &Scalar) -> LaurentPoly {
        if z.is_one() {
            return self.clone();
        }
        LaurentPoly {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (*k, c * &z.pow(*k)))
                .collect(),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| match *k {
                0 => c.to_string(),
                1 if c.is_one() => "u".to_string(),
                _ if c.is_one() => format!("u^{k}"),
                1 => format!("{}*u", c.to_factor_string()),
                _ => format!("{}*u^{k}", c.to_factor_string()),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

type Mat = [LaurentPoly; 4];

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        x[0].mul(&y[0]).add(&x[1].mul(&y[2])),
        x[0].mul(&y[1]).add(&x[1].mul(&y[3])),
        x[2].mul(&y[0]).add(&x[3].mul(&y[2])),
        x[2].mul(&y[1]).add(&x[3].mul(&y[3])),
    ]
}

fn mat_det(x: &Mat) -> LaurentPoly {
    x[0].mul(&x[3]).sub(&x[1].mul(&x[2]))
}

fn mat_adj(x: &Mat) -> Mat {
    [x[3].clone(), x[1].neg(), x[2].neg(), x[0].clone()]
}

fn mat_sub(x: &Mat, z: &Scalar) -> Mat {
    [
        x[0].substitute(z),
        x[1].substitute(z),
        x[2].substitute(z),
        x[3].substitute(z),
    ]
}

/// Element `(M, z)` of the affine group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffElt {
    m: Mat,
    z: Scalar,
}

impl AffElt {
    pub fn new(m: [LaurentPoly; 4], z: Scalar) -> Result<Self, AffError> {
        if z.is_zero() {
            return Err(AffError::ZeroScalar);
        }
        if mat_det(&m) != LaurentPoly::one(z.field()) {
            return Err(AffError::NotUnimodular);
        }
        Ok(AffElt { m, z })
    }

    fn raw(m: Mat, z: Scalar) -> Self {
        debug_assert!(mat_det(&m) == LaurentPoly::one(z.field()));
        AffElt { m, z }
    }

    pub fn identity(field: FieldSpec) -> Self {
        AffElt::raw(
            [
                LaurentPoly::one(field),
                LaurentPoly::zero(field),
                LaurentPoly::zero(field),
                LaurentPoly::one(field),
            ],
            Scalar::one(field),
        )
    }

    /// `x_{a + k delta}(y) = ((1, u^k y; 0, 1), 1)`.
    pub fn x_plus(k: i64, y: Scalar) -> Self {
        let f = y.field();
        AffElt::raw(
            [
                LaurentPoly::one(f),
                LaurentPoly::monomial(k, y),
                LaurentPoly::zero(f),
                LaurentPoly::one(f),
            ],
            Scalar::one(f),
        )
    }

    /// `x_{-a + k delta}(y) = ((1, 0; u^k y, 1), 1)`.
    pub fn x_minus(k: i64, y: Scalar) -> Self {
        let f = y.field();
        AffElt::raw(
            [
                LaurentPoly::one(f),
                LaurentPoly::zero(f),
                LaurentPoly::monomial(k, y),
                LaurentPoly::one(f),
            ],
            Scalar::one(f),
        )
    }

    /// `(diag(f, 1/f), z)`.
    pub fn torus(f: Scalar, z: Scalar) -> Result<Self, AffError> {
        Ok(AffTorusElt::new(f, z)?.to_elt())
    }

    /// `t_mu` for `mu = l a^vee + n d`: `(diag(w^-l, w^l), w^-n)`.
    pub fn t_mu(field: FieldSpec, l: i64, n: i64) -> Self {
        let pi = field.uniformizer();
        AffElt::torus(pi.pow(-l), pi.pow(-n)).expect("uniformizer powers are nonzero")
    }

    /// `x_{alpha_1}(1) x_{-alpha_1}(-1) x_{alpha_1}(1) = ((0, 1; -1, 0), 1)`.
    pub fn s1(field: FieldSpec) -> Self {
        let one = Scalar::one(field);
        AffElt::x_plus(0, one.clone())
            .mul(&AffElt::x_minus(0, -&one))
            .mul(&AffElt::x_plus(0, one))
    }

    /// `x_{alpha_0}(1) x_{-alpha_0}(-1) x_{alpha_0}(1) = ((0, -1/u; u, 0), 1)`.
    pub fn s0(field: FieldSpec) -> Self {
        let one = Scalar::one(field);
        AffElt::x_minus(1, one.clone())
            .mul(&AffElt::x_plus(-1, -&one))
            .mul(&AffElt::x_minus(1, one))
    }

    /// `((0, -1; 1, 0), 1)`.
    pub fn w(field: FieldSpec) -> Self {
        let one = Scalar::one(field);
        AffElt::raw(
            [
                LaurentPoly::zero(field),
                LaurentPoly::constant(-&one),
                LaurentPoly::constant(one.clone()),
                LaurentPoly::zero(field),
            ],
            one,
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.z.field()
    }

    pub fn matrix(&self) -> &[LaurentPoly; 4] {
        &self.m
    }

    pub fn z(&self) -> &Scalar {
        &self.z
    }

    pub fn mul(&self, o: &AffElt) -> AffElt {
        AffElt::raw(mat_mul(&self.m, &mat_sub(&o.m, &self.z)), &self.z * &o.z)
    }

    pub fn inv(&self) -> AffElt {
        let zi = self.z.inv().expect("z is nonzero");
        AffElt::raw(mat_sub(&mat_adj(&self.m), &zi), zi)
    }

    /// `g h g^{-1}`.
    pub fn conj(&self, h: &AffElt) -> AffElt {
        self.mul(h).mul(&self.inv())
    }

    pub fn is_identity(&self) -> bool {
        *self == AffElt::identity(self.field())
    }

    pub fn as_torus(&self) -> Option<AffTorusElt> {
        if !self.m[1].is_zero() || !self.m[2].is_zero() {
            return None;
        }
        let f = self.m[0].as_constant()?;
        Some(AffTorusElt {
            f,
            z: self.z.clone(),
        })
    }

    fn require_torus(&self) -> Result<AffTorusElt, AffError> {
        self.as_torus().ok_or(AffError::NotTorus)
    }
}

impl fmt::Display for AffElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "([[{}, {}], [{}, {}]], {})",
            self.m[0], self.m[1], self.m[2], self.m[3], self.z
        )
    }
}

/// Torus element `(diag(f, 1/f), z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffTorusElt {
    f: Scalar,
    z: Scalar,
}

impl AffTorusElt {
    pub fn new(f: Scalar, z: Scalar) -> Result<Self, AffError> {
        if f.is_zero() || z.is_zero() {
            return Err(AffError::ZeroScalar);
        }
        Ok(AffTorusElt { f, z })
    }

    pub fn f(&self) -> &Scalar {
        &self.f
    }

    pub fn z(&self) -> &Scalar {
        &self.z
    }

    pub fn to_elt(&self) -> AffElt {
        let fi = self.f.inv().expect("nonzero");
        let field = self.f.field();
        AffElt::raw(
            [
                LaurentPoly::constant(self.f.clone()),
                LaurentPoly::zero(field),
                LaurentPoly::zero(field),
                LaurentPoly::constant(fi),
            ],
            self.z.clone(),
        )
    }

    /// Value of the character `m a + n delta`, namely `f^{2m} z^n`.
    pub fn eval_char(&self, m: i64, n: i64) -> Scalar {
        self.f.pow(2 * m) * self.z.pow(n)
    }

    /// `alpha_i(t)` for `i` in `{0, 1}`.
    pub fn simple_root_value(&self, i: usize) -> Scalar {
        match i {
            0 => self.eval_char(-1, 1),
            1 => self.eval_char(1, 0),
            _ => panic!("simple root index must be 0 or 1"),
        }
    }

    /// `nu(t)` in the basis `(a^vee, d)`: `(-w(f), -w(z))`.
    pub fn nu_translation(&self) -> ApartmentVec {
        let v = |s: &Scalar| -s.valuation().finite().expect("nonzero");
        ApartmentVec(vec![q_int(v(&self.f)), q_int(v(&self.z))])
    }
}

/// Filtration subgroups of the affine group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffSpec {
    /// Kernel of reduction mod `w^n`, taken entrywise on coefficients.
    KerPiN(u32),
    /// `ker pi_n` intersected with the congruence ring: the coefficient at
    /// `u^k` has valuation at least `n |k|`.
    HN(u32),
    TN(u32),
    /// Torus elements with `w(alpha_i(t) - 1) >= n` for both simple roots.
    TnPhi(u32),
    Center,
    CenterO,
    /// Explicit `U^+ U^- T_{2n}` factorization for `n lambda`,
    /// `lambda = a^vee + 3d`.
    VForm(u32),
}

impl fmt::Display for AffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffSpec::KerPiN(n) => write!(f, "kerpi:{n}"),
            AffSpec::HN(n) => write!(f, "hn:{n}"),
            AffSpec::TN(n) => write!(f, "tn:{n}"),
            AffSpec::TnPhi(n) => write!(f, "tnphi:{n}"),
            AffSpec::Center => write!(f, "center"),
            AffSpec::CenterO => write!(f, "centerO"),
            AffSpec::VForm(n) => write!(f, "vform:{n}"),
        }
    }
}

const ENTRY_NAMES: [&str; 4] = ["M11", "M12", "M21", "M22"];

fn ker_pi(g: &AffElt, n: u32) -> Membership {
    let n = n as i64;
    for (idx, entry) in g.m.iter().enumerate() {
        let diag = idx == 0 || idx == 3;
        for (k, c) in entry.terms() {
            if !c.is_integral() {
                return Membership::no(format!(
                    "{} coefficient at u^{k} is not integral",
                    ENTRY_NAMES[idx]
                ));
            }
            let dev = if diag && k == 0 {
                c - &Scalar::one(c.field())
            } else {
                c.clone()
            };
            if !dev.in_pi_n(n) {
                return Membership::no(format!(
                    "{} coefficient at u^{k} is not congruent to the identity mod w^{n}",
                    ENTRY_NAMES[idx]
                ));
            }
        }
        if diag && entry.coeff(0).is_zero() && n > 0 {
            return Membership::no(format!("{} has zero constant term", ENTRY_NAMES[idx]));
        }
    }
    if !g.z.in_one_plus_pi_n(n) {
        return Membership::no(format!("w(z - 1) < {n}"));
    }
    Membership::yes()
}

fn h_n(g: &AffElt, n: u32) -> Membership {
    let base = ker_pi(g, n);
    if !base.member {
        return base;
    }
    let n = n as i64;
    for (idx, entry) in g.m.iter().enumerate() {
        for (k, c) in entry.terms() {
            let need = n * k.abs();
            if !c.valuation().ge(need) {
                return Membership::no(format!(
                    "{} coefficient at u^{k} has valuation {} < {need}",
                    ENTRY_NAMES[idx],
                    c.valuation()
                ));
            }
        }
    }
    Membership::yes()
}

pub fn aff_member(g: &AffElt, spec: AffSpec) -> Result<Membership, AffError> {
    let check = |conds: Vec<(bool, String)>| match conds.into_iter().find(|(ok, _)| !ok) {
        Some((_, why)) => Membership::no(why),
        None => Membership::yes(),
    };
    Ok(match spec {
        AffSpec::KerPiN(n) => ker_pi(g, n),
        AffSpec::HN(n) => h_n(g, n),
        AffSpec::TN(n) => {
            let t = g.require_torus()?;
            let n = n as i64;
            check(vec![
                (t.f.in_one_plus_pi_n(n), format!("w(f - 1) < {n}")),
                (t.z.in_one_plus_pi_n(n), format!("w(z - 1) < {n}")),
            ])
        }
        AffSpec::TnPhi(n) => {
            let t = g.require_torus()?;
            check(
                (0..2)
                    .map(|i| {
                        (
                            fixes_test_point(&t, i, n),
                            format!("w(alpha_{i}(t) - 1) < {n}"),
                        )
                    })
                    .collect(),
            )
        }
        AffSpec::Center | AffSpec::CenterO => {
            let t = g.require_torus()?;
            let mut conds = vec![
                (
                    t.simple_root_value(1).is_one(),
                    "alpha_1(t) != 1".to_string(),
                ),
                (
                    t.simple_root_value(0).is_one(),
                    "alpha_0(t) != 1".to_string(),
                ),
            ];
            if spec == AffSpec::CenterO {
                conds.push((t.f.is_unit_integral(), "f is not a unit of O".into()));
            }
            check(conds)
        }
        AffSpec::VForm(n) => vform_member(g, n),
    })
}

/// `w(alpha_i(t) - 1) >= n`: the criterion for `t` to fix the point
/// `x_{alpha_i}(w^-n) . 0`.
pub fn fixes_test_point(t: &AffTorusElt, i: usize, n: u32) -> bool {
    t.simple_root_value(i).in_one_plus_pi_n(n as i64)
}

/// Result of the `U^+ . U^- . T` factorization of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VFactorization {
    /// In `SL_2(K[u])`, upper unitriangular at `u = 0`.
    pub plus: AffElt,
    /// In `SL_2(K[1/u])`, lower unitriangular at `u = infinity`.
    pub minus: AffElt,
    pub torus: AffTorusElt,
}

/// Solve `M = P Q diag(d, 1/d)` for `g = (M, z)` by linear algebra on the
/// rows of `R = P^{-1}`, whose degree is bounded by the top exponent of `M`.
pub fn v_factorize(g: &AffElt) -> Option<VFactorization> {
    let field = g.field();
    let top =
        g.m.iter()
            .filter_map(|p| p.max_exp())
            .max()
            .unwrap_or(0)
            .max(0);
    let deg = top as usize;
    // Row (r1, r2) of R: unknowns r1[0..=deg], r2[0..=deg].
    let solve_row = |row: usize| -> Option<(LaurentPoly, LaurentPoly)> {
        let nunk = 2 * (deg + 1);
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        let zero = Scalar::zero(field);
        // (r1 m1j + r2 m2j)[e] = 0 for e above the allowed range
        for (j, first_e) in [(0usize, 1i64), (1usize, if row == 0 { 0 } else { 1 })] {
            for e in first_e..=(top + deg as i64) {
                let mut eq = vec![zero.clone(); nunk + 1];
                for s in 0..=deg {
                    let k = e - s as i64;
                    eq[s] = g.m[j].coeff(k);
                    eq[deg + 1 + s] = g.m[2 + j].coeff(k);
                }
                rows.push(eq);
            }
        }
        let mut fix = |idx: usize, val: Scalar| {
            let mut eq = vec![zero.clone(); nunk + 1];
            eq[idx] = Scalar::one(field);
            eq[nunk] = val;
            rows.push(eq);
        };
        if row == 0 {
            fix(0, Scalar::one(field));
        } else {
            fix(0, Scalar::zero(field));
            fix(deg + 1, Scalar::one(field));
        }
        let sol = solve_linear(rows, nunk)?;
        let r1 = LaurentPoly::from_terms(field, (0..=deg).map(|s| (s as i64, sol[s].clone())));
        let r2 = LaurentPoly::from_terms(
            field,
            (0..=deg).map(|s| (s as i64, sol[deg + 1 + s].clone())),
        );
        Some((r1, r2))
    };
    let (r11, r12) = solve_row(0)?;
    let (r21, r22) = solve_row(1)?;
    let r: Mat = [r11, r12, r21, r22];
    if mat_det(&r) != LaurentPoly::one(field) {
        return None;
    }
    let x = mat_mul(&r, &g.m);
    let d = x[0].coeff(0);
    let di = d.inv().ok()?;
    let q: Mat = [
        x[0].scale(&di),
        x[1].scale(&d),
        x[2].scale(&di),
        x[3].scale(&d),
    ];
    // shape checks on Q: entries in K[1/u], (1,2) vanishing at infinity,
    // diagonal equal to 1 at infinity
    let nonpos = |p: &LaurentPoly| p.max_exp().is_none_or(|m| m <= 0);
    if !q.iter().all(nonpos)
        || !q[1].coeff(0).is_zero()
        || !q[0].coeff(0).is_one()
        || !q[3].coeff(0).is_one()
    {
        return None;
    }
    let one = Scalar::one(field);
    Some(VFactorization {
        plus: AffElt::raw(mat_adj(&r), one.clone()),
        minus: AffElt::raw(q, one),
        torus: AffTorusElt::new(d, g.z.clone()).ok()?,
    })
}

/// Gaussian elimination over `K`; rows are `[coefficients.., rhs]`.
fn solve_linear(mut rows: Vec<Vec<Scalar>>, nunk: usize) -> Option<Vec<Scalar>> {
    let field = rows.first()?.first()?.field();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nunk {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].inv().expect("pivot nonzero");
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for j in col..=nunk {
                    let sub = &factor * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &sub;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[nunk].is_zero()) {
        return None;
    }
    let mut sol = vec![Scalar::zero(field); nunk];
    for (i, &col) in pivots.iter().enumerate() {
        sol[col] = rows[i][nunk].clone();
    }
    Some(sol)
}

/// The dominant cocharacter `a^vee + 3d`.
pub const LAMBDA: (i64, i64) = (1, 3);

fn vform_member(g: &AffElt, n: u32) -> Membership {
    match v_factorize(g) {
        Some(fz) => vform_check(&fz, n),
        None => Membership::no("no U+ . U- . T factorization"),
    }
}

/// Whether explicit factors satisfy the valuation bounds for `n lambda`.
pub fn vform_check(fz: &VFactorization, n: u32) -> Membership {
    let n = n as i64;
    let (l, d) = (LAMBDA.0 * n, LAMBDA.1 * n);
    // Conjugating by t_{n lambda} multiplies the u^k coefficient of the
    // (1,2) entry by w^{-2l - dk}, of (2,1) by w^{2l - dk}, of the diagonal
    // by w^{-dk}; integrality of the result gives these bounds.
    let plus_bounds = [
        |k: i64, d: i64, _l: i64| d * k,
        |k: i64, d: i64, l: i64| 2 * l + d * k,
        |k: i64, d: i64, l: i64| d * k - 2 * l,
        |k: i64, d: i64, _l: i64| d * k,
    ];
    for (idx, entry) in fz.plus.m.iter().enumerate() {
        for (k, c) in entry.terms() {
            if !c.valuation().ge(plus_bounds[idx](k, d, l)) {
                return Membership::no(format!(
                    "U+ factor {} coefficient at u^{k} violates the bound for {n} lambda",
                    ENTRY_NAMES[idx]
                ));
            }
        }
    }
    for (idx, entry) in fz.minus.m.iter().enumerate() {
        for (k, c) in entry.terms() {
            // conjugating by t_{-n lambda} instead swaps the off-diagonal
            // roles and reverses the exponent
            if !c.valuation().ge(plus_bounds[3 - idx](-k, d, l)) {
                return Membership::no(format!(
                    "U- factor {} coefficient at u^{k} violates the bound for {n} lambda",
                    ENTRY_NAMES[idx]
                ));
            }
        }
    }
    let t = &fz.torus;
    if !t.f.in_one_plus_pi_n(2 * n) || !t.z.in_one_plus_pi_n(2 * n) {
        return Membership::no(format!("torus factor is not in T_{}", 2 * n));
    }
    Membership::yes()
}

/// Heights along the alternating word `r_1 r_0 r_1 ...` and the first index
/// `i` with `n ht(beta_i) < ht(beta_i)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KpWitness {
    pub betas: Vec<(RootVec, i64)>,
    pub witness_index: Option<usize>,
}

pub fn kp_witness(n: u64, depth: usize) -> KpWitness {
    let sys = RootGenSys::affine_sl2();
    let letter = |i: usize| if i.is_multiple_of(2) { 1 } else { 0 };
    let mut w = sys.weyl_identity();
    let mut betas = Vec::new();
    let mut witness_index = None;
    for i in 0..depth {
        let beta = sys.weyl_act_root(&w, &RootVec::simple(2, letter(i)));
        let ht = beta.height();
        if witness_index.is_none()
            && BigUint::from(n) * BigUint::from(ht as u64) < factorial(ht as u64)
        {
            witness_index = Some(i + 1);
        }
        betas.push((beta, ht));
        w = sys.weyl_push(&w, letter(i));
    }
    KpWitness {
        betas,
        witness_index,
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}
