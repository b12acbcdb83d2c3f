//! Root generating systems: Weyl group action on the apartment, real roots,
//! Tits cone descent, half-apartments and `N(lambda)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::valued_field::q_int;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcmAxiom {
    /// `a_ii = 2`
    Diagonal,
    /// `a_ij <= 0` for `i != j`
    OffDiagonalSign,
    /// `a_ij = 0` iff `a_ji = 0`
    SymmetricZeros,
}

impl fmt::Display for GcmAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GcmAxiom::Diagonal => "(i) a_ii = 2",
            GcmAxiom::OffDiagonalSign => "(ii) a_ij <= 0 for i != j",
            GcmAxiom::SymmetricZeros => "(iii) a_ij = 0 iff a_ji = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootDataError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("not a generalized Cartan matrix: axiom {axiom} fails at {position:?}")]
    NotGcm {
        axiom: GcmAxiom,
        position: (usize, usize),
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pairing alpha_{j}(alpha_{i}^vee) = {got}, expected a_ij = {expected}")]
    Pairing {
        i: usize,
        j: usize,
        expected: i64,
        got: i64,
    },
    #[error("index {0} out of range")]
    BadIndex(usize),
    #[error("vector is not regular (not in an open Weyl chamber of the Tits cone)")]
    NotRegular,
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

/// A validated generalized Cartan matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KacMoodyMatrix {
    entries: Vec<Vec<i64>>,
}

pub fn validate_km(raw: Vec<Vec<i64>>) -> Result<KacMoodyMatrix, RootDataError> {
    let n = raw.len();
    if raw.iter().any(|row| row.len() != n) {
        return Err(RootDataError::NotSquare);
    }
    for i in 0..n {
        if raw[i][i] != 2 {
            return Err(RootDataError::NotGcm {
                axiom: GcmAxiom::Diagonal,
                position: (i, i),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && raw[i][j] > 0 {
                return Err(RootDataError::NotGcm {
                    axiom: GcmAxiom::OffDiagonalSign,
                    position: (i, j),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if (raw[i][j] == 0) != (raw[j][i] == 0) {
                return Err(RootDataError::NotGcm {
                    axiom: GcmAxiom::SymmetricZeros,
                    position: (i, j),
                });
            }
        }
    }
    Ok(KacMoodyMatrix { entries: raw })
}

impl KacMoodyMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }
}

/// Element of the root lattice `Q`, in simple-root coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootVec(pub Vec<i64>);

impl RootVec {
    pub fn simple(size: usize, i: usize) -> Self {
        let mut v = vec![0; size];
        v[i] = 1;
        RootVec(v)
    }

    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn neg(&self) -> RootVec {
        RootVec(self.0.iter().map(|x| -x).collect())
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x >= 0) && self.0.iter().any(|&x| x > 0)
    }
}

impl fmt::Display for RootVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Rational point of the apartment `A = Y (x) Q`, in the fixed basis of `Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ApartmentVec(pub Vec<BigRational>);

impl ApartmentVec {
    pub fn from_ints(coords: &[i64]) -> Self {
        ApartmentVec(coords.iter().map(|&c| q_int(c)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        ApartmentVec(vec![BigRational::zero(); rank])
    }

    pub fn add(&self, other: &ApartmentVec) -> ApartmentVec {
        ApartmentVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: &BigRational) -> ApartmentVec {
        ApartmentVec(self.0.iter().map(|a| a * s).collect())
    }
}

impl fmt::Display for ApartmentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Weyl group element, stored as a word and its integer matrix on `A`.
#[derive(Debug, Clone)]
pub struct WeylElt {
    word: Vec<usize>,
    matrix: Vec<Vec<BigInt>>,
}

impl PartialEq for WeylElt {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Eq for WeylElt {}

impl WeylElt {
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, x)| *x == BigInt::from((i == j) as i64))
        })
    }

    pub fn apply(&self, v: &ApartmentVec) -> ApartmentVec {
        ApartmentVec(
            self.matrix
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&v.0)
                        .map(|(m, x)| BigRational::from_integer(m.clone()) * x)
                        .sum()
                })
                .collect(),
        )
    }
}

impl fmt::Display for WeylElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.word.iter().map(|i| format!("r{i}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TitsClass {
    /// `v = w . x` with `x` in the closed fundamental chamber and `J` the
    /// indices of the walls containing `x`.
    InCone {
        w: WeylElt,
        face: BTreeSet<usize>,
        dominant: ApartmentVec,
    },
    NotClassified,
}

#[derive(Deserialize)]
struct Fixture {
    cartan: Vec<Vec<i64>>,
    rank: usize,
    simple_roots: Vec<Vec<i64>>,
    simple_coroots: Vec<Vec<i64>>,
}

/// A root generating system: Cartan matrix plus simple roots in `X` and
/// simple coroots in `Y`, in dual bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootGenSys {
    cartan: KacMoodyMatrix,
    rank: usize,
    simple_roots: Vec<Vec<i64>>,
    simple_coroots: Vec<Vec<i64>>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RootGenSys {
    pub fn new(
        cartan: KacMoodyMatrix,
        rank: usize,
        simple_roots: Vec<Vec<i64>>,
        simple_coroots: Vec<Vec<i64>>,
    ) -> Result<Self, RootDataError> {
        let l = cartan.size();
        if simple_roots.len() != l || simple_coroots.len() != l {
            return Err(RootDataError::Dimension(format!(
                "expected {l} simple roots and coroots"
            )));
        }
        if simple_roots
            .iter()
            .chain(&simple_coroots)
            .any(|v| v.len() != rank)
        {
            return Err(RootDataError::Dimension(format!(
                "vectors must have length {rank}"
            )));
        }
        for i in 0..l {
            for j in 0..l {
                let got = dot(&simple_roots[j], &simple_coroots[i]);
                if got != cartan.get(i, j) {
                    return Err(RootDataError::Pairing {
                        i,
                        j,
                        expected: cartan.get(i, j),
                        got,
                    });
                }
            }
        }
        Ok(RootGenSys {
            cartan,
            rank,
            simple_roots,
            simple_coroots,
        })
    }

    /// `SL_2`: `X` spanned by the fundamental weight, `Y` by the coroot.
    pub fn a1() -> Self {
        RootGenSys::new(
            validate_km(vec![vec![2]]).unwrap(),
            1,
            vec![vec![2]],
            vec![vec![1]],
        )
        .unwrap()
    }

    /// The affine `SL_2` system with index set `{0, 1}`, `Y` with basis
    /// `(a^vee, d)` and `X` with the dual basis; `alpha_1 = a`,
    /// `alpha_0 = delta - a`.
    pub fn affine_sl2() -> Self {
        RootGenSys::new(
            validate_km(vec![vec![2, -2], vec![-2, 2]]).unwrap(),
            2,
            vec![vec![-2, 1], vec![2, 0]],
            vec![vec![-1, 0], vec![1, 0]],
        )
        .unwrap()
    }

    pub fn from_toml(src: &str) -> Result<Self, RootDataError> {
        let fx: Fixture = toml::from_str(src).map_err(|e| RootDataError::Fixture(e.to_string()))?;
        RootGenSys::new(
            validate_km(fx.cartan)?,
            fx.rank,
            fx.simple_roots,
            fx.simple_coroots,
        )
    }

    /// A built-in system (`a1`, `affine-sl2`) or a fixture file path.
    pub fn load(name: &str) -> Result<Self, RootDataError> {
        match name {
            "a1" => Ok(RootGenSys::a1()),
            "affine-sl2" => Ok(RootGenSys::affine_sl2()),
            path if Path::new(path).is_file() => {
                let src = std::fs::read_to_string(path)
                    .map_err(|e| RootDataError::Fixture(e.to_string()))?;
                RootGenSys::from_toml(&src)
            }
            other => Err(RootDataError::UnknownSystem(other.to_string())),
        }
    }

    pub fn cartan(&self) -> &KacMoodyMatrix {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.cartan.size()
    }

    pub fn simple_root(&self, i: usize) -> &[i64] {
        &self.simple_roots[i]
    }

    pub fn simple_coroot(&self, i: usize) -> &[i64] {
        &self.simple_coroots[i]
    }

    /// `chi(v)` for `chi` in `X`.
    pub fn eval_pairing(&self, chi: &[i64], v: &ApartmentVec) -> BigRational {
        assert_eq!(chi.len(), v.0.len(), "pairing dimension mismatch");
        chi.iter().zip(&v.0).map(|(c, x)| q_int(*c) * x).sum()
    }

    /// `beta(v)` for `beta` in the root lattice.
    pub fn root_value(&self, beta: &RootVec, v: &ApartmentVec) -> BigRational {
        beta.0
            .iter()
            .enumerate()
            .filter(|(_, n)| **n != 0)
            .map(|(i, n)| q_int(*n) * self.eval_pairing(&self.simple_roots[i], v))
            .sum()
    }

    /// `X`-coordinates of a root-lattice element.
    pub fn root_to_x(&self, beta: &RootVec) -> Vec<i64> {
        let mut out = vec![0; self.rank];
        for (i, n) in beta.0.iter().enumerate() {
            for (k, x) in self.simple_roots[i].iter().enumerate() {
                out[k] += n * x;
            }
        }
        out
    }

    /// `r_i . v = v - alpha_i(v) alpha_i^vee`.
    pub fn reflect(&self, i: usize, v: &ApartmentVec) -> ApartmentVec {
        let a = self.eval_pairing(&self.simple_roots[i], v);
        ApartmentVec(
            v.0.iter()
                .zip(&self.simple_coroots[i])
                .map(|(x, c)| x - &a * q_int(*c))
                .collect(),
        )
    }

    /// `r_i . beta = beta - beta(alpha_i^vee) alpha_i`.
    pub fn co_reflect(&self, i: usize, beta: &RootVec) -> RootVec {
        let pairing: i64 = beta
            .0
            .iter()
            .enumerate()
            .map(|(j, b)| b * self.cartan.get(i, j))
            .sum();
        let mut out = beta.0.clone();
        out[i] -= pairing;
        RootVec(out)
    }

    pub fn weyl_identity(&self) -> WeylElt {
        let matrix = (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| BigInt::from((i == j) as i64))
                    .collect()
            })
            .collect();
        WeylElt {
            word: Vec::new(),
            matrix,
        }
    }

    /// `w . r_i`.
    pub fn weyl_push(&self, w: &WeylElt, i: usize) -> WeylElt {
        // matrix of r_i: I - alpha_i^vee (x) alpha_i
        let ri: Vec<Vec<BigInt>> = (0..self.rank)
            .map(|r| {
                (0..self.rank)
                    .map(|c| {
                        BigInt::from(
                            (r == c) as i64 - self.simple_coroots[i][r] * self.simple_roots[i][c],
                        )
                    })
                    .collect()
            })
            .collect();
        let matrix = (0..self.rank)
            .map(|r| {
                (0..self.rank)
                    .map(|c| (0..self.rank).map(|k| &w.matrix[r][k] * &ri[k][c]).sum())
                    .collect()
            })
            .collect();
        let mut word = w.word.clone();
        word.push(i);
        WeylElt { word, matrix }
    }

    pub fn weyl_from_word(&self, word: &[usize]) -> Result<WeylElt, RootDataError> {
        let mut w = self.weyl_identity();
        for &i in word {
            if i >= self.size() {
                return Err(RootDataError::BadIndex(i));
            }
            w = self.weyl_push(&w, i);
        }
        Ok(w)
    }

    /// Action of `w` on the root lattice.
    pub fn weyl_act_root(&self, w: &WeylElt, beta: &RootVec) -> RootVec {
        w.word
            .iter()
            .rev()
            .fold(beta.clone(), |b, &i| self.co_reflect(i, &b))
    }

    /// Real roots with `|ht| <= h`, sorted by height then coordinates.
    pub fn real_roots_up_to_height(&self, h: u32) -> Vec<RootVec> {
        let h = h as i64;
        let l = self.size();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for i in 0..l {
            for r in [RootVec::simple(l, i), RootVec::simple(l, i).neg()] {
                if r.height().abs() <= h && seen.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
        while let Some(r) = queue.pop_front() {
            for i in 0..l {
                let s = self.co_reflect(i, &r);
                if s.height().abs() <= h && !seen.contains(&s) {
                    seen.insert(s.clone());
                    queue.push_back(s);
                }
            }
        }
        let mut roots: Vec<RootVec> = seen.into_iter().collect();
        roots.sort_by_key(|r| (r.height(), r.clone()));
        roots
    }

    /// Descent into the fundamental chamber, reflecting in the least index
    /// with a negative value at each step.
    pub fn tits_classify(&self, v: &ApartmentVec, max_steps: usize) -> TitsClass {
        let mut current = v.clone();
        let mut w = self.weyl_identity();
        let mut steps = 0;
        loop {
            let neg = (0..self.size()).find(|&i| {
                self.eval_pairing(&self.simple_roots[i], &current)
                    .is_negative()
            });
            match neg {
                None => {
                    let face = (0..self.size())
                        .filter(|&j| self.eval_pairing(&self.simple_roots[j], &current).is_zero())
                        .collect();
                    return TitsClass::InCone {
                        w,
                        face,
                        dominant: current,
                    };
                }
                Some(i) => {
                    if steps == max_steps {
                        return TitsClass::NotClassified;
                    }
                    current = self.reflect(i, &current);
                    w = self.weyl_push(&w, i);
                    steps += 1;
                }
            }
        }
    }

    /// `min |alpha(lambda)|` over real roots, for regular `lambda`.
    pub fn n_of_lambda(
        &self,
        lambda: &ApartmentVec,
        max_steps: usize,
    ) -> Result<BigRational, RootDataError> {
        let dominant = match self.tits_classify(lambda, max_steps) {
            TitsClass::InCone { face, dominant, .. } if face.is_empty() => dominant,
            _ => return Err(RootDataError::NotRegular),
        };
        let values: Vec<BigRational> = (0..self.size())
            .map(|i| self.eval_pairing(&self.simple_roots[i], &dominant))
            .collect();
        let min_simple = values.iter().min().expect("nonempty index set").clone();
        // The simple roots already give a candidate; a root of height h has
        // |alpha(lambda++)| >= h * min_simple, so larger heights cannot win.
        let candidate = min_simple.clone();
        let h = (&candidate / &min_simple)
            .floor()
            .to_integer()
            .max(BigInt::from(1));
        let h: u32 = h.try_into().unwrap_or(u32::MAX);
        let best = self
            .real_roots_up_to_height(h)
            .iter()
            .map(|r| self.root_value(r, &dominant).abs())
            .min()
            .expect("at least one root");
        Ok(best)
    }
}

/// `alpha(v) + k >= 0`.
pub fn half_apartment_contains(
    sys: &RootGenSys,
    alpha: &RootVec,
    k: i64,
    v: &ApartmentVec,
) -> bool {
    sys.root_value(alpha, v) + q_int(k) >= BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued_field::q_frac;
    use proptest::prelude::*;

    fn lambda() -> ApartmentVec {
        ApartmentVec::from_ints(&[1, 3])
    }

    #[test]
    fn gcm_validation() {
        assert!(validate_km(vec![vec![2]]).is_ok());
        assert!(validate_km(vec![vec![2, -2], vec![-2, 2]]).is_ok());
        assert_eq!(
            validate_km(vec![vec![2, -1], vec![0, 2]]),
            Err(RootDataError::NotGcm {
                axiom: GcmAxiom::SymmetricZeros,
                position: (0, 1)
            })
        );
        assert!(matches!(
            validate_km(vec![vec![2, 1], vec![1, 2]]),
            Err(RootDataError::NotGcm {
                axiom: GcmAxiom::OffDiagonalSign,
                ..
            })
        ));
        assert!(matches!(
            validate_km(vec![vec![3]]),
            Err(RootDataError::NotGcm {
                axiom: GcmAxiom::Diagonal,
                ..
            })
        ));
    }

    #[test]
    fn pairing_examples() {
        let s = RootGenSys::affine_sl2();
        assert_eq!(s.eval_pairing(s.simple_root(0), &lambda()), q_int(1));
        assert_eq!(s.eval_pairing(s.simple_root(1), &lambda()), q_int(2));
        let delta = s.root_to_x(&RootVec(vec![1, 1]));
        assert_eq!(
            s.eval_pairing(&delta, &ApartmentVec::from_ints(&[1, 0])),
            q_int(0)
        );
    }

    #[test]
    fn reflection_examples() {
        let a1 = RootGenSys::a1();
        assert_eq!(
            a1.reflect(0, &ApartmentVec::from_ints(&[1])),
            ApartmentVec::from_ints(&[-1])
        );
        let s = RootGenSys::affine_sl2();
        assert_eq!(s.co_reflect(1, &RootVec(vec![1, 0])), RootVec(vec![1, 2]));
        let v = ApartmentVec(vec![q_frac(3, 7), q_int(-2)]);
        assert_eq!(s.reflect(0, &s.reflect(0, &v)), v);
    }

    #[test]
    fn root_enumeration() {
        let a1 = RootGenSys::a1();
        assert_eq!(
            a1.real_roots_up_to_height(5),
            vec![RootVec(vec![-1]), RootVec(vec![1])]
        );
        let s = RootGenSys::affine_sl2();
        let positive: BTreeSet<RootVec> = s
            .real_roots_up_to_height(3)
            .into_iter()
            .filter(|r| r.is_positive())
            .collect();
        let expected: BTreeSet<RootVec> = [[0, 1], [1, 0], [1, 2], [2, 1]]
            .iter()
            .map(|v| RootVec(v.to_vec()))
            .collect();
        assert_eq!(positive, expected);
        for k in 1..6u32 {
            let count = s
                .real_roots_up_to_height(2 * k - 1)
                .iter()
                .filter(|r| r.is_positive())
                .count();
            assert_eq!(count, 2 * k as usize);
        }
    }

    #[test]
    fn heights() {
        assert_eq!(RootVec(vec![1, 2]).height(), 3);
        assert_eq!(RootVec(vec![-1, 0]).height(), -1);
        assert_eq!(RootVec(vec![0, 0]).height(), 0);
    }

    #[test]
    fn tits_examples() {
        let s = RootGenSys::affine_sl2();
        match s.tits_classify(&lambda(), 10) {
            TitsClass::InCone { w, face, .. } => {
                assert!(w.is_identity());
                assert!(face.is_empty());
            }
            TitsClass::NotClassified => panic!("lambda is dominant"),
        }
        // -a^vee is on the boundary delta = 0 of the Tits cone: descent
        // alternates r_1, r_0 forever.
        assert_eq!(
            s.tits_classify(&ApartmentVec::from_ints(&[-1, 0]), 50),
            TitsClass::NotClassified
        );
        assert_eq!(
            s.tits_classify(&ApartmentVec::from_ints(&[0, -1]), 100),
            TitsClass::NotClassified
        );
        match s.tits_classify(&ApartmentVec::from_ints(&[-1, 1]), 10) {
            TitsClass::InCone { w, face, dominant } => {
                assert_eq!(w.word(), &[1, 0]);
                assert_eq!(face, BTreeSet::from([1]));
                assert_eq!(w.apply(&dominant), ApartmentVec::from_ints(&[-1, 1]));
            }
            TitsClass::NotClassified => panic!("in the cone"),
        }
    }

    #[test]
    fn n_of_lambda_examples() {
        let s = RootGenSys::affine_sl2();
        assert_eq!(s.n_of_lambda(&lambda(), 100).unwrap(), q_int(1));
        assert_eq!(
            s.n_of_lambda(&ApartmentVec::from_ints(&[2, 6]), 100)
                .unwrap(),
            q_int(2)
        );
        let a1 = RootGenSys::a1();
        assert_eq!(
            a1.n_of_lambda(&ApartmentVec::from_ints(&[1]), 10).unwrap(),
            q_int(2)
        );
        assert_eq!(
            a1.n_of_lambda(&ApartmentVec::from_ints(&[0]), 10),
            Err(RootDataError::NotRegular)
        );
    }

    #[test]
    fn half_apartments() {
        let s = RootGenSys::affine_sl2();
        assert!(half_apartment_contains(
            &s,
            &RootVec(vec![0, 1]),
            0,
            &ApartmentVec::zero(2)
        ));
        assert!(half_apartment_contains(
            &s,
            &RootVec(vec![1, 0]),
            -1,
            &lambda()
        ));
        let a1 = RootGenSys::a1();
        assert!(!half_apartment_contains(
            &a1,
            &RootVec(vec![1]),
            -3,
            &ApartmentVec::from_ints(&[1])
        ));
    }

    #[test]
    fn weyl_elements_compare_by_matrix() {
        let s = RootGenSys::affine_sl2();
        let w = s.weyl_from_word(&[1, 1]).unwrap();
        assert!(w.is_identity());
        assert_eq!(w, s.weyl_identity());
        assert_ne!(
            s.weyl_from_word(&[0, 1]).unwrap(),
            s.weyl_from_word(&[1, 0]).unwrap()
        );
        assert!(s.weyl_from_word(&[2]).is_err());
    }

    #[test]
    fn fixture_round_trip() {
        let src = "cartan = [[2, -2], [-2, 2]]\nrank = 2\nsimple_roots = [[-2, 1], [2, 0]]\nsimple_coroots = [[-1, 0], [1, 0]]\n";
        assert_eq!(
            RootGenSys::from_toml(src).unwrap(),
            RootGenSys::affine_sl2()
        );
        let bad = "cartan = [[2, -1], [-1, 2]]\nrank = 2\nsimple_roots = [[2, 0], [0, 2]]\nsimple_coroots = [[1, 0], [0, 1]]\n";
        assert!(matches!(
            RootGenSys::from_toml(bad),
            Err(RootDataError::Pairing { .. })
        ));
    }

    proptest! {
        #[test]
        fn roots_are_sign_coherent_and_reduced(h in 1u32..10) {
            let s = RootGenSys::affine_sl2();
            let roots: BTreeSet<RootVec> = s.real_roots_up_to_height(h).into_iter().collect();
            for r in &roots {
                prop_assert!(r.0.iter().all(|&x| x >= 0) || r.0.iter().all(|&x| x <= 0));
                prop_assert!(roots.contains(&r.neg()));
                for m in 2..4 {
                    let multiple = RootVec(r.0.iter().map(|x| x * m).collect());
                    prop_assert!(!roots.contains(&multiple));
                }
            }
        }

        #[test]
        fn classification_is_consistent(x in -20i64..20, y in 1i64..6) {
            let s = RootGenSys::affine_sl2();
            let v = ApartmentVec::from_ints(&[x, y]);
            match s.tits_classify(&v, 200) {
                TitsClass::InCone { w, face, dominant } => {
                    prop_assert_eq!(w.apply(&dominant), v);
                    for j in 0..2 {
                        let val = s.eval_pairing(s.simple_root(j), &dominant);
                        if face.contains(&j) {
                            prop_assert!(val.is_zero());
                        } else {
                            prop_assert!(val.is_positive());
                        }
                    }
                }
                TitsClass::NotClassified => prop_assert!(false, "delta > 0 lies in the cone"),
            }
        }

        #[test]
        fn n_of_lambda_is_homogeneous(x in -10i64..10, y in 1i64..4, m in 1i64..4) {
            let s = RootGenSys::affine_sl2();
            let v = ApartmentVec::from_ints(&[x, y]);
            if let Ok(n) = s.n_of_lambda(&v, 200) {
                let mv = v.scale(&q_int(m));
                prop_assert_eq!(s.n_of_lambda(&mv, 200).unwrap(), n * q_int(m));
            }
        }
    }
}
