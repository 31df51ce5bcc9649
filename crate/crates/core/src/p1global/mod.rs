//! Global checks on X = P¹ for a rational function f.
//!
//! Sheaves are rank-one subsheaves of meromorphic functions or forms, fixed by
//! lower bounds on the order at each special point. Hypercohomology uses the
//! cover U0 = A¹ and U1 = P¹ ∖ {c} for a point c outside D; in the coordinate
//! t = z − c the sections over U0, U1 and U0 ∩ U1 are ranges of Laurent
//! monomials, truncated at |degree| ≤ N.

mod cech;
mod ops;
mod oracle;
mod rational;

pub use cech::{CechModel, LineSheaf, Ranges};
pub use ops::{
    build_kontsevich, build_kontsevich_with, decomposition_check, decomposition_check_with, hypercoh_dims,
    hypercoh_dims_with, irregular_hodge, irregular_hodge_all, jump_grid, line_bundle_h, verify_uv_independence,
    verify_uv_independence_with, DecompositionReport, HodgeReport, HypercohResult, KontsevichComplex, LevelDim,
    LineBundleTerm, P1Options, StabilizationCertificate, UvReport, UvRow, STANDARD_UV,
};
pub use oracle::{direct_de_rham_oracle, direct_de_rham_oracle_with, OracleResult};
pub use rational::{rational_roots, Laurent, RatFunc};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::{Field, Poly};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum P1Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("alpha = {0} is outside [0, 1)")]
    AlphaOutOfRange(String),
    #[error("dimensions did not stabilize: N = {n} gives {dims_n:?}, N = {n_plus} gives {dims_n_plus:?}")]
    NotStabilized {
        n: i64,
        n_plus: i64,
        dims_n: Vec<usize>,
        dims_n_plus: Vec<usize>,
    },
    #[error("truncation N = {0} is too small for this problem")]
    TruncationTooSmall(i64),
    #[error("{0}")]
    FieldReduction(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// A point of P¹ over the base field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "String")]
pub enum Point {
    Finite(BigRational),
    Infinity,
}

impl Point {
    pub fn int(n: i64) -> Point {
        Point::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(q) => write!(f, "{q}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

impl From<Point> for String {
    fn from(p: Point) -> String {
        p.to_string()
    }
}

/// A rational written as an integer or a string such as "-3/4".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Text(String),
}

impl Value {
    pub fn rational(&self) -> Result<BigRational, String> {
        match self {
            Value::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            Value::Text(s) => BigRational::from_str(s.trim()).map_err(|e| format!("bad rational {s:?}: {e}")),
        }
    }
}

impl TryFrom<Value> for Point {
    type Error = String;

    fn try_from(v: Value) -> Result<Point, String> {
        if let Value::Text(s) = &v {
            if matches!(s.trim(), "inf" | "infinity" | "∞") {
                return Ok(Point::Infinity);
            }
        }
        v.rational().map(Point::Finite)
    }
}

/// f = f_num / f_den on P¹ with pole divisor P = Σ e_i·p_i and horizontal
/// points H.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct P1Problem {
    pub poles: Vec<(Point, u32)>,
    #[serde(with = "rational_list")]
    pub f_num: Vec<BigRational>,
    #[serde(with = "rational_list")]
    pub f_den: Vec<BigRational>,
    pub horizontal: Vec<Point>,
    #[serde(with = "rational_pair")]
    pub twist: (BigRational, BigRational),
}

fn q_poly(c: &[BigRational]) -> Poly {
    rational::rational_poly(Field::Rational, c).expect("rationals embed in ℚ")
}

fn degree(c: &[BigRational]) -> Option<usize> {
    c.iter().rposition(|x| !x.is_zero())
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.div_rem(&b).1;
        a = b;
        b = r;
    }
    a.monic()
}

impl P1Problem {
    /// Derives the poles of num/den; den must split over ℚ.
    pub fn from_f(num: Vec<BigRational>, den: Vec<BigRational>, horizontal: Vec<Point>) -> Result<P1Problem, P1Error> {
        let dn = degree(&num).ok_or_else(|| P1Error::InvalidProblem("f is zero".into()))?;
        let dd = degree(&den).ok_or_else(|| P1Error::InvalidProblem("denominator is zero".into()))?;
        let (roots, rest) = rational_roots(&den)?;
        if rest > 0 {
            return Err(P1Error::InvalidProblem(
                "the denominator has a factor without rational roots; poles must be rational points".into(),
            ));
        }
        let mut poles: Vec<(Point, u32)> = roots.into_iter().map(|(a, e)| (Point::Finite(a), e)).collect();
        if dn > dd {
            poles.push((Point::Infinity, (dn - dd) as u32));
        }
        let p = P1Problem {
            poles,
            f_num: num,
            f_den: den,
            horizontal,
            twist: (BigRational::one(), BigRational::one()),
        };
        p.validate()?;
        Ok(p)
    }

    /// Shorthand with integer coefficients, lowest degree first.
    pub fn from_ints(num: &[i64], den: &[i64], horizontal: Vec<Point>) -> Result<P1Problem, P1Error> {
        let q = |c: &[i64]| c.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        P1Problem::from_f(q(num), q(den), horizontal)
    }

    pub fn with_twist(mut self, u: BigRational, v: BigRational) -> P1Problem {
        self.twist = (u, v);
        self
    }

    pub fn validate(&self) -> Result<(), P1Error> {
        let bad = |s: String| Err(P1Error::InvalidProblem(s));
        let (Some(dn), Some(dd)) = (degree(&self.f_num), degree(&self.f_den)) else {
            return bad("numerator and denominator must be nonzero".into());
        };
        let num = q_poly(&self.f_num);
        let den = q_poly(&self.f_den);
        if !poly_gcd(&num, &den).is_unit() {
            return bad("numerator and denominator are not coprime".into());
        }
        if dn == 0 && dd == 0 {
            return bad("f is constant".into());
        }
        if self.poles.iter().any(|(_, e)| *e == 0) {
            return bad("pole multiplicities must be positive".into());
        }
        let total: u32 = self.poles.iter().map(|(_, e)| e).sum();
        if total as usize != dn.max(dd) {
            return bad(format!("pole multiplicities sum to {total}, expected {}", dn.max(dd)));
        }
        let has_inf = self.poles.iter().any(|(p, _)| p.is_infinite());
        if has_inf != (dn > dd) {
            return bad("∞ is a pole exactly when deg num > deg den".into());
        }
        for (p, e) in &self.poles {
            match p {
                Point::Infinity => {
                    if *e as usize != dn - dd {
                        return bad(format!("pole order at ∞ is {}, not {e}", dn - dd));
                    }
                }
                Point::Finite(a) => {
                    let k = rational::root_multiplicity(&den, &crate::exactalg::Scalar::Rational(a.clone()));
                    if k != *e {
                        return bad(format!("pole order at {a} is {k}, not {e}"));
                    }
                }
            }
        }
        let mut pts: Vec<&Point> = self.poles.iter().map(|(p, _)| p).chain(&self.horizontal).collect();
        let n = pts.len();
        pts.sort();
        pts.dedup();
        if pts.len() != n {
            return bad("points of P_red and H must be pairwise distinct".into());
        }
        Ok(())
    }

    pub fn pole_total(&self) -> u32 {
        self.poles.iter().map(|(_, e)| e).sum()
    }

    pub fn max_e(&self) -> u32 {
        self.poles.iter().map(|(_, e)| *e).max().unwrap_or(0)
    }

    pub fn is_reduced(&self) -> bool {
        self.poles.iter().all(|(_, e)| *e == 1)
    }

    /// 4·(Σe_i + |H| + 4).
    pub fn default_truncation(&self) -> i64 {
        4 * (self.pole_total() as i64 + self.horizontal.len() as i64 + 4)
    }

    /// Distinct pole multiplicities.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut e: Vec<u32> = self.poles.iter().map(|(_, e)| *e).collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

impl fmt::Display for P1Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |c: &[BigRational]| format!("{}", q_poly(c)).replace("h^", "z^");
        write!(f, "f = ({}) / ({})", show(&self.f_num), show(&self.f_den))?;
        if !self.horizontal.is_empty() {
            let h: Vec<String> = self.horizontal.iter().map(Point::to_string).collect();
            write!(f, ", H = {{{}}}", h.join(", "))?;
        }
        Ok(())
    }
}

/// The problem file: `{ "f": {"num": [...], "den": [...]}, "horizontal": [...],
/// "alpha_grid": [...], "uv_samples": [[u, v], ...], "truncation": N }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub f: FSpec,
    #[serde(default)]
    pub horizontal: Vec<Point>,
    #[serde(default)]
    pub alpha_grid: Option<Vec<Value>>,
    #[serde(default)]
    pub uv_samples: Option<Vec<(Value, Value)>>,
    #[serde(default)]
    pub truncation: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FSpec {
    pub num: Vec<Value>,
    #[serde(default = "one_list")]
    pub den: Vec<Value>,
}

fn one_list() -> Vec<Value> {
    vec![Value::Int(1)]
}

fn values(v: &[Value]) -> Result<Vec<BigRational>, P1Error> {
    v.iter()
        .map(|x| x.rational().map_err(P1Error::InvalidProblem))
        .collect()
}

impl ProblemFile {
    pub fn from_json(s: &str) -> Result<ProblemFile, P1Error> {
        serde_json::from_str(s).map_err(|e| P1Error::InvalidProblem(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<ProblemFile, P1Error> {
        toml::from_str(s).map_err(|e| P1Error::InvalidProblem(e.to_string()))
    }

    pub fn problem(&self) -> Result<P1Problem, P1Error> {
        P1Problem::from_f(values(&self.f.num)?, values(&self.f.den)?, self.horizontal.clone())
    }

    /// The α grid, defaulting to {0} ∪ {r/e_i}.
    pub fn alphas(&self, problem: &P1Problem) -> Result<Vec<BigRational>, P1Error> {
        match &self.alpha_grid {
            Some(v) => values(v),
            None => Ok(ops::alpha_grid(problem)),
        }
    }

    pub fn uv(&self) -> Result<Vec<(BigRational, BigRational)>, P1Error> {
        match &self.uv_samples {
            Some(v) => v
                .iter()
                .map(|(a, b)| {
                    Ok((
                        values(std::slice::from_ref(a))?.remove(0),
                        values(std::slice::from_ref(b))?.remove(0),
                    ))
                })
                .collect(),
            None => Ok(STANDARD_UV
                .iter()
                .map(|&(u, v)| (BigRational::from_integer(u.into()), BigRational::from_integer(v.into())))
                .collect()),
        }
    }
}

mod rational_list {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(ToString::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let raw = Vec::<super::Value>::deserialize(d)?;
        raw.iter()
            .map(|x| x.rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

mod rational_pair {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &(BigRational, BigRational), s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([v.0.to_string(), v.1.to_string()])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(BigRational, BigRational), D::Error> {
        let (a, b) = <(super::Value, super::Value)>::deserialize(d)?;
        Ok((
            a.rational().map_err(serde::de::Error::custom)?,
            b.rational().map_err(serde::de::Error::custom)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_derived() {
        let p = P1Problem::from_ints(&[1, 0, 1], &[0, 1], vec![]).unwrap();
        assert_eq!(p.poles, vec![(Point::int(0), 1), (Point::Infinity, 1)]);
        let p = P1Problem::from_ints(&[0, 0, 0, 1], &[-1, 1], vec![]).unwrap();
        assert_eq!(p.poles, vec![(Point::int(1), 1), (Point::Infinity, 2)]);
        assert_eq!(p.default_truncation(), 28);
    }

    #[test]
    fn invalid_problems() {
        assert!(P1Problem::from_ints(&[0, 1], &[1], vec![Point::Infinity]).is_err());
        assert!(P1Problem::from_ints(&[1, 1], &[1, 1], vec![]).is_err());
        assert!(P1Problem::from_ints(&[3], &[1], vec![]).is_err());
        assert!(P1Problem::from_ints(&[1], &[1, 0, 1], vec![]).is_err());
        assert!(P1Problem::from_ints(&[0, 1], &[1], vec![Point::int(0), Point::int(0)]).is_err());
    }

    #[test]
    fn problem_files() {
        let j = r#"{"f": {"num": [1, 0, 1], "den": [0, 1]}, "horizontal": [], "truncation": 20}"#;
        let pf = ProblemFile::from_json(j).unwrap();
        assert_eq!(pf.truncation, Some(20));
        assert_eq!(pf.problem().unwrap().poles.len(), 2);
        let t = "horizontal = [0, \"inf\"]\n[f]\nnum = [\"1/2\"]\nden = [-1, 1]\n";
        let pf = ProblemFile::from_toml(t).unwrap();
        assert_eq!(pf.horizontal, vec![Point::int(0), Point::Infinity]);
        let p = pf.problem().unwrap();
        assert_eq!(p.poles, vec![(Point::int(1), 1)]);
        let round: P1Problem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(round, p);
    }
}
