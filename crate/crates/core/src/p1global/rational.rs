use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactalg::{Field, Poly, Scalar};

use super::P1Error;

/// Finite sum Σ c_k t^k with k ∈ ℤ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent {
    field: Field,
    terms: BTreeMap<i64, Scalar>,
}

impl Laurent {
    pub fn zero(field: Field) -> Laurent {
        Laurent {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(c: Scalar, k: i64) -> Laurent {
        let mut l = Laurent::zero(c.field());
        l.add_term(k, c);
        l
    }

    /// t^shift · p(t)
    pub fn from_poly(p: &Poly, shift: i64) -> Laurent {
        let mut l = Laurent::zero(p.field());
        for (i, c) in p.coeffs().iter().enumerate() {
            l.add_term(i as i64 + shift, c.clone());
        }
        l
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i64) -> Scalar {
        self.terms.get(&k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub(crate) fn add_term(&mut self, k: i64, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(|| self.field.zero());
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Laurent {
        let mut out = Laurent::zero(self.field);
        for (k, c) in self.terms() {
            out.add_term(k, c * s);
        }
        out
    }

    pub fn shift(&self, by: i64) -> Laurent {
        Laurent {
            field: self.field,
            terms: self.terms.iter().map(|(k, c)| (k + by, c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.field);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                out.add_term(i + j, a * b);
            }
        }
        out
    }
}

/// p(t) ↦ p(t + c)
pub fn taylor_shift(p: &Poly, c: &Scalar) -> Poly {
    let field = p.field();
    let lin = Poly::new(field, vec![c.clone(), field.one()]);
    p.coeffs().iter().rev().fold(Poly::zero(field), |acc, a| {
        acc.mul(&lin).add(&Poly::constant(a.clone()))
    })
}

pub fn derivative(p: &Poly) -> Poly {
    let field = p.field();
    let c = p
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * &field.int(i as i64))
        .collect();
    Poly::new(field, c)
}

fn poly_pow(p: &Poly, k: u32) -> Poly {
    (0..k).fold(Poly::one(p.field()), |acc, _| acc.mul(p))
}

/// num / den with den ≠ 0.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "zero denominator");
        RatFunc { num, den }
    }

    pub fn poly(p: Poly) -> RatFunc {
        let f = p.field();
        RatFunc::new(p, Poly::one(f))
    }

    pub fn constant(c: Scalar) -> RatFunc {
        RatFunc::poly(Poly::constant(c))
    }

    /// (t − a)^k for any k ∈ ℤ.
    pub fn linear_power(field: Field, a: &Scalar, k: i64) -> RatFunc {
        let lin = Poly::new(field, vec![-a.clone(), field.one()]);
        let p = poly_pow(&lin, k.unsigned_abs() as u32);
        if k >= 0 {
            RatFunc::poly(p)
        } else {
            RatFunc::new(Poly::one(field), p)
        }
    }

    pub fn field(&self) -> Field {
        self.num.field()
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.den == other.den {
            return RatFunc::new(self.num.add(&other.num), self.den.clone());
        }
        RatFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn scale(&self, s: &Scalar) -> RatFunc {
        RatFunc::new(self.num.scale(s), self.den.clone())
    }

    pub fn derivative(&self) -> RatFunc {
        let n = derivative(&self.num)
            .mul(&self.den)
            .sub(&self.num.mul(&derivative(&self.den)));
        RatFunc::new(n, self.den.mul(&self.den))
    }

    /// Substitutes t ↦ t + c.
    pub fn shift(&self, c: &Scalar) -> RatFunc {
        RatFunc::new(taylor_shift(&self.num, c), taylor_shift(&self.den, c))
    }

    /// The Laurent polynomial equal to self, if the denominator is c·t^s up to
    /// factors that divide the numerator.
    pub fn to_laurent(&self) -> Option<Laurent> {
        let field = self.field();
        let lead = self.den.coeffs().iter().position(|c| !c.is_zero())?;
        let d1 = Poly::new(field, self.den.coeffs()[lead..].to_vec());
        let (q, r) = self.num.div_rem(&d1);
        if !r.is_zero() {
            return None;
        }
        Some(Laurent::from_poly(&q, -(lead as i64)))
    }

    /// Coefficients of (t − b)^{-1}, (t − b)^{-2}, … in the principal part at b.
    pub fn principal_part(&self, b: &Scalar) -> Vec<Scalar> {
        let field = self.field();
        let num = taylor_shift(&self.num, b);
        let den = taylor_shift(&self.den, b);
        let k = den
            .coeffs()
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero denominator");
        let d1 = &den.coeffs()[k..];
        let inv = d1[0].inv().expect("unit");
        // power series num / d1 up to s^{k-1}
        let mut series: Vec<Scalar> = Vec::with_capacity(k);
        for i in 0..k {
            let mut acc = num.coeffs().get(i).cloned().unwrap_or_else(|| field.zero());
            for j in 1..=i.min(d1.len() - 1) {
                acc = &acc - &(&d1[j] * &series[i - j]);
            }
            series.push(&acc * &inv);
        }
        // s^i / s^k = s^{-(k-i)}
        let mut out = vec![field.zero(); k];
        for (i, c) in series.into_iter().enumerate() {
            out[k - i - 1] = c;
        }
        out
    }
}

/// Multiplicity of t − a in p.
pub fn root_multiplicity(p: &Poly, a: &Scalar) -> u32 {
    let lin = Poly::new(p.field(), vec![-a.clone(), p.field().one()]);
    let mut q = p.clone();
    let mut k = 0;
    while !q.is_zero() {
        let (quot, rem) = q.div_rem(&lin);
        if !rem.is_zero() {
            break;
        }
        q = quot;
        k += 1;
    }
    k
}

pub fn rational_poly(field: Field, coeffs: &[BigRational]) -> Result<Poly, P1Error> {
    let c = coeffs
        .iter()
        .map(|q| {
            field
                .from_rational(q)
                .ok_or_else(|| P1Error::FieldReduction(format!("coefficient {q} has no image in {field:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Poly::new(field, c))
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>, P1Error> {
    let n = n.abs();
    if n > BigInt::from(1_000_000_000_000u64) {
        return Err(P1Error::InvalidProblem(format!(
            "coefficient {n} too large for rational root search"
        )));
    }
    let n = n.to_u64().unwrap();
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    Ok(out)
}

/// All rational roots with multiplicity, and the degree of the cofactor
/// without rational roots.
pub fn rational_roots(coeffs: &[BigRational]) -> Result<(Vec<(BigRational, u32)>, usize), P1Error> {
    let mut c: Vec<BigRational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.is_empty() {
        return Err(P1Error::InvalidProblem("zero polynomial".into()));
    }
    let mut roots = Vec::new();
    let zeros = c.iter().position(|x| !x.is_zero()).unwrap();
    if zeros > 0 {
        roots.push((BigRational::zero(), zeros as u32));
        c.drain(..zeros);
    }
    let lcm = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let mut poly = Poly::new(Field::Rational, c.iter().map(|q| Scalar::Rational(q.clone())).collect());
    let nums = divisors(&ints[0])?;
    let dens = divisors(ints.last().unwrap())?;
    let mut cands: Vec<BigRational> = Vec::new();
    for p in &nums {
        for q in &dens {
            for s in [BigInt::one(), -BigInt::one()] {
                let r = BigRational::new(p * &s, q.clone());
                if !cands.contains(&r) {
                    cands.push(r);
                }
            }
        }
    }
    cands.sort();
    for r in cands {
        let a = Scalar::Rational(r.clone());
        let k = root_multiplicity(&poly, &a);
        if k > 0 {
            let lin = Poly::new(Field::Rational, vec![-a, Field::Rational.one()]);
            poly = poly.div_rem(&poly_pow(&lin, k)).0;
            roots.push((r, k));
        }
    }
    roots.sort_by(|x, y| x.0.cmp(&y.0));
    Ok((roots, poly.degree().unwrap_or(0)))
}
