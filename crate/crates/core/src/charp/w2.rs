use std::collections::BTreeMap;
use std::fmt;

use crate::exactalg::Field;
use crate::localmodel::MonomialLogForm;

/// Laurent polynomial in n variables with coefficients in ℤ/N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct W2Poly {
    modulus: u64,
    n: usize,
    terms: BTreeMap<Vec<i64>, u64>,
}

impl W2Poly {
    pub fn zero(modulus: u64, n: usize) -> W2Poly {
        W2Poly {
            modulus,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(modulus: u64, c: i64, exponent: Vec<i64>) -> W2Poly {
        let mut out = W2Poly::zero(modulus, exponent.len());
        out.add_term(exponent, c.rem_euclid(modulus as i64) as u64);
        out
    }

    pub fn one(modulus: u64, n: usize) -> W2Poly {
        W2Poly::monomial(modulus, 1, vec![0; n])
    }

    /// x_i^k.
    pub fn var_power(modulus: u64, n: usize, i: usize, k: i64) -> W2Poly {
        let mut e = vec![0; n];
        e[i] = k;
        W2Poly::monomial(modulus, 1, e)
    }

    pub fn from_terms(modulus: u64, n: usize, terms: &[(Vec<i64>, i64)]) -> W2Poly {
        let mut out = W2Poly::zero(modulus, n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent length");
            out.add_term(e.clone(), c.rem_euclid(modulus as i64) as u64);
        }
        out
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, u64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, e: &[i64]) -> u64 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<i64>, c: u64) {
        let c = c % self.modulus;
        if c == 0 {
            return;
        }
        let s = (self.terms.get(&e).copied().unwrap_or(0) + c) % self.modulus;
        if s == 0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, s);
        }
    }

    pub fn add(&self, other: &W2Poly) -> W2Poly {
        assert_eq!(self.modulus, other.modulus);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> W2Poly {
        let mut out = W2Poly::zero(self.modulus, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), self.modulus - c);
        }
        out
    }

    pub fn sub(&self, other: &W2Poly) -> W2Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: i64) -> W2Poly {
        let s = s.rem_euclid(self.modulus as i64) as u128;
        let mut out = W2Poly::zero(self.modulus, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), ((*c as u128 * s) % self.modulus as u128) as u64);
        }
        out
    }

    pub fn mul(&self, other: &W2Poly) -> W2Poly {
        assert_eq!(self.modulus, other.modulus);
        let m = self.modulus as u128;
        let mut out = W2Poly::zero(self.modulus, self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e = a.iter().zip(b).map(|(s, t)| s + t).collect();
                out.add_term(e, ((*x as u128 * *y as u128) % m) as u64);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> W2Poly {
        let mut out = W2Poly::one(self.modulus, self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Substitution x_i ↦ x_i^{-1} in every variable.
    pub fn invert_variables(&self) -> W2Poly {
        let mut out = W2Poly::zero(self.modulus, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.iter().map(|x| -x).collect(), *c);
        }
        out
    }

    /// Image in ℤ/d for d dividing the modulus.
    pub fn reduce(&self, d: u64) -> W2Poly {
        assert_eq!(self.modulus % d, 0);
        let mut out = W2Poly::zero(d, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c % d);
        }
        out
    }

    /// g mod p when self = p·g in ℤ/p², None when some coefficient is a unit.
    pub fn div_p(&self, p: u64) -> Option<W2Poly> {
        assert_eq!(self.modulus, p * p);
        let mut out = W2Poly::zero(p, self.n);
        for (e, c) in &self.terms {
            if c % p != 0 {
                return None;
            }
            out.add_term(e.clone(), c / p);
        }
        Some(out)
    }

    /// p·g in ℤ/p² for g over F_p.
    pub fn times_p(&self) -> W2Poly {
        let p = self.modulus;
        let mut out = W2Poly::zero(p * p, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * p);
        }
        out
    }

    /// Inverse of c·x^a·(1 + p·g) in ℤ/p², requiring self ≡ c·x^a mod p.
    pub fn inverse_near_monomial(&self, p: u64) -> Option<W2Poly> {
        let reduced = self.reduce(p);
        if reduced.terms.len() != 1 {
            return None;
        }
        let (a, c) = reduced.terms.iter().next().map(|(e, c)| (e.clone(), *c))?;
        let lead = W2Poly::monomial(self.modulus, c as i64, a.clone());
        let rest = self.sub(&lead).div_p(p)?;
        let c_inv = modinv(c, self.modulus)?;
        let neg_a: Vec<i64> = a.iter().map(|x| -x).collect();
        let inv0 = W2Poly::monomial(self.modulus, c_inv as i64, neg_a.clone());
        // (c x^a + p r)^{-1} = c^{-1} x^{-a} − p c^{-2} x^{-2a} r
        let sq = inv0.mul(&inv0);
        Some(inv0.sub(&sq.mul(&rest.times_p())))
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x >= 0))
    }

    /// Every term has exponent at least k in variable i.
    pub fn divisible_by_power(&self, i: usize, k: i64) -> bool {
        self.terms.keys().all(|e| e[i] >= k)
    }

    pub fn shift(&self, s: &[i64]) -> W2Poly {
        let mut out = W2Poly::zero(self.modulus, self.n);
        for (e, c) in &self.terms {
            out.add_term(e.iter().zip(s).map(|(a, b)| a + b).collect(), *c);
        }
        out
    }

    /// The function as a logarithmic 0-form over F_p (modulus must be p).
    pub fn to_form(&self) -> MonomialLogForm {
        let field = Field::Prime(self.modulus);
        let mut out = MonomialLogForm::zero(field, self.n);
        for (e, c) in &self.terms {
            out = out.add(&MonomialLogForm::monomial(field.int(*c as i64), e.clone(), &[]));
        }
        out
    }
}

fn modinv(c: u64, m: u64) -> Option<u64> {
    let (mut a, mut b) = (c as i128, m as i128);
    let (mut x0, mut x1) = (1i128, 0i128);
    while b != 0 {
        let q = a / b;
        (a, b) = (b, a - q * b);
        (x0, x1) = (x1, x0 - q * x1);
    }
    (a == 1).then(|| x0.rem_euclid(m as i128) as u64)
}

impl fmt::Display for W2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0)
                .map(|(i, x)| {
                    if *x == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, x)
                    }
                })
                .collect();
            match (vars.is_empty(), *c) {
                (true, c) => write!(f, "{c}")?,
                (false, 1) => write!(f, "{}", vars.join("·"))?,
                (false, c) => write!(f, "{c}·{}", vars.join("·"))?,
            }
        }
        Ok(())
    }
}
