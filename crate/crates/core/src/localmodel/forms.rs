use std::collections::BTreeMap;
use std::fmt;

use crate::exactalg::{Field, Scalar};

use super::ChartData;

/// Sign of δ_i ∧ δ_J against δ_{J∪{i}}, or None when i ∈ J.
pub(crate) fn insert_sign(i: usize, mask: u32) -> Option<bool> {
    if mask & (1 << i) != 0 {
        return None;
    }
    Some((mask & ((1u32 << i) - 1)).count_ones() % 2 == 1)
}

/// Subsets of `allowed` with `p` elements, in increasing numeric order.
pub(crate) fn subsets(allowed: u32, p: usize) -> Vec<u32> {
    let bits: Vec<u32> = (0..32).filter(|i| allowed & (1 << i) != 0).collect();
    if p > bits.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        out.push(idx.iter().fold(0u32, |acc, &j| acc | (1 << bits[j])));
        let mut k = p;
        loop {
            if k == 0 {
                out.sort_unstable();
                return out;
            }
            k -= 1;
            if idx[k] < bits.len() - p + k {
                idx[k] += 1;
                for t in k + 1..p {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

pub(crate) fn z_part(chart: &ChartData, mask: u32) -> Vec<i64> {
    (0..chart.n())
        .map(|i| i64::from(chart.is_z(i) && mask & (1 << i) != 0))
        .collect()
}

/// Finite sum of c·x^a·δ_J over the basis dx_i/x_i, dy_j/y_j, dz_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialLogForm {
    field: Field,
    n: usize,
    terms: BTreeMap<(Vec<i64>, u32), Scalar>,
}

impl MonomialLogForm {
    pub fn zero(field: Field, n: usize) -> MonomialLogForm {
        MonomialLogForm {
            field,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// c·x^a ∧_{j ∈ wedge} (basis element j), wedge taken in the given order.
    pub fn monomial(c: Scalar, exponent: Vec<i64>, wedge: &[usize]) -> MonomialLogForm {
        let field = c.field();
        let n = exponent.len();
        let mut mask = 0u32;
        let mut neg = false;
        for &j in wedge.iter().rev() {
            match insert_sign(j, mask) {
                None => return MonomialLogForm::zero(field, n),
                Some(s) => {
                    neg ^= s;
                    mask |= 1 << j;
                }
            }
        }
        let mut f = MonomialLogForm::zero(field, n);
        f.add_term(exponent, mask, if neg { -c } else { c });
        f
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// (exponent, wedge mask, coefficient) in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, u32, &Scalar)> {
        self.terms.iter().map(|((a, j), c)| (a, *j, c))
    }

    pub fn coefficient(&self, exponent: &[i64], mask: u32) -> Scalar {
        self.terms
            .get(&(exponent.to_vec(), mask))
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub(crate) fn add_term(&mut self, exponent: Vec<i64>, mask: u32, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let key = (exponent, mask);
        let sum = match self.terms.get(&key) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn add(&self, other: &MonomialLogForm) -> MonomialLogForm {
        let mut out = self.clone();
        for ((a, j), c) in &other.terms {
            out.add_term(a.clone(), *j, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> MonomialLogForm {
        let mut out = MonomialLogForm::zero(self.field, self.n);
        for ((a, j), c) in &self.terms {
            out.add_term(a.clone(), *j, c * s);
        }
        out
    }

    pub fn sub(&self, other: &MonomialLogForm) -> MonomialLogForm {
        self.add(&other.scale(&-self.field.one()))
    }

    /// Multidegree of each term: exponent plus one for every dz_k.
    pub fn multidegrees(&self, chart: &ChartData) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = self
            .terms
            .keys()
            .map(|(a, j)| a.iter().zip(z_part(chart, *j)).map(|(x, z)| x + z).collect())
            .collect();
        out.dedup();
        out
    }

    /// Form degrees present.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|(_, j)| j.count_ones() as usize).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

impl fmt::Display for MonomialLogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((a, j), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (i, x) in a.iter().enumerate() {
                if *x != 0 {
                    write!(f, "·t{}^{}", i + 1, x)?;
                }
            }
            let idx: Vec<String> = (0..32)
                .filter(|i| j & (1 << i) != 0)
                .map(|i| format!("e{}", i + 1))
                .collect();
            if !idx.is_empty() {
                write!(f, "·{}", idx.join("∧"))?;
            }
        }
        Ok(())
    }
}

/// u·d + v·df∧ for f = x^{-e}.
pub fn nabla(chart: &ChartData, form: &MonomialLogForm, u: &Scalar, v: &Scalar) -> MonomialLogForm {
    let field = form.field;
    let n = chart.n();
    let shift = chart.shift();
    let mut out = MonomialLogForm::zero(field, n);
    for ((a, mask), c) in &form.terms {
        let w: Vec<i64> = a.iter().zip(z_part(chart, *mask)).map(|(x, z)| x + z).collect();
        for i in 0..n {
            let Some(neg) = insert_sign(i, *mask) else { continue };
            let new_mask = mask | (1 << i);
            let zp = z_part(chart, new_mask);
            let sign = if neg { -field.one() } else { field.one() };
            if w[i] != 0 && !u.is_zero() {
                let exp: Vec<i64> = w.iter().zip(&zp).map(|(x, z)| x - z).collect();
                out.add_term(exp, new_mask, &(&(c * u) * &field.int(w[i])) * &sign);
            }
            if chart.is_x(i) && !v.is_zero() {
                let exp: Vec<i64> = w.iter().zip(&shift).zip(&zp).map(|((x, s), z)| x - s - z).collect();
                out.add_term(exp, new_mask, &(&(c * v) * &field.int(-shift[i])) * &sign);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_binomially() {
        assert_eq!(subsets(0b1011, 2), vec![0b0011, 0b1001, 0b1010]);
        assert_eq!(subsets(0b111, 0), vec![0]);
        assert!(subsets(0b1, 2).is_empty());
        assert_eq!(subsets(0b11111, 3).len(), 10);
    }

    #[test]
    fn wedge_order_sign() {
        let q = Field::Rational;
        let a = MonomialLogForm::monomial(q.one(), vec![0, 0], &[1, 0]);
        let b = MonomialLogForm::monomial(q.one(), vec![0, 0], &[0, 1]);
        assert_eq!(a, b.scale(&q.int(-1)));
        assert!(MonomialLogForm::monomial(q.one(), vec![0, 0], &[1, 1]).is_zero());
    }

    #[test]
    fn dz_exponent_convention() {
        // d(z^2) = 2 z dz, one coordinate z
        let q = Field::Rational;
        let chart = ChartData::new(0, 0, 1, vec![]).unwrap();
        let f = MonomialLogForm::monomial(q.one(), vec![2], &[]);
        let df = nabla(&chart, &f, &q.one(), &q.zero());
        assert_eq!(df, MonomialLogForm::monomial(q.int(2), vec![1], &[0]));
        assert_eq!(df.multidegrees(&chart), vec![vec![2]]);
    }
}
