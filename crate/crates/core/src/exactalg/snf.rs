use super::matrix::Matrix;
use super::poly::Poly;
use super::scalar::{Field, Scalar};
use super::AlgError;

/// Matrix over k[ħ].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix {
            field,
            rows,
            cols,
            entries: vec![vec![Poly::zero(field); cols]; rows],
        }
    }

    pub fn identity(field: Field, n: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(field, n, n);
        for i in 0..n {
            m.entries[i][i] = Poly::one(field);
        }
        m
    }

    pub fn from_entries(field: Field, cols: usize, entries: Vec<Vec<Poly>>) -> PolyMatrix {
        assert!(entries.iter().all(|r| r.len() == cols));
        PolyMatrix {
            field,
            rows: entries.len(),
            cols,
            entries,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r][c]
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, AlgError> {
        if self.cols != other.rows {
            return Err(AlgError::Shape {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = PolyMatrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.entries[k][j];
                    if !b.is_zero() {
                        out.entries[i][j] = out.entries[i][j].add(&a.mul(b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Specialisation ħ = x.
    pub fn eval(&self, x: &Scalar) -> Matrix {
        Matrix::from_triplets(
            self.field,
            self.rows,
            self.cols,
            (0..self.rows)
                .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
                .filter_map(|(r, c)| {
                    let v = self.entries[r][c].eval(x);
                    (!v.is_zero()).then_some((r, c, v))
                }),
        )
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<Poly, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one(self.field));
        }
        let mut a = self.entries.clone();
        let mut prev = Poly::one(self.field);
        let mut negate = false;
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        negate = !negate;
                    }
                    None => return Ok(Poly::zero(self.field)),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero());
                    a[i][j] = q;
                }
                a[i][k] = Poly::zero(self.field);
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { d.neg() } else { d })
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.entries.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.entries.iter_mut() {
            row.swap(i, j);
        }
    }

    /// row_i += q · row_j
    fn add_row(&mut self, i: usize, j: usize, q: &Poly) {
        for c in 0..self.cols {
            let t = self.entries[j][c].mul(q);
            self.entries[i][c] = self.entries[i][c].add(&t);
        }
    }

    /// col_i += q · col_j
    fn add_col(&mut self, i: usize, j: usize, q: &Poly) {
        for r in 0..self.rows {
            let t = self.entries[r][j].mul(q);
            self.entries[r][i] = self.entries[r][i].add(&t);
        }
    }

    fn scale_row(&mut self, i: usize, s: &Scalar) {
        for c in 0..self.cols {
            self.entries[i][c] = self.entries[i][c].scale(s);
        }
    }
}

/// Smith form with certificates: `u · m · v = diagonal`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Nonzero invariant factors, monic, each dividing the next.
    pub factors: Vec<Poly>,
    pub u: PolyMatrix,
    pub v: PolyMatrix,
    pub diagonal: PolyMatrix,
}

impl SmithForm {
    /// Multiplies the certificates out and checks every claimed property.
    pub fn verify(&self, m: &PolyMatrix) -> bool {
        let Ok(prod) = self.u.mul(m).and_then(|x| x.mul(&self.v)) else {
            return false;
        };
        if prod != self.diagonal {
            return false;
        }
        for r in 0..prod.rows {
            for c in 0..prod.cols {
                let e = prod.get(r, c);
                let expected = if r == c && r < self.factors.len() {
                    &self.factors[r]
                } else {
                    if !e.is_zero() {
                        return false;
                    }
                    continue;
                };
                if e != expected {
                    return false;
                }
            }
        }
        let chain = self.factors.windows(2).all(|w| w[0].divides(&w[1]));
        let unit_det = |p: &PolyMatrix| p.det().map(|d| d.is_unit()).unwrap_or(false);
        chain && unit_det(&self.u) && unit_det(&self.v)
    }

    /// Factors of positive degree.
    pub fn torsion(&self) -> Vec<&Poly> {
        self.factors.iter().filter(|f| !f.is_unit()).collect()
    }
}

fn min_degree_entry(a: &PolyMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for r in t..a.rows {
        for c in t..a.cols {
            if let Some(d) = a.entries[r][c].degree() {
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, r, c));
                }
            }
        }
    }
    best.map(|(_, r, c)| (r, c))
}

pub fn smith_normal_form(m: &PolyMatrix) -> SmithForm {
    let field = m.field;
    let mut a = m.clone();
    let mut u = PolyMatrix::identity(field, m.rows);
    let mut v = PolyMatrix::identity(field, m.cols);
    let n = m.rows.min(m.cols);
    let mut t = 0;
    while t < n {
        let Some((r, c)) = min_degree_entry(&a, t) else {
            break;
        };
        a.swap_rows(t, r);
        u.swap_rows(t, r);
        a.swap_cols(t, c);
        v.swap_cols(t, c);
        loop {
            let pivot = a.entries[t][t].clone();
            for i in t + 1..a.rows {
                if a.entries[i][t].is_zero() {
                    continue;
                }
                let (q, _) = a.entries[i][t].div_rem(&pivot);
                let q = q.neg();
                a.add_row(i, t, &q);
                u.add_row(i, t, &q);
            }
            for j in t + 1..a.cols {
                if a.entries[t][j].is_zero() {
                    continue;
                }
                let (q, _) = a.entries[t][j].div_rem(&pivot);
                let q = q.neg();
                a.add_col(j, t, &q);
                v.add_col(j, t, &q);
            }
            // a smaller remainder left in row/column t becomes the new pivot
            let pd = pivot.degree().unwrap();
            let smaller_row = (t + 1..a.rows).find(|&i| !a.entries[i][t].is_zero());
            let smaller_col = (t + 1..a.cols).find(|&j| !a.entries[t][j].is_zero());
            if let Some(i) = smaller_row {
                debug_assert!(a.entries[i][t].degree().unwrap() < pd);
                a.swap_rows(t, i);
                u.swap_rows(t, i);
                continue;
            }
            if let Some(j) = smaller_col {
                a.swap_cols(t, j);
                v.swap_cols(t, j);
                continue;
            }
            let bad = (t + 1..a.rows)
                .flat_map(|i| (t + 1..a.cols).map(move |j| (i, j)))
                .find(|&(i, j)| !pivot.divides(&a.entries[i][j]));
            match bad {
                Some((i, _)) => {
                    let one = Poly::one(field);
                    a.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        let lead_inv = a.entries[t][t].leading().unwrap().inv().unwrap();
        a.scale_row(t, &lead_inv);
        u.scale_row(t, &lead_inv);
        t += 1;
    }
    let factors = (0..t).map(|i| a.entries[i][i].clone()).collect();
    SmithForm {
        factors,
        u,
        v,
        diagonal: a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(k: usize) -> Poly {
        Poly::monomial(Field::Rational.one(), k)
    }

    #[test]
    fn diagonal_powers() {
        let f = Field::Rational;
        let m = PolyMatrix::from_entries(f, 2, vec![vec![h(1), Poly::zero(f)], vec![Poly::zero(f), h(2)]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.factors, vec![h(1), h(2)]);
        assert!(s.verify(&m));
    }

    #[test]
    fn identity_factors() {
        let f = Field::Rational;
        let m = PolyMatrix::identity(f, 2);
        let s = smith_normal_form(&m);
        assert_eq!(s.factors, vec![h(0), h(0)]);
        assert!(s.verify(&m));
    }

    #[test]
    fn jordan_block() {
        let f = Field::Rational;
        let m = PolyMatrix::from_entries(f, 2, vec![vec![h(1), h(0)], vec![Poly::zero(f), h(1)]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.factors, vec![h(0), h(2)]);
        assert!(s.verify(&m));
    }

    #[test]
    fn coprime_entries_need_divisibility_fix() {
        let f = Field::Rational;
        // diag(h, h+1) has factors (1, h(h+1))
        let hp1 = h(1).add(&h(0));
        let m = PolyMatrix::from_entries(f, 2, vec![vec![h(1), Poly::zero(f)], vec![Poly::zero(f), hp1.clone()]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.factors, vec![h(0), h(1).mul(&hp1)]);
        assert!(s.verify(&m));
    }

    #[test]
    fn tampered_certificate_rejected() {
        let f = Field::Rational;
        let m = PolyMatrix::from_entries(f, 2, vec![vec![h(1), h(0)], vec![Poly::zero(f), h(1)]]);
        let mut s = smith_normal_form(&m);
        s.factors[1] = h(1);
        assert!(!s.verify(&m));
    }
}
