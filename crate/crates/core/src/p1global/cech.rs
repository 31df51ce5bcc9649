use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::exactalg::{unit, Field, Matrix, Poly, Scalar, Vector};
use crate::filtcx::{CochainComplex, FilteredCochainComplex};

use super::rational::{rational_poly, Laurent, RatFunc};
use super::{P1Error, P1Problem, Point};

/// Lower bounds on the order of the coefficient function g at the finite
/// special points and at ∞. For forms g·dz the ∞ bound already includes the
/// double pole of dz.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineSheaf {
    pub fin: Vec<i64>,
    pub inf: i64,
}

impl LineSheaf {
    /// d with L ≅ O(d).
    pub fn degree(&self) -> i64 {
        -self.fin.iter().sum::<i64>() - self.inf
    }

    fn contains(&self, other: &LineSheaf) -> bool {
        self.inf <= other.inf && self.fin.iter().zip(&other.fin).all(|(a, b)| a <= b)
    }
}

/// Special points of f over the working field, in the coordinate t = z − c.
#[derive(Clone, Debug)]
pub(crate) struct Geometry {
    pub field: Field,
    /// Finite points of D, shifted by −c.
    pub points: Vec<Scalar>,
    /// Pole order at each finite point; 0 on H.
    pub pole_e: Vec<u32>,
    /// Pole order at ∞ when ∞ ∈ D (0 when ∞ ∈ H).
    pub inf_e: Option<u32>,
    pub center: i64,
    /// df/dz as a function of t.
    pub df: RatFunc,
}

fn floor_mul(q: &BigRational, e: u32) -> i64 {
    (q * BigRational::from_integer(BigInt::from(e)))
        .floor()
        .to_integer()
        .to_i64()
        .expect("twist fits in i64")
}

impl Geometry {
    pub fn new(problem: &P1Problem, field: Field, center: Option<i64>) -> Result<Geometry, P1Error> {
        problem.validate()?;
        let mut finite = Vec::new();
        let mut pole_e = Vec::new();
        let mut inf_e = None;
        let all = problem
            .poles
            .iter()
            .map(|(p, e)| (p, *e))
            .chain(problem.horizontal.iter().map(|p| (p, 0)));
        for (p, e) in all {
            match p {
                Point::Infinity => inf_e = Some(e),
                Point::Finite(a) => {
                    let s = field
                        .from_rational(a)
                        .ok_or_else(|| P1Error::FieldReduction(format!("point {a} has no image in {field:?}")))?;
                    finite.push(s);
                    pole_e.push(e);
                }
            }
        }
        for i in 0..finite.len() {
            for j in 0..i {
                if finite[i] == finite[j] {
                    return Err(P1Error::FieldReduction(format!(
                        "special points collide over {field:?}"
                    )));
                }
            }
        }
        let center = match center {
            Some(c) => c,
            None => (0..).find(|&c| !finite.contains(&field.int(c))).unwrap(),
        };
        let cs = field.int(center);
        if finite.contains(&cs) {
            return Err(P1Error::InvalidProblem(format!(
                "chart center {center} is a special point"
            )));
        }
        let num = rational_poly(field, &problem.f_num)?;
        let den = rational_poly(field, &problem.f_den)?;
        if den.is_zero() {
            return Err(P1Error::FieldReduction(format!("denominator vanishes over {field:?}")));
        }
        let total: u32 = pole_e.iter().sum::<u32>() + inf_e.unwrap_or(0);
        let dn = num.degree().unwrap_or(0);
        let dd = den.degree().unwrap_or(0);
        if total as usize != dn.max(dd) {
            return Err(P1Error::FieldReduction(format!(
                "f changes pole structure over {field:?}"
            )));
        }
        let df = RatFunc::new(num, den).shift(&cs).derivative();
        Ok(Geometry {
            field,
            points: finite.iter().map(|a| a - &cs).collect(),
            pole_e,
            inf_e,
            center,
            df,
        })
    }

    /// A sheaf with order bound `pole(e)` at poles and `h` at horizontal points.
    pub fn sheaf(&self, form: bool, pole: impl Fn(u32) -> i64, h: i64) -> LineSheaf {
        let at = |e: u32| if e > 0 { pole(e) } else { h };
        LineSheaf {
            fin: self.pole_e.iter().map(|&e| at(e)).collect(),
            inf: self.inf_e.map_or(0, at) + if form { 2 } else { 0 },
        }
    }

    /// Ω_f^0([αP]) = O(−P + [αP]).
    pub fn kontsevich0(&self, alpha: &BigRational) -> LineSheaf {
        self.sheaf(false, |e| e as i64 - floor_mul(alpha, e), 0)
    }

    /// Ω_f^1([αP]) = Ω¹(log D)([αP]).
    pub fn kontsevich1(&self, alpha: &BigRational) -> LineSheaf {
        self.sheaf(true, |e| -1 - floor_mul(alpha, e), -1)
    }

    /// O([μP]), or None when μ < 0.
    pub fn twisted_o(&self, mu: &BigRational) -> Option<LineSheaf> {
        (*mu >= BigRational::from_integer(0.into())).then(|| self.sheaf(false, |e| -floor_mul(mu, e), 0))
    }

    /// Ω¹(log D)([μP]), or None when μ < 0.
    pub fn twisted_log1(&self, mu: &BigRational) -> Option<LineSheaf> {
        (*mu >= BigRational::from_integer(0.into())).then(|| self.sheaf(true, |e| -1 - floor_mul(mu, e), -1))
    }

    /// Π (t − a)^{k_a}
    fn product(&self, exps: impl Iterator<Item = i64>) -> RatFunc {
        self.points
            .iter()
            .zip(exps)
            .fold(RatFunc::constant(self.field.one()), |acc, (a, k)| {
                acc.mul(&RatFunc::linear_power(self.field, a, k))
            })
    }
}

/// Laurent ranges of the truncated pieces. Degree-0 pieces: U0 ↔ [0, hi0],
/// U1 ↔ [lo0, m0], U01 ↔ [lo0, hi0]; likewise for degree 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ranges {
    pub lo0: i64,
    pub hi0: i64,
    pub m0: i64,
    pub lo1: i64,
    pub hi1: i64,
    pub m1: i64,
}

fn len(lo: i64, hi: i64) -> usize {
    (hi - lo + 1).max(0) as usize
}

impl Ranges {
    fn t0(&self) -> usize {
        len(0, self.hi0) + len(self.lo0, self.m0)
    }

    fn t1(&self) -> usize {
        len(self.lo0, self.hi0) + len(0, self.hi1) + len(self.lo1, self.m1)
    }

    fn t2(&self) -> usize {
        len(self.lo1, self.hi1)
    }

    fn a0(&self, i: i64) -> usize {
        i as usize
    }

    fn b0(&self, i: i64) -> usize {
        len(0, self.hi0) + (i - self.lo0) as usize
    }

    fn c0(&self, i: i64) -> usize {
        (i - self.lo0) as usize
    }

    fn a1(&self, i: i64) -> usize {
        len(self.lo0, self.hi0) + i as usize
    }

    fn b1(&self, i: i64) -> usize {
        len(self.lo0, self.hi0) + len(0, self.hi1) + (i - self.lo1) as usize
    }

    fn c1(&self, i: i64) -> usize {
        (i - self.lo1) as usize
    }
}

/// Two-term complex L0 → L1 of rank-one sheaves with differential u·d + v·df,
/// realized on the cover {A¹, P¹ ∖ {c}} and truncated at Laurent degree N.
#[derive(Clone, Debug)]
pub struct CechModel {
    pub(crate) geom: Geometry,
    pub l0: LineSheaf,
    pub l1: LineSheaf,
    pub n: i64,
    pub ranges: Ranges,
    /// ∇(h0·t^i)/h1 = u·(i·m1·t^{i−1} + m2·t^i) + v·m3·t^i
    m1: Laurent,
    m2: Laurent,
    m3: Laurent,
}

impl CechModel {
    pub(crate) fn new(geom: Geometry, l0: LineSheaf, l1: LineSheaf, n: i64) -> Result<CechModel, P1Error> {
        let ratio = geom.product(l0.fin.iter().zip(&l1.fin).map(|(a, b)| a - b));
        let field = geom.field;
        let log_h0 = geom
            .points
            .iter()
            .zip(&l0.fin)
            .fold(RatFunc::constant(field.zero()), |acc, (a, &k)| {
                acc.add(&RatFunc::linear_power(field, a, -1).scale(&field.int(k)))
            });
        let bad = |what: &str| P1Error::Internal(format!("{what} is not a Laurent polynomial in t"));
        let m1 = ratio.to_laurent().ok_or_else(|| bad("h0/h1"))?;
        let m2 = ratio.mul(&log_h0).to_laurent().ok_or_else(|| bad("h0'/h1"))?;
        let m3 = ratio.mul(&geom.df).to_laurent().ok_or_else(|| bad("h0·f'/h1"))?;
        let supports = [m1.shift(-1), m2.clone(), m3.clone()];
        let lo = supports
            .iter()
            .filter_map(Laurent::min_degree)
            .min()
            .unwrap_or(0)
            .min(0);
        let hi = supports
            .iter()
            .filter_map(Laurent::max_degree)
            .max()
            .unwrap_or(0)
            .max(0);
        let ranges = Ranges {
            lo0: -n,
            hi0: n,
            m0: l0.degree(),
            lo1: -n + lo,
            hi1: n + hi,
            m1: l1.degree(),
        };
        let r = &ranges;
        if r.m0 > r.hi0 || r.m0 < r.lo0 - 1 || r.m1 > r.hi1 || r.m1 < r.lo1 - 1 {
            return Err(P1Error::TruncationTooSmall(n));
        }
        Ok(CechModel {
            geom,
            l0,
            l1,
            n,
            ranges,
            m1,
            m2,
            m3,
        })
    }

    pub fn field(&self) -> Field {
        self.geom.field
    }

    pub fn center(&self) -> i64 {
        self.geom.center
    }

    fn nabla(&self, i: i64, u: &Scalar, v: &Scalar) -> Laurent {
        let field = self.field();
        let mut out = self.m2.scale(u).add(&self.m3.scale(v)).shift(i);
        if i != 0 {
            out = out.add(&self.m1.scale(&(u * &field.int(i))).shift(i - 1));
        }
        out
    }

    fn place(
        &self,
        trip: &mut Vec<(usize, usize, Scalar)>,
        col: usize,
        l: &Laurent,
        lo: i64,
        hi: i64,
        row: impl Fn(i64) -> usize,
        sign: bool,
    ) -> Result<(), P1Error> {
        for (k, c) in l.terms() {
            if k < lo || k > hi {
                return Err(P1Error::Internal(format!(
                    "differential leaves a chart: degree {k} outside [{lo}, {hi}]"
                )));
            }
            trip.push((row(k), col, if sign { -c.clone() } else { c.clone() }));
        }
        Ok(())
    }

    /// Total complex T⁰ → T¹ → T² of the Čech double complex.
    pub fn total_complex(&self, u: &Scalar, v: &Scalar) -> Result<CochainComplex, P1Error> {
        let field = self.field();
        let r = self.ranges;
        let one = Laurent::monomial(field.one(), 0);
        let mut t01 = Vec::new();
        for i in 0..=r.hi0 {
            let col = r.a0(i);
            self.place(&mut t01, col, &one.shift(i), r.lo0, r.hi0, |k| r.c0(k), true)?;
            self.place(&mut t01, col, &self.nabla(i, u, v), 0, r.hi1, |k| r.a1(k), false)?;
        }
        for i in r.lo0..=r.m0 {
            let col = r.b0(i);
            self.place(&mut t01, col, &one.shift(i), r.lo0, r.hi0, |k| r.c0(k), false)?;
            self.place(&mut t01, col, &self.nabla(i, u, v), r.lo1, r.m1, |k| r.b1(k), false)?;
        }
        let mut t12 = Vec::new();
        for i in r.lo0..=r.hi0 {
            self.place(&mut t12, r.c0(i), &self.nabla(i, u, v), r.lo1, r.hi1, |k| r.c1(k), true)?;
        }
        for i in 0..=r.hi1 {
            t12.push((r.c1(i), r.a1(i), -field.one()));
        }
        for i in r.lo1..=r.m1 {
            t12.push((r.c1(i), r.b1(i), field.one()));
        }
        let d0 = Matrix::from_triplets(field, r.t1(), r.t0(), t01);
        let d1 = Matrix::from_triplets(field, r.t2(), r.t1(), t12);
        CochainComplex::new(field, 0, vec![r.t0(), r.t1(), r.t2()], vec![d0, d1])
            .map_err(|e| P1Error::Internal(e.to_string()))
    }

    /// The stupid filtration: σ⁰ = everything, σ¹ = the Čech pieces of L1.
    pub fn sigma_filtered(&self, u: &Scalar, v: &Scalar) -> Result<FilteredCochainComplex, P1Error> {
        let field = self.field();
        let base = self.total_complex(u, v)?;
        let r = self.ranges;
        let all = |n: usize| (0..n).map(|i| unit(field, n, i)).collect::<Vec<_>>();
        let mut s1 = Vec::new();
        for i in 0..=r.hi1 {
            s1.push(unit(field, r.t1(), r.a1(i)));
        }
        for i in r.lo1..=r.m1 {
            s1.push(unit(field, r.t1(), r.b1(i)));
        }
        let steps = vec![
            (
                BigRational::from_integer(0.into()),
                vec![all(r.t0()), all(r.t1()), all(r.t2())],
            ),
            (BigRational::from_integer(1.into()), vec![Vec::new(), s1, all(r.t2())]),
        ];
        FilteredCochainComplex::new(base, steps).map_err(|e| P1Error::Internal(e.to_string()))
    }

    /// Q = h_sub / h_ref as a polynomial in t.
    fn quotient_poly(&self, reference: &LineSheaf, sub: &LineSheaf) -> Result<Poly, P1Error> {
        if !reference.contains(sub) {
            return Err(P1Error::Internal(
                "step sheaf is not contained in the reference sheaf".into(),
            ));
        }
        let q = self
            .geom
            .product(sub.fin.iter().zip(&reference.fin).map(|(a, b)| a - b));
        Ok(q.num.div_rem(&q.den).0)
    }

    /// Spanning vectors of (S0 → S1) ∩ truncation inside the model's total
    /// complex, for subsheaves S0 ⊂ L0 and S1 ⊂ L1 (None is the zero sheaf).
    pub fn subcomplex(&self, s0: Option<&LineSheaf>, s1: Option<&LineSheaf>) -> Result<Vec<Vec<Vector>>, P1Error> {
        let field = self.field();
        let r = self.ranges;
        let mut out = vec![Vec::new(), Vec::new(), Vec::new()];
        let embed = |n: usize, l: &Laurent, row: &dyn Fn(i64) -> usize| -> Vector {
            let mut v = vec![field.zero(); n];
            for (k, c) in l.terms() {
                v[row(k)] = c.clone();
            }
            v
        };
        let mut piece = |deg: usize,
                         reference: &LineSheaf,
                         sub: &LineSheaf,
                         lo: i64,
                         hi: i64,
                         m: i64,
                         rows: [&dyn Fn(i64) -> usize; 3]|
         -> Result<(), P1Error> {
            let q = self.quotient_poly(reference, sub)?;
            let dq = q.degree().unwrap_or(0) as i64;
            let ms = sub.degree();
            if ms + dq > m || ms < lo - 1 {
                return Err(P1Error::TruncationTooSmall(self.n));
            }
            let (nc, nt) = if deg == 0 { (r.t0(), r.t1()) } else { (r.t1(), r.t2()) };
            for j in 0..=(hi - dq) {
                out[deg].push(embed(nc, &Laurent::from_poly(&q, j), rows[0]));
            }
            for j in lo..=ms {
                out[deg].push(embed(nc, &Laurent::from_poly(&q, j), rows[1]));
            }
            for j in lo..=(hi - dq) {
                out[deg + 1].push(embed(nt, &Laurent::from_poly(&q, j), rows[2]));
            }
            Ok(())
        };
        if let Some(s) = s0 {
            piece(
                0,
                &self.l0,
                s,
                r.lo0,
                r.hi0,
                r.m0,
                [&|k| r.a0(k), &|k| r.b0(k), &|k| r.c0(k)],
            )?;
        }
        if let Some(s) = s1 {
            piece(
                1,
                &self.l1,
                s,
                r.lo1,
                r.hi1,
                r.m1,
                [&|k| r.a1(k), &|k| r.b1(k), &|k| r.c1(k)],
            )?;
        }
        Ok(out)
    }
}

/// Čech complex L(U0) ⊕ L(U1) → L(U01) of one line bundle O(d), truncated at N.
pub(crate) fn line_bundle_complex(field: Field, d: i64, n: i64) -> CochainComplex {
    let (a, b, c) = (len(0, n), len(-n, d), len(-n, n));
    let mut trip = Vec::new();
    for i in 0..=n {
        trip.push(((i + n) as usize, i as usize, -field.one()));
    }
    for i in -n..=d {
        trip.push(((i + n) as usize, a + (i + n) as usize, field.one()));
    }
    let m = Matrix::from_triplets(field, c, a + b, trip);
    CochainComplex::new(field, 0, vec![a + b, c], vec![m]).expect("two-term complex")
}
