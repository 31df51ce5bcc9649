use serde::Serialize;

use crate::exactalg::{Field, Matrix, Poly, Scalar};

use super::ops::{P1Options, StabilizationCertificate};
use super::rational::{rational_poly, root_multiplicity, RatFunc};
use super::{P1Error, P1Problem, Point};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// dim H⁰ and dim H¹ of Γ(U, O) → Γ(U, Ω¹).
    pub dims: Vec<usize>,
    pub certificate: StabilizationCertificate,
}

/// U in a coordinate w with ∞ ∈ D.
struct AffineU {
    field: Field,
    /// Finite points of D and their pole orders (0 on H).
    points: Vec<(Scalar, u32)>,
    inf_e: u32,
    df: RatFunc,
}

/// w^d · p(a + 1/w) for d ≥ deg p.
fn invert_poly(p: &Poly, a: &Scalar, d: usize) -> Poly {
    let field = p.field();
    let lin = Poly::new(field, vec![field.one(), a.clone()]);
    let mut out = Poly::zero(field);
    let mut pw = Poly::one(field);
    for (i, c) in p.coeffs().iter().enumerate() {
        out = out.add(&pw.mul(&Poly::monomial(c.clone(), d - i)));
        pw = pw.mul(&lin);
    }
    out
}

impl AffineU {
    fn new(problem: &P1Problem, field: Field) -> Result<AffineU, P1Error> {
        problem.validate()?;
        let embed = |a: &num_rational::BigRational| {
            field
                .from_rational(a)
                .ok_or_else(|| P1Error::FieldReduction(format!("point {a} has no image in {field:?}")))
        };
        let mut special: Vec<(Point, u32)> = problem.poles.clone();
        special.extend(problem.horizontal.iter().map(|p| (p.clone(), 0)));
        let mut num = rational_poly(field, &problem.f_num)?;
        let mut den = rational_poly(field, &problem.f_den)?;
        let mut points = Vec::new();
        let inf_e;
        if let Some((_, e)) = special.iter().find(|(p, _)| p.is_infinite()) {
            inf_e = *e;
            for (p, e) in &special {
                if let Point::Finite(a) = p {
                    points.push((embed(a)?, *e));
                }
            }
        } else {
            // w = 1/(z − a0) moves a0 to ∞
            let (Point::Finite(a0), e0) = &special[0] else {
                unreachable!()
            };
            let a0s = embed(a0)?;
            let d = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
            num = invert_poly(&num, &a0s, d);
            den = invert_poly(&den, &a0s, d);
            inf_e = *e0;
            for (p, e) in &special[1..] {
                if let Point::Finite(a) = p {
                    let b = (&embed(a)? - &a0s)
                        .inv()
                        .ok_or_else(|| P1Error::FieldReduction("special points collide".into()))?;
                    points.push((b, *e));
                }
            }
        }
        // the denominator must vanish exactly on the finite poles
        let mut rest = den.clone();
        for (b, e) in &points {
            let k = root_multiplicity(&rest, b);
            if k != *e {
                return Err(P1Error::FieldReduction(format!("pole order changes over {field:?}")));
            }
            let lin = Poly::new(field, vec![-b.clone(), field.one()]);
            for _ in 0..k {
                rest = rest.div_rem(&lin).0;
            }
        }
        if !rest.is_unit() {
            return Err(P1Error::FieldReduction(format!(
                "poles leave the listed points over {field:?}"
            )));
        }
        Ok(AffineU {
            field,
            points,
            inf_e,
            df: RatFunc::new(num, den).derivative(),
        })
    }

    /// Codomain ranges: polynomial part degrees [0, n + r∞], pole orders [1, n + r_b].
    fn codomain(&self, n: i64) -> (i64, Vec<i64>) {
        let r_inf = if self.inf_e > 0 { self.inf_e as i64 - 1 } else { -1 };
        let orders = self
            .points
            .iter()
            .map(|(_, e)| n + if *e > 0 { *e as i64 + 1 } else { 1 })
            .collect();
        (n + r_inf, orders)
    }

    fn dims(&self, n: i64) -> Result<Vec<usize>, P1Error> {
        let field = self.field;
        let (top, orders) = self.codomain(n);
        let mut offsets = vec![(top + 1) as usize];
        for o in &orders {
            offsets.push(offsets.last().unwrap() + *o as usize);
        }
        let rows = *offsets.last().unwrap();
        let mut domain: Vec<RatFunc> = (0..=n)
            .map(|j| RatFunc::poly(Poly::monomial(field.one(), j as usize)))
            .collect();
        for (b, _) in &self.points {
            domain.extend((1..=n).map(|j| RatFunc::linear_power(field, b, -j)));
        }
        let mut trip = Vec::new();
        for (col, g) in domain.iter().enumerate() {
            let image = RatFunc::new(g.num.clone(), g.den.clone())
                .derivative()
                .add(&self.df.mul(g));
            let (poly, _) = image.num.div_rem(&image.den);
            for (i, c) in poly.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if i as i64 > top {
                    return Err(P1Error::Internal(format!("polynomial degree {i} beyond {top}")));
                }
                trip.push((i, col, c.clone()));
            }
            for (bi, (b, _)) in self.points.iter().enumerate() {
                for (j, c) in image.principal_part(b).iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if j as i64 >= orders[bi] {
                        return Err(P1Error::Internal(format!("pole order {} beyond {}", j + 1, orders[bi])));
                    }
                    trip.push((offsets[bi] + j, col, c.clone()));
                }
            }
        }
        let m = Matrix::from_triplets(field, rows, domain.len(), trip);
        let r = m.rank();
        Ok(vec![domain.len() - r, rows - r])
    }
}

/// Cohomology of (Γ(U, O) → Γ(U, Ω¹), d + df) on the affine curve U = P¹ ∖ D,
/// computed in a partial-fraction basis.
pub fn direct_de_rham_oracle_with(problem: &P1Problem, opts: &P1Options) -> Result<OracleResult, P1Error> {
    let u = AffineU::new(problem, opts.field)?;
    let (n, n_plus) = opts.windows(problem);
    let dims_n = u.dims(n)?;
    let dims_n_plus = u.dims(n_plus)?;
    if dims_n != dims_n_plus {
        return Err(P1Error::NotStabilized {
            n,
            n_plus,
            dims_n,
            dims_n_plus,
        });
    }
    Ok(OracleResult {
        dims: dims_n.clone(),
        certificate: StabilizationCertificate {
            n,
            n_plus,
            dims_n,
            dims_n_plus,
        },
    })
}

pub fn direct_de_rham_oracle(problem: &P1Problem) -> Result<OracleResult, P1Error> {
    direct_de_rham_oracle_with(problem, &P1Options::default())
}
