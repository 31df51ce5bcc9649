//! JSON documents for complexes, filtrations and pages.
//!
//! Rationals travel as `[numerator, denominator]`; each integer is a JSON
//! number when it fits in i64 and a decimal string otherwise.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactalg::{Field, Matrix, Scalar, Vector};

use super::complex::CochainComplex;
use super::filtered::{FilteredCochainComplex, Witness};
use super::pages::SpectralPage;
use super::FiltError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPair {
    pub num: BigInt,
    pub den: BigInt,
}

impl RatPair {
    pub fn from_scalar(s: &Scalar) -> RatPair {
        let (num, den) = s.as_ratio();
        RatPair { num, den }
    }

    pub fn from_rational(q: &BigRational) -> RatPair {
        RatPair {
            num: q.numer().clone(),
            den: q.denom().clone(),
        }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        (self.den != BigInt::from(0)).then(|| BigRational::new(self.num.clone(), self.den.clone()))
    }

    pub fn to_scalar(&self, field: Field) -> Option<Scalar> {
        field.from_rational(&self.to_rational()?)
    }

    pub fn integer(n: i64) -> RatPair {
        RatPair {
            num: BigInt::from(n),
            den: BigInt::one(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

fn repr(n: &BigInt) -> IntRepr {
    match n.to_i64() {
        Some(v) => IntRepr::Small(v),
        None => IntRepr::Big(n.to_string()),
    }
}

fn parse<E: serde::de::Error>(r: IntRepr) -> Result<BigInt, E> {
    match r {
        IntRepr::Small(v) => Ok(BigInt::from(v)),
        IntRepr::Big(s) => BigInt::from_str(&s).map_err(E::custom),
    }
}

impl Serialize for RatPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (repr(&self.num), repr(&self.den)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (n, m) = <(IntRepr, IntRepr)>::deserialize(d)?;
        let num = parse::<D::Error>(n)?;
        let den = parse::<D::Error>(m)?;
        if den == BigInt::from(0) {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(RatPair { num, den })
    }
}

/// "Q" or a prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldDoc {
    Name(String),
    Prime(u64),
}

impl FieldDoc {
    pub fn of(field: Field) -> FieldDoc {
        match field {
            Field::Rational => FieldDoc::Name("Q".into()),
            Field::Prime(p) => FieldDoc::Prime(p),
        }
    }

    pub fn field(&self) -> Result<Field, FiltError> {
        match self {
            FieldDoc::Name(n) if n == "Q" => Ok(Field::Rational),
            FieldDoc::Name(n) => Err(FiltError::Document(format!("unknown field {n}"))),
            FieldDoc::Prime(p) => Field::prime(*p).map_err(|e| FiltError::Document(e.to_string())),
        }
    }
}

pub type DenseDoc = Vec<Vec<RatPair>>;

pub fn matrix_doc(m: &Matrix) -> DenseDoc {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(RatPair::from_scalar).collect())
        .collect()
}

pub fn vector_doc(v: &Vector) -> Vec<RatPair> {
    v.iter().map(RatPair::from_scalar).collect()
}

fn matrix_from_doc(field: Field, rows: usize, cols: usize, doc: &DenseDoc) -> Result<Matrix, FiltError> {
    if doc.len() != rows || doc.iter().any(|r| r.len() != cols) {
        return Err(FiltError::Document(format!("expected a {rows}x{cols} matrix")));
    }
    let rows: Vec<Vector> = doc
        .iter()
        .map(|r| r.iter().map(|x| scalar_from_doc(field, x)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    Ok(Matrix::from_rows(field, cols, &rows))
}

fn scalar_from_doc(field: Field, x: &RatPair) -> Result<Scalar, FiltError> {
    x.to_scalar(field)
        .ok_or_else(|| FiltError::Document("denominator vanishes in the field".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub field: FieldDoc,
    /// Inclusive degree range [a, b].
    pub degrees: [i32; 2],
    pub dims: Vec<usize>,
    /// Dense matrix of d leaving each degree but the last.
    pub differentials: Vec<DenseDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub lambda: RatPair,
    /// Spanning vectors per degree.
    pub bases: Vec<Vec<Vec<RatPair>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredDoc {
    pub complex: ComplexDoc,
    pub filtration: Vec<StepDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageEntryDoc {
    pub p: i32,
    pub q: i32,
    pub lambda: RatPair,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct D1Doc {
    pub p: i32,
    pub degree: i32,
    pub matrix: DenseDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDoc {
    pub r: usize,
    pub entries: Vec<PageEntryDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d1: Option<Vec<D1Doc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub lambda: RatPair,
    pub degree: i32,
    pub class: Vec<RatPair>,
}

impl From<&Witness> for WitnessDoc {
    fn from(w: &Witness) -> Self {
        WitnessDoc {
            lambda: RatPair::from_rational(&w.lambda),
            degree: w.degree,
            class: vector_doc(&w.class),
        }
    }
}

impl From<&CochainComplex> for ComplexDoc {
    fn from(c: &CochainComplex) -> Self {
        ComplexDoc {
            field: FieldDoc::of(c.field()),
            degrees: [c.start(), c.end()],
            dims: c.dims().to_vec(),
            differentials: c.differentials().iter().map(matrix_doc).collect(),
        }
    }
}

impl ComplexDoc {
    pub fn build(&self) -> Result<CochainComplex, FiltError> {
        let field = self.field.field()?;
        let [a, b] = self.degrees;
        if b < a || (b - a + 1) as usize != self.dims.len() {
            return Err(FiltError::Document("degree range does not match dims".into()));
        }
        if self.differentials.len() != self.dims.len() - 1 {
            return Err(FiltError::DifferentialCount {
                degrees: self.dims.len(),
                maps: self.differentials.len(),
            });
        }
        let diffs = self
            .differentials
            .iter()
            .enumerate()
            .map(|(i, d)| matrix_from_doc(field, self.dims[i + 1], self.dims[i], d))
            .collect::<Result<Vec<_>, _>>()?;
        CochainComplex::new(field, a, self.dims.clone(), diffs)
    }
}

impl From<&FilteredCochainComplex> for FilteredDoc {
    fn from(f: &FilteredCochainComplex) -> Self {
        FilteredDoc {
            complex: ComplexDoc::from(f.base()),
            filtration: f
                .lambdas()
                .iter()
                .zip(f.step_bases())
                .map(|(l, bases)| StepDoc {
                    lambda: RatPair::from_rational(l),
                    bases: bases.iter().map(|vs| vs.iter().map(vector_doc).collect()).collect(),
                })
                .collect(),
        }
    }
}

impl FilteredDoc {
    pub fn build(&self) -> Result<FilteredCochainComplex, FiltError> {
        let base = self.complex.build()?;
        let field = base.field();
        let steps = self
            .filtration
            .iter()
            .map(|s| {
                let lambda = s
                    .lambda
                    .to_rational()
                    .ok_or_else(|| FiltError::Document("zero denominator".into()))?;
                let gens = s
                    .bases
                    .iter()
                    .map(|vs| {
                        vs.iter()
                            .map(|v| {
                                v.iter()
                                    .map(|x| scalar_from_doc(field, x))
                                    .collect::<Result<Vector, _>>()
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((lambda, gens))
            })
            .collect::<Result<Vec<_>, FiltError>>()?;
        FilteredCochainComplex::new(base, steps)
    }
}

impl From<&SpectralPage> for PageDoc {
    fn from(p: &SpectralPage) -> Self {
        PageDoc {
            r: p.r,
            entries: p
                .entries
                .iter()
                .map(|e| PageEntryDoc {
                    p: e.p,
                    q: e.q,
                    lambda: RatPair::from_rational(&e.lambda),
                    dim: e.dim,
                })
                .collect(),
            d1: p.d1.as_ref().map(|blocks| {
                blocks
                    .iter()
                    .map(|b| D1Doc {
                        p: b.p,
                        degree: b.degree,
                        matrix: matrix_doc(&b.matrix),
                    })
                    .collect()
            }),
        }
    }
}
