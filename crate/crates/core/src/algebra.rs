//! Exact arithmetic in a definite rational quaternion algebra `(a, b | Q)`.
//!
//! Elements are written `t + x i + y j + z k` with `i^2 = a`, `j^2 = b` and
//! `k = ij = -ji`. With `a < 0` and `b < 0` the reduced norm
//! `t^2 - a x^2 - b y^2 + ab z^2` is positive definite, so every nonzero
//! element is invertible. The rationals themselves are supported as the
//! commutative special case, where only the `t` coordinate may be nonzero.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qlinalg::QMatrix;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let r = Rational::from_str(s).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if r.denom().is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(r)
}

/// Which side scalars act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Parameters of the ambient division algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct AlgebraParams {
    pub a: Rational,
    pub b: Rational,
    /// When set the algebra is Q and `a`, `b` are ignored.
    pub commutative: bool,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    commutative: bool,
}

impl TryFrom<ParamsRepr> for AlgebraParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        if r.commutative {
            return Ok(AlgebraParams::rationals());
        }
        let a = parse_rational(r.a.as_deref().unwrap_or("-1"))?;
        let b = parse_rational(r.b.as_deref().unwrap_or("-1"))?;
        let p = AlgebraParams {
            a,
            b,
            commutative: false,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<AlgebraParams> for ParamsRepr {
    fn from(p: AlgebraParams) -> Self {
        if p.commutative {
            ParamsRepr {
                a: None,
                b: None,
                commutative: true,
            }
        } else {
            ParamsRepr {
                a: Some(p.a.to_string()),
                b: Some(p.b.to_string()),
                commutative: false,
            }
        }
    }
}

impl AlgebraParams {
    pub fn hamilton() -> Self {
        AlgebraParams {
            a: rat(-1),
            b: rat(-1),
            commutative: false,
        }
    }

    pub fn rationals() -> Self {
        AlgebraParams {
            a: rat(-1),
            b: rat(-1),
            commutative: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.commutative {
            return Ok(());
        }
        if !self.a.is_negative() || !self.b.is_negative() {
            return Err(Error::InvalidAlgebra(format!(
                "a = {} and b = {} must both be negative for a definite quaternion algebra",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

impl Default for AlgebraParams {
    fn default() -> Self {
        Self::hamilton()
    }
}

/// An element `t + x i + y j + z k`, coordinates in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar(pub [Rational; 4]);

impl Scalar {
    pub fn new(t: Rational, x: Rational, y: Rational, z: Rational) -> Self {
        Scalar([t, x, y, z])
    }

    pub fn zero() -> Self {
        Scalar(std::array::from_fn(|_| Rational::zero()))
    }

    /// Integer coordinates `n` and a positive `d` with `self = n / d`.
    fn integer_form(&self) -> ([BigInt; 4], BigInt) {
        let mut d = BigInt::one();
        for c in &self.0 {
            if !c.denom().is_one() && c.denom() != &d {
                d = d.lcm(c.denom());
            }
        }
        let n = self.0.each_ref().map(|c| c.numer() * (&d / c.denom()));
        (n, d)
    }

    fn from_integer_form(n: [BigInt; 4], d: BigInt) -> Self {
        Scalar(n.map(|c| Rational::new(c, d.clone())))
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(t: Rational) -> Self {
        Scalar([t, Rational::zero(), Rational::zero(), Rational::zero()])
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    /// Basis unit: 0 → 1, 1 → i, 2 → j, 3 → k.
    pub fn unit(idx: usize) -> Self {
        let mut s = Self::zero();
        s.0[idx] = Rational::one();
        s
    }

    pub fn i() -> Self {
        Self::unit(1)
    }

    pub fn j() -> Self {
        Self::unit(2)
    }

    pub fn k() -> Self {
        Self::unit(3)
    }

    /// Integer coordinates, handy in tests and examples.
    pub fn ints(t: i64, x: i64, y: i64, z: i64) -> Self {
        Scalar([rat(t), rat(x), rat(y), rat(z)])
    }

    pub fn t(&self) -> &Rational {
        &self.0[0]
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.0[0].is_one() && self.0[1..].iter().all(Zero::is_zero)
    }

    /// The centre of every supported algebra is Q.
    pub fn is_central(&self) -> bool {
        self.0[1..].iter().all(Zero::is_zero)
    }

    pub fn conj(&self) -> Self {
        let [t, x, y, z] = &self.0;
        Scalar([t.clone(), -x, -y, -z])
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Scalar(std::array::from_fn(|c| &self.0[c] * r))
    }

    /// Index of the first nonzero coordinate.
    pub fn leading_index(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl std::ops::Add for &Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar(std::array::from_fn(|c| &self.0[c] + &rhs.0[c]))
    }
}

impl std::ops::Sub for &Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar(std::array::from_fn(|c| &self.0[c] - &rhs.0[c]))
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar(std::array::from_fn(|c| -&self.0[c]))
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;

    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;

    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const UNITS: [&str; 4] = ["", "i", "j", "k"];
        let mut first = true;
        for (c, unit) in self.0.iter().zip(UNITS) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            match (unit, mag.is_one()) {
                ("", _) => write!(f, "{mag}")?,
                (u, true) => f.write_str(u)?,
                (u, false) => write!(f, "{mag} {u}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Parses the text form, e.g. `1 - 2/3 i + k`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let bad = || Error::Parse(format!("bad scalar `{s}`"));
        let mut out = Scalar::zero();
        let mut pos = 0;
        while pos < compact.len() {
            let mut negative = false;
            if compact[pos] == '+' || compact[pos] == '-' {
                negative = compact[pos] == '-';
                pos += 1;
            } else if pos != 0 {
                return Err(bad());
            }
            let start = pos;
            while pos < compact.len() && (compact[pos].is_ascii_digit() || compact[pos] == '/') {
                pos += 1;
            }
            let number: String = compact[start..pos].iter().collect();
            let unit = match compact.get(pos) {
                Some('i') => 1,
                Some('j') => 2,
                Some('k') => 3,
                _ => 0,
            };
            if unit != 0 {
                pos += 1;
            }
            if number.is_empty() && unit == 0 {
                return Err(bad());
            }
            let mut coef = if number.is_empty() {
                Rational::one()
            } else {
                parse_rational(&number)?
            };
            if negative {
                coef = -coef;
            }
            out.0[unit] += coef;
        }
        Ok(out)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let coords: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        coords.serialize(ser)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Text(String),
    Int(i64),
    Coords(Vec<CoordRepr>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoordRepr {
    Text(String),
    Int(i64),
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ScalarRepr::deserialize(de)? {
            ScalarRepr::Text(s) => s.parse().map_err(D::Error::custom),
            ScalarRepr::Int(n) => Ok(Scalar::from_int(n)),
            ScalarRepr::Coords(cs) => {
                if cs.is_empty() || cs.len() > 4 {
                    return Err(D::Error::custom(format!(
                        "scalar needs 1 to 4 coordinates, got {}",
                        cs.len()
                    )));
                }
                let mut out = Scalar::zero();
                for (slot, c) in out.0.iter_mut().zip(cs) {
                    *slot = match c {
                        CoordRepr::Text(s) => parse_rational(&s).map_err(D::Error::custom)?,
                        CoordRepr::Int(n) => rat(n),
                    };
                }
                Ok(out)
            }
        }
    }
}

/// Operator matrix of a scalar action, written in the basis `1, i, j, k`.
///
/// Column `c` holds the coordinates of the image of the `c`-th basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralMatrix4(pub QMatrix);

impl CentralMatrix4 {
    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn apply(&self, v: &Scalar) -> Scalar {
        let out = self.0.apply(v.coords());
        Scalar(std::array::from_fn(|c| out[c].clone()))
    }
}

/// A validated division algebra: the context every computation runs in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    params: AlgebraParams,
}

impl Algebra {
    pub fn new(params: AlgebraParams) -> Result<Self> {
        params.validate()?;
        Ok(Algebra { params })
    }

    pub fn hamilton() -> Self {
        Algebra {
            params: AlgebraParams::hamilton(),
        }
    }

    pub fn quaternion(a: Rational, b: Rational) -> Result<Self> {
        Self::new(AlgebraParams {
            a,
            b,
            commutative: false,
        })
    }

    pub fn rationals() -> Self {
        Algebra {
            params: AlgebraParams::rationals(),
        }
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }

    pub fn is_commutative(&self) -> bool {
        self.params.commutative
    }

    /// Dimension of the algebra over its centre Q.
    pub fn degree(&self) -> usize {
        if self.is_commutative() {
            1
        } else {
            4
        }
    }

    /// A Q-basis of the algebra.
    pub fn basis(&self) -> Vec<Scalar> {
        (0..self.degree()).map(Scalar::unit).collect()
    }

    /// Elements generating the algebra as a ring over its centre.
    pub fn generators(&self) -> Vec<Scalar> {
        if self.is_commutative() {
            Vec::new()
        } else {
            vec![Scalar::i(), Scalar::j()]
        }
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        !self.is_commutative() || x.is_central()
    }

    pub fn check(&self, x: &Scalar) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInAlgebra(x.to_string()))
        }
    }

    /// Numerators of `p q` scaled by `den(a) den(b)`, for integer `p` and `q`.
    fn mul_numerators(&self, p: &[BigInt; 4], q: &[BigInt; 4]) -> [BigInt; 4] {
        let [t1, x1, y1, z1] = p;
        let [t2, x2, y2, z2] = q;
        let (an, ad) = (self.params.a.numer(), self.params.a.denom());
        let (bn, bd) = (self.params.b.numer(), self.params.b.denom());
        let (ca, cb, cab) = (an * bd, ad * bn, an * bn);
        let add = ad * bd;
        let t = &add * (t1 * t2) + &ca * (x1 * x2) + &cb * (y1 * y2) - &cab * (z1 * z2);
        let x = &add * (t1 * x2 + x1 * t2) + &cb * (z1 * y2 - y1 * z2);
        let y = &add * (t1 * y2 + y1 * t2) + &ca * (x1 * z2 - z1 * x2);
        let z = &add * (t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2);
        [t, x, y, z]
    }

    fn params_den(&self) -> BigInt {
        self.params.a.denom() * self.params.b.denom()
    }

    pub fn mul(&self, p: &Scalar, q: &Scalar) -> Scalar {
        let (pn, pd) = p.integer_form();
        let (qn, qd) = q.integer_form();
        let den = pd * qd * self.params_den();
        Scalar::from_integer_form(self.mul_numerators(&pn, &qn), den)
    }

    /// `q^-1 x q`, computed as `conj(q) x q / N(q)` with a single reduction.
    pub fn conjugate_by(&self, q: &Scalar, x: &Scalar) -> Scalar {
        let (qn, _) = q.integer_form();
        let (xn, xd) = x.integer_form();
        let [t, i, j, k] = &qn;
        let qc = [t.clone(), -i, -j, -k];
        let v = self.mul_numerators(&self.mul_numerators(&qc, &xn), &qn);
        let (an, ad) = (self.params.a.numer(), self.params.a.denom());
        let (bn, bd) = (self.params.b.numer(), self.params.b.denom());
        // N(qn) = norm / den(a) den(b)
        let norm = ad * bd * (t * t) - an * bd * (i * i) - ad * bn * (j * j) + an * bn * (k * k);
        let den = xd * self.params_den() * norm;
        Scalar::from_integer_form(v, den)
    }

    pub fn mul3(&self, p: &Scalar, q: &Scalar, r: &Scalar) -> Scalar {
        self.mul(&self.mul(p, q), r)
    }

    /// Reduced norm `x * conj(x)`, a nonnegative rational.
    pub fn norm(&self, x: &Scalar) -> Rational {
        let [t, i, j, k] = &x.0;
        let (a, b) = (&self.params.a, &self.params.b);
        t * t - a * (i * i) - b * (j * j) + a * b * (k * k)
    }

    pub fn inv(&self, x: &Scalar) -> Result<Scalar> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(x.conj().scale(&self.norm(x).recip()))
    }

    /// `x * y` minus `y * x`.
    pub fn commutator(&self, x: &Scalar, y: &Scalar) -> Scalar {
        &self.mul(x, y) - &self.mul(y, x)
    }

    /// Matrix of `v -> x v` (left) or `v -> v x` (right) over the centre.
    pub fn restrict_scalars(&self, x: &Scalar, side: Side) -> CentralMatrix4 {
        let cols: Vec<Vec<Rational>> = (0..4)
            .map(|c| {
                let e = Scalar::unit(c);
                let img = match side {
                    Side::Left => self.mul(x, &e),
                    Side::Right => self.mul(&e, x),
                };
                img.0.to_vec()
            })
            .collect();
        CentralMatrix4(QMatrix::from_columns(4, &cols))
    }

    /// Multiplies `v` by `c` on the given side.
    pub fn act(&self, c: &Scalar, v: &Scalar, side: Side) -> Scalar {
        match side {
            Side::Left => self.mul(c, v),
            Side::Right => self.mul(v, c),
        }
    }
}

impl Default for Algebra {
    fn default() -> Self {
        Self::hamilton()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn multiplication_table() {
        let h = Algebra::hamilton();
        assert_eq!(h.mul(&s("1+i"), &s("1+j")), s("1+i+j+k"));
        assert_eq!(h.mul(&Scalar::i(), &Scalar::j()), Scalar::k());
        assert_eq!(h.mul(&Scalar::j(), &Scalar::i()), -Scalar::k());
        let q = Algebra::quaternion(rat(-2), rat(-3)).unwrap();
        assert_eq!(q.mul(&Scalar::i(), &Scalar::i()), Scalar::from_int(-2));
        assert_eq!(q.mul(&Scalar::j(), &Scalar::j()), Scalar::from_int(-3));
        assert_eq!(q.mul(&Scalar::k(), &Scalar::k()), Scalar::from_int(-6));
    }

    #[test]
    fn inverses() {
        let h = Algebra::hamilton();
        assert_eq!(h.inv(&s("1+i+j+k")).unwrap(), s("1/4 - 1/4 i - 1/4 j - 1/4 k"));
        assert_eq!(h.inv(&Scalar::one()).unwrap(), Scalar::one());
        assert_eq!(h.inv(&Scalar::i()).unwrap(), -Scalar::i());
        assert_eq!(h.inv(&Scalar::zero()), Err(Error::DivisionByZero));
        let q = Algebra::quaternion(rat(-2), rat(-5)).unwrap();
        let x = s("3 - i + 2/7 j + 5k");
        let xi = q.inv(&x).unwrap();
        assert!(q.mul(&x, &xi).is_one());
        assert!(q.mul(&xi, &x).is_one());
    }

    #[test]
    fn centrality() {
        assert!(s("7/3").is_central());
        assert!(!s("i + j").is_central());
        assert!(Scalar::zero().is_central());
        let h = Algebra::hamilton();
        assert_eq!(h.commutator(&Scalar::i(), &s("i+j")), Scalar::ints(0, 0, 0, 2));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(Algebra::quaternion(rat(1), rat(-1)).is_err());
        assert!(Algebra::quaternion(rat(-1), rat(0)).is_err());
        let p: AlgebraParams = serde_json::from_str(r#"{"a":"-2","b":"-3/5"}"#).unwrap();
        assert_eq!(p.b, ratio(-3, 5));
        assert!(serde_json::from_str::<AlgebraParams>(r#"{"a":"2","b":"-1"}"#).is_err());
        let c: AlgebraParams = serde_json::from_str(r#"{"commutative":true}"#).unwrap();
        assert!(c.commutative);
    }

    #[test]
    fn restrict_scalars_of_i() {
        let h = Algebra::hamilton();
        let li = h.restrict_scalars(&Scalar::i(), Side::Left);
        assert_eq!(li.apply(&Scalar::one()), Scalar::i());
        assert_eq!(li.apply(&Scalar::i()), Scalar::from_int(-1));
        assert_eq!(li.apply(&Scalar::j()), Scalar::k());
        assert_eq!(li.apply(&Scalar::k()), -Scalar::j());
        for side in [Side::Left, Side::Right] {
            assert_eq!(h.restrict_scalars(&Scalar::one(), side).0, QMatrix::identity(4));
        }
    }

    #[test]
    fn text_and_structured_forms() {
        let x = s("1/2 - 3i + j - 5/7 k");
        assert_eq!(x, Scalar([ratio(1, 2), rat(-3), rat(1), ratio(-5, 7)]));
        assert_eq!(x.to_string(), "1/2 - 3 i + j - 5/7 k");
        assert_eq!(s(&x.to_string()), x);
        assert_eq!(s("-i").to_string(), "-i");
        assert_eq!(Scalar::zero().to_string(), "0");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"["1/2","-3","1","-5/7"]"#);
        assert_eq!(serde_json::from_str::<Scalar>(&json).unwrap(), x);
        assert_eq!(serde_json::from_str::<Scalar>(r#""2 + k""#).unwrap(), Scalar::ints(2, 0, 0, 1));
        assert_eq!(serde_json::from_str::<Scalar>("[3]").unwrap(), Scalar::from_int(3));
        assert!("1 + q".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
    }
}
