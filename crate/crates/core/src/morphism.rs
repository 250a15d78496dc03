//! Ring automorphisms and anti-automorphisms of the algebra.
//!
//! Over a quaternion algebra every automorphism fixing the centre is inner, so
//! an automorphism is stored as its conjugating element `q` (acting as
//! `x -> q^-1 x q`) and an anti-automorphism as conjugation followed by an
//! inner automorphism (`x -> q^-1 conj(x) q`). `q` is only defined up to a
//! central factor; it is kept scaled so its first nonzero coordinate is 1.

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismKind {
    Automorphism,
    AntiAutomorphism,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Morphism {
    kind: MorphismKind,
    q: Scalar,
}

#[derive(Deserialize)]
struct MorphismRepr {
    kind: MorphismKind,
    q: Scalar,
}

impl<'de> Deserialize<'de> for Morphism {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = MorphismRepr::deserialize(de)?;
        Morphism::new(r.kind, r.q).map_err(serde::de::Error::custom)
    }
}

fn normalize_q(q: Scalar) -> Result<Scalar> {
    let lead = q.leading_index().ok_or(Error::DivisionByZero)?;
    let inv = q.0[lead].recip();
    Ok(q.scale(&inv))
}

impl Morphism {
    pub fn new(kind: MorphismKind, q: Scalar) -> Result<Self> {
        Ok(Morphism {
            kind,
            q: normalize_q(q)?,
        })
    }

    pub fn identity() -> Self {
        Morphism {
            kind: MorphismKind::Automorphism,
            q: Scalar::one(),
        }
    }

    /// Quaternion conjugation.
    pub fn conjugation() -> Self {
        Morphism {
            kind: MorphismKind::AntiAutomorphism,
            q: Scalar::one(),
        }
    }

    pub fn inner(q: Scalar) -> Result<Self> {
        Self::new(MorphismKind::Automorphism, q)
    }

    pub fn anti(q: Scalar) -> Result<Self> {
        Self::new(MorphismKind::AntiAutomorphism, q)
    }

    pub fn kind(&self) -> MorphismKind {
        self.kind
    }

    pub fn q(&self) -> &Scalar {
        &self.q
    }

    pub fn is_anti(&self) -> bool {
        self.kind == MorphismKind::AntiAutomorphism
    }

    /// True when the map is the identity of the given algebra.
    pub fn is_identity(&self, alg: &Algebra) -> bool {
        if alg.is_commutative() {
            return true;
        }
        self.kind == MorphismKind::Automorphism && self.q.is_central()
    }

    pub fn apply(&self, alg: &Algebra, x: &Scalar) -> Scalar {
        if alg.is_commutative() {
            return x.clone();
        }
        let inner = match self.kind {
            MorphismKind::Automorphism => x.clone(),
            MorphismKind::AntiAutomorphism => x.conj(),
        };
        if self.q.is_central() {
            return inner;
        }
        alg.conjugate_by(&self.q, &inner)
    }

    pub fn inverse(&self) -> Self {
        // both inverses conjugate by q^-1, a central multiple of conj(q)
        Morphism::new(self.kind, self.q.conj()).expect("nonzero")
    }

    /// The morphism `x -> outer(inner(x))`.
    pub fn compose(alg: &Algebra, outer: &Morphism, inner: &Morphism) -> Morphism {
        // Every combination conjugates by q p up to a central factor, e.g.
        // p^-1 conj(q^-1 x q) p = (conj(q)^-1 p)^-1 conj(x) (conj(q)^-1 p) with conj(q)^-1 ~ q.
        let kind = if outer.is_anti() == inner.is_anti() {
            MorphismKind::Automorphism
        } else {
            MorphismKind::AntiAutomorphism
        };
        let r = alg.mul(&inner.q, &outer.q);
        Morphism::new(kind, r).expect("product of nonzero elements is nonzero")
    }
}
