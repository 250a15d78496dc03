//! Seeded generators for random scalars, matrices, subspaces and maps.
//!
//! The generator is ChaCha8 seeded from a 64-bit seed, so a given seed yields
//! the same stream on every platform. Named sub-streams are derived from
//! SHA-256 of the parent seed and the name, which keeps checks independent of
//! the order they run in. A random rational has numerator uniform in `[-H, H]`
//! and denominator uniform in `[-H, H] \ {0}`, then reduced.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::algebra::{Algebra, Rational, Scalar, Side};
use crate::linalg::{row_echelon, subspace_dim, Matrix, Vector};
use crate::morphism::Morphism;
use crate::qlinalg::QMatrix;
use crate::subspace::{classify_sidedness, AffineSubspace, Sidedness, VectorSubspace};

/// Seed of the named sub-stream of `seed`.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub struct Sampler {
    rng: ChaCha8Rng,
    height: i64,
}

impl Sampler {
    pub fn new(seed: u64, height: u32) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            height: i64::from(height.max(1)),
        }
    }

    pub fn named(seed: u64, name: &str, height: u32) -> Self {
        Self::new(derive_seed(seed, name), height)
    }

    /// An independent sampler split off this one.
    pub fn fork(&mut self) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(self.rng.random()),
            height: self.height,
        }
    }

    /// A fresh seed for an independent sub-stream.
    pub fn seed(&mut self) -> u64 {
        self.rng.random()
    }

    pub fn height(&self) -> u32 {
        self.height as u32
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random()
    }

    pub fn side(&mut self) -> Side {
        if self.coin() {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn rational(&mut self) -> Rational {
        let h = self.height;
        let num = self.rng.random_range(-h..=h);
        let den = loop {
            let d = self.rng.random_range(-h..=h);
            if d != 0 {
                break d;
            }
        };
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if r != Rational::from_integer(0.into()) {
                return r;
            }
        }
    }

    pub fn scalar(&mut self, alg: &Algebra) -> Scalar {
        let mut s = Scalar::zero();
        for c in 0..alg.degree() {
            s.0[c] = self.rational();
        }
        s
    }

    pub fn nonzero_scalar(&mut self, alg: &Algebra) -> Scalar {
        loop {
            let s = self.scalar(alg);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// A scalar outside the centre (quaternion algebras only).
    pub fn noncentral_scalar(&mut self, alg: &Algebra) -> Scalar {
        assert!(!alg.is_commutative(), "Q has no noncentral elements");
        loop {
            let s = self.scalar(alg);
            if !s.is_central() {
                return s;
            }
        }
    }

    pub fn vector(&mut self, alg: &Algebra, n: usize) -> Vector {
        Vector((0..n).map(|_| self.scalar(alg)).collect())
    }

    pub fn nonzero_vector(&mut self, alg: &Algebra, n: usize) -> Vector {
        loop {
            let v = self.vector(alg, n);
            if !v.is_zero() {
                return v;
            }
        }
    }

    pub fn central_vector(&mut self, n: usize) -> Vector {
        Vector((0..n).map(|_| Scalar::from_rational(self.rational())).collect())
    }

    pub fn matrix(&mut self, alg: &Algebra, rows: usize, n: usize) -> Matrix {
        Matrix::new(n, (0..rows).map(|_| self.vector(alg, n)).collect()).expect("rectangular")
    }

    /// Matrix whose rows are random left (or right) combinations of `rank` random rows,
    /// so its span has dimension at most `rank`.
    pub fn low_rank_matrix(&mut self, alg: &Algebra, rows: usize, n: usize, rank: usize, side: Side) -> Matrix {
        let gens: Vec<Vector> = (0..rank).map(|_| self.vector(alg, n)).collect();
        let out = (0..rows)
            .map(|_| {
                gens.iter().fold(Vector::zeros(n), |acc, g| {
                    let c = if self.coin() { self.scalar(alg) } else { Scalar::zero() };
                    acc.add(&g.scale(alg, &c, side))
                })
            })
            .collect();
        Matrix::new(n, out).expect("rectangular")
    }

    pub fn invertible_matrix(&mut self, alg: &Algebra, n: usize) -> Matrix {
        loop {
            let m = self.matrix(alg, n, n);
            if m.is_invertible(alg) {
                return m;
            }
        }
    }

    pub fn invertible_central(&mut self, n: usize) -> QMatrix {
        loop {
            let m = QMatrix::from_rows(n, (0..n).map(|_| (0..n).map(|_| self.rational()).collect()));
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn morphism(&mut self, alg: &Algebra, anti: bool) -> Morphism {
        let q = self.nonzero_scalar(alg);
        if anti {
            Morphism::anti(q).expect("nonzero")
        } else {
            Morphism::inner(q).expect("nonzero")
        }
    }

    /// Random subspace of exactly the given dimension.
    pub fn subspace(&mut self, alg: &Algebra, n: usize, dim: usize, side: Side) -> VectorSubspace {
        assert!(dim <= n);
        loop {
            let m = self.matrix(alg, dim, n);
            if subspace_dim(alg, &m, side) == dim {
                return VectorSubspace::from_echelon(row_echelon(alg, &m, side));
            }
        }
    }

    /// Random two-sided subspace: the span of central rows.
    pub fn two_sided_subspace(&mut self, alg: &Algebra, n: usize, dim: usize) -> VectorSubspace {
        assert!(dim <= n);
        loop {
            let m = Matrix::new(n, (0..dim).map(|_| self.central_vector(n)).collect()).expect("rectangular");
            if subspace_dim(alg, &m, Side::Left) == dim {
                return VectorSubspace::span(alg, &m, Side::Left);
            }
        }
    }

    /// Random purely one-sided subspace, by rejection on the sidedness test.
    pub fn purely_one_sided_subspace(&mut self, alg: &Algebra, n: usize, dim: usize, side: Side) -> VectorSubspace {
        assert!(!alg.is_commutative() && dim >= 1 && dim < n);
        loop {
            let v = self.subspace(alg, n, dim, side);
            if classify_sidedness(alg, &v) != Sidedness::TwoSided {
                return v;
            }
        }
    }

    /// Random purely left plane spanned by a random vector and a central one,
    /// so it contains exactly one right line through each point.
    pub fn left_plane_with_right_line(&mut self, alg: &Algebra, n: usize) -> VectorSubspace {
        assert!(!alg.is_commutative() && n >= 2);
        loop {
            let rows = vec![self.vector(alg, n), self.central_vector(n)];
            let m = Matrix::new(n, rows).expect("rectangular");
            if subspace_dim(alg, &m, Side::Left) != 2 {
                continue;
            }
            let v = VectorSubspace::span(alg, &m, Side::Left);
            if classify_sidedness(alg, &v) == Sidedness::PurelyLeft {
                return v;
            }
        }
    }

    pub fn affine(&mut self, alg: &Algebra, direction: VectorSubspace) -> AffineSubspace {
        let p = self.vector(alg, direction.ambient());
        AffineSubspace::new(alg, p, direction)
    }

    /// Random affine line of the given side.
    pub fn line(&mut self, alg: &Algebra, n: usize, side: Side) -> AffineSubspace {
        let dir = self.subspace(alg, n, 1, side);
        self.affine(alg, dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let alg = Algebra::hamilton();
        let mut a = Sampler::new(42, 8);
        let mut b = Sampler::new(42, 8);
        assert_eq!(a.matrix(&alg, 3, 3), b.matrix(&alg, 3, 3));
        let mut c = Sampler::new(43, 8);
        assert_ne!(a.matrix(&alg, 3, 3), c.matrix(&alg, 3, 3));
        assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
        assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
    }

    #[test]
    fn rationals_respect_height() {
        let mut s = Sampler::new(0, 3);
        for _ in 0..200 {
            let r = s.rational();
            assert!(r.numer().magnitude() <= &3u32.into());
            assert!(r.denom().magnitude() <= &3u32.into());
        }
    }

    #[test]
    fn subspace_generators_hit_requested_shape() {
        let alg = Algebra::hamilton();
        let mut s = Sampler::new(5, 8);
        for dim in 0..=3 {
            assert_eq!(s.subspace(&alg, 3, dim, Side::Right).dim(), dim);
            let t = s.two_sided_subspace(&alg, 3, dim);
            assert_eq!(classify_sidedness(&alg, &t), Sidedness::TwoSided);
        }
        let p = s.purely_one_sided_subspace(&alg, 3, 2, Side::Left);
        assert_eq!(classify_sidedness(&alg, &p), Sidedness::PurelyLeft);
    }
}
