//! Matrices and row vectors over the algebra, with the scalar side explicit.
//!
//! A left module structure lets scalars multiply row entries from the left,
//! a right module structure from the right. Everything here is done for both
//! sides directly; nothing is reduced to the other side by transposition.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Algebra, Rational, Scalar, Side};
use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::qlinalg::QMatrix;

/// A row vector in `k^n`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<Scalar>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![Scalar::zero(); n])
    }

    /// Standard basis vector `e_idx` (0-based).
    pub fn unit(n: usize, idx: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[idx] = Scalar::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Vector(xs.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    pub fn is_central(&self) -> bool {
        self.0.iter().all(Scalar::is_central)
    }

    pub fn leading_index(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }

    /// `c v` (left) or `v c` (right).
    pub fn scale(&self, alg: &Algebra, c: &Scalar, side: Side) -> Vector {
        Vector(self.0.iter().map(|x| alg.act(c, x, side)).collect())
    }

    pub fn scale_rational(&self, r: &Rational) -> Vector {
        Vector(self.0.iter().map(|x| x.scale(r)).collect())
    }

    /// Row vector times matrix, `x M`.
    pub fn mul_matrix(&self, alg: &Algebra, m: &Matrix) -> Vector {
        debug_assert_eq!(self.len(), m.nrows());
        let mut out = Vector::zeros(m.ncols());
        for (x, row) in self.0.iter().zip(m.rows()) {
            if x.is_zero() {
                continue;
            }
            for (o, r) in out.0.iter_mut().zip(&row.0) {
                if !r.is_zero() {
                    *o = &*o + &alg.mul(x, r);
                }
            }
        }
        out
    }

    pub fn map_entries(&self, alg: &Algebra, m: &Morphism) -> Vector {
        Vector(self.0.iter().map(|x| m.apply(alg, x)).collect())
    }

    /// Coordinates over the centre: `degree` rationals per entry.
    pub fn to_rational(&self, alg: &Algebra) -> Vec<Rational> {
        let d = alg.degree();
        self.0.iter().flat_map(|s| s.0[..d].iter().cloned()).collect()
    }

    pub fn from_rational(alg: &Algebra, coords: &[Rational]) -> Vector {
        let d = alg.degree();
        Vector(
            coords
                .chunks(d)
                .map(|chunk| {
                    let mut s = Scalar::zero();
                    s.0[..d].clone_from_slice(chunk);
                    s
                })
                .collect(),
        )
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (idx, x) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = Scalar;

    fn index(&self, idx: usize) -> &Scalar {
        &self.0[idx]
    }
}

/// A rectangular matrix stored as row vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    ncols: usize,
    rows: Vec<Vector>,
}

impl Matrix {
    pub fn new(ncols: usize, rows: Vec<Vector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                expected: ncols,
                found: bad.len(),
            });
        }
        Ok(Matrix { ncols, rows })
    }

    /// Panics on ragged input; meant for literals.
    pub fn from_rows(rows: Vec<Vector>) -> Self {
        let ncols = rows.first().map_or(0, Vector::len);
        Self::new(ncols, rows).expect("ragged matrix literal")
    }

    pub fn empty(ncols: usize) -> Self {
        Matrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            ncols: n,
            rows: (0..n).map(|i| Vector::unit(n, i)).collect(),
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            ncols,
            rows: vec![Vector::zeros(ncols); nrows],
        }
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.rows[i].0[i] = e.clone();
        }
        m
    }

    pub fn from_central(m: &QMatrix) -> Self {
        Matrix {
            ncols: m.ncols(),
            rows: m
                .rows()
                .map(|r| Vector(r.iter().map(|x| Scalar::from_rational(x.clone())).collect()))
                .collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vector> {
        self.rows
    }

    pub fn row(&self, i: usize) -> &Vector {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.rows[i].0[j]
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols
    }

    pub fn is_central(&self) -> bool {
        self.rows.iter().all(Vector::is_central)
    }

    pub fn mul(&self, alg: &Algebra, rhs: &Matrix) -> Matrix {
        Matrix {
            ncols: rhs.ncols,
            rows: self.rows.iter().map(|r| r.mul_matrix(alg, rhs)).collect(),
        }
    }

    /// Stacks the rows of `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.ncols, other.ncols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Matrix {
            ncols: self.ncols,
            rows,
        }
    }

    /// Central matrices as rational matrices; `None` if some entry is not central.
    pub fn to_central(&self) -> Option<QMatrix> {
        if !self.is_central() {
            return None;
        }
        Some(QMatrix::from_rows(
            self.ncols,
            self.rows.iter().map(|r| r.0.iter().map(|x| x.t().clone()).collect()),
        ))
    }

    /// Whether `x -> x M` is a bijection of `k^n`.
    pub fn is_invertible(&self, alg: &Algebra) -> bool {
        self.is_square() && subspace_dim(alg, self, Side::Left) == self.ncols
    }

    /// Two-sided inverse of a square matrix, computed by left row reduction of `[M | I]`.
    pub fn inverse(&self, alg: &Algebra) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::SingularMatrix);
        }
        let n = self.ncols;
        let aug = Matrix {
            ncols: 2 * n,
            rows: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut v = r.0.clone();
                    v.extend(Vector::unit(n, i).0);
                    Vector(v)
                })
                .collect(),
        };
        let ef = row_echelon(alg, &aug, Side::Left);
        if ef.pivots.len() != n || ef.pivots.last() != Some(&(n - 1)) {
            return Err(Error::SingularMatrix);
        }
        Ok(Matrix {
            ncols: n,
            rows: ef.rows.iter().map(|r| Vector(r.0[n..].to_vec())).collect(),
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.rows).finish()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vector>::deserialize(de)?;
        let ncols = rows.first().map_or(0, Vector::len);
        Matrix::new(ncols, rows).map_err(serde::de::Error::custom)
    }
}

/// Reduced row echelon form of a left or right row span.
///
/// Row `r` has a 1 in column `pivots[r]`, zeros before it, and zeros in every
/// other pivot column, so the form is unique for the span it describes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EchelonForm {
    pub side: Side,
    pub ncols: usize,
    pub rows: Vec<Vector>,
    pub pivots: Vec<usize>,
}

impl EchelonForm {
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            ncols: self.ncols,
            rows: self.rows.clone(),
        }
    }

    /// Residual of `v` after eliminating every pivot column.
    pub fn reduce(&self, alg: &Algebra, v: &Vector) -> Vector {
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = out.0[p].clone();
            if c.is_zero() {
                continue;
            }
            out = out.sub(&row.scale(alg, &c, self.side));
        }
        out
    }

    pub fn contains(&self, alg: &Algebra, v: &Vector) -> bool {
        self.reduce(alg, v).is_zero()
    }
}

/// Row reduction using only scalar multiplication on `side`.
pub fn row_echelon(alg: &Algebra, m: &Matrix, side: Side) -> EchelonForm {
    let n = m.ncols();
    let mut rows: Vec<Vector> = m.rows().iter().filter(|r| !r.is_zero()).cloned().collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = alg.inv(&rows[r].0[col]).expect("pivot is nonzero");
        rows[r] = rows[r].scale(alg, &inv, side);
        for i in 0..rows.len() {
            if i == r || rows[i].0[col].is_zero() {
                continue;
            }
            let c = rows[i].0[col].clone();
            let elim = rows[r].scale(alg, &c, side);
            rows[i] = rows[i].sub(&elim);
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    EchelonForm {
        side,
        ncols: n,
        rows,
        pivots,
    }
}

/// Left (or right) dimension of the row span.
pub fn subspace_dim(alg: &Algebra, m: &Matrix, side: Side) -> usize {
    row_echelon(alg, m, side).dim()
}

/// Whether `v` lies in the left (or right) span of the rows of `m`.
pub fn member(alg: &Algebra, v: &Vector, m: &Matrix, side: Side) -> bool {
    row_echelon(alg, m, side).contains(alg, v)
}

/// Non-pivot columns `I` and the two-sided coordinate subspace `E_I` they span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotComplement {
    pub indices: Vec<usize>,
    pub basis: Matrix,
}

/// Complement of the pivot set; `E_I` meets the span trivially and together they fill `k^n`.
pub fn pivot_complement(alg: &Algebra, m: &Matrix, side: Side) -> PivotComplement {
    let ef = row_echelon(alg, m, side);
    let n = m.ncols();
    let indices: Vec<usize> = (0..n).filter(|c| !ef.pivots.contains(c)).collect();
    let basis = Matrix {
        ncols: n,
        rows: indices.iter().map(|&i| Vector::unit(n, i)).collect(),
    };
    let sum = ef.to_matrix().stack(&basis);
    assert_eq!(
        subspace_dim(alg, &sum, side),
        n,
        "span and pivot complement must fill the ambient space"
    );
    assert_eq!(indices.len() + ef.dim(), n);
    PivotComplement { indices, basis }
}

/// Matrix over Q of a Q-linear map `k^n_in -> k^m`, found by evaluating it on a Q-basis.
pub fn rational_matrix_of(alg: &Algebra, n_in: usize, f: impl Fn(&Vector) -> Vector) -> QMatrix {
    let d = alg.degree();
    let mut cols = Vec::with_capacity(d * n_in);
    let mut out_len = None;
    for pos in 0..n_in {
        for c in 0..d {
            let mut v = Vector::zeros(n_in);
            v.0[pos] = Scalar::unit(c);
            let img = f(&v).to_rational(alg);
            out_len = Some(img.len());
            cols.push(img);
        }
    }
    QMatrix::from_columns(out_len.unwrap_or(0), &cols)
}

/// Homogeneous Q-linear constraints on a vector of `n` unknown scalars.
///
/// Each unknown contributes `degree` rational coordinates, so conditions that
/// mix left and right multiplication (which are not linear over the algebra
/// on either side) become ordinary linear algebra over the centre.
#[derive(Clone, Debug)]
pub struct CentralSystem {
    alg: Algebra,
    n: usize,
    constraints: QMatrix,
}

impl CentralSystem {
    pub fn new(alg: &Algebra, n: usize) -> Self {
        CentralSystem {
            alg: alg.clone(),
            n,
            constraints: QMatrix::zeros(0, alg.degree() * n),
        }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    /// Requires `f(x) = 0` for a Q-linear `f`.
    pub fn constrain(&mut self, f: impl Fn(&Vector) -> Vector) -> &mut Self {
        let m = rational_matrix_of(&self.alg, self.n, f);
        self.constraints = self.constraints.vstack(&m);
        self
    }

    /// Requires the linear combination `sum_m L(c_m) R(d_m) x_{var_m}` of operator
    /// matrices from [`Algebra::restrict_scalars`] to vanish.
    pub fn constrain_operators(&mut self, terms: &[(usize, QMatrix)]) -> &mut Self {
        let d = self.alg.degree();
        let mut m = QMatrix::zeros(d, d * self.n);
        for (var, op) in terms {
            for r in 0..d {
                for c in 0..d {
                    m[(r, var * d + c)] += &op[(r, c)];
                }
            }
        }
        self.constraints = self.constraints.vstack(&m);
        self
    }

    /// Requires `f(x)` to lie in the span described by `ef`.
    pub fn constrain_member(&mut self, ef: &EchelonForm, f: impl Fn(&Vector) -> Vector) -> &mut Self {
        let alg = self.alg.clone();
        self.constrain(|x| ef.reduce(&alg, &f(x)))
    }

    /// A Q-basis of the solution space.
    pub fn solve(&self) -> Vec<Vector> {
        self.constraints
            .nullspace()
            .iter()
            .map(|v| Vector::from_rational(&self.alg, v))
            .collect()
    }

    pub fn solution_dim(&self) -> usize {
        self.alg.degree() * self.n - self.constraints.rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn v(xs: &[&str]) -> Vector {
        Vector(xs.iter().map(|x| s(x)).collect())
    }

    fn quaternion_example() -> Matrix {
        Matrix::from_rows(vec![v(&["1", "i", "0"]), v(&["i", "-1", "0"]), v(&["0", "j", "1"])])
    }

    #[test]
    fn echelon_of_worked_example() {
        let h = Algebra::hamilton();
        let ef = row_echelon(&h, &quaternion_example(), Side::Left);
        assert_eq!(ef.pivots, vec![0, 1]);
        // fully reduced: (1,i,0) - i (0,1,-j) = (1,0,k)
        assert_eq!(ef.rows, vec![v(&["1", "0", "k"]), v(&["0", "1", "-j"])]);
        let unreduced = Matrix::from_rows(vec![v(&["1", "i", "0"]), v(&["0", "1", "-j"])]);
        assert_eq!(row_echelon(&h, &unreduced, Side::Left), ef);
        assert_eq!(subspace_dim(&h, &quaternion_example(), Side::Left), 2);
        // (i,-1,0) is both i (1,i,0) and (1,i,0) i
        assert_eq!(subspace_dim(&h, &quaternion_example(), Side::Right), 2);
    }

    #[test]
    fn identity_and_zero() {
        let h = Algebra::hamilton();
        for side in [Side::Left, Side::Right] {
            let ef = row_echelon(&h, &Matrix::identity(3), side);
            assert_eq!(ef.rows, Matrix::identity(3).into_rows());
            assert_eq!(ef.pivots, vec![0, 1, 2]);
            assert_eq!(subspace_dim(&h, &Matrix::zeros(2, 3), side), 0);
            assert_eq!(subspace_dim(&h, &Matrix::empty(3), side), 0);
        }
    }

    #[test]
    fn right_echelon_differs_from_left() {
        let h = Algebra::hamilton();
        // (j, ij) = (1,i) j lies on the right line of (1,i) but j (1,i) = (j, -k)
        let m = Matrix::from_rows(vec![v(&["1", "i"]), v(&["j", "k"])]);
        assert_eq!(subspace_dim(&h, &m, Side::Right), 1);
        assert_eq!(subspace_dim(&h, &m, Side::Left), 2);
    }

    #[test]
    fn membership() {
        let h = Algebra::hamilton();
        let m = Matrix::from_rows(vec![v(&["1", "i", "0"])]);
        assert!(member(&h, &v(&["i", "-1", "0"]), &m, Side::Left));
        assert!(!member(&h, &v(&["0", "0", "1"]), &m, Side::Left));
        assert!(member(&h, &v(&["j", "-k", "0"]), &m, Side::Left));
        assert!(!member(&h, &v(&["j", "-k", "0"]), &m, Side::Right));
        assert!(member(&h, &v(&["j", "k", "0"]), &m, Side::Right));
    }

    #[test]
    fn pivot_complements() {
        let h = Algebra::hamilton();
        assert_eq!(pivot_complement(&h, &quaternion_example(), Side::Left).indices, vec![2]);
        assert!(pivot_complement(&h, &Matrix::identity(3), Side::Right).indices.is_empty());
        let pc = pivot_complement(&h, &Matrix::zeros(1, 2), Side::Left);
        assert_eq!(pc.indices, vec![0, 1]);
        assert_eq!(pc.basis, Matrix::identity(2));
    }

    #[test]
    fn inverse_matrix() {
        let h = Algebra::hamilton();
        let m = Matrix::from_rows(vec![v(&["1", "i"]), v(&["j", "2"])]);
        let inv = m.inverse(&h).unwrap();
        assert_eq!(m.mul(&h, &inv), Matrix::identity(2));
        assert_eq!(inv.mul(&h, &m), Matrix::identity(2));
        // rows (1,i) and (i,-1) = i (1,i) are left dependent
        let sing = Matrix::from_rows(vec![v(&["1", "i"]), v(&["i", "-1"])]);
        assert_eq!(sing.inverse(&h), Err(Error::SingularMatrix));
        assert!(!sing.is_invertible(&h));
    }

    #[test]
    fn central_solver_examples() {
        let h = Algebra::hamilton();
        assert_eq!(CentralSystem::new(&h, 1).solve().len(), 4);

        let mut centre = CentralSystem::new(&h, 1);
        centre.constrain(|x| Vector(vec![h.commutator(&Scalar::i(), &x[0])]));
        centre.constrain(|x| Vector(vec![h.commutator(&Scalar::j(), &x[0])]));
        let sol = centre.solve();
        assert_eq!(sol.len(), 1);
        assert!(sol[0][0].is_central());

        // same system through operator matrices: (L(i) - R(i)) x = 0, (L(j) - R(j)) x = 0
        let mut ops = CentralSystem::new(&h, 1);
        for g in [Scalar::i(), Scalar::j()] {
            let l = h.restrict_scalars(&g, Side::Left).0;
            let r = h.restrict_scalars(&g, Side::Right).0;
            let mut diff = l.clone();
            for a in 0..4 {
                for b in 0..4 {
                    diff[(a, b)] = &l[(a, b)] - &r[(a, b)];
                }
            }
            ops.constrain_operators(&[(0, diff)]);
        }
        assert_eq!(ops.solution_dim(), 1);

        // right closure of the left span of (1,i,0), (0,0,1): only the right line through (0,0,1)
        let ef = row_echelon(
            &h,
            &Matrix::from_rows(vec![v(&["1", "i", "0"]), v(&["0", "0", "1"])]),
            Side::Left,
        );
        let mut closure = CentralSystem::new(&h, 3);
        closure.constrain_member(&ef, |x| x.clone());
        for g in h.generators() {
            closure.constrain_member(&ef, |x| x.scale(&h, &g, Side::Right));
        }
        let sol = closure.solve();
        assert_eq!(sol.len(), 4);
        for x in &sol {
            assert!(x[0].is_zero() && x[1].is_zero());
        }
    }
}
