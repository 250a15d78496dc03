//! Dense matrices over the rationals.
//!
//! This is the ground field of every algebra we handle, so all conditions that
//! mix left and right scalar actions end up as linear systems here.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{parse_rational, rat, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        QMatrix {
            nrows,
            ncols,
            data: vec![Rational::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `ncols`.
    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = Vec<Rational>>) -> Self {
        let mut data = Vec::new();
        let mut nrows = 0;
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged rational matrix");
            data.extend(row);
            nrows += 1;
        }
        QMatrix { nrows, ncols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(nrows: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows, "ragged rational matrix");
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        (0..self.nrows).map(move |r| self.row(r))
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.nrows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn mul(&self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.ncols, rhs.nrows, "matrix product shape mismatch");
        let mut out = QMatrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.ncols, v.len(), "matrix-vector shape mismatch");
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.ncols, other.ncols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix {
            nrows: self.nrows + other.nrows,
            ncols: self.ncols,
            data,
        }
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.ncols {
            if r == m.nrows {
                break;
            }
            let Some(p) = (r..m.nrows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.ncols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.nrows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.ncols {
                    if m[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &m[(i, j)] - &factor * &m[(r, j)];
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.data.truncate(r * m.ncols);
        m.nrows = r;
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.ncols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self * x = rhs`, if any.
    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(rhs.len(), self.nrows, "rhs length mismatch");
        let mut aug = QMatrix::zeros(self.nrows, self.ncols + 1);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.ncols)] = rhs[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.ncols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.ncols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.ncols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if self.nrows != self.ncols {
            return None;
        }
        let n = self.nrows;
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;

    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.ncols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.ncols + c]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        write!(f, "QMatrix{rows:?}")
    }
}

/// Rows of rational entries, each written as a string such as `"-3/4"`.
impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.rows().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        rows.serialize(ser)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Text(String),
    Int(i64),
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<Vec<EntryRepr>>::deserialize(de)?;
        let ncols = rows.first().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(D::Error::custom(format!("row {r} has {} entries, expected {ncols}", row.len())));
            }
            let parsed = row
                .into_iter()
                .map(|e| match e {
                    EntryRepr::Text(s) => parse_rational(&s).map_err(D::Error::custom),
                    EntryRepr::Int(n) => Ok(rat(n)),
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            out.push(parsed);
        }
        Ok(QMatrix::from_rows(ncols, out))
    }
}
