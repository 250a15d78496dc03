//! Left, right and two-sided subspaces of `k^n`.
//!
//! A subspace is stored by the reduced echelon form of its direction on the
//! side it was built from. Questions that mix the two scalar actions
//! (intersections of a left and a right subspace, the largest right subspace
//! inside a left one) are answered over the centre Q, where both actions are
//! linear, and the result is recognized as left and/or right afterwards.

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Rational, Scalar, Side};
use crate::error::{Error, Result};
use crate::linalg::{pivot_complement, rational_matrix_of, row_echelon, CentralSystem, EchelonForm, Matrix, Vector};
use crate::qlinalg::QMatrix;
use crate::random::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    PurelyLeft,
    PurelyRight,
    TwoSided,
}

impl Sidedness {
    pub fn purely(side: Side) -> Self {
        match side {
            Side::Left => Sidedness::PurelyLeft,
            Side::Right => Sidedness::PurelyRight,
        }
    }

    pub fn is_left(self) -> bool {
        self != Sidedness::PurelyRight
    }

    pub fn is_right(self) -> bool {
        self != Sidedness::PurelyLeft
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sidedness::PurelyLeft => "purely_left",
            Sidedness::PurelyRight => "purely_right",
            Sidedness::TwoSided => "two_sided",
        }
    }
}

/// A left or right vector subspace of `k^n` in canonical echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorSubspace {
    echelon: EchelonForm,
}

impl VectorSubspace {
    pub fn span(alg: &Algebra, m: &Matrix, side: Side) -> Self {
        VectorSubspace {
            echelon: row_echelon(alg, m, side),
        }
    }

    pub fn from_echelon(echelon: EchelonForm) -> Self {
        VectorSubspace { echelon }
    }

    pub fn zero(n: usize, side: Side) -> Self {
        VectorSubspace {
            echelon: EchelonForm {
                side,
                ncols: n,
                rows: Vec::new(),
                pivots: Vec::new(),
            },
        }
    }

    pub fn full(n: usize, side: Side) -> Self {
        VectorSubspace {
            echelon: EchelonForm {
                side,
                ncols: n,
                rows: Matrix::identity(n).into_rows(),
                pivots: (0..n).collect(),
            },
        }
    }

    /// Two-sided span of the given standard basis vectors.
    pub fn coordinate(n: usize, indices: &[usize], side: Side) -> Self {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        VectorSubspace {
            echelon: EchelonForm {
                side,
                ncols: n,
                rows: idx.iter().map(|&i| Vector::unit(n, i)).collect(),
                pivots: idx,
            },
        }
    }

    pub fn side(&self) -> Side {
        self.echelon.side
    }

    pub fn ambient(&self) -> usize {
        self.echelon.ncols
    }

    pub fn dim(&self) -> usize {
        self.echelon.dim()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.echelon.rows
    }

    pub fn echelon(&self) -> &EchelonForm {
        &self.echelon
    }

    pub fn to_matrix(&self) -> Matrix {
        self.echelon.to_matrix()
    }

    pub fn contains(&self, alg: &Algebra, v: &Vector) -> bool {
        self.echelon.contains(alg, v)
    }

    pub fn contains_subspace(&self, alg: &Algebra, other: &VectorSubspace) -> bool {
        rational_basis_of(alg, other).iter().all(|v| self.contains(alg, v))
    }

    /// The same subspace described on `side`; fails unless it is two-sided.
    pub fn with_side(&self, alg: &Algebra, side: Side) -> Result<Self> {
        if side == self.side() {
            return Ok(self.clone());
        }
        if classify_sidedness(alg, self) != Sidedness::TwoSided {
            return Err(Error::NotTwoSided);
        }
        Ok(VectorSubspace::span(alg, &self.to_matrix(), side))
    }

    /// Equality as point sets, regardless of the side tags.
    pub fn same_points(&self, alg: &Algebra, other: &VectorSubspace) -> bool {
        if self.ambient() != other.ambient() {
            return false;
        }
        if self.side() == other.side() {
            return self.echelon == other.echelon;
        }
        self.contains_subspace(alg, other) && other.contains_subspace(alg, self)
    }
}

/// A Q-basis of the subspace: every basis vector times every unit of the algebra.
pub fn rational_basis_of(alg: &Algebra, v: &VectorSubspace) -> Vec<Vector> {
    let units = alg.basis();
    v.basis()
        .iter()
        .flat_map(|row| units.iter().map(move |u| row.scale(alg, u, v.side())))
        .collect()
}

/// `point + direction`, with the point reduced modulo the direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    point: Vector,
    direction: VectorSubspace,
}

/// Text form of a subspace: side, basis rows and an optional base point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceRepr {
    pub side: Side,
    pub basis: Vec<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vector>,
    /// Ambient dimension; only needed when neither basis nor point fixes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl AffineSubspace {
    pub fn new(alg: &Algebra, point: Vector, direction: VectorSubspace) -> Self {
        assert_eq!(point.len(), direction.ambient(), "point and direction live in different spaces");
        let point = direction.echelon.reduce(alg, &point);
        AffineSubspace { point, direction }
    }

    pub fn linear(direction: VectorSubspace) -> Self {
        AffineSubspace {
            point: Vector::zeros(direction.ambient()),
            direction,
        }
    }

    pub fn from_point(p: Vector, side: Side) -> Self {
        let n = p.len();
        AffineSubspace {
            point: p,
            direction: VectorSubspace::zero(n, side),
        }
    }

    pub fn from_repr(alg: &Algebra, repr: &SubspaceRepr) -> Result<Self> {
        let n = repr
            .basis
            .first()
            .map(Vector::len)
            .or(repr.point.as_ref().map(Vector::len))
            .or(repr.n)
            .ok_or_else(|| Error::Parse("cannot infer the ambient dimension of an empty subspace".into()))?;
        if n == 0 {
            return Err(Error::Parse("ambient dimension must be positive".into()));
        }
        if let Some(m) = repr.n {
            if m != n {
                return Err(Error::DimensionMismatch { expected: m, found: n });
            }
        }
        for x in repr.basis.iter().chain(repr.point.iter()).flat_map(|v| &v.0) {
            alg.check(x)?;
        }
        let m = Matrix::new(n, repr.basis.clone())?;
        let point = repr.point.clone().unwrap_or_else(|| Vector::zeros(n));
        if point.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: point.len(),
            });
        }
        Ok(AffineSubspace::new(alg, point, VectorSubspace::span(alg, &m, repr.side)))
    }

    pub fn to_repr(&self) -> SubspaceRepr {
        SubspaceRepr {
            side: self.side(),
            basis: self.direction.basis().to_vec(),
            point: Some(self.point.clone()),
            n: Some(self.ambient()),
        }
    }

    pub fn point(&self) -> &Vector {
        &self.point
    }

    pub fn direction(&self) -> &VectorSubspace {
        &self.direction
    }

    pub fn side(&self) -> Side {
        self.direction.side()
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn ambient(&self) -> usize {
        self.direction.ambient()
    }

    pub fn contains(&self, alg: &Algebra, x: &Vector) -> bool {
        self.direction.contains(alg, &x.sub(&self.point))
    }

    pub fn contains_subspace(&self, alg: &Algebra, other: &AffineSubspace) -> bool {
        self.contains(alg, &other.point) && self.direction.contains_subspace(alg, &other.direction)
    }

    pub fn same_points(&self, alg: &Algebra, other: &AffineSubspace) -> bool {
        self.direction.same_points(alg, &other.direction) && self.contains(alg, &other.point)
    }

    pub fn with_side(&self, alg: &Algebra, side: Side) -> Result<Self> {
        Ok(AffineSubspace::new(alg, self.point.clone(), self.direction.with_side(alg, side)?))
    }

    pub fn translate(&self, alg: &Algebra, b: &Vector) -> Self {
        AffineSubspace::new(alg, self.point.add(b), self.direction.clone())
    }

    /// Point `p + sum_r c_r v_r` for direction basis `v_r`, coefficients on the subspace's side.
    pub fn point_at(&self, alg: &Algebra, coefs: &[Scalar]) -> Vector {
        self.direction
            .basis()
            .iter()
            .zip(coefs)
            .fold(self.point.clone(), |acc, (v, c)| acc.add(&v.scale(alg, c, self.side())))
    }

    pub fn random_point(&self, alg: &Algebra, rng: &mut Sampler) -> Vector {
        let coefs: Vec<Scalar> = (0..self.dim()).map(|_| rng.scalar(alg)).collect();
        self.point_at(alg, &coefs)
    }

    /// Image under an affine map that commutes with both scalar actions
    /// (a central matrix plus a translation).
    fn map_bimodule(&self, alg: &Algebra, f: impl Fn(&Vector) -> Vector) -> Self {
        let p = f(&self.point);
        let rows: Vec<Vector> = self
            .direction
            .basis()
            .iter()
            .map(|v| f(&self.point.add(v)).sub(&p))
            .collect();
        let m = Matrix::new(self.ambient(), rows).expect("same ambient dimension");
        AffineSubspace::new(alg, p, VectorSubspace::span(alg, &m, self.side()))
    }
}

/// Two-sided iff the span is closed under the opposite action of the generators.
pub fn classify_sidedness(alg: &Algebra, v: &VectorSubspace) -> Sidedness {
    if alg.is_commutative() {
        return Sidedness::TwoSided;
    }
    let opposite = v.side().opposite();
    let closed = v.basis().iter().all(|row| {
        alg.generators()
            .iter()
            .all(|g| v.contains(alg, &row.scale(alg, g, opposite)))
    });
    if closed {
        Sidedness::TwoSided
    } else {
        Sidedness::purely(v.side())
    }
}

pub fn classify_affine(alg: &Algebra, a: &AffineSubspace) -> Sidedness {
    classify_sidedness(alg, a.direction())
}

/// The left line `{p + c (q - p)}` or right line `{p + (q - p) c}`.
pub fn line_through(alg: &Algebra, p: &Vector, q: &Vector, side: Side) -> Result<AffineSubspace> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let d = q.sub(p);
    if d.is_zero() {
        return Err(Error::DegenerateLine);
    }
    let dir = VectorSubspace::span(alg, &Matrix::from_rows(vec![d]), side);
    Ok(AffineSubspace::new(alg, p.clone(), dir))
}

/// An affine subspace of `k^n` regarded as a subspace of `Q^(degree n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalAffine {
    pub point: Vector,
    /// Q-linearly independent direction vectors.
    pub basis: Vec<Vector>,
}

impl RationalAffine {
    pub fn of(alg: &Algebra, a: &AffineSubspace) -> Self {
        RationalAffine {
            point: a.point.clone(),
            basis: rational_basis_of(alg, &a.direction),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Equations `M x = rhs` over Q cutting out the affine subspace.
fn membership_system(alg: &Algebra, a: &AffineSubspace) -> (QMatrix, Vec<Rational>) {
    let n = a.ambient();
    let ef = a.direction.echelon();
    let m = rational_matrix_of(alg, n, |x| ef.reduce(alg, x));
    let rhs = m.apply(&a.point.to_rational(alg));
    (m, rhs)
}

/// Intersection as a set over Q; `None` when empty.
pub fn intersect_rational(alg: &Algebra, a: &AffineSubspace, b: &AffineSubspace) -> Option<RationalAffine> {
    assert_eq!(a.ambient(), b.ambient(), "subspaces of different spaces");
    let (ma, ra) = membership_system(alg, a);
    let (mb, rb) = membership_system(alg, b);
    let m = ma.vstack(&mb);
    let rhs: Vec<Rational> = ra.into_iter().chain(rb).collect();
    let x0 = m.solve(&rhs)?;
    Some(RationalAffine {
        point: Vector::from_rational(alg, &x0),
        basis: m.nullspace().iter().map(|v| Vector::from_rational(alg, v)).collect(),
    })
}

fn closed_under(alg: &Algebra, basis: &[Vector], n: usize, side: Side) -> bool {
    if alg.is_commutative() || basis.is_empty() {
        return true;
    }
    let d = alg.degree();
    let base = QMatrix::from_rows(d * n, basis.iter().map(|v| v.to_rational(alg)));
    let gens = alg.generators();
    let products = basis
        .iter()
        .flat_map(|v| gens.iter().map(move |g| v.scale(alg, g, side).to_rational(alg)));
    let all = base.vstack(&QMatrix::from_rows(d * n, products));
    all.rank() == base.rank()
}

/// Recognizes a Q-affine set as a left or right affine subspace, trying `preferred` first.
pub fn recognize(alg: &Algebra, set: &RationalAffine, preferred: Side) -> Result<AffineSubspace> {
    let n = set.point.len();
    for side in [preferred, preferred.opposite()] {
        if closed_under(alg, &set.basis, n, side) {
            let m = Matrix::new(n, set.basis.clone())?;
            let dir = VectorSubspace::span(alg, &m, side);
            if dir.dim() * alg.degree() != set.basis.len() {
                return Err(Error::Invariant("closed Q-span has fractional dimension".into()));
            }
            return Ok(AffineSubspace::new(alg, set.point.clone(), dir));
        }
    }
    Err(Error::SideUnrepresentable)
}

/// Exact intersection, tagged with the side of `a` when possible.
///
/// The intersection of a purely left and a purely right subspace can be a set
/// that is neither (for instance a line over a maximal subfield); that case
/// is reported as [`Error::SideUnrepresentable`].
pub fn intersect_affine(alg: &Algebra, a: &AffineSubspace, b: &AffineSubspace) -> Result<Option<AffineSubspace>> {
    match intersect_rational(alg, a, b) {
        None => Ok(None),
        Some(set) => recognize(alg, &set, a.side()).map(Some),
    }
}

/// How an affine line meets a subspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LineMeet {
    Empty,
    Point,
    WholeLine,
    /// Meets in a Q-affine set strictly between a point and the line.
    Partial { rational_dim: usize },
}

pub fn meet_line(alg: &Algebra, a: &AffineSubspace, line: &AffineSubspace) -> LineMeet {
    match intersect_rational(alg, a, line) {
        None => LineMeet::Empty,
        Some(set) if set.dim() == 0 => LineMeet::Point,
        Some(set) if set.dim() == line.dim() * alg.degree() => LineMeet::WholeLine,
        Some(set) => LineMeet::Partial {
            rational_dim: set.dim(),
        },
    }
}

#[derive(Clone, Debug)]
pub struct TrichotomyTrial {
    pub line: AffineSubspace,
    pub meet: LineMeet,
}

#[derive(Clone, Debug)]
pub struct TrichotomyReport {
    pub sidedness: Sidedness,
    pub trials: Vec<TrichotomyTrial>,
    /// For one-sided subspaces: an opposite-side line meeting it partially.
    pub witness: Option<TrichotomyTrial>,
}

impl TrichotomyReport {
    /// Two-sided subspaces meet every line in nothing, a point or the whole
    /// line; one-sided ones admit a line meeting them partially.
    pub fn consistent(&self) -> bool {
        let sampled_ok = self.trials.iter().all(|t| !matches!(t.meet, LineMeet::Partial { .. }));
        match self.sidedness {
            Sidedness::TwoSided => sampled_ok && self.witness.is_none(),
            _ => matches!(
                self.witness,
                Some(TrichotomyTrial {
                    meet: LineMeet::Partial { .. },
                    ..
                })
            ),
        }
    }
}

/// For a purely one-sided subspace: the opposite-side line through its base point
/// spanned by a direction vector whose opposite multiples leave the subspace.
pub fn trichotomy_witness(alg: &Algebra, a: &AffineSubspace) -> Option<AffineSubspace> {
    if alg.is_commutative() {
        return None;
    }
    let v = a.direction();
    let opposite = v.side().opposite();
    let x = v.basis().iter().find(|row| {
        alg.generators()
            .iter()
            .any(|g| !v.contains(alg, &row.scale(alg, g, opposite)))
    })?;
    let dir = VectorSubspace::span(alg, &Matrix::from_rows(vec![x.clone()]), opposite);
    Some(AffineSubspace::new(alg, a.point().clone(), dir))
}

/// Samples lines of both sides against `a` and checks the intersection pattern.
pub fn line_intersection_characterization(
    alg: &Algebra,
    a: &AffineSubspace,
    trials: usize,
    rng: &mut Sampler,
) -> TrichotomyReport {
    let n = a.ambient();
    let sidedness = classify_affine(alg, a);
    let mut records = Vec::with_capacity(trials);
    for _ in 0..trials {
        let side = rng.side();
        let line = loop {
            // mix lines through A, parallel to A, and generic ones
            let (p, d) = match rng.index(4) {
                0 => (a.random_point(alg, rng), rng.nonzero_vector(alg, n)),
                1 if a.dim() > 0 => (rng.vector(alg, n), a.random_point(alg, rng).sub(a.point())),
                2 if a.dim() > 0 => (a.random_point(alg, rng), a.random_point(alg, rng).sub(a.point())),
                _ => (rng.vector(alg, n), rng.nonzero_vector(alg, n)),
            };
            if let Ok(l) = line_through(alg, &p, &p.add(&d), side) {
                break l;
            }
        };
        let meet = meet_line(alg, a, &line);
        records.push(TrichotomyTrial { line, meet });
    }
    let witness = match sidedness {
        Sidedness::TwoSided => None,
        _ => trichotomy_witness(alg, a).map(|line| {
            let meet = meet_line(alg, a, &line);
            TrichotomyTrial { line, meet }
        }),
    };
    TrichotomyReport {
        sidedness,
        trials: records,
        witness,
    }
}

/// A coordinate change `x -> x T` with `T` central and invertible; it commutes
/// with both scalar actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleIso {
    forward: Matrix,
    inverse: Matrix,
    image_dim: usize,
}

impl BimoduleIso {
    pub fn forward(&self) -> &Matrix {
        &self.forward
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    /// `k` such that the subspace is sent onto the span of the first `k` basis vectors.
    pub fn image_dim(&self) -> usize {
        self.image_dim
    }

    pub fn apply(&self, alg: &Algebra, x: &Vector) -> Vector {
        x.mul_matrix(alg, &self.forward)
    }

    pub fn apply_inverse(&self, alg: &Algebra, y: &Vector) -> Vector {
        y.mul_matrix(alg, &self.inverse)
    }
}

/// Bimodule automorphism of `k^n` taking a two-sided `V` onto `k^k`.
///
/// The echelon rows of a two-sided subspace are central; together with the
/// standard vectors of the pivot complement they form a central basis, and
/// `T` is the inverse of that basis matrix.
pub fn bimodule_normalize(alg: &Algebra, v: &VectorSubspace) -> Result<BimoduleIso> {
    if classify_sidedness(alg, v) != Sidedness::TwoSided {
        return Err(Error::NotTwoSided);
    }
    let n = v.ambient();
    let complement = pivot_complement(alg, &v.to_matrix(), v.side());
    let basis = v.to_matrix().stack(&complement.basis);
    let c = basis
        .to_central()
        .ok_or_else(|| Error::Invariant("echelon rows of a two-sided subspace must be central".into()))?;
    let t = c
        .inverse()
        .ok_or_else(|| Error::Invariant("subspace and pivot complement do not span".into()))?;
    debug_assert_eq!(c.nrows(), n);
    Ok(BimoduleIso {
        forward: Matrix::from_central(&t),
        inverse: Matrix::from_central(&c),
        image_dim: v.dim(),
    })
}

/// Lines of a given side inside an affine subspace through one of its points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinesThrough {
    Lines(Vec<AffineSubspace>),
    /// At least a 2-dimensional family: the subspace contains a plane of that side.
    NotEnumerable,
}

impl LinesThrough {
    pub fn count(&self) -> Option<usize> {
        match self {
            LinesThrough::Lines(l) => Some(l.len()),
            LinesThrough::NotEnumerable => None,
        }
    }
}

/// Largest `side`-subspace contained in `v`.
///
/// It is the solution of the Q-linear system `x c in V` (or `c x in V`)
/// over a Q-basis `c` of the algebra.
pub fn largest_side_subspace(alg: &Algebra, v: &VectorSubspace, side: Side) -> Result<VectorSubspace> {
    if side == v.side() {
        return Ok(v.clone());
    }
    let n = v.ambient();
    let ef = v.echelon();
    let mut system = CentralSystem::new(alg, n);
    for c in alg.basis() {
        system.constrain_member(ef, |x| x.scale(alg, &c, side));
    }
    let sol = system.solve();
    let m = Matrix::new(n, sol.clone())?;
    let out = VectorSubspace::span(alg, &m, side);
    if out.dim() * alg.degree() != sol.len() {
        return Err(Error::Invariant("closed Q-span has fractional dimension".into()));
    }
    Ok(out)
}

/// All `side`-lines through `through` contained in `a`.
pub fn lines_in(alg: &Algebra, a: &AffineSubspace, through: &Vector, side: Side) -> Result<LinesThrough> {
    if !a.contains(alg, through) {
        return Err(Error::Invariant("the base point must lie in the subspace".into()));
    }
    let s = largest_side_subspace(alg, a.direction(), side)?;
    match s.dim() {
        0 => Ok(LinesThrough::Lines(Vec::new())),
        1 => Ok(LinesThrough::Lines(vec![AffineSubspace::new(alg, through.clone(), s)])),
        _ => Ok(LinesThrough::NotEnumerable),
    }
}

pub fn right_lines_in(alg: &Algebra, a: &AffineSubspace, through: &Vector) -> Result<LinesThrough> {
    lines_in(alg, a, through, Side::Right)
}

/// Maximal chain `A_0 < A_1 < ... < A_n` of one side with `A_dim(A) = A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flag {
    pub members: Vec<AffineSubspace>,
    pub designated: usize,
}

impl Flag {
    /// Dimensions are `0..=n`, inclusions strict, all members of one side.
    pub fn is_valid(&self, alg: &Algebra) -> bool {
        let Some(first) = self.members.first() else {
            return false;
        };
        let n = first.ambient();
        let side = first.side();
        self.members.len() == n + 1
            && self.members.iter().enumerate().all(|(i, m)| m.dim() == i && m.side() == side)
            && self.members.windows(2).all(|w| w[1].contains_subspace(alg, &w[0]))
    }
}

pub fn extend_to_flag(alg: &Algebra, a: &AffineSubspace, side: Side) -> Result<Flag> {
    let a = a.with_side(alg, side)?;
    let n = a.ambient();
    let mut dirs: Vec<Vector> = a.direction().basis().to_vec();
    for i in 0..n {
        let e = Vector::unit(n, i);
        let m = Matrix::new(n, dirs.clone())?;
        if !crate::linalg::member(alg, &e, &m, side) {
            dirs.push(e);
        }
    }
    let members = (0..=n)
        .map(|k| {
            let m = Matrix::new(n, dirs[..k].to_vec()).expect("same ambient dimension");
            AffineSubspace::new(alg, a.point().clone(), VectorSubspace::span(alg, &m, side))
        })
        .collect();
    let flag = Flag {
        members,
        designated: a.dim(),
    };
    if !flag.is_valid(alg) {
        return Err(Error::Invariant("flag extension produced a non-strict chain".into()));
    }
    Ok(flag)
}

/// Two-sided affine planes `P_0, ..., P_m`, consecutive ones meeting in a line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneChain {
    pub planes: Vec<AffineSubspace>,
}

impl PlaneChain {
    /// Number of steps `m`.
    pub fn steps(&self) -> usize {
        self.planes.len().saturating_sub(1)
    }

    pub fn verify(&self, alg: &Algebra) -> Result<()> {
        for p in &self.planes {
            if p.dim() != 2 {
                return Err(Error::WrongSubspaceDimension { expected: 2, found: p.dim() });
            }
            if classify_affine(alg, p) != Sidedness::TwoSided {
                return Err(Error::NotTwoSided);
            }
        }
        for w in self.planes.windows(2) {
            match intersect_affine(alg, &w[0], &w[1])? {
                Some(l) if l.dim() == 1 => {}
                other => {
                    return Err(Error::Invariant(format!(
                        "consecutive planes meet in {:?}",
                        other.map(|l| l.dim())
                    )))
                }
            }
        }
        Ok(())
    }
}

fn check_two_sided_plane(alg: &Algebra, p: &AffineSubspace) -> Result<()> {
    if p.dim() != 2 {
        return Err(Error::WrongSubspaceDimension { expected: 2, found: p.dim() });
    }
    if classify_affine(alg, p) != Sidedness::TwoSided {
        return Err(Error::NotTwoSided);
    }
    Ok(())
}

/// Connects two two-sided planes of `k^n`, `n >= 3`, by planes meeting in lines.
///
/// The first plane is moved onto `span(e_1, e_2)` by a bimodule automorphism.
/// If the second plane's direction is `span(e_1, e_2)` its translation
/// coordinates are cleared one at a time through auxiliary planes
/// `{(x, 0, .., y, ..)}`; otherwise its direction sits in `k^k` for a minimal
/// `k > 2`, and it is joined to a plane inside a copy of `k^(k-1)` through
/// their common line, which lowers `k`.
pub fn connect_planes(alg: &Algebra, p: &AffineSubspace, q: &AffineSubspace) -> Result<PlaneChain> {
    let n = p.ambient();
    if q.ambient() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.ambient(),
        });
    }
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    check_two_sided_plane(alg, p)?;
    check_two_sided_plane(alg, q)?;
    let q = q.with_side(alg, p.side())?;
    if p.same_points(alg, &q) {
        return Ok(PlaneChain { planes: vec![p.clone()] });
    }
    if matches!(intersect_affine(alg, p, &q)?, Some(l) if l.dim() == 1) {
        return Ok(PlaneChain {
            planes: vec![p.clone(), q],
        });
    }

    let iso = bimodule_normalize(alg, p.direction())?;
    let origin = p.point().clone();
    let to_norm = |x: &Vector| iso.apply(alg, &x.sub(&origin));
    let from_norm = |y: &Vector| iso.apply_inverse(alg, y).add(&origin);

    let target = q.map_bimodule(alg, to_norm);
    let planes = chain_from_base(alg, &target, p.side())?
        .into_iter()
        .map(|plane| plane.map_bimodule(alg, from_norm))
        .collect();
    let chain = PlaneChain { planes };
    chain.verify(alg)?;
    Ok(chain)
}

/// Chain from `span(e_1, e_2)` to a two-sided plane `target`, in normalized coordinates.
fn chain_from_base(alg: &Algebra, target: &AffineSubspace, side: Side) -> Result<Vec<AffineSubspace>> {
    let n = target.ambient();
    let dir = target.direction();
    let top = dir
        .basis()
        .iter()
        .filter_map(|r| r.0.iter().rposition(|c| !c.is_zero()))
        .max()
        .ok_or_else(|| Error::Invariant("plane with empty direction".into()))?;

    if top == 1 {
        // direction is span(e_1, e_2); clear the remaining coordinates of the point
        let mut cur = target.point().clone();
        let mut seq = vec![target.clone()];
        for idx in 2..n {
            if cur[idx].is_zero() {
                continue;
            }
            let mut aux_point = cur.clone();
            for c in [0, 1, idx] {
                aux_point.0[c] = Scalar::zero();
            }
            let aux_dir = VectorSubspace::coordinate(n, &[0, idx], side);
            seq.push(AffineSubspace::new(alg, aux_point, aux_dir));
            cur.0[idx] = Scalar::zero();
            seq.push(AffineSubspace::new(alg, cur.clone(), VectorSubspace::coordinate(n, &[0, 1], side)));
        }
        seq.reverse();
        return Ok(seq);
    }

    // l = V' cap k^top is a two-sided line
    let lower = AffineSubspace::linear(VectorSubspace::coordinate(n, &(0..top).collect::<Vec<_>>(), side));
    let l = intersect_affine(alg, &AffineSubspace::linear(dir.clone()), &lower)?
        .filter(|l| l.dim() == 1)
        .ok_or_else(|| Error::Invariant("plane direction meets the lower coordinate space badly".into()))?;
    let l_vec = l.direction().basis()[0].clone();

    // base point with coordinate `top` cleared, so the plane meets {x_top = 0, x_m = const for m > top} in l + x'
    let v = dir
        .basis()
        .iter()
        .find(|r| !r[top].is_zero())
        .expect("top column is used by some basis row");
    let c = alg.mul(&target.point()[top], &alg.inv(&v[top])?);
    let shifted = target.point().sub(&v.scale(alg, &c, Side::Left));

    let m = (0..top)
        .find(|&m| !l.direction().contains(alg, &Vector::unit(n, m)))
        .expect("a line cannot contain every coordinate axis of a space of dimension >= 2");
    let lower_dir = Matrix::from_rows(vec![l_vec, Vector::unit(n, m)]);
    let lower_plane = AffineSubspace::new(alg, shifted, VectorSubspace::span(alg, &lower_dir, side));

    let mut chain = chain_from_base(alg, &lower_plane, side)?;
    chain.push(target.clone());
    Ok(chain)
}
