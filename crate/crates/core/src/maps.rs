//! Maps of `k^n` that send affine subspaces to affine subspaces.
//!
//! A [`MapExpr`] is a composition of translations, right scalar
//! multiplications, matrices, and entrywise (anti-)automorphisms. Images of
//! subspaces under these are computed exactly. Arbitrary point maps
//! ([`PointMap`]) are analyzed from evaluations only: lines are sampled, and
//! the normal form
//!
//! ```text
//! f(x) = eps(sigma(x a diag(d) N + b))
//! ```
//!
//! is recovered step by step by [`decompose`].

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Rational, Scalar, Side};
use crate::error::{Error, Result};
use crate::linalg::{CentralSystem, Matrix, Vector};
use crate::morphism::{Morphism, MorphismKind};
use crate::qlinalg::QMatrix;
use crate::random::Sampler;
use crate::subspace::{
    classify_affine, classify_sidedness, extend_to_flag, line_through, recognize, AffineSubspace, RationalAffine,
    Sidedness, SubspaceRepr, VectorSubspace,
};

/// A map `k^n -> k^n` built from invertible pieces; `Compose` applies its items
/// first to last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MapExpr {
    Compose { items: Vec<MapExpr> },
    RightScalar { a: Scalar },
    Matrix { m: Matrix },
    Auto { q: Scalar },
    Antiauto { q: Scalar },
    Translate { b: Vector },
    /// Q-linear map on coordinates `(t, x, y, z)` of all entries; column `c`
    /// is the image of the `c`-th coordinate vector.
    Qlinear { m: QMatrix },
}

impl MapExpr {
    pub fn identity() -> Self {
        MapExpr::Compose { items: Vec::new() }
    }

    pub fn componentwise(m: &Morphism) -> Self {
        match m.kind() {
            MorphismKind::Automorphism => MapExpr::Auto { q: m.q().clone() },
            MorphismKind::AntiAutomorphism => MapExpr::Antiauto { q: m.q().clone() },
        }
    }

    /// Additive bijection of `k^n` that swaps the `i` and `j` coordinates of the
    /// first entry only. It is Q-linear but not semilinear.
    pub fn shear(alg: &Algebra, n: usize) -> Result<Self> {
        if alg.is_commutative() {
            return Err(Error::InvalidAlgebra("the shear needs a quaternion algebra".into()));
        }
        let mut m = QMatrix::identity(4 * n);
        for (r, c) in [(1, 1), (2, 2)] {
            m[(r, c)] = Rational::from_integer(0.into());
        }
        m[(1, 2)] = Rational::from_integer(1.into());
        m[(2, 1)] = Rational::from_integer(1.into());
        Ok(MapExpr::Qlinear { m })
    }

    fn morphism(&self) -> Option<Result<Morphism>> {
        match self {
            MapExpr::Auto { q } => Some(Morphism::inner(q.clone())),
            MapExpr::Antiauto { q } => Some(Morphism::anti(q.clone())),
            _ => None,
        }
    }

    /// Checks sizes, membership in the algebra and invertibility of every node.
    pub fn validate(&self, alg: &Algebra, n: usize) -> Result<()> {
        let d = alg.degree();
        match self {
            MapExpr::Compose { items } => items.iter().try_for_each(|it| it.validate(alg, n)),
            MapExpr::RightScalar { a } => {
                alg.check(a)?;
                if a.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(())
            }
            MapExpr::Matrix { m } => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: if m.nrows() != n { m.nrows() } else { m.ncols() },
                    });
                }
                m.rows().iter().flat_map(|r| &r.0).try_for_each(|x| alg.check(x))?;
                if !m.is_invertible(alg) {
                    return Err(Error::SingularMatrix);
                }
                Ok(())
            }
            MapExpr::Auto { q } | MapExpr::Antiauto { q } => {
                alg.check(q)?;
                self.morphism().expect("morphism node").map(|_| ())
            }
            MapExpr::Translate { b } => {
                if b.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: b.len(),
                    });
                }
                b.0.iter().try_for_each(|x| alg.check(x))
            }
            MapExpr::Qlinear { m } => {
                if m.nrows() != d * n || m.ncols() != d * n {
                    return Err(Error::DimensionMismatch {
                        expected: d * n,
                        found: if m.nrows() != d * n { m.nrows() } else { m.ncols() },
                    });
                }
                if m.rank() != d * n {
                    return Err(Error::SingularMatrix);
                }
                Ok(())
            }
        }
    }
}

pub fn eval_map(alg: &Algebra, f: &MapExpr, x: &Vector) -> Result<Vector> {
    match f {
        MapExpr::Compose { items } => items.iter().try_fold(x.clone(), |acc, it| eval_map(alg, it, &acc)),
        MapExpr::RightScalar { a } => Ok(x.scale(alg, a, Side::Right)),
        MapExpr::Matrix { m } => {
            if m.nrows() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: m.nrows(),
                    found: x.len(),
                });
            }
            Ok(x.mul_matrix(alg, m))
        }
        MapExpr::Auto { .. } | MapExpr::Antiauto { .. } => {
            let m = f.morphism().expect("morphism node")?;
            Ok(x.map_entries(alg, &m))
        }
        MapExpr::Translate { b } => {
            if b.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.len(),
                    found: x.len(),
                });
            }
            Ok(x.add(b))
        }
        MapExpr::Qlinear { m } => {
            let coords = x.to_rational(alg);
            if m.ncols() != coords.len() {
                return Err(Error::DimensionMismatch {
                    expected: m.ncols(),
                    found: coords.len(),
                });
            }
            Ok(Vector::from_rational(alg, &m.apply(&coords)))
        }
    }
}

/// Image of an affine subspace under a Q-affine map, recognized as left or right.
fn rational_image(alg: &Algebra, a: &AffineSubspace, f: impl Fn(&Vector) -> Result<Vector>) -> Result<AffineSubspace> {
    let set = RationalAffine::of(alg, a);
    let p = f(&set.point)?;
    let n = p.len();
    let imgs = set
        .basis
        .iter()
        .map(|v| Ok(f(&set.point.add(v))?.sub(&p).to_rational(alg)))
        .collect::<Result<Vec<_>>>()?;
    let (rref, _) = QMatrix::from_rows(alg.degree() * n, imgs).rref();
    let basis = rref.rows().map(|r| Vector::from_rational(alg, r)).collect();
    recognize(alg, &RationalAffine { point: p, basis }, a.side())
}

fn with_rows(alg: &Algebra, point: Vector, rows: Vec<Vector>, side: Side) -> AffineSubspace {
    let n = point.len();
    let m = Matrix::new(n, rows).expect("rows of the ambient length");
    AffineSubspace::new(alg, point, VectorSubspace::span(alg, &m, side))
}

/// Exact image of `a`; fails with [`Error::SideUnrepresentable`] only for maps
/// outside the semilinear class (non-central matrices on right subspaces,
/// Q-linear nodes).
pub fn image_affine(alg: &Algebra, f: &MapExpr, a: &AffineSubspace) -> Result<AffineSubspace> {
    let rows = a.direction().basis();
    let side = a.side();
    match f {
        MapExpr::Compose { items } => items.iter().try_fold(a.clone(), |acc, it| image_affine(alg, it, &acc)),
        MapExpr::Translate { b } => Ok(a.translate(alg, b)),
        MapExpr::RightScalar { a: c } => {
            let p = a.point().scale(alg, c, Side::Right);
            let rows = match side {
                Side::Left => rows.iter().map(|v| v.scale(alg, c, Side::Right)).collect(),
                Side::Right => rows.to_vec(),
            };
            Ok(with_rows(alg, p, rows, side))
        }
        MapExpr::Matrix { m } if side == Side::Left || m.is_central() => {
            let p = a.point().mul_matrix(alg, m);
            Ok(with_rows(alg, p, rows.iter().map(|v| v.mul_matrix(alg, m)).collect(), side))
        }
        MapExpr::Matrix { .. } | MapExpr::Qlinear { .. } => rational_image(alg, a, |x| eval_map(alg, f, x)),
        MapExpr::Auto { .. } | MapExpr::Antiauto { .. } => {
            let m = f.morphism().expect("morphism node")?;
            let p = a.point().map_entries(alg, &m);
            let rows = rows.iter().map(|v| v.map_entries(alg, &m)).collect();
            let side = if m.is_anti() && !alg.is_commutative() {
                side.opposite()
            } else {
                side
            };
            Ok(with_rows(alg, p, rows, side))
        }
    }
}

/// A map known only through its values.
pub trait PointMap {
    fn ambient(&self) -> usize;

    fn eval(&self, x: &Vector) -> Result<Vector>;

    /// The symbolic description, when there is one.
    fn structure(&self) -> Option<&MapExpr> {
        None
    }
}

/// A [`MapExpr`] on `k^n`.
#[derive(Clone, Debug)]
pub struct ExprMap {
    alg: Algebra,
    n: usize,
    expr: MapExpr,
}

impl ExprMap {
    pub fn new(alg: &Algebra, n: usize, expr: MapExpr) -> Result<Self> {
        expr.validate(alg, n)?;
        Ok(ExprMap {
            alg: alg.clone(),
            n,
            expr,
        })
    }

    pub fn expr(&self) -> &MapExpr {
        &self.expr
    }
}

impl PointMap for ExprMap {
    fn ambient(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        eval_map(&self.alg, &self.expr, x)
    }

    fn structure(&self) -> Option<&MapExpr> {
        Some(&self.expr)
    }
}

/// A closure viewed as a point map.
pub struct FnMap<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Vector) -> Vector> FnMap<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnMap { n, f }
    }
}

impl<F: Fn(&Vector) -> Vector> PointMap for FnMap<F> {
    fn ambient(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok((self.f)(x))
    }
}

/// Hides the structure of a map so that only evaluation is used.
pub struct Opaque<'a>(pub &'a dyn PointMap);

impl PointMap for Opaque<'_> {
    fn ambient(&self) -> usize {
        self.0.ambient()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        self.0.eval(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LineSameSide,
    LineOppositeSide,
    NotALine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineTrial {
    pub input: SubspaceRepr,
    pub side_in: Side,
    pub method: Method,
    /// Points of the input line that were evaluated (sampled method only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vector>,
    pub image: Option<SubspaceRepr>,
    pub side_out: Option<Side>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub line_same_side: usize,
    pub line_opposite_side: usize,
    pub not_a_line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineImageReport {
    pub trials: Vec<LineTrial>,
    pub summary: VerdictCounts,
}

impl LineImageReport {
    fn from_trials(trials: Vec<LineTrial>) -> Self {
        let mut summary = VerdictCounts::default();
        for t in &trials {
            match t.verdict {
                Verdict::LineSameSide => summary.line_same_side += 1,
                Verdict::LineOppositeSide => summary.line_opposite_side += 1,
                Verdict::NotALine => summary.not_a_line += 1,
            }
        }
        LineImageReport { trials, summary }
    }

    pub fn all_lines(&self) -> bool {
        self.summary.not_a_line == 0
    }

    pub fn first_failure(&self) -> Option<&LineTrial> {
        self.trials.iter().find(|t| t.verdict == Verdict::NotALine)
    }
}

fn exact_line_trial(alg: &Algebra, f: &MapExpr, line: &AffineSubspace) -> LineTrial {
    let image = image_affine(alg, f, line).ok().filter(|img| img.dim() == 1);
    let verdict = match &image {
        None => Verdict::NotALine,
        Some(img) if img.side() == line.side() || classify_affine(alg, img) == Sidedness::TwoSided => {
            Verdict::LineSameSide
        }
        Some(_) => Verdict::LineOppositeSide,
    };
    LineTrial {
        input: line.to_repr(),
        side_in: line.side(),
        method: Method::Exact,
        points: Vec::new(),
        side_out: image.as_ref().map(|img| img.side()),
        image: image.map(|img| img.to_repr()),
        verdict,
    }
}

/// Fits the images of `points` (two distinct ones first) by a line of either side.
pub fn fit_line(alg: &Algebra, images: &[Vector], preferred: Side) -> Option<AffineSubspace> {
    let (q0, q1) = (images.first()?, images.get(1)?);
    [preferred, preferred.opposite()].into_iter().find_map(|side| {
        let cand = line_through(alg, q0, q1, side).ok()?;
        images.iter().all(|q| cand.contains(alg, q)).then_some(cand)
    })
}

fn sampled_line_trial(
    alg: &Algebra,
    f: &dyn PointMap,
    line: &AffineSubspace,
    count: usize,
    rng: &mut Sampler,
) -> Result<LineTrial> {
    let mut coefs = vec![Scalar::zero(), Scalar::one()];
    while coefs.len() < count.max(5) {
        coefs.push(rng.scalar(alg));
    }
    let points: Vec<Vector> = coefs.iter().map(|c| line.point_at(alg, std::slice::from_ref(c))).collect();
    let images = points.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
    let image = fit_line(alg, &images, line.side());
    let verdict = match &image {
        None => Verdict::NotALine,
        Some(img) if img.side() == line.side() => Verdict::LineSameSide,
        Some(_) => Verdict::LineOppositeSide,
    };
    Ok(LineTrial {
        input: line.to_repr(),
        side_in: line.side(),
        method: Method::Sampled,
        points,
        side_out: image.as_ref().map(|img| img.side()),
        image: image.map(|img| img.to_repr()),
        verdict,
    })
}

/// Random line of one of several shapes: generic, two-sided, or along a coordinate axis.
pub fn probe_line(alg: &Algebra, n: usize, rng: &mut Sampler) -> AffineSubspace {
    let side = rng.side();
    let p = rng.vector(alg, n);
    let d = match rng.index(4) {
        0 => loop {
            let d = rng.central_vector(n);
            if !d.is_zero() {
                break d;
            }
        },
        1 => Vector::unit(n, rng.index(n)),
        2 if n >= 2 => {
            let i = rng.index(n);
            let j = (i + 1 + rng.index(n - 1)) % n;
            Vector::unit(n, i).add(&Vector::unit(n, j))
        }
        _ => rng.nonzero_vector(alg, n),
    };
    line_through(alg, &p, &p.add(&d), side).expect("nonzero direction")
}

/// Images of random lines, computed exactly for structured maps and by
/// sampling `points` collinear points otherwise.
pub fn check_line_preservation(
    alg: &Algebra,
    f: &dyn PointMap,
    trials: usize,
    points: usize,
    rng: &mut Sampler,
) -> Result<LineImageReport> {
    let n = f.ambient();
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let line = probe_line(alg, n, rng);
        let trial = match f.structure() {
            Some(expr) => exact_line_trial(alg, expr, &line),
            None => sampled_line_trial(alg, f, &line, points, rng)?,
        };
        out.push(trial);
    }
    Ok(LineImageReport::from_trials(out))
}

/// Re-evaluates a line trial; true when it still shows the map failing to send the line to a line.
pub fn recheck_not_a_line(alg: &Algebra, f: &dyn PointMap, trial: &LineTrial) -> Result<bool> {
    let line = AffineSubspace::from_repr(alg, &trial.input)?;
    match (trial.method, f.structure()) {
        (Method::Exact, Some(expr)) => Ok(exact_line_trial(alg, expr, &line).verdict == Verdict::NotALine),
        _ => {
            let images = trial.points.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
            Ok(trial.points.iter().all(|p| line.contains(alg, p)) && fit_line(alg, &images, line.side()).is_none())
        }
    }
}

/// Counterexample to additivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditivityWitness {
    pub x: Vector,
    /// Absent for a failure of `f(-x) = -f(x)`.
    pub y: Option<Vector>,
}

impl AdditivityWitness {
    /// True when the witness still refutes additivity of `f`.
    pub fn recheck(&self, f: &dyn PointMap) -> Result<bool> {
        let fx = f.eval(&self.x)?;
        Ok(match &self.y {
            Some(y) => f.eval(&self.x.add(y))? != fx.add(&f.eval(y)?),
            None => f.eval(&self.x.neg())? != fx.neg(),
        })
    }
}

/// Samples `f(x + y) = f(x) + f(y)` and `f(-x) = -f(x)`.
pub fn check_additivity(
    alg: &Algebra,
    f: &dyn PointMap,
    trials: usize,
    rng: &mut Sampler,
) -> Result<Option<AdditivityWitness>> {
    let n = f.ambient();
    for _ in 0..trials {
        let x = rng.vector(alg, n);
        let y = rng.vector(alg, n);
        let fx = f.eval(&x)?;
        if f.eval(&x.add(&y))? != fx.add(&f.eval(&y)?) {
            return Ok(Some(AdditivityWitness { x, y: Some(y) }));
        }
        if f.eval(&x.neg())? != fx.neg() {
            return Ok(Some(AdditivityWitness { x, y: None }));
        }
    }
    Ok(None)
}

/// A Q-linear map of the algebra given by its values on the basis `1, i, j, k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarTable(pub Vec<Scalar>);

impl ScalarTable {
    pub fn of(alg: &Algebra, f: impl Fn(&Scalar) -> Scalar) -> Self {
        ScalarTable(alg.basis().iter().map(f).collect())
    }

    pub fn eval(&self, c: &Scalar) -> Scalar {
        self.0
            .iter()
            .zip(c.coords())
            .fold(Scalar::zero(), |acc, (v, t)| &acc + &v.scale(t))
    }
}

/// The twist `alpha` with `h(c x) = h(x) alpha(c)`, read off at the base point `x`.
fn alpha_at(alg: &Algebra, h: &dyn Fn(&Vector) -> Result<Vector>, x: &Vector) -> Result<ScalarTable> {
    let y = h(x)?;
    let j = y
        .leading_index()
        .ok_or_else(|| Error::InconsistentAlpha(format!("map vanishes at {x:?}")))?;
    let yj_inv = alg.inv(&y[j])?;
    let mut values = Vec::new();
    for u in alg.basis() {
        let z = h(&x.scale(alg, &u, Side::Left))?;
        let val = alg.mul(&yj_inv, &z[j]);
        if z != y.scale(alg, &val, Side::Right) {
            return Err(Error::InconsistentAlpha(format!(
                "f({u} x) is not f(x) times a scalar at x = {x:?}"
            )));
        }
        values.push(val);
    }
    Ok(ScalarTable(values))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaReport {
    pub table: ScalarTable,
    pub bases_checked: usize,
    pub pairs_checked: usize,
}

/// Extracts `alpha` from a map sending left lines to right lines.
///
/// The table is read at `(1, 1, ..)`, cross-checked at `e_1`, `e_2` and
/// random base points, and then tested for Q-linearity and for reversing
/// products on `pairs` random pairs.
pub fn extract_alpha(alg: &Algebra, f: &dyn PointMap, pairs: usize, rng: &mut Sampler) -> Result<AlphaReport> {
    let n = f.ambient();
    let f0 = f.eval(&Vector::zeros(n))?;
    let h = |x: &Vector| Ok(f.eval(x)?.sub(&f0));

    let mut bases = vec![Vector((0..n).map(|_| Scalar::one()).collect()), Vector::unit(n, 0)];
    if n >= 2 {
        bases.push(Vector::unit(n, 1));
    }
    for _ in 0..3 {
        bases.push(rng.nonzero_vector(alg, n));
    }
    let table = alpha_at(alg, &h, &bases[0])?;
    for x in &bases[1..] {
        let other = alpha_at(alg, &h, x)?;
        if other != table {
            return Err(Error::InconsistentAlpha(format!(
                "tables at {:?} and {x:?} differ",
                bases[0]
            )));
        }
    }

    let e = &bases[1];
    let he = h(e)?;
    for _ in 0..pairs {
        let c = rng.scalar(alg);
        let d = rng.scalar(alg);
        let (ac, ad) = (table.eval(&c), table.eval(&d));
        for (s, val) in [(&c, &ac), (&d, &ad)] {
            if h(&e.scale(alg, s, Side::Left))? != he.scale(alg, val, Side::Right) {
                return Err(Error::InconsistentAlpha(format!("table is not Q-linear at {s}")));
            }
        }
        let cd = alg.mul(&c, &d);
        let rev = alg.mul(&ad, &ac);
        if table.eval(&cd) != rev || h(&e.scale(alg, &cd, Side::Left))? != he.scale(alg, &rev, Side::Right) {
            return Err(Error::NotAntiMultiplicative(format!("alpha({c} * {d}) != alpha({d}) alpha({c})")));
        }
    }
    Ok(AlphaReport {
        table,
        bases_checked: bases.len(),
        pairs_checked: pairs,
    })
}

/// Finds `q` with `table(x) = q^-1 x q` (or `q^-1 conj(x) q`).
pub fn identify_morphism(alg: &Algebra, table: &ScalarTable, kind: MorphismKind) -> Result<Morphism> {
    if table.0.len() != alg.degree() {
        return Err(Error::DimensionMismatch {
            expected: alg.degree(),
            found: table.0.len(),
        });
    }
    let candidate = if alg.is_commutative() {
        Morphism::new(kind, Scalar::one())?
    } else {
        // q table(x) = x' q for the generators x
        let mut sys = CentralSystem::new(alg, 1);
        for x in alg.generators() {
            let tx = table.eval(&x);
            let xs = match kind {
                MorphismKind::Automorphism => x.clone(),
                MorphismKind::AntiAutomorphism => x.conj(),
            };
            sys.constrain(|q| Vector(vec![&alg.mul(&q[0], &tx) - &alg.mul(&xs, &q[0])]));
        }
        let sol = sys.solve();
        let q = sol
            .first()
            .map(|v| v[0].clone())
            .ok_or_else(|| Error::NoSolution(format!("no conjugating element for the {kind:?} table")))?;
        Morphism::new(kind, q)?
    };
    for (u, val) in alg.basis().iter().zip(&table.0) {
        if candidate.apply(alg, u) != *val {
            return Err(Error::NoSolution(format!(
                "conjugation by {} does not reproduce the table at {u}",
                candidate.q()
            )));
        }
    }
    Ok(candidate)
}

/// `M = diag(a_1, ..., a_n) N` with `N` central.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralFactorization {
    pub diag: Vec<Scalar>,
    #[serde(rename = "N")]
    pub n: Matrix,
}

/// Splits `M` into row scales and a central matrix whose rows lead with 1.
pub fn factor_matrix_central(alg: &Algebra, m: &Matrix) -> Result<CentralFactorization> {
    let mut diag = Vec::with_capacity(m.nrows());
    let mut rows = Vec::with_capacity(m.nrows());
    for (i, row) in m.rows().iter().enumerate() {
        let lead = row.leading_index().ok_or(Error::ZeroRow { row: i })?;
        let a = row[lead].clone();
        let normalized = row.scale(alg, &alg.inv(&a)?, Side::Left);
        if !normalized.is_central() {
            return Err(Error::NotCentralRow { row: i });
        }
        diag.push(a);
        rows.push(normalized);
    }
    if let Some(a0) = diag.first() {
        let inv = alg.inv(a0)?;
        if let Some(j) = diag.iter().position(|aj| !alg.mul(&inv, aj).is_central()) {
            return Err(Error::NonCentralRatio { i: 0, j });
        }
    }
    let n = Matrix::new(m.ncols(), rows)?;
    if !n.is_invertible(alg) {
        return Err(Error::SingularMatrix);
    }
    Ok(CentralFactorization { diag, n })
}

/// A right line whose image under `x -> x M` is not a right line, for the
/// row failures of [`factor_matrix_central`].
pub fn right_line_witness(alg: &Algebra, m: &Matrix, err: &Error) -> Option<AffineSubspace> {
    let n = m.ncols();
    let dir = match *err {
        Error::NotCentralRow { row } => Vector::unit(n, row),
        Error::NonCentralRatio { i, j } => Vector::unit(n, i).add(&Vector::unit(n, j)),
        _ => return None,
    };
    line_through(alg, &Vector::zeros(n), &dir, Side::Right).ok()
}

/// True when `x -> x M` sends the right line to a right line.
pub fn maps_right_line_to_right_line(alg: &Algebra, m: &Matrix, line: &AffineSubspace) -> bool {
    match image_affine(alg, &MapExpr::Matrix { m: m.clone() }, line) {
        Ok(img) => img.dim() == 1 && classify_affine(alg, &img).is_right(),
        Err(_) => false,
    }
}

/// Right lines through `e_i` and `e_i + e_j` all go to right lines.
pub fn preserves_basis_right_lines(alg: &Algebra, m: &Matrix) -> bool {
    let n = m.ncols();
    let zero = Vector::zeros(n);
    let mut dirs: Vec<Vector> = (0..n).map(|i| Vector::unit(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            dirs.push(Vector::unit(n, i).add(&Vector::unit(n, j)));
        }
    }
    dirs.iter().all(|d| {
        let line = line_through(alg, &zero, d, Side::Right).expect("nonzero direction");
        maps_right_line_to_right_line(alg, m, &line)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SameSide,
    SideSwap,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SameSide => "same_side",
            Mode::SideSwap => "side_swap",
        }
    }
}

/// `x -> eps(sigma(x a diag(d) N + b))`, the last step present only when `anti` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemilinearForm {
    #[serde(default)]
    pub anti: Option<Morphism>,
    pub sigma: Morphism,
    pub a: Scalar,
    pub diag: Vec<Scalar>,
    #[serde(rename = "N")]
    pub n: Matrix,
    pub b: Vector,
}

impl SemilinearForm {
    pub fn identity(n: usize) -> Self {
        SemilinearForm {
            anti: None,
            sigma: Morphism::identity(),
            a: Scalar::one(),
            diag: vec![Scalar::one(); n],
            n: Matrix::identity(n),
            b: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mode(&self) -> Mode {
        if self.anti.is_some() {
            Mode::SideSwap
        } else {
            Mode::SameSide
        }
    }

    pub fn validate(&self, alg: &Algebra) -> Result<()> {
        let n = self.dim();
        if self.n.nrows() != n || self.n.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n.nrows(),
            });
        }
        if self.b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.b.len(),
            });
        }
        if self.a.is_zero() || self.diag.iter().any(Scalar::is_zero) {
            return Err(Error::DivisionByZero);
        }
        if !self.n.is_central() {
            return Err(Error::Parse("N must have central entries".into()));
        }
        if self.sigma.is_anti() {
            return Err(Error::Parse("sigma must be an automorphism".into()));
        }
        if self.anti.as_ref().is_some_and(|e| !e.is_anti()) {
            return Err(Error::Parse("anti must be an anti-automorphism".into()));
        }
        for x in [&self.a, self.sigma.q()]
            .into_iter()
            .chain(&self.diag)
            .chain(&self.b.0)
            .chain(self.anti.iter().map(Morphism::q))
        {
            alg.check(x)?;
        }
        self.to_expr().validate(alg, n)
    }

    /// Rows `diag_i N_i` of the matrix applied after the right scalar.
    fn scaled_rows(&self, alg: &Algebra) -> Matrix {
        Matrix::from_rows(
            self.n
                .rows()
                .iter()
                .zip(&self.diag)
                .map(|(r, d)| r.scale(alg, d, Side::Left))
                .collect(),
        )
    }

    pub fn to_expr(&self) -> MapExpr {
        let rows = Matrix::from_rows(
            self.n
                .rows()
                .iter()
                .zip(&self.diag)
                .map(|(r, d)| Vector(r.0.iter().map(|x| scale_by_central(d, x)).collect()))
                .collect(),
        );
        let mut items = vec![
            MapExpr::RightScalar { a: self.a.clone() },
            MapExpr::Matrix { m: rows },
            MapExpr::Translate { b: self.b.clone() },
            MapExpr::componentwise(&self.sigma),
        ];
        if let Some(e) = &self.anti {
            items.push(MapExpr::componentwise(e));
        }
        MapExpr::Compose { items }
    }

    pub fn to_map(&self, alg: &Algebra) -> Result<ExprMap> {
        ExprMap::new(alg, self.dim(), self.to_expr())
    }

    /// Canonical representative: `sigma` folded into `anti` when present,
    /// `a` the leading entry of the first row, `diag` central with `d_1 = 1`,
    /// rows of `N` leading with 1.
    pub fn normalize(&self, alg: &Algebra) -> Result<Self> {
        let (anti, sigma) = match (&self.anti, alg.is_commutative()) {
            (_, true) => (None, Morphism::identity()),
            (Some(e), false) => (Some(Morphism::compose(alg, e, &self.sigma)), Morphism::identity()),
            (None, false) => (None, self.sigma.clone()),
        };
        let full = Matrix::from_rows(
            self.scaled_rows(alg)
                .rows()
                .iter()
                .map(|r| r.scale(alg, &self.a, Side::Left))
                .collect(),
        );
        let fac = factor_matrix_central(alg, &full)?;
        let a = fac.diag[0].clone();
        let a_inv = alg.inv(&a)?;
        let diag = fac.diag.iter().map(|d| alg.mul(&a_inv, d)).collect();
        Ok(SemilinearForm {
            anti,
            sigma,
            a,
            diag,
            n: fac.n,
            b: self.b.clone(),
        })
    }

    /// Random canonical form.
    pub fn random(alg: &Algebra, n: usize, mode: Mode, rng: &mut Sampler) -> Self {
        let commutative = alg.is_commutative();
        let sigma = if mode == Mode::SameSide && !commutative {
            rng.morphism(alg, false)
        } else {
            Morphism::identity()
        };
        let anti = (mode == Mode::SideSwap && !commutative).then(|| rng.morphism(alg, true));
        let mut diag = vec![Scalar::one()];
        diag.extend((1..n).map(|_| Scalar::from_rational(rng.nonzero_rational())));
        let central = rng.invertible_central(n);
        let rows = central
            .rows()
            .map(|r| {
                let v = Vector(r.iter().cloned().map(Scalar::from_rational).collect());
                let lead = v.leading_index().expect("invertible rows are nonzero");
                let inv = v[lead].0[0].recip();
                v.scale_rational(&inv)
            })
            .collect();
        SemilinearForm {
            anti,
            sigma,
            a: rng.nonzero_scalar(alg),
            diag,
            n: Matrix::from_rows(rows),
            b: rng.vector(alg, n),
        }
    }

    /// The same map with its central factors spread over `a`, `diag`, `N` and `sigma`.
    pub fn scramble(&self, alg: &Algebra, rng: &mut Sampler) -> Self {
        let mut out = self.clone();
        let s = Scalar::from_rational(rng.nonzero_rational());
        out.a = alg.mul(&self.a, &s);
        let s_inv = alg.inv(&s).expect("nonzero");
        let mut rows = Vec::new();
        for (i, row) in self.n.rows().iter().enumerate() {
            let c = rng.nonzero_rational();
            rows.push(row.scale_rational(&c));
            out.diag[i] = alg.mul(&s_inv, &self.diag[i]).scale(&c.recip());
        }
        out.n = Matrix::from_rows(rows);
        let t = rng.nonzero_rational();
        out.sigma = Morphism::new(self.sigma.kind(), self.sigma.q().scale(&t)).expect("nonzero");
        out
    }
}

fn scale_by_central(d: &Scalar, x: &Scalar) -> Scalar {
    // x is central, so d x = x d is coordinatewise scaling
    debug_assert!(x.is_central());
    d.scale(x.t())
}

/// Probe directions inside the coordinate plane `span(e_p, e_q)`.
fn mode_probes(alg: &Algebra, n: usize) -> Vec<AffineSubspace> {
    let zero = Vector::zeros(n);
    let mut out = Vec::new();
    let planes = if n >= 3 { vec![(0, 1), (n - 2, n - 1)] } else { vec![(0, 1)] };
    for (p, q) in planes {
        for c in [Scalar::i(), Scalar::j(), Scalar::ints(0, 1, 0, 1), Scalar::ints(1, 1, 1, 0)] {
            let mut d = Vector::unit(n, p);
            d.0[q] = c;
            out.push(line_through(alg, &zero, &d, Side::Left).expect("nonzero direction"));
        }
    }
    out
}

/// Decides whether purely left lines in two-sided planes stay left or turn right.
pub fn detect_mode(alg: &Algebra, f: &dyn PointMap, rng: &mut Sampler) -> Result<Mode> {
    if alg.is_commutative() {
        return Ok(Mode::SameSide);
    }
    let n = f.ambient();
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let mut mode = None;
    for probe in mode_probes(alg, n) {
        debug_assert_eq!(classify_affine(alg, &probe), Sidedness::PurelyLeft);
        let trial = sampled_line_trial(alg, f, &probe, 5, rng)?;
        let seen = match trial.verdict {
            Verdict::LineSameSide => Mode::SameSide,
            Verdict::LineOppositeSide => Mode::SideSwap,
            Verdict::NotALine => {
                return Err(Error::ModeMismatch(format!(
                    "probe line through {:?} is not mapped to a line",
                    probe.direction().basis()[0]
                )))
            }
        };
        match mode {
            None => mode = Some(seen),
            Some(m) if m != seen => {
                return Err(Error::ModeMismatch("probe lines disagree about the side of their images".into()))
            }
            _ => {}
        }
    }
    Ok(mode.expect("at least one probe"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub additivity_trials: usize,
    pub alpha_pairs: usize,
    pub reconstruction_points: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            additivity_trials: 20,
            alpha_pairs: 10,
            reconstruction_points: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub mode: Mode,
    pub form: SemilinearForm,
    /// Same-side maps of `k^2` are checked, not covered by the structure result.
    pub verified_only: bool,
}

/// Recovers the normal form of `f` from evaluations.
///
/// Stages: translation `b' = f(0)`; additivity of `h = f - b'`; mode; for
/// side-swapping maps the twist `eps` and `h <- eps^-1 h`; `sigma` from
/// `h(c e_1) = sigma(c) h(e_1)`; the central factorization of the rows of
/// `sigma^-1 h`; finally reconstruction on random points.
pub fn decompose(
    alg: &Algebra,
    f: &dyn PointMap,
    mode: Option<Mode>,
    opts: DecomposeOptions,
    rng: &mut Sampler,
) -> Result<Decomposition> {
    let n = f.ambient();
    if n == 0 {
        return Err(Error::DimensionTooSmall { n, min: 1 });
    }
    let f0 = f.eval(&Vector::zeros(n)).map_err(|e| e.at_stage("translation"))?;
    let h = FnMapResult {
        n,
        f: |x: &Vector| Ok(f.eval(x)?.sub(&f0)),
    };

    if let Some(w) = check_additivity(alg, &h, opts.additivity_trials, rng).map_err(|e| e.at_stage("additivity"))? {
        return Err(Error::NotAdditive(format!("witness {:?}", w)).at_stage("additivity"));
    }

    let mode = match mode {
        Some(m) => m,
        None => detect_mode(alg, f, rng).map_err(|e| e.at_stage("mode"))?,
    };
    let mode = if alg.is_commutative() { Mode::SameSide } else { mode };

    let eps = match mode {
        Mode::SameSide => None,
        Mode::SideSwap => {
            let report = extract_alpha(alg, &h, opts.alpha_pairs, rng).map_err(|e| e.at_stage("alpha"))?;
            Some(
                identify_morphism(alg, &report.table, MorphismKind::AntiAutomorphism)
                    .map_err(|e| e.at_stage("alpha"))?,
            )
        }
    };
    let eps_inv = eps.as_ref().map(Morphism::inverse);
    let untwist = |v: Vector| match &eps_inv {
        Some(e) => v.map_entries(alg, e),
        None => v,
    };
    let h1 = |x: &Vector| -> Result<Vector> { Ok(untwist(h.eval(x)?)) };

    let sigma = extract_sigma(alg, n, &h1, rng).map_err(|e| e.at_stage("sigma"))?;
    let sigma_inv = sigma.inverse();

    let rows = (0..n)
        .map(|i| Ok(h1(&Vector::unit(n, i))?.map_entries(alg, &sigma_inv)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("central_factor"))?;
    let m = Matrix::new(n, rows)?;
    let fac = factor_matrix_central(alg, &m).map_err(|e| e.at_stage("central_factor"))?;
    let a = fac.diag[0].clone();
    let a_inv = alg.inv(&a)?;
    let diag = fac.diag.iter().map(|d| alg.mul(&a_inv, d)).collect();
    let b = untwist(f0.clone()).map_entries(alg, &sigma_inv);

    let raw = SemilinearForm {
        anti: eps,
        sigma,
        a,
        diag,
        n: fac.n,
        b,
    };
    let form = raw.normalize(alg).map_err(|e| e.at_stage("central_factor"))?;

    let rebuilt = form.to_map(alg).map_err(|e| e.at_stage("reconstruction"))?;
    let mut probes: Vec<Vector> = (0..n).map(|i| Vector::unit(n, i)).collect();
    probes.push(Vector::zeros(n));
    probes.extend((0..opts.reconstruction_points).map(|_| rng.vector(alg, n)));
    for x in &probes {
        let (want, got) = (f.eval(x)?, rebuilt.eval(x)?);
        if want != got {
            return Err(Error::ReconstructionMismatch(format!("at {x:?}: expected {want:?}, rebuilt {got:?}"))
                .at_stage("reconstruction"));
        }
    }
    Ok(Decomposition {
        mode,
        verified_only: mode == Mode::SameSide && n == 2 && !alg.is_commutative(),
        form,
    })
}

struct FnMapResult<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Vector) -> Result<Vector>> PointMap for FnMapResult<F> {
    fn ambient(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        (self.f)(x)
    }
}

/// `sigma` from `e_1`, cross-validated on the other basis vectors and random points.
fn extract_sigma(
    alg: &Algebra,
    n: usize,
    h: &dyn Fn(&Vector) -> Result<Vector>,
    rng: &mut Sampler,
) -> Result<Morphism> {
    let e1 = Vector::unit(n, 0);
    let y = h(&e1)?;
    let j = y
        .leading_index()
        .ok_or_else(|| Error::InconsistentAlpha("map vanishes at e_1".into()))?;
    let yj_inv = alg.inv(&y[j])?;
    let table = ScalarTable::of(alg, |u| {
        h(&e1.scale(alg, u, Side::Left))
            .map(|z| alg.mul(&z[j], &yj_inv))
            .unwrap_or_else(|_| Scalar::zero())
    });
    let sigma = identify_morphism(alg, &table, MorphismKind::Automorphism)?;

    let mut bases: Vec<Vector> = (0..n).map(|i| Vector::unit(n, i)).collect();
    bases.extend((0..3).map(|_| rng.nonzero_vector(alg, n)));
    let mut scalars = alg.generators();
    scalars.push(rng.scalar(alg));
    for x in &bases {
        let hx = h(x)?;
        for c in &scalars {
            if h(&x.scale(alg, c, Side::Left))? != hx.scale(alg, &sigma.apply(alg, c), Side::Left) {
                return Err(Error::InconsistentAlpha(format!(
                    "f({c} x) != sigma({c}) f(x) at x = {x:?}"
                )));
            }
        }
    }
    Ok(sigma)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceCheck {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub mode: Mode,
    pub checks: Vec<InstanceCheck>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Images of flags keep every dimension and stay strictly nested.
pub fn check_dimension_preservation(
    alg: &Algebra,
    f: &MapExpr,
    n: usize,
    trials: usize,
    rng: &mut Sampler,
) -> std::result::Result<(), String> {
    for _ in 0..trials {
        let side = rng.side();
        let dim = rng.range(0, n);
        let dir = rng.subspace(alg, n, dim, side);
        let a = rng.affine(alg, dir);
        let flag = extend_to_flag(alg, &a, side).map_err(|e| e.to_string())?;
        let mut prev: Option<AffineSubspace> = None;
        for (k, member) in flag.members.iter().enumerate() {
            let img = image_affine(alg, f, member).map_err(|e| format!("{e} on {:?}", member.to_repr()))?;
            if img.dim() != k {
                return Err(format!("dimension {k} subspace {:?} has image of dimension {}", member.to_repr(), img.dim()));
            }
            if let Some(p) = &prev {
                if !img.contains_subspace(alg, p) {
                    return Err(format!("image flag is not nested at step {k}"));
                }
            }
            prev = Some(img);
        }
    }
    Ok(())
}

/// Random purely left line inside a random two-sided plane.
pub fn purely_left_line_in_plane(alg: &Algebra, n: usize, rng: &mut Sampler) -> (AffineSubspace, AffineSubspace) {
    let plane_dir = rng.two_sided_subspace(alg, n, 2);
    let plane = rng.affine(alg, plane_dir);
    let basis = plane.direction().basis();
    let c = if alg.is_commutative() {
        rng.nonzero_scalar(alg)
    } else {
        rng.noncentral_scalar(alg)
    };
    let d = basis[0].add(&basis[1].scale(alg, &c, Side::Left));
    let p = plane.random_point(alg, rng);
    let line = line_through(alg, &p, &p.add(&d), Side::Left).expect("independent rows");
    (plane, line)
}

/// Checks one form against the structure statements: dimensions of images,
/// the side of images of purely left lines, and the round trip through [`decompose`].
pub fn verify_theorem_instance(
    alg: &Algebra,
    form: &SemilinearForm,
    trials: usize,
    rng: &mut Sampler,
) -> Result<TheoremReport> {
    form.validate(alg)?;
    let n = form.dim();
    let expr = form.to_expr();
    let mode = if alg.is_commutative() { Mode::SameSide } else { form.mode() };
    let mut checks = Vec::new();

    let dims = check_dimension_preservation(alg, &expr, n, trials, rng);
    checks.push(InstanceCheck {
        name: "dimension",
        passed: dims.is_ok(),
        detail: dims.err(),
    });

    if n >= 2 {
        let want = match (alg.is_commutative(), mode) {
            (true, _) => Sidedness::TwoSided,
            (false, Mode::SameSide) => Sidedness::PurelyLeft,
            (false, Mode::SideSwap) => Sidedness::PurelyRight,
        };
        let mut detail = None;
        for _ in 0..trials {
            let (plane, line) = purely_left_line_in_plane(alg, n, rng);
            debug_assert!(plane.contains_subspace(alg, &line));
            let got = image_affine(alg, &expr, &line).map(|img| classify_sidedness(alg, img.direction()));
            if got.as_ref() != Ok(&want) {
                detail = Some(format!("line {:?} has image sidedness {:?}", line.to_repr(), got));
                break;
            }
        }
        checks.push(InstanceCheck {
            name: "line_sides",
            passed: detail.is_none(),
            detail,
        });
    }

    let expected = form.normalize(alg)?;
    let rt = form
        .to_map(alg)
        .and_then(|m| decompose(alg, &m, None, DecomposeOptions::default(), rng));
    let detail = match &rt {
        Ok(d) if d.form == expected => None,
        Ok(d) => Some(format!("decomposed to {:?}", d.form)),
        Err(e) => Some(e.to_string()),
    };
    checks.push(InstanceCheck {
        name: "round_trip",
        passed: detail.is_none(),
        detail,
    });
    Ok(TheoremReport { mode, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn v(xs: &[&str]) -> Vector {
        Vector(xs.iter().map(|x| s(x)).collect())
    }

    fn m(rows: &[&[&str]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| v(r)).collect())
    }

    fn conj() -> MapExpr {
        MapExpr::componentwise(&Morphism::conjugation())
    }

    #[test]
    fn evaluation() {
        let h = Algebra::hamilton();
        let t = MapExpr::Translate { b: v(&["1", "0"]) };
        assert_eq!(eval_map(&h, &t, &v(&["0", "0"])).unwrap(), v(&["1", "0"]));
        let r = MapExpr::RightScalar { a: Scalar::i() };
        assert_eq!(eval_map(&h, &r, &v(&["1", "j"])).unwrap(), v(&["i", "-k"]));
        let c = MapExpr::Compose {
            items: vec![MapExpr::Matrix { m: Matrix::identity(2) }, conj()],
        };
        assert_eq!(eval_map(&h, &c, &v(&["i", "j"])).unwrap(), v(&["-i", "-j"]));
        assert_eq!(
            eval_map(&h, &t, &v(&["1", "2", "3"])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn map_json_schema() {
        let text = r#"{"op":"compose","items":[{"op":"right_scalar","a":"i"},{"op":"matrix","m":[[1,0],[0,2]]},
            {"op":"auto","q":[1,1,0,0]},{"op":"antiauto","q":"1"},{"op":"translate","b":[0,"j"]}]}"#;
        let f: MapExpr = serde_json::from_str(text).unwrap();
        let MapExpr::Compose { items } = &f else { panic!() };
        assert_eq!(items.len(), 5);
        let back: MapExpr = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let shear = MapExpr::shear(&Algebra::hamilton(), 1).unwrap();
        let back: MapExpr = serde_json::from_str(&serde_json::to_string(&shear).unwrap()).unwrap();
        assert_eq!(back, shear);
    }

    #[test]
    fn conjugation_swaps_sides() {
        let h = Algebra::hamilton();
        let l = line_through(&h, &v(&["0", "0"]), &v(&["1", "i"]), Side::Left).unwrap();
        let img = image_affine(&h, &conj(), &l).unwrap();
        assert_eq!(img.side(), Side::Right);
        assert_eq!(img.direction().basis(), &[v(&["1", "-i"])]);
        let mut rng = Sampler::new(1, 5);
        for _ in 0..5 {
            let p = l.random_point(&h, &mut rng);
            assert!(img.contains(&h, &eval_map(&h, &conj(), &p).unwrap()));
        }
    }

    #[test]
    fn central_matrix_keeps_two_sided_planes() {
        let h = Algebra::hamilton();
        let p = AffineSubspace::linear(VectorSubspace::coordinate(3, &[0, 1], Side::Left));
        let f = MapExpr::Matrix {
            m: m(&[&["1", "2", "0"], &["0", "1", "3"], &["1", "0", "1"]]),
        };
        let img = image_affine(&h, &f, &p).unwrap();
        assert_eq!(img.dim(), 2);
        assert_eq!(classify_affine(&h, &img), Sidedness::TwoSided);
    }

    #[test]
    fn line_preservation_verdicts() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(11, 6);
        let conj_map = ExprMap::new(&h, 2, conj()).unwrap();
        let rep = check_line_preservation(&h, &conj_map, 40, 5, &mut rng).unwrap();
        assert!(rep.all_lines());
        assert!(rep.summary.line_opposite_side > 0);
        let sampled = check_line_preservation(&h, &Opaque(&conj_map), 40, 5, &mut rng).unwrap();
        assert!(sampled.all_lines());

        let shear = ExprMap::new(&h, 2, MapExpr::shear(&h, 2).unwrap()).unwrap();
        let rep = check_line_preservation(&h, &shear, 40, 5, &mut rng).unwrap();
        let bad = rep.first_failure().expect("shear breaks some line");
        assert!(recheck_not_a_line(&h, &shear, bad).unwrap());
        let rep = check_line_preservation(&h, &Opaque(&shear), 40, 5, &mut rng).unwrap();
        let bad = rep.first_failure().expect("shear breaks some sampled line");
        assert!(recheck_not_a_line(&h, &Opaque(&shear), bad).unwrap());
    }

    #[test]
    fn additivity() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(2, 6);
        let c = ExprMap::new(&h, 2, conj()).unwrap();
        assert_eq!(check_additivity(&h, &c, 20, &mut rng).unwrap(), None);
        let t = ExprMap::new(&h, 2, MapExpr::Translate { b: v(&["1", "0"]) }).unwrap();
        let w = check_additivity(&h, &t, 20, &mut rng).unwrap().unwrap();
        assert!(w.recheck(&t).unwrap());
        assert!(!w.recheck(&c).unwrap());
    }

    #[test]
    fn alpha_tables() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(3, 6);
        let c = ExprMap::new(&h, 2, conj()).unwrap();
        let rep = extract_alpha(&h, &c, 20, &mut rng).unwrap();
        assert_eq!(rep.table.eval(&Scalar::i()), -Scalar::i());
        let with_n = MapExpr::Compose {
            items: vec![conj(), MapExpr::Matrix { m: m(&[&["2", "1"], &["1", "1"]]) }],
        };
        let rep2 = extract_alpha(&h, &ExprMap::new(&h, 2, with_n).unwrap(), 20, &mut rng).unwrap();
        assert_eq!(rep2.table, rep.table);

        let e = Morphism::anti(s("1 + i")).unwrap();
        let f = ExprMap::new(&h, 2, MapExpr::componentwise(&e)).unwrap();
        let rep = extract_alpha(&h, &f, 20, &mut rng).unwrap();
        for u in h.basis() {
            assert_eq!(rep.table.eval(&u), e.apply(&h, &u));
        }
        assert_eq!(identify_morphism(&h, &rep.table, MorphismKind::AntiAutomorphism).unwrap(), e);
    }

    #[test]
    fn morphism_identification() {
        let h = Algebra::hamilton();
        let id = ScalarTable::of(&h, |x| x.clone());
        assert_eq!(identify_morphism(&h, &id, MorphismKind::Automorphism).unwrap(), Morphism::identity());
        let cj = ScalarTable::of(&h, Scalar::conj);
        assert_eq!(
            identify_morphism(&h, &cj, MorphismKind::AntiAutomorphism).unwrap(),
            Morphism::conjugation()
        );
        let sigma = Morphism::inner(s("1 + i")).unwrap();
        let t = ScalarTable::of(&h, |x| sigma.apply(&h, x));
        let got = identify_morphism(&h, &t, MorphismKind::Automorphism).unwrap();
        assert_eq!(got.q(), &s("1 + i"));
        assert!(matches!(
            identify_morphism(&h, &cj, MorphismKind::Automorphism),
            Err(Error::NoSolution(_))
        ));
        let bogus = ScalarTable(vec![Scalar::one(), Scalar::j(), Scalar::j(), Scalar::k()]);
        assert!(identify_morphism(&h, &bogus, MorphismKind::Automorphism).is_err());
    }

    #[test]
    fn central_factorization() {
        let h = Algebra::hamilton();
        let f = factor_matrix_central(&h, &m(&[&["i", "2i"], &["3i", "4i"]])).unwrap();
        assert_eq!(f.diag, vec![s("i"), s("3i")]);
        assert_eq!(f.n, Matrix::from_rows(vec![v(&["1", "2"]), v(&["1", "4/3"])]));
        let good = m(&[&["i", "2i"], &["3i", "4i"]]);
        assert!(preserves_basis_right_lines(&h, &good));

        let bad = m(&[&["1", "i"], &["0", "1"]]);
        let err = factor_matrix_central(&h, &bad).unwrap_err();
        assert_eq!(err, Error::NotCentralRow { row: 0 });
        let w = right_line_witness(&h, &bad, &err).unwrap();
        assert!(!maps_right_line_to_right_line(&h, &bad, &w));

        let ratio = m(&[&["1", "0"], &["0", "i"]]);
        let err = factor_matrix_central(&h, &ratio).unwrap_err();
        assert_eq!(err, Error::NonCentralRatio { i: 0, j: 1 });
        let w = right_line_witness(&h, &ratio, &err).unwrap();
        assert!(!maps_right_line_to_right_line(&h, &ratio, &w));

        let id = factor_matrix_central(&h, &Matrix::identity(2)).unwrap();
        assert_eq!(id.diag, vec![Scalar::one(), Scalar::one()]);
        assert_eq!(
            factor_matrix_central(&h, &m(&[&["1", "0"], &["0", "0"]])),
            Err(Error::ZeroRow { row: 1 })
        );
    }

    #[test]
    fn decompose_examples() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(5, 6);
        let opts = DecomposeOptions::default();

        let r = ExprMap::new(&h, 2, MapExpr::RightScalar { a: Scalar::i() }).unwrap();
        let d = decompose(&h, &r, Some(Mode::SameSide), opts, &mut rng).unwrap();
        assert_eq!(d.form.a, Scalar::i());
        assert!(d.form.sigma.is_identity(&h));
        assert_eq!(d.form.n, Matrix::identity(2));
        assert_eq!(d.form.b, Vector::zeros(2));
        assert!(d.verified_only);

        let t = ExprMap::new(&h, 2, MapExpr::Translate { b: v(&["1", "0"]) }).unwrap();
        let d = decompose(&h, &t, None, opts, &mut rng).unwrap();
        assert_eq!(d.form, SemilinearForm { b: v(&["1", "0"]), ..SemilinearForm::identity(2) });

        let c = ExprMap::new(&h, 2, conj()).unwrap();
        let d = decompose(&h, &c, None, opts, &mut rng).unwrap();
        assert_eq!(d.mode, Mode::SideSwap);
        assert_eq!(d.form.anti, Some(Morphism::conjugation()));
        assert_eq!(d.form.a, Scalar::one());
        assert_eq!(d.form.n, Matrix::identity(2));

        let bad = ExprMap::new(&h, 2, MapExpr::Matrix { m: m(&[&["1", "i"], &["0", "1"]]) }).unwrap();
        match decompose(&h, &bad, Some(Mode::SameSide), opts, &mut rng) {
            Err(Error::Stage { stage, .. }) => assert!(stage == "sigma" || stage == "central_factor"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normalization_is_a_gauge() {
        let alg = Algebra::quaternion(rat(-1), rat(-3)).unwrap();
        let mut rng = Sampler::new(8, 5);
        for mode in [Mode::SameSide, Mode::SideSwap] {
            let f = SemilinearForm::random(&alg, 3, mode, &mut rng);
            assert_eq!(f.normalize(&alg).unwrap(), f);
            let g = f.scramble(&alg, &mut rng);
            assert_eq!(g.normalize(&alg).unwrap(), f);
            let (mf, mg) = (f.to_map(&alg).unwrap(), g.to_map(&alg).unwrap());
            for _ in 0..5 {
                let x = rng.vector(&alg, 3);
                assert_eq!(mf.eval(&x).unwrap(), mg.eval(&x).unwrap());
            }
        }
    }

    #[test]
    fn theorem_instances() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(9, 5);
        let rep = verify_theorem_instance(&h, &SemilinearForm::identity(3), 5, &mut rng).unwrap();
        assert!(rep.passed(), "{rep:?}");
        for mode in [Mode::SameSide, Mode::SideSwap] {
            let f = SemilinearForm::random(&h, 3, mode, &mut rng);
            let rep = verify_theorem_instance(&h, &f, 5, &mut rng).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.mode, mode);
        }
    }

    #[test]
    fn form_json() {
        let h = Algebra::hamilton();
        let mut rng = Sampler::new(4, 5);
        let f = SemilinearForm::random(&h, 2, Mode::SideSwap, &mut rng);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"N\""));
        let back: SemilinearForm = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let plain: SemilinearForm = serde_json::from_str(
            r#"{"sigma":{"kind":"automorphism","q":"1"},"a":"i","diag":[1,1],"N":[[1,0],[0,1]],"b":[0,0]}"#,
        )
        .unwrap();
        assert_eq!(plain.anti, None);
    }
}
