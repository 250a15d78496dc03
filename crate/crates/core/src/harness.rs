//! Seeded property suites with re-checkable counterexamples.
//!
//! Every check draws from its own stream, seeded by SHA-256 of the suite
//! seed and the check name, so a report depends only on the configuration.
//! A failing check carries a [`Witness`] that [`Witness::recheck`] confirms
//! independently.

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraParams, Scalar, Side};
use crate::error::{Error, Result};
use crate::linalg::{pivot_complement, row_echelon, EchelonForm, Matrix, Vector};
use crate::maps::{
    check_line_preservation, decompose, extract_alpha, factor_matrix_central, identify_morphism, image_affine,
    maps_right_line_to_right_line, preserves_basis_right_lines, recheck_not_a_line, right_line_witness,
    DecomposeOptions, ExprMap, MapExpr, Mode, Opaque, SemilinearForm,
};
use crate::morphism::MorphismKind;
use crate::qlinalg::QMatrix;
use crate::random::Sampler;
use crate::subspace::{
    bimodule_normalize, classify_affine, classify_sidedness, connect_planes, extend_to_flag, largest_side_subspace,
    line_intersection_characterization, meet_line, right_lines_in, trichotomy_witness, AffineSubspace, LineMeet,
    LinesThrough, Sidedness, SubspaceRepr, VectorSubspace,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub height: u32,
    pub n: usize,
    pub algebra: AlgebraParams,
    /// Corrupts computed echelon forms, to exercise the failure path.
    #[serde(default)]
    pub mutation: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            trials: 50,
            height: 8,
            n: 3,
            algebra: AlgebraParams::hamilton(),
            mutation: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// A concrete instance on which a property fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Echelon dimension disagrees with the pivot complement or the Q-rank.
    Echelon { side: Side, rows: Matrix, mutated: bool },
    /// `inner` lies in `outer` but is not smaller although different.
    Containment { inner: SubspaceRepr, outer: SubspaceRepr },
    /// Sidedness of `span(x, y)` disagrees with centrality of `x^-1 y`.
    RatioLine { x: Scalar, y: Scalar },
    /// More than one right line through `point` inside a purely left plane.
    RightLines { plane: SubspaceRepr, point: Vector },
    /// A line meeting a two-sided subspace partially, or a one-sided
    /// subspace without such a line (`line` absent).
    Trichotomy { subspace: SubspaceRepr, line: Option<SubspaceRepr> },
    /// Normalization fails to commute with scalars at `x`, `c`, or misses `k^k`.
    Normalization { subspace: SubspaceRepr, x: Vector, c: Scalar },
    /// Two two-sided planes that could not be connected.
    PlaneChain { first: SubspaceRepr, second: SubspaceRepr },
    /// The image of the flag through `subspace` loses a dimension.
    Dimension { form: SemilinearForm, subspace: SubspaceRepr },
    /// Decomposition does not return the normalized form.
    RoundTrip { form: SemilinearForm, opaque: bool, seed: u64, height: u32 },
    /// The twist of a side-swapping form is not recovered.
    Alpha { form: SemilinearForm, seed: u64, height: u32 },
    /// A line whose image under `map` is not a line.
    NotALine { map: MapExpr, n: usize, line: SubspaceRepr },
    /// A right line whose image under `x -> x m` is not a right line.
    RightLine { m: Matrix, line: SubspaceRepr },
    /// A map that should be rejected but decomposes.
    Unrejected { map: MapExpr, n: usize, seed: u64, height: u32 },
    /// Commutative echelon form or membership disagrees with Gaussian elimination.
    Oracle { side: Side, rows: Matrix, probe: Vector, mutated: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub status: Status,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckRecord {
    fn pass(check: &str, trials: usize) -> Self {
        CheckRecord {
            check: check.to_string(),
            status: Status::Pass,
            trials,
            detail: None,
            witness: None,
        }
    }

    fn fail(check: &str, trials: usize, detail: impl Into<String>, witness: Witness) -> Self {
        CheckRecord {
            check: check.to_string(),
            status: Status::Fail,
            trials,
            detail: Some(detail.into()),
            witness: Some(witness),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub config: SuiteConfig,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// One JSON object per line: the check records, then `{"summary": ...}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

fn corrupt(mut ef: EchelonForm) -> EchelonForm {
    ef.rows.pop();
    ef.pivots.pop();
    ef
}

fn echelon(alg: &Algebra, m: &Matrix, side: Side, mutated: bool) -> EchelonForm {
    let ef = row_echelon(alg, m, side);
    if mutated {
        corrupt(ef)
    } else {
        ef
    }
}

fn rational_span_rank(alg: &Algebra, rows: &[Vector], side: Side, n: usize) -> usize {
    let units = alg.basis();
    let coords = rows
        .iter()
        .flat_map(|r| units.iter().map(move |u| r.scale(alg, u, side).to_rational(alg)));
    QMatrix::from_rows(alg.degree() * n, coords).rank()
}

fn echelon_violation(alg: &Algebra, m: &Matrix, side: Side, mutated: bool) -> Option<String> {
    let ef = echelon(alg, m, side, mutated);
    let n = m.ncols();
    let complement = pivot_complement(alg, m, side);
    let qrank = rational_span_rank(alg, m.rows(), side, n);
    if ef.dim() != n - complement.indices.len() {
        return Some(format!("dim {} but n - #I = {}", ef.dim(), n - complement.indices.len()));
    }
    if alg.degree() * ef.dim() != qrank {
        return Some(format!("{} * dim {} but Q-rank {}", alg.degree(), ef.dim(), qrank));
    }
    None
}

/// Random matrix of random shape, rank deficient about half of the time.
fn shaped_matrix(alg: &Algebra, max_n: usize, rng: &mut Sampler) -> (Matrix, Side) {
    let n = rng.range(1, max_n);
    let rows = rng.range(1, max_n + 1);
    let side = rng.side();
    let m = if rng.coin() {
        rng.matrix(alg, rows, n)
    } else {
        let rank = rng.range(0, rows.min(n));
        rng.low_rank_matrix(alg, rows, n, rank, side)
    };
    (m, side)
}

pub fn check_pivot_dimension(alg: &Algebra, trials: usize, max_n: usize, mutated: bool, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "dimension_via_pivot_complement";
    for _ in 0..trials {
        let (m, side) = shaped_matrix(alg, max_n, rng);
        if let Some(why) = echelon_violation(alg, &m, side, mutated) {
            return CheckRecord::fail(NAME, trials, why, Witness::Echelon { side, rows: m, mutated });
        }
    }
    CheckRecord::pass(NAME, trials)
}

fn containment_violation(alg: &Algebra, w: &VectorSubspace, v: &VectorSubspace) -> Option<String> {
    if !v.contains_subspace(alg, w) {
        return Some("inner subspace is not contained in the outer one".into());
    }
    if w.dim() > v.dim() {
        return Some(format!("dim W = {} > dim V = {}", w.dim(), v.dim()));
    }
    if w.dim() == v.dim() && !w.same_points(alg, v) {
        return Some(format!("W != V but both have dimension {}", v.dim()));
    }
    match largest_side_subspace(alg, v, w.side()) {
        Ok(s) if s.contains_subspace(alg, w) => None,
        Ok(_) => Some("largest subspace of the inner side misses W".into()),
        Err(e) => Some(e.to_string()),
    }
}

/// Pairs `W <= V` of opposite sides: `W` is spanned by random elements of the
/// largest opposite-side subspace of `V`.
pub fn check_containment_dimension(alg: &Algebra, trials: usize, n: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "one_sided_containment_dimension";
    let mut strict = 0;
    for _ in 0..trials {
        let side = rng.side();
        let dim = rng.range(1, n);
        let v = if rng.index(3) == 0 {
            rng.two_sided_subspace(alg, n, dim)
        } else {
            rng.subspace(alg, n, dim, side)
        };
        let inner_side = v.side().opposite();
        let s = match largest_side_subspace(alg, &v, inner_side) {
            Ok(s) => s,
            Err(e) => {
                return CheckRecord::fail(
                    NAME,
                    trials,
                    e.to_string(),
                    Witness::Containment {
                        inner: AffineSubspace::linear(VectorSubspace::zero(n, inner_side)).to_repr(),
                        outer: AffineSubspace::linear(v).to_repr(),
                    },
                );
            }
        };
        let k = rng.range(0, s.dim());
        let gens: Vec<Vector> = (0..k)
            .map(|_| {
                s.basis().iter().fold(Vector::zeros(n), |acc, b| {
                    acc.add(&b.scale(alg, &rng.scalar(alg), inner_side))
                })
            })
            .collect();
        let w = VectorSubspace::span(alg, &Matrix::new(n, gens).expect("ambient rows"), inner_side);
        if !w.same_points(alg, &v) {
            strict += 1;
        }
        if let Some(why) = containment_violation(alg, &w, &v) {
            return CheckRecord::fail(
                NAME,
                trials,
                why,
                Witness::Containment {
                    inner: AffineSubspace::linear(w).to_repr(),
                    outer: AffineSubspace::linear(v).to_repr(),
                },
            );
        }
    }
    CheckRecord::pass(NAME, trials).with_detail(format!("{strict} proper inclusions"))
}

fn ratio_violation(alg: &Algebra, x: &Scalar, y: &Scalar, side: Side) -> Result<bool> {
    let v = VectorSubspace::span(alg, &Matrix::from_rows(vec![Vector(vec![x.clone(), y.clone()])]), side);
    let two_sided = classify_sidedness(alg, &v) == Sidedness::TwoSided;
    let central = alg.mul(&alg.inv(x)?, y).is_central();
    Ok(two_sided != central)
}

pub fn check_two_sided_lines(alg: &Algebra, trials: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "two_sided_line_central_ratio";
    let mut two_sided = 0;
    for _ in 0..trials {
        let x = rng.nonzero_scalar(alg);
        let y = match rng.index(3) {
            0 => alg.mul(&x, &Scalar::from_rational(rng.rational())),
            _ => rng.scalar(alg),
        };
        let side = rng.side();
        if alg.mul(&alg.inv(&x).expect("nonzero"), &y).is_central() {
            two_sided += 1;
        }
        if ratio_violation(alg, &x, &y, side).unwrap_or(true) {
            return CheckRecord::fail(NAME, trials, format!("span of ({x}, {y})"), Witness::RatioLine { x, y });
        }
    }
    CheckRecord::pass(NAME, trials).with_detail(format!("{two_sided} central ratios"))
}

fn right_lines_violation(alg: &Algebra, plane: &AffineSubspace, point: &Vector) -> Option<String> {
    match right_lines_in(alg, plane, point) {
        Ok(LinesThrough::Lines(ls)) if ls.len() <= 1 => None,
        Ok(LinesThrough::Lines(ls)) => Some(format!("{} right lines", ls.len())),
        Ok(LinesThrough::NotEnumerable) => Some("a right plane inside a purely left plane".into()),
        Err(e) => Some(e.to_string()),
    }
}

pub fn check_right_lines_in_left_planes(alg: &Algebra, trials: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "right_lines_in_purely_left_plane";
    if alg.is_commutative() {
        return CheckRecord::pass(NAME, 0).with_detail("no purely left planes over a field");
    }
    let mut with_line = 0;
    for t in 0..trials {
        let dir = if t % 2 == 0 {
            rng.purely_one_sided_subspace(alg, 3, 2, Side::Left)
        } else {
            rng.left_plane_with_right_line(alg, 3)
        };
        let plane = rng.affine(alg, dir);
        let point = plane.random_point(alg, rng);
        if let Some(why) = right_lines_violation(alg, &plane, &point) {
            return CheckRecord::fail(
                NAME,
                trials,
                why,
                Witness::RightLines {
                    plane: plane.to_repr(),
                    point,
                },
            );
        }
        if right_lines_in(alg, &plane, &point).ok().and_then(|l| l.count()) == Some(1) {
            with_line += 1;
        }
    }
    CheckRecord::pass(NAME, trials).with_detail(format!("{with_line} planes contain a right line"))
}

pub fn check_trichotomy(alg: &Algebra, trials: usize, lines: usize, n: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "two_sided_line_trichotomy";
    let mut one_sided = 0;
    for _ in 0..trials {
        let dim = rng.range(0, n);
        let dir = rng.two_sided_subspace(alg, n, dim);
        let a = rng.affine(alg, dir);
        let rep = line_intersection_characterization(alg, &a, lines, rng);
        if !rep.consistent() {
            let bad = rep
                .trials
                .iter()
                .find(|t| matches!(t.meet, LineMeet::Partial { .. }))
                .map(|t| t.line.to_repr());
            return CheckRecord::fail(
                NAME,
                trials,
                "two-sided subspace meets a line partially",
                Witness::Trichotomy {
                    subspace: a.to_repr(),
                    line: bad,
                },
            );
        }
        if alg.is_commutative() || n < 2 {
            continue;
        }
        let dim = rng.range(1, n - 1);
        let side = rng.side();
        let dir = rng.purely_one_sided_subspace(alg, n, dim, side);
        let b = rng.affine(alg, dir);
        let rep = line_intersection_characterization(alg, &b, 0, rng);
        if !rep.consistent() {
            return CheckRecord::fail(
                NAME,
                trials,
                "no partially meeting line found for a one-sided subspace",
                Witness::Trichotomy {
                    subspace: b.to_repr(),
                    line: None,
                },
            );
        }
        one_sided += 1;
    }
    CheckRecord::pass(NAME, trials).with_detail(format!("{one_sided} one-sided subspaces with witnesses"))
}

fn normalization_violation(alg: &Algebra, v: &VectorSubspace, x: &Vector, c: &Scalar) -> Option<String> {
    let iso = match bimodule_normalize(alg, v) {
        Ok(iso) => iso,
        Err(e) => return Some(e.to_string()),
    };
    let n = v.ambient();
    let tx = iso.apply(alg, x);
    for side in [Side::Left, Side::Right] {
        if iso.apply(alg, &x.scale(alg, c, side)) != tx.scale(alg, c, side) {
            return Some(format!("does not commute with {side} multiplication"));
        }
    }
    if iso.apply_inverse(alg, &tx) != *x {
        return Some("inverse does not undo the map".into());
    }
    let k = iso.image_dim();
    let target = VectorSubspace::coordinate(n, &(0..k).collect::<Vec<_>>(), v.side());
    let image = VectorSubspace::span(
        alg,
        &Matrix::new(n, v.basis().iter().map(|b| iso.apply(alg, b)).collect()).expect("ambient rows"),
        v.side(),
    );
    if k != v.dim() || image != target {
        return Some("image is not the first coordinate subspace".into());
    }
    None
}

pub fn check_bimodule_normalization(
    alg: &Algebra,
    trials: usize,
    samples: usize,
    n: usize,
    rng: &mut Sampler,
) -> CheckRecord {
    const NAME: &str = "bimodule_normalization";
    for _ in 0..trials {
        let dim = rng.range(0, n);
        let v = rng.two_sided_subspace(alg, n, dim);
        let v = if rng.coin() { v.with_side(alg, Side::Right).expect("two-sided") } else { v };
        for _ in 0..samples {
            let x = rng.vector(alg, n);
            let c = rng.scalar(alg);
            if let Some(why) = normalization_violation(alg, &v, &x, &c) {
                return CheckRecord::fail(
                    NAME,
                    trials,
                    why,
                    Witness::Normalization {
                        subspace: AffineSubspace::linear(v).to_repr(),
                        x,
                        c,
                    },
                );
            }
        }
    }
    CheckRecord::pass(NAME, trials)
}

fn chain_violation(alg: &Algebra, p: &AffineSubspace, q: &AffineSubspace) -> Option<String> {
    match connect_planes(alg, p, q) {
        Err(e) => Some(e.to_string()),
        Ok(chain) => {
            if let Err(e) = chain.verify(alg) {
                return Some(e.to_string());
            }
            let ends = chain.planes.first().is_some_and(|f| f.same_points(alg, p))
                && chain.planes.last().is_some_and(|l| l.same_points(alg, q));
            (!ends).then(|| "chain does not join the given planes".to_string())
        }
    }
}

pub fn check_plane_chains(alg: &Algebra, trials: usize, dims: &[usize], rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "two_sided_plane_chain";
    let mut longest = 0;
    for t in 0..trials {
        let n = dims[t % dims.len()];
        let p = {
            let d = rng.two_sided_subspace(alg, n, 2);
            rng.affine(alg, d)
        };
        let q = {
            let d = rng.two_sided_subspace(alg, n, 2);
            rng.affine(alg, d)
        };
        if let Some(why) = chain_violation(alg, &p, &q) {
            return CheckRecord::fail(
                NAME,
                trials,
                why,
                Witness::PlaneChain {
                    first: p.to_repr(),
                    second: q.to_repr(),
                },
            );
        }
        if let Ok(c) = connect_planes(alg, &p, &q) {
            longest = longest.max(c.steps());
        }
    }
    CheckRecord::pass(NAME, trials).with_detail(format!("longest chain has {longest} steps"))
}

fn dimension_violation(alg: &Algebra, form: &SemilinearForm, a: &AffineSubspace) -> Option<String> {
    let expr = form.to_expr();
    let flag = match extend_to_flag(alg, a, a.side()) {
        Ok(f) => f,
        Err(e) => return Some(e.to_string()),
    };
    let mut prev: Option<AffineSubspace> = None;
    for (k, member) in flag.members.iter().enumerate() {
        let img = match image_affine(alg, &expr, member) {
            Ok(img) => img,
            Err(e) => return Some(e.to_string()),
        };
        if img.dim() != k {
            return Some(format!("flag member of dimension {k} has image of dimension {}", img.dim()));
        }
        if prev.as_ref().is_some_and(|p| !img.contains_subspace(alg, p)) {
            return Some(format!("images are not nested at dimension {k}"));
        }
        prev = Some(img);
    }
    if prev.map(|p| p.dim()) != Some(a.ambient()) {
        return Some("image flag does not reach the whole space".into());
    }
    None
}

fn mode_for(t: usize) -> Mode {
    if t.is_multiple_of(2) {
        Mode::SameSide
    } else {
        Mode::SideSwap
    }
}

pub fn check_dimension_preservation(alg: &Algebra, trials: usize, n: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "dimension_preservation";
    for t in 0..trials {
        let form = SemilinearForm::random(alg, n, mode_for(t), rng);
        for dim in 0..=n {
            let side = rng.side();
            let dir = rng.subspace(alg, n, dim, side);
            let a = rng.affine(alg, dir);
            if let Some(why) = dimension_violation(alg, &form, &a) {
                return CheckRecord::fail(
                    NAME,
                    trials,
                    why,
                    Witness::Dimension {
                        form,
                        subspace: a.to_repr(),
                    },
                );
            }
        }
    }
    CheckRecord::pass(NAME, trials)
}

fn round_trip_violation(alg: &Algebra, form: &SemilinearForm, opaque: bool, seed: u64, height: u32) -> Option<String> {
    let mut rng = Sampler::new(seed, height);
    let expected = match form.normalize(alg) {
        Ok(f) => f,
        Err(e) => return Some(e.to_string()),
    };
    let map = match form.to_map(alg) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let result = if opaque {
        decompose(alg, &Opaque(&map), None, DecomposeOptions::default(), &mut rng)
    } else {
        decompose(alg, &map, Some(form.mode()), DecomposeOptions::default(), &mut rng)
    };
    match result {
        Ok(d) if d.form == expected => None,
        Ok(d) => Some(format!("decomposed to a different form: {:?}", d.form)),
        Err(e) => Some(e.to_string()),
    }
}

/// Decomposes `trials` forms from their structure and `trials` more from
/// evaluations alone; half of each batch swaps sides, and the opaque batch
/// starts from a scrambled representative.
pub fn check_round_trip(alg: &Algebra, trials: usize, n: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "normal_form_round_trip";
    let height = rng.height();
    for opaque in [false, true] {
        for t in 0..trials {
            let canonical = SemilinearForm::random(alg, n, mode_for(t), rng);
            let form = if opaque { canonical.scramble(alg, rng) } else { canonical };
            let seed = rng.seed();
            if let Some(why) = round_trip_violation(alg, &form, opaque, seed, height) {
                return CheckRecord::fail(
                    NAME,
                    2 * trials,
                    why,
                    Witness::RoundTrip {
                        form,
                        opaque,
                        seed,
                        height,
                    },
                );
            }
        }
    }
    CheckRecord::pass(NAME, 2 * trials)
}

fn alpha_violation(alg: &Algebra, form: &SemilinearForm, pairs: usize, seed: u64, height: u32) -> Option<String> {
    let mut rng = Sampler::new(seed, height);
    let map = match form.to_map(alg) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let report = match extract_alpha(alg, &Opaque(&map), pairs, &mut rng) {
        Ok(r) => r,
        Err(e) => return Some(e.to_string()),
    };
    let eps = match identify_morphism(alg, &report.table, MorphismKind::AntiAutomorphism) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    if alg.basis().iter().zip(&report.table.0).any(|(u, v)| eps.apply(alg, u) != *v) {
        return Some("identified morphism does not reproduce the table".into());
    }
    let expected = form.normalize(alg).ok().and_then(|f| f.anti);
    if !alg.is_commutative() && expected.as_ref() != Some(&eps) {
        return Some(format!("recovered {eps:?}, expected {expected:?}"));
    }
    None
}

pub fn check_alpha_extraction(alg: &Algebra, trials: usize, pairs: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "anti_automorphism_extraction";
    if alg.is_commutative() {
        return CheckRecord::pass(NAME, 0).with_detail("every line is two-sided over a field");
    }
    let height = rng.height();
    for _ in 0..trials {
        let form = SemilinearForm::random(alg, 2, Mode::SideSwap, rng);
        let seed = rng.seed();
        if let Some(why) = alpha_violation(alg, &form, pairs, seed, height) {
            return CheckRecord::fail(NAME, trials, why, Witness::Alpha { form, seed, height });
        }
    }
    CheckRecord::pass(NAME, trials)
}

fn unrejected(alg: &Algebra, map: &MapExpr, n: usize, seed: u64, height: u32) -> bool {
    let mut rng = Sampler::new(seed, height);
    match ExprMap::new(alg, n, map.clone()) {
        Ok(m) => decompose(alg, &Opaque(&m), None, DecomposeOptions::default(), &mut rng).is_ok(),
        Err(_) => false,
    }
}

/// Maps outside the semilinear class must be rejected, each with a witness
/// that re-checks: the coordinate shear, and random matrices that fail the
/// central factorization. Matrices that do factor must preserve right lines.
pub fn check_negative_controls(alg: &Algebra, matrices: usize, n: usize, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "negative_controls";
    if alg.is_commutative() {
        return CheckRecord::pass(NAME, 0).with_detail("every map of the class is semilinear over a field");
    }
    let height = rng.height();
    let shear = MapExpr::shear(alg, n).expect("quaternion algebra");
    let shear_map = ExprMap::new(alg, n, shear.clone()).expect("valid shear");
    let seed = rng.seed();
    if unrejected(alg, &shear, n, seed, height) {
        return CheckRecord::fail(
            NAME,
            1,
            "the shear decomposes",
            Witness::Unrejected {
                map: shear,
                n,
                seed,
                height,
            },
        );
    }
    let Some(trial) = check_line_preservation(alg, &shear_map, 200, 5, rng)
        .ok()
        .and_then(|r| r.first_failure().cloned())
    else {
        return CheckRecord::fail(
            NAME,
            1,
            "no line witness found for the shear",
            Witness::Unrejected {
                map: shear,
                n,
                seed,
                height,
            },
        );
    };
    if !recheck_not_a_line(alg, &shear_map, &trial).unwrap_or(false) {
        return CheckRecord::fail(
            NAME,
            1,
            "shear witness does not re-check",
            Witness::NotALine {
                map: shear,
                n,
                line: trial.input,
            },
        );
    }

    let mut rejected = 0;
    let mut accepted = 0;
    let mut attempts = 0;
    while rejected < matrices {
        attempts += 1;
        // every tenth matrix is built to factor, for the converse direction
        let m = if attempts % 10 == 0 {
            let f = SemilinearForm::random(alg, n, Mode::SameSide, rng);
            Matrix::from_rows(
                f.n.rows()
                    .iter()
                    .zip(&f.diag)
                    .map(|(r, d)| r.scale(alg, &alg.mul(&f.a, d), Side::Left))
                    .collect(),
            )
        } else {
            rng.invertible_matrix(alg, n)
        };
        let preserves = preserves_basis_right_lines(alg, &m);
        match factor_matrix_central(alg, &m) {
            Ok(_) => {
                accepted += 1;
                if !preserves {
                    let line = (0..n)
                        .map(|i| Vector::unit(n, i))
                        .chain((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| {
                            Vector::unit(n, i).add(&Vector::unit(n, j))
                        }))
                        .map(|d| crate::subspace::line_through(alg, &Vector::zeros(n), &d, Side::Right).expect("nonzero"))
                        .find(|l| !maps_right_line_to_right_line(alg, &m, l))
                        .expect("some basis line fails");
                    return CheckRecord::fail(
                        NAME,
                        rejected + accepted,
                        "matrix factors but breaks a right line",
                        Witness::RightLine { m, line: line.to_repr() },
                    );
                }
            }
            Err(e) => {
                let witness = right_line_witness(alg, &m, &e);
                let valid = witness.as_ref().is_some_and(|w| !maps_right_line_to_right_line(alg, &m, w));
                if !valid || preserves {
                    let line = witness.map(|w| w.to_repr()).unwrap_or_else(|| {
                        AffineSubspace::linear(VectorSubspace::zero(n, Side::Right)).to_repr()
                    });
                    return CheckRecord::fail(
                        NAME,
                        rejected + accepted,
                        format!("rejection ({e}) without a valid right-line witness"),
                        Witness::RightLine { m, line },
                    );
                }
                let map = MapExpr::Matrix { m };
                let seed = rng.seed();
                if unrejected(alg, &map, n, seed, height) {
                    return CheckRecord::fail(
                        NAME,
                        rejected + accepted,
                        "non-central matrix decomposes",
                        Witness::Unrejected { map, n, seed, height },
                    );
                }
                rejected += 1;
            }
        }
    }
    CheckRecord::pass(NAME, 1 + rejected + accepted).with_detail(format!(
        "shear and {rejected} matrices rejected with witnesses; {accepted} factorable matrices preserve right lines"
    ))
}

fn oracle_violation(m: &Matrix, side: Side, probe: &Vector, mutated: bool) -> Option<String> {
    let q = Algebra::rationals();
    let n = m.ncols();
    let qm = m.to_central().expect("rational entries");
    let (rref, pivots) = qm.rref();
    let ef = echelon(&q, m, side, mutated);
    if ef.pivots != pivots {
        return Some(format!("pivots {:?} vs oracle {:?}", ef.pivots, pivots));
    }
    if ef.to_matrix().to_central().expect("rational entries") != rref {
        return Some("echelon rows differ from the oracle".into());
    }
    if ef.dim() != qm.rank() {
        return Some(format!("dim {} vs rank {}", ef.dim(), qm.rank()));
    }
    let pq = probe.to_rational(&q);
    let oracle_member = qm.vstack(&QMatrix::from_rows(n, [pq])).rank() == qm.rank();
    if ef.contains(&q, probe) != oracle_member {
        return Some("membership differs from the oracle".into());
    }
    None
}

/// Echelon forms over Q against plain Gaussian elimination; runs over Q
/// whatever the configured algebra.
pub fn check_commutative_oracle(trials: usize, max_n: usize, mutated: bool, rng: &mut Sampler) -> CheckRecord {
    const NAME: &str = "commutative_oracle";
    let q = Algebra::rationals();
    for _ in 0..trials {
        let (m, side) = shaped_matrix(&q, max_n, rng);
        let n = m.ncols();
        let probe = if rng.coin() {
            m.rows().iter().fold(Vector::zeros(n), |acc, r| {
                acc.add(&r.scale(&q, &rng.scalar(&q), side))
            })
        } else {
            rng.vector(&q, n)
        };
        if let Some(why) = oracle_violation(&m, side, &probe, mutated) {
            return CheckRecord::fail(
                NAME,
                trials,
                why,
                Witness::Oracle {
                    side,
                    rows: m,
                    probe,
                    mutated,
                },
            );
        }
    }
    CheckRecord::pass(NAME, trials)
}

impl Witness {
    /// True when the witness still exhibits the failure it was recorded for.
    pub fn recheck(&self, alg: &Algebra) -> Result<bool> {
        Ok(match self {
            Witness::Echelon { side, rows, mutated } => echelon_violation(alg, rows, *side, *mutated).is_some(),
            Witness::Containment { inner, outer } => {
                let w = AffineSubspace::from_repr(alg, inner)?;
                let v = AffineSubspace::from_repr(alg, outer)?;
                containment_violation(alg, w.direction(), v.direction()).is_some()
            }
            Witness::RatioLine { x, y } => {
                ratio_violation(alg, x, y, Side::Left)? || ratio_violation(alg, x, y, Side::Right)?
            }
            Witness::RightLines { plane, point } => {
                let p = AffineSubspace::from_repr(alg, plane)?;
                classify_affine(alg, &p) == Sidedness::PurelyLeft
                    && p.dim() == 2
                    && right_lines_violation(alg, &p, point).is_some()
            }
            Witness::Trichotomy { subspace, line } => {
                let a = AffineSubspace::from_repr(alg, subspace)?;
                match line {
                    Some(l) => {
                        let l = AffineSubspace::from_repr(alg, l)?;
                        classify_affine(alg, &a) == Sidedness::TwoSided
                            && matches!(meet_line(alg, &a, &l), LineMeet::Partial { .. })
                    }
                    None => {
                        classify_affine(alg, &a) != Sidedness::TwoSided
                            && !trichotomy_witness(alg, &a)
                                .is_some_and(|l| matches!(meet_line(alg, &a, &l), LineMeet::Partial { .. }))
                    }
                }
            }
            Witness::Normalization { subspace, x, c } => {
                let v = AffineSubspace::from_repr(alg, subspace)?;
                normalization_violation(alg, v.direction(), x, c).is_some()
            }
            Witness::PlaneChain { first, second } => {
                let p = AffineSubspace::from_repr(alg, first)?;
                let q = AffineSubspace::from_repr(alg, second)?;
                chain_violation(alg, &p, &q).is_some()
            }
            Witness::Dimension { form, subspace } => {
                let a = AffineSubspace::from_repr(alg, subspace)?;
                dimension_violation(alg, form, &a).is_some()
            }
            Witness::RoundTrip {
                form,
                opaque,
                seed,
                height,
            } => round_trip_violation(alg, form, *opaque, *seed, *height).is_some(),
            Witness::Alpha { form, seed, height } => alpha_violation(alg, form, 10, *seed, *height).is_some(),
            Witness::NotALine { map, n, line } => {
                let l = AffineSubspace::from_repr(alg, line)?;
                let f = ExprMap::new(alg, *n, map.clone())?;
                !matches!(image_affine(alg, f.expr(), &l), Ok(img) if img.dim() == 1)
            }
            Witness::RightLine { m, line } => {
                let l = AffineSubspace::from_repr(alg, line)?;
                l.side() == Side::Right && l.dim() == 1 && !maps_right_line_to_right_line(alg, m, &l)
            }
            Witness::Unrejected { map, n, seed, height } => unrejected(alg, map, *n, *seed, *height),
            Witness::Oracle {
                side,
                rows,
                probe,
                mutated,
            } => oracle_violation(rows, *side, probe, *mutated).is_some(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Lemmas,
    Theorem,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Lemmas => "lemmas",
            SuiteName::Theorem => "theorem",
            SuiteName::All => "all",
        }
    }
}

pub const LEMMA_CHECKS: &[&str] = &[
    "dimension_via_pivot_complement",
    "one_sided_containment_dimension",
    "two_sided_line_central_ratio",
    "right_lines_in_purely_left_plane",
    "two_sided_line_trichotomy",
    "bimodule_normalization",
    "two_sided_plane_chain",
    "commutative_oracle",
];

pub const THEOREM_CHECKS: &[&str] = &[
    "dimension_preservation",
    "normal_form_round_trip",
    "anti_automorphism_extraction",
    "negative_controls",
];

/// Runs one named check with the sizes taken from the configuration.
pub fn run_check(name: &str, cfg: &SuiteConfig) -> Result<CheckRecord> {
    let alg = Algebra::new(cfg.algebra.clone())?;
    let mut rng = Sampler::named(cfg.seed, name, cfg.height);
    let t = cfg.trials;
    let n = cfg.n.max(1);
    Ok(match name {
        "dimension_via_pivot_complement" => check_pivot_dimension(&alg, t, n, cfg.mutation, &mut rng),
        "one_sided_containment_dimension" => check_containment_dimension(&alg, t, n, &mut rng),
        "two_sided_line_central_ratio" => check_two_sided_lines(&alg, t, &mut rng),
        "right_lines_in_purely_left_plane" => check_right_lines_in_left_planes(&alg, t, &mut rng),
        "two_sided_line_trichotomy" => check_trichotomy(&alg, t, 10, n, &mut rng),
        "bimodule_normalization" => check_bimodule_normalization(&alg, t, 10, n, &mut rng),
        "two_sided_plane_chain" => check_plane_chains(&alg, t, &[n.max(3)], &mut rng),
        "commutative_oracle" => check_commutative_oracle(t, n, cfg.mutation, &mut rng),
        "dimension_preservation" => check_dimension_preservation(&alg, t, n, &mut rng),
        "normal_form_round_trip" => check_round_trip(&alg, t, n, &mut rng),
        "anti_automorphism_extraction" => check_alpha_extraction(&alg, t, 10, &mut rng),
        "negative_controls" => check_negative_controls(&alg, t.clamp(1, 20), n.max(2), &mut rng),
        other => return Err(Error::Parse(format!("unknown check `{other}`"))),
    })
}

pub fn run_suite(suite: SuiteName, cfg: &SuiteConfig) -> Result<Report> {
    let names: Vec<&str> = match suite {
        SuiteName::Lemmas => LEMMA_CHECKS.to_vec(),
        SuiteName::Theorem => THEOREM_CHECKS.to_vec(),
        SuiteName::All => LEMMA_CHECKS.iter().chain(THEOREM_CHECKS).copied().collect(),
    };
    let records = names
        .into_iter()
        .map(|name| run_check(name, cfg))
        .collect::<Result<Vec<_>>>()?;
    let failed = records.iter().filter(|r| !r.passed()).count();
    Ok(Report {
        summary: Summary {
            suite: suite.as_str().to_string(),
            config: cfg.clone(),
            passed: records.len() - failed,
            failed,
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            trials: 4,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn suites_pass_and_are_deterministic() {
        let cfg = small();
        let a = run_suite(SuiteName::All, &cfg).unwrap();
        assert!(a.passed(), "{}", a.to_jsonl());
        let b = run_suite(SuiteName::All, &cfg).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(a.records.len(), LEMMA_CHECKS.len() + THEOREM_CHECKS.len());
    }

    #[test]
    fn mutation_is_caught_with_a_rechecking_witness() {
        let cfg = SuiteConfig {
            mutation: true,
            ..small()
        };
        let rep = run_suite(SuiteName::Lemmas, &cfg).unwrap();
        assert!(!rep.passed());
        let alg = Algebra::hamilton();
        for r in rep.records.iter().filter(|r| !r.passed()) {
            let w = r.witness.as_ref().expect("failures carry witnesses");
            assert!(w.recheck(&alg).unwrap(), "{r:?}");
            let text = serde_json::to_string(w).unwrap();
            let back: Witness = serde_json::from_str(&text).unwrap();
            assert!(back.recheck(&alg).unwrap());
        }
    }

    #[test]
    fn commutative_suite() {
        let cfg = SuiteConfig {
            algebra: AlgebraParams::rationals(),
            ..small()
        };
        let rep = run_suite(SuiteName::All, &cfg).unwrap();
        assert!(rep.passed(), "{}", rep.to_jsonl());
    }

    #[test]
    fn unknown_check() {
        assert!(run_check("nope", &small()).is_err());
    }
}
