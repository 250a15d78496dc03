use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use skewaffine::harness::{run_suite, SuiteConfig, SuiteName, Witness};
use skewaffine::linalg::{pivot_complement, row_echelon};
use skewaffine::maps::{
    check_line_preservation, decompose, verify_theorem_instance, DecomposeOptions, ExprMap, Opaque, PointMap,
};
use skewaffine::subspace::{
    classify_affine, connect_planes, extend_to_flag, intersect_affine, intersect_rational, AffineSubspace,
};
use skewaffine::{Algebra, AlgebraParams, Error, MapExpr, Matrix, Mode, Sampler, SemilinearForm, Side, SubspaceRepr, Vector};

/// Exact affine geometry over quaternion algebras.
#[derive(Parser)]
#[command(name = "skewaffine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension, sidedness, intersections, flags and plane chains.
    Subspace {
        action: SubspaceAction,
        #[command(flatten)]
        io: Io,
    },
    /// Line preservation, decomposition and verification of maps.
    Map {
        action: MapAction,
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        height: u32,
    },
    /// Seeded property suites; writes one JSON record per check.
    Suite {
        name: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        height: u32,
        #[arg(long = "dim", default_value_t = 3)]
        n: usize,
        /// JSON file with algebra parameters `{"a": "-1", "b": "-3"}` or `{"commutative": true}`.
        #[arg(long)]
        algebra: Option<PathBuf>,
        /// Corrupt echelon forms to exercise failure reporting.
        #[arg(long)]
        mutation: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-runs the witnesses in a report or witness file.
    Recheck {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Io {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubspaceAction {
    Dim,
    Classify,
    Intersect,
    Flag,
    Connect,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapAction {
    Classify,
    Decompose,
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Theorem,
    All,
}

enum Failure {
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(output: Option<&Path>, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize");
    text.push('\n');
    emit(output, &text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowsInput {
    #[serde(default)]
    algebra: AlgebraParams,
    #[serde(default = "left")]
    side: Side,
    rows: Vec<Vector>,
    #[serde(default)]
    n: Option<usize>,
}

fn left() -> Side {
    Side::Left
}

#[derive(Deserialize)]
struct OneInput {
    #[serde(default)]
    algebra: AlgebraParams,
    #[serde(flatten)]
    subspace: SubspaceRepr,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairInput {
    #[serde(default)]
    algebra: AlgebraParams,
    first: SubspaceRepr,
    second: SubspaceRepr,
}

fn subspace_cmd(action: SubspaceAction, io: &Io) -> Outcome {
    let out = io.output.as_deref();
    match action {
        SubspaceAction::Dim => {
            let input: RowsInput = read(&io.input)?;
            let alg = Algebra::new(input.algebra)?;
            let n = input
                .rows
                .first()
                .map(Vector::len)
                .or(input.n)
                .ok_or_else(|| Failure::Input("rows: empty matrix needs `n`".into()))?;
            for x in input.rows.iter().flat_map(|r| &r.0) {
                alg.check(x)?;
            }
            let m = Matrix::new(n, input.rows)?;
            let ef = row_echelon(&alg, &m, input.side);
            let complement = pivot_complement(&alg, &m, input.side);
            emit_json(
                out,
                &json!({
                    "dim": ef.dim(),
                    "side": input.side,
                    "echelon": ef.rows,
                    "pivots": ef.pivots,
                    "complement": complement.indices,
                }),
            )
        }
        SubspaceAction::Classify => {
            let input: OneInput = read(&io.input)?;
            let alg = Algebra::new(input.algebra)?;
            let a = AffineSubspace::from_repr(&alg, &input.subspace)?;
            emit_json(
                out,
                &json!({
                    "sidedness": classify_affine(&alg, &a),
                    "dim": a.dim(),
                    "subspace": a.to_repr(),
                }),
            )
        }
        SubspaceAction::Intersect => {
            let input: PairInput = read(&io.input)?;
            let alg = Algebra::new(input.algebra)?;
            let a = AffineSubspace::from_repr(&alg, &input.first)?;
            let b = AffineSubspace::from_repr(&alg, &input.second)?;
            let q = intersect_rational(&alg, &a, &b);
            let rational_dim = q.as_ref().map(|s| s.dim());
            let value = match intersect_affine(&alg, &a, &b) {
                Ok(None) => json!({ "empty": true }),
                Ok(Some(c)) => json!({
                    "empty": false,
                    "dim": c.dim(),
                    "sidedness": classify_affine(&alg, &c),
                    "intersection": c.to_repr(),
                    "rational_dim": rational_dim,
                }),
                Err(Error::SideUnrepresentable) => json!({
                    "empty": false,
                    "sidedness": "neither",
                    "rational_dim": rational_dim,
                }),
                Err(e) => return Err(e.into()),
            };
            emit_json(out, &value)
        }
        SubspaceAction::Flag => {
            let input: OneInput = read(&io.input)?;
            let alg = Algebra::new(input.algebra)?;
            let a = AffineSubspace::from_repr(&alg, &input.subspace)?;
            let flag = extend_to_flag(&alg, &a, a.side())?;
            let members: Vec<SubspaceRepr> = flag.members.iter().map(AffineSubspace::to_repr).collect();
            emit_json(out, &json!({ "designated": flag.designated, "members": members }))
        }
        SubspaceAction::Connect => {
            let input: PairInput = read(&io.input)?;
            let alg = Algebra::new(input.algebra)?;
            let p = AffineSubspace::from_repr(&alg, &input.first)?;
            let q = AffineSubspace::from_repr(&alg, &input.second)?;
            let chain = connect_planes(&alg, &p, &q)?;
            let planes: Vec<SubspaceRepr> = chain.planes.iter().map(AffineSubspace::to_repr).collect();
            emit_json(out, &json!({ "length": planes.len(), "steps": chain.steps(), "planes": planes }))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapInput {
    #[serde(default)]
    algebra: AlgebraParams,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    map: Option<MapExpr>,
    #[serde(default)]
    form: Option<SemilinearForm>,
    #[serde(default)]
    mode: Option<Mode>,
    /// Analyze by evaluation only.
    #[serde(default)]
    opaque: bool,
}

struct LoadedMap {
    alg: Algebra,
    map: ExprMap,
    form: Option<SemilinearForm>,
    mode: Option<Mode>,
    opaque: bool,
}

fn load_map(path: &Path) -> Result<LoadedMap, Failure> {
    let input: MapInput = read(path)?;
    let alg = Algebra::new(input.algebra)?;
    let (map, form) = match (input.map, input.form) {
        (Some(expr), None) => {
            let n = input
                .n
                .ok_or_else(|| Failure::Input(format!("{}: field `n` is required with `map`", path.display())))?;
            (ExprMap::new(&alg, n, expr)?, None)
        }
        (None, Some(form)) => {
            form.validate(&alg)?;
            (form.to_map(&alg)?, Some(form))
        }
        _ => {
            return Err(Failure::Input(format!(
                "{}: exactly one of `map` and `form` is required",
                path.display()
            )))
        }
    };
    Ok(LoadedMap {
        alg,
        map,
        form,
        mode: input.mode,
        opaque: input.opaque,
    })
}

fn jsonl(records: &[serde_json::Value]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

fn map_cmd(action: MapAction, io: &Io, trials: usize, seed: u64, height: u32) -> Outcome {
    let loaded = load_map(&io.input)?;
    let alg = &loaded.alg;
    let n = loaded.map.ambient();
    let opaque = Opaque(&loaded.map);
    let f: &dyn PointMap = if loaded.opaque { &opaque } else { &loaded.map };
    let out = io.output.as_deref();
    match action {
        MapAction::Classify => {
            let mut rng = Sampler::named(seed, "map-classify", height);
            let rep = check_line_preservation(alg, f, trials, 5, &mut rng)?;
            let witness = rep.first_failure().map(|t| Witness::NotALine {
                map: loaded.map.expr().clone(),
                n,
                line: t.input.clone(),
            });
            let mode = match (rep.summary.line_opposite_side, rep.summary.line_same_side) {
                (0, _) => "same_side",
                (_, 0) => "side_swap",
                _ => "mixed",
            };
            let status = if witness.is_some() { "fail" } else { "pass" };
            let mut record = json!({
                "check": "line_preservation",
                "status": status,
                "trials": trials,
                "summary": rep.summary,
                "mode": mode,
            });
            if let Some(w) = &witness {
                record["witness"] = serde_json::to_value(w).expect("witness serializes");
            }
            emit(out, &jsonl(&[record]))?;
            match witness {
                Some(_) => Err(Failure::Verification("a line is not mapped to a line".into())),
                None => Ok(()),
            }
        }
        MapAction::Decompose => {
            let mut rng = Sampler::named(seed, "map-decompose", height);
            let d = decompose(alg, f, loaded.mode, DecomposeOptions::default(), &mut rng)
                .map_err(|e| Failure::Verification(e.to_string()))?;
            if d.verified_only {
                eprintln!("note: same-side decomposition in dimension 2 is verified on samples, not guaranteed");
            }
            emit_json(out, &d)
        }
        MapAction::Verify => {
            let mut rng = Sampler::named(seed, "map-verify", height);
            let mut records = Vec::new();
            let rep = check_line_preservation(alg, f, trials, 5, &mut rng)?;
            let lines_ok = rep.all_lines();
            let mut rec = json!({ "check": "line_preservation", "status": status(lines_ok), "trials": trials, "summary": rep.summary });
            if let Some(t) = rep.first_failure() {
                rec["witness"] = serde_json::to_value(Witness::NotALine {
                    map: loaded.map.expr().clone(),
                    n,
                    line: t.input.clone(),
                })
                .expect("witness serializes");
            }
            records.push(rec);
            let form = match (&loaded.form, lines_ok) {
                (Some(form), _) => Some(form.clone()),
                (None, true) => match decompose(alg, f, loaded.mode, DecomposeOptions::default(), &mut rng) {
                    Ok(d) => {
                        records.push(json!({ "check": "decompose", "status": "pass", "mode": d.mode, "verified_only": d.verified_only, "form": d.form }));
                        Some(d.form)
                    }
                    Err(e) => {
                        records.push(json!({ "check": "decompose", "status": "fail", "detail": e.to_string() }));
                        None
                    }
                },
                (None, false) => None,
            };
            if let Some(form) = form {
                let rep = verify_theorem_instance(alg, &form, trials.clamp(1, 20), &mut rng)?;
                for c in &rep.checks {
                    let mut r = json!({ "check": c.name, "status": status(c.passed), "mode": rep.mode });
                    if let Some(d) = &c.detail {
                        r["detail"] = json!(d);
                    }
                    records.push(r);
                }
            }
            let failed = records.iter().filter(|r| r["status"] == "fail").count();
            records.push(json!({ "summary": { "passed": records.len() - failed, "failed": failed } }));
            emit(out, &jsonl(&records))?;
            if failed > 0 {
                Err(Failure::Verification(format!("{failed} checks failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn load_algebra(path: Option<&Path>) -> Result<AlgebraParams, Failure> {
    match path {
        Some(p) => read(p),
        None => Ok(AlgebraParams::hamilton()),
    }
}

#[allow(clippy::too_many_arguments)]
fn suite_cmd(
    name: SuiteArg,
    seed: u64,
    trials: usize,
    height: u32,
    n: usize,
    algebra: Option<&Path>,
    mutation: bool,
    output: Option<&Path>,
) -> Outcome {
    if trials == 0 || height == 0 || n == 0 {
        return Err(Failure::Input("--trials, --height and --dim must be positive".into()));
    }
    let cfg = SuiteConfig {
        seed,
        trials,
        height,
        n,
        algebra: load_algebra(algebra)?,
        mutation,
    };
    let suite = match name {
        SuiteArg::Lemmas => SuiteName::Lemmas,
        SuiteArg::Theorem => SuiteName::Theorem,
        SuiteArg::All => SuiteName::All,
    };
    let report = run_suite(suite, &cfg)?;
    emit(output, &report.to_jsonl())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} checks failed", report.summary.failed)))
    }
}

/// Witnesses found in a JSONL report, a single record, or a bare witness.
fn collect_witnesses(text: &str) -> Result<(Vec<Witness>, Option<AlgebraParams>), Failure> {
    let mut witnesses = Vec::new();
    let mut algebra = None;
    let values: Vec<serde_json::Value> = match serde_json::from_str(text) {
        Ok(v) => vec![v],
        Err(_) => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Failure::Input(format!("line {}: {e}", i + 1))))
            .collect::<Result<_, _>>()?,
    };
    for v in values {
        if let Some(alg) = v.get("summary").and_then(|s| s.get("config")).and_then(|c| c.get("algebra")) {
            algebra = Some(serde_json::from_value(alg.clone()).map_err(|e| Failure::Input(e.to_string()))?);
            continue;
        }
        if let Some(alg) = v.get("algebra") {
            algebra = Some(serde_json::from_value(alg.clone()).map_err(|e| Failure::Input(e.to_string()))?);
        }
        let w = match v.get("witness") {
            Some(w) => w.clone(),
            None if v.get("kind").is_some() => v,
            None => continue,
        };
        witnesses.push(serde_json::from_value(w).map_err(|e| Failure::Input(format!("witness: {e}")))?);
    }
    Ok((witnesses, algebra))
}

fn recheck_cmd(input: &Path, algebra: Option<&Path>) -> Outcome {
    let text = fs::read_to_string(input).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let (witnesses, found) = collect_witnesses(&text)?;
    if witnesses.is_empty() {
        return Err(Failure::Input(format!("{}: no witnesses found", input.display())));
    }
    let params = match algebra {
        Some(p) => read(p)?,
        None => found.unwrap_or_else(AlgebraParams::hamilton),
    };
    let alg = Algebra::new(params)?;
    let mut confirmed = 0;
    for w in &witnesses {
        let again = w.recheck(&alg)?;
        confirmed += usize::from(again);
        println!(
            "{}",
            json!({ "witness": w, "status": if again { "confirmed" } else { "not_reproduced" } })
        );
    }
    if confirmed > 0 {
        Err(Failure::Verification(format!("{confirmed} of {} witnesses re-fail", witnesses.len())))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Subspace { action, io } => subspace_cmd(*action, io),
        Command::Map {
            action,
            io,
            trials,
            seed,
            height,
        } => map_cmd(*action, io, *trials, *seed, *height),
        Command::Suite {
            name,
            seed,
            trials,
            height,
            n,
            algebra,
            mutation,
            output,
        } => suite_cmd(*name, *seed, *trials, *height, *n, algebra.as_deref(), *mutation, output.as_deref()),
        Command::Recheck { input, algebra } => recheck_cmd(input, algebra.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
