//! Command-line front end: argument parsing, JSON I/O and report envelopes.
//!
//! Every command produces one JSON report carrying the toolkit version and
//! the seed in effect. Exit codes: 0 when something was computed (whatever
//! the verdict, including a refused or unsuccessful construction), 1 for
//! usage and parse errors, 2 for a violated internal invariant.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dsp_core::class::ClassSet;
use dsp_core::criteria::{check_alpha, check_beta, dsp_verdict, weak_dsp_verdict};
use dsp_core::deform::{first_order_deform, newton_correct, newton_correct_float, DeformationRequest};
use dsp_core::ext::{
    build_semidirect, deform_to_irreducible, ext_report, extension_space_basis, geq3_case, RepresentationPair,
};
use dsp_core::gauge::{procedure_lk, shift_walk, FuchsianSystem};
use dsp_core::genericity::{check_neutrality, find_generic_shift, find_relations, is_generic, EigenvalueSystem};
use dsp_core::par::{self, Execution};
use dsp_core::solver::{solve_weak_dsp, SolveOptions};
use dsp_core::tuple::{constraint_residual, verify, MatrixTuple};
use dsp_core::{DspError, JordanNormalForm, Matrix, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "dsp", version, about = "Exact toolkit for the (weak) Deligne–Simpson problem")]
pub struct Cli {
    /// Seed for every randomized step. Falls back to DSP_SEED, then 7.
    #[arg(long, global = true, env = "DSP_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants of a Jordan normal form such as "{a:[2,1]; b:[1]}".
    Jnf {
        form: String,
        /// Second form to test subordination against.
        #[arg(long)]
        compare: Option<String>,
    },
    /// Neutrality, non-genericity relations and generic shifts of a class set.
    Genericity {
        classes: PathBuf,
        #[arg(long)]
        modulo_integers: bool,
        /// Class (1-based) whose eigenvalues a generic shift may move.
        #[arg(long)]
        shift_class: Option<usize>,
        #[arg(long, default_value_t = 3)]
        bound: u32,
    },
    /// Conditions (α), (β) and the solvability verdicts of a class set.
    Criteria { classes: PathBuf },
    /// Constraint, centralizer, irreducibility and tangent data of a tuple.
    Verify { tuple: PathBuf },
    /// Ext¹ between two tuples, optionally emitting an extension.
    Ext {
        first: PathBuf,
        second: PathBuf,
        /// Write the semidirect sum built from the first basis element.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Deform the emitted semidirect sum to an irreducible tuple.
        #[arg(long, requires = "emit")]
        irreducible: bool,
        #[arg(long, default_value_t = 200)]
        rounds: usize,
    },
    /// First-order deformation plus correction of a tuple.
    Deform {
        tuple: PathBuf,
        #[arg(long)]
        direction_file: PathBuf,
        #[arg(long, default_value = "1/16")]
        epsilon: String,
        #[arg(long, value_enum, default_value_t = Arithmetic::Exact)]
        mode: Arithmetic,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[arg(long, default_value_t = 50)]
        max_iterations: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Procedure (l,k) or a shift walk on a Fuchsian system.
    Gauge {
        system: PathBuf,
        /// 1-based pair "l,k": lower eigenvalue l and raise eigenvalue k.
        #[arg(long, conflicts_with = "walk", required_unless_present = "walk")]
        lk: Option<String>,
        /// Integer shift vector such as "(2,-1,-1)".
        #[arg(long)]
        walk: Option<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Construct a certified trivial-centralizer tuple in the given classes.
    Solve {
        #[arg(long)]
        classes: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_restarts: usize,
        #[arg(long, default_value_t = 3)]
        shift_bound: u32,
        /// Tuple in the shifted classes to use as the seed.
        #[arg(long)]
        user_seed: Option<PathBuf>,
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        emit_cert: Option<PathBuf>,
    },
    /// Run `criteria` or `verify` on every JSON file of a directory.
    Batch {
        dir: PathBuf,
        /// Directory receiving one report per input file.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
}

/// A run that produced no report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Internal(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

type Outcome = Result<Value, Failure>;

/// Parse problems are usage errors and invariant violations are bugs.
/// Everything else is a mathematical outcome and is reported.
fn classify(e: DspError) -> Result<Value, Failure> {
    match e {
        DspError::Parse(_) | DspError::Dimension(_) => Err(Failure::Usage(e.to_string())),
        DspError::Invariant(_) => Err(Failure::Internal(e.to_string())),
        DspError::Precondition(_) => Ok(json!({ "outcome": "refused", "error": e.to_string() })),
        _ => Ok(json!({ "outcome": "no-result", "error": e.to_string() })),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, x: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(x).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_scalar(s: &str) -> Result<Scalar, Failure> {
    s.parse::<Scalar>().map_err(|e| Failure::Usage(format!("bad scalar {s:?}: {e}")))
}

fn parse_jnf(s: &str) -> Result<JordanNormalForm, Failure> {
    s.parse::<JordanNormalForm>().map_err(|e| Failure::Usage(format!("bad JNF {s:?}: {e}")))
}

/// Integers separated by commas, optionally in parentheses.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>, Failure> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    inner
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|e| Failure::Usage(format!("bad integer list {s:?}: {e}"))))
        .collect()
}

/// Report envelope shared by all commands.
pub fn envelope(command: &str, seed: u64, result: Value) -> Value {
    json!({ "tool": "dsp", "version": VERSION, "seed": seed, "command": command, "result": result })
}

pub fn run(cli: &Cli) -> Outcome {
    let seed = cli.seed;
    let (name, result) = match &cli.command {
        Command::Jnf { form, compare } => ("jnf", jnf(form, compare.as_deref())?),
        Command::Genericity { classes, modulo_integers, shift_class, bound } => {
            ("genericity", genericity(&read_json(classes)?, *modulo_integers, *shift_class, *bound)?)
        }
        Command::Criteria { classes } => ("criteria", criteria(&read_json(classes)?)?),
        Command::Verify { tuple } => ("verify", verify_report(&read_json(tuple)?)),
        Command::Ext { first, second, emit, irreducible, rounds } => {
            ("ext", ext(read_json(first)?, read_json(second)?, emit.as_deref(), *irreducible, *rounds, seed)?)
        }
        Command::Deform { tuple, direction_file, epsilon, mode, tolerance, max_iterations, emit } => {
            let directions: Directions = read_json(direction_file)?;
            let req = DeformationRequest { base: read_json(tuple)?, directions: directions.into_matrices() };
            let opts = FloatOptions { tolerance: *tolerance, max_iterations: *max_iterations };
            ("deform", deform(&req, epsilon, *mode, opts, emit.as_deref(), seed)?)
        }
        Command::Gauge { system, lk, walk, emit } => {
            ("gauge", gauge(&read_json(system)?, lk.as_deref(), walk.as_deref(), emit.as_deref(), seed)?)
        }
        Command::Solve { classes, max_restarts, shift_bound, user_seed, emit, emit_cert } => {
            let opts = SolveOptions {
                seed,
                max_restarts: *max_restarts,
                shift_bound: *shift_bound,
                user_seed: user_seed.as_deref().map(read_json).transpose()?,
            };
            ("solve", solve(&read_json(classes)?, &opts, emit.as_deref(), emit_cert.as_deref())?)
        }
        Command::Batch { dir, out_dir, sequential } => {
            let exec = if *sequential { Execution::Sequential } else { Execution::Parallel };
            ("batch", batch(dir, out_dir.as_deref(), exec, seed)?)
        }
    };
    let report = envelope(name, seed, result);
    if let Some(path) = &cli.report {
        write_json(path, &report)?;
    }
    Ok(report)
}

pub fn jnf(form: &str, compare: Option<&str>) -> Outcome {
    let j = parse_jnf(form)?;
    let groups: Vec<Value> = j
        .groups()
        .iter()
        .map(|(l, p)| json!({ "label": l, "blocks": p.parts(), "dual": p.dual().parts() }))
        .collect();
    let mut out = json!({
        "form": j.to_string(),
        "size": j.size(),
        "class_dimension": j.class_dimension(),
        "defect_r": j.class_defect_r(),
        "groups": groups,
        "corresponding_diagonal": j.corresponding_diagonal().to_string(),
    });
    if let Some(other) = compare {
        let o = parse_jnf(other)?;
        match j.is_subordinate_to(&o) {
            Ok(b) => out["subordinate_to"] = json!({ "other": o.to_string(), "holds": b }),
            Err(e) => return classify(e),
        }
    }
    Ok(out)
}

pub fn genericity(set: &ClassSet, modulo_integers: bool, shift_class: Option<usize>, bound: u32) -> Outcome {
    let sys = EigenvalueSystem::from_classes(set);
    let relations = match find_relations(&sys, modulo_integers) {
        Ok(r) => r,
        Err(e) => return classify(e),
    };
    let generic = match is_generic(&sys) {
        Ok(g) => g,
        Err(e) => return classify(e),
    };
    let mut out = json!({
        "mode": set.mode,
        "neutral": check_neutrality(&sys),
        "generic": generic,
        "modulo_integers": modulo_integers,
        "relations": relations,
    });
    if let Some(j) = shift_class {
        if j == 0 || j > set.len() {
            return Err(Failure::Usage(format!("--shift-class must be in 1..={}", set.len())));
        }
        out["shift_plan"] = match find_generic_shift(&sys, j - 1, bound) {
            Ok(plan) => to_value(&plan),
            Err(e) => classify(e)?,
        };
    }
    Ok(out)
}

pub fn criteria(set: &ClassSet) -> Outcome {
    let run = || -> dsp_core::Result<Value> {
        let classes: Vec<Value> = set
            .classes
            .iter()
            .map(|c| json!({ "class": c.to_string(), "d": c.dimension(), "r": c.defect_r() }))
            .collect();
        Ok(json!({
            "mode": set.mode,
            "n": set.size(),
            "classes": classes,
            "alpha": check_alpha(&set.classes)?,
            "beta": check_beta(&set.classes)?,
            "dsp": dsp_verdict(set)?,
            "weak_dsp": weak_dsp_verdict(set)?,
        }))
    };
    run().or_else(classify)
}

pub fn verify_report(t: &MatrixTuple) -> Value {
    let mut out = to_value(&verify(t));
    out["mode"] = to_value(&t.mode);
    out["residual_zero"] = json!(constraint_residual(t).is_zero());
    out
}

pub fn ext(
    first: MatrixTuple,
    second: MatrixTuple,
    emit: Option<&Path>,
    irreducible: bool,
    rounds: usize,
    seed: u64,
) -> Outcome {
    let pair = match RepresentationPair::new(first, second) {
        Ok(p) => p,
        Err(e) => return classify(e),
    };
    let run = || -> dsp_core::Result<Value> {
        let report = ext_report(&pair)?;
        let basis = extension_space_basis(&pair)?;
        let mut out = json!({ "report": report, "basis": basis, "geq3_case": geq3_case(&pair) });
        if let Some(path) = emit {
            let Some(e) = basis.first() else {
                out["emitted"] = json!({ "outcome": "refused", "error": "extension space is zero" });
                return Ok(out);
            };
            let built =
                if irreducible { deform_to_irreducible(&pair, e, seed, rounds) } else { build_semidirect(&pair, e) };
            match built {
                Ok(t) => {
                    write_json(path, &t).map_err(|f| DspError::Parse(f.to_string()))?;
                    out["emitted"] = json!({ "path": path.display().to_string(), "verification": verify_report(&t) });
                }
                Err(DspError::Invariant(m)) => return Err(DspError::Invariant(m)),
                Err(e) => out["emitted"] = classify(e).expect("non-invariant errors are reported"),
            }
        }
        Ok(out)
    };
    run().or_else(classify)
}

/// Direction file: a bare list of matrices or `{"directions": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum Directions {
    Bare(Vec<Matrix>),
    Wrapped { directions: Vec<Matrix> },
}

impl Directions {
    fn into_matrices(self) -> Vec<Matrix> {
        match self {
            Directions::Bare(m) | Directions::Wrapped { directions: m } => m,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FloatOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

pub fn deform(
    req: &DeformationRequest,
    epsilon: &str,
    mode: Arithmetic,
    opts: FloatOptions,
    emit: Option<&Path>,
    seed: u64,
) -> Outcome {
    let eps = parse_scalar(epsilon)?;
    let first = match first_order_deform(req) {
        Ok(f) => f,
        Err(e) => return classify(e),
    };
    let residual = first.residual(&eps);
    let mut out = json!({
        "epsilon": eps,
        "arithmetic": format!("{mode:?}").to_lowercase(),
        "first_order": { "x": first.x, "linear": first.linear },
        "first_order_residual": residual,
    });
    match mode {
        Arithmetic::Exact => match newton_correct(&first, &eps, seed) {
            Ok(t) => {
                if let Some(path) = emit {
                    write_json(path, &t)?;
                }
                out["verification"] = verify_report(&t);
                out["tuple"] = to_value(&t);
            }
            Err(e) => out["correction"] = classify(e)?,
        },
        Arithmetic::Float => {
            if !eps.is_real() {
                return Err(Failure::Usage("float mode needs a real epsilon".into()));
            }
            let e = eps.to_complex_f64().re;
            match newton_correct_float(&first, e, opts.tolerance, opts.max_iterations) {
                Ok(t) => {
                    if let Some(path) = emit {
                        write_json(path, &t)?;
                    }
                    out["tuple"] = to_value(&t);
                }
                Err(e) => out["correction"] = classify(e)?,
            }
        }
    }
    Ok(out)
}

pub fn gauge(sys: &FuchsianSystem, lk: Option<&str>, walk: Option<&str>, emit: Option<&Path>, seed: u64) -> Outcome {
    let (sys, diagonalizer) = if sys.is_normalized() {
        (sys.clone(), None)
    } else {
        match sys.diagonalized() {
            Ok((s, p)) => (s, Some(p)),
            Err(e) => return classify(e),
        }
    };
    let mut out = json!({ "eigenvalues_before": sys.eigenvalues() });
    if let Some(p) = diagonalizer {
        out["diagonalizer"] = to_value(&p);
    }
    let result = match (lk, walk) {
        (Some(pair), _) => {
            let idx = parse_int_list(pair)?;
            let n = sys.size() as i64;
            if idx.len() != 2 || idx.iter().any(|&i| i < 1 || i > n) {
                return Err(Failure::Usage(format!("--lk needs two indexes in 1..={n}")));
            }
            procedure_lk(&sys, idx[0] as usize - 1, idx[1] as usize - 1)
                .map(|(s, step)| (s, json!({ "l": idx[0], "k": idx[1], "step": step })))
        }
        (None, Some(v)) => {
            let v = parse_int_list(v)?;
            if v.len() != sys.size() {
                return Err(Failure::Usage(format!("--walk needs {} entries", sys.size())));
            }
            shift_walk(&sys, &v, seed)
                .map(|w| (w.system.clone(), json!({ "shift": v, "steps": w.steps, "splits": w.splits })))
        }
        (None, None) => return Err(Failure::Usage("one of --lk, --walk is required".into())),
    };
    match result {
        Ok((after, detail)) => {
            if let Some(path) = emit {
                write_json(path, &after)?;
            }
            out["eigenvalues_after"] = to_value(&after.eigenvalues());
            out["detail"] = detail;
            out["system"] = to_value(&after);
        }
        Err(e) => out["outcome"] = classify(e)?,
    }
    Ok(out)
}

pub fn solve(set: &ClassSet, opts: &SolveOptions, emit: Option<&Path>, emit_cert: Option<&Path>) -> Outcome {
    match solve_weak_dsp(set, opts) {
        Ok((t, cert)) => {
            if let Some(path) = emit {
                write_json(path, &t)?;
            }
            if let Some(path) = emit_cert {
                write_json(path, &cert)?;
            }
            Ok(json!({ "outcome": "solved", "tuple": t, "certificate": cert }))
        }
        Err(e) => classify(e),
    }
}

/// One line of the batch summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchRow {
    pub file: String,
    pub kind: String,
    pub ok: bool,
    pub summary: String,
}

fn batch_one(path: &Path, seed: u64) -> Result<(String, Value, String), Failure> {
    let raw: Value = read_json(path)?;
    if raw.get("classes").is_some() {
        let set: ClassSet = serde_json::from_value(raw).map_err(|e| Failure::Usage(e.to_string()))?;
        let r = criteria(&set)?;
        let summary = r["weak_dsp"]["status"].as_str().unwrap_or("no verdict").to_string();
        Ok(("classes".into(), envelope("criteria", seed, r), format!("weak-dsp {summary}")))
    } else if raw.get("poles").is_some() {
        let sys: FuchsianSystem = serde_json::from_value(raw).map_err(|e| Failure::Usage(e.to_string()))?;
        let r = verify_report(&sys.tuple());
        let summary = format!("system, centralizer dim {}", r["centralizer_dimension"]);
        Ok(("system".into(), envelope("verify", seed, r), summary))
    } else if raw.get("matrices").is_some() {
        let t: MatrixTuple = serde_json::from_value(raw).map_err(|e| Failure::Usage(e.to_string()))?;
        let r = verify_report(&t);
        let summary = format!(
            "residual zero {}, centralizer dim {}, irreducible {}",
            r["residual_zero"], r["centralizer_dimension"], r["irreducible"]
        );
        Ok(("tuple".into(), envelope("verify", seed, r), summary))
    } else {
        Err(Failure::Usage("unrecognized input: expected `classes`, `poles` or `matrices`".into()))
    }
}

pub fn batch(dir: &Path, out_dir: Option<&Path>, exec: Execution, seed: u64) -> Outcome {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if let Some(d) = out_dir {
        fs::create_dir_all(d).map_err(|e| Failure::Usage(format!("{}: {e}", d.display())))?;
    }
    let results = par::map(exec, &files, |p| batch_one(p, seed));
    let mut rows = Vec::with_capacity(files.len());
    for (path, res) in files.iter().zip(results) {
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let row = match res {
            Ok((kind, report, summary)) => {
                if let Some(d) = out_dir {
                    let stem = path.file_stem().unwrap().to_string_lossy();
                    write_json(&d.join(format!("{stem}.report.json")), &report)?;
                }
                BatchRow { file, kind, ok: true, summary }
            }
            Err(Failure::Internal(m)) => return Err(Failure::Internal(format!("{file}: {m}"))),
            Err(Failure::Usage(m)) => BatchRow { file, kind: "error".into(), ok: false, summary: m },
        };
        rows.push(row);
    }
    let failed = rows.iter().filter(|r| !r.ok).count();
    Ok(json!({ "files": rows.len(), "failed": failed, "parallel": exec.is_parallel(), "rows": rows }))
}

/// Fixed-width text rendering of the `rows` of a batch report.
pub fn summary_table(report: &Value) -> String {
    let rows = report["rows"].as_array().cloned().unwrap_or_default();
    let cell = |r: &Value, k: &str| match &r[k] {
        Value::String(s) => s.clone(),
        v => v.to_string(),
    };
    let width = rows.iter().map(|r| cell(r, "file").len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:<width$}  {:<7}  {:<5}  summary\n", "file", "kind", "ok");
    for r in &rows {
        s += &format!("{:<width$}  {:<7}  {:<5}  {}\n", cell(r, "file"), cell(r, "kind"), cell(r, "ok"), cell(r, "summary"));
    }
    s
}
