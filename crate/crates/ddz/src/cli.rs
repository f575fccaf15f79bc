//! Command-line front end. [`run`] parses arguments, executes one verb and
//! returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddz_core::blocks::{check_hypotheses, BlockInstance, Theorem};
use ddz_core::digraphs::{DLinkedStars, DoubleStar, DutchWindmill, GraphSpec};
use ddz_core::drazin::{drazin_complex, dual_drazin, dual_exists};
use ddz_core::{ComplexMatrix, DualMatrix, Tolerances};
use serde_json::{json, Value};

use crate::exact::smith_rank_oracle;
use crate::fuzz::{evaluate, fuzz, target_of, write_counterexamples, FuzzOptions, Outcome};
use crate::harness::{GenConfig, Instance, Target};
use crate::io::{self, IoError, MatrixJson, ScalarJson, VectorJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NOT_INVERTIBLE: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ddz", version, about = "Dual complex Drazin inverses, block formulas and weighted digraphs")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Relative singular-value threshold for numerical rank.
    #[arg(long, global = true, env = "DDZ_RANK_TOL")]
    pub rank_tol: Option<f64>,
    /// Threshold for existence and hypothesis residuals.
    #[arg(long, global = true, env = "DDZ_RESIDUAL_TOL")]
    pub residual_tol: Option<f64>,
    /// Require hypothesis residuals to be exactly zero.
    #[arg(long, global = true)]
    pub strict: bool,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(r) = self.rank_tol {
            t = t.with_rank(r);
        }
        if let Some(r) = self.residual_tol {
            t = t.with_residual(r);
        }
        if self.strict {
            t = t.strict();
        }
        t
    }
}

#[derive(Debug, Args)]
pub struct Io1 {
    /// Input dual matrix.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Blocks given either as one instance file or as separate matrix files.
#[derive(Debug, Args)]
pub struct BlockArgs {
    /// Block instance file.
    #[arg(short, long, conflicts_with_all = ["a", "b", "c", "d"])]
    pub instance: Option<PathBuf>,
    #[arg(short = 'a', long = "a")]
    pub a: Option<PathBuf>,
    #[arg(short = 'b', long = "b")]
    pub b: Option<PathBuf>,
    #[arg(short = 'c', long = "c")]
    pub c: Option<PathBuf>,
    #[arg(short = 'd', long = "d")]
    pub d: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrientationArg {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    DoubleStar,
    DLinkedStars,
    DutchWindmill,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Drazin inverse of the standard part.
    Drazin(Io1),
    /// Dual Drazin inverse.
    DualDrazin(Io1),
    /// Existence test for the dual Drazin inverse; exit 3 when it fails.
    Exists(Io1),
    /// Standard, dual and embedding indices.
    Index(Io1),
    /// Standard and dual ranks, with exact pivot counts for Gaussian-integer input.
    Rank(Io1),
    /// `(AB)^D` from `(BA)^D`.
    Cline(BlockArgs),
    /// Block triangular `[[A, B], [0, D]]` or `[[D, 0], [B, A]]`.
    Tri {
        #[arg(long, value_enum, default_value = "upper")]
        orientation: OrientationArg,
        #[command(flatten)]
        blocks: BlockArgs,
    },
    /// `[[A, B], [I, 0]]`.
    Abio {
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[command(flatten)]
        blocks: BlockArgs,
    },
    /// `[[A, B], [C, 0]]`.
    Abco {
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[command(flatten)]
        blocks: BlockArgs,
    },
    /// `[[0, B], [C, 0]]`.
    Bipartite(BlockArgs),
    /// Adjacency matrix of a weighted digraph.
    Graph(GraphArgs),
    /// Check one instance file against its closed form and the oracle.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        /// Formula to check; defaults to the family or theorem of the file.
        #[arg(long)]
        target: Option<String>,
        /// JSON-lines report; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Seeded random verification of one theorem or formula.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Leaves of the first star, or number of windmill blades.
    #[arg(long)]
    pub m: Option<usize>,
    /// Leaves of the second star, base order of linked stars, or half the windmill cycle length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Leaf counts of linked stars, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<usize>>,
    /// JSON object overriding the unit weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Also evaluate the family's closed-form dual Drazin inverse into this file.
    #[arg(long)]
    pub inverse: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Theorem or graph formula, e.g. `abco-right` or `windmill-bc-zero`.
    #[arg(long, alias = "target")]
    pub theorem: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub dim_max: usize,
    #[arg(long, default_value_t = 2)]
    pub entry_scale: i64,
    /// Generate instances that break a hypothesis.
    #[arg(long)]
    pub violate: bool,
    /// Skip the exact rational re-check of the hypotheses.
    #[arg(long)]
    pub no_exact: bool,
    /// Bound on the oracle error and defining residuals.
    #[arg(long, default_value_t = 1e-8)]
    pub compare_tol: f64,
    /// Directory for counterexample instance files.
    #[arg(long)]
    pub counterexamples: Option<PathBuf>,
    /// JSON-lines report; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<ddz_core::Error> for Failure {
    fn from(e: ddz_core::Error) -> Self {
        use ddz_core::Error as E;
        let code = match e {
            E::HypothesisViolated { .. } => EXIT_HYPOTHESIS,
            E::NotDualDrazinInvertible { .. } => EXIT_NOT_INVERTIBLE,
            E::ShapeMismatch(_) | E::SpecInvalid(_) | E::NonFinite | E::NotAppreciable(_) => EXIT_SCHEMA,
            E::IndexTooLarge { .. } => EXIT_OTHER,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = if matches!(e, IoError::Schema(_)) { EXIT_SCHEMA } else { EXIT_OTHER };
        Failure::new(code, e.to_string())
    }
}

type Outcome_ = Result<(), Failure>;

fn emit(output: Option<&Path>, text: &str) -> Outcome_ {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(EXIT_OTHER, format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))
        }
    }
}

fn emit_json<T: serde::Serialize>(output: Option<&Path>, value: &T) -> Outcome_ {
    let mut text = serde_json::to_string(value).map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    text.push('\n');
    emit(output, &text)
}

fn emit_matrix(output: Option<&Path>, x: &DualMatrix) -> Outcome_ {
    emit_json(output, &MatrixJson::from_dual(x))
}

/// Parses `args` (including the program name) and runs the verb.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_OTHER } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("ddz: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome_ {
    let tol = cli.tol.tolerances();
    match &cli.verb {
        Verb::Drazin(a) => {
            let x = io::read_matrix(&a.input)?;
            if !x.inf.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                return Err(Failure::new(EXIT_SCHEMA, "drazin takes a complex matrix; use dual-drazin for dual input"));
            }
            let d = drazin_complex(&x.std, &tol)?;
            emit_json(a.output.as_deref(), &MatrixJson::from_complex(&d.ad))
        }
        Verb::DualDrazin(a) => {
            let x = io::read_matrix(&a.input)?;
            emit_matrix(a.output.as_deref(), &dual_drazin(&x, &tol)?.inverse)
        }
        Verb::Exists(a) => {
            let x = io::read_matrix(&a.input)?;
            let ex = dual_exists(&x, &tol)?;
            let v = json!({"exists": ex.holds, "residual": ex.residual, "ind_std": ex.drazin.index});
            emit_json(a.output.as_deref(), &v)?;
            if ex.holds {
                Ok(())
            } else {
                Err(Failure::new(EXIT_NOT_INVERTIBLE, format!("no dual Drazin inverse (residual {:e})", ex.residual)))
            }
        }
        Verb::Index(a) => {
            let x = io::read_matrix(&a.input)?;
            let r = x.indices(&tol)?;
            emit_json(a.output.as_deref(), &json!({"ind_std": r.ind_std, "ind_dual": r.ind_dual, "ind_phi": r.ind_phi}))
        }
        Verb::Rank(a) => {
            let x = io::read_matrix(&a.input)?;
            let mut v = json!({"rank_std": x.rank_std(&tol), "rank_dual": x.rank_dual(&tol)});
            if let Ok((r, s)) = smith_rank_oracle(&x) {
                v["exact"] = json!({"unit_pivots": r, "eps_pivots": s});
            }
            emit_json(a.output.as_deref(), &v)
        }
        Verb::Cline(b) => block_verb(Theorem::Cline, b, &tol),
        Verb::Tri { orientation, blocks } => {
            let t = match orientation {
                OrientationArg::Upper => Theorem::TriUpper,
                OrientationArg::Lower => Theorem::TriLower,
            };
            block_verb(t, blocks, &tol)
        }
        Verb::Abio { side, blocks } => {
            let t = match side {
                SideArg::Right => Theorem::AbioRight,
                SideArg::Left => Theorem::AbioLeft,
            };
            block_verb(t, blocks, &tol)
        }
        Verb::Abco { side, blocks } => {
            let t = match side {
                SideArg::Right => Theorem::AbcoRight,
                SideArg::Left => Theorem::AbcoLeft,
            };
            block_verb(t, blocks, &tol)
        }
        Verb::Bipartite(b) => block_verb(Theorem::Bipartite, b, &tol),
        Verb::Graph(g) => graph_verb(g, &tol),
        Verb::Verify { input, target, output } => {
            let inst = io::read_instance(input)?;
            let target = match target {
                Some(t) => t.parse::<Target>().map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?,
                None => target_of(&inst),
            };
            let opts = FuzzOptions { tol, ..FuzzOptions::default() };
            let rec = evaluate(target, &inst, &opts);
            emit_json(output.as_deref(), &rec)?;
            match rec.outcome {
                Outcome::Pass => Ok(()),
                Outcome::HypothesisViolated => Err(Failure::new(EXIT_HYPOTHESIS, "hypothesis violated")),
                Outcome::AssembledOutsideDcz => {
                    Err(Failure::new(EXIT_NOT_INVERTIBLE, "hypotheses hold but the assembled matrix has no dual Drazin inverse"))
                }
                Outcome::Mismatch => Err(Failure::new(EXIT_OTHER, "closed form disagrees with the oracle")),
                Outcome::Error => Err(Failure::new(EXIT_OTHER, rec.error.unwrap_or_default())),
            }
        }
        Verb::Fuzz(f) => fuzz_verb(f, &tol),
    }
}

fn load_blocks(t: Theorem, b: &BlockArgs) -> Result<BlockInstance, Failure> {
    if let Some(p) = &b.instance {
        return match io::read_instance(p)? {
            Instance::Block(inst) if inst.theorem == t => Ok(inst),
            Instance::Block(inst) => {
                Err(Failure::new(EXIT_SCHEMA, format!("instance is for {}, expected {}", inst.theorem.name(), t.name())))
            }
            _ => Err(Failure::new(EXIT_SCHEMA, "expected a block instance file")),
        };
    }
    let mut blocks = Vec::new();
    for name in t.block_names() {
        let path = match *name {
            "A" | "P" => &b.a,
            "B" | "Q" => &b.b,
            "C" => &b.c,
            _ => &b.d,
        };
        let path = path
            .as_ref()
            .ok_or_else(|| Failure::new(EXIT_OTHER, format!("{} needs block {name} (or --instance)", t.name())))?;
        blocks.push((*name, io::read_matrix(path)?));
    }
    Ok(BlockInstance::new(t, &blocks))
}

fn block_verb(t: Theorem, b: &BlockArgs, tol: &Tolerances) -> Outcome_ {
    let inst = load_blocks(t, b)?;
    check_hypotheses(&inst, tol)?.into_result()?;
    emit_matrix(b.output.as_deref(), &inst.closed_form(tol)?)
}

fn field<T: serde::de::DeserializeOwned>(w: &Value, key: &str) -> Result<Option<T>, Failure> {
    match w.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Failure::new(EXIT_SCHEMA, format!("weights field {key}: {e}"))),
    }
}

fn vec_field(w: &Value, key: &str) -> Result<Option<DualMatrix>, Failure> {
    Ok(match field::<VectorJson>(w, key)? {
        Some(v) => Some(v.to_dual()?),
        None => None,
    })
}

fn vecs_field(w: &Value, key: &str) -> Result<Option<Vec<DualMatrix>>, Failure> {
    Ok(match field::<Vec<VectorJson>>(w, key)? {
        Some(v) => Some(v.iter().map(VectorJson::to_dual).collect::<Result<_, _>>()?),
        None => None,
    })
}

fn ones(k: usize) -> DualMatrix {
    DualMatrix::from_std(ComplexMatrix::from_element(k, 1, 1.0.into()))
}

fn need(v: Option<usize>, what: &str) -> Result<usize, Failure> {
    v.filter(|&k| k > 0).ok_or_else(|| Failure::new(EXIT_OTHER, format!("{what} must be given and positive")))
}

fn graph_spec(g: &GraphArgs) -> Result<GraphSpec, Failure> {
    let w = match &g.weights {
        Some(p) => io::read_value(p)?,
        None => Value::Object(Default::default()),
    };
    if !w.is_object() {
        return Err(Failure::new(EXIT_SCHEMA, "weights must be a JSON object"));
    }
    Ok(match g.family {
        Family::DoubleStar => {
            let x = vec_field(&w, "x")?;
            let w_vec = vec_field(&w, "w")?;
            let m = g.m.or(x.as_ref().map(|v| v.nrows()));
            let n = g.n.or(w_vec.as_ref().map(|v| v.nrows()));
            let mut s = DoubleStar::unit(need(m, "--m")?, need(n, "--n")?);
            if let Some(v) = x {
                s.x = v;
            }
            if let Some(v) = w_vec {
                s.w = v;
            }
            if let Some(v) = vec_field(&w, "y")? {
                s.y = v;
            }
            if let Some(v) = vec_field(&w, "v")? {
                s.v = v;
            }
            if let Some(a) = field::<ScalarJson>(&w, "a")? {
                s.a = a.to_dual()?;
            }
            if let Some(b) = field::<ScalarJson>(&w, "b")? {
                s.b = b.to_dual()?;
            }
            GraphSpec::DoubleStar(s)
        }
        Family::DLinkedStars => {
            let base = match field::<MatrixJson>(&w, "base")? {
                Some(b) => b.to_dual()?,
                None => {
                    let n = need(g.n.or(g.r.as_ref().map(Vec::len)), "--n")?;
                    // complete digraph on the centers
                    let mut b = DualMatrix::zeros(n, n);
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                b.set(i, j, ddz_core::DualScalar::ONE);
                            }
                        }
                    }
                    b
                }
            };
            let x = vecs_field(&w, "x")?;
            let r: Vec<usize> = match (&g.r, &x) {
                (Some(r), _) => r.clone(),
                (None, Some(x)) => x.iter().map(|v| v.nrows()).collect(),
                (None, None) => return Err(Failure::new(EXIT_OTHER, "d-linked-stars needs --r or x weights")),
            };
            let s = DLinkedStars {
                base,
                x: x.unwrap_or_else(|| r.iter().map(|&k| ones(k)).collect()),
                y: vecs_field(&w, "y")?.unwrap_or_else(|| r.iter().map(|&k| ones(k)).collect()),
            };
            GraphSpec::DLinkedStars(s)
        }
        Family::DutchWindmill => {
            let blades = match field::<Vec<MatrixJson>>(&w, "blades")? {
                Some(b) => Some(b.iter().map(MatrixJson::to_dual).collect::<Result<Vec<_>, _>>()?),
                None => None,
            };
            let m = g.m.or(blades.as_ref().map(Vec::len));
            let half = g.n.or(field::<usize>(&w, "half")?);
            let mut s = DutchWindmill::unit(need(m, "--m")?, need(half, "--n")?);
            if let Some(b) = blades {
                s.blades = b;
            }
            if let Some(v) = vecs_field(&w, "x")? {
                s.x = v;
            }
            if let Some(v) = vecs_field(&w, "y")? {
                s.y = v;
            }
            GraphSpec::DutchWindmill(s)
        }
    })
}

fn graph_verb(g: &GraphArgs, tol: &Tolerances) -> Outcome_ {
    let spec = graph_spec(g)?;
    let build = spec.build(tol)?;
    if let Some(p) = &g.inverse {
        let inv = spec.dual_drazin(tol)?;
        io::write_matrix(p, &inv)?;
    }
    emit_json(g.output.as_deref(), &MatrixJson::from_build(&build))
}

fn fuzz_verb(f: &FuzzArgs, tol: &Tolerances) -> Outcome_ {
    let target: Target = f.theorem.parse().map_err(|e: crate::harness::GenError| Failure::new(EXIT_OTHER, e.to_string()))?;
    let cfg = GenConfig {
        target,
        dim_max: f.dim_max,
        seed: f.seed,
        entry_scale: f.entry_scale,
        trials: f.trials,
        violate: f.violate,
    };
    let opts = FuzzOptions { tol: *tol, compare: f.compare_tol, exact: !f.no_exact };
    let report = fuzz(&cfg, &opts).map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    emit(f.output.as_deref(), &report.to_jsonl())?;
    if let Some(dir) = &f.counterexamples {
        for p in write_counterexamples(&cfg, &report, dir)? {
            eprintln!("ddz: counterexample written to {p}");
        }
    }
    let s = &report.summary;
    eprintln!(
        "ddz: {}: {}/{} pass, {} hypothesis violations, {} outside DC_z, {} mismatches, {} errors, max error {:e}",
        s.target, s.pass_count, s.trials, s.hypothesis_violations, s.outside_dcz, s.mismatches, s.errors, s.max_rel_error
    );
    if report.as_expected() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_OTHER, "fuzz run did not meet expectations"))
    }
}
