//! Verification driver: hypotheses, closed form, oracle and defining equations
//! for one instance, and seeded batches of generated instances.

use std::path::Path;

use ddz_core::blocks::{abio_truncation_gap, check_hypotheses, BlockInstance, HypothesisReport, Side, Theorem};
use ddz_core::digraphs::{bipartite_dual, bipartite_dual_hypotheses, DutchWindmill, GraphSpec};
use ddz_core::drazin::{defining_residuals, dual_drazin, dual_exists};
use ddz_core::{DualMatrix, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exact::{ExactDual, ExactError, ExactSpectral};
use crate::harness::{gen_instance, GenConfig, GenError, Instance, Target};
use crate::io::{instance_to_string, write_instance, IoError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzOptions {
    pub tol: Tolerances,
    /// Bound on the closed-form vs oracle error and on the defining residuals.
    pub compare: f64,
    /// Re-check the hypotheses in exact rational arithmetic.
    pub exact: bool,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), compare: 1e-8, exact: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    HypothesisViolated,
    /// Hypotheses pass but the assembled matrix has no dual Drazin inverse.
    AssembledOutsideDcz,
    Mismatch,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub target: String,
    pub digest: String,
    pub order: usize,
    pub hypotheses: Vec<ConditionRecord>,
    pub exact_hypotheses: Option<bool>,
    pub assembled_in_dcz: Option<bool>,
    pub closed_form_evaluated: bool,
    pub rel_error: Option<f64>,
    pub defining_residuals: Option<[f64; 3]>,
    pub truncation_gap: Option<f64>,
    pub error: Option<String>,
    pub outcome: Outcome,
    pub pass: bool,
}

impl TrialRecord {
    /// Worth persisting: hypotheses hold yet the closed form disagrees or fails.
    pub fn is_counterexample(&self) -> bool {
        matches!(self.outcome, Outcome::Mismatch | Outcome::AssembledOutsideDcz)
            || (self.outcome == Outcome::Error && self.hypotheses.iter().all(|c| c.pass) && !self.hypotheses.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub record: &'static str,
    pub target: String,
    pub seed: u64,
    pub trials: usize,
    pub dim_max: usize,
    pub entry_scale: i64,
    pub violate: bool,
    pub pass_count: usize,
    pub hypothesis_violations: usize,
    pub outside_dcz: usize,
    pub mismatches: usize,
    pub errors: usize,
    pub closed_form_evaluations: usize,
    pub max_rel_error: f64,
    pub max_defining_residual: f64,
    pub max_truncation_gap: Option<f64>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl VerifyReport {
    /// Every trial behaved as the configuration intends: all pass, or, for
    /// violating runs, every hypothesis violation was caught.
    pub fn as_expected(&self) -> bool {
        if self.summary.violate {
            self.summary.hypothesis_violations == self.summary.trials
        } else {
            self.summary.pass_count == self.summary.trials
        }
    }

    /// One JSON object per trial, then the summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest(inst: &Instance) -> String {
    hex(&Sha256::digest(instance_to_string(inst).as_bytes())[..16])
}

/// Default target for a loaded instance.
pub fn target_of(inst: &Instance) -> Target {
    match inst {
        Instance::Block(b) => Target::Block(b.theorem),
        Instance::Graph(GraphSpec::DoubleStar(_)) => Target::DoubleStar,
        Instance::Graph(GraphSpec::DLinkedStars(_)) => Target::DLinkedStars,
        Instance::Graph(GraphSpec::DutchWindmill(_)) => Target::DutchWindmill,
        Instance::BipartiteDual { .. } => Target::BipartiteDual,
    }
}

fn mismatch(target: Target) -> ddz_core::Error {
    ddz_core::Error::SpecInvalid(format!("instance does not fit target {target}"))
}

fn windmill(inst: &Instance, target: Target) -> ddz_core::Result<&DutchWindmill> {
    match inst {
        Instance::Graph(GraphSpec::DutchWindmill(w)) => Ok(w),
        _ => Err(mismatch(target)),
    }
}

/// The float hypothesis report for `target`.
pub fn hypotheses(target: Target, inst: &Instance, tol: &Tolerances) -> ddz_core::Result<HypothesisReport> {
    match (target, inst) {
        (Target::Block(t), Instance::Block(b)) if b.theorem == t => check_hypotheses(b, tol),
        (Target::DoubleStar, Instance::Graph(g @ GraphSpec::DoubleStar(_)))
        | (Target::DLinkedStars, Instance::Graph(g @ GraphSpec::DLinkedStars(_))) => g.hypotheses(tol),
        (Target::DutchWindmill | Target::WindmillGroup, _) => windmill(inst, target)?.hypotheses(tol),
        (Target::WindmillBcZero, _) => windmill(inst, target)?.hypotheses_bc_zero(tol),
        (Target::BipartiteDual, Instance::BipartiteDual { e, f }) => bipartite_dual_hypotheses(e, f, tol),
        _ => Err(mismatch(target)),
    }
}

/// The matrix the closed form inverts.
pub fn assembled(inst: &Instance, tol: &Tolerances) -> ddz_core::Result<DualMatrix> {
    match inst {
        Instance::Block(b) => b.assemble(),
        Instance::Graph(g) => Ok(g.build(tol)?.matrix),
        Instance::BipartiteDual { e, f } => ddz_core::blocks::bipartite_assemble(e, f),
    }
}

pub fn closed_form(target: Target, inst: &Instance, tol: &Tolerances) -> ddz_core::Result<DualMatrix> {
    match (target, inst) {
        (Target::Block(_), Instance::Block(b)) => b.closed_form(tol),
        (Target::DutchWindmill, _) => windmill(inst, target)?.dual_drazin(tol),
        (Target::WindmillBcZero, _) => windmill(inst, target)?.dual_drazin_bc_zero(tol),
        (Target::WindmillGroup, _) => windmill(inst, target)?.dual_group(tol),
        (Target::DoubleStar | Target::DLinkedStars, Instance::Graph(g)) => g.dual_drazin(tol),
        (Target::BipartiteDual, Instance::BipartiteDual { e, f }) => bipartite_dual(e, f, tol),
        _ => Err(mismatch(target)),
    }
}

fn exact(x: &DualMatrix) -> Result<ExactDual, ExactError> {
    ExactDual::from_dual(x)
}

/// Conditions that must hold exactly for `target`, evaluated in rational arithmetic.
pub fn exact_hypotheses(target: Target, inst: &Instance) -> Result<Vec<(String, bool)>, ExactError> {
    let member = |name: &str, x: &DualMatrix| -> Result<(String, bool), ExactError> {
        Ok((name.to_string(), ExactSpectral::new(&exact(x)?).exists))
    };
    let zero = |name: &str, x: ExactDual| (name.to_string(), x.is_zero());
    let shape = || ExactError::Shape(format!("instance does not fit target {target}"));
    let mut out = Vec::new();
    match (target, inst) {
        (Target::Block(t), Instance::Block(b)) => {
            let g = |n: &str| b.blocks.get(n).ok_or_else(shape);
            match t {
                Theorem::Cline => out.push(member("BA in DC_z", &(g("B")? * g("A")?))?),
                Theorem::Bipartite => out.push(member("BC in DC_z", &(g("B")? * g("C")?))?),
                Theorem::TriUpper | Theorem::TriLower => {
                    out.push(member("A in DC_z", g("A")?)?);
                    out.push(member("D in DC_z", g("D")?)?);
                    out.push(member("assembled in DC_z", &b.assemble().map_err(|e| ExactError::Shape(e.to_string()))?)?);
                }
                Theorem::SumPq0 => {
                    out.push(member("P in DC_z", g("P")?)?);
                    out.push(member("Q in DC_z", g("Q")?)?);
                    out.push(zero("PQ = 0", &exact(g("P")?)? * &exact(g("Q")?)?));
                }
                Theorem::AbioRight | Theorem::AbioLeft | Theorem::AbcoRight | Theorem::AbcoLeft => {
                    let x = match t {
                        Theorem::AbioRight | Theorem::AbioLeft => g("B")?.clone(),
                        _ => g("B")? * g("C")?,
                    };
                    let right = matches!(t, Theorem::AbioRight | Theorem::AbcoRight);
                    out.extend(exact_commuting(g("A")?, &x, right)?);
                }
            }
        }
        (Target::DoubleStar, Instance::Graph(GraphSpec::DoubleStar(s))) => {
            out.push(zero("w^T v = 0", &exact(&s.w)?.transpose() * &exact(&s.v)?));
        }
        (Target::DLinkedStars, Instance::Graph(GraphSpec::DLinkedStars(s))) => {
            for (i, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
                out.push(zero(&format!("x_{i}^T y_{i} = 0"), &exact(x)?.transpose() * &exact(y)?));
            }
        }
        (Target::DutchWindmill | Target::WindmillGroup | Target::WindmillBcZero, Instance::Graph(GraphSpec::DutchWindmill(w))) => {
            let d = DualMatrix::block_diag(&w.blades);
            let col: Vec<&DualMatrix> = w.y.iter().collect();
            let rows: Vec<[&DualMatrix; 1]> = col.iter().map(|v| [*v]).collect();
            let refs: Vec<&[&DualMatrix]> = rows.iter().map(|r| &r[..]).collect();
            let c = DualMatrix::from_blocks(&refs).map_err(|e| ExactError::Shape(e.to_string()))?;
            let xt: Vec<DualMatrix> = w.x.iter().map(|v| v.transpose()).collect();
            let b = DualMatrix::from_blocks(&[&xt.iter().collect::<Vec<_>>()]).map_err(|e| ExactError::Shape(e.to_string()))?;
            let phi = &exact(&c)? * &exact(&b)?;
            if target == Target::WindmillBcZero {
                out.push(zero("y_s x_t^T = 0", phi));
            } else {
                let de = exact(&d)?;
                let sd = ExactSpectral::new(&de);
                out.push(zero("D_s D_s^e y_s x_t^T = 0", &(&de * &sd.dual_e(&de)) * &phi));
                let rhs = &phi * &(&de * &sd.dual_pi(&de));
                out.push(zero("D_s y_s x_t^T = y_s x_t^T D_t D_t^pi", &(&de * &phi) - &rhs));
            }
        }
        (Target::BipartiteDual, Instance::BipartiteDual { e, f }) => out.push(member("FE in DC_z", &(f * e))?),
        _ => return Err(shape()),
    }
    Ok(out)
}

fn exact_commuting(a: &DualMatrix, x: &DualMatrix, right: bool) -> Result<Vec<(String, bool)>, ExactError> {
    let ae = exact(a)?;
    let xe = exact(x)?;
    let sa = ExactSpectral::new(&ae);
    let sx = ExactSpectral::new(&xe);
    let aapi = &ae * &sa.dual_pi(&ae);
    let aae = &ae * &sa.dual_e(&ae);
    let side = if right { (&aae * &xe).is_zero() } else { (&xe * &aae).is_zero() };
    Ok(vec![
        ("A in DC_z".into(), sa.exists),
        ("X in DC_z".into(), sx.exists),
        ("A A^pi X = X A A^pi".into(), (&(&aapi * &xe) - &(&xe * &aapi)).is_zero()),
        (if right { "A A^e X = 0" } else { "X A A^e = 0" }.into(), side),
    ])
}

fn rel_error(x: &DualMatrix, reference: &DualMatrix) -> f64 {
    (x - reference).norm() / reference.norm().max(1.0)
}

/// Full check of one instance against `target`'s closed form.
pub fn evaluate(target: Target, inst: &Instance, opts: &FuzzOptions) -> TrialRecord {
    let mut rec = TrialRecord {
        trial: 0,
        target: target.name(),
        digest: digest(inst),
        order: 0,
        hypotheses: Vec::new(),
        exact_hypotheses: None,
        assembled_in_dcz: None,
        closed_form_evaluated: false,
        rel_error: None,
        defining_residuals: None,
        truncation_gap: None,
        error: None,
        outcome: Outcome::Error,
        pass: false,
    };
    if let Err(e) = evaluate_into(&mut rec, target, inst, opts) {
        rec.error = Some(e.to_string());
        rec.outcome = Outcome::Error;
        rec.pass = false;
    }
    rec
}

fn evaluate_into(rec: &mut TrialRecord, target: Target, inst: &Instance, opts: &FuzzOptions) -> ddz_core::Result<()> {
    let tol = &opts.tol;
    let report = hypotheses(target, inst, tol)?;
    rec.hypotheses = report
        .conditions
        .iter()
        .map(|c| ConditionRecord { name: c.name.clone(), residual: c.residual, pass: c.pass })
        .collect();
    if opts.exact {
        rec.exact_hypotheses = exact_hypotheses(target, inst).ok().map(|v| v.iter().all(|(_, ok)| *ok));
    }
    let m = assembled(inst, tol)?;
    rec.order = m.nrows();
    if !report.all_pass() {
        rec.outcome = Outcome::HypothesisViolated;
        return Ok(());
    }
    let ex = dual_exists(&m, tol)?;
    rec.assembled_in_dcz = Some(ex.holds);
    if !ex.holds {
        rec.outcome = Outcome::AssembledOutsideDcz;
        return Ok(());
    }
    let cf = closed_form(target, inst, tol)?;
    rec.closed_form_evaluated = true;
    let oracle = dual_drazin(&m, tol)?;
    let err = rel_error(&cf, &oracle.inverse);
    let res = defining_residuals(&m, &cf, oracle.index());
    rec.rel_error = Some(err);
    rec.defining_residuals = Some(res);
    if let (Target::Block(t @ (Theorem::AbioRight | Theorem::AbioLeft)), Instance::Block(b)) = (target, inst) {
        let side = if t == Theorem::AbioRight { Side::Right } else { Side::Left };
        rec.truncation_gap = abio_gap(b, side, tol);
    }
    let within = err <= opts.compare && res.iter().all(|r| *r <= opts.compare);
    rec.pass = within && rec.exact_hypotheses != Some(false);
    rec.outcome = if rec.pass { Outcome::Pass } else { Outcome::Mismatch };
    Ok(())
}

fn abio_gap(b: &BlockInstance, side: Side, tol: &Tolerances) -> Option<f64> {
    abio_truncation_gap(b.block("A").ok()?, b.block("B").ok()?, side, tol).ok()
}

/// Runs `cfg.trials` generated instances in parallel; records stay in trial order.
pub fn fuzz(cfg: &GenConfig, opts: &FuzzOptions) -> Result<VerifyReport, GenError> {
    cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rec = match gen_instance(cfg, trial) {
                Ok(inst) => evaluate(cfg.target, &inst, opts),
                Err(e) => TrialRecord {
                    trial,
                    target: cfg.target.name(),
                    digest: String::new(),
                    order: 0,
                    hypotheses: Vec::new(),
                    exact_hypotheses: None,
                    assembled_in_dcz: None,
                    closed_form_evaluated: false,
                    rel_error: None,
                    defining_residuals: None,
                    truncation_gap: None,
                    error: Some(e.to_string()),
                    outcome: Outcome::Error,
                    pass: false,
                },
            };
            rec.trial = trial;
            rec
        })
        .collect();
    Ok(summarize(cfg, records))
}

fn summarize(cfg: &GenConfig, records: Vec<TrialRecord>) -> VerifyReport {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
    let mut hasher = Sha256::new();
    for r in &records {
        hasher.update(serde_json::to_string(r).expect("record serializes").as_bytes());
        hasher.update(b"\n");
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.truncation_gap).collect();
    let summary = Summary {
        record: "summary",
        target: cfg.target.name(),
        seed: cfg.seed,
        trials: cfg.trials,
        dim_max: cfg.dim_max,
        entry_scale: cfg.entry_scale,
        violate: cfg.violate,
        pass_count: records.iter().filter(|r| r.pass).count(),
        hypothesis_violations: count(Outcome::HypothesisViolated),
        outside_dcz: count(Outcome::AssembledOutsideDcz),
        mismatches: count(Outcome::Mismatch),
        errors: count(Outcome::Error),
        closed_form_evaluations: records.iter().filter(|r| r.closed_form_evaluated).count(),
        max_rel_error: records.iter().filter_map(|r| r.rel_error).fold(0.0, f64::max),
        max_defining_residual: records
            .iter()
            .filter_map(|r| r.defining_residuals)
            .flat_map(|r| r.into_iter())
            .fold(0.0, f64::max),
        max_truncation_gap: if gaps.is_empty() { None } else { Some(gaps.iter().copied().fold(0.0, f64::max)) },
        digest: hex(&hasher.finalize()),
    };
    VerifyReport { records, summary }
}

/// Writes every counterexample instance of `report` into `dir`; returns the paths.
pub fn write_counterexamples(cfg: &GenConfig, report: &VerifyReport, dir: &Path) -> Result<Vec<String>, IoError> {
    let mut paths = Vec::new();
    for r in report.records.iter().filter(|r| r.is_counterexample()) {
        let inst = gen_instance(cfg, r.trial).map_err(|e| IoError::Schema(e.to_string()))?;
        std::fs::create_dir_all(dir).map_err(|source| IoError::Write { path: dir.display().to_string(), source })?;
        let path = dir.join(format!("{}-seed{}-trial{}.json", cfg.target, cfg.seed, r.trial));
        write_instance(&path, &inst)?;
        paths.push(path.display().to_string());
    }
    Ok(paths)
}
