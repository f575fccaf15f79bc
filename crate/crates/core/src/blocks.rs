//! Closed-form dual Drazin inverses of structured block matrices.
//!
//! Every formula is evaluated in dual arithmetic. Series run up to the
//! standard index of the relevant operand; an empty sum is zero.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::drazin::dual_drazin;
use crate::dualmat::DualMatrix;
use crate::error::{shape, Error, Result};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theorem {
    Cline,
    TriUpper,
    TriLower,
    SumPq0,
    AbioRight,
    AbioLeft,
    AbcoRight,
    Bipartite,
    AbcoLeft,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::Cline,
        Theorem::TriUpper,
        Theorem::TriLower,
        Theorem::SumPq0,
        Theorem::AbioRight,
        Theorem::AbioLeft,
        Theorem::AbcoRight,
        Theorem::Bipartite,
        Theorem::AbcoLeft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Cline => "CLINE",
            Theorem::TriUpper => "TRI_UPPER",
            Theorem::TriLower => "TRI_LOWER",
            Theorem::SumPq0 => "SUM_PQ0",
            Theorem::AbioRight => "ABIO_RIGHT",
            Theorem::AbioLeft => "ABIO_LEFT",
            Theorem::AbcoRight => "ABCO_RIGHT",
            Theorem::Bipartite => "BIPARTITE",
            Theorem::AbcoLeft => "ABCO_LEFT",
        }
    }

    /// Block names the theorem consumes, in assembly order.
    pub fn block_names(self) -> &'static [&'static str] {
        match self {
            Theorem::Cline => &["A", "B"],
            Theorem::TriUpper | Theorem::TriLower => &["A", "B", "D"],
            Theorem::SumPq0 => &["P", "Q"],
            Theorem::AbioRight | Theorem::AbioLeft => &["A", "B"],
            Theorem::AbcoRight | Theorem::AbcoLeft => &["A", "B", "C"],
            Theorem::Bipartite => &["B", "C"],
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    /// Accepts `ABCO_RIGHT`, `abco-right` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .map(|c| if c == '-' { '_' } else { c.to_ascii_uppercase() })
            .collect();
        Theorem::ALL
            .iter()
            .copied()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::SpecInvalid(format!("unknown theorem `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Upper,
    Lower,
}

/// A theorem together with its named blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInstance {
    pub theorem: Theorem,
    pub blocks: BTreeMap<String, DualMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    /// Absolute Frobenius residual.
    pub residual: f64,
    /// Product of the operand norms the residual is measured against.
    pub scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    pub conditions: Vec<Condition>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.pass)
    }

    pub(crate) fn push_residual(&mut self, name: &str, diff: &DualMatrix, scale: f64, tol: &Tolerances) {
        let residual = diff.norm();
        let pass = if tol.strict {
            diff.is_zero()
        } else {
            residual <= tol.hypothesis * (1.0 + scale)
        };
        self.conditions.push(Condition {
            name: name.to_string(),
            residual,
            scale,
            pass,
        });
    }

    pub(crate) fn push_membership(&mut self, name: &str, x: &DualMatrix, tol: &Tolerances) -> Result<()> {
        let ex = crate::drazin::dual_exists(x, tol)?;
        self.conditions.push(Condition {
            name: name.to_string(),
            residual: ex.residual,
            scale: 0.0,
            pass: ex.holds,
        });
        Ok(())
    }

    /// Converts the first failing condition into an error.
    pub fn into_result(self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::HypothesisViolated {
                name: c.name.clone(),
                residual: c.residual,
            }),
        }
    }
}

/// Dual Drazin inverse of one operand with its standard index and projectors.
pub(crate) struct Spectral {
    pub d: DualMatrix,
    pub pi: DualMatrix,
    pub e: DualMatrix,
    pub k: usize,
    pows: Vec<DualMatrix>,
}

impl Spectral {
    pub fn new(x: &DualMatrix, tol: &Tolerances) -> Result<Self> {
        let dd = dual_drazin(x, tol)?;
        let e = x * &dd.inverse;
        let pi = DualMatrix::identity(x.nrows()) - &e;
        Ok(Self {
            k: dd.index(),
            pows: alloc::vec![DualMatrix::identity(x.nrows()), dd.inverse.clone()],
            d: dd.inverse,
            pi,
            e,
        })
    }

    /// `(X^D)^s`.
    pub fn dp(&mut self, s: usize) -> DualMatrix {
        while self.pows.len() <= s {
            let next = self.pows.last().expect("seeded") * &self.d;
            self.pows.push(next);
        }
        self.pows[s].clone()
    }
}

/// Powers `X^0 .. X^max`.
pub(crate) fn powers(x: &DualMatrix, max: usize) -> Vec<DualMatrix> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(DualMatrix::identity(x.nrows()));
    for i in 0..max {
        let next = &out[i] * x;
        out.push(next);
    }
    out
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(shape(msg()))
    }
}

fn square(x: &DualMatrix, name: &str) -> Result<()> {
    need(x.is_square(), || format!("{name} must be square, got {:?}", x.shape()))
}

/// `(A B)^D = A (B A)^(2D) B`.
pub fn cline(a: &DualMatrix, b: &DualMatrix, tol: &Tolerances) -> Result<DualMatrix> {
    need(a.ncols() == b.nrows() && b.ncols() == a.nrows(), || {
        format!("cline needs A m×n and B n×m, got {:?} and {:?}", a.shape(), b.shape())
    })?;
    let ba = b * a;
    let d = dual_drazin(&ba, tol)?.inverse;
    Ok(a * &(&d * &d) * b)
}

fn tri_shapes(a: &DualMatrix, b: &DualMatrix, d: &DualMatrix) -> Result<()> {
    square(a, "A")?;
    square(d, "D")?;
    need(b.nrows() == a.nrows() && b.ncols() == d.nrows(), || {
        format!("B must be {}×{}, got {:?}", a.nrows(), d.nrows(), b.shape())
    })
}

pub fn tri_assemble(a: &DualMatrix, b: &DualMatrix, d: &DualMatrix, orientation: Orientation) -> Result<DualMatrix> {
    tri_shapes(a, b, d)?;
    let z = DualMatrix::zeros(b.ncols(), b.nrows());
    match orientation {
        Orientation::Upper => DualMatrix::from_blocks(&[&[a, b], &[&z, d]]),
        Orientation::Lower => DualMatrix::from_blocks(&[&[d, &z], &[b, a]]),
    }
}

pub fn tri_drazin(
    a: &DualMatrix,
    b: &DualMatrix,
    d: &DualMatrix,
    orientation: Orientation,
    tol: &Tolerances,
) -> Result<DualMatrix> {
    tri_shapes(a, b, d)?;
    let mut report = HypothesisReport::default();
    report.push_membership("assembled in DC_z", &tri_assemble(a, b, d, orientation)?, tol)?;
    report.into_result()?;
    let mut sa = Spectral::new(a, tol)?;
    let mut sd = Spectral::new(d, tol)?;
    let (p, q) = (sa.k, sd.k);
    let a_pows = powers(a, p);
    let d_pows = powers(d, q);
    let mut s = -(&sa.d * b * &sd.d);
    for (i, di) in d_pows.iter().enumerate().take(q) {
        s = s + sa.dp(i + 2) * b * di * &sd.pi;
    }
    let mut tail = DualMatrix::zeros(b.nrows(), b.ncols());
    for (i, ai) in a_pows.iter().enumerate().take(p) {
        tail = tail + ai * b * sd.dp(i + 2);
    }
    s = s + &sa.pi * &tail;
    let z = DualMatrix::zeros(b.ncols(), b.nrows());
    match orientation {
        Orientation::Upper => DualMatrix::from_blocks(&[&[&sa.d, &s], &[&z, &sd.d]]),
        Orientation::Lower => DualMatrix::from_blocks(&[&[&sd.d, &z], &[&s, &sa.d]]),
    }
}

/// `(P + Q)^D` for `P Q = 0`.
pub fn sum_pq_zero(p: &DualMatrix, q: &DualMatrix, tol: &Tolerances) -> Result<DualMatrix> {
    square(p, "P")?;
    need(p.shape() == q.shape(), || format!("P is {:?} but Q is {:?}", p.shape(), q.shape()))?;
    let mut report = HypothesisReport::default();
    report.push_residual("PQ = 0", &(p * q), p.norm() * q.norm(), tol);
    report.into_result()?;
    let mut sp = Spectral::new(p, tol)?;
    let mut sq = Spectral::new(q, tol)?;
    let (r, t) = (sp.k, sq.k);
    let q_pows = powers(q, t);
    let p_pows = powers(p, r);
    let n = p.nrows();
    let mut first = DualMatrix::zeros(n, n);
    for (i, qi) in q_pows.iter().enumerate().take(t) {
        first = first + qi * sp.dp(i + 1);
    }
    let mut out = &sq.pi * &first;
    for (i, pi) in p_pows.iter().enumerate().take(r) {
        out = out + sq.dp(i + 1) * pi * &sp.pi;
    }
    Ok(out)
}

fn abio_shapes(a: &DualMatrix, b: &DualMatrix) -> Result<()> {
    square(a, "A")?;
    need(a.shape() == b.shape(), || format!("A is {:?} but B is {:?}", a.shape(), b.shape()))
}

pub fn abio_assemble(a: &DualMatrix, b: &DualMatrix) -> Result<DualMatrix> {
    abio_shapes(a, b)?;
    let n = a.nrows();
    DualMatrix::from_blocks(&[&[a, b], &[&DualMatrix::identity(n), &DualMatrix::zeros(n, n)]])
}

/// Conditions shared by the `[[A, B], [I, 0]]` and `[[A, B], [C, 0]]` families,
/// with `x = B` or `x = B C`.
fn commuting_conditions(
    a: &DualMatrix,
    x: &DualMatrix,
    xname: &str,
    side: Side,
    tol: &Tolerances,
) -> Result<HypothesisReport> {
    let mut report = HypothesisReport::default();
    report.push_membership("A in DC_z", a, tol)?;
    report.push_membership(&format!("{xname} in DC_z"), x, tol)?;
    let ex = crate::drazin::dual_exists(a, tol)?;
    if !ex.holds {
        return Ok(report);
    }
    let sa = Spectral::new(a, tol)?;
    let aapi = a * &sa.pi;
    let aae = a * &sa.e;
    let scale = a.norm() * sa.pi.norm() * x.norm();
    report.push_residual(
        &format!("A A^pi {xname} = {xname} A A^pi"),
        &(&aapi * x - x * &aapi),
        scale,
        tol,
    );
    let scale = a.norm() * sa.e.norm() * x.norm();
    match side {
        Side::Right => report.push_residual(&format!("A A^e {xname} = 0"), &(&aae * x), scale, tol),
        Side::Left => report.push_residual(&format!("{xname} A A^e = 0"), &(x * &aae), scale, tol),
    }
    Ok(report)
}

pub fn abio_drazin(a: &DualMatrix, b: &DualMatrix, side: Side, tol: &Tolerances) -> Result<DualMatrix> {
    abio_shapes(a, b)?;
    commuting_conditions(a, b, "B", side, tol)?.into_result()?;
    let sb = Spectral::new(b, tol)?;
    abio_series(a, b, side, sb.k, tol)
}

/// Largest change in the `[[A, B], [I, 0]]` formula when its series run to
/// `2 i_B + 2` terms instead of `i_B`.
pub fn abio_truncation_gap(a: &DualMatrix, b: &DualMatrix, side: Side, tol: &Tolerances) -> Result<f64> {
    abio_shapes(a, b)?;
    let k = Spectral::new(b, tol)?.k;
    let short = abio_series(a, b, side, k, tol)?;
    let long = abio_series(a, b, side, 2 * k + 2, tol)?;
    Ok((&long - &short).norm() / (1.0 + short.norm()))
}

fn abio_series(a: &DualMatrix, b: &DualMatrix, side: Side, terms: usize, tol: &Tolerances) -> Result<DualMatrix> {
    let n = a.nrows();
    let mut sa = Spectral::new(a, tol)?;
    let sb = Spectral::new(b, tol)?;
    let b_pows = powers(b, terms + 1);
    let aapi_bd = a * &sa.pi * &sb.d;
    let zero = || DualMatrix::zeros(n, n);
    let (m11, m12, m21, m22) = match side {
        Side::Right => {
            let (mut s1, mut s2) = (zero(), zero());
            for (i, bi) in b_pows.iter().enumerate().take(terms) {
                let lead = &sb.pi * bi;
                s1 = s1 + &lead * sa.dp(2 * i + 1);
                s2 = s2 + &lead * sa.dp(2 * i + 2);
            }
            (s1, sb.e.clone(), s2 + &sb.d * &sa.pi, -aapi_bd)
        }
        Side::Left => {
            let (mut s11, mut s12, mut s21, mut s22) = (zero(), zero(), zero(), zero());
            for i in 0..terms {
                let t = &sb.pi * &b_pows[i];
                let t1 = &sb.pi * &b_pows[i + 1];
                s11 = s11 + sa.dp(2 * i + 1) * &t;
                s12 = s12 + sa.dp(2 * i + 2) * &t1;
                s21 = s21 + sa.dp(2 * i + 2) * &t;
                s22 = s22 + sa.dp(2 * i + 3) * &t1;
            }
            (
                s11,
                &sa.pi * b * &sb.d + s12,
                s21 + &sa.pi * &sb.d,
                s22 - aapi_bd - &sa.d * &sb.e,
            )
        }
    };
    DualMatrix::from_blocks(&[&[&m11, &m12], &[&m21, &m22]])
}

fn abco_shapes(a: &DualMatrix, b: &DualMatrix, c: &DualMatrix) -> Result<()> {
    square(a, "A")?;
    need(b.nrows() == a.nrows() && c.ncols() == a.nrows() && c.nrows() == b.ncols(), || {
        format!(
            "need A p×p, B p×q, C q×p; got {:?}, {:?}, {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )
    })
}

pub fn abco_assemble(a: &DualMatrix, b: &DualMatrix, c: &DualMatrix) -> Result<DualMatrix> {
    abco_shapes(a, b, c)?;
    DualMatrix::from_blocks(&[&[a, b], &[c, &DualMatrix::zeros(c.nrows(), b.ncols())]])
}

pub fn abco_drazin(
    a: &DualMatrix,
    b: &DualMatrix,
    c: &DualMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<DualMatrix> {
    abco_shapes(a, b, c)?;
    let g = b * c;
    commuting_conditions(a, &g, "BC", side, tol)?.into_result()?;
    let mut sa = Spectral::new(a, tol)?;
    let mut sg = Spectral::new(&g, tol)?;
    let k = sg.k;
    let g_pows = powers(&g, k + 1);
    let p = a.nrows();
    let q = b.ncols();
    let aapi = a * &sa.pi;
    let (m11, m12, m21, m22) = match side {
        Side::Right => {
            let mut e1 = DualMatrix::zeros(p, p);
            let mut e2 = DualMatrix::zeros(p, p);
            let mut e3 = DualMatrix::zeros(p, p);
            let mut e4 = DualMatrix::zeros(p, p);
            for (i, gi) in g_pows.iter().enumerate().take(k) {
                let lead = &sg.pi * gi;
                e1 = e1 + &lead * sa.dp(2 * i + 1);
                e2 = e2 + &lead * sa.dp(2 * i + 2);
                e3 = e3 + &lead * sa.dp(2 * i + 2);
                e4 = e4 + &lead * sa.dp(2 * i + 3);
            }
            let gd = sg.d.clone();
            let e2 = (e2 + &gd * &sa.pi) * b;
            let e3 = c * &(e3 + &gd * &sa.pi);
            let e4 = c * &(e4 - sg.dp(2) * &aapi - &gd * &sa.d) * b;
            (e1, e2, e3, e4)
        }
        Side::Left => {
            let mut f11 = DualMatrix::zeros(p, p);
            let mut f12 = DualMatrix::zeros(p, p);
            let mut f21 = DualMatrix::zeros(p, p);
            let mut f22 = DualMatrix::zeros(p, p);
            for i in 0..k {
                let t = &sg.pi * &g_pows[i];
                let t1 = &sg.pi * &g_pows[i + 1];
                f11 = f11 + sa.dp(2 * i + 2) * &t * a + sa.dp(2 * i + 3) * &t1;
                f12 = f12 + sa.dp(2 * i + 2) * &t;
                f21 = f21 + sa.dp(2 * i + 3) * &t * a + sa.dp(2 * i + 4) * &t1;
                f22 = f22 + sa.dp(2 * i + 3) * &t;
            }
            let m11 = f11 - &sa.d * &sg.e;
            let m12 = (f12 + &sa.pi * &sg.d) * b;
            let m21 = c * &(f21 - sa.dp(2) * &sg.e + &sa.pi * &sg.d);
            let m22 = c * &(f22 - &aapi * sg.dp(2) - &sa.d * &sg.d) * b;
            (m11, m12, m21, m22)
        }
    };
    debug_assert_eq!(m22.shape(), (q, q));
    DualMatrix::from_blocks(&[&[&m11, &m12], &[&m21, &m22]])
}

pub fn bipartite_assemble(b: &DualMatrix, c: &DualMatrix) -> Result<DualMatrix> {
    need(b.nrows() == c.ncols() && b.ncols() == c.nrows(), || {
        format!("need B p×q and C q×p; got {:?} and {:?}", b.shape(), c.shape())
    })?;
    DualMatrix::from_blocks(&[
        &[&DualMatrix::zeros(b.nrows(), c.ncols()), b],
        &[c, &DualMatrix::zeros(c.nrows(), b.ncols())],
    ])
}

/// `[[0, (BC)^D B], [C (BC)^D, 0]]`.
pub fn bipartite_drazin(b: &DualMatrix, c: &DualMatrix, tol: &Tolerances) -> Result<DualMatrix> {
    bipartite_assemble(b, c)?;
    let gd = dual_drazin(&(b * c), tol)?.inverse;
    DualMatrix::from_blocks(&[
        &[&DualMatrix::zeros(b.nrows(), c.ncols()), &(&gd * b)],
        &[&(c * &gd), &DualMatrix::zeros(c.nrows(), b.ncols())],
    ])
}

impl BlockInstance {
    pub fn new(theorem: Theorem, blocks: &[(&str, DualMatrix)]) -> Self {
        Self {
            theorem,
            blocks: blocks.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    pub fn block(&self, name: &str) -> Result<&DualMatrix> {
        self.blocks
            .get(name)
            .ok_or_else(|| Error::SpecInvalid(format!("{} instance is missing block {name}", self.theorem)))
    }

    /// The full matrix whose dual Drazin inverse the theorem describes.
    pub fn assemble(&self) -> Result<DualMatrix> {
        let g = |n| self.block(n);
        match self.theorem {
            Theorem::Cline => Ok(g("A")? * g("B")?),
            Theorem::TriUpper => tri_assemble(g("A")?, g("B")?, g("D")?, Orientation::Upper),
            Theorem::TriLower => tri_assemble(g("A")?, g("B")?, g("D")?, Orientation::Lower),
            Theorem::SumPq0 => {
                let (p, q) = (g("P")?, g("Q")?);
                need(p.shape() == q.shape(), || format!("P is {:?} but Q is {:?}", p.shape(), q.shape()))?;
                Ok(p + q)
            }
            Theorem::AbioRight | Theorem::AbioLeft => abio_assemble(g("A")?, g("B")?),
            Theorem::AbcoRight | Theorem::AbcoLeft => abco_assemble(g("A")?, g("B")?, g("C")?),
            Theorem::Bipartite => bipartite_assemble(g("B")?, g("C")?),
        }
    }

    /// Evaluates the theorem's closed form.
    pub fn closed_form(&self, tol: &Tolerances) -> Result<DualMatrix> {
        let g = |n| self.block(n);
        match self.theorem {
            Theorem::Cline => cline(g("A")?, g("B")?, tol),
            Theorem::TriUpper => tri_drazin(g("A")?, g("B")?, g("D")?, Orientation::Upper, tol),
            Theorem::TriLower => tri_drazin(g("A")?, g("B")?, g("D")?, Orientation::Lower, tol),
            Theorem::SumPq0 => sum_pq_zero(g("P")?, g("Q")?, tol),
            Theorem::AbioRight => abio_drazin(g("A")?, g("B")?, Side::Right, tol),
            Theorem::AbioLeft => abio_drazin(g("A")?, g("B")?, Side::Left, tol),
            Theorem::AbcoRight => abco_drazin(g("A")?, g("B")?, g("C")?, Side::Right, tol),
            Theorem::AbcoLeft => abco_drazin(g("A")?, g("B")?, g("C")?, Side::Left, tol),
            Theorem::Bipartite => bipartite_drazin(g("B")?, g("C")?, tol),
        }
    }
}

/// One residual per named condition of the instance's theorem.
pub fn check_hypotheses(inst: &BlockInstance, tol: &Tolerances) -> Result<HypothesisReport> {
    let assembled = inst.assemble()?;
    let g = |n| inst.block(n);
    let mut report = HypothesisReport::default();
    match inst.theorem {
        Theorem::Cline => report.push_membership("BA in DC_z", &(g("B")? * g("A")?), tol)?,
        Theorem::TriUpper | Theorem::TriLower => {
            report.push_membership("A in DC_z", g("A")?, tol)?;
            report.push_membership("D in DC_z", g("D")?, tol)?;
            report.push_membership("assembled in DC_z", &assembled, tol)?;
        }
        Theorem::SumPq0 => {
            let (p, q) = (g("P")?, g("Q")?);
            report.push_membership("P in DC_z", p, tol)?;
            report.push_membership("Q in DC_z", q, tol)?;
            report.push_residual("PQ = 0", &(p * q), p.norm() * q.norm(), tol);
        }
        Theorem::AbioRight | Theorem::AbioLeft => {
            let side = if inst.theorem == Theorem::AbioRight { Side::Right } else { Side::Left };
            report = commuting_conditions(g("A")?, g("B")?, "B", side, tol)?;
            report.push_membership("assembled in DC_z", &assembled, tol)?;
        }
        Theorem::AbcoRight | Theorem::AbcoLeft => {
            let side = if inst.theorem == Theorem::AbcoRight { Side::Right } else { Side::Left };
            report = commuting_conditions(g("A")?, &(g("B")? * g("C")?), "BC", side, tol)?;
            report.push_membership("assembled in DC_z", &assembled, tol)?;
        }
        Theorem::Bipartite => {
            report.push_membership("BC in DC_z", &(g("B")? * g("C")?), tol)?;
            report.push_membership("assembled in DC_z", &assembled, tol)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rel(x: &DualMatrix, y: &DualMatrix) -> f64 {
        (x - y).norm() / (1.0 + y.norm())
    }

    fn oracle(inst: &BlockInstance) -> DualMatrix {
        dual_drazin(&inst.assemble().unwrap(), &tol()).unwrap().inverse
    }

    fn m(rows: usize, cols: usize, std: &[f64], inf: &[f64]) -> DualMatrix {
        DualMatrix::from_real(rows, cols, std, inf)
    }

    /// Dual nilpotent Jordan-type block: unit superdiagonal, free strictly upper part.
    fn nilpotent(n: usize, vals: &[i32]) -> DualMatrix {
        let mut it = vals.iter().map(|&v| v as f64).cycle();
        let mut x = DualMatrix::zeros(n, n);
        for r in 0..n {
            for c in r + 1..n {
                let s = if c == r + 1 { 1.0 } else { it.next().unwrap() };
                x.std[(r, c)] = s.into();
                x.inf[(r, c)] = it.next().unwrap().into();
            }
        }
        x
    }

    fn poly(x: &DualMatrix, coeffs: &[f64]) -> DualMatrix {
        let mut out = DualMatrix::zeros(x.nrows(), x.ncols());
        let mut p = DualMatrix::identity(x.nrows());
        for &c in coeffs {
            out = out + p.scale(crate::DualScalar::real(c, 0.0));
            p = &p * x;
        }
        out
    }

    #[test]
    fn theorem_names_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
        }
        assert_eq!("abco-right".parse::<Theorem>().unwrap(), Theorem::AbcoRight);
        assert!("nope".parse::<Theorem>().is_err());
    }

    #[test]
    fn cline_examples() {
        let i = DualMatrix::identity(3);
        assert!(rel(&cline(&i, &i, &tol()).unwrap(), &i) < 1e-14);
        let a = m(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[1.0; 6]);
        assert!(cline(&a, &DualMatrix::zeros(2, 3), &tol()).unwrap().is_zero());
    }

    #[test]
    fn tri_examples() {
        let a = m(2, 2, &[2.0, 1.0, 0.0, 3.0], &[1.0, 0.0, 2.0, 1.0]);
        let d = nilpotent(2, &[1]);
        let b0 = DualMatrix::zeros(2, 2);
        let diag = tri_drazin(&a, &b0, &d, Orientation::Upper, &tol()).unwrap();
        let ad = dual_drazin(&a, &tol()).unwrap().inverse;
        let dd = dual_drazin(&d, &tol()).unwrap().inverse;
        assert!(rel(&diag, &DualMatrix::block_diag(&[ad.clone(), dd])) < 1e-12);

        let b = m(2, 3, &[1.0, -1.0, 2.0, 0.0, 1.0, 1.0], &[0.5, 0.0, 1.0, 2.0, 0.0, -1.0]);
        let z = DualMatrix::zeros(3, 3);
        let w = tri_drazin(&a, &b, &z, Orientation::Upper, &tol()).unwrap();
        assert!(rel(&w.block(0, 2, 2, 3), &(&ad * &ad * &b)) < 1e-12);
        for o in [Orientation::Upper, Orientation::Lower] {
            let th = if o == Orientation::Upper { Theorem::TriUpper } else { Theorem::TriLower };
            let inst = BlockInstance::new(th, &[("A", a.clone()), ("B", b.clone()), ("D", nilpotent(3, &[2, -1, 1]))]);
            assert!(rel(&inst.closed_form(&tol()).unwrap(), &oracle(&inst)) < 1e-9);
        }
    }

    #[test]
    fn sum_examples() {
        let p = m(2, 2, &[1.0, 2.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]);
        let z = DualMatrix::zeros(2, 2);
        let pd = dual_drazin(&p, &tol()).unwrap().inverse;
        assert!(rel(&sum_pq_zero(&p, &z, &tol()).unwrap(), &pd) < 1e-12);
        assert!(rel(&sum_pq_zero(&z, &p, &tol()).unwrap(), &pd) < 1e-12);
        assert!(matches!(
            sum_pq_zero(&p, &p, &tol()),
            Err(Error::HypothesisViolated { .. })
        ));
        let n = nilpotent(3, &[1, 2, -1]);
        let pp = DualMatrix::block_diag(&[n.clone(), DualMatrix::zeros(2, 2)]);
        let qq = DualMatrix::block_diag(&[DualMatrix::zeros(3, 3), m(2, 2, &[1.0, 1.0, 2.0, 0.0], &[1.0, 0.0, 0.0, 3.0])]);
        let inst = BlockInstance::new(Theorem::SumPq0, &[("P", pp), ("Q", qq)]);
        assert!(rel(&inst.closed_form(&tol()).unwrap(), &oracle(&inst)) < 1e-9);
    }

    #[test]
    fn abio_examples() {
        let b = m(2, 2, &[1.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]);
        let z = DualMatrix::zeros(2, 2);
        let sb = Spectral::new(&b, &tol()).unwrap();
        let got = abio_drazin(&z, &b, Side::Right, &tol()).unwrap();
        let want = DualMatrix::from_blocks(&[&[&z, &sb.e], &[&sb.d, &z]]).unwrap();
        assert!(rel(&got, &want) < 1e-12);

        let a = nilpotent(3, &[2, -1, 1]);
        let i = DualMatrix::identity(3);
        let got = abio_drazin(&a, &i, Side::Right, &tol()).unwrap();
        let want = DualMatrix::from_blocks(&[&[&DualMatrix::zeros(3, 3), &i], &[&i, &-&a]]).unwrap();
        assert!(rel(&got, &want) < 1e-12);

        let inst = BlockInstance::new(Theorem::AbioRight, &[("A", i.clone()), ("B", i.clone())]);
        let rep = check_hypotheses(&inst, &tol()).unwrap();
        let failing = rep.first_failure().unwrap();
        assert_eq!(failing.name, "A A^e B = 0");
        assert!((failing.residual - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn abco_examples() {
        let a = m(2, 2, &[2.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
        let b = m(2, 3, &[1.0, 0.0, 2.0, -1.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let c0 = DualMatrix::zeros(3, 2);
        let got = abco_drazin(&a, &b, &c0, Side::Right, &tol()).unwrap();
        let ad = dual_drazin(&a, &tol()).unwrap().inverse;
        let want = DualMatrix::from_blocks(&[
            &[&ad, &(&ad * &ad * &b)],
            &[&DualMatrix::zeros(3, 2), &DualMatrix::zeros(3, 3)],
        ])
        .unwrap();
        assert!(rel(&got, &want) < 1e-12);
        let inst = BlockInstance::new(Theorem::AbcoRight, &[("A", a.clone()), ("B", b.clone()), ("C", c0)]);
        let rep = check_hypotheses(&inst, &tol()).unwrap();
        assert!(rep.all_pass());
        assert!(rep.conditions.iter().filter(|c| c.scale > 0.0 || c.name.contains('=')).all(|c| c.residual == 0.0));
    }

    #[test]
    fn bipartite_examples() {
        let i = DualMatrix::identity(2);
        let got = bipartite_drazin(&i, &i, &tol()).unwrap();
        assert!(rel(&got, &bipartite_assemble(&i, &i).unwrap()) < 1e-14);
        let b = m(2, 3, &[1.0, 0.0, 2.0, -1.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let c = m(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 0.0, 0.0, 2.0]);
        assert!(bipartite_drazin(&DualMatrix::zeros(2, 3), &c, &tol()).unwrap().is_zero());
        let inst = BlockInstance::new(Theorem::Bipartite, &[("B", b), ("C", c)]);
        assert!(rel(&inst.closed_form(&tol()).unwrap(), &oracle(&inst)) < 1e-9);
    }

    proptest! {
        #[test]
        fn cline_with_identity_is_plain_drazin(vals in proptest::collection::vec(-3i32..=3, 8), n in 1usize..5) {
            let x = nilpotent(n, &vals) + DualMatrix::block_diag(&[
                DualMatrix::zeros(n - 1, n - 1),
                m(1, 1, &[3.0], &[1.0]),
            ]);
            let i = DualMatrix::identity(n);
            if let Ok(d) = dual_drazin(&x, &tol()) {
                prop_assert!(rel(&cline(&x, &i, &tol()).unwrap(), &d.inverse) < 1e-9);
            }
        }

        #[test]
        fn abio_on_nilpotent_commuting_pairs(
            n in 1usize..5,
            vals in proptest::collection::vec(-3i32..=3, 10),
            c in proptest::collection::vec(-3i32..=3, 3),
        ) {
            let a = nilpotent(n, &vals);
            let b = poly(&a, &c.iter().map(|&v| v as f64).collect::<Vec<_>>());
            for (th, _) in [(Theorem::AbioRight, Side::Right), (Theorem::AbioLeft, Side::Left)] {
                let inst = BlockInstance::new(th, &[("A", a.clone()), ("B", b.clone())]);
                let Ok(o) = dual_drazin(&inst.assemble().unwrap(), &tol()) else { continue };
                if !check_hypotheses(&inst, &tol()).unwrap().all_pass() { continue; }
                let got = inst.closed_form(&tol()).unwrap();
                prop_assert!(rel(&got, &o.inverse) < 1e-8, "{th}: {}", rel(&got, &o.inverse));
            }
        }

        #[test]
        fn abco_with_polynomial_products(
            n in 1usize..4,
            vals in proptest::collection::vec(-3i32..=3, 10),
            c in proptest::collection::vec(-3i32..=3, 3),
        ) {
            let a = nilpotent(n, &vals);
            let b = poly(&a, &c.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let i = DualMatrix::identity(n);
            for th in [Theorem::AbcoRight, Theorem::AbcoLeft] {
                let inst = BlockInstance::new(th, &[("A", a.clone()), ("B", b.clone()), ("C", i.clone())]);
                let Ok(o) = dual_drazin(&inst.assemble().unwrap(), &tol()) else { continue };
                if !check_hypotheses(&inst, &tol()).unwrap().all_pass() { continue; }
                let got = inst.closed_form(&tol()).unwrap();
                prop_assert!(rel(&got, &o.inverse) < 1e-8, "{th}: {}", rel(&got, &o.inverse));
                prop_assert!(frob(&got.std).is_finite());
            }
        }
    }
}
