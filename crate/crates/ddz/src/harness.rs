//! Instance generators.
//!
//! Every hypothesis-critical identity is built from small Gaussian integers so
//! that it holds exactly, both in floating point and in [`crate::exact`]
//! arithmetic. The same `(seed, trial)` pair always yields the same instance.

use std::fmt;
use std::str::FromStr;

use ddz_core::blocks::{BlockInstance, Theorem};
use ddz_core::digraphs::{DLinkedStars, DoubleStar, DutchWindmill, GraphSpec};
use ddz_core::{Complex64, ComplexMatrix, DualMatrix, DualScalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{ExactDual, ExactSpectral};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("generation failed for {target}: {reason}")]
    GenerationFailed { target: String, reason: String },
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
}

/// What a fuzz run exercises: a block theorem or one of the graph formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Block(Theorem),
    DoubleStar,
    DLinkedStars,
    DutchWindmill,
    WindmillBcZero,
    WindmillGroup,
    BipartiteDual,
}

impl Target {
    pub const GRAPH: [Target; 6] = [
        Target::DoubleStar,
        Target::DLinkedStars,
        Target::DutchWindmill,
        Target::WindmillBcZero,
        Target::WindmillGroup,
        Target::BipartiteDual,
    ];

    pub fn all() -> Vec<Target> {
        Theorem::ALL.iter().map(|&t| Target::Block(t)).chain(Self::GRAPH).collect()
    }

    pub fn name(self) -> String {
        match self {
            Target::Block(t) => t.name().to_ascii_lowercase().replace('_', "-"),
            Target::DoubleStar => "double-star".into(),
            Target::DLinkedStars => "d-linked-stars".into(),
            Target::DutchWindmill => "dutch-windmill".into(),
            Target::WindmillBcZero => "windmill-bc-zero".into(),
            Target::WindmillGroup => "windmill-group".into(),
            Target::BipartiteDual => "bipartite-dual".into(),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Target {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Target::all().into_iter().find(|t| t.name() == norm).ok_or_else(|| GenError::UnknownTarget(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub target: Target,
    /// Upper bound for each generated block dimension.
    pub dim_max: usize,
    pub seed: u64,
    /// Entries are drawn from `[-entry_scale, entry_scale]`.
    pub entry_scale: i64,
    pub trials: usize,
    /// Break one hypothesis on purpose.
    pub violate: bool,
}

impl GenConfig {
    pub fn new(target: Target, seed: u64, trials: usize) -> Self {
        Self { target, dim_max: 5, seed, entry_scale: 2, trials, violate: false }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.dim_max < 1 || self.trials < 1 || self.entry_scale < 1 {
            return Err(GenError::Config(format!(
                "need dim_max, trials and entry_scale >= 1 (got {}, {}, {})",
                self.dim_max, self.trials, self.entry_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Block(BlockInstance),
    Graph(GraphSpec),
    BipartiteDual { e: DualMatrix, f: DualMatrix },
}

/// Independent generator stream for one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Which end of each dimension range a trial is pinned to.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Pin {
    Low,
    High,
    Free,
}

/// Integer-valued random source with the construction helpers.
pub struct Gen {
    rng: ChaCha8Rng,
    scale: i64,
    pin: Pin,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn scalar(std: i64, inf: i64) -> DualScalar {
    DualScalar::real(std as f64, inf as f64)
}

impl Gen {
    pub fn new(seed: u64, trial: usize, scale: i64) -> Self {
        let pin = match trial {
            0 => Pin::Low,
            1 => Pin::High,
            _ => Pin::Free,
        };
        Self { rng: trial_rng(seed, trial), scale, pin }
    }

    /// Unpinned generator, for ad-hoc use.
    pub fn free(seed: u64, scale: i64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), scale, pin: Pin::Free }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn dim(&mut self, lo: usize, hi: usize) -> usize {
        let hi = hi.max(lo);
        match self.pin {
            Pin::Low => lo,
            Pin::High => hi,
            Pin::Free => self.rng.random_range(lo..=hi),
        }
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub fn int(&mut self) -> i64 {
        self.rng.random_range(-self.scale..=self.scale)
    }

    pub fn nonzero(&mut self) -> i64 {
        loop {
            let v = self.int();
            if v != 0 {
                return v;
            }
        }
    }

    pub fn dual_scalar(&mut self) -> DualScalar {
        scalar(self.int(), self.int())
    }

    pub fn appreciable(&mut self) -> DualScalar {
        scalar(self.nonzero(), self.int())
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> DualMatrix {
        let mut m = DualMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, self.dual_scalar());
            }
        }
        m
    }

    /// Nonzero column with appreciable entries.
    pub fn vector(&mut self, n: usize) -> DualMatrix {
        DualMatrix::column(&(0..n).map(|_| self.appreciable()).collect::<Vec<_>>())
    }

    /// Entry in `{-1, 0, 1} + ε{-1, 0, 1}`, zero with probability 0.6.
    fn sparse_unit(&mut self) -> DualScalar {
        if self.coin(0.6) {
            DualScalar::ZERO
        } else {
            scalar(self.rng.random_range(-1..=1), self.rng.random_range(-1..=1))
        }
    }

    /// Unimodular dual similarity `S = L U` with its exact inverse.
    pub fn unimodular(&mut self, n: usize) -> (DualMatrix, DualMatrix) {
        let mut l = DualMatrix::identity(n);
        let mut u = DualMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l.set(i, j, self.sparse_unit());
                u.set(j, i, self.sparse_unit());
            }
        }
        let s = &l * &u;
        let inv = exact_inverse(&s);
        (s, inv)
    }

    /// Diagonally dominant `P̂` with appreciable, well separated eigenvalues.
    pub fn core_block(&mut self, p: usize) -> DualMatrix {
        let mut m = self.matrix(p, p);
        for i in 0..p {
            let sign = if self.coin(0.5) { 1.0 } else { -1.0 };
            let shift = (self.scale * p as i64 + 1 + self.rng.random_range(0..=2)) as f64;
            let z = m.get(i, i);
            m.set(i, i, DualScalar::real(z.std.re + sign * shift, z.inf.re));
        }
        m
    }

    /// Single nilpotent Jordan-type block `N + ε N₀`, both strictly upper,
    /// nonzero superdiagonal; its dual index equals `q` and it lies in `DC_z`.
    pub fn nilpotent_block(&mut self, q: usize) -> DualMatrix {
        let mut m = DualMatrix::zeros(q, q);
        for i in 0..q {
            for j in i + 1..q {
                let std = if j == i + 1 { self.nonzero() } else { self.int() };
                m.set(i, j, scalar(std, self.int()));
            }
        }
        m
    }

    /// `P̂ ⊕ N̂`.
    pub fn core_nilpotent(&mut self, p: usize, q: usize) -> DualMatrix {
        DualMatrix::block_diag(&[self.core_block(p), self.nilpotent_block(q)])
    }

    /// Integer polynomial in `n̂`; invertible when `unit` is set, otherwise
    /// nilpotent with the same index as `n̂`.
    pub fn polynomial(&mut self, n: &DualMatrix, unit: bool) -> DualMatrix {
        let q = n.nrows();
        let c0 = if unit { self.appreciable() } else { DualScalar::ZERO };
        let mut out = DualMatrix::identity(q).scale(c0);
        let mut pw = DualMatrix::identity(q);
        for i in 1..q {
            pw = &pw * n;
            let ci = if i == 1 && !unit { self.appreciable() } else { self.dual_scalar() };
            out = out + pw.scale(ci);
        }
        out
    }

    /// `Ŝ (P̂ ⊕ N̂) Ŝ⁻¹ ∈ DC_z` of order `n`, with the split `p`.
    pub fn dcz_member(&mut self, n: usize) -> DcZ {
        let p = self.rng.random_range(n.saturating_sub(MAX_NILPOTENT)..=n);
        self.dcz_split(p, n - p)
    }

    pub fn dcz_split(&mut self, p: usize, q: usize) -> DcZ {
        let j = self.core_nilpotent(p, q);
        let (s, si) = self.unimodular(p + q);
        DcZ { a: &(&s * &j) * &si, j, s, si, p }
    }

    /// `Ŝ (P̂ ⊕ (J_q + ε E_{q1})) Ŝ⁻¹ ∉ DC_z`, with `q >= 1`.
    pub fn dcz_nonmember(&mut self, n: usize) -> DualMatrix {
        let q = self.rng.random_range(1..=n.clamp(1, MAX_NILPOTENT));
        let p = n.max(1) - q;
        let mut nil = DualMatrix::zeros(q, q);
        for i in 0..q.saturating_sub(1) {
            nil.set(i, i + 1, DualScalar::ONE);
        }
        nil.set(q - 1, 0, DualScalar::EPS);
        let j = DualMatrix::block_diag(&[self.core_block(p), nil]);
        let (s, si) = self.unimodular(p + q);
        &(&s * &j) * &si
    }

    /// Appreciable `(x̂, ŷ)` of length `n >= 2` with `x̂ᵀ ŷ = 0` exactly.
    pub fn orthogonal_pair(&mut self, n: usize) -> (DualMatrix, DualMatrix) {
        assert!(n >= 2, "orthogonal pairs need length >= 2");
        let y0 = self.vector(n);
        let mut y = y0.clone();
        y.set(0, 0, DualScalar::real(1.0, y0.get(0, 0).inf.re));
        // x_std in the null space of y_stdᵀ: Σ c_i (e_i − y_i e_0)
        let mut xs = vec![0i64; n];
        while xs.iter().all(|&v| v == 0) {
            for i in 1..n {
                let ci = self.int();
                xs[i] += ci;
                xs[0] -= ci * y.get(i, 0).std.re as i64;
            }
        }
        let mut x0: Vec<i64> = (0..n).map(|_| self.int()).collect();
        // x0ᵀ y_std + x_stdᵀ y_inf = 0, solved for x0[0] since y_std[0] = 1
        let cross: i64 = (1..n).map(|i| x0[i] * y.get(i, 0).std.re as i64).sum::<i64>()
            + (0..n).map(|i| xs[i] * y.get(i, 0).inf.re as i64).sum::<i64>();
        x0[0] = -cross;
        let x = DualMatrix::column(&(0..n).map(|i| scalar(xs[i], x0[i])).collect::<Vec<_>>());
        let perm = self.permutation(n);
        (permute_rows(&x, &perm), permute_rows(&y, &perm))
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.rng.random_range(0..=i);
            p.swap(i, j);
        }
        p
    }

    /// Random complex matrix with entries uniform in the unit square.
    pub fn complex(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0))
        })
    }

    /// Random dual matrix with float entries.
    pub fn dual_float(&mut self, rows: usize, cols: usize) -> DualMatrix {
        DualMatrix { std: self.complex(rows, cols), inf: self.complex(rows, cols) }
    }
}

/// Longest nilpotent Jordan-type block a generator emits. Longer chains make
/// the floating-point index decision unreliable after similarity.
pub const MAX_NILPOTENT: usize = 3;

/// A generated `DC_z` member with its construction.
#[derive(Debug, Clone)]
pub struct DcZ {
    pub a: DualMatrix,
    /// `P̂ ⊕ N̂`.
    pub j: DualMatrix,
    pub s: DualMatrix,
    pub si: DualMatrix,
    /// Order of the invertible part.
    pub p: usize,
}

impl DcZ {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn q(&self) -> usize {
        self.n() - self.p
    }

    /// `Ŝ X Ŝ⁻¹`.
    pub fn conj(&self, x: &DualMatrix) -> DualMatrix {
        &(&self.s * x) * &self.si
    }

    fn nilpotent(&self) -> DualMatrix {
        self.j.block(self.p, self.p, self.q(), self.q())
    }
}

fn permute_rows(x: &DualMatrix, perm: &[usize]) -> DualMatrix {
    let mut out = DualMatrix::zeros(x.nrows(), x.ncols());
    for (i, &src) in perm.iter().enumerate() {
        for j in 0..x.ncols() {
            out.set(i, j, x.get(src, j));
        }
    }
    out
}

/// Exact inverse of a dual matrix with invertible standard part.
pub fn exact_inverse(x: &DualMatrix) -> DualMatrix {
    let e = ExactDual::from_dual(x).expect("finite input");
    ExactSpectral::new(&e).drazin.to_dual()
}

fn failed(target: Target, reason: &str) -> GenError {
    GenError::GenerationFailed { target: target.name(), reason: reason.to_string() }
}

/// Deterministic instance for `(cfg.seed, trial)`.
pub fn gen_instance(cfg: &GenConfig, trial: usize) -> Result<Instance, GenError> {
    cfg.validate()?;
    let mut g = Gen::new(cfg.seed, trial, cfg.entry_scale);
    let d = cfg.dim_max;
    let v = cfg.violate;
    // rejection only guards against rare degenerate draws
    for _ in 0..64 {
        let inst = match cfg.target {
            Target::Block(t) => gen_block(&mut g, t, d, v).map(Instance::Block),
            Target::DoubleStar => gen_double_star(&mut g, d, v).map(|s| Instance::Graph(GraphSpec::DoubleStar(s))),
            Target::DLinkedStars => gen_linked_stars(&mut g, d, v).map(|s| Instance::Graph(GraphSpec::DLinkedStars(s))),
            Target::DutchWindmill => gen_windmill(&mut g, d, Stratum::General, v).map(|s| Instance::Graph(GraphSpec::DutchWindmill(s))),
            Target::WindmillBcZero => gen_windmill(&mut g, d, Stratum::BcZero, v).map(|s| Instance::Graph(GraphSpec::DutchWindmill(s))),
            Target::WindmillGroup => gen_windmill(&mut g, d, Stratum::Group, v).map(|s| Instance::Graph(GraphSpec::DutchWindmill(s))),
            Target::BipartiteDual => {
                let (f, e) = gen_factored_product(&mut g, d, v);
                Some(Instance::BipartiteDual { e, f })
            }
        };
        if let Some(inst) = inst {
            if admissible(cfg.target, &inst, v) {
                return Ok(inst);
            }
        }
        g.pin = Pin::Free;
    }
    Err(failed(cfg.target, "no admissible draw after 64 attempts"))
}

/// Exact acceptance test: every hypothesis holds and the assembled matrix is
/// in `DC_z`, or, when violating, some hypothesis fails.
fn admissible(target: Target, inst: &Instance, violate: bool) -> bool {
    let Ok(conds) = crate::fuzz::exact_hypotheses(target, inst) else {
        return false;
    };
    let holds = conds.iter().all(|(_, ok)| *ok);
    if violate {
        return !holds;
    }
    let tol = ddz_core::Tolerances::default();
    holds
        && crate::fuzz::assembled(inst, &tol)
            .ok()
            .and_then(|m| ExactDual::from_dual(&m).ok())
            .is_some_and(|m| ExactSpectral::new(&m).exists)
}

/// `(X, Y)` with `X Y = K`, `X` p×m and `Y` m×p (`m >= p`), and `K ∈ DC_z`
/// (or `K ∉ DC_z` when violating).
fn gen_factored_product(g: &mut Gen, d: usize, violate: bool) -> (DualMatrix, DualMatrix) {
    let p = g.dim(1, d);
    let m = g.dim(p, d.max(p));
    let k = if violate { g.dcz_nonmember(p) } else { g.dcz_member(p).a };
    let r = g.matrix(p, m - p);
    let w = g.matrix(m - p, p);
    let (u, ui) = g.unimodular(p);
    let (vv, vi) = g.unimodular(m);
    let x = DualMatrix::from_blocks(&[&[&DualMatrix::identity(p), &r]]).expect("row blocks");
    let y = DualMatrix::from_blocks(&[&[&(&k - &(&r * &w))], &[&w]]).expect("column blocks");
    // X Y = [I, R][K − R W; W] = K, then conjugated by U
    (&(&ui * &x) * &vv, &(&vi * &y) * &u)
}

fn gen_block(g: &mut Gen, t: Theorem, d: usize, violate: bool) -> Option<BlockInstance> {
    Some(match t {
        Theorem::Cline => {
            // B A = K ∈ DC_z with A p×q, B q×p
            let (b, a) = gen_factored_product(g, d, violate);
            BlockInstance::new(t, &[("A", a), ("B", b)])
        }
        Theorem::TriUpper | Theorem::TriLower => gen_triangular(g, t, d, violate),
        Theorem::SumPq0 => gen_sum(g, t, d, violate)?,
        Theorem::AbioRight | Theorem::AbioLeft => {
            let side_right = t == Theorem::AbioRight;
            let (a, x) = commuting_pair(g, d, side_right, violate)?;
            BlockInstance::new(t, &[("A", a.a), ("B", x)])
        }
        Theorem::AbcoRight | Theorem::AbcoLeft => gen_abco(g, t, d, violate)?,
        Theorem::Bipartite => {
            let (b, c) = gen_factored_product(g, d, violate);
            BlockInstance::new(t, &[("B", b), ("C", c)])
        }
    })
}

/// `A = Ŝ (P̂ ⊕ N̂) Ŝ⁻¹` and `X = Ŝ X₀ Ŝ⁻¹` with `A A^e X = 0` (right) or
/// `X A A^e = 0` (left), and `X` commuting with `A A^π`.
fn commuting_pair(g: &mut Gen, d: usize, right: bool, violate: bool) -> Option<(DcZ, DualMatrix)> {
    let n = g.dim(1, d);
    let q = g.rng.random_range(if violate { 1 } else { 0 }..=n.min(MAX_NILPOTENT));
    let p = n - q;
    if violate && (p == 0 || q == 0) {
        return None;
    }
    let a = g.dcz_split(p, q);
    let unit = g.coin(0.4);
    let mut x0 = DualMatrix::zeros(n, n);
    if q > 0 {
        let nil = a.nilpotent();
        x0.set_block(p, p, &g.polynomial(&nil, unit));
        // a column in the dual kernel of N̂, or a row in its dual left kernel
        for k in 0..p {
            // an ε-only coupling next to a 1×1 zero block would leave X̂ outside DC_z
            let v = if k == 0 && q == 1 && !unit { g.appreciable() } else { g.dual_scalar() };
            if right {
                x0.set(p, k, v);
            } else {
                x0.set(k, n - 1, v);
            }
        }
    }
    if violate {
        let z = x0.get(0, 0);
        x0.set(0, 0, z + DualScalar::ONE);
    }
    let x = a.conj(&x0);
    Some((a, x))
}

fn gen_abco(g: &mut Gen, t: Theorem, d: usize, violate: bool) -> Option<BlockInstance> {
    let right = t == Theorem::AbcoRight;
    let (a, x) = commuting_pair(g, d, right, violate)?;
    let n = a.n();
    // factor X = B C through an m-dimensional space, m >= 1
    let q = a.q().max(1);
    let extra = g.rng.random_range(0..=1usize);
    let m = q + extra;
    let x0 = &(&a.si * &x) * &a.s;
    let (b0, c0) = if right {
        // X₀ = [0; I] [W₁ W₂] padded with zero columns of B₀
        let mut b0 = DualMatrix::zeros(n, m);
        for i in 0..q.min(n) {
            b0.set(n - q + i, i, DualScalar::ONE);
        }
        let mut c0 = g.matrix(m, n);
        c0.set_block(0, 0, &x0.block(n - q, 0, q, n));
        (b0, c0)
    } else {
        let mut c0 = DualMatrix::zeros(m, n);
        for i in 0..q.min(n) {
            c0.set(i, n - q + i, DualScalar::ONE);
        }
        let mut b0 = g.matrix(n, m);
        b0.set_block(0, 0, &x0.block(0, n - q, n, q));
        (b0, c0)
    };
    let (mut b0, mut c0) = (b0, c0);
    if violate {
        // route a free row of C₀ (or column of B₀) into the invertible part
        if right {
            b0.set(0, 0, b0.get(0, 0) + DualScalar::ONE);
        } else {
            c0.set(0, 0, c0.get(0, 0) + DualScalar::ONE);
        }
    }
    let (tt, ti) = g.unimodular(m);
    let b = &(&a.s * &b0) * &tt;
    let c = &(&ti * &c0) * &a.si;
    Some(BlockInstance::new(t, &[("A", a.a), ("B", b), ("C", c)]))
}

fn gen_triangular(g: &mut Gen, t: Theorem, d: usize, violate: bool) -> BlockInstance {
    let na = g.dim(1, d);
    let nd = g.dim(1, d);
    let a = g.dcz_member(na);
    let dd = g.dcz_member(nd);
    // couplings that never link the two nilpotent parts
    let mut b0 = g.matrix(na, nd);
    for i in a.p..na {
        for j in dd.p..nd {
            b0.set(i, j, DualScalar::ZERO);
        }
    }
    let base = DualMatrix::from_blocks(&[&[&a.j, &b0], &[&DualMatrix::zeros(nd, na), &dd.j]]).expect("blocks");
    let t12 = g.matrix(na, nd);
    let top = DualMatrix::from_blocks(&[&[&a.s, &t12]]).expect("row");
    let bottom = DualMatrix::from_blocks(&[&[&DualMatrix::zeros(nd, na), &dd.s]]).expect("row");
    let tm = DualMatrix::from_blocks(&[&[&top], &[&bottom]]).expect("col");
    let full = &(&tm * &base) * &exact_inverse(&tm);
    let mut ablk = full.block(0, 0, na, na);
    let b = full.block(0, na, na, nd);
    let dblk = full.block(na, na, nd, nd);
    if violate {
        ablk = g.dcz_nonmember(na);
    }
    BlockInstance::new(t, &[("A", ablk), ("B", b), ("D", dblk)])
}

fn gen_sum(g: &mut Gen, t: Theorem, d: usize, violate: bool) -> Option<BlockInstance> {
    let a = g.dim(1, d);
    let b = g.dim(1, d);
    let pp = g.dcz_member(a);
    let qq = g.dcz_member(b);
    if violate && qq.p == 0 {
        return None;
    }
    let n = a + b;
    // P₀ = [[P', 0], [Z, 0]], Q₀ = [[0, 0], [Y, Q']]
    let mut z = g.matrix(b, a);
    for i in 0..b {
        for j in pp.p..a {
            z.set(i, j, DualScalar::ZERO);
        }
    }
    let mut y = g.matrix(b, a);
    for i in qq.p..b {
        for j in 0..a {
            y.set(i, j, DualScalar::ZERO);
        }
    }
    let mut p0 = DualMatrix::zeros(n, n);
    p0.set_block(0, 0, &pp.j);
    p0.set_block(a, 0, &z);
    let mut q0 = DualMatrix::zeros(n, n);
    q0.set_block(a, a, &qq.j);
    q0.set_block(a, 0, &y);
    let (s, si) = g.unimodular(n);
    let mut p = &(&s * &p0) * &si;
    let q = &(&s * &q0) * &si;
    if violate {
        p = p + DualMatrix::identity(n);
    }
    Some(BlockInstance::new(t, &[("P", p), ("Q", q)]))
}

fn gen_double_star(g: &mut Gen, d: usize, violate: bool) -> Option<DoubleStar> {
    let m = g.dim(1, d);
    let n = g.dim(2, d.max(2));
    let (mut w, v) = g.orthogonal_pair(n);
    if violate {
        // v_std has an entry equal to one; bumping the matching w entry breaks ŵᵀv̂ = 0
        let i = (0..n).find(|&i| v.get(i, 0).std.re == 1.0).expect("unit entry");
        let z = w.get(i, 0);
        w.set(i, 0, z + DualScalar::ONE);
    }
    let s = DoubleStar { x: g.vector(m), y: g.vector(m), w, v, a: g.appreciable(), b: g.appreciable() };
    let theta = (&s.x.transpose() * &s.y).get(0, 0) + s.a * s.b;
    // a pure infinitesimal θ̂ has no dual Drazin inverse
    if theta.std.norm() == 0.0 && theta.inf.norm() != 0.0 {
        return None;
    }
    Some(s)
}

fn gen_linked_stars(g: &mut Gen, d: usize, violate: bool) -> Option<DLinkedStars> {
    let nb = g.dim(1, d);
    let base = g.dcz_member(nb).a;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for _ in 0..nb {
        let r = g.dim(2, 3);
        let (xi, yi) = g.orthogonal_pair(r);
        x.push(xi);
        y.push(yi);
    }
    if violate {
        let i = (0..y[0].nrows()).find(|&i| y[0].get(i, 0).std.re == 1.0).expect("unit entry");
        let z = x[0].get(i, 0);
        x[0].set(i, 0, z + DualScalar::ONE);
    }
    Some(DLinkedStars { base, x, y })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stratum {
    General,
    BcZero,
    Group,
}

fn gen_windmill(g: &mut Gen, d: usize, stratum: Stratum, violate: bool) -> Option<DutchWindmill> {
    let blades = g.dim(1, 3);
    let half = g.dim(1, (d / 2).clamp(1, 3));
    let k = 2 * half - 1;
    // pure-infinitesimal hub arcs supported on the invertible part
    let pure_eps = match stratum {
        Stratum::BcZero => true,
        Stratum::General => g.coin(0.25),
        Stratum::Group => g.coin(0.3),
    };
    let (mut ds, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..blades {
        let q = match stratum {
            Stratum::Group => {
                if pure_eps {
                    g.rng.random_range(0..=1usize.min(k - 1))
                } else {
                    1
                }
            }
            _ if pure_eps => g.rng.random_range(0..=k - 1),
            _ => g.rng.random_range(1..=k),
        };
        let p = k - q;
        let blade = g.dcz_split(p, q);
        let mut x = DualMatrix::zeros(k, 1);
        let mut y = DualMatrix::zeros(k, 1);
        if pure_eps {
            for i in 0..p {
                x.set(i, 0, scalar(0, g.nonzero()));
                y.set(i, 0, scalar(0, g.nonzero()));
            }
            if violate {
                x.set(0, 0, scalar(1, 1));
            }
        } else {
            y.set(p, 0, g.appreciable());
            for i in 0..p {
                x.set(i, 0, g.dual_scalar());
            }
            x.set(k - 1, 0, g.appreciable());
            if violate && p > 0 {
                y.set(0, 0, scalar(1, 0));
            }
        }
        ys.push(&blade.s * &y);
        xs.push((&x.transpose() * &blade.si).transpose());
        ds.push(blade.a);
    }
    let spec = DutchWindmill { half, blades: ds, x: xs, y: ys };
    if spec.validate().is_err() {
        return None;
    }
    if violate {
        let tol = ddz_core::Tolerances::default();
        let report = match stratum {
            Stratum::BcZero => spec.hypotheses_bc_zero(&tol),
            _ => spec.hypotheses(&tol),
        };
        if report.map(|r| r.all_pass()).unwrap_or(true) {
            return None;
        }
    }
    if stratum == Stratum::Group && !pure_eps {
        // Ĉ B̂ has index one only when B̂ Ĉ is appreciable
        let bc: DualScalar = spec.x.iter().zip(&spec.y).map(|(x, y)| (&x.transpose() * y).get(0, 0)).fold(DualScalar::ZERO, |a, b| a + b);
        if bc.std.norm() == 0.0 {
            return None;
        }
    }
    Some(spec)
}

/// `(E, F)` for the bipartite form; `F Ê ∈ DC_z`.
pub fn bipartite_pair(inst: &Instance) -> Option<(&DualMatrix, &DualMatrix)> {
    match inst {
        Instance::BipartiteDual { e, f } => Some((e, f)),
        _ => None,
    }
}

/// Random dual matrix in Smith-like form `U diag(units, ε's, 0) V`, for the rank suite.
pub fn rank_instance(g: &mut Gen, n: usize) -> DualMatrix {
    let mut diag = DualMatrix::zeros(n, n);
    for i in 0..n {
        let kind = g.rng.random_range(0..3);
        let v = match kind {
            0 => g.appreciable(),
            1 => scalar(0, g.nonzero()),
            _ => DualScalar::ZERO,
        };
        diag.set(i, i, v);
    }
    let (u, _) = g.unimodular(n);
    let (v, _) = g.unimodular(n);
    let x = &(&u * &diag) * &v;
    if g.coin(0.25) {
        // plus a generic perturbation of the infinitesimal part
        let mut y = x.clone();
        y.inf += g.matrix(n, n).std;
        y
    } else {
        x
    }
}

/// Complex test matrix for the Drazin oracle suite: generic, forced singular,
/// or with a nilpotent block.
pub fn drazin_test_matrix(g: &mut Gen, n: usize, kind: usize) -> ComplexMatrix {
    match kind % 3 {
        0 => g.complex(n, n),
        1 => {
            let r = g.rng.random_range(0..n.max(1));
            let left = g.complex(n, r);
            let right = g.complex(r, n);
            left * right
        }
        _ => {
            let q = g.rng.random_range(1..=n);
            let p = n - q;
            let mut j = ComplexMatrix::zeros(n, n);
            let core = g.complex(p, p) + ComplexMatrix::identity(p, p) * c(2.0);
            j.view_mut((0, 0), (p, p)).copy_from(&core);
            for i in 0..q.saturating_sub(1) {
                j[(p + i, p + i + 1)] = if g.coin(0.8) { c(1.0) } else { c(0.0) };
            }
            let s = g.complex(n, n) + ComplexMatrix::identity(n, n) * c(3.0);
            let si = s.clone().try_inverse().expect("diagonally dominant");
            s * j * si
        }
    }
}
