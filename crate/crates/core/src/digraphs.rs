//! Dual-weighted digraph families: double stars, D-linked stars and Dutch
//! windmills. Builds their adjacency matrices in a fixed vertex order and
//! evaluates the closed-form dual Drazin inverses for each family.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::blocks::{bipartite_assemble, powers, HypothesisReport, Spectral};
use crate::drazin::dual_drazin;
use crate::dualmat::DualMatrix;
use crate::dualnum::DualScalar;
use crate::error::{shape, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::tol::Tolerances;

/// Double star: center `c1` with `m` leaves, center `c2` with `n` leaves.
///
/// Vectors are columns. Arcs: `c1 → leaf` weighted by `x`, `leaf → c1` by
/// `y`, `c1 → c2` by `a`, `c2 → c1` by `b`, `c2 → leaf` by `w`, `leaf → c2` by `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleStar {
    pub x: DualMatrix,
    pub y: DualMatrix,
    pub w: DualMatrix,
    pub v: DualMatrix,
    pub a: DualScalar,
    pub b: DualScalar,
}

/// Stars whose centers are linked by the base digraph `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct DLinkedStars {
    pub base: DualMatrix,
    /// Center-to-leaf weights of star `i`, length `r_i`.
    pub x: Vec<DualMatrix>,
    /// Leaf-to-center weights of star `i`, length `r_i`.
    pub y: Vec<DualMatrix>,
}

/// Dutch windmill `D_{2n}^m`: `m` blades of order `2n − 1` sharing a hub.
#[derive(Debug, Clone, PartialEq)]
pub struct DutchWindmill {
    pub half: usize,
    pub blades: Vec<DualMatrix>,
    /// Hub-to-blade weights.
    pub x: Vec<DualMatrix>,
    /// Blade-to-hub weights.
    pub y: Vec<DualMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    DoubleStar(DoubleStar),
    DLinkedStars(DLinkedStars),
    DutchWindmill(DutchWindmill),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyBuild {
    pub matrix: DualMatrix,
    pub vertex_order: Vec<String>,
    /// For Dutch windmills: `perm[i]` is the canonical vertex placed at
    /// position `i` of the bipartite form `[[0, E], [F, 0]]`.
    pub permutation_to_bipartite: Option<Vec<usize>>,
    /// Size of the bipartite leading part when a permutation is present.
    pub bipartite_split: Option<usize>,
    /// `2mn − m + 1` for Dutch windmills; informational only.
    pub kappa: Option<usize>,
}

fn is_column(v: &DualMatrix) -> bool {
    v.ncols() == 1 && v.nrows() >= 1
}

fn check_vector(v: &DualMatrix, name: &str, len: Option<usize>) -> Result<()> {
    if !is_column(v) {
        return Err(Error::SpecInvalid(format!("{name} must be a non-empty column vector, got {:?}", v.shape())));
    }
    if let Some(l) = len {
        if v.nrows() != l {
            return Err(Error::SpecInvalid(format!("{name} must have length {l}, got {}", v.nrows())));
        }
    }
    if v.is_zero() {
        return Err(Error::SpecInvalid(format!("{name} must be nonzero")));
    }
    Ok(())
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl DoubleStar {
    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// All weights equal to one.
    pub fn unit(m: usize, n: usize) -> Self {
        let ones = |k| DualMatrix::from_std(ComplexMatrix::from_element(k, 1, c(1.0)));
        Self {
            x: ones(m),
            y: ones(m),
            w: ones(n),
            v: ones(n),
            a: DualScalar::ONE,
            b: DualScalar::ONE,
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        check_vector(&self.x, "x", None)?;
        check_vector(&self.y, "y", Some(self.m()))?;
        check_vector(&self.w, "w", None)?;
        check_vector(&self.v, "v", Some(self.n()))?;
        for (s, name) in [(self.a, "a"), (self.b, "b")] {
            if !s.is_appreciable(tol.appreciable, 1.0) {
                return Err(Error::SpecInvalid(format!("{name} must be appreciable")));
            }
        }
        Ok(())
    }

    pub fn build(&self, tol: &Tolerances) -> Result<AdjacencyBuild> {
        self.validate(tol)?;
        let (m, n) = (self.m(), self.n());
        let c2 = m + 1;
        let mut mat = DualMatrix::zeros(m + n + 2, m + n + 2);
        for i in 0..m {
            mat.set(0, 1 + i, self.x.get(i, 0));
            mat.set(1 + i, 0, self.y.get(i, 0));
        }
        mat.set(0, c2, self.a);
        mat.set(c2, 0, self.b);
        for j in 0..n {
            mat.set(c2, c2 + 1 + j, self.w.get(j, 0));
            mat.set(c2 + 1 + j, c2, self.v.get(j, 0));
        }
        let mut order = Vec::with_capacity(m + n + 2);
        order.push(String::from("c1"));
        order.extend((1..=m).map(|i| format!("c1.{i}")));
        order.push(String::from("c2"));
        order.extend((1..=n).map(|j| format!("c2.{j}")));
        Ok(AdjacencyBuild {
            matrix: mat,
            vertex_order: order,
            permutation_to_bipartite: None,
            bipartite_split: None,
            kappa: None,
        })
    }

    /// `ŵᵀ v̂`, which must vanish.
    pub fn orthogonality(&self) -> DualScalar {
        dot(&self.w, &self.v)
    }

    /// The single condition `ŵᵀ v̂ = 0`.
    pub fn hypotheses(&self, tol: &Tolerances) -> Result<HypothesisReport> {
        self.validate(tol)?;
        let mut report = HypothesisReport::default();
        let g = &self.w.transpose() * &self.v;
        report.push_residual("w^T v = 0", &g, self.w.norm() * self.v.norm(), tol);
        Ok(report)
    }

    /// Closed form under `ŵᵀ v̂ = 0`, with `θ̂ = x̂ᵀ ŷ + â b̂`.
    pub fn dual_drazin(&self, tol: &Tolerances) -> Result<DualMatrix> {
        self.hypotheses(tol)?.into_result()?;
        let theta = dot(&self.x, &self.y) + self.a * self.b;
        let td = theta.dual_drazin(tol)?;
        let (t, tr) = (td.std, td.inf);
        let t2 = t * t;
        let t2e = t * tr + tr * t;

        let (m, n) = (self.m(), self.n());
        let c2 = m + 1;
        let l2 = m + 2;
        let (x, x0) = (&self.x.std, &self.x.inf);
        let (y, y0) = (&self.y.std, &self.y.inf);
        let (w, w0) = (&self.w.std, &self.w.inf);
        let (v, v0) = (&self.v.std, &self.v.inf);
        let (a, a0) = (self.a.std, self.a.inf);
        let (b, b0) = (self.b.std, self.b.inf);

        let size = m + n + 2;
        let mut s = ComplexMatrix::zeros(size, size);
        let mut e = ComplexMatrix::zeros(size, size);
        let put = |dst: &mut ComplexMatrix, r: usize, col: usize, src: &ComplexMatrix| {
            dst.view_mut((r, col), src.shape()).copy_from(src);
        };
        let one = |z: Complex64| ComplexMatrix::from_element(1, 1, z);

        put(&mut s, 0, 1, &(x.transpose() * t));
        put(&mut s, 0, c2, &one(t * a));
        put(&mut s, 1, 0, &(y * t));
        put(&mut s, 1, l2, &(y * w.transpose() * (t2 * a)));
        put(&mut s, c2, 0, &one(b * t));
        put(&mut s, c2, l2, &(w.transpose() * (b * t2 * a)));
        put(&mut s, l2, 1, &(v * x.transpose() * (b * t2)));
        put(&mut s, l2, c2, &(v * (b * t2 * a)));

        put(&mut e, 0, 1, &(x0.transpose() * t + x.transpose() * tr));
        put(&mut e, 0, c2, &one(t * a0 + tr * a));
        put(&mut e, 1, 0, &(y * tr + y0 * t));
        put(&mut e, c2, 0, &one(b * tr + b0 * t));
        let wt = w.transpose();
        let m24 = y * w0.transpose() * (t2 * a)
            + y * &wt * (t2 * a0)
            + y * &wt * (t2e * a)
            + y0 * &wt * (t2 * a);
        let m34 = w0.transpose() * (b * t2 * a) + &wt * (b * t2 * a0) + &wt * (b * t2e * a) + &wt * (b0 * t2 * a);
        let xt = x.transpose();
        let m42 = v * x0.transpose() * (b * t2) + v * &xt * (b * t2e) + v * &xt * (b0 * t2) + v0 * &xt * (b * t2);
        let m43 = v * (b * t2 * a0) + v * (b * t2e * a) + v * (b0 * t2 * a) + v0 * (b * t2 * a);
        put(&mut e, 1, l2, &m24);
        put(&mut e, c2, l2, &m34);
        put(&mut e, l2, 1, &m42);
        put(&mut e, l2, c2, &m43);
        Ok(DualMatrix { std: s, inf: e })
    }
}

/// Non-conjugating dual inner product of two columns.
fn dot(u: &DualMatrix, v: &DualMatrix) -> DualScalar {
    let p = &u.transpose() * v;
    p.get(0, 0)
}

impl DLinkedStars {
    pub fn order(&self) -> usize {
        self.base.nrows() + self.x.iter().map(|v| v.nrows()).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.base.nrows();
        if !self.base.is_square() || n == 0 {
            return Err(Error::SpecInvalid(format!("base must be square and non-empty, got {:?}", self.base.shape())));
        }
        if self.x.len() != n || self.y.len() != n {
            return Err(Error::SpecInvalid(format!(
                "need {n} leaf groups, got {} x-vectors and {} y-vectors",
                self.x.len(),
                self.y.len()
            )));
        }
        for i in 0..n {
            check_vector(&self.x[i], &format!("x[{i}]"), None)?;
            check_vector(&self.y[i], &format!("y[{i}]"), Some(self.x[i].nrows()))?;
        }
        Ok(())
    }

    /// `B = diag(x_iᵀ)` and `C = diag(y_i)`.
    pub fn off_diagonal(&self) -> (DualMatrix, DualMatrix) {
        let b = DualMatrix::block_diag(&self.x.iter().map(|v| v.transpose()).collect::<Vec<_>>());
        let c = DualMatrix::block_diag(&self.y);
        (b, c)
    }

    pub fn build(&self) -> Result<AdjacencyBuild> {
        self.validate()?;
        let (b, c) = self.off_diagonal();
        let z = DualMatrix::zeros(c.nrows(), b.ncols());
        let matrix = DualMatrix::from_blocks(&[&[&self.base, &b], &[&c, &z]])?;
        let n = self.base.nrows();
        let mut order: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
        for (i, v) in self.x.iter().enumerate() {
            order.extend((1..=v.nrows()).map(|j| format!("c{}.{j}", i + 1)));
        }
        Ok(AdjacencyBuild {
            matrix,
            vertex_order: order,
            permutation_to_bipartite: None,
            bipartite_split: None,
            kappa: None,
        })
    }

    /// `x̂_iᵀ ŷ_i = 0` for every star.
    pub fn hypotheses(&self, tol: &Tolerances) -> Result<HypothesisReport> {
        self.validate()?;
        let mut report = HypothesisReport::default();
        for (i, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            let name = format!("x_{}^T y_{} = 0", i + 1, i + 1);
            report.push_residual(&name, &(&x.transpose() * y), x.norm() * y.norm(), tol);
        }
        Ok(report)
    }

    /// Closed form under `x̂_iᵀ ŷ_i = 0` for every star.
    pub fn dual_drazin(&self, tol: &Tolerances) -> Result<DualMatrix> {
        self.hypotheses(tol)?.into_result()?;
        let (bh, ch) = self.off_diagonal();
        let dd = dual_drazin(&self.base, tol)?;
        let ad = &dd.inverse.std;
        let ar = &dd.inverse.inf;
        let (b, b0, c, c0) = (&bh.std, &bh.inf, &ch.std, &ch.inf);
        let ad2 = ad * ad;
        let ad3 = &ad2 * ad;
        let std = assemble(&[
            &[ad.clone(), &ad2 * b],
            &[c * &ad2, c * &ad3 * b],
        ]);
        let inf = assemble(&[
            &[ar.clone(), &ad2 * b0 + ad * ar * b + ar * ad * b],
            &[
                c * ad * ar + c * ar * ad + c0 * &ad2,
                c * &ad3 * b0 + c * &ad2 * ar * b + c0 * &ad3 * b + c * ad * ar * ad * b + c * ar * &ad2 * b,
            ],
        ]);
        Ok(DualMatrix { std, inf })
    }
}

fn assemble(rows: &[&[ComplexMatrix]]) -> ComplexMatrix {
    let total_r: usize = rows.iter().map(|r| r[0].nrows()).sum();
    let total_c: usize = rows[0].iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(total_r, total_c);
    let mut r0 = 0;
    for row in rows {
        let mut c0 = 0;
        for b in row.iter() {
            out.view_mut((r0, c0), b.shape()).copy_from(b);
            c0 += b.ncols();
        }
        r0 += row[0].nrows();
    }
    out
}

/// Unweighted blade of `D_{2n}`: the path `v_1 – … – v_{2n−1}` with both
/// arc directions, hub attached to both path ends.
pub fn unit_blade(half: usize) -> (DualMatrix, DualMatrix, DualMatrix) {
    let k = 2 * half - 1;
    let mut d = ComplexMatrix::zeros(k, k);
    for j in 0..k.saturating_sub(1) {
        d[(j, j + 1)] = c(1.0);
        d[(j + 1, j)] = c(1.0);
    }
    let mut ends = ComplexMatrix::zeros(k, 1);
    ends[(0, 0)] = c(1.0);
    ends[(k - 1, 0)] = c(1.0);
    (DualMatrix::from_std(d), DualMatrix::from_std(ends.clone()), DualMatrix::from_std(ends))
}

/// Pieces of the hub-and-blade form `[[0, B], [C, D]]`.
struct WindmillParts {
    b: DualMatrix,
    c: DualMatrix,
    d: DualMatrix,
}

impl DutchWindmill {
    pub fn m(&self) -> usize {
        self.blades.len()
    }

    pub fn blade_order(&self) -> usize {
        2 * self.half - 1
    }

    pub fn order(&self) -> usize {
        1 + self.m() * self.blade_order()
    }

    pub fn kappa(&self) -> usize {
        2 * self.m() * self.half - self.m() + 1
    }

    /// `m` copies of the unweighted blade.
    pub fn unit(m: usize, half: usize) -> Self {
        let (d, x, y) = unit_blade(half);
        Self {
            half,
            blades: alloc::vec![d; m],
            x: alloc::vec![x; m],
            y: alloc::vec![y; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.half == 0 || self.m() == 0 {
            return Err(Error::SpecInvalid(String::from("need at least one blade and half >= 1")));
        }
        let k = self.blade_order();
        if self.x.len() != self.m() || self.y.len() != self.m() {
            return Err(Error::SpecInvalid(format!(
                "need {} x- and y-vectors, got {} and {}",
                self.m(),
                self.x.len(),
                self.y.len()
            )));
        }
        for (i, d) in self.blades.iter().enumerate() {
            if d.shape() != (k, k) {
                return Err(Error::SpecInvalid(format!("blade {} must be {k}×{k}, got {:?}", i + 1, d.shape())));
            }
            check_vector(&self.x[i], &format!("x[{i}]"), Some(k))?;
            check_vector(&self.y[i], &format!("y[{i}]"), Some(k))?;
        }
        Ok(())
    }

    fn parts(&self) -> WindmillParts {
        let b = DualMatrix::from_blocks(&[&self.x.iter().map(|v| v.transpose()).collect::<Vec<_>>().iter().collect::<Vec<_>>()])
            .expect("row of blade vectors");
        let c = {
            let cols: Vec<DualMatrix> = self.y.clone();
            let rows: Vec<[&DualMatrix; 1]> = cols.iter().map(|v| [v]).collect();
            let refs: Vec<&[&DualMatrix]> = rows.iter().map(|r| &r[..]).collect();
            DualMatrix::from_blocks(&refs).expect("column of blade vectors")
        };
        let d = DualMatrix::block_diag(&self.blades);
        WindmillParts { b, c, d }
    }

    /// Hub first, then each blade's vertices `v_{k,1} … v_{k,2n−1}`.
    pub fn build(&self) -> Result<AdjacencyBuild> {
        self.validate()?;
        let p = self.parts();
        let matrix = DualMatrix::from_blocks(&[&[&DualMatrix::zeros(1, 1), &p.b], &[&p.c, &p.d]])?;
        let mut order = alloc::vec![String::from("hub")];
        for kk in 1..=self.m() {
            order.extend((1..=self.blade_order()).map(|j| format!("v{kk}.{j}")));
        }
        let (perm, split) = self.bipartite_permutation();
        Ok(AdjacencyBuild {
            matrix,
            vertex_order: order,
            permutation_to_bipartite: Some(perm),
            bipartite_split: Some(split),
            kappa: Some(self.kappa()),
        })
    }

    /// Hub and the even-position blade vertices first, odd positions after.
    /// Returns the permutation and the size of the first class.
    pub fn bipartite_permutation(&self) -> (Vec<usize>, usize) {
        let k = self.blade_order();
        let mut first = alloc::vec![0usize];
        let mut second = Vec::new();
        for blade in 0..self.m() {
            for j in 0..k {
                let idx = 1 + blade * k + j;
                // j is zero-based, so position j + 1 is even when j is odd
                if j % 2 == 1 {
                    first.push(idx);
                } else {
                    second.push(idx);
                }
            }
        }
        let split = first.len();
        first.extend(second);
        (first, split)
    }

    /// `D̂ D̂^e Ĉ B̂ = 0` and `D̂ Ĉ B̂ = Ĉ B̂ D̂ D̂^π`: the per-blade conditions
    /// over all pairs `(s, t)` in block form.
    pub fn hypotheses(&self, tol: &Tolerances) -> Result<HypothesisReport> {
        self.validate()?;
        let p = self.parts();
        let sd = Spectral::new(&p.d, tol)?;
        let phi = &p.c * &p.b;
        let mut report = HypothesisReport::default();
        report.push_residual(
            "D_s D_s^e y_s x_t^T = 0",
            &(&(&p.d * &sd.e) * &phi),
            p.d.norm() * sd.e.norm() * phi.norm(),
            tol,
        );
        report.push_residual(
            "D_s y_s x_t^T = y_s x_t^T D_t D_t^pi",
            &(&p.d * &phi - &phi * &(&p.d * &sd.pi)),
            p.d.norm() * phi.norm() * (1.0 + sd.pi.norm()),
            tol,
        );
        Ok(report)
    }

    /// `ŷ_s x̂_tᵀ = 0` for all pairs, i.e. `Ĉ B̂ = 0`.
    pub fn hypotheses_bc_zero(&self, tol: &Tolerances) -> Result<HypothesisReport> {
        self.validate()?;
        let p = self.parts();
        let mut report = HypothesisReport::default();
        report.push_residual("y_s x_t^T = 0", &(&p.c * &p.b), p.b.norm() * p.c.norm(), tol);
        Ok(report)
    }

    /// Closed form in hub-and-blade coordinates with `φ̂ = Ĉ B̂`.
    pub fn dual_drazin(&self, tol: &Tolerances) -> Result<DualMatrix> {
        self.validate()?;
        let p = self.parts();
        self.hypotheses(tol)?.into_result()?;
        let mut sd = Spectral::new(&p.d, tol)?;
        let phi_hat = &p.c * &p.b;
        let mut sp = Spectral::new(&phi_hat, tol)?;
        Ok(windmill_formula(&p, &mut sp, &mut sd))
    }

    /// Closed form when every `ŷ_s x̂_tᵀ` vanishes.
    pub fn dual_drazin_bc_zero(&self, tol: &Tolerances) -> Result<DualMatrix> {
        self.validate()?;
        let p = self.parts();
        self.hypotheses_bc_zero(tol)?.into_result()?;
        let dd = dual_drazin(&p.d, tol)?;
        let (dd1, dr) = (&dd.inverse.std, &dd.inverse.inf);
        let dd2 = dd1 * dd1;
        let dd3 = &dd2 * dd1;
        let (b, b0, c, c0) = (&p.b.std, &p.b.inf, &p.c.std, &p.c.inf);
        let std = assemble(&[&[b * &dd3 * c, b * &dd2], &[&dd2 * c, dd1.clone()]]);
        let inf = assemble(&[
            &[
                b * &dd3 * c0 + b * &dd2 * dr * c + b0 * &dd3 * c + b * dr * &dd2 * c + b * dd1 * dr * dd1 * c,
                b * dd1 * dr + b * dr * dd1 + b0 * &dd2,
            ],
            &[&dd2 * c0 + dd1 * dr * c + dr * dd1 * c, dr.clone()],
        ]);
        Ok(DualMatrix { std, inf })
    }

    /// Group-inverse closed form for `Ind(CB) <= 1` and `Ind(D) <= 1`.
    pub fn dual_group(&self, tol: &Tolerances) -> Result<DualMatrix> {
        self.validate()?;
        let p = self.parts();
        let sd = Spectral::new(&p.d, tol)?;
        let phi_hat = &p.c * &p.b;
        let sp = Spectral::new(&phi_hat, tol)?;
        for k in [sd.k, sp.k] {
            if k > 1 {
                return Err(Error::IndexTooLarge { index: k });
            }
        }
        self.hypotheses(tol)?.into_result()?;
        let (b, b0, c, c0) = (&p.b.std, &p.b.inf, &p.c.std, &p.c.inf);
        let (d, d0) = (&p.d.std, &p.d.inf);
        let (dg, dr, dpi) = (&sd.d.std, &sd.d.inf, &sd.pi.std);
        let (phi, phi0) = (&phi_hat.std, &phi_hat.inf);
        let (pg, pr, ppi) = (&sp.d.std, &sp.d.inf, &sp.pi.std);
        let dg2 = dg * dg;
        let dg3 = &dg2 * dg;
        let pg2 = pg * pg;
        let std = assemble(&[
            &[
                b * (ppi * &dg3 - pg * dg - &pg2 * d * dpi) * c,
                b * ppi * &dg2 + b * pg * dpi,
            ],
            &[ppi * &dg2 * c + pg * dpi * c, ppi * dg],
        ]);
        let eta1 = b * ppi * &dg3 * c0 + b * ppi * &dg2 * dr * c + b * ppi * dg * dr * dg * c + b * ppi * dr * &dg2 * c
            + b0 * ppi * &dg3 * c
            - b * phi * pr * &dg3 * c
            - b * phi0 * pg * &dg3 * c
            + b * &pg2 * d * d * dr * c
            + b * &pg2 * d * d0 * dg * c
            - b * &pg2 * d0 * dpi * c
            - b * &pg2 * d * dpi * c0
            - b * pg * pr * d * dpi * c
            - b * pr * pg * d * dpi * c
            - b0 * &pg2 * d * dpi * c
            - b * pg * dg * c0
            - b * pg * dr * c
            - b * pr * dg * c
            - b0 * pg * dg * c;
        let eta2 = b * ppi * dg * dr + b * ppi * dr * dg + b0 * ppi * &dg2
            - b * phi * pr * &dg2
            - b * phi0 * pg * &dg2
            - b * pg * d * dr
            - b * pg * d0 * dg
            + b0 * pg * dpi
            + b * pr * dpi;
        let eta3 = ppi * &dg2 * c0 + ppi * dg * dr * c + ppi * dr * dg * c
            - phi * pr * &dg2 * c
            - phi0 * pg * &dg2 * c
            + pg * dpi * c0
            + pr * dpi * c
            - pg * d * dr * c
            - pg * d0 * dg * c;
        let eta4 = ppi * dr - phi * pr * dg - phi0 * pg * dg;
        Ok(DualMatrix {
            std,
            inf: assemble(&[&[eta1, eta2], &[eta3, eta4]]),
        })
    }
}

/// `Σ_{j<s} (D^D)^j D_R (D^D)^(s−1−j)`, the infinitesimal part of `(D̂^D)^s`.
fn drazin_power_inf(dd: &[ComplexMatrix], dr: &ComplexMatrix, s: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(dr.nrows(), dr.ncols());
    for j in 0..s {
        out += &dd[j] * dr * &dd[s - 1 - j];
    }
    out
}

/// `Σ_{j=1..i} φ^(i−j) φ0 φ^(j−1)`, the infinitesimal part of `φ̂^i`.
fn power_inf(pw: &[ComplexMatrix], x0: &ComplexMatrix, i: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x0.nrows(), x0.ncols());
    for j in 1..=i {
        out += &pw[i - j] * x0 * &pw[j - 1];
    }
    out
}

fn windmill_formula(p: &WindmillParts, sp: &mut Spectral, sd: &mut Spectral) -> DualMatrix {
    let k = sp.k;
    let (b, b0, c, c0) = (&p.b.std, &p.b.inf, &p.c.std, &p.c.inf);
    let (d, d0) = (&p.d.std, &p.d.inf);
    let phi_hat = &p.c * &p.b;
    let (phi, phi0) = (&phi_hat.std, &phi_hat.inf);
    let (pd, pr, ppi) = (sp.d.std.clone(), sp.d.inf.clone(), sp.pi.std.clone());
    let (dr, dpi) = (sd.d.inf.clone(), sd.pi.std.clone());
    let nn = phi.nrows();
    let dd: Vec<ComplexMatrix> = (0..=2 * k + 3).map(|s| sd.dp(s).std).collect();
    let pw: Vec<ComplexMatrix> = powers(&DualMatrix::from_std(phi.clone()), k).into_iter().map(|x| x.std).collect();
    let pd2 = &pd * &pd;
    let pi_eps = -(phi * &pr + phi0 * &pd);

    let zero = || ComplexMatrix::zeros(nn, nn);
    let (mut s11, mut s12, mut s21, mut s22) = (zero(), zero(), zero(), zero());
    let (mut e11, mut e12, mut e21, mut e22) = (zero(), zero(), zero(), zero());
    for i in 0..k {
        let lead = &ppi * &pw[i];
        let lead_eps = &pi_eps * &pw[i] + &ppi * power_inf(&pw, phi0, i);
        s11 += &lead * &dd[2 * i + 3];
        s12 += &lead * &dd[2 * i + 2];
        s21 += &lead * &dd[2 * i + 2];
        s22 += &lead * &dd[2 * i + 1];
        e11 += &lead_eps * &dd[2 * i + 3] + &lead * drazin_power_inf(&dd, &dr, 2 * i + 3);
        e12 += &lead_eps * &dd[2 * i + 2] + &lead * drazin_power_inf(&dd, &dr, 2 * i + 2);
        e21 += &lead_eps * &dd[2 * i + 2] + &lead * drazin_power_inf(&dd, &dr, 2 * i + 2);
        e22 += &lead_eps * &dd[2 * i + 1] + &lead * drazin_power_inf(&dd, &dr, 2 * i + 1);
    }
    let dpi_eps = -(d * &dr + d0 * &dd[1]);
    let dd1 = &dd[1];

    let m11 = b * &s11 * c - b * &pd2 * d * &dpi * c - b * &pd * dd1 * c;
    let m12 = b * &s12 + b * &pd * &dpi;
    let m21 = &s21 * c + &pd * &dpi * c;
    let m22 = s22;

    let xi1 = b0 * &s11 * c + b * &e11 * c + b * &s11 * c0
        - b0 * &pd2 * d * &dpi * c
        - b * (&pd * &pr + &pr * &pd) * d * &dpi * c
        - b * &pd2 * d0 * &dpi * c
        - b * &pd2 * d * &dpi_eps * c
        - b * &pd2 * d * &dpi * c0
        - b0 * &pd * dd1 * c
        - b * &pr * dd1 * c
        - b * &pd * &dr * c
        - b * &pd * dd1 * c0;
    let xi2 = b0 * &s12 + b * &e12 + b0 * &pd * &dpi + b * &pr * &dpi + b * &pd * &dpi_eps;
    let xi3 = &e21 * c + &s21 * c0 + &pr * &dpi * c + &pd * &dpi_eps * c + &pd * &dpi * c0;
    let xi4 = e22;

    DualMatrix {
        std: assemble(&[&[m11, m12], &[m21, m22]]),
        inf: assemble(&[&[xi1, xi2], &[xi3, xi4]]),
    }
}

/// `F̂ Ê ∈ DC_z`.
pub fn bipartite_dual_hypotheses(e: &DualMatrix, f: &DualMatrix, tol: &Tolerances) -> Result<HypothesisReport> {
    bipartite_assemble(e, f)?;
    let mut report = HypothesisReport::default();
    report.push_membership("FE in DC_z", &(f * e), tol)?;
    Ok(report)
}

/// `[[0, E (FE)^D], [(FE)^D F, 0]] + ε [[0, E (FE)_R + E0 (FE)^D], [(FE)^D F0 + (FE)_R F, 0]]`.
pub fn bipartite_dual(e: &DualMatrix, f: &DualMatrix, tol: &Tolerances) -> Result<DualMatrix> {
    bipartite_assemble(e, f)?;
    let fe = dual_drazin(&(f * e), tol)?.inverse;
    let (g, gr) = (&fe.std, &fe.inf);
    let (p, q) = (e.nrows(), e.ncols());
    let std = assemble(&[
        &[ComplexMatrix::zeros(p, p), &e.std * g],
        &[g * &f.std, ComplexMatrix::zeros(q, q)],
    ]);
    let inf = assemble(&[
        &[ComplexMatrix::zeros(p, p), &e.std * gr + &e.inf * g],
        &[g * &f.inf + gr * &f.std, ComplexMatrix::zeros(q, q)],
    ]);
    Ok(DualMatrix { std, inf })
}

/// Real group-inverse form `[[0, (EF)^# E], [F (EF)^#, 0]]`.
pub fn bipartite_group(e: &ComplexMatrix, f: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if e.nrows() != f.ncols() || e.ncols() != f.nrows() {
        return Err(shape(format!("need E p×q and F q×p; got {:?} and {:?}", e.shape(), f.shape())));
    }
    let g = crate::drazin::group_inverse(&(e * f), tol)?;
    let (p, q) = (e.nrows(), e.ncols());
    Ok(assemble(&[
        &[ComplexMatrix::zeros(p, p), &g * e],
        &[f * &g, ComplexMatrix::zeros(q, q)],
    ]))
}

impl GraphSpec {
    pub fn hypotheses(&self, tol: &Tolerances) -> Result<HypothesisReport> {
        match self {
            GraphSpec::DoubleStar(s) => s.hypotheses(tol),
            GraphSpec::DLinkedStars(s) => s.hypotheses(tol),
            GraphSpec::DutchWindmill(s) => s.hypotheses(tol),
        }
    }

    pub fn build(&self, tol: &Tolerances) -> Result<AdjacencyBuild> {
        match self {
            GraphSpec::DoubleStar(s) => s.build(tol),
            GraphSpec::DLinkedStars(s) => s.build(),
            GraphSpec::DutchWindmill(s) => s.build(),
        }
    }

    /// The family's closed-form dual Drazin inverse.
    pub fn dual_drazin(&self, tol: &Tolerances) -> Result<DualMatrix> {
        match self {
            GraphSpec::DoubleStar(s) => s.dual_drazin(tol),
            GraphSpec::DLinkedStars(s) => s.dual_drazin(tol),
            GraphSpec::DutchWindmill(s) => s.dual_drazin(tol),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            GraphSpec::DoubleStar(_) => "double_star",
            GraphSpec::DLinkedStars(_) => "d_linked_stars",
            GraphSpec::DutchWindmill(_) => "dutch_windmill",
        }
    }
}

/// Positions where the adjacency matrix may be nonzero.
pub fn arc_mask(spec: &GraphSpec) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    match spec {
        GraphSpec::DoubleStar(s) => {
            let (m, n) = (s.m(), s.n());
            let c2 = m + 1;
            for i in 1..=m {
                arcs.push((0, i));
                arcs.push((i, 0));
            }
            arcs.push((0, c2));
            arcs.push((c2, 0));
            for j in c2 + 1..=c2 + n {
                arcs.push((c2, j));
                arcs.push((j, c2));
            }
        }
        GraphSpec::DLinkedStars(s) => {
            let n = s.base.nrows();
            for i in 0..n {
                for j in 0..n {
                    arcs.push((i, j));
                }
            }
            let mut off = n;
            for (i, v) in s.x.iter().enumerate() {
                for l in off..off + v.nrows() {
                    arcs.push((i, l));
                    arcs.push((l, i));
                }
                off += v.nrows();
            }
        }
        GraphSpec::DutchWindmill(s) => {
            let k = s.blade_order();
            for blade in 0..s.m() {
                let off = 1 + blade * k;
                for i in 0..k {
                    arcs.push((0, off + i));
                    arcs.push((off + i, 0));
                    for j in 0..k {
                        arcs.push((off + i, off + j));
                    }
                }
            }
        }
    }
    arcs
}

/// Nonzero positions of a dual matrix, in row-major order.
pub fn support(x: &DualMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if !x.get(i, j).is_zero() {
                out.push((i, j));
            }
        }
    }
    out
}
