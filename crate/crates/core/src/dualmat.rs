//! Dense dual complex matrices `A + ε A0`, the block embedding
//! `Φ(Â) = [[A, A0], [0, A]]`, and the rank/index notions built on it.

use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::dualnum::DualScalar;
use crate::error::{shape, Error, Result};
use crate::linalg::{self, frob, ComplexMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct DualMatrix {
    pub std: ComplexMatrix,
    pub inf: ComplexMatrix,
}

/// Standard, dual and isomorphism indices of a square dual matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexReport {
    pub ind_std: usize,
    /// Absent when no `t` in `[ind_std, 2 ind_std]` satisfies the rank equality.
    pub ind_dual: Option<usize>,
    pub ind_phi: usize,
}

impl DualMatrix {
    /// Checked constructor: equal shapes, finite entries.
    pub fn new(std: ComplexMatrix, inf: ComplexMatrix) -> Result<Self> {
        if std.shape() != inf.shape() {
            return Err(shape(format!(
                "standard part is {:?} but infinitesimal part is {:?}",
                std.shape(),
                inf.shape()
            )));
        }
        if !linalg::is_finite(&std) || !linalg::is_finite(&inf) {
            return Err(Error::NonFinite);
        }
        Ok(Self { std, inf })
    }

    pub fn from_std(std: ComplexMatrix) -> Self {
        let inf = ComplexMatrix::zeros(std.nrows(), std.ncols());
        Self { std, inf }
    }

    /// `ε · inf`.
    pub fn from_inf(inf: ComplexMatrix) -> Self {
        let std = ComplexMatrix::zeros(inf.nrows(), inf.ncols());
        Self { std, inf }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            std: ComplexMatrix::zeros(rows, cols),
            inf: ComplexMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_std(linalg::identity(n))
    }

    /// Real row-major shorthand, mostly for tests and examples.
    pub fn from_real(rows: usize, cols: usize, std: &[f64], inf: &[f64]) -> Self {
        Self {
            std: linalg::from_real(rows, cols, std),
            inf: linalg::from_real(rows, cols, inf),
        }
    }

    /// Column vector from dual entries.
    pub fn column(entries: &[DualScalar]) -> Self {
        let n = entries.len();
        Self {
            std: ComplexMatrix::from_iterator(n, 1, entries.iter().map(|e| e.std)),
            inf: ComplexMatrix::from_iterator(n, 1, entries.iter().map(|e| e.inf)),
        }
    }

    pub fn nrows(&self) -> usize {
        self.std.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.std.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.std.shape()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> DualScalar {
        DualScalar {
            std: self.std[(i, j)],
            inf: self.inf[(i, j)],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: DualScalar) {
        self.std[(i, j)] = v.std;
        self.inf[(i, j)] = v.inf;
    }

    /// Frobenius norm of the pair, `sqrt(||A||² + ||A0||²)`.
    pub fn norm(&self) -> f64 {
        Float::hypot(frob(&self.std), frob(&self.inf))
    }

    pub fn is_zero(&self) -> bool {
        self.std.iter().chain(self.inf.iter()).all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// Plain (non-conjugating) transpose.
    pub fn transpose(&self) -> Self {
        Self {
            std: self.std.transpose(),
            inf: self.inf.transpose(),
        }
    }

    pub fn scale(&self, s: DualScalar) -> Self {
        Self {
            std: &self.std * s.std,
            inf: &self.inf * s.std + &self.std * s.inf,
        }
    }

    /// Checked product; `std = X Y`, `inf = X Y0 + X0 Y`.
    pub fn dmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(shape(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(self * rhs)
    }

    /// Checked power with `X^0 = I`.
    pub fn dpow(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(shape(format!("power of non-square {:?}", self.shape())));
        }
        Ok(self.pow(k))
    }

    /// Power by repeated squaring. Panics on non-square input.
    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square(), "power of a non-square dual matrix");
        let mut result = Self::identity(self.nrows());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Sub-block copy.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self {
            std: self.std.view((r0, c0), (rows, cols)).into_owned(),
            inf: self.inf.view((r0, c0), (rows, cols)).into_owned(),
        }
    }

    /// Writes `src` into the block starting at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) {
        let (r, c) = src.shape();
        self.std.view_mut((r0, c0), (r, c)).copy_from(&src.std);
        self.inf.view_mut((r0, c0), (r, c)).copy_from(&src.inf);
    }

    /// Assembles a block matrix from rows of blocks.
    pub fn from_blocks(rows: &[&[&DualMatrix]]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Ok(Self::zeros(0, 0));
        };
        let widths: Vec<usize> = first.iter().map(|b| b.ncols()).collect();
        let mut heights = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(shape(format!("block row {i} has {} blocks, expected {}", row.len(), widths.len())));
            }
            let h = row[0].nrows();
            for (j, b) in row.iter().enumerate() {
                if b.nrows() != h || b.ncols() != widths[j] {
                    return Err(shape(format!(
                        "block ({i},{j}) is {:?}, expected {:?}",
                        b.shape(),
                        (h, widths[j])
                    )));
                }
            }
            heights.push(h);
        }
        let total_r = heights.iter().sum();
        let total_c = widths.iter().sum();
        let mut out = Self::zeros(total_r, total_c);
        let mut r0 = 0;
        for (row, h) in rows.iter().zip(&heights) {
            let mut c0 = 0;
            for (b, w) in row.iter().zip(&widths) {
                out.set_block(r0, c0, b);
                c0 += w;
            }
            r0 += h;
        }
        Ok(out)
    }

    /// Block diagonal assembly.
    pub fn block_diag(blocks: &[DualMatrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.nrows()).sum();
        let c: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut out = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.nrows();
            c0 += b.ncols();
        }
        out
    }

    /// Conjugation by a permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.std[(i, j)] = self.std[(perm[i], perm[j])];
                out.inf[(i, j)] = self.inf[(perm[i], perm[j])];
            }
        }
        out
    }

    /// `Φ(X) = [[X, X0], [0, X]]`.
    pub fn phi_embed(&self) -> ComplexMatrix {
        let (r, c) = self.shape();
        let mut out = ComplexMatrix::zeros(2 * r, 2 * c);
        out.view_mut((0, 0), (r, c)).copy_from(&self.std);
        out.view_mut((0, c), (r, c)).copy_from(&self.inf);
        out.view_mut((r, c), (r, c)).copy_from(&self.std);
        out
    }

    /// Numerical rank of the standard part.
    pub fn rank_std(&self, tol: &Tolerances) -> usize {
        linalg::rank(&self.std, tol.rank)
    }

    /// Dual rank `rank Φ(X) − rank X`: unit plus ε pivots of the dual Smith form.
    pub fn rank_dual(&self, tol: &Tolerances) -> usize {
        let phi = linalg::rank(&self.phi_embed(), tol.rank);
        phi.saturating_sub(self.rank_std(tol))
    }

    pub fn indices(&self, tol: &Tolerances) -> Result<IndexReport> {
        if !self.is_square() {
            return Err(shape(format!("indices of non-square {:?}", self.shape())));
        }
        let k = linalg::index(&self.std, tol.rank);
        let mut ind_dual = None;
        let mut p = self.pow(k);
        for t in k..=2 * k {
            if p.rank_std(tol) == p.rank_dual(tol) {
                ind_dual = Some(t);
                break;
            }
            p = &p * self;
        }
        let ind_phi = linalg::index(&self.phi_embed(), tol.rank);
        Ok(IndexReport {
            ind_std: k,
            ind_dual,
            ind_phi,
        })
    }
}

impl<'a> Mul<&'a DualMatrix> for &'a DualMatrix {
    type Output = DualMatrix;
    fn mul(self, rhs: &'a DualMatrix) -> DualMatrix {
        DualMatrix {
            std: &self.std * &rhs.std,
            inf: &self.std * &rhs.inf + &self.inf * &rhs.std,
        }
    }
}

impl Mul<DualMatrix> for DualMatrix {
    type Output = DualMatrix;
    fn mul(self, rhs: DualMatrix) -> DualMatrix {
        &self * &rhs
    }
}

impl<'a> Mul<&'a DualMatrix> for DualMatrix {
    type Output = DualMatrix;
    fn mul(self, rhs: &'a DualMatrix) -> DualMatrix {
        &self * rhs
    }
}

impl<'a> Mul<DualMatrix> for &'a DualMatrix {
    type Output = DualMatrix;
    fn mul(self, rhs: DualMatrix) -> DualMatrix {
        self * &rhs
    }
}

macro_rules! additive {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a DualMatrix> for &'a DualMatrix {
            type Output = DualMatrix;
            fn $method(self, rhs: &'a DualMatrix) -> DualMatrix {
                DualMatrix {
                    std: &self.std $op &rhs.std,
                    inf: &self.inf $op &rhs.inf,
                }
            }
        }
        impl $tr<DualMatrix> for DualMatrix {
            type Output = DualMatrix;
            fn $method(self, rhs: DualMatrix) -> DualMatrix {
                &self $op &rhs
            }
        }
        impl<'a> $tr<&'a DualMatrix> for DualMatrix {
            type Output = DualMatrix;
            fn $method(self, rhs: &'a DualMatrix) -> DualMatrix {
                &self $op rhs
            }
        }
        impl<'a> $tr<DualMatrix> for &'a DualMatrix {
            type Output = DualMatrix;
            fn $method(self, rhs: DualMatrix) -> DualMatrix {
                self $op &rhs
            }
        }
    };
}

additive!(Add, add, +);
additive!(Sub, sub, -);

impl Neg for DualMatrix {
    type Output = DualMatrix;
    fn neg(self) -> DualMatrix {
        DualMatrix {
            std: -self.std,
            inf: -self.inf,
        }
    }
}

impl<'a> Neg for &'a DualMatrix {
    type Output = DualMatrix;
    fn neg(self) -> DualMatrix {
        -(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_and_eps_squared() {
        let y = DualMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(DualMatrix::identity(2).dmul(&y).unwrap(), y);
        let e = DualMatrix::from_inf(linalg::identity(3));
        assert!(e.dmul(&e).unwrap().is_zero());
        assert!(DualMatrix::zeros(2, 3).dmul(&DualMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn pow_examples() {
        let x = DualMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(x.dpow(0).unwrap(), DualMatrix::identity(2));
        assert_eq!(x.dpow(1).unwrap(), x);
        let sq = x.dpow(2).unwrap();
        assert_eq!(sq.std, from_real(2, 2, &[0.0; 4]));
        assert_eq!(sq.inf, from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]));
        assert!(DualMatrix::zeros(2, 3).dpow(2).is_err());
    }

    #[test]
    fn phi_examples() {
        let e = DualMatrix::from_inf(linalg::identity(2));
        let mut expect = ComplexMatrix::zeros(4, 4);
        expect.view_mut((0, 2), (2, 2)).copy_from(&linalg::identity(2));
        assert_eq!(e.phi_embed(), expect);
        let a = DualMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0], &[0.0; 4]);
        let phi = a.phi_embed();
        assert_eq!(phi.view((0, 0), (2, 2)).into_owned(), a.std);
        assert_eq!(phi.view((2, 2), (2, 2)).into_owned(), a.std);
        assert_eq!(phi.view((0, 2), (2, 2)).into_owned(), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn rank_examples() {
        let t = tol();
        let e3 = DualMatrix::from_inf(linalg::identity(3));
        assert_eq!(e3.rank_std(&t), 0);
        assert_eq!(e3.rank_dual(&t), 3);
        assert_eq!(DualMatrix::identity(3).rank_std(&t), 3);
        let ones = DualMatrix::from_real(2, 2, &[1.0; 4], &[0.0; 4]);
        assert_eq!(ones.rank_std(&t), 1);
        assert_eq!(ones.rank_dual(&t), 1);
        let mixed = DualMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(mixed.rank_dual(&t), 2);
    }

    #[test]
    fn index_examples() {
        let t = tol();
        let nil = DualMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0], &[0.0; 4]);
        assert_eq!(
            nil.indices(&t).unwrap(),
            IndexReport { ind_std: 2, ind_dual: Some(2), ind_phi: 2 }
        );
        let inv = DualMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 1.0], &[3.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            inv.indices(&t).unwrap(),
            IndexReport { ind_std: 0, ind_dual: Some(0), ind_phi: 0 }
        );
        let eps = DualMatrix::from_real(1, 1, &[0.0], &[1.0]);
        assert_eq!(
            eps.indices(&t).unwrap(),
            IndexReport { ind_std: 1, ind_dual: Some(2), ind_phi: 2 }
        );
    }

    fn small_dual(n: usize) -> impl Strategy<Value = DualMatrix> {
        proptest::collection::vec(-4i32..=4, 2 * n * n).prop_map(move |v| {
            let f: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            DualMatrix::from_real(n, n, &f[..n * n], &f[n * n..])
        })
    }

    proptest! {
        #[test]
        fn phi_is_a_ring_homomorphism(x in small_dual(4), y in small_dual(4)) {
            let prod = (&x * &y).phi_embed();
            let via = x.phi_embed() * y.phi_embed();
            prop_assert!(frob(&(&prod - &via)) <= 1e-12 * (1.0 + frob(&via)));
            let sum = (&x + &y).phi_embed();
            prop_assert!(frob(&(sum - (x.phi_embed() + y.phi_embed()))) == 0.0);
        }

        #[test]
        fn dmul_matches_phi_upper_blocks(x in small_dual(3), y in small_dual(3)) {
            let via = x.phi_embed() * y.phi_embed();
            let p = x.dmul(&y).unwrap();
            prop_assert!(frob(&(via.view((0, 0), (3, 3)).into_owned() - &p.std)) < 1e-12);
            prop_assert!(frob(&(via.view((0, 3), (3, 3)).into_owned() - &p.inf)) < 1e-12);
        }

        #[test]
        fn pow_inf_part_is_the_sum_formula(x in small_dual(3), k in 0usize..=6) {
            let p = x.pow(k);
            let mut sum = ComplexMatrix::zeros(3, 3);
            for i in 1..=k {
                sum += linalg::power(&x.std, k - i) * &x.inf * linalg::power(&x.std, i - 1);
            }
            prop_assert!(frob(&(&p.inf - &sum)) <= 1e-12 * (1.0 + frob(&sum)));
        }

        #[test]
        fn index_bounds_hold(x in small_dual(3)) {
            let r = x.indices(&tol()).unwrap();
            prop_assert!(r.ind_std <= r.ind_phi && r.ind_phi <= 2 * r.ind_std);
            if let Some(t) = r.ind_dual {
                prop_assert!(r.ind_std <= t && t <= 2 * r.ind_std);
            }
        }
    }
}
