//! Exact arithmetic over the Gaussian rationals `Q(i)` and the dual ring
//! `Q(i)[ε]/(ε²)`.
//!
//! Used to certify generated instances (hypotheses hold with residual
//! exactly zero) and as an independent rank oracle.

use std::ops::{Add, Mul, Neg, Sub};

use ddz_core::{Complex64, DualMatrix};
use num::complex::Complex;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Gq = Complex<BigRational>;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("entry ({0}, {1}) is not a Gaussian integer")]
    InexactInput(usize, usize),
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("not dual Drazin invertible")]
    NotInvertible,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

fn rat(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn gq_int(re: i64, im: i64) -> Gq {
    Complex::new(BigRational::from_integer(BigInt::from(re)), BigRational::from_integer(BigInt::from(im)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Gq>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Gq::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Gq::one();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Exact image of a float matrix; every finite double is a dyadic rational.
    pub fn from_complex(m: &ddz_core::ComplexMatrix) -> Result<Self, ExactError> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                let (re, im) = rat(z.re).zip(rat(z.im)).ok_or(ExactError::NonFinite(i, j))?;
                out[(i, j)] = Complex::new(re, im);
            }
        }
        Ok(out)
    }

    pub fn to_complex(&self) -> ddz_core::ComplexMatrix {
        ddz_core::ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let z = &self[(i, j)];
            Complex64::new(to_f64(&z.re), to_f64(&z.im))
        })
    }

    pub fn is_gaussian_integer(&self) -> Option<(usize, usize)> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = &self[(i, j)];
                if !z.re.is_integer() || !z.im.is_integer() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Reduced row echelon form: returns `(R, P, pivots)` with `P A = R`.
    fn rref(&self) -> (Self, Self, Vec<usize>) {
        let mut r = self.clone();
        let mut p = Self::identity(self.rows);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(sel) = (row..self.rows).find(|&i| !r[(i, col)].is_zero()) else {
                continue;
            };
            r.swap_rows(row, sel);
            p.swap_rows(row, sel);
            let inv = Gq::one() / r[(row, col)].clone();
            r.scale_row(row, &inv);
            p.scale_row(row, &inv);
            for i in 0..self.rows {
                if i != row && !r[(i, col)].is_zero() {
                    let f = r[(i, col)].clone();
                    r.axpy_row(i, row, &f);
                    p.axpy_row(i, row, &f);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (r, p, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, i: usize, f: &Gq) {
        for j in 0..self.cols {
            self[(i, j)] = self[(i, j)].clone() * f.clone();
        }
    }

    /// `row_i -= f * row_src`.
    fn axpy_row(&mut self, i: usize, src: usize, f: &Gq) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone() * f.clone();
            self[(i, j)] = self[(i, j)].clone() - v;
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().2.len()
    }

    /// A `{1}`-inverse `G` with `A G A = A`.
    pub fn one_inverse(&self) -> Self {
        let (_, p, pivots) = self.rref();
        let mut g = Self::zeros(self.cols, self.rows);
        for (j, &c) in pivots.iter().enumerate() {
            for k in 0..self.rows {
                g[(c, k)] = p[(j, k)].clone();
            }
        }
        g
    }

    /// Basis of the right null space, one column per free variable.
    pub fn null_space(&self) -> Vec<Self> {
        let (r, _, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = Self::zeros(self.cols, 1);
            v[(free, 0)] = Gq::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[(pc, 0)] = -r[(row, free)].clone();
            }
            out.push(v);
        }
        out
    }

    pub fn index(&self) -> usize {
        let mut k = 0;
        let mut p = Self::identity(self.rows);
        let mut rk = self.rows;
        loop {
            let next = &p * self;
            let rn = next.rank();
            if rn == rk {
                return k;
            }
            p = next;
            rk = rn;
            k += 1;
        }
    }

    /// `A^l (A^{2l+1})^{(1)} A^l` with `l = Ind(A)`; independent of the chosen `{1}`-inverse.
    pub fn drazin(&self) -> (Self, usize) {
        let k = self.index();
        let ak = self.pow(k);
        let mid = self.pow(2 * k + 1).one_inverse();
        (&(&ak * &mid) * &ak, k)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = Gq;
    fn index(&self, (i, j): (usize, usize)) -> &Gq {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Gq {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "exact product shape mismatch");
        let mut out = ExactMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "exact sum shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        ExactMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "exact difference shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        ExactMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Neg for &ExactMatrix {
    type Output = ExactMatrix;
    fn neg(self) -> ExactMatrix {
        ExactMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a.clone()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDual {
    pub std: ExactMatrix,
    pub inf: ExactMatrix,
}

impl ExactDual {
    pub fn from_dual(x: &DualMatrix) -> Result<Self, ExactError> {
        Ok(Self { std: ExactMatrix::from_complex(&x.std)?, inf: ExactMatrix::from_complex(&x.inf)? })
    }

    /// Like [`ExactDual::from_dual`] but rejects non-integer entries.
    pub fn from_gaussian_integers(x: &DualMatrix) -> Result<Self, ExactError> {
        let d = Self::from_dual(x)?;
        if let Some((i, j)) = d.std.is_gaussian_integer().or(d.inf.is_gaussian_integer()) {
            return Err(ExactError::InexactInput(i, j));
        }
        Ok(d)
    }

    pub fn to_dual(&self) -> DualMatrix {
        DualMatrix { std: self.std.to_complex(), inf: self.inf.to_complex() }
    }

    pub fn identity(n: usize) -> Self {
        Self { std: ExactMatrix::identity(n), inf: ExactMatrix::zeros(n, n) }
    }

    pub fn is_zero(&self) -> bool {
        self.std.is_zero() && self.inf.is_zero()
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.std.nrows());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self { std: self.std.transpose(), inf: self.inf.transpose() }
    }
}

impl Mul for &ExactDual {
    type Output = ExactDual;
    fn mul(self, rhs: &ExactDual) -> ExactDual {
        ExactDual {
            std: &self.std * &rhs.std,
            inf: &(&self.std * &rhs.inf) + &(&self.inf * &rhs.std),
        }
    }
}

impl Add for &ExactDual {
    type Output = ExactDual;
    fn add(self, rhs: &ExactDual) -> ExactDual {
        ExactDual { std: &self.std + &rhs.std, inf: &self.inf + &rhs.inf }
    }
}

impl Sub for &ExactDual {
    type Output = ExactDual;
    fn sub(self, rhs: &ExactDual) -> ExactDual {
        ExactDual { std: &self.std - &rhs.std, inf: &self.inf - &rhs.inf }
    }
}

/// Exact spectral data of a dual matrix: `A^D`, `A^π`, `A^e` and the dual Drazin inverse.
#[derive(Debug, Clone)]
pub struct ExactSpectral {
    pub index: usize,
    pub exists: bool,
    pub pi: ExactMatrix,
    pub e: ExactMatrix,
    /// Dual Drazin inverse; only meaningful when `exists`.
    pub drazin: ExactDual,
}

impl ExactSpectral {
    pub fn new(x: &ExactDual) -> Self {
        let n = x.std.nrows();
        let (ad, k) = x.std.drazin();
        let e = &x.std * &ad;
        let pi = &ExactMatrix::identity(n) - &e;
        let m = x.pow(k).inf;
        let exists = (&(&pi * &m) * &pi).is_zero();
        let a0 = &x.inf;
        let mut ar = -&(&(&ad * a0) * &ad);
        let mut adp = &ad * &ad;
        let mut ai = ExactMatrix::identity(n);
        for _ in 0..k {
            ar = &ar + &(&(&(&adp * a0) * &ai) * &pi);
            ar = &ar + &(&(&(&pi * &ai) * a0) * &adp);
            adp = &adp * &ad;
            ai = &ai * &x.std;
        }
        Self { index: k, exists, pi, e, drazin: ExactDual { std: ad, inf: ar } }
    }

    /// Dual spectral idempotent `Â^π = I − Â Â^D`.
    pub fn dual_pi(&self, x: &ExactDual) -> ExactDual {
        &ExactDual::identity(x.std.nrows()) - &(x * &self.drazin)
    }

    pub fn dual_e(&self, x: &ExactDual) -> ExactDual {
        x * &self.drazin
    }
}

/// Dual Smith form pivots of a Gaussian-integer dual matrix: `(r, s)` with
/// `r` unit pivots and `s` pivots equal to `ε` up to units.
pub fn smith_rank_oracle(x: &DualMatrix) -> Result<(usize, usize), ExactError> {
    let d = ExactDual::from_gaussian_integers(x)?;
    let (mut a, mut a0) = (d.std, d.inf);
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut t = 0;
    loop {
        let found = (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j))).find(|&(i, j)| !a[(i, j)].is_zero());
        let Some((pi, pj)) = found else { break };
        for m in [&mut a, &mut a0] {
            m.swap_rows(t, pi);
            swap_cols(m, t, pj);
        }
        // (p + ε p0)^{-1} = p^{-1} − ε p^{-2} p0
        let p = a[(t, t)].clone();
        let pinv = Gq::one() / p;
        let pinv0 = -(pinv.clone() * pinv.clone() * a0[(t, t)].clone());
        for i in t + 1..rows {
            // factor f = x_it · pivot^{-1}
            let (xs, x0) = (a[(i, t)].clone(), a0[(i, t)].clone());
            let fs = xs.clone() * pinv.clone();
            let f0 = xs * pinv0.clone() + x0 * pinv.clone();
            for j in t..cols {
                let (rs, r0) = (a[(t, j)].clone(), a0[(t, j)].clone());
                a[(i, j)] = a[(i, j)].clone() - fs.clone() * rs.clone();
                a0[(i, j)] = a0[(i, j)].clone() - (fs.clone() * r0 + f0.clone() * rs);
            }
        }
        for j in t + 1..cols {
            let (xs, x0) = (a[(t, j)].clone(), a0[(t, j)].clone());
            let fs = xs.clone() * pinv.clone();
            let f0 = xs * pinv0.clone() + x0 * pinv.clone();
            for i in t..rows {
                let (cs, c0) = (a[(i, t)].clone(), a0[(i, t)].clone());
                a[(i, j)] = a[(i, j)].clone() - cs.clone() * fs.clone();
                a0[(i, j)] = a0[(i, j)].clone() - (cs * f0.clone() + c0 * fs.clone());
            }
        }
        t += 1;
    }
    // the remaining block is ε times its infinitesimal part
    let mut rest = ExactMatrix::zeros(rows - t, cols - t);
    for i in t..rows {
        for j in t..cols {
            rest[(i - t, j - t)] = a0[(i, j)].clone();
        }
    }
    Ok((t, rest.rank()))
}

fn swap_cols(m: &mut ExactMatrix, a: usize, b: usize) {
    if a != b {
        for i in 0..m.nrows() {
            let (x, y) = (m[(i, a)].clone(), m[(i, b)].clone());
            m[(i, a)] = y;
            m[(i, b)] = x;
        }
    }
}

/// Largest absolute real or imaginary part, as a float; for reporting.
pub fn max_abs(m: &ExactMatrix) -> f64 {
    m.data.iter().map(|z| to_f64(&z.re.abs()).max(to_f64(&z.im.abs()))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ddz_core::drazin::drazin_complex;
    use ddz_core::linalg::from_real;
    use ddz_core::Tolerances;

    fn dual(n: usize, std: &[f64], inf: &[f64]) -> DualMatrix {
        DualMatrix::from_real(n, n, std, inf)
    }

    #[test]
    fn smith_examples() {
        let eps3 = dual(3, &[0.0; 9], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(smith_rank_oracle(&eps3).unwrap(), (0, 3));
        let d = dual(3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(smith_rank_oracle(&d).unwrap(), (1, 1));
        let half = dual(1, &[0.5], &[0.0]);
        assert_eq!(smith_rank_oracle(&half), Err(ExactError::InexactInput(0, 0)));
    }

    #[test]
    fn smith_cancels_infinitesimal_couplings() {
        // [[1, 0], [0, 0]] + ε [[5, 1], [1, 0]] has the ε entries removable by the unit pivot
        let x = dual(2, &[1.0, 0.0, 0.0, 0.0], &[5.0, 1.0, 1.0, 0.0]);
        assert_eq!(smith_rank_oracle(&x).unwrap(), (1, 0));
    }

    #[test]
    fn exact_drazin_matches_float() {
        let a = from_real(3, 3, &[1.0, 2.0, 3.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let ex = ExactMatrix::from_complex(&a).unwrap();
        let (ad, k) = ex.drazin();
        let fl = drazin_complex(&a, &Tolerances::default()).unwrap();
        assert_eq!(k, fl.index);
        let diff = &ad.to_complex() - &fl.ad;
        assert!(ddz_core::linalg::frob(&diff) < 1e-12);
    }

    #[test]
    fn one_inverse_property() {
        let a = from_real(3, 4, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0, 0.0, 1.0, 0.0, 1.0]);
        let ex = ExactMatrix::from_complex(&a).unwrap();
        let g = ex.one_inverse();
        assert_eq!(&(&ex * &g) * &ex, ex);
        for v in ex.null_space() {
            assert!((&ex * &v).is_zero());
        }
        assert_eq!(ex.null_space().len(), 4 - ex.rank());
    }

    #[test]
    fn exact_dual_drazin_satisfies_equations() {
        let x = dual(2, &[2.0, 1.0, 0.0, 0.0], &[1.0, 3.0, 0.0, 0.0]);
        let ex = ExactDual::from_dual(&x).unwrap();
        let sp = ExactSpectral::new(&ex);
        assert!(sp.exists);
        let d = &sp.drazin;
        assert_eq!(&(&(d * &ex) * d), d);
        assert_eq!(&ex * d, d * &ex);
        let k = sp.index;
        assert_eq!(&(&ex.pow(k) * d) * &ex, ex.pow(k));

        let bad = dual(2, &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]);
        assert!(!ExactSpectral::new(&ExactDual::from_dual(&bad).unwrap()).exists);
    }
}
