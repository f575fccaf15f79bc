//! Complex Drazin inverses and the dual Drazin inverse `A^D + ε A_R`.

use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;


use crate::dualmat::DualMatrix;
use crate::error::{shape, Error, Result};
use crate::linalg::{self, frob, identity, power, ComplexMatrix};
use crate::schur::ComplexSchur;
use crate::tol::Tolerances;

/// Drazin inverse of a square complex matrix with its index and spectral
/// projectors `A^e = A A^D`, `A^π = I − A A^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrazinData {
    pub ad: ComplexMatrix,
    pub index: usize,
    pub proj_e: ComplexMatrix,
    pub proj_pi: ComplexMatrix,
}

impl DrazinData {
    fn from_parts(a: &ComplexMatrix, ad: ComplexMatrix, index: usize) -> Self {
        let proj_e = a * &ad;
        let proj_pi = identity(a.nrows()) - &proj_e;
        Self {
            ad,
            index,
            proj_e,
            proj_pi,
        }
    }
}

fn require_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.nrows() == a.ncols() {
        Ok(())
    } else {
        Err(shape(format!("{what} requires a square matrix, got {:?}", a.shape())))
    }
}

/// Drazin inverse through a reordered complex Schur form.
///
/// The zero-eigenvalue cluster has exactly `n − rank(A^k)` members, so the
/// split takes that many eigenvalues of smallest modulus rather than
/// thresholding them: a defective zero eigenvalue of multiplicity `q`
/// is perturbed to roughly `u^(1/q)` in floating point.
pub fn drazin_complex(a: &ComplexMatrix, tol: &Tolerances) -> Result<DrazinData> {
    require_square(a, "drazin_complex")?;
    let n = a.nrows();
    let (k, r) = linalg::index_and_core_rank(a, tol.rank);
    if n == 0 {
        return Ok(DrazinData::from_parts(a, linalg::zeros(0, 0), 0));
    }
    if k == 0 {
        if let Some(inv) = linalg::inverse(a) {
            return Ok(DrazinData::from_parts(a, inv, 0));
        }
    }
    if r == 0 {
        return Ok(DrazinData::from_parts(a, linalg::zeros(n, n), k));
    }

    let mut schur = ComplexSchur::new(a);
    let eig = schur.eigenvalues();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig[i]
            .norm()
            .partial_cmp(&eig[j].norm())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut selected = alloc::vec![false; n];
    for &i in order.iter().take(n - r) {
        selected[i] = true;
    }
    schur.move_to_tail(&selected);

    let t = &schur.t;
    let t11 = t.view((0, 0), (r, r)).into_owned();
    let t12 = t.view((0, r), (r, n - r)).into_owned();
    let t22 = t.view((r, r), (n - r, n - r)).into_owned();
    let t11_inv = linalg::upper_triangular_inverse(&t11).unwrap_or_else(|| linalg::pinv(&t11, tol.rank));

    let q = k.max(1).min(n - r);
    let mut s = linalg::zeros(r, n - r);
    let mut left = &t11_inv * &t11_inv;
    let mut right = identity(n - r);
    for _ in 0..q {
        s += &left * &t12 * &right;
        left = &left * &t11_inv;
        right = &right * &t22;
    }

    let mut core = linalg::zeros(n, n);
    core.view_mut((0, 0), (r, r)).copy_from(&t11_inv);
    core.view_mut((0, r), (r, n - r)).copy_from(&s);
    let ad = &schur.q * core * schur.q.adjoint();
    Ok(DrazinData::from_parts(a, ad, k))
}

/// Independent oracle `A^k (A^(2k+1))† A^k`, the pseudoinverse truncated to
/// `rank(A^k)` singular values.
pub fn drazin_oracle(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    require_square(a, "drazin_oracle")?;
    let n = a.nrows();
    let (k, r) = linalg::index_and_core_rank(a, tol.rank);
    if n == 0 || r == 0 {
        return Ok(linalg::zeros(n, n));
    }
    let ak = power(a, k);
    let big = power(a, 2 * k + 1);
    Ok(&ak * linalg::pinv_rank(&big, r) * &ak)
}

/// Group inverse; fails when the index exceeds one.
pub fn group_inverse(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let d = drazin_complex(a, tol)?;
    if d.index > 1 {
        return Err(Error::IndexTooLarge { index: d.index });
    }
    Ok(d.ad)
}

/// Outcome of the projector test `A^π M A^π = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Existence {
    pub holds: bool,
    /// `M = Σ_{i=1..k} A^(k−i) A0 A^(i−1)`, the infinitesimal part of `Â^k`.
    pub m: ComplexMatrix,
    /// `||A^π M A^π||_F / (1 + ||M||_F)`.
    pub residual: f64,
    pub drazin: DrazinData,
}

pub fn dual_exists(x: &DualMatrix, tol: &Tolerances) -> Result<Existence> {
    if !x.is_square() {
        return Err(shape(format!("dual_exists requires a square matrix, got {:?}", x.shape())));
    }
    let drazin = drazin_complex(&x.std, tol)?;
    let m = x.pow(drazin.index).inf;
    let sandwich = &drazin.proj_pi * &m * &drazin.proj_pi;
    let residual = frob(&sandwich) / (1.0 + frob(&m));
    let holds = if tol.strict { frob(&sandwich) == 0.0 } else { residual <= tol.exists };
    Ok(Existence {
        holds,
        m,
        residual,
        drazin,
    })
}

/// The dual Drazin inverse together with its existence certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDrazinData {
    pub inverse: DualMatrix,
    pub m_matrix: ComplexMatrix,
    pub exists: bool,
    /// Relative residuals of `Â^k X Â = Â^k`, `X Â X = X`, `Â X = X Â`.
    pub residuals: [f64; 3],
    pub drazin: DrazinData,
}

impl DualDrazinData {
    pub fn index(&self) -> usize {
        self.drazin.index
    }

    /// `A_R`, the infinitesimal part of the inverse.
    pub fn a_r(&self) -> &ComplexMatrix {
        &self.inverse.inf
    }

    /// `Â^e = Â Â^D`.
    pub fn proj_e(&self, x: &DualMatrix) -> DualMatrix {
        x * &self.inverse
    }

    /// `Â^π = I − Â Â^D`.
    pub fn proj_pi(&self, x: &DualMatrix) -> DualMatrix {
        DualMatrix::identity(x.nrows()) - x * &self.inverse
    }

    /// `(Â^D)^s`, with `s = 0` giving the identity.
    pub fn pow(&self, s: usize) -> DualMatrix {
        self.inverse.pow(s)
    }
}

/// `A_R = −A^D A0 A^D + Σ (A^D)^(i+2) A0 A^i A^π + Σ A^π A^i A0 (A^D)^(i+2)`, `i < k`.
fn infinitesimal_part(a: &ComplexMatrix, a0: &ComplexMatrix, d: &DrazinData) -> ComplexMatrix {
    let ad = &d.ad;
    let mut ar = -(ad * a0 * ad);
    let mut ad_pow = ad * ad;
    let mut a_pow = identity(a.nrows());
    for _ in 0..d.index {
        ar += &ad_pow * a0 * &a_pow * &d.proj_pi;
        ar += &d.proj_pi * &a_pow * a0 * &ad_pow;
        ad_pow = &ad_pow * ad;
        a_pow = &a_pow * a;
    }
    ar
}

/// Relative residuals of the three defining equations with `k = Ind(A)`.
pub fn defining_residuals(x: &DualMatrix, inv: &DualMatrix, k: usize) -> [f64; 3] {
    let na = x.norm();
    let nx = inv.norm();
    let xk = x.pow(k);
    let r1 = (&xk * inv * x - &xk).norm() / (1.0 + Float::powi(na, k as i32 + 1) * nx);
    let r2 = (inv * x * inv - inv).norm() / (1.0 + nx * nx * na);
    let r3 = (x * inv - inv * x).norm() / (1.0 + na * nx);
    [r1, r2, r3]
}

pub fn dual_drazin(x: &DualMatrix, tol: &Tolerances) -> Result<DualDrazinData> {
    let ex = dual_exists(x, tol)?;
    if !ex.holds {
        return Err(Error::NotDualDrazinInvertible { residual: ex.residual });
    }
    let ar = infinitesimal_part(&x.std, &x.inf, &ex.drazin);
    let inverse = DualMatrix {
        std: ex.drazin.ad.clone(),
        inf: ar,
    };
    let residuals = defining_residuals(x, &inverse, ex.drazin.index);
    Ok(DualDrazinData {
        inverse,
        m_matrix: ex.m,
        exists: true,
        residuals,
        drazin: ex.drazin,
    })
}

/// `(Â^D)^k = A^(kD) + ε Σ_{i<k} A^(iD) A_R A^((k−i−1)D)`.
pub fn dual_drazin_power(x: &DualMatrix, k: usize, tol: &Tolerances) -> Result<DualMatrix> {
    let d = dual_drazin(x, tol)?;
    Ok(power_from_parts(&d.inverse.std, &d.inverse.inf, k))
}

pub(crate) fn power_from_parts(ad: &ComplexMatrix, ar: &ComplexMatrix, k: usize) -> DualMatrix {
    let n = ad.nrows();
    let powers: Vec<ComplexMatrix> = core::iter::successors(Some(identity(n)), |p| Some(p * ad))
        .take(k + 1)
        .collect();
    let mut inf = linalg::zeros(n, n);
    for i in 0..k {
        inf += &powers[i] * ar * &powers[k - i - 1];
    }
    DualMatrix {
        std: powers[k].clone(),
        inf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::linalg::from_real;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rel(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
        frob(&(x - y)) / (1.0 + frob(y))
    }

    #[test]
    fn complex_examples() {
        let inv = from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let d = drazin_complex(&inv, &tol()).unwrap();
        assert_eq!(d.index, 0);
        assert!(rel(&d.ad, &from_real(2, 2, &[1.0, -1.0, -1.0, 2.0])) < 1e-14);

        let nil = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let d = drazin_complex(&nil, &tol()).unwrap();
        assert_eq!(d.index, 2);
        assert_eq!(d.ad, linalg::zeros(2, 2));

        let idem = from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let d = drazin_complex(&idem, &tol()).unwrap();
        assert_eq!(d.index, 1);
        assert!(rel(&d.ad, &idem) < 1e-14);
        assert!(rel(&drazin_oracle(&idem, &tol()).unwrap(), &idem) < 1e-14);
    }

    #[test]
    fn projectors_are_complementary() {
        let a = from_real(3, 3, &[1.0, 2.0, 3.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let d = drazin_complex(&a, &tol()).unwrap();
        assert!(frob(&(&d.proj_e * &d.proj_e - &d.proj_e)) < 1e-12);
        assert!(frob(&(&d.proj_e + &d.proj_pi - identity(3))) < 1e-14);
        let k = d.index;
        assert!(rel(&(power(&a, k + 1) * &d.ad), &power(&a, k)) < 1e-12);
        assert!(rel(&(&d.ad * &a * &d.ad), &d.ad) < 1e-12);
    }

    #[test]
    fn group_inverse_examples() {
        let idem = from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert!(rel(&group_inverse(&idem, &tol()).unwrap(), &idem) < 1e-14);
        let nil = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(group_inverse(&nil, &tol()), Err(Error::IndexTooLarge { index: 2 }));
    }

    #[test]
    fn existence_examples() {
        let bad = DualMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        let ex = dual_exists(&bad, &tol()).unwrap();
        assert!(!ex.holds);
        assert_eq!(ex.m, from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]));
        assert!(matches!(
            dual_drazin(&bad, &tol()),
            Err(Error::NotDualDrazinInvertible { .. })
        ));

        let good = DualMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0], &[0.0, 3.0, 0.0, 0.0]);
        assert!(dual_exists(&good, &tol()).unwrap().holds);
        assert!(dual_drazin(&good, &tol()).unwrap().inverse.is_zero());
    }

    #[test]
    fn invertible_dual_inverse() {
        let x = DualMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 1.0], &[3.0, -1.0, 0.5, 2.0]);
        let d = dual_drazin(&x, &tol()).unwrap();
        let ai = linalg::inverse(&x.std).unwrap();
        assert!(rel(&d.inverse.std, &ai) < 1e-14);
        assert!(rel(&d.inverse.inf, &-(&ai * &x.inf * &ai)) < 1e-14);
        let sq = dual_drazin_power(&x, 2, &tol()).unwrap();
        let direct = d.inverse.pow(2);
        assert!(rel(&sq.std, &direct.std) < 1e-14 && rel(&sq.inf, &direct.inf) < 1e-14);
    }

    /// `S (P ⊕ N) S⁻¹` with unit upper-triangular `S`, invertible `P` and a
    /// strictly upper-triangular `N` whose infinitesimal part shares its support.
    fn dcz(p: usize, q: usize, vals: &[i32]) -> DualMatrix {
        let n = p + q;
        let mut it = vals.iter().map(|&v| v as f64).cycle();
        let mut j = DualMatrix::zeros(n, n);
        for r in 0..p {
            for c in 0..p {
                j.std[(r, c)] = Complex64::new(it.next().unwrap() + if r == c { 7.0 } else { 0.0 }, 0.0);
                j.inf[(r, c)] = Complex64::new(it.next().unwrap(), 0.0);
            }
        }
        for r in 0..q {
            for c in r + 1..q {
                let v = if c == r + 1 { 1.0 } else { it.next().unwrap() };
                j.std[(p + r, p + c)] = Complex64::new(v, 0.0);
                j.inf[(p + r, p + c)] = Complex64::new(it.next().unwrap(), 0.0);
            }
        }
        let mut s = DualMatrix::identity(n);
        let mut s_inv_seed = DualMatrix::zeros(n, n);
        for r in 0..n {
            for c in r + 1..n {
                s_inv_seed.std[(r, c)] = Complex64::new((it.next().unwrap() / 2.0).round(), 0.0);
                s_inv_seed.inf[(r, c)] = Complex64::new((it.next().unwrap() / 2.0).round(), 0.0);
            }
        }
        s = s + &s_inv_seed;
        // (I + U)⁻¹ = Σ (−U)^i for strictly upper U
        let mut s_inv = DualMatrix::identity(n);
        let mut term = DualMatrix::identity(n);
        for _ in 1..n {
            term = &term * &(-&s_inv_seed);
            s_inv = s_inv + &term;
        }
        &s * &j * &s_inv
    }

    #[test]
    fn dcz_construction_is_accepted() {
        let x = dcz(2, 3, &[1, -2, 3, 0, 2, -1, 1, 1, -3, 2]);
        let d = dual_drazin(&x, &tol()).unwrap();
        assert_eq!(d.index(), 3);
        assert!(d.residuals.iter().all(|&r| r < 1e-10), "{:?}", d.residuals);
    }

    fn small_square(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(-3i32..=3, 2 * n * n).prop_map(move |v| {
            ComplexMatrix::from_iterator(
                n,
                n,
                (0..n * n).map(|i| Complex64::new(v[2 * i] as f64, v[2 * i + 1] as f64)),
            )
        })
    }

    proptest! {
        #[test]
        fn schur_path_matches_oracle(a in small_square(5), zero_rows in 0usize..3) {
            let mut a = a;
            for r in 0..zero_rows {
                a.row_mut(r).fill(Complex64::new(0.0, 0.0));
            }
            let d = drazin_complex(&a, &tol()).unwrap();
            let o = drazin_oracle(&a, &tol()).unwrap();
            prop_assert!(rel(&d.ad, &o) < 1e-9, "err {}", rel(&d.ad, &o));
        }

        #[test]
        fn dual_inverse_satisfies_definition(
            p in 0usize..3, q in 1usize..4,
            vals in proptest::collection::vec(-3i32..=3, 16),
        ) {
            let x = dcz(p, q, &vals);
            let d = dual_drazin(&x, &tol()).unwrap();
            prop_assert!(d.residuals.iter().all(|&r| r < 1e-8), "{:?}", d.residuals);
            for s in 1..=4 {
                let via_power = d.inverse.pow(s);
                let via_formula = power_from_parts(&d.inverse.std, &d.inverse.inf, s);
                let of_power = dual_drazin(&x.pow(s), &tol()).unwrap().inverse;
                prop_assert!((&via_power - &via_formula).norm() <= 1e-9 * (1.0 + via_power.norm()));
                prop_assert!((&via_power - &of_power).norm() <= 1e-9 * (1.0 + via_power.norm()));
            }
        }
    }
}
