//! Dense complex matrix helpers: numerical rank, index, pseudoinverse.

use num_traits::Float;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

/// Dense complex matrix, row/column semantics as in `nalgebra`.
pub type ComplexMatrix = DMatrix<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frob(m: &ComplexMatrix) -> f64 {
    Float::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.is_finite())
}

/// Real matrix lifted to the complex field.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Thin singular value decomposition `M = U diag(s) V*`, `s` decreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: alloc::vec::Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    fn sorted(u: ComplexMatrix, s: alloc::vec::Vec<f64>, v: ComplexMatrix) -> Self {
        let mut idx: alloc::vec::Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(core::cmp::Ordering::Equal));
        Self {
            u: ComplexMatrix::from_fn(u.nrows(), idx.len(), |r, c| u[(r, idx[c])]),
            s: idx.iter().map(|&i| s[i]).collect(),
            v: ComplexMatrix::from_fn(v.nrows(), idx.len(), |r, c| v[(r, idx[c])]),
        }
    }

    fn residual(&self, m: &ComplexMatrix) -> f64 {
        let mut us = self.u.clone();
        for (c, &sv) in self.s.iter().enumerate() {
            us.column_mut(c).scale_mut(sv);
        }
        let p = self.s.len();
        let orth = |q: &ComplexMatrix| frob(&(q.adjoint() * q - identity(p)));
        (frob(&(us * self.v.adjoint() - m)) / frob(m).max(f64::MIN_POSITIVE)).max(orth(&self.u)).max(orth(&self.v))
    }
}

/// SVD from `nalgebra`, checked by reconstruction and orthogonality.
/// `nalgebra` occasionally returns a wrong factorization (for example on
/// some rank-one matrices); those fall back to one-sided Jacobi.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd { u: zeros(r, 0), s: alloc::vec::Vec::new(), v: zeros(c, 0) };
    }
    if frob(m) == 0.0 {
        let p = r.min(c);
        return Svd { u: ComplexMatrix::identity(r, p), s: alloc::vec![0.0; p], v: ComplexMatrix::identity(c, p) };
    }
    let tol = 64.0 * r.max(c) as f64 * f64::EPSILON;
    if let Some(d) = m.clone().try_svd(true, true, f64::EPSILON, 0) {
        if let (Some(u), Some(v_t)) = (d.u, d.v_t) {
            let out = Svd::sorted(u, d.singular_values.iter().copied().collect(), v_t.adjoint());
            if out.residual(m) <= tol {
                return out;
            }
        }
    }
    jacobi_svd(m)
}

/// One-sided (Hestenes) Jacobi SVD.
fn jacobi_svd(m: &ComplexMatrix) -> Svd {
    if m.nrows() < m.ncols() {
        let t = jacobi_svd(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let n = m.ncols();
    let mut w = m.clone();
    let mut v = identity(n);
    for _ in 0..64 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dotc(&w.column(j));
                let g = gamma.norm();
                if g <= f64::EPSILON * Float::sqrt(alpha * beta) || g == 0.0 {
                    continue;
                }
                rotated = true;
                // make the coupling real, then apply a real rotation
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = Float::signum(zeta) / (Float::abs(zeta) + Float::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / Float::sqrt(1.0 + t * t);
                let sn = cs * t;
                for q in [&mut w, &mut v] {
                    for k in 0..q.nrows() {
                        let a = q[(k, i)];
                        let b = q[(k, j)] * phase.conj();
                        q[(k, i)] = a * cs - b * sn;
                        q[(k, j)] = a * sn + b * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s: alloc::vec::Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut u = w;
    for (k, &sv) in s.iter().enumerate() {
        if sv > 0.0 {
            u.column_mut(k).unscale_mut(sv);
        }
    }
    Svd::sorted(u, s, v)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &ComplexMatrix) -> alloc::vec::Vec<f64> {
    svd(m).s
}

/// Numerical rank with threshold `max(m, n) * rel * sigma_max`.
pub fn rank(m: &ComplexMatrix, rel: f64) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tau = m.nrows().max(m.ncols()) as f64 * rel * smax;
    sv.iter().filter(|&&s| s > tau).count()
}

/// Pseudoinverse from the leading `r` singular triplets.
pub fn pinv_rank(m: &ComplexMatrix, r: usize) -> ComplexMatrix {
    let d = svd(m);
    let mut out = zeros(m.ncols(), m.nrows());
    for k in 0..r.min(d.s.len()) {
        if d.s[k] > 0.0 {
            out += (d.v.column(k) * d.u.column(k).adjoint()) * Complex64::new(1.0 / d.s[k], 0.0);
        }
    }
    out
}

/// Moore–Penrose pseudoinverse through the SVD, truncated at the rank threshold.
pub fn pinv(m: &ComplexMatrix, rel: f64) -> ComplexMatrix {
    pinv_rank(m, rank(m, rel))
}

/// `m^k` by repeated squaring; `m^0 = I`.
pub fn power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = m.nrows();
    let mut result = identity(n);
    let mut base = m.clone();
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

/// Index of a square matrix together with `rank(A^index)`.
///
/// Staircase reduction: each step compresses `A` onto the orthogonal
/// complement of its null space, and `rank(A^k)` is the size left after `k`
/// steps. Every rank decision is made against `sigma_max(A)`, never against a
/// power of `A`, so small but genuine eigenvalues survive.
pub fn index_and_core_rank(a: &ComplexMatrix, rel: f64) -> (usize, usize) {
    let n = a.nrows();
    let smax = singular_values(a).first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (usize::from(n > 0), 0);
    }
    let tau = n as f64 * rel * smax;
    let mut m = a.clone();
    let mut k = 0;
    while m.nrows() > 0 {
        let d = svd(&m);
        let keep = d.s.iter().filter(|&&s| s > tau).count();
        if keep == m.nrows() {
            return (k, keep);
        }
        let v2 = d.v.columns(0, keep).into_owned();
        m = v2.adjoint() * &m * &v2;
        k += 1;
    }
    (k, 0)
}

pub fn index(a: &ComplexMatrix, rel: f64) -> usize {
    index_and_core_rank(a, rel).0
}

/// Inverse of an upper-triangular matrix by back substitution.
pub fn upper_triangular_inverse(t: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = t.nrows();
    let mut inv = zeros(n, n);
    for j in 0..n {
        if t[(j, j)].is_zero() {
            return None;
        }
        inv[(j, j)] = t[(j, j)].inv();
        for i in (0..j).rev() {
            let mut s = Complex64::zero();
            for k in i + 1..=j {
                s += t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / t[(i, i)];
        }
    }
    Some(inv)
}

pub fn inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    a.clone().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&identity(3), 1e-12), 3);
        assert_eq!(rank(&from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]), 1e-12), 1);
        assert_eq!(rank(&zeros(3, 2), 1e-12), 0);
    }

    #[test]
    fn index_examples() {
        let nil = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(index(&nil, 1e-12), 2);
        assert_eq!(index(&identity(3), 1e-12), 0);
        assert_eq!(index(&zeros(2, 2), 1e-12), 1);
        let idem = from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(index(&idem, 1e-12), 1);
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv(&a, 1e-12);
        let expect = from_real(2, 2, &[0.25, 0.25, 0.25, 0.25]);
        assert!(frob(&(p - expect)) < 1e-14);
    }

    #[test]
    fn triangular_inverse() {
        let t = from_real(3, 3, &[2.0, 1.0, 4.0, 0.0, 3.0, -1.0, 0.0, 0.0, 5.0]);
        let inv = upper_triangular_inverse(&t).unwrap();
        assert!(frob(&(&t * &inv - identity(3))) < 1e-14);
    }

    #[test]
    fn svd_survives_bad_rank_one_case() {
        let u = [1.273553558396638, 1.50797107742253, -1.2475781600602884, 0.3670762436418205];
        let w = [-1.0540350720860332, 1.9444189325393193, 1.2212970587287504, 0.654226928801891];
        let a = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(u[i] * w[j], 0.0));
        let a3 = power(&a, 3);
        let d = svd(&a3);
        assert!(d.residual(&a3) < 1e-13);
        assert!((d.s[0] - frob(&a3)).abs() < 1e-13);
    }

    #[test]
    fn jacobi_matches_definition() {
        for (r, c) in [(3, 3), (5, 2), (2, 5), (4, 4)] {
            let m = ComplexMatrix::from_fn(r, c, |i, j| {
                Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0)
            });
            let d = jacobi_svd(&m);
            assert!(d.residual(&m) < 1e-13, "{r}x{c}");
            assert!(d.s.windows(2).all(|p| p[0] >= p[1]));
        }
    }
}
