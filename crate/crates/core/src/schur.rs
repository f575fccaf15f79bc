//! Complex Schur decomposition `A = Q T Q*` with eigenvalue reordering.
//!
//! Householder reduction to Hessenberg form followed by single-shift QR
//! iterations (Wilkinson shift, exceptional shifts on stagnation). Deflation
//! uses the absolute criterion `|h[k,k-1]| <= eps * ||H||_F`, which is all a
//! backward-stable spectral split needs.

use num_traits::Float;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::linalg::{frob, identity, ComplexMatrix};

#[derive(Debug, Clone)]
pub struct ComplexSchur {
    /// Unitary factor.
    pub q: ComplexMatrix,
    /// Upper-triangular factor.
    pub t: ComplexMatrix,
}

/// Plane rotation `[[c, s], [-conj(s), c]]` with real `c`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    c: f64,
    s: Complex64,
}

impl Rotation {
    /// Rotation whose adjoint-free application zeroes `b` in `(a, b)`.
    fn zeroing(a: Complex64, b: Complex64) -> Self {
        let na = a.norm();
        let nb = b.norm();
        if nb == 0.0 {
            return Self { c: 1.0, s: Complex64::zero() };
        }
        if na == 0.0 {
            return Self { c: 0.0, s: b.conj() / nb };
        }
        let r = Float::hypot(na, nb);
        Self {
            c: na / r,
            s: (a / na) * b.conj() / r,
        }
    }

    /// Rows `i`, `j` over columns `cols`: `[x; y] <- [c x + s y; -conj(s) x + c y]`.
    fn apply_rows(&self, m: &mut ComplexMatrix, i: usize, j: usize, cols: core::ops::Range<usize>) {
        for col in cols {
            let x = m[(i, col)];
            let y = m[(j, col)];
            m[(i, col)] = x * self.c + self.s * y;
            m[(j, col)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Columns `i`, `j` over rows `rows`, multiplying on the right by the adjoint.
    fn apply_cols(&self, m: &mut ComplexMatrix, i: usize, j: usize, rows: core::ops::Range<usize>) {
        for row in rows {
            let x = m[(row, i)];
            let y = m[(row, j)];
            m[(row, i)] = x * self.c + y * self.s.conj();
            m[(row, j)] = -self.s * x + y * self.c;
        }
    }
}

fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let alpha = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if alpha == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        v[0] += phase * alpha;
        let vn = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2 v v*) H
        for col in 0..n {
            let mut dot = Complex64::zero();
            for i in 0..len {
                dot += v[i].conj() * h[(k + 1 + i, col)];
            }
            for i in 0..len {
                h[(k + 1 + i, col)] -= v[i] * dot * 2.0;
            }
        }
        // H <- H (I - 2 v v*), Q <- Q (I - 2 v v*)
        for m in [&mut h, &mut q] {
            for row in 0..n {
                let mut dot = Complex64::zero();
                for i in 0..len {
                    dot += m[(row, k + 1 + i)] * v[i];
                }
                for i in 0..len {
                    m[(row, k + 1 + i)] -= dot * v[i].conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    (h, q)
}

/// Eigenvalue of the trailing 2×2 block closest to its (2,2) entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

impl ComplexSchur {
    pub fn new(a: &ComplexMatrix) -> Self {
        assert!(a.is_square(), "Schur decomposition needs a square matrix");
        let n = a.nrows();
        let (mut t, mut q) = hessenberg(a);
        if n < 2 {
            return Self { q, t };
        }
        let eps = f64::EPSILON;
        let norm = frob(&t).max(f64::MIN_POSITIVE);
        let mut hi = n - 1;
        let mut iter_since_deflation = 0usize;
        let mut total = 0usize;
        let max_total = 100 * n * n;

        while hi > 0 {
            // locate the active window [lo, hi]
            let mut lo = hi;
            while lo > 0 {
                if t[(lo, lo - 1)].norm() <= eps * norm {
                    t[(lo, lo - 1)] = Complex64::zero();
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                iter_since_deflation = 0;
                continue;
            }
            total += 1;
            iter_since_deflation += 1;
            if total > max_total {
                // last resort: accept the current subdiagonal as converged
                t[(hi, hi - 1)] = Complex64::zero();
                continue;
            }

            let mu = if iter_since_deflation % 11 == 10 {
                t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.25 * t[(hi, hi - 1)].norm())
            } else {
                wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
            };

            for k in lo..=hi {
                t[(k, k)] -= mu;
            }
            let mut rots = Vec::with_capacity(hi - lo);
            for k in lo..hi {
                let g = Rotation::zeroing(t[(k, k)], t[(k + 1, k)]);
                g.apply_rows(&mut t, k, k + 1, k..n);
                t[(k + 1, k)] = Complex64::zero();
                rots.push(g);
            }
            for (off, g) in rots.iter().enumerate() {
                let k = lo + off;
                g.apply_cols(&mut t, k, k + 1, 0..(k + 2).min(hi + 1));
                g.apply_cols(&mut q, k, k + 1, 0..n);
            }
            for k in lo..=hi {
                t[(k, k)] += mu;
            }
        }
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = Complex64::zero();
            }
        }
        Self { q, t }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps the diagonal entries at `k` and `k + 1` by a unitary rotation.
    pub fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.nrows();
        let a = self.t[(k, k)];
        let b = self.t[(k, k + 1)];
        let c = self.t[(k + 1, k + 1)];
        // eigenvector of [[a, b], [0, c]] for eigenvalue c is (b, c - a)
        let x1 = b;
        let x2 = c - a;
        if x1.norm() == 0.0 && x2.norm() == 0.0 {
            return;
        }
        // rotation mapping (x1, x2) onto the first axis
        let g = Rotation::zeroing(x1, x2);
        g.apply_rows(&mut self.t, k, k + 1, k..n);
        g.apply_cols(&mut self.t, k, k + 1, 0..k + 2);
        g.apply_cols(&mut self.q, k, k + 1, 0..n);
        self.t[(k + 1, k)] = Complex64::zero();
        self.t[(k, k)] = c;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Reorders so that every selected eigenvalue ends up in the trailing block,
    /// keeping the relative order within each group.
    pub fn move_to_tail(&mut self, selected: &[bool]) {
        let mut sel = selected.to_vec();
        let n = sel.len();
        if n < 2 {
            return;
        }
        loop {
            let mut swapped = false;
            for k in 0..n - 1 {
                if sel[k] && !sel[k + 1] {
                    self.swap_adjacent(k);
                    sel.swap(k, k + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;

    fn residual(a: &ComplexMatrix, s: &ComplexSchur) -> f64 {
        let rebuilt = &s.q * &s.t * s.q.adjoint();
        frob(&(rebuilt - a)) / (1.0 + frob(a))
    }

    fn unitarity(s: &ComplexSchur) -> f64 {
        frob(&(s.q.adjoint() * &s.q - identity(s.q.nrows())))
    }

    #[test]
    fn decomposes_real_matrix_with_complex_spectrum() {
        // rotation block has eigenvalues ±i
        let a = from_real(3, 3, &[0.0, -1.0, 2.0, 1.0, 0.0, 3.0, 0.0, 0.0, 4.0]);
        let s = ComplexSchur::new(&a);
        assert!(residual(&a, &s) < 1e-13);
        assert!(unitarity(&s) < 1e-13);
        let mut ev = s.eigenvalues();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_similarity_converges() {
        // S J S^{-1} with J a 3x3 Jordan block at zero, plus an invertible part
        let s = from_real(4, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let j = from_real(4, 4, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let a = &s * j * s.clone().try_inverse().unwrap();
        let sch = ComplexSchur::new(&a);
        assert!(residual(&a, &sch) < 1e-13);
        assert!(unitarity(&sch) < 1e-13);
    }

    #[test]
    fn reorder_moves_selected_to_tail() {
        let a = from_real(4, 4, &[1.0, 2.0, 3.0, 4.0, 0.0, 5.0, 6.0, 7.0, 0.0, 0.0, 0.0, 8.0, 0.0, 0.0, 0.0, 9.0]);
        let mut s = ComplexSchur::new(&a);
        let sel: Vec<bool> = s.eigenvalues().iter().map(|z| z.norm() < 1.5).collect();
        s.move_to_tail(&sel);
        assert!(residual(&a, &s) < 1e-13);
        assert!(unitarity(&s) < 1e-13);
        let ev = s.eigenvalues();
        assert!(ev[3].norm() < 1.5 && ev[2].norm() < 1.5);
        assert!(ev[0].norm() > 1.5 && ev[1].norm() > 1.5);
    }
}
