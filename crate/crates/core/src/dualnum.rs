//! Dual complex scalars `a + ε a0` with `ε² = 0`.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A dual complex number. The nilpotency of `ε` lives entirely in the
/// multiplication law.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualScalar {
    pub std: Complex64,
    pub inf: Complex64,
}

impl DualScalar {
    pub const ZERO: Self = Self {
        std: Complex64::new(0.0, 0.0),
        inf: Complex64::new(0.0, 0.0),
    };
    pub const ONE: Self = Self {
        std: Complex64::new(1.0, 0.0),
        inf: Complex64::new(0.0, 0.0),
    };
    pub const EPS: Self = Self {
        std: Complex64::new(0.0, 0.0),
        inf: Complex64::new(1.0, 0.0),
    };

    /// Checked constructor; rejects NaN and infinities.
    pub fn new(std: Complex64, inf: Complex64) -> Result<Self> {
        if std.is_finite() && inf.is_finite() {
            Ok(Self { std, inf })
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Real-valued shorthand, `std + ε inf`.
    pub fn real(std: f64, inf: f64) -> Self {
        Self {
            std: Complex64::new(std, 0.0),
            inf: Complex64::new(inf, 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.std.is_zero() && self.inf.is_zero()
    }

    /// `|std| > tol * scale`.
    pub fn is_appreciable(&self, tol: f64, scale: f64) -> bool {
        self.std.norm() > tol * scale
    }

    /// Inverse with the default tolerance and unit scale.
    pub fn inverse(self) -> Result<Self> {
        self.inverse_scaled(Tolerances::default().appreciable, 1.0)
    }

    /// `x⁻¹ = a⁻¹ − ε a⁻¹ a0 a⁻¹`, defined only for appreciable `x`.
    pub fn inverse_scaled(self, tol: f64, scale: f64) -> Result<Self> {
        if !self.is_appreciable(tol, scale) {
            return Err(Error::NotAppreciable(self.std.norm()));
        }
        let a_inv = self.std.inv();
        Ok(Self {
            std: a_inv,
            inf: -a_inv * self.inf * a_inv,
        })
    }

    /// Scalar dual Drazin inverse: the inverse when appreciable, zero for
    /// the zero element, and an error for a nonzero pure infinitesimal
    /// (where the projector condition reduces to `a0 = 0`).
    pub fn dual_drazin(self, tol: &Tolerances) -> Result<Self> {
        if self.is_appreciable(tol.appreciable, 1.0) {
            return self.inverse_scaled(tol.appreciable, 1.0);
        }
        if self.inf.norm() <= tol.appreciable {
            Ok(Self::ZERO)
        } else {
            Err(Error::NotDualDrazinInvertible {
                residual: self.inf.norm(),
            })
        }
    }

    pub fn scale(self, s: Complex64) -> Self {
        Self {
            std: self.std * s,
            inf: self.inf * s,
        }
    }
}

impl From<Complex64> for DualScalar {
    fn from(std: Complex64) -> Self {
        Self {
            std,
            inf: Complex64::zero(),
        }
    }
}

impl Add for DualScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            std: self.std + rhs.std,
            inf: self.inf + rhs.inf,
        }
    }
}

impl Sub for DualScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            std: self.std - rhs.std,
            inf: self.inf - rhs.inf,
        }
    }
}

impl Neg for DualScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            std: -self.std,
            inf: -self.inf,
        }
    }
}

impl Mul for DualScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            std: self.std * rhs.std,
            inf: self.std * rhs.inf + self.inf * rhs.std,
        }
    }
}

impl fmt::Display for DualScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ε({})", self.std, self.inf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multiplication_drops_eps_squared() {
        let x = DualScalar::real(1.0, 2.0);
        let y = DualScalar::real(3.0, 4.0);
        assert_eq!(x * y, DualScalar::real(3.0, 10.0));
        assert_eq!(DualScalar::EPS * DualScalar::EPS, DualScalar::ZERO);
        let z = DualScalar::new(c(1.5, -2.0), c(0.25, 3.0)).unwrap();
        assert_eq!(z * DualScalar::ONE, z);
    }

    #[test]
    fn inverse_closed_form() {
        assert_eq!(
            DualScalar::real(2.0, 1.0).inverse().unwrap(),
            DualScalar::real(0.5, -0.25)
        );
        assert_eq!(DualScalar::ONE.inverse().unwrap(), DualScalar::ONE);
        assert!(matches!(
            DualScalar::EPS.inverse(),
            Err(Error::NotAppreciable(_))
        ));
    }

    #[test]
    fn scalar_drazin_cases() {
        let tol = Tolerances::default();
        assert_eq!(DualScalar::ZERO.dual_drazin(&tol).unwrap(), DualScalar::ZERO);
        assert_eq!(
            DualScalar::real(2.0, 1.0).dual_drazin(&tol).unwrap(),
            DualScalar::real(0.5, -0.25)
        );
        assert!(matches!(
            DualScalar::EPS.dual_drazin(&tol),
            Err(Error::NotDualDrazinInvertible { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            DualScalar::new(c(f64::NAN, 0.0), c(0.0, 0.0)),
            Err(Error::NonFinite)
        );
        assert!(DualScalar::new(c(0.0, 0.0), c(f64::INFINITY, 0.0)).is_err());
    }

    fn small() -> impl Strategy<Value = DualScalar> {
        (-8i32..=8, -8i32..=8, -8i32..=8, -8i32..=8).prop_map(|(a, b, c0, d)| DualScalar {
            std: c(a as f64, b as f64),
            inf: c(c0 as f64, d as f64),
        })
    }

    proptest! {
        #[test]
        fn mul_is_commutative_and_associative(x in small(), y in small(), z in small()) {
            prop_assert_eq!(x * y, y * x);
            // small integers keep every product exact
            prop_assert_eq!((x * y) * z, x * (y * z));
        }

        #[test]
        fn inverse_is_two_sided(x in small()) {
            prop_assume!(x.std.norm() > 0.0);
            let p = x * x.inverse().unwrap();
            prop_assert!((p.std - 1.0).norm() < 1e-14);
            prop_assert!(p.inf.norm() < 1e-13 * (1.0 + x.inf.norm()));
            prop_assert_eq!(x.dual_drazin(&Tolerances::default()).unwrap(), x.inverse().unwrap());
        }
    }
}
