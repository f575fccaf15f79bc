/// Numerical thresholds shared by every operation.
///
/// All thresholds are relative; see the individual fields for the scale each
/// one is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular values below `max(m, n) * rank * sigma_max` count as zero.
    pub rank: f64,
    /// `|std| <= appreciable * scale` classifies a dual number as infinitesimal.
    pub appreciable: f64,
    /// `||A^pi M A^pi||_F <= exists * (1 + ||M||_F)` accepts membership in DC_z.
    pub exists: f64,
    /// Hypothesis residual threshold, relative to `1 + operand norms`.
    pub hypothesis: f64,
    /// Require hypothesis residuals to be exactly zero.
    pub strict: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-12,
            appreciable: 1e-12,
            exists: 1e-9,
            hypothesis: 1e-9,
            strict: false,
        }
    }
}

impl Tolerances {
    pub fn with_rank(mut self, rank: f64) -> Self {
        self.rank = rank;
        self
    }

    /// Sets both the existence and the hypothesis residual thresholds.
    pub fn with_residual(mut self, residual: f64) -> Self {
        self.exists = residual;
        self.hypothesis = residual;
        self
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}
