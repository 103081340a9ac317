//! Stability of a MAR model: the spectral radius of `sum_k pi_k A_k ⊗ A_k`
//! where `A_k` is the companion matrix of component `k` padded to order `p`.
//!
//! A MAR model may be stable even when some components are non-stationary
//! autoregressions, so the test is always applied to the whole model.

use crate::error::Result;
use crate::linalg::{spectral_radius, Matrix};
use crate::model::MarSpec;

/// `p x p` companion matrix of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix(pub Matrix);

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityReport {
    pub spectral_radius: f64,
    /// `spectral_radius < 1`, strictly.
    pub stable: bool,
    /// Dimension `p^2` of the stability matrix.
    pub matrix_dim: usize,
}

/// Companion matrix of component `k`: first row `phi_k1..phi_kp` (zero-padded), ones on the subdiagonal.
pub fn companion(spec: &MarSpec, k: usize) -> CompanionMatrix {
    let p = spec.max_order();
    let mut m = Matrix::zeros(p);
    for (j, &phi) in spec.ar(k).iter().enumerate() {
        m.set(0, j, phi);
    }
    for i in 1..p {
        m.set(i, i - 1, 1.0);
    }
    CompanionMatrix(m)
}

/// `sum_k pi_k A_k ⊗ A_k`.
pub fn stability_matrix(spec: &MarSpec) -> Matrix {
    let p = spec.max_order();
    let mut out = Matrix::zeros(p * p);
    for k in 0..spec.g() {
        let a = companion(spec, k).0;
        out.add_scaled(spec.weights()[k], &a.kronecker(&a));
    }
    out
}

pub fn is_stable(spec: &MarSpec) -> Result<StabilityReport> {
    let a = stability_matrix(spec);
    let radius = if a.dim() == 1 { a.get(0, 0).abs() } else { spectral_radius(&a)? };
    Ok(StabilityReport { spectral_radius: radius, stable: radius < 1.0, matrix_dim: a.dim() })
}
