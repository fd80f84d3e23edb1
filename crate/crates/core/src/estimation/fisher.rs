use serde::Serialize;

use crate::error::Result;
use crate::hilbert::check_density;
use crate::linalg::{self, CMatrix};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_CUTOFF: f64 = 1e-12;
/// Validity tolerance for the states handed to [`qfi`].
const STATE_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherReport {
    pub parameter: String,
    pub at: f64,
    pub qfi: f64,
    pub step: f64,
    pub cutoff: f64,
}

/// Quantum Fisher information of `state_of` with respect to `Δ` at `at`,
/// using a central difference of width `step` and [`DEFAULT_CUTOFF`].
pub fn qfi<F>(state_of: F, at: f64, step: f64) -> Result<FisherReport>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    qfi_with("delta", state_of, at, step, DEFAULT_CUTOFF)
}

pub fn qfi_with<F>(parameter: &str, state_of: F, at: f64, step: f64, cutoff: f64) -> Result<FisherReport>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(crate::Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(crate::Error::InvalidArgument(format!("cutoff must be >= 0, got {cutoff}")));
    }
    let rho = state_of(at)?;
    let plus = state_of(at + step)?;
    let minus = state_of(at - step)?;
    for m in [&rho, &plus, &minus] {
        check_density(m, STATE_CHECK_TOL, STATE_CHECK_TOL)?;
    }
    if plus.shape() != rho.shape() || minus.shape() != rho.shape() {
        return Err(crate::Error::DimensionMismatch {
            expected: rho.nrows(),
            actual: plus.nrows(),
        });
    }
    let drho = (plus - minus) / num_complex::Complex64::new(2.0 * step, 0.0);
    Ok(FisherReport {
        parameter: parameter.to_string(),
        at,
        qfi: spectral_qfi(&rho, &drho, cutoff),
        step,
        cutoff,
    })
}

/// `2 Σ_{λ_i + λ_j > cutoff} |⟨i|∂ρ|j⟩|² / (λ_i + λ_j)`.
pub fn spectral_qfi(rho: &CMatrix, drho: &CMatrix, cutoff: f64) -> f64 {
    let (values, vectors) = linalg::hermitian_eigh(rho);
    let d = vectors.adjoint() * drho * &vectors;
    let n = values.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = values[i] + values[j];
            if s > cutoff {
                total += d[(i, j)].norm_sqr() / s;
            }
        }
    }
    2.0 * total
}
