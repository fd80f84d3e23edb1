use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// `½ Σ |λ_i(a - b)|`, clamped to `[0, 1]`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    let mut diff = a - b;
    linalg::symmetrize(&mut diff);
    let sum: f64 = linalg::hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Largest trace distance over all pairs.
pub fn max_pairwise_distance(states: &[CMatrix]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            worst = worst.max(trace_distance(a, b)?);
        }
    }
    Ok(worst)
}
