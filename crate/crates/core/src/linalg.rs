//! Dense complex matrix helpers shared by the state, channel and estimation
//! layers. Everything here works on `nalgebra::DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used when accepting user-supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// `exp(-i x)`
#[inline]
pub fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -x)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |m - m^†|`
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `m` by `(m + m^†)/2` in place.
pub fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry of `|u^† u - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let id = CMatrix::identity(u.nrows(), u.ncols());
    max_abs_diff(&prod, &id)
}

pub fn ensure_unitary(u: &CMatrix) -> Result<()> {
    let deviation = unitarity_defect(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
/// The input is symmetrized first so round-off asymmetry cannot leak in.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let mut h = m.clone();
    symmetrize(&mut h);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigh(m).0
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Von Neumann entropy in bits. Eigenvalues below `1e-15` contribute nothing.
pub fn von_neumann_entropy_bits(rho: &CMatrix) -> f64 {
    hermitian_eigenvalues(rho)
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.log2())
        .sum()
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn pure_state(amplitudes: &[Complex64]) -> CMatrix {
    outer(&CVector::from_column_slice(amplitudes))
}

pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let a = CMatrix::identity(2, 2);
        let b = CMatrix::identity(3, 3);
        assert_eq!(kron(&a, &b), CMatrix::identity(6, 6));
    }

    #[test]
    fn eigh_sorts_ascending() {
        let (vals, vecs) = hermitian_eigh(&pauli_x());
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let recon = &vecs
            * CMatrix::from_diagonal(&CVector::from_iterator(
                2,
                vals.iter().map(|&v| Complex64::new(v, 0.0)),
            ))
            * vecs.adjoint();
        assert!(max_abs_diff(&recon, &pauli_x()) < 1e-14);
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit_is_one_bit() {
        let rho = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!((von_neumann_entropy_bits(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn paulis_are_unitary() {
        for p in [pauli_x(), pauli_y(), pauli_z(), hadamard()] {
            assert!(ensure_unitary(&p).is_ok());
        }
        let bad = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(ensure_unitary(&bad), Err(Error::NotUnitary { .. })));
    }
}
