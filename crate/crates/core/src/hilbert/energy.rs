use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE};

/// One energy sector: angular frequency `omega` (rad/time, ħ = 1) and the
/// number of degenerate basis states carrying it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub omega: f64,
    #[serde(default = "one")]
    pub degeneracy: usize,
}

fn one() -> usize {
    1
}

/// Free-Hamiltonian eigenstructure of a subsystem.
///
/// Basis states are ordered by sector (ascending `omega`) and, within a
/// sector, by degeneracy label, so every sector projector is a contiguous
/// diagonal block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<EnergyLevel>", into = "Vec<EnergyLevel>")]
pub struct EnergySpec {
    levels: Vec<EnergyLevel>,
    // basis index -> sector index
    sector_of: Vec<usize>,
}

impl EnergySpec {
    pub fn new(levels: Vec<EnergyLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidEnergySpec("no energy levels".into()));
        }
        for (k, level) in levels.iter().enumerate() {
            if !level.omega.is_finite() {
                return Err(Error::InvalidEnergySpec(format!(
                    "level {k} has non-finite frequency"
                )));
            }
            if level.degeneracy == 0 {
                return Err(Error::InvalidEnergySpec(format!(
                    "level {k} has zero degeneracy"
                )));
            }
        }
        if let Some(w) = levels.windows(2).find(|w| w[1].omega <= w[0].omega) {
            return Err(Error::InvalidEnergySpec(format!(
                "frequencies must be strictly increasing ({} then {})",
                w[0].omega, w[1].omega
            )));
        }
        let sector_of = levels
            .iter()
            .enumerate()
            .flat_map(|(e, l)| std::iter::repeat_n(e, l.degeneracy))
            .collect();
        Ok(Self { levels, sector_of })
    }

    /// Build from `(omega, degeneracy)` pairs.
    pub fn from_pairs(pairs: &[(f64, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(omega, degeneracy)| EnergyLevel { omega, degeneracy })
                .collect(),
        )
    }

    /// Nondegenerate qubit with levels `0` and `omega`.
    pub fn qubit(omega: f64) -> Result<Self> {
        Self::from_pairs(&[(0.0, 1), (omega, 1)])
    }

    /// `n` equally spaced nondegenerate levels `0, omega, 2 omega, ...`.
    pub fn ladder(n: usize, omega: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| EnergyLevel {
                    omega: k as f64 * omega,
                    degeneracy: 1,
                })
                .collect(),
        )
    }

    /// A single sector of dimension `dim` at zero frequency.
    pub fn degenerate(dim: usize) -> Result<Self> {
        Self::from_pairs(&[(0.0, dim)])
    }

    /// The one-dimensional trivial system.
    pub fn trivial() -> Self {
        Self::from_pairs(&[(0.0, 1)]).expect("trivial spectrum is valid")
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.sector_of.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.levels.len()
    }

    /// Sector index of basis state `k`.
    pub fn sector_of(&self, k: usize) -> usize {
        self.sector_of[k]
    }

    pub fn sectors(&self) -> &[usize] {
        &self.sector_of
    }

    pub fn sector_omegas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.omega).collect()
    }

    /// Frequency of each basis state.
    pub fn basis_omegas(&self) -> Vec<f64> {
        self.sector_of
            .iter()
            .map(|&e| self.levels[e].omega)
            .collect()
    }

    /// `P_e = Σ_d |e,d⟩⟨e,d|`
    pub fn projector(&self, sector: usize) -> CMatrix {
        let n = self.dim();
        let mut p = CMatrix::zeros(n, n);
        for (k, &e) in self.sector_of.iter().enumerate() {
            if e == sector {
                p[(k, k)] = ONE;
            }
        }
        p
    }
}

impl TryFrom<Vec<EnergyLevel>> for EnergySpec {
    type Error = Error;

    fn try_from(levels: Vec<EnergyLevel>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<EnergySpec> for Vec<EnergyLevel> {
    fn from(spec: EnergySpec) -> Self {
        spec.levels
    }
}
