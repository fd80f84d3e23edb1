use num_complex::Complex64;

use super::energy::EnergySpec;
use super::ledger::{Owner, OwnershipLedger, SubsystemId};
use crate::error::{Error, Result};
use crate::linalg::{self, phase, CMatrix, ONE, ZERO};

/// Hermiticity and trace tolerance for a valid state.
pub const STATE_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue of a valid state.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance applied to user-supplied states before they are normalized.
pub const INPUT_TOL: f64 = 1e-10;

/// Density matrix over an ordered list of finite-dimensional subsystems,
/// together with the record of who holds each subsystem.
///
/// Basis ordering is row-major over the subsystem list: the first subsystem
/// is the most significant digit, matching the Kronecker product `a ⊗ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    subsystems: Vec<(SubsystemId, EnergySpec)>,
    rho: CMatrix,
    ledger: OwnershipLedger,
}

/// Index bookkeeping for a bipartition `targets | rest` of the full space.
struct Split {
    target_idx: Vec<usize>,
    rest_idx: Vec<usize>,
    target_dim: usize,
    rest_dim: usize,
}

impl CompositeState {
    /// The state with no subsystems (a 1×1 identity).
    pub fn empty() -> Self {
        Self {
            subsystems: Vec::new(),
            rho: CMatrix::identity(1, 1),
            ledger: OwnershipLedger::new(),
        }
    }

    /// Single-subsystem state from a density matrix. The matrix is checked
    /// (Hermitian, unit trace, PSD within input tolerance) and re-normalized.
    pub fn from_density(
        id: impl Into<SubsystemId>,
        energy: EnergySpec,
        owner: Owner,
        rho: CMatrix,
    ) -> Result<Self> {
        let id = id.into();
        if rho.shape() != (energy.dim(), energy.dim()) {
            return Err(Error::DimensionMismatch {
                expected: energy.dim(),
                actual: rho.nrows(),
            });
        }
        let rho = sanitize_density(rho)?;
        let mut ledger = OwnershipLedger::new();
        ledger.assign(id.clone(), owner)?;
        Ok(Self {
            subsystems: vec![(id, energy)],
            rho,
            ledger,
        })
    }

    /// Single-subsystem pure state `|ψ⟩⟨ψ|`.
    pub fn from_amplitudes(
        id: impl Into<SubsystemId>,
        energy: EnergySpec,
        owner: Owner,
        amplitudes: &[Complex64],
    ) -> Result<Self> {
        let rho = pure_density(amplitudes, energy.dim())?;
        Self::from_density(id, energy, owner, rho)
    }

    /// Energy eigenstate `|k⟩`.
    pub fn basis(
        id: impl Into<SubsystemId>,
        energy: EnergySpec,
        owner: Owner,
        k: usize,
    ) -> Result<Self> {
        let dim = energy.dim();
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self::from_amplitudes(id, energy, owner, &amps)
    }

    pub fn subsystems(&self) -> &[(SubsystemId, EnergySpec)] {
        &self.subsystems
    }

    pub fn ids(&self) -> impl Iterator<Item = &SubsystemId> {
        self.subsystems.iter().map(|(id, _)| id)
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn ledger(&self) -> &OwnershipLedger {
        &self.ledger
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn contains(&self, id: &SubsystemId) -> bool {
        self.subsystems.iter().any(|(s, _)| s == id)
    }

    pub fn position(&self, id: &SubsystemId) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(s, _)| s == id)
            .ok_or_else(|| Error::UnknownSubsystem(id.clone()))
    }

    pub fn energy(&self, id: &SubsystemId) -> Result<&EnergySpec> {
        Ok(&self.subsystems[self.position(id)?].1)
    }

    pub fn owner(&self, id: &SubsystemId) -> Result<Owner> {
        self.ledger.owner(id)
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.rho)
    }

    /// `a ⊗ b`: subsystem lists concatenated, ledgers merged.
    pub fn tensor(&self, other: &CompositeState) -> Result<CompositeState> {
        if let Some(dup) = other.ids().find(|id| self.contains(id)) {
            return Err(Error::DuplicateSubsystem(dup.clone()));
        }
        let mut ledger = self.ledger.clone();
        ledger.merge(&other.ledger)?;
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Ok(CompositeState {
            subsystems,
            rho: linalg::kron(&self.rho, &other.rho),
            ledger,
        })
    }

    /// Reduced state over `keep`, with the kept subsystems in their original
    /// relative order.
    pub fn partial_trace(&self, keep: &[SubsystemId]) -> Result<CompositeState> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "partial trace needs at least one subsystem to keep".into(),
            ));
        }
        let mut positions = self.positions(keep)?;
        positions.sort_unstable();
        let kept_ids: Vec<SubsystemId> =
            positions.iter().map(|&p| self.subsystems[p].0.clone()).collect();
        Ok(CompositeState {
            subsystems: positions
                .iter()
                .map(|&p| self.subsystems[p].clone())
                .collect(),
            rho: self.reduced_at(&positions),
            ledger: self.ledger.restrict(&kept_ids),
        })
    }

    /// Reduced density matrix over `keep` (in original relative order). An
    /// empty `keep` yields the 1×1 matrix `[Tr ρ]`.
    pub fn reduced_matrix(&self, keep: &[SubsystemId]) -> Result<CMatrix> {
        let mut positions = self.positions(keep)?;
        positions.sort_unstable();
        Ok(self.reduced_at(&positions))
    }

    /// `ρ → U ρ U†` with `u` acting on `targets` (in the given order).
    /// All targets must currently be held by the same party, Alice or Bob.
    pub fn embed_unitary(&self, targets: &[SubsystemId], u: &CMatrix) -> Result<CompositeState> {
        let positions = self.positions(targets)?;
        self.require_single_party(targets)?;
        let dim: usize = positions.iter().map(|&p| self.subsystems[p].1.dim()).product();
        if u.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: u.nrows(),
            });
        }
        linalg::ensure_unitary(u)?;
        let mut out = self.clone();
        out.conjugate_at(&positions, u);
        Ok(out)
    }

    /// Free evolution `exp(-i Σ_e P_e ω_e dt)` on each target. Targets must
    /// share one owner.
    pub fn free_evolve(&self, targets: &[SubsystemId], dt: f64) -> Result<CompositeState> {
        let positions = self.positions(targets)?;
        let owner = self.owner(&targets[0])?;
        for id in targets {
            let o = self.owner(id)?;
            if o != owner {
                return Err(Error::MixedOwnership(format!(
                    "`{}` is held by {owner}, `{id}` by {o}",
                    targets[0]
                )));
            }
        }
        let mut out = self.clone();
        out.free_evolve_positions(&positions, dt);
        Ok(out)
    }

    /// Free evolution of every subsystem by `dt`.
    pub fn free_evolve_all(&mut self, dt: f64) {
        if dt == 0.0 || self.subsystems.is_empty() {
            return;
        }
        let positions: Vec<usize> = (0..self.subsystems.len()).collect();
        self.free_evolve_positions(&positions, dt);
    }

    /// Hand `id` to `new_owner` at absolute time `at`; the density matrix is
    /// untouched.
    pub fn transfer(&self, id: &SubsystemId, new_owner: Owner, at: f64) -> Result<CompositeState> {
        let mut out = self.clone();
        out.transfer_in_place(id, new_owner, at)?;
        Ok(out)
    }

    pub(crate) fn transfer_in_place(&mut self, id: &SubsystemId, new_owner: Owner, at: f64) -> Result<()> {
        self.position(id)?;
        self.ledger.transfer(id, new_owner, at)
    }

    /// Checks the state invariants: Hermitian and unit trace within
    /// [`STATE_TOL`], PSD within [`PSD_TOL`].
    pub fn check_invariants(&self) -> Result<()> {
        check_density(&self.rho, STATE_TOL, PSD_TOL)
    }

    pub(crate) fn positions(&self, ids: &[SubsystemId]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let p = self.position(id)?;
            if out.contains(&p) {
                return Err(Error::DuplicateSubsystem(id.clone()));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub(crate) fn require_owner(&self, targets: &[SubsystemId], expected: Owner) -> Result<()> {
        for id in targets {
            let owner = self.owner(id)?;
            if owner != expected {
                return Err(Error::WrongOwner {
                    id: id.clone(),
                    owner,
                    expected,
                });
            }
        }
        Ok(())
    }

    fn require_single_party(&self, targets: &[SubsystemId]) -> Result<()> {
        let Some(first) = targets.first() else {
            return Err(Error::InvalidArgument("no target subsystems".into()));
        };
        let owner = self.owner(first)?;
        if owner == Owner::Channel {
            return Err(Error::MixedOwnership(format!(
                "`{first}` is in transit and cannot be acted on"
            )));
        }
        self.require_owner(targets, owner)
            .map_err(|e| Error::MixedOwnership(e.to_string()))
    }

    fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|(_, e)| e.dim()).collect()
    }

    fn split(&self, targets: &[usize]) -> Split {
        let dims = self.dims();
        let n = self.dim();
        let target_dim: usize = targets.iter().map(|&p| dims[p]).product();
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !targets.contains(p)).collect();
        let rest_dim: usize = rest.iter().map(|&p| dims[p]).product();
        let mut target_idx = vec![0; n];
        let mut rest_idx = vec![0; n];
        let mut digits = vec![0usize; dims.len()];
        for i in 0..n {
            let mut rem = i;
            for k in (0..dims.len()).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            target_idx[i] = targets.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            rest_idx[i] = rest.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
        }
        Split {
            target_idx,
            rest_idx,
            target_dim,
            rest_dim,
        }
    }

    fn reduced_at(&self, keep_positions: &[usize]) -> CMatrix {
        let split = self.split(keep_positions);
        let mut by_rest: Vec<Vec<usize>> = vec![Vec::new(); split.rest_dim];
        for i in 0..self.dim() {
            by_rest[split.rest_idx[i]].push(i);
        }
        let mut out = CMatrix::zeros(split.target_dim, split.target_dim);
        for group in &by_rest {
            for &i in group {
                for &j in group {
                    out[(split.target_idx[i], split.target_idx[j])] += self.rho[(i, j)];
                }
            }
        }
        out
    }

    /// Lift `op` (acting on `positions` in the given order) to the full space.
    pub(crate) fn lift(&self, positions: &[usize], op: &CMatrix) -> CMatrix {
        let split = self.split(positions);
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, k| {
            if split.rest_idx[i] == split.rest_idx[k] {
                op[(split.target_idx[i], split.target_idx[k])]
            } else {
                ZERO
            }
        })
    }

    /// `ρ → O ρ O†` with no unitarity or ownership checks; trace is not
    /// renormalized.
    pub(crate) fn conjugate_at(&mut self, positions: &[usize], op: &CMatrix) {
        let full = self.lift(positions, op);
        self.rho = &full * &self.rho * full.adjoint();
        linalg::symmetrize(&mut self.rho);
    }

    /// `ρ → O ρ O†` for an operator already lifted to the full space.
    pub(crate) fn conjugate_full(&mut self, full: &CMatrix) {
        self.rho = full * &self.rho * full.adjoint();
        linalg::symmetrize(&mut self.rho);
    }

    /// `Tr(O ρ)` for an operator already lifted to the full space.
    pub(crate) fn expectation_full(&self, full: &CMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (full[(i, j)] * self.rho[(j, i)]).re;
            }
        }
        acc
    }

    /// Total frequency of every basis index.
    pub(crate) fn basis_energies(&self) -> Vec<f64> {
        let positions: Vec<usize> = (0..self.subsystems.len()).collect();
        self.total_energies(&positions)
    }

    /// Free evolution of every subsystem by `dt`, given [`Self::basis_energies`].
    pub(crate) fn free_evolve_with(&mut self, energies: &[f64], dt: f64) {
        if dt == 0.0 {
            return;
        }
        let n = self.dim();
        let phases: Vec<Complex64> = energies.iter().map(|&e| phase(e * dt)).collect();
        for j in 0..n {
            let pj = phases[j].conj();
            for i in 0..n {
                self.rho[(i, j)] *= phases[i] * pj;
            }
        }
        linalg::symmetrize(&mut self.rho);
    }

    /// Multiply `ρ_ij` by `factor(i, j)`.
    pub(crate) fn scale_entries(&mut self, factor: impl Fn(usize, usize) -> Complex64) {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                self.rho[(i, j)] *= factor(i, j);
            }
        }
        linalg::symmetrize(&mut self.rho);
    }

    /// Per-basis-index sector of subsystem `position`.
    pub(crate) fn sector_index_map(&self, position: usize) -> Vec<usize> {
        let split = self.split(&[position]);
        let energy = &self.subsystems[position].1;
        split
            .target_idx
            .iter()
            .map(|&k| energy.sector_of(k))
            .collect()
    }

    fn free_evolve_positions(&mut self, positions: &[usize], dt: f64) {
        if dt == 0.0 || positions.is_empty() {
            return;
        }
        let energies = self.total_energies(positions);
        self.scale_entries(|i, j| phase((energies[i] - energies[j]) * dt));
    }

    /// Sum of the frequencies of the given subsystems for every basis index.
    fn total_energies(&self, positions: &[usize]) -> Vec<f64> {
        let dims = self.dims();
        let omegas: Vec<Vec<f64>> = self.subsystems.iter().map(|(_, e)| e.basis_omegas()).collect();
        (0..self.dim())
            .map(|i| {
                let mut rem = i;
                let mut total = 0.0;
                for k in (0..dims.len()).rev() {
                    let digit = rem % dims[k];
                    rem /= dims[k];
                    if positions.contains(&k) {
                        total += omegas[k][digit];
                    }
                }
                total
            })
            .collect()
    }

    /// Replace the targets by `sigma`: `ρ → Tr_targets(ρ) ⊗ σ`, keeping the
    /// subsystem order. `sigma` is indexed over `positions` in the given order.
    pub(crate) fn replace_at(&mut self, positions: &[usize], sigma: &CMatrix) {
        let rest: Vec<usize> = (0..self.subsystems.len())
            .filter(|p| !positions.contains(p))
            .collect();
        let reduced_rest = self.reduced_at(&rest);
        let split = self.split(positions);
        let n = self.dim();
        self.rho = CMatrix::from_fn(n, n, |i, j| {
            reduced_rest[(split.rest_idx[i], split.rest_idx[j])]
                * sigma[(split.target_idx[i], split.target_idx[j])]
        });
        linalg::symmetrize(&mut self.rho);
    }

    #[cfg(test)]
    pub(crate) fn rho_mut(&mut self) -> &mut CMatrix {
        &mut self.rho
    }

    pub(crate) fn normalize(&mut self) {
        let tr = self.trace().re;
        if tr > 0.0 {
            self.rho /= Complex64::new(tr, 0.0);
        }
    }
}

pub(crate) fn pure_density(amplitudes: &[Complex64], dim: usize) -> Result<CMatrix> {
    if amplitudes.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: amplitudes.len(),
        });
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidState(format!(
            "amplitudes have squared norm {norm}, expected 1"
        )));
    }
    Ok(linalg::pure_state(amplitudes))
}

/// Validate a user-supplied density matrix and return it symmetrized with
/// unit trace.
pub(crate) fn sanitize_density(mut rho: CMatrix) -> Result<CMatrix> {
    check_density(&rho, INPUT_TOL, INPUT_TOL)?;
    linalg::symmetrize(&mut rho);
    let tr = linalg::trace(&rho).re;
    rho /= Complex64::new(tr, 0.0);
    Ok(rho)
}

pub fn check_density(rho: &CMatrix, tol: f64, psd_tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidState("matrix is not square".into()));
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let herm = linalg::hermiticity_defect(rho);
    if herm > tol {
        return Err(Error::InvalidState(format!(
            "not Hermitian (defect {herm:.3e})"
        )));
    }
    let tr = linalg::trace(rho);
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let min = linalg::min_eigenvalue(rho);
    if min < -psd_tol {
        return Err(Error::InvalidState(format!(
            "not positive semidefinite (min eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}
