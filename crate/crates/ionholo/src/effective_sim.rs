//! Evolve a compiled schedule under its piecewise-constant effective
//! Hamiltonian (phonons eliminated), and verify the holonomy conditions:
//! the computational subspace returns to itself after the full schedule
//! (cyclicity) and accumulates no dynamical phase along the way (parallel
//! transport).
//!
//! Every interval Hamiltonian acts on one adjacent ion pair, so propagation
//! works with 9x9 pair blocks: exponentiate the pair Hamiltonian and apply
//! it to tracked columns or embed it in the chain space. That keeps the
//! expensive eigendecompositions at fixed size 9 regardless of chain length.

use crate::gate_targets::{bright_dark, controlled_sigma, qubit_index_to_chain, GateSpec};
use crate::pulse_compiler::{Interval, PulseSchedule};
use crate::quantum_core::{
    eigh, embed, expm, spectral_norm, HilbertLayout, Operator, C64, LEVELS_PER_ION, ONE_C, ZERO_C,
};
use crate::{Error, Result};

/// Isometry onto a set of chain basis states, stored as the list of chain
/// indices (column k of the isometry is the basis vector at `columns[k]`).
#[derive(Debug, Clone)]
pub struct SubspaceProjector {
    pub num_ions: usize,
    pub columns: Vec<usize>,
}

impl SubspaceProjector {
    /// The computational subspace: all 2^N bit strings of the N-ion chain,
    /// ordered by their qubit-space index.
    pub fn computational(num_ions: usize) -> Self {
        let qdim = 1usize << num_ions;
        let columns = (0..qdim).map(|b| qubit_index_to_chain(b, num_ions)).collect();
        SubspaceProjector { num_ions, columns }
    }

    pub fn chain_dim(&self) -> usize {
        LEVELS_PER_ION.pow(self.num_ions as u32)
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// Dense isometry matrix, chain_dim x rank.
    pub fn isometry(&self) -> Operator {
        let mut p = Operator::zeros(self.chain_dim(), self.rank());
        for (k, &c) in self.columns.iter().enumerate() {
            p[(c, k)] = ONE_C;
        }
        p
    }

    /// Restrict tracked columns to the subspace: entry (r, c) is the
    /// amplitude of basis state `columns[r]` in column c.
    pub fn restrict(&self, phi: &Operator) -> Operator {
        let mut out = Operator::zeros(self.rank(), phi.ncols());
        for (r, &row) in self.columns.iter().enumerate() {
            for c in 0..phi.ncols() {
                out[(r, c)] = phi[(row, c)];
            }
        }
        out
    }

    /// Spectral norm of the part of `phi` outside the subspace, i.e.
    /// ‖(I − PP†)·phi‖₂.
    pub fn leakage(&self, phi: &Operator) -> f64 {
        let mut rest = phi.clone();
        for &row in &self.columns {
            for c in 0..rest.ncols() {
                rest[(row, c)] = ZERO_C;
            }
        }
        spectral_norm(&rest)
    }
}

/// The 9x9 Hermitian pair Hamiltonian of one interval: the sum of its
/// couplings times their pair operators, plus Hermitian conjugates.
pub fn pair_hamiltonian(interval: &Interval) -> Operator {
    let mut h = Operator::zeros(9, 9);
    for c in &interval.couplings {
        let op = c.kind.pair_operator();
        h += &op * c.amplitude;
        h += op.adjoint() * c.amplitude.conj();
    }
    h
}

/// The interval's effective Hamiltonian on the full N-ion chain (no phonon
/// factor): the pair Hamiltonian embedded with identity elsewhere.
pub fn effective_hamiltonian(interval: &Interval, num_ions: usize) -> Result<Operator> {
    let h9 = pair_hamiltonian(interval);
    let (i, j) = interval.ion_pair;
    embed(&h9, &[i, j], &HilbertLayout::ions_only(num_ions))
}

/// Apply a 9x9 pair operator to each column of `cols`, acting on the
/// adjacent ion pair `(p, p+1)` of an N-ion chain and leaving the other
/// tensor factors alone. Equivalent to `embed(op9) * cols` without forming
/// the embedded matrix.
pub fn apply_pair_to_columns(
    op9: &Operator,
    pair: (usize, usize),
    num_ions: usize,
    cols: &Operator,
) -> Result<Operator> {
    let (p, p1) = pair;
    if p1 != p + 1 || p1 >= num_ions {
        return Err(Error::InvalidParameter(format!(
            "ion pair ({p},{p1}) is not an adjacent pair of a {num_ions}-ion chain"
        )));
    }
    let dim = LEVELS_PER_ION.pow(num_ions as u32);
    if cols.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "columns have {} rows, chain dimension is {}",
            cols.nrows(),
            dim
        )));
    }
    let low = LEVELS_PER_ION.pow((num_ions - 2 - p) as u32);
    let high = dim / (9 * low);
    let mut out = Operator::zeros(dim, cols.ncols());
    let mut x = [ZERO_C; 9];
    for col in 0..cols.ncols() {
        for a in 0..high {
            let base = a * 9 * low;
            for b in 0..low {
                for (q, xq) in x.iter_mut().enumerate() {
                    *xq = cols[(base + q * low + b, col)];
                }
                for r in 0..9 {
                    let mut acc = ZERO_C;
                    for (q, xq) in x.iter().enumerate() {
                        let m = op9[(r, q)];
                        if m != ZERO_C {
                            acc += m * xq;
                        }
                    }
                    out[(base + r * low + b, col)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Propagate the whole schedule: the ordered product of the interval
/// unitaries on the N-ion chain (slowest interval first in time, so leftmost
/// in the product is the last interval).
pub fn propagate(schedule: &PulseSchedule) -> Result<Operator> {
    let num_ions = schedule.num_ions();
    let dim = LEVELS_PER_ION.pow(num_ions as u32);
    let mut u = Operator::identity(dim, dim);
    let layout = HilbertLayout::ions_only(num_ions);
    for iv in &schedule.intervals {
        let h9 = pair_hamiltonian(iv);
        let u9 = expm(&h9, iv.duration)?;
        let (i, j) = iv.ion_pair;
        let step = embed(&u9, &[i, j], &layout)?;
        u = step * u;
    }
    Ok(u)
}

/// Closed-form single-interval evolution operator for a one-control gate in
/// the 9-dimensional two-ion space: with pulse phase φ_t = Ω t,
/// U(t) = I + (cos φ_t − 1)(|B⟩⟨B| + |ee⟩⟨ee|) − i sin φ_t (|ee⟩⟨B| + |B⟩⟨ee|),
/// where B is the bright state. The dark state and every other basis state
/// are untouched at all times.
pub fn closed_form_two_qubit(spec: &GateSpec, drive: f64, t: f64) -> Result<Operator> {
    if spec.num_controls != 1 {
        return Err(Error::InvalidParameter(format!(
            "closed form is defined for one control, got {}",
            spec.num_controls
        )));
    }
    let (_, b) = bright_dark(spec);
    let dim = 9;
    let ee = 8;
    let phase = drive * t;
    let (c, s) = (phase.cos(), phase.sin());
    let mut u = Operator::identity(dim, dim);
    let cm1 = C64::new(c - 1.0, 0.0);
    let mis = C64::new(0.0, -s);
    for r in 0..dim {
        for k in 0..dim {
            u[(r, k)] += cm1 * b[r] * b[k].conj();
        }
    }
    u[(ee, ee)] += cm1;
    for k in 0..dim {
        u[(ee, k)] += mis * b[k].conj();
        u[(k, ee)] += mis * b[k];
    }
    Ok(u)
}

/// Result of a holonomy verification run.
#[derive(Debug, Clone, Copy)]
pub struct HolonomyReport {
    /// ‖(I − PP†) U(τ) P‖₂: how far the computational subspace fails to
    /// return to itself after the full schedule.
    pub cyclicity_residual: f64,
    /// max over the time grid of ‖Φ†(t) H(t) Φ(t)‖₂ with Φ(t) = U(t,0) P:
    /// the dynamical-phase (parallel-transport) defect.
    pub transport_residual: f64,
    /// Grid points per interval that the transport condition was sampled on.
    pub grid_points: usize,
}

/// Verify cyclicity and parallel transport along the schedule, sampling the
/// transport condition on `grid_points` uniformly spaced times per interval
/// (endpoints included).
pub fn verify_holonomy(schedule: &PulseSchedule, grid_points: usize) -> Result<HolonomyReport> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points per interval".into()));
    }
    let num_ions = schedule.num_ions();
    let proj = SubspaceProjector::computational(num_ions);
    let mut phi = proj.isometry();
    let mut transport = 0.0f64;
    for iv in &schedule.intervals {
        let h9 = pair_hamiltonian(iv);
        let (evals, evecs) = eigh(&h9)?;
        let u9_at = |s: f64| -> Operator {
            let mut scaled = evecs.clone();
            for (k, lam) in evals.iter().enumerate() {
                let ph = C64::new(0.0, -lam * s).exp();
                for r in 0..9 {
                    scaled[(r, k)] *= ph;
                }
            }
            scaled * evecs.adjoint()
        };
        for j in 0..grid_points {
            let s = iv.duration * j as f64 / (grid_points - 1) as f64;
            let phi_t = apply_pair_to_columns(&u9_at(s), iv.ion_pair, num_ions, &phi)?;
            let h_phi = apply_pair_to_columns(&h9, iv.ion_pair, num_ions, &phi_t)?;
            let a = phi_t.adjoint() * h_phi;
            transport = transport.max(spectral_norm(&a));
        }
        phi = apply_pair_to_columns(&u9_at(iv.duration), iv.ion_pair, num_ions, &phi)?;
    }
    Ok(HolonomyReport {
        cyclicity_residual: proj.leakage(&phi),
        transport_residual: transport,
        grid_points,
    })
}

/// Distance between the schedule's effective evolution, restricted to the
/// computational subspace, and the ideal controlled-(n·σ) gate: the spectral
/// norm of the difference, global phase included.
pub fn gate_error(schedule: &PulseSchedule) -> Result<f64> {
    let num_ions = schedule.num_ions();
    let proj = SubspaceProjector::computational(num_ions);
    let mut phi = proj.isometry();
    for iv in &schedule.intervals {
        let h9 = pair_hamiltonian(iv);
        let u9 = expm(&h9, iv.duration)?;
        phi = apply_pair_to_columns(&u9, iv.ion_pair, num_ions, &phi)?;
    }
    let g = proj.restrict(&phi);
    let target = controlled_sigma(&schedule.spec);
    Ok(spectral_norm(&(g - target)))
}

/// A copy of the schedule with every pulse area (and hence duration) scaled
/// by `factor`; used as the negative control for the holonomy checks.
pub fn with_scaled_areas(schedule: &PulseSchedule, factor: f64) -> PulseSchedule {
    let mut out = schedule.clone();
    for iv in &mut out.intervals {
        iv.pulse_area *= factor;
        iv.duration *= factor;
    }
    out
}
