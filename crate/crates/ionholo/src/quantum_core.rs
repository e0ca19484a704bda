//! Dense complex linear algebra and Hilbert-space bookkeeping.
//!
//! Everything downstream shares one basis-ordering contract: tensor factors
//! multiply out with ion 1 as the slowest index and the phonon mode (when a
//! layout has one) as the fastest. Within an ion the three levels order as
//! |0⟩=0, |1⟩=1, |e⟩=2. A composite basis index is therefore
//!
//! ```text
//! idx = ((...(l_1 * 3 + l_2) * 3 + ...) * 3 + l_N) * mode_dim + n
//! ```
//!
//! Operators are dense `nalgebra` matrices over `Complex<f64>`; the largest
//! in-scope dimension (a few hundred) does not justify sparse storage here.
//! The hot Lindblad loop in `full_sim` keeps its own compressed form.

use nalgebra::{Complex, DMatrix, DVector};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type Operator = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Number of internal levels per ion: |0⟩, |1⟩ and the excited |e⟩.
pub const LEVELS_PER_ION: usize = 3;

/// Level indices within one ion.
pub const LVL_0: usize = 0;
pub const LVL_1: usize = 1;
pub const LVL_E: usize = 2;

/// Dimension cap for tensor products; guards against runaway growth.
pub const DIM_CAP: usize = 10_000;

pub const ZERO_C: C64 = Complex::new(0.0, 0.0);
pub const ONE_C: C64 = Complex::new(1.0, 0.0);
pub const I_C: C64 = Complex::new(0.0, 1.0);

/// Shape of the composite Hilbert space: a chain of three-level ions with an
/// optional shared phonon mode truncated at `fock_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    pub num_ions: usize,
    /// Highest Fock state kept, so the mode dimension is `fock_cutoff + 1`.
    /// `None` means no mode (the effective model).
    pub fock_cutoff: Option<usize>,
}

impl HilbertLayout {
    pub fn ions_only(num_ions: usize) -> Self {
        assert!(num_ions >= 1, "need at least one ion");
        HilbertLayout { num_ions, fock_cutoff: None }
    }

    pub fn with_mode(num_ions: usize, fock_cutoff: usize) -> Self {
        assert!(num_ions >= 1, "need at least one ion");
        HilbertLayout { num_ions, fock_cutoff: Some(fock_cutoff) }
    }

    pub fn has_mode(&self) -> bool {
        self.fock_cutoff.is_some()
    }

    /// Dimension of the ion chain factor, 3^num_ions.
    pub fn ion_dim(&self) -> usize {
        LEVELS_PER_ION.pow(self.num_ions as u32)
    }

    /// Dimension of the mode factor (1 when absent).
    pub fn mode_dim(&self) -> usize {
        self.fock_cutoff.map_or(1, |n| n + 1)
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.ion_dim() * self.mode_dim()
    }

    /// Basis index of the product state with the given ion levels (one entry
    /// per ion, values 0..3) and Fock number `n` (0 when no mode).
    pub fn basis_index(&self, levels: &[usize], n: usize) -> usize {
        assert_eq!(levels.len(), self.num_ions, "one level per ion");
        assert!(n < self.mode_dim(), "Fock number beyond cutoff");
        let mut idx = 0;
        for &l in levels {
            assert!(l < LEVELS_PER_ION);
            idx = idx * LEVELS_PER_ION + l;
        }
        idx * self.mode_dim() + n
    }

    /// Unit basis vector for [`basis_index`](Self::basis_index).
    pub fn basis_state(&self, levels: &[usize], n: usize) -> StateVector {
        let mut v = StateVector::zeros(self.dim());
        v[self.basis_index(levels, n)] = ONE_C;
        v
    }

    /// Decompose a global index into (ion levels, Fock number).
    pub fn split_index(&self, idx: usize) -> (Vec<usize>, usize) {
        let n = idx % self.mode_dim();
        let mut rest = idx / self.mode_dim();
        let mut levels = vec![0usize; self.num_ions];
        for slot in levels.iter_mut().rev() {
            *slot = rest % LEVELS_PER_ION;
            rest /= LEVELS_PER_ION;
        }
        (levels, n)
    }
}

/// Largest entrywise deviation from Hermiticity, ‖A − A†‖_max.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Checks Hermiticity against a scale-aware tolerance (1e-12 relative to the
/// largest entry, with an absolute floor of 1e-12).
pub fn require_hermitian(a: &Operator) -> Result<()> {
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    let defect = hermiticity_defect(a);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Kronecker product following the documented basis ordering: entry
/// `(i*dim(b)+k, j*dim(b)+l) = a_ij * b_kl`.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    let dim = a
        .nrows()
        .checked_mul(b.nrows())
        .ok_or(Error::CapacityExceeded { dim: usize::MAX, cap: DIM_CAP })?;
    if dim > DIM_CAP {
        return Err(Error::CapacityExceeded { dim, cap: DIM_CAP });
    }
    Ok(a.kronecker(b))
}

/// Place a local operator acting on the listed ions (in the order given)
/// into the full chain space, identity on every other ion and on the mode.
///
/// `local` must be square with dimension `3^{ions.len()}`, its own factors
/// ordered so that `ions[0]` is the slowest index.
pub fn embed(local: &Operator, ions: &[usize], layout: &HilbertLayout) -> Result<Operator> {
    let k = ions.len();
    let local_dim = LEVELS_PER_ION.pow(k as u32);
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::DimensionMismatch(format!(
            "local operator is {}x{}, expected {} for {} ions",
            local.nrows(),
            local.ncols(),
            local_dim,
            k
        )));
    }
    for (pos, &ion) in ions.iter().enumerate() {
        if ion >= layout.num_ions {
            return Err(Error::IonIndexOutOfRange { index: ion, num_ions: layout.num_ions });
        }
        if ions[..pos].contains(&ion) {
            return Err(Error::InvalidParameter(format!("ion index {ion} repeated")));
        }
    }
    let dim = layout.dim();
    if dim > DIM_CAP {
        return Err(Error::CapacityExceeded { dim, cap: DIM_CAP });
    }
    let mode_dim = layout.mode_dim();
    let mut out = Operator::zeros(dim, dim);
    // Enumerate global index pairs that differ only on the selected ions.
    for row in 0..dim {
        let (row_levels, n) = layout.split_index(row);
        let mut local_row = 0;
        for &ion in ions {
            local_row = local_row * LEVELS_PER_ION + row_levels[ion];
        }
        for lc in 0..local_dim {
            let v = local[(local_row, lc)];
            if v == ZERO_C {
                continue;
            }
            let mut col_levels = row_levels.clone();
            let mut rest = lc;
            for &ion in ions.iter().rev() {
                col_levels[ion] = rest % LEVELS_PER_ION;
                rest /= LEVELS_PER_ION;
            }
            let mut col = 0;
            for &l in &col_levels {
                col = col * LEVELS_PER_ION + l;
            }
            out[(row, col * mode_dim + n)] = v;
        }
    }
    Ok(out)
}

/// Truncated harmonic ladder operators: a|n⟩ = √n |n−1⟩ and a†|n⟩ = √(n+1)
/// |n+1⟩, with a†|n_max⟩ = 0 under the truncation.
pub fn ladder_ops(fock_cutoff: usize) -> (Operator, Operator) {
    let nf = fock_cutoff + 1;
    let mut a = Operator::zeros(nf, nf);
    for n in 1..nf {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    (a, ad)
}

/// Unitary `exp(−i h t)` of a Hermitian `h` via eigendecomposition.
///
/// All in-scope Hamiltonians are Hermitian, so the spectral route is both
/// simple and accurate at these dimensions. Non-Hermitian input is rejected.
pub fn expm(h: &Operator, t: f64) -> Result<Operator> {
    require_hermitian(h)?;
    Ok(expm_unchecked(h, t))
}

/// Spectral `exp(−i h t)` without the Hermiticity gate, for callers that
/// construct `h` themselves and have already validated it.
pub fn expm_unchecked(h: &Operator, t: f64) -> Operator {
    let se = nalgebra::SymmetricEigen::new(h.clone());
    let dim = h.nrows();
    // V * diag(e^{-i λ t}) * V†, written as scaled columns to skip a matmul.
    let mut scaled = se.eigenvectors.clone();
    for (k, lambda) in se.eigenvalues.iter().enumerate() {
        let phase = C64::new(0.0, -lambda * t).exp();
        for i in 0..dim {
            scaled[(i, k)] *= phase;
        }
    }
    scaled * se.eigenvectors.adjoint()
}

/// Eigendecomposition of a Hermitian operator: (eigenvalues, eigenvectors).
pub fn eigh(h: &Operator) -> Result<(Vec<f64>, Operator)> {
    require_hermitian(h)?;
    let se = nalgebra::SymmetricEigen::new(h.clone());
    Ok((se.eigenvalues.iter().copied().collect(), se.eigenvectors))
}

/// Trace out the phonon mode, returning the ions-only reduced state.
pub fn partial_trace_mode(rho: &Operator, layout: &HilbertLayout) -> Result<Operator> {
    if !layout.has_mode() {
        return Err(Error::NoMode);
    }
    let dim = layout.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}, layout dimension is {}",
            rho.nrows(),
            rho.ncols(),
            dim
        )));
    }
    let id = layout.ion_dim();
    let md = layout.mode_dim();
    let mut out = Operator::zeros(id, id);
    for i in 0..id {
        for j in 0..id {
            let mut s = ZERO_C;
            for n in 0..md {
                s += rho[(i * md + n, j * md + n)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Largest entrywise modulus of a matrix.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Largest entrywise modulus of the difference.
pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

/// Spectral norm (largest singular value) of a general matrix, computed from
/// the Hermitian Gram matrix.
pub fn spectral_norm(a: &Operator) -> f64 {
    let gram = a.adjoint() * a;
    let se = nalgebra::SymmetricEigen::new(gram);
    se.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l)).max(0.0).sqrt()
}

/// Deviation from unitarity, ‖U†U − I‖_max.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE_C } else { ZERO_C };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}
