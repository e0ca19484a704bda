//! Ideal target gates: controlled-(n·σ) unitaries, bright/dark state pairs,
//! the two-gate composition rule, and the elementary-gate-count comparator.
//!
//! Gates live natively in the 2^{n+1}-dimensional qubit space. A separate
//! embedding maps them into the 3^{n+1} three-level chain space (the |e⟩
//! levels extended as identity) so simulated evolutions can be compared
//! against them directly. Comparisons are phase-sensitive: the constructions
//! here produce exact matrices with no free global phase.

use nalgebra::Complex;

use crate::quantum_core::{
    HilbertLayout, Operator, StateVector, C64, LEVELS_PER_ION, LVL_1, ZERO_C,
};
use crate::{Error, Result};

/// Rotation axis n = (sinθcosφ, sinθsinφ, cosθ) on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub theta: f64,
    pub phi: f64,
}

impl Axis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Axis { theta, phi }
    }

    /// Cartesian unit vector of the axis.
    pub fn unit_vector(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }

    /// The Pauli projection n·σ as a 2x2 Hermitian unitary.
    pub fn dot_sigma(&self) -> Operator {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        let e_m = C64::new(0.0, -self.phi).exp();
        let e_p = C64::new(0.0, self.phi).exp();
        Operator::from_row_slice(2, 2, &[
            C64::new(c, 0.0),
            e_m * s,
            e_p * s,
            C64::new(-c, 0.0),
        ])
    }
}

/// A controlled-(n·σ) gate: n control qubits and a rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub num_controls: usize,
    pub axis: Axis,
}

impl GateSpec {
    pub fn new(num_controls: usize, axis: Axis) -> Result<Self> {
        if num_controls < 1 {
            return Err(Error::InvalidParameter("need at least one control qubit".into()));
        }
        Ok(GateSpec { num_controls, axis })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_controls + 1
    }

    /// Dimension of the qubit-space unitary, 2^{n+1}.
    pub fn qubit_dim(&self) -> usize {
        1 << self.num_qubits()
    }
}

/// The target unitary [I^{⊗n} − (|1⟩⟨1|)^{⊗n}] ⊗ I + (|1⟩⟨1|)^{⊗n} ⊗ n·σ
/// in the 2^{n+1} qubit space, qubit 1 slowest index.
pub fn controlled_sigma(spec: &GateSpec) -> Operator {
    let dim = spec.qubit_dim();
    let ns = spec.axis.dot_sigma();
    let mut u = Operator::identity(dim, dim);
    // The n·σ block sits on the two states whose first n bits are all 1.
    let base = dim - 2;
    for i in 0..2 {
        for j in 0..2 {
            u[(base + i, base + j)] = ns[(i, j)];
        }
    }
    u
}

/// Dark and bright states in the 3^{n+1} chain space:
/// D = cos(θ/2)|1…10⟩ + sin(θ/2)e^{iφ}|1…11⟩,
/// B = sin(θ/2)e^{−iφ}|1…10⟩ − cos(θ/2)|1…11⟩.
pub fn bright_dark(spec: &GateSpec) -> (StateVector, StateVector) {
    let layout = HilbertLayout::ions_only(spec.num_qubits());
    let half = spec.axis.theta / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let mut all1 = vec![LVL_1; spec.num_qubits()];
    all1[spec.num_controls] = 0;
    let ket_10 = layout.basis_state(&all1, 0);
    all1[spec.num_controls] = 1;
    let ket_11 = layout.basis_state(&all1, 0);
    let d = &ket_10 * C64::new(c, 0.0) + &ket_11 * (C64::new(0.0, spec.axis.phi).exp() * s);
    let b = &ket_10 * (C64::new(0.0, -spec.axis.phi).exp() * s) - &ket_11 * C64::new(c, 0.0);
    (d, b)
}

/// Product of two controlled-(n·σ) gates with equal control counts. The
/// result equals controlled-[(n·m)I + iσ·(n×m)], a controlled rotation
/// about n×m.
pub fn compose_rotation(spec_n: &GateSpec, spec_m: &GateSpec) -> Result<Operator> {
    if spec_n.num_controls != spec_m.num_controls {
        return Err(Error::DimensionMismatch(format!(
            "control counts differ: {} vs {}",
            spec_n.num_controls, spec_m.num_controls
        )));
    }
    Ok(controlled_sigma(spec_n) * controlled_sigma(spec_m))
}

/// Build controlled-[(n·m)I + iσ·(n×m)] directly from the two axes, for
/// comparison against [`compose_rotation`].
pub fn composed_rotation_direct(spec_n: &GateSpec, spec_m: &GateSpec) -> Result<Operator> {
    if spec_n.num_controls != spec_m.num_controls {
        return Err(Error::DimensionMismatch(format!(
            "control counts differ: {} vs {}",
            spec_n.num_controls, spec_m.num_controls
        )));
    }
    let n = spec_n.axis.unit_vector();
    let m = spec_m.axis.unit_vector();
    let dot = n[0] * m[0] + n[1] * m[1] + n[2] * m[2];
    let cross = [
        n[1] * m[2] - n[2] * m[1],
        n[2] * m[0] - n[0] * m[2],
        n[0] * m[1] - n[1] * m[0],
    ];
    // (n·m) I + i (n×m)·σ on the target block.
    let i = Complex::new(0.0, 1.0);
    let block = Operator::from_row_slice(2, 2, &[
        C64::new(dot, 0.0) + i * C64::new(cross[2], 0.0),
        i * C64::new(cross[0], -cross[1]),
        i * C64::new(cross[0], cross[1]),
        C64::new(dot, 0.0) - i * C64::new(cross[2], 0.0),
    ]);
    let dim = spec_n.qubit_dim();
    let mut u = Operator::identity(dim, dim);
    let base = dim - 2;
    for r in 0..2 {
        for c in 0..2 {
            u[(base + r, base + c)] = block[(r, c)];
        }
    }
    Ok(u)
}

/// Operation-count comparison for an n-control gate: (2n−1) basic holonomic
/// operations versus (2^{n+1}−3) two-qubit controlled gates for the
/// conventional decomposition.
pub fn operation_counts(n: usize) -> Result<(u64, u64)> {
    if n < 1 {
        return Err(Error::InvalidParameter("control count must be at least 1".into()));
    }
    let holonomic = 2 * n as u64 - 1;
    let decomposed = (1u64 << (n + 1)) - 3;
    Ok((holonomic, decomposed))
}

/// Map a qubit-space basis index to the chain-space index of the same
/// bit string (levels |0⟩, |1⟩ only).
pub fn qubit_index_to_chain(bits: usize, num_qubits: usize) -> usize {
    let mut idx = 0;
    for q in 0..num_qubits {
        let bit = (bits >> (num_qubits - 1 - q)) & 1;
        idx = idx * LEVELS_PER_ION + bit;
    }
    idx
}

/// Embed a 2^{n+1} qubit-space gate into the 3^{n+1} chain space: the gate
/// acts on the computational subspace, identity on everything touching |e⟩.
pub fn embed_gate_into_chain(gate: &Operator, num_qubits: usize) -> Result<Operator> {
    let qdim = 1usize << num_qubits;
    if gate.nrows() != qdim || gate.ncols() != qdim {
        return Err(Error::DimensionMismatch(format!(
            "gate is {}x{}, expected {}",
            gate.nrows(),
            gate.ncols(),
            qdim
        )));
    }
    let cdim = LEVELS_PER_ION.pow(num_qubits as u32);
    let mut out = Operator::identity(cdim, cdim);
    for x in 0..qdim {
        let cx = qubit_index_to_chain(x, num_qubits);
        out[(cx, cx)] = ZERO_C;
    }
    for x in 0..qdim {
        let cx = qubit_index_to_chain(x, num_qubits);
        for y in 0..qdim {
            let v = gate[(x, y)];
            if v != ZERO_C {
                out[(cx, qubit_index_to_chain(y, num_qubits))] = v;
            }
        }
    }
    Ok(out)
}

/// Restrict a chain-space operator to the computational subspace, returning
/// the 2^{n+1} matrix of matrix elements between computational basis states.
pub fn restrict_to_computational(op: &Operator, num_qubits: usize) -> Result<Operator> {
    let cdim = LEVELS_PER_ION.pow(num_qubits as u32);
    if op.nrows() != cdim || op.ncols() != cdim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}",
            op.nrows(),
            op.ncols(),
            cdim
        )));
    }
    let qdim = 1usize << num_qubits;
    let mut out = Operator::zeros(qdim, qdim);
    for x in 0..qdim {
        for y in 0..qdim {
            out[(x, y)] = op[(qubit_index_to_chain(x, num_qubits), qubit_index_to_chain(y, num_qubits))];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_core::{max_abs_diff, unitarity_defect, LVL_0, ONE_C};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> GateSpec {
        GateSpec::new(n, Axis::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))).unwrap()
    }

    /// Independent oracle: build controlled-(n·σ) by looping over all basis
    /// states and applying the definition verbatim.
    fn controlled_sigma_oracle(spec: &GateSpec) -> Operator {
        let dim = spec.qubit_dim();
        let ns = spec.axis.dot_sigma();
        let nq = spec.num_qubits();
        let mut u = Operator::zeros(dim, dim);
        for col in 0..dim {
            let controls_all_one = (0..spec.num_controls).all(|q| (col >> (nq - 1 - q)) & 1 == 1);
            if !controls_all_one {
                u[(col, col)] = ONE_C;
            } else {
                let target = col & 1;
                for out_bit in 0..2 {
                    let row = (col & !1) | out_bit;
                    u[(row, col)] = ns[(out_bit, target)];
                }
            }
        }
        u
    }

    #[test]
    fn axis_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let axis = Axis::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            let v = axis.unit_vector();
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn x_axis_single_control_is_cnot() {
        let spec = GateSpec::new(1, Axis::new(FRAC_PI_2, 0.0)).unwrap();
        let u = controlled_sigma(&spec);
        let mut cnot = Operator::zeros(4, 4);
        cnot[(0, 0)] = ONE_C;
        cnot[(1, 1)] = ONE_C;
        cnot[(2, 3)] = ONE_C;
        cnot[(3, 2)] = ONE_C;
        assert!(max_abs_diff(&u, &cnot) < 1e-15);
    }

    #[test]
    fn z_axis_single_control_is_controlled_z() {
        let spec = GateSpec::new(1, Axis::new(0.0, 0.0)).unwrap();
        let u = controlled_sigma(&spec);
        let expected = Operator::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE_C,
            ONE_C,
            ONE_C,
            -ONE_C,
        ]));
        assert!(max_abs_diff(&u, &expected) < 1e-15);
    }

    #[test]
    fn matches_basis_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for n in 1..=3 {
            for _ in 0..5 {
                let spec = random_spec(&mut rng, n);
                let u = controlled_sigma(&spec);
                assert!(max_abs_diff(&u, &controlled_sigma_oracle(&spec)) < 1e-15);
            }
        }
    }

    #[test]
    fn unitary_hermitian_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 1..=4 {
            let spec = random_spec(&mut rng, n);
            let u = controlled_sigma(&spec);
            assert!(unitarity_defect(&u) < 1e-12);
            assert!(crate::quantum_core::hermiticity_defect(&u) < 1e-12);
            let dim = spec.qubit_dim();
            assert!(max_abs_diff(&(&u * &u), &Operator::identity(dim, dim)) < 1e-12);
        }
    }

    #[test]
    fn identity_on_unset_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let spec = random_spec(&mut rng, 3);
        let u = controlled_sigma(&spec);
        let dim = spec.qubit_dim();
        for col in 0..dim - 2 {
            for row in 0..dim {
                let expected = if row == col { ONE_C } else { ZERO_C };
                assert!((u[(row, col)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bright_dark_limits() {
        let spec = GateSpec::new(2, Axis::new(0.0, 0.0)).unwrap();
        let (d, b) = bright_dark(&spec);
        let layout = HilbertLayout::ions_only(3);
        let ket_110 = layout.basis_state(&[LVL_1, LVL_1, LVL_0], 0);
        let ket_111 = layout.basis_state(&[LVL_1, LVL_1, LVL_1], 0);
        assert!((d - ket_110).norm() < 1e-15);
        assert!((b + ket_111).norm() < 1e-15);

        let spec = GateSpec::new(1, Axis::new(FRAC_PI_2, 0.0)).unwrap();
        let (d, _) = bright_dark(&spec);
        let layout = HilbertLayout::ions_only(2);
        let expected = (layout.basis_state(&[LVL_1, LVL_0], 0)
            + layout.basis_state(&[LVL_1, LVL_1], 0))
            / C64::new(2f64.sqrt(), 0.0);
        assert!((d - expected).norm() < 1e-15);
    }

    #[test]
    fn bright_dark_orthonormal_any_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for n in 1..=3 {
            let spec = random_spec(&mut rng, n);
            let (d, b) = bright_dark(&spec);
            assert_abs_diff_eq!(d.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b.norm(), 1.0, epsilon = 1e-12);
            assert!(d.dotc(&b).norm() < 1e-12);
        }
    }

    /// |D⟩⟨D| − |B⟩⟨B| equals (|1⟩⟨1|)^{⊗n} ⊗ n·σ on the computational space.
    #[test]
    fn projector_difference_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for n in 1..=2 {
            let spec = random_spec(&mut rng, n);
            let (d, b) = bright_dark(&spec);
            let diff = &d * d.adjoint() - &b * b.adjoint();
            let restricted = restrict_to_computational(&diff, spec.num_qubits()).unwrap();
            // Direct construction in qubit space.
            let mut expected = Operator::zeros(spec.qubit_dim(), spec.qubit_dim());
            let ns = spec.axis.dot_sigma();
            let base = spec.qubit_dim() - 2;
            for r in 0..2 {
                for c in 0..2 {
                    expected[(base + r, base + c)] = ns[(r, c)];
                }
            }
            assert!(max_abs_diff(&restricted, &expected) < 1e-13);
        }
    }

    #[test]
    fn compose_same_axis_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let spec = random_spec(&mut rng, 2);
        let u = compose_rotation(&spec, &spec).unwrap();
        let dim = spec.qubit_dim();
        assert!(max_abs_diff(&u, &Operator::identity(dim, dim)) < 1e-13);
    }

    #[test]
    fn compose_x_then_y_gives_controlled_iz() {
        let sx = GateSpec::new(1, Axis::new(FRAC_PI_2, 0.0)).unwrap();
        let sy = GateSpec::new(1, Axis::new(FRAC_PI_2, FRAC_PI_2)).unwrap();
        let u = compose_rotation(&sx, &sy).unwrap();
        // x·y = 0, x×y = z, so the target block is i σ_z.
        let mut expected = Operator::identity(4, 4);
        expected[(2, 2)] = C64::new(0.0, 1.0);
        expected[(3, 3)] = C64::new(0.0, -1.0);
        assert!(max_abs_diff(&u, &expected) < 1e-13);
    }

    #[test]
    fn compose_matches_direct_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..10 {
            let a = random_spec(&mut rng, 2);
            let b = random_spec(&mut rng, 2);
            let product = compose_rotation(&a, &b).unwrap();
            let direct = composed_rotation_direct(&a, &b).unwrap();
            assert!(max_abs_diff(&product, &direct) < 1e-12);
        }
    }

    #[test]
    fn compose_rejects_mismatched_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let a = random_spec(&mut rng, 1);
        let b = random_spec(&mut rng, 2);
        assert!(compose_rotation(&a, &b).is_err());
    }

    #[test]
    fn counts_table() {
        assert_eq!(operation_counts(1).unwrap(), (1, 1));
        assert_eq!(operation_counts(2).unwrap(), (3, 5));
        assert_eq!(operation_counts(5).unwrap(), (9, 61));
        assert_eq!(operation_counts(10).unwrap(), (19, 2045));
        assert!(operation_counts(0).is_err());
        for n in 3..=16 {
            let (h, d) = operation_counts(n).unwrap();
            assert!(h < d);
        }
    }

    #[test]
    fn chain_embedding_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let spec = random_spec(&mut rng, 2);
        let gate = controlled_sigma(&spec);
        let chain = embed_gate_into_chain(&gate, spec.num_qubits()).unwrap();
        assert!(unitarity_defect(&chain) < 1e-12);
        let back = restrict_to_computational(&chain, spec.num_qubits()).unwrap();
        assert!(max_abs_diff(&back, &gate) < 1e-15);
        // A state with an |e⟩ level is untouched.
        let layout = HilbertLayout::ions_only(3);
        let psi = layout.basis_state(&[LVL_1, crate::quantum_core::LVL_E, LVL_0], 0);
        assert!((&chain * &psi - &psi).norm() < 1e-15);
    }
}
