//! Gate constructors built around the generalized XOR.
//!
//! The central gate is GXOR |i⟩|j⟩ = |i⟩|i⊖j⟩ with subtraction mod D. Unlike
//! the modulo-addition variant it stays hermitian (and hence involutive) for
//! every D, which is what makes Bell disentanglement and the nonlinear map
//! work in higher dimensions. Combined with the one-qudit Fourier transform it
//! generates the maximally entangled basis
//! |ψ_lm⟩ = (1/√D) Σ_k e^{i2πlk/D} |k⟩|k⊖m⟩.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::dft_unitary;
use crate::linalg::{CMat, CVec, DensityMatrix, PureState, UnitaryOp};
use crate::ring::{sub_mod, Dim, Dit};

/// Label (l, m) of a generalized Bell state / Bell measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    pub l: Dit,
    pub m: Dit,
}

impl BellLabel {
    pub fn new(l: usize, m: usize, dim: Dim) -> Result<Self> {
        Ok(BellLabel {
            l: Dit::new(l, dim)?,
            m: Dit::new(m, dim)?,
        })
    }

    /// Flat index l·D + m, the row-major position of this outcome.
    pub fn flat(&self, dim: Dim) -> usize {
        self.l.value() * dim.get() + self.m.value()
    }
}

/// Parameters of the Kerr-interaction realization of GXOR.
///
/// Two field modes coupled by H = ħχ n₁n₂ and left to interact for
/// t = 2π/(Dχ) pick up the phase e^{-i2πn₁n₂/D} on each Fock pair; a
/// subsequent phase conjugation completes the gate. ħ is set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KerrParams {
    dim: Dim,
}

impl KerrParams {
    pub fn new(dim: Dim) -> Self {
        KerrParams { dim }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// The product χ·t at the prescribed interaction time, exactly 2π/D.
    pub fn phase_per_step(&self) -> f64 {
        TAU / self.dim.get() as f64
    }

    /// Phase factor acquired by the Fock pair |n₁, n₂⟩.
    pub fn fock_phase(&self, n1: usize, n2: usize) -> C64 {
        let d = self.dim.get();
        C64::from_polar(1.0, -TAU * ((n1 * n2) % d) as f64 / d as f64)
    }
}

/// GXOR on two D-level systems: the permutation |i⟩|j⟩ → |i⟩|i⊖j⟩.
///
/// Unitary, hermitian, and involutive for every D; reduces to CNOT at D = 2.
pub fn gxor_unitary(dim: Dim) -> UnitaryOp {
    let d = dim.get();
    let mut mat = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            mat[(i * d + sub_mod(i, j, d), i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    UnitaryOp::from_parts_unchecked(vec![dim, dim], mat)
}

/// The modulo-addition contrast variant |i⟩|j⟩ → |i⟩|i⊕j⟩.
///
/// Unitary but not hermitian for D > 2: its inverse is its (D-1)-th power.
pub fn gxor_add_unitary(dim: Dim) -> UnitaryOp {
    let d = dim.get();
    let mut mat = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            mat[(i * d + (i + j) % d, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    UnitaryOp::from_parts_unchecked(vec![dim, dim], mat)
}

/// Generalized Bell state |ψ_lm⟩ = GXOR [(F|l⟩) ⊗ |m⟩].
pub fn bell_state(label: BellLabel, dim: Dim) -> Result<PureState> {
    let d = dim.get();
    let l = Dit::new(label.l.value(), dim)?.value();
    let m = Dit::new(label.m.value(), dim)?.value();
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = CVec::zeros(d * d);
    for k in 0..d {
        amps[k * d + sub_mod(k, m, d)] =
            C64::from_polar(scale, TAU * ((l * k) % d) as f64 / d as f64);
    }
    Ok(PureState::from_parts_unchecked(vec![dim, dim], amps))
}

fn bell_input_dim(dims: &[Dim]) -> Result<Dim> {
    match dims {
        [a, b] if a == b => Ok(*a),
        _ => Err(Error::DimMismatch(format!(
            "Bell measurement needs two equal-dimension subsystems, got {dims:?}"
        ))),
    }
}

/// Exact Bell-measurement distribution of a two-qudit pure state.
///
/// Implemented by disentangling: GXOR, inverse Fourier on the first qudit,
/// then a computational readout. Outcome (l, m) occurs with probability
/// |⟨ψ_lm|ψ⟩|²; entries are ordered by flat label index l·D + m.
pub fn bell_measurement(state: &PureState) -> Result<Vec<(BellLabel, f64)>> {
    let dim = bell_input_dim(state.dims())?;
    let rotated = state
        .apply_on(&gxor_unitary(dim), &[0, 1])?
        .apply_on(&dft_unitary(dim).adjoint(), &[0])?;
    let d = dim.get();
    let mut dist = Vec::with_capacity(d * d);
    for l in 0..d {
        for m in 0..d {
            let p = rotated.amps()[l * d + m].norm_sqr();
            dist.push((BellLabel::new(l, m, dim)?, p));
        }
    }
    Ok(dist)
}

/// Exact Bell-measurement distribution of a two-qudit density matrix.
pub fn bell_measurement_mixed(rho: &DensityMatrix) -> Result<Vec<(BellLabel, f64)>> {
    let dim = bell_input_dim(rho.dims())?;
    let rotated = rho
        .conjugate_on(&gxor_unitary(dim), &[0, 1])?
        .conjugate_on(&dft_unitary(dim).adjoint(), &[0])?;
    let d = dim.get();
    let mut dist = Vec::with_capacity(d * d);
    for l in 0..d {
        for m in 0..d {
            let p = rotated.mat()[(l * d + m, l * d + m)].re;
            dist.push((BellLabel::new(l, m, dim)?, p));
        }
    }
    Ok(dist)
}

/// Bob's correction operator U_lm |n⟩ = e^{-i2πn(l-j)/D} |n⊖k⊖m⟩.
///
/// The shift n−k−m is taken as the canonical residue in [0, D).
pub fn correction_unitary(l: Dit, m: Dit, j: Dit, k: Dit, dim: Dim) -> Result<UnitaryOp> {
    let d = dim.get();
    let (l, m) = (
        Dit::new(l.value(), dim)?.value(),
        Dit::new(m.value(), dim)?.value(),
    );
    let (j, k) = (
        Dit::new(j.value(), dim)?.value(),
        Dit::new(k.value(), dim)?.value(),
    );
    let mut mat = CMat::zeros(d, d);
    let phase_step = -TAU * (l as f64 - j as f64) / d as f64;
    for n in 0..d {
        let row = sub_mod(sub_mod(n, k, d), m, d);
        mat[(row, n)] = C64::from_polar(1.0, phase_step * n as f64);
    }
    Ok(UnitaryOp::from_parts_unchecked(vec![dim], mat))
}

/// Basis images of the Kerr-plus-conjugation composite, in the mixed basis.
///
/// The mixed basis pairs mode-1 Fock labels with mode-2 Fourier labels. For
/// each input |i⟩₁|k⟩₂ the composite applies (a) the Kerr phases
/// e^{-i2πn₁n₂/D} on Fock pairs at interaction time t = 2π/(Dχ), then
/// (b) phase conjugation, i.e. complex conjugation of the Fock-basis
/// coordinates. Column i·D + k holds the image expressed in mixed-basis
/// labels. Conjugation is antilinear, so these are basis-state images, not
/// columns of a linear operator acting on arbitrary superpositions; on basis
/// states the column set coincides with the GXOR permutation.
pub fn kerr_gxor_images(dim: Dim) -> CMat {
    let d = dim.get();
    let params = KerrParams::new(dim);
    let f = dft_unitary(dim);
    let mut images = CMat::zeros(d * d, d * d);
    let mut fock = vec![C64::ZERO; d];
    for i in 0..d {
        for k in 0..d {
            // |i⟩₁|k⟩₂ in Fock coordinates: mode-2 amplitudes are column k of F
            for (n2, slot) in fock.iter_mut().enumerate() {
                *slot = (params.fock_phase(i, n2) * f.mat()[(n2, k)]).conj();
            }
            // back to the mixed label: apply F† to the mode-2 coordinates
            for out_k in 0..d {
                let mut acc = C64::ZERO;
                for (n2, amp) in fock.iter().enumerate() {
                    acc += f.mat()[(n2, out_k)].conj() * amp;
                }
                images[(i * d + out_k, i * d + k)] = acc;
            }
        }
    }
    images
}

/// Max-entry deviation of the Kerr-composite images from the GXOR columns.
pub fn kerr_gxor_residual(dim: Dim) -> f64 {
    crate::linalg::max_abs_diff(&kerr_gxor_images(dim), gxor_unitary(dim).mat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, Tolerance};
    use crate::ring::{mod_sub, Dim};

    fn d(v: usize) -> Dim {
        Dim::new(v).unwrap()
    }

    fn dit(v: usize, dim: Dim) -> Dit {
        Dit::new(v, dim).unwrap()
    }

    fn column_of(op: &CMat, col: usize) -> Vec<C64> {
        (0..op.nrows()).map(|r| op[(r, col)]).collect()
    }

    #[test]
    fn gxor_qutrit_truth_table_entry() {
        // |0,1⟩ → |0,2⟩ since 0 − 1 = 2 mod 3
        let g = gxor_unitary(d(3));
        let col = column_of(g.mat(), 1);
        assert_eq!(col[2], C64::new(1.0, 0.0));
        assert_eq!(col.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn gxor_qubit_is_cnot() {
        let g = gxor_unitary(d(2));
        let mut cnot = CMat::zeros(4, 4);
        cnot[(0, 0)] = C64::new(1.0, 0.0);
        cnot[(1, 1)] = C64::new(1.0, 0.0);
        cnot[(2, 3)] = C64::new(1.0, 0.0);
        cnot[(3, 2)] = C64::new(1.0, 0.0);
        assert!(max_abs_diff(g.mat(), &cnot) < 1e-15);
    }

    #[test]
    fn gxor_is_involution() {
        for dd in 2..=10 {
            let g = gxor_unitary(d(dd));
            let squared = g.then(&g).unwrap();
            let n = squared.total_dim();
            assert!(
                max_abs_diff(squared.mat(), &CMat::identity(n, n)) < 1e-15,
                "D={dd}"
            );
        }
    }

    #[test]
    fn gxor_hermitian_unitary_up_to_twenty() {
        for dd in 2..=20 {
            let g = gxor_unitary(d(dd));
            assert!(g.unitarity_residual() < 1e-12, "D={dd}");
            let adj = g.adjoint();
            assert!(max_abs_diff(g.mat(), adj.mat()) < 1e-12, "D={dd}");
        }
    }

    #[test]
    fn gxor_add_qutrit_truth_table_entry() {
        // |1,2⟩ → |1,0⟩ since 1 + 2 = 0 mod 3
        let g = gxor_add_unitary(d(3));
        let col = column_of(g.mat(), 5);
        assert_eq!(col[3], C64::new(1.0, 0.0));
        assert_eq!(col.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn gxor_add_inverse_is_power() {
        for dd in 3..=5 {
            let g = gxor_add_unitary(d(dd));
            let mut power = g.clone();
            for _ in 1..(dd - 1) {
                power = power.then(&g).unwrap();
            }
            assert!(
                max_abs_diff(power.mat(), g.adjoint().mat()) < 1e-15,
                "D={dd}"
            );
        }
    }

    #[test]
    fn gxor_add_not_hermitian_beyond_qubits() {
        for dd in 3..=6 {
            let g = gxor_add_unitary(d(dd));
            let dev = max_abs_diff(g.mat(), g.adjoint().mat());
            assert!(dev > 0.5, "D={dd} should be visibly non-hermitian");
        }
        // at D=2 addition and subtraction agree
        let add = gxor_add_unitary(d(2));
        let sub = gxor_unitary(d(2));
        assert!(max_abs_diff(add.mat(), sub.mat()) < 1e-15);
    }

    #[test]
    fn bell_states_match_printed_qutrit_amplitudes() {
        let dim = d(3);
        let s = 1.0 / 3.0_f64.sqrt();
        let w = TAU / 3.0;

        // |ψ00⟩ = (|00⟩ + |11⟩ + |22⟩)/√3
        let psi = bell_state(BellLabel::new(0, 0, dim).unwrap(), dim).unwrap();
        for (idx, want) in [(0, s), (4, s), (8, s)] {
            assert!((psi.amps()[idx] - C64::new(want, 0.0)).norm() < 1e-14);
        }

        // |ψ10⟩ = (|00⟩ + e^{i2π/3}|11⟩ + e^{-i2π/3}|22⟩)/√3
        let psi = bell_state(BellLabel::new(1, 0, dim).unwrap(), dim).unwrap();
        assert!((psi.amps()[0] - C64::new(s, 0.0)).norm() < 1e-14);
        assert!((psi.amps()[4] - C64::from_polar(s, w)).norm() < 1e-14);
        assert!((psi.amps()[8] - C64::from_polar(s, -w)).norm() < 1e-14);

        // |ψ20⟩ = (|00⟩ + e^{-i2π/3}|11⟩ + e^{i2π/3}|22⟩)/√3
        let psi = bell_state(BellLabel::new(2, 0, dim).unwrap(), dim).unwrap();
        assert!((psi.amps()[4] - C64::from_polar(s, -w)).norm() < 1e-14);
        assert!((psi.amps()[8] - C64::from_polar(s, w)).norm() < 1e-14);

        // |ψ01⟩ = (|02⟩ + |10⟩ + |21⟩)/√3
        let psi = bell_state(BellLabel::new(0, 1, dim).unwrap(), dim).unwrap();
        for idx in [2, 3, 7] {
            assert!((psi.amps()[idx] - C64::new(s, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn bell_state_definition_agrees_with_circuit() {
        // |ψ_lm⟩ = GXOR [(F|l⟩) ⊗ |m⟩]
        for dd in [2, 3, 5] {
            let dim = d(dd);
            let f = dft_unitary(dim);
            for l in 0..dd {
                for m in 0..dd {
                    let direct = bell_state(BellLabel::new(l, m, dim).unwrap(), dim).unwrap();
                    let circuit = PureState::basis(&[dim], &[l])
                        .unwrap()
                        .apply(&f)
                        .unwrap()
                        .tensor(&PureState::basis(&[dim], &[m]).unwrap())
                        .apply_on(&gxor_unitary(dim), &[0, 1])
                        .unwrap();
                    let dev = crate::linalg::max_abs_diff_vec(direct.amps(), circuit.amps());
                    assert!(dev < 1e-14, "D={dd} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for dd in [2, 3, 4, 7] {
            let dim = d(dd);
            let states: Vec<PureState> = (0..dd * dd)
                .map(|f| bell_state(BellLabel::new(f / dd, f % dd, dim).unwrap(), dim).unwrap())
                .collect();
            for (a, sa) in states.iter().enumerate() {
                for (b, sb) in states.iter().enumerate() {
                    let overlap = sa.overlap(sb).unwrap();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((overlap.norm() - want).abs() < 1e-12, "D={dd} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn disentangling_recovers_labels() {
        // GXOR then F⁻¹ on the first qudit maps |ψ_lm⟩ to |l⟩|m⟩ up to phase
        let dim = d(4);
        let f_inv = dft_unitary(dim).adjoint();
        for l in 0..4 {
            for m in 0..4 {
                let label = BellLabel::new(l, m, dim).unwrap();
                let out = bell_state(label, dim)
                    .unwrap()
                    .apply_on(&gxor_unitary(dim), &[0, 1])
                    .unwrap()
                    .apply_on(&f_inv, &[0])
                    .unwrap();
                let target = PureState::basis(&[dim, dim], &[l, m]).unwrap();
                assert!(out
                    .coincides_up_to_phase(&target, Tolerance::default())
                    .unwrap());
            }
        }
    }

    #[test]
    fn bell_measurement_on_bell_states() {
        let dim = d(3);
        let dist = bell_measurement(&bell_state(BellLabel::new(0, 0, dim).unwrap(), dim).unwrap())
            .unwrap();
        assert!((dist[0].1 - 1.0).abs() < 1e-12);

        let dist = bell_measurement(&bell_state(BellLabel::new(1, 0, dim).unwrap(), dim).unwrap())
            .unwrap();
        let hit = dist.iter().find(|(lab, _)| lab.flat(dim) == 3).unwrap();
        assert!((hit.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_measurement_of_product_state() {
        // |00⟩ = (ψ00 + ψ10)/√2 for qubits
        let dim = d(2);
        let dist = bell_measurement(&PureState::basis(&[dim, dim], &[0, 0]).unwrap()).unwrap();
        let probs: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
        assert!((probs[0] - 0.5).abs() < 1e-12); // (0,0)
        assert!((probs[2] - 0.5).abs() < 1e-12); // (1,0)
        assert!(probs[1].abs() < 1e-12);
        assert!(probs[3].abs() < 1e-12);
    }

    #[test]
    fn bell_measurement_distribution_normalized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for dd in [2, 3, 5] {
            let dim = d(dd);
            let psi = crate::teleport::random_pure_state(dim, &mut rng)
                .tensor(&crate::teleport::random_pure_state(dim, &mut rng));
            let total: f64 = bell_measurement(&psi)
                .unwrap()
                .iter()
                .map(|&(_, p)| p)
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "D={dd}");

            let total_mixed: f64 = bell_measurement_mixed(&psi.to_density())
                .unwrap()
                .iter()
                .map(|&(_, p)| p)
                .sum();
            assert!((total_mixed - 1.0).abs() < 1e-12, "D={dd} mixed");
        }
    }

    #[test]
    fn bell_measurement_mixed_agrees_with_pure() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let dim = d(3);
        let psi = crate::teleport::random_pure_state(dim, &mut rng)
            .tensor(&crate::teleport::random_pure_state(dim, &mut rng));
        let pure = bell_measurement(&psi).unwrap();
        let mixed = bell_measurement_mixed(&psi.to_density()).unwrap();
        for ((_, p), (_, q)) in pure.iter().zip(&mixed) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_measurement_rejects_mismatched_subsystems() {
        let psi = PureState::basis(&[d(2), d(3)], &[0, 0]).unwrap();
        assert!(bell_measurement(&psi).is_err());
        let single = PureState::basis(&[d(4)], &[0]).unwrap();
        assert!(bell_measurement(&single).is_err());
    }

    #[test]
    fn correction_identity_case() {
        let dim = d(5);
        let u =
            correction_unitary(dit(2, dim), dit(0, dim), dit(2, dim), dit(0, dim), dim).unwrap();
        assert!(max_abs_diff(u.mat(), &CMat::identity(5, 5)) < 1e-15);
    }

    #[test]
    fn correction_phase_case() {
        // D=2, j=k=0, (l,m)=(1,0): U|n⟩ = e^{-iπn}|n⟩ = diag(1, -1)
        let dim = d(2);
        let u =
            correction_unitary(dit(1, dim), dit(0, dim), dit(0, dim), dit(0, dim), dim).unwrap();
        let mut want = CMat::zeros(2, 2);
        want[(0, 0)] = C64::new(1.0, 0.0);
        want[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(max_abs_diff(u.mat(), &want) < 1e-14);
    }

    #[test]
    fn correction_unitary_for_all_labels() {
        for dd in 2..=10 {
            let dim = d(dd);
            for l in 0..dd {
                for m in 0..dd {
                    for j in [0, dd / 2] {
                        for k in [0, dd - 1] {
                            let u = correction_unitary(
                                dit(l, dim),
                                dit(m, dim),
                                dit(j, dim),
                                dit(k, dim),
                                dim,
                            )
                            .unwrap();
                            assert!(u.unitarity_residual() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn correction_shift_is_double_mod_sub() {
        // |n − k − m⟩ via two canonical subtractions equals the single residue
        let dim = d(7);
        for n in 0..7 {
            for k in 0..7 {
                for m in 0..7 {
                    let two_step = mod_sub(
                        mod_sub(dit(n, dim), dit(k, dim), dim).unwrap(),
                        dit(m, dim),
                        dim,
                    )
                    .unwrap();
                    let single = (n + 2 * 7 - k - m) % 7;
                    assert_eq!(two_step.value(), single);
                }
            }
        }
    }

    #[test]
    fn kerr_images_match_gxor() {
        // (i,k) = (1,2) at D=3 lands on mixed label (1, 2) since 1⊖2 = 2
        let images = kerr_gxor_images(d(3));
        let col = 3 + 2;
        assert!((images[(col, col)] - C64::new(1.0, 0.0)).norm() < 1e-12);

        // D=2: conjugation is trivial for real ±1 phases, image matrix is CNOT
        let images2 = kerr_gxor_images(d(2));
        assert!(max_abs_diff(&images2, gxor_unitary(d(2)).mat()) < 1e-12);

        for dd in 2..=8 {
            assert!(kerr_gxor_residual(d(dd)) < 1e-10, "D={dd}");
        }
    }

    #[test]
    fn kerr_phase_per_step() {
        for dd in [2, 3, 8] {
            let params = KerrParams::new(d(dd));
            assert_eq!(params.phase_per_step(), TAU / dd as f64);
        }
    }

    #[test]
    fn bell_label_validation() {
        assert!(BellLabel::new(2, 0, d(3)).is_ok());
        assert!(BellLabel::new(3, 0, d(3)).is_err());
        assert_eq!(BellLabel::new(2, 1, d(3)).unwrap().flat(d(3)), 7);
    }
}
