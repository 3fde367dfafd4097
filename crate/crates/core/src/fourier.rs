//! Discrete Fourier transforms as one-qudit unitaries.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::linalg::{CMat, UnitaryOp};
use crate::ring::Dim;

/// The D-dimensional discrete Fourier transform F.
///
/// F|l⟩ = (1/√D) Σ_k e^{i2πlk/D} |k⟩, i.e. entries F[k][l] = e^{i2πkl/D}/√D
/// with the positive-sign kernel.
pub fn dft_unitary(dim: Dim) -> UnitaryOp {
    let d = dim.get();
    let scale = 1.0 / (d as f64).sqrt();
    let mat = CMat::from_fn(d, d, |k, l| {
        C64::from_polar(scale, TAU * (k * l % d) as f64 / d as f64)
    });
    UnitaryOp::from_parts_unchecked(vec![dim], mat)
}

/// Block unitary acting as the (D-1)-dimensional DFT on span{|0⟩,...,|D-2⟩}
/// and as the identity on |D-1⟩.
///
/// For D = 2 the 1-dimensional DFT is the scalar 1, so this is the identity.
pub fn truncated_dft_unitary(dim: Dim) -> UnitaryOp {
    let d = dim.get();
    let t = d - 1;
    let mut mat = CMat::zeros(d, d);
    mat[(t, t)] = C64::new(1.0, 0.0);
    if t == 1 {
        mat[(0, 0)] = C64::new(1.0, 0.0);
    } else {
        let scale = 1.0 / (t as f64).sqrt();
        for k in 0..t {
            for l in 0..t {
                mat[(k, l)] = C64::from_polar(scale, TAU * (k * l % t) as f64 / t as f64);
            }
        }
    }
    UnitaryOp::from_parts_unchecked(vec![dim], mat)
}
