//! Dense complex linear algebra over composite qudit systems.
//!
//! States and operators carry an explicit list of subsystem dimensions and are
//! flattened row-major (first subsystem most significant). All values are
//! immutable after construction; every operation returns a fresh value.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ring::{strides, unflatten, Dim, Dit};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Probabilities below this are treated as numerically zero.
pub(crate) const MIN_PROBABILITY: f64 = 1e-15;

/// Absolute tolerance for structural checks on amplitudes and matrix entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    atol: f64,
}

impl Tolerance {
    pub const DEFAULT_ATOL: f64 = 1e-10;

    /// Eigenvalues above this (negative) floor count as non-negative.
    pub const EIGENVALUE_FLOOR: f64 = -1e-10;

    pub fn new(atol: f64) -> Result<Self> {
        if !(atol > 0.0 && atol <= 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must lie in (0, 1e-6], got {atol}"
            )));
        }
        Ok(Tolerance { atol })
    }

    pub fn atol(self) -> f64 {
        self.atol
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            atol: Self::DEFAULT_ATOL,
        }
    }
}

fn total_dim(dims: &[Dim]) -> usize {
    dims.iter().map(|d| d.get()).product()
}

fn check_dims_nonempty(dims: &[Dim]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument(
            "subsystem dimension list must not be empty".into(),
        ));
    }
    Ok(())
}

fn check_same_dims(a: &[Dim], b: &[Dim]) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Largest entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise absolute difference between two vectors.
pub fn max_abs_diff_vec(a: &CVec, b: &CVec) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

// ---------------------------------------------------------------------------
// Subsystem targeting
// ---------------------------------------------------------------------------

/// Precomputed flat-index layout for applying an operator to a subset of
/// subsystems: `bases` enumerates flat indices with all target digits zero and
/// `offsets` enumerates the flat contribution of every target digit combination.
struct TargetLayout {
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

fn target_layout(dims: &[Dim], targets: &[usize]) -> Result<TargetLayout> {
    let n = dims.len();
    for &t in targets {
        if t >= n {
            return Err(Error::SubsystemOutOfRange { index: t, count: n });
        }
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if seen[t] {
            return Err(Error::InvalidArgument(format!(
                "duplicate target subsystem {t}"
            )));
        }
        seen[t] = true;
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target subsystems".into()));
    }

    let all_strides = strides(dims);
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t].get()).collect();
    let op_dim: usize = tdims.iter().product();

    let mut offsets = Vec::with_capacity(op_dim);
    for flat in 0..op_dim {
        let mut rem = flat;
        let mut off = 0;
        for pos in (0..tdims.len()).rev() {
            off += (rem % tdims[pos]) * all_strides[targets[pos]];
            rem /= tdims[pos];
        }
        offsets.push(off);
    }

    let total = total_dim(dims);
    let mut bases = Vec::with_capacity(total / op_dim);
    'outer: for idx in 0..total {
        let digits = unflatten(idx, dims);
        for &t in targets {
            if digits[t] != 0 {
                continue 'outer;
            }
        }
        bases.push(idx);
    }

    Ok(TargetLayout { offsets, bases })
}

/// In-place action of `op` on the targeted digits of a flat coefficient slice.
fn apply_layout(op: &CMat, layout: &TargetLayout, data: &mut [C64]) {
    let k = layout.offsets.len();
    let mut x = vec![C64::ZERO; k];
    for &base in &layout.bases {
        for (xi, &off) in x.iter_mut().zip(&layout.offsets) {
            *xi = data[base + off];
        }
        for r in 0..k {
            let mut acc = C64::ZERO;
            for (c, &xc) in x.iter().enumerate() {
                acc += op[(r, c)] * xc;
            }
            data[base + layout.offsets[r]] = acc;
        }
    }
}

// ---------------------------------------------------------------------------
// PureState
// ---------------------------------------------------------------------------

/// Normalized pure state of a composite system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<Dim>,
    amps: CVec,
}

impl PureState {
    /// Wraps an amplitude vector, checking length and normalization.
    pub fn new(dims: Vec<Dim>, amps: CVec, tol: Tolerance) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        if amps.len() != total {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol.atol() {
            return Err(Error::InvalidValue(format!(
                "state norm {norm} deviates from 1 beyond tolerance {}",
                tol.atol()
            )));
        }
        Ok(PureState { dims, amps })
    }

    /// Rescales an arbitrary nonzero amplitude vector to unit norm.
    pub fn normalized(dims: Vec<Dim>, amps: CVec) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        if amps.len() != total {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        let norm = amps.norm();
        if norm.powi(2) < MIN_PROBABILITY {
            return Err(Error::InvalidValue("cannot normalize a zero vector".into()));
        }
        Ok(PureState {
            dims,
            amps: amps.unscale(norm),
        })
    }

    /// Computational basis state |digits⟩.
    pub fn basis(dims: &[Dim], digits: &[usize]) -> Result<Self> {
        check_dims_nonempty(dims)?;
        if digits.len() != dims.len() {
            return Err(Error::DimMismatch(format!(
                "{} digits for {} subsystems",
                digits.len(),
                dims.len()
            )));
        }
        let mut flat = 0;
        for (&digit, &dim) in digits.iter().zip(dims) {
            if digit >= dim.get() {
                return Err(Error::DitOutOfRange {
                    value: digit,
                    dim: dim.get(),
                });
            }
            flat = flat * dim.get() + digit;
        }
        let mut amps = CVec::zeros(total_dim(dims));
        amps[flat] = C64::new(1.0, 0.0);
        Ok(PureState {
            dims: dims.to_vec(),
            amps,
        })
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<Dim>, amps: CVec) -> Self {
        PureState { dims, amps }
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn amps(&self) -> &CVec {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    /// Kronecker composite; subsystem order is `self` then `other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = CVec::zeros(self.amps.len() * other.amps.len());
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { dims, amps }
    }

    /// Inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        check_same_dims(&self.dims, &other.dims)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// ⟨ψ|ρ|ψ⟩, the overlap of this state with a density matrix.
    pub fn fidelity(&self, rho: &DensityMatrix) -> Result<f64> {
        check_same_dims(&self.dims, &rho.dims)?;
        let w = &rho.mat * &self.amps;
        Ok(self.amps.dotc(&w).re)
    }

    /// Rank-1 projector |ψ⟩⟨ψ|.
    pub fn to_density(&self) -> DensityMatrix {
        let mat = &self.amps * self.amps.adjoint();
        DensityMatrix {
            dims: self.dims.clone(),
            mat,
        }
    }

    /// Applies a unitary acting on the full composite system.
    pub fn apply(&self, op: &UnitaryOp) -> Result<Self> {
        check_same_dims(&self.dims, &op.dims)?;
        Ok(PureState {
            dims: self.dims.clone(),
            amps: &op.mat * &self.amps,
        })
    }

    /// Applies a unitary to the listed subsystems, identity elsewhere.
    ///
    /// `op.dims()` must equal the targeted subsystem dimensions in order.
    pub fn apply_on(&self, op: &UnitaryOp, targets: &[usize]) -> Result<Self> {
        let layout = target_layout(&self.dims, targets)?;
        let tdims: Vec<Dim> = targets.iter().map(|&t| self.dims[t]).collect();
        check_same_dims(&tdims, &op.dims)?;
        let mut amps = self.amps.clone();
        apply_layout(&op.mat, &layout, amps.as_mut_slice());
        Ok(PureState {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// True when the two states agree up to a global phase.
    pub fn coincides_up_to_phase(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        let overlap = self.overlap(other)?;
        Ok((overlap.norm() - 1.0).abs() <= tol.atol())
    }
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

/// Hermitian, positive-semidefinite, unit-trace operator on a composite system.
///
/// Constructors verify hermiticity and trace; positive semidefiniteness needs
/// an eigendecomposition and is verified by [`DensityMatrix::check_valid`],
/// the reusable assertion used by the test suites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<Dim>,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(dims: Vec<Dim>, mat: CMat, tol: Tolerance) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix for total dimension {total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let rho = DensityMatrix { dims, mat };
        let herm = rho.hermiticity_residual();
        if herm > tol.atol() {
            return Err(Error::InvalidValue(format!(
                "hermiticity residual {herm:.3e} exceeds tolerance"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol.atol() || tr.im.abs() > tol.atol() {
            return Err(Error::InvalidValue(format!(
                "trace {tr} deviates from 1 beyond tolerance"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<Dim>, mat: CMat) -> Self {
        DensityMatrix { dims, mat }
    }

    /// The maximally mixed state I/N.
    pub fn maximally_mixed(dims: Vec<Dim>) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        let mat = CMat::identity(total, total).unscale(total as f64);
        Ok(DensityMatrix { dims, mat })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.mat
            .iter()
            .zip(self.mat.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.mat.adjoint();
        max_abs_diff(&self.mat, &adj)
    }

    /// Eigenvalues (ascending) of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Verifies hermiticity, unit trace, and positive semidefiniteness.
    ///
    /// This is the one assertion the test suites lean on for state validity.
    pub fn check_valid(&self, tol: Tolerance) -> Result<()> {
        let herm = self.hermiticity_residual();
        if herm > tol.atol() {
            return Err(Error::InvalidValue(format!(
                "hermiticity residual {herm:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol.atol() || tr.im.abs() > tol.atol() {
            return Err(Error::InvalidValue(format!("trace {tr} deviates from 1")));
        }
        let min_eig = self.eigenvalues()[0];
        if min_eig < Tolerance::EIGENVALUE_FLOOR {
            return Err(Error::InvalidValue(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// Kronecker composite; subsystem order is `self` then `other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Reduced state over the kept subsystems (ascending original order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "must keep at least one subsystem".into(),
            ));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &k in &keep {
            if k >= n {
                return Err(Error::SubsystemOutOfRange { index: k, count: n });
            }
        }
        let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        if traced.is_empty() {
            return Ok(self.clone());
        }

        let all_strides = strides(&self.dims);
        let kept_offsets = subsystem_offsets(&self.dims, &all_strides, &keep);
        let traced_offsets = subsystem_offsets(&self.dims, &all_strides, &traced);

        let p = kept_offsets.len();
        let mut mat = CMat::zeros(p, p);
        for (a, &ka) in kept_offsets.iter().enumerate() {
            for (b, &kb) in kept_offsets.iter().enumerate() {
                let mut acc = C64::ZERO;
                for &t in &traced_offsets {
                    acc += self.mat[(ka + t, kb + t)];
                }
                mat[(a, b)] = acc;
            }
        }
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix { dims, mat })
    }

    /// Projects one subsystem onto |ket⟩, drops it, and renormalizes.
    ///
    /// Returns the post-measurement state on the remaining subsystems together
    /// with the outcome probability. A numerically zero outcome probability is
    /// an [`Error::ImpossibleOutcome`], never a silent renormalization.
    pub fn post_select(&self, subsystem: usize, ket: Dit) -> Result<(Self, f64)> {
        let n = self.dims.len();
        if subsystem >= n {
            return Err(Error::SubsystemOutOfRange {
                index: subsystem,
                count: n,
            });
        }
        if n == 1 {
            return Err(Error::InvalidArgument(
                "cannot post-select away the only subsystem".into(),
            ));
        }
        let d = self.dims[subsystem].get();
        if ket.value() >= d {
            return Err(Error::DitOutOfRange {
                value: ket.value(),
                dim: d,
            });
        }

        let all_strides = strides(&self.dims);
        let remaining: Vec<usize> = (0..n).filter(|&i| i != subsystem).collect();
        let rem_offsets = subsystem_offsets(&self.dims, &all_strides, &remaining);
        let fixed = ket.value() * all_strides[subsystem];

        let prob: f64 = rem_offsets
            .iter()
            .map(|&w| self.mat[(w + fixed, w + fixed)].re)
            .sum();
        if prob < MIN_PROBABILITY {
            return Err(Error::ImpossibleOutcome(prob));
        }

        let p = rem_offsets.len();
        let mut mat = CMat::zeros(p, p);
        for (a, &wa) in rem_offsets.iter().enumerate() {
            for (b, &wb) in rem_offsets.iter().enumerate() {
                mat[(a, b)] = self.mat[(wa + fixed, wb + fixed)] / prob;
            }
        }
        let dims = remaining.iter().map(|&k| self.dims[k]).collect();
        Ok((DensityMatrix { dims, mat }, prob))
    }

    /// Conjugation U ρ U† by a unitary on the full composite system.
    pub fn conjugated_by(&self, op: &UnitaryOp) -> Result<Self> {
        check_same_dims(&self.dims, &op.dims)?;
        let mat = &op.mat * &self.mat * op.mat.adjoint();
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            mat,
        })
    }

    /// Conjugation U ρ U† where U acts on the listed subsystems only.
    pub fn conjugate_on(&self, op: &UnitaryOp, targets: &[usize]) -> Result<Self> {
        let layout = target_layout(&self.dims, targets)?;
        let tdims: Vec<Dim> = targets.iter().map(|&t| self.dims[t]).collect();
        check_same_dims(&tdims, &op.dims)?;
        let n = self.mat.nrows();

        // U rho U+ = (U (U rho)+)+ , each factor applied column-wise.
        let mut b = self.mat.clone();
        for c in 0..n {
            let col = &mut b.as_mut_slice()[c * n..(c + 1) * n];
            apply_layout(&op.mat, &layout, col);
        }
        let mut bd = b.adjoint();
        for c in 0..n {
            let col = &mut bd.as_mut_slice()[c * n..(c + 1) * n];
            apply_layout(&op.mat, &layout, col);
        }
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            mat: bd.adjoint(),
        })
    }
}

/// Flat offsets contributed by all digit combinations of the listed subsystems.
fn subsystem_offsets(dims: &[Dim], all_strides: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let sdims: Vec<usize> = subsystems.iter().map(|&s| dims[s].get()).collect();
    let count: usize = sdims.iter().product();
    let mut offsets = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rem = flat;
        let mut off = 0;
        for pos in (0..sdims.len()).rev() {
            off += (rem % sdims[pos]) * all_strides[subsystems[pos]];
            rem /= sdims[pos];
        }
        offsets.push(off);
    }
    offsets
}

// ---------------------------------------------------------------------------
// UnitaryOp
// ---------------------------------------------------------------------------

/// Unitary operator with subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    dims: Vec<Dim>,
    mat: CMat,
}

impl UnitaryOp {
    /// Wraps a matrix, checking U†U = I within tolerance.
    pub fn new(dims: Vec<Dim>, mat: CMat, tol: Tolerance) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix for total dimension {total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let op = UnitaryOp { dims, mat };
        let residual = op.unitarity_residual();
        if residual > tol.atol() {
            return Err(Error::InvalidValue(format!(
                "unitarity residual {residual:.3e} exceeds tolerance"
            )));
        }
        Ok(op)
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<Dim>, mat: CMat) -> Self {
        UnitaryOp { dims, mat }
    }

    pub fn identity(dims: Vec<Dim>) -> Result<Self> {
        check_dims_nonempty(&dims)?;
        let total = total_dim(&dims);
        Ok(UnitaryOp {
            dims,
            mat: CMat::identity(total, total),
        })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Max-entry residual of U†U against the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.mat.nrows();
        let product = self.mat.adjoint() * &self.mat;
        max_abs_diff(&product, &CMat::identity(n, n))
    }

    /// Kronecker composite; subsystem order is `self` then `other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        UnitaryOp {
            dims,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Hermitian adjoint U†.
    pub fn adjoint(&self) -> Self {
        UnitaryOp {
            dims: self.dims.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// Entrywise complex conjugate U*.
    pub fn conj(&self) -> Self {
        UnitaryOp {
            dims: self.dims.clone(),
            mat: self.mat.map(|z| z.conj()),
        }
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &Self) -> Result<Self> {
        check_same_dims(&self.dims, &other.dims)?;
        Ok(UnitaryOp {
            dims: self.dims.clone(),
            mat: &other.mat * &self.mat,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::dft_unitary;

    fn d(v: usize) -> Dim {
        Dim::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tolerance_range() {
        assert!(Tolerance::new(1e-10).is_ok());
        assert!(Tolerance::new(1e-6).is_ok());
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1e-5).is_err());
        assert_eq!(Tolerance::default().atol(), 1e-10);
    }

    #[test]
    fn pure_state_norm_checked() {
        let amps_bad = CVec::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(PureState::new(vec![d(2)], amps_bad.clone(), Tolerance::default()).is_err());
        let st = PureState::normalized(vec![d(2)], amps_bad).unwrap();
        assert!((st.amps().norm() - 1.0).abs() < 1e-14);
        assert!(PureState::normalized(vec![d(2)], CVec::zeros(2)).is_err());
    }

    #[test]
    fn basis_state_flattening() {
        // |0⟩ ⊗ |1⟩ for qubits is basis vector 1 of 4
        let a = PureState::basis(&[d(2)], &[0]).unwrap();
        let b = PureState::basis(&[d(2)], &[1]).unwrap();
        let ab = a.tensor(&b);
        assert_eq!(ab.dims(), &[d(2), d(2)]);
        assert_eq!(ab.amps()[1], c(1.0, 0.0));
        assert_eq!(ab.amps().iter().filter(|z| z.norm() > 0.0).count(), 1);

        assert!(PureState::basis(&[d(2)], &[2]).is_err());
    }

    #[test]
    fn tensor_of_mixed_states() {
        let half = DensityMatrix::maximally_mixed(vec![d(2)]).unwrap();
        let quarter = half.tensor(&half);
        assert_eq!(quarter.dims(), &[d(2), d(2)]);
        assert!((quarter.trace().re - 1.0).abs() < 1e-14);
        let expected = CMat::identity(4, 4).unscale(4.0);
        assert!(max_abs_diff(quarter.mat(), &expected) < 1e-14);
    }

    #[test]
    fn tensor_of_unitaries() {
        let f2 = dft_unitary(d(2));
        let f22 = f2.tensor(&f2);
        assert_eq!(f22.total_dim(), 4);
        assert!(f22.unitarity_residual() < 1e-14);
    }

    #[test]
    fn partial_trace_recovers_factors() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = crate::teleport::random_pure_state(d(3), &mut rng).to_density();
            let b = crate::teleport::random_pure_state(d(2), &mut rng).to_density();
            let ab = a.tensor(&b);
            let ra = ab.partial_trace(&[0]).unwrap();
            let rb = ab.partial_trace(&[1]).unwrap();
            assert!(max_abs_diff(ra.mat(), a.mat()) < 1e-12);
            assert!(max_abs_diff(rb.mat(), b.mat()) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_maximally_entangled_state() {
        // either side of |ψ00⟩ alone is maximally mixed
        use crate::gates::{bell_state, BellLabel};
        let dim = d(3);
        let rho = bell_state(BellLabel::new(0, 0, dim).unwrap(), dim)
            .unwrap()
            .to_density();
        let expected = CMat::identity(3, 3).unscale(3.0);
        for keep in [0usize, 1] {
            let reduced = rho.partial_trace(&[keep]).unwrap();
            assert!(
                max_abs_diff(reduced.mat(), &expected) < 1e-14,
                "keep {keep}"
            );
        }
    }

    #[test]
    fn post_select_on_entangled_state() {
        // projecting the second qubit of |ψ00⟩ onto |0⟩ collapses the first
        use crate::gates::{bell_state, BellLabel};
        let dim = d(2);
        let rho = bell_state(BellLabel::new(0, 0, dim).unwrap(), dim)
            .unwrap()
            .to_density();
        let (state, prob) = rho.post_select(1, Dit::new(0, dim).unwrap()).unwrap();
        assert!((prob - 0.5).abs() < 1e-14);
        let zero = PureState::basis(&[dim], &[0]).unwrap().to_density();
        assert!(max_abs_diff(state.mat(), zero.mat()) < 1e-14);
    }

    #[test]
    fn partial_trace_keep_all_is_identity_op() {
        let rho = DensityMatrix::maximally_mixed(vec![d(2), d(3)]).unwrap();
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert!(max_abs_diff(same.mat(), rho.mat()) < 1e-15);
    }

    #[test]
    fn partial_trace_validates_indices() {
        let rho = DensityMatrix::maximally_mixed(vec![d(2), d(2)]).unwrap();
        assert!(rho.partial_trace(&[]).is_err());
        assert!(matches!(
            rho.partial_trace(&[2]),
            Err(Error::SubsystemOutOfRange { index: 2, count: 2 })
        ));
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = DensityMatrix::maximally_mixed(vec![d(3), d(4)]).unwrap();
        let red = rho.partial_trace(&[1]).unwrap();
        assert!((red.trace().re - 1.0).abs() < 1e-13);
        assert_eq!(red.dims(), &[d(4)]);
    }

    #[test]
    fn post_select_product_state() {
        let zz = PureState::basis(&[d(2), d(2)], &[0, 0])
            .unwrap()
            .to_density();
        let (state, prob) = zz.post_select(1, Dit::new(0, d(2)).unwrap()).unwrap();
        assert!((prob - 1.0).abs() < 1e-14);
        let z = PureState::basis(&[d(2)], &[0]).unwrap().to_density();
        assert!(max_abs_diff(state.mat(), z.mat()) < 1e-14);
    }

    #[test]
    fn post_select_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(vec![d(2), d(2)]).unwrap();
        let (state, prob) = rho.post_select(1, Dit::new(0, d(2)).unwrap()).unwrap();
        assert!((prob - 0.5).abs() < 1e-14);
        let expected = CMat::identity(2, 2).unscale(2.0);
        assert!(max_abs_diff(state.mat(), &expected) < 1e-14);
    }

    #[test]
    fn post_select_impossible_outcome() {
        let zz = PureState::basis(&[d(2), d(2)], &[0, 0])
            .unwrap()
            .to_density();
        let err = zz.post_select(1, Dit::new(1, d(2)).unwrap());
        assert!(matches!(err, Err(Error::ImpossibleOutcome(_))));
    }

    #[test]
    fn post_select_probabilities_sum_to_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let psi = crate::teleport::random_pure_state(d(3), &mut rng)
            .tensor(&crate::teleport::random_pure_state(d(3), &mut rng));
        let rho = psi.to_density();
        let mut total = 0.0;
        for outcome in 0..3 {
            match rho.post_select(0, Dit::new(outcome, d(3)).unwrap()) {
                Ok((_, p)) => total += p,
                Err(Error::ImpossibleOutcome(p)) => total += p,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_with_own_projector_is_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let psi = crate::teleport::random_pure_state(d(4), &mut rng);
        let fid = psi.fidelity(&psi.to_density()).unwrap();
        assert!((fid - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dim_mismatch_rejected() {
        let psi = PureState::basis(&[d(2)], &[0]).unwrap();
        let rho = DensityMatrix::maximally_mixed(vec![d(3)]).unwrap();
        assert!(psi.fidelity(&rho).is_err());
    }

    #[test]
    fn density_constructor_validates() {
        let mut m = CMat::identity(2, 2).unscale(2.0);
        assert!(DensityMatrix::new(vec![d(2)], m.clone(), Tolerance::default()).is_ok());
        m[(0, 1)] = c(0.3, 0.0); // breaks hermiticity
        assert!(DensityMatrix::new(vec![d(2)], m, Tolerance::default()).is_err());
        let scaled = CMat::identity(2, 2);
        assert!(DensityMatrix::new(vec![d(2)], scaled, Tolerance::default()).is_err());
    }

    #[test]
    fn check_valid_flags_negative_eigenvalues() {
        // diag(1.5, -0.5): hermitian, trace one, not PSD
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        let rho = DensityMatrix::new(vec![d(2)], m, Tolerance::default()).unwrap();
        assert!(rho.check_valid(Tolerance::default()).is_err());
        let ok = DensityMatrix::maximally_mixed(vec![d(2)]).unwrap();
        assert!(ok.check_valid(Tolerance::default()).is_ok());
    }

    #[test]
    fn unitary_constructor_validates() {
        let f = dft_unitary(d(3));
        assert!(UnitaryOp::new(vec![d(3)], f.mat().clone(), Tolerance::default()).is_ok());
        let not_unitary = CMat::identity(3, 3).scale(1.5);
        assert!(UnitaryOp::new(vec![d(3)], not_unitary, Tolerance::default()).is_err());
    }

    #[test]
    fn conjugate_on_matches_full_conjugation() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let psi = crate::teleport::random_pure_state(d(2), &mut rng)
            .tensor(&crate::teleport::random_pure_state(d(3), &mut rng));
        let rho = psi.to_density();
        let f3 = dft_unitary(d(3));
        let full = UnitaryOp::identity(vec![d(2)]).unwrap().tensor(&f3);
        let direct = rho.conjugated_by(&full).unwrap();
        let targeted = rho.conjugate_on(&f3, &[1]).unwrap();
        assert!(max_abs_diff(direct.mat(), targeted.mat()) < 1e-12);
    }

    #[test]
    fn apply_on_matches_full_apply() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let psi = crate::teleport::random_pure_state(d(3), &mut rng)
            .tensor(&crate::teleport::random_pure_state(d(2), &mut rng));
        let f3 = dft_unitary(d(3));
        let full = f3.tensor(&UnitaryOp::identity(vec![d(2)]).unwrap());
        let a = psi.apply(&full).unwrap();
        let b = psi.apply_on(&f3, &[0]).unwrap();
        assert!(max_abs_diff_vec(a.amps(), b.amps()) < 1e-13);
    }

    #[test]
    fn purity_of_pure_and_mixed() {
        let psi = PureState::basis(&[d(3)], &[1]).unwrap();
        assert!((psi.to_density().purity() - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(vec![d(3)]).unwrap();
        assert!((mixed.purity() - 1.0 / 3.0).abs() < 1e-14);
    }
}
