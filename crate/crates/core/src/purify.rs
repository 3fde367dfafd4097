//! Post-selected nonlinear map and the iterated purification experiment.
//!
//! Interacting a control system with N identical copies through GXOR gates and
//! projecting every target qudit onto |0⟩ raises each density-matrix entry to
//! the power 1+N (then renormalizes). The closed form lives in
//! [`nonlinear_map`]; [`nonlinear_map_oracle`] rebuilds the same map from the
//! explicit GXOR-plus-projection circuit and exists to cross-check it.
//!
//! Iterating the squaring map on a two-qudit state and twirling with
//! U ⊗ U* after each step drives every non-separable Werner state towards the
//! maximally entangled |ψ00⟩, which is the unique invariant state of the
//! combined step. Alternating the full-D Fourier transform with the truncated
//! (D-1)-dimensional one widens the basin of convergence to the whole
//! non-separable region λ > 1/(1+D).
//!
//! The states λ|ψ00⟩⟨ψ00| + (1-λ)·I/D² are called Werner states here;
//! structurally they are the isotropic (U ⊗ U*-invariant) family.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::{dft_unitary, truncated_dft_unitary};
use crate::gates::{bell_state, gxor_unitary, BellLabel};
use crate::linalg::{max_abs_diff, CMat, DensityMatrix, UnitaryOp};
use crate::ring::{Dim, Dit};

/// Hard cap on the per-axis dimension of the oracle's dense construction.
pub const ORACLE_DIM_GUARD: usize = 10_000;

const MIN_SUCCESS_PROBABILITY: f64 = 1e-15;

/// Entrywise power map: entries become σ_ij^(1+N), normalized by the
/// diagonal power sum.
///
/// Returns the output state and the success probability
/// p_c = Σ_i σ_ii^(1+N) of the post-selected branch. The output is again a
/// valid density matrix (an iterated Schur product of PSD matrices).
pub fn nonlinear_map(sigma: &DensityMatrix, n_copies: usize) -> Result<(DensityMatrix, f64)> {
    if n_copies == 0 {
        return Err(Error::InvalidArgument(
            "the map needs at least one target copy".into(),
        ));
    }
    let power = (1 + n_copies) as u32;
    let p_c: f64 = sigma
        .mat()
        .diagonal()
        .iter()
        .map(|z| z.powu(power).re)
        .sum();
    if p_c < MIN_SUCCESS_PROBABILITY {
        return Err(Error::VanishingSuccessProbability(p_c));
    }
    let mat = sigma.mat().map(|z| z.powu(power) / p_c);
    Ok((
        DensityMatrix::from_parts_unchecked(sigma.dims().to_vec(), mat),
        p_c,
    ))
}

/// Brute-force reconstruction of the nonlinear map from its circuit.
///
/// Builds σ_c ⊗ σ_t^⊗N over M·(1+N) qudits, applies GXOR between the j-th
/// control qudit and the j-th qudit of every target copy, post-selects every
/// target qudit on |0⟩, and returns the surviving control state with the
/// joint success probability. With σ_t = σ_c this must reproduce
/// [`nonlinear_map`] exactly; it is kept deliberately independent of the
/// closed form.
pub fn nonlinear_map_oracle(
    sigma_c: &DensityMatrix,
    sigma_t: &DensityMatrix,
    m_qudits: usize,
    n_copies: usize,
) -> Result<(DensityMatrix, f64)> {
    if n_copies == 0 {
        return Err(Error::InvalidArgument(
            "the map needs at least one target copy".into(),
        ));
    }
    if sigma_c.dims().len() != m_qudits {
        return Err(Error::DimMismatch(format!(
            "control has {} qudits, expected M = {m_qudits}",
            sigma_c.dims().len()
        )));
    }
    if sigma_c.dims() != sigma_t.dims() {
        return Err(Error::DimMismatch(format!(
            "control dims {:?} vs target dims {:?}",
            sigma_c.dims(),
            sigma_t.dims()
        )));
    }

    let block = sigma_c.total_dim();
    let mut total = block;
    for _ in 0..n_copies {
        total = total
            .checked_mul(block)
            .filter(|&t| t <= ORACLE_DIM_GUARD)
            .ok_or_else(|| {
                Error::CapacityExceeded(format!(
                    "oracle needs a dense axis of {block}^{} > {ORACLE_DIM_GUARD}",
                    1 + n_copies
                ))
            })?;
    }
    let _ = total;

    let mut big = sigma_c.clone();
    for _ in 0..n_copies {
        big = big.tensor(sigma_t);
    }

    for j in 0..m_qudits {
        let gate = gxor_unitary(sigma_c.dims()[j]);
        for i in 0..n_copies {
            let target_qudit = m_qudits * (1 + i) + j;
            big = big.conjugate_on(&gate, &[j, target_qudit])?;
        }
    }

    let mut probability = 1.0;
    for idx in (m_qudits..m_qudits * (1 + n_copies)).rev() {
        let zero = Dit::new(0, big.dims()[idx])?;
        match big.post_select(idx, zero) {
            Ok((next, p)) => {
                probability *= p;
                big = next;
            }
            Err(Error::ImpossibleOutcome(p)) => {
                return Err(Error::VanishingSuccessProbability(probability * p));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((big, probability))
}

/// Structural findings about one application of the squaring map.
#[derive(Debug, Clone)]
pub struct MapPropertiesReport {
    pub output: DensityMatrix,
    pub success_prob: f64,
    pub output_hermiticity_residual: f64,
    pub output_trace_residual: f64,
    pub output_min_eigenvalue: f64,
    /// Second-largest output eigenvalue; ~0 certifies a rank-1 output.
    pub output_second_eigenvalue: f64,
    /// Tr σ² of the input; 1 identifies pure inputs.
    pub input_purity: f64,
    /// Max-entry distance between σ and its sign-flipped twin ZσZ†.
    pub witness_input_distance: f64,
    /// Max-entry distance between the two outputs; ~0 witnesses non-injectivity.
    pub witness_output_distance: f64,
    /// Max-entry distance between input and output; ~0 for invariant states.
    pub fixed_point_residual: f64,
}

/// Applies the squaring map once and reports its structural properties:
/// output validity residuals, the non-injectivity witness T(σ) = T(ZσZ†)
/// with Z flipping the sign of the last basis state, the fixed-point
/// residual, and the output rank diagnostic for pure inputs.
pub fn map_properties_check(sigma: &DensityMatrix) -> Result<MapPropertiesReport> {
    let (output, success_prob) = nonlinear_map(sigma, 1)?;

    let n = sigma.total_dim();
    let flipped = DensityMatrix::from_parts_unchecked(
        sigma.dims().to_vec(),
        CMat::from_fn(n, n, |r, c| {
            let sign = if (r == n - 1) != (c == n - 1) {
                -1.0
            } else {
                1.0
            };
            sigma.mat()[(r, c)] * sign
        }),
    );
    let (flipped_output, _) = nonlinear_map(&flipped, 1)?;

    let eigs = output.eigenvalues();
    let output_min_eigenvalue = eigs[0];
    let output_second_eigenvalue = eigs[eigs.len() - 2];
    let trace = output.trace();

    Ok(MapPropertiesReport {
        output_hermiticity_residual: output.hermiticity_residual(),
        output_trace_residual: ((trace.re - 1.0).powi(2) + trace.im.powi(2)).sqrt(),
        output_min_eigenvalue,
        output_second_eigenvalue,
        input_purity: sigma.purity(),
        witness_input_distance: max_abs_diff(sigma.mat(), flipped.mat()),
        witness_output_distance: max_abs_diff(output.mat(), flipped_output.mat()),
        fixed_point_residual: max_abs_diff(output.mat(), sigma.mat()),
        output,
        success_prob,
    })
}

/// The two-qudit mixture λ|ψ00⟩⟨ψ00| + (1-λ)·I/D².
pub fn werner_state(lambda: f64, dim: Dim) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "Werner weight must lie in [0, 1], got {lambda}"
        )));
    }
    let projector = bell_state(BellLabel::new(0, 0, dim)?, dim)?.to_density();
    let n = projector.total_dim();
    let noise = (1.0 - lambda) / n as f64;
    let mat = CMat::from_fn(n, n, |r, c| {
        let mut z = projector.mat()[(r, c)] * lambda;
        if r == c {
            z += C64::new(noise, 0.0);
        }
        z
    });
    Ok(DensityMatrix::from_parts_unchecked(vec![dim, dim], mat))
}

/// λ_D = 1/(1+D): the Werner state is non-separable exactly for λ above this.
pub fn separability_threshold(dim: Dim) -> f64 {
    1.0 / (1.0 + dim.get() as f64)
}

/// Local twirl (U ⊗ U*) σ (U ⊗ U*)† of a two-qudit state.
pub fn twirl(sigma: &DensityMatrix, u: &UnitaryOp) -> Result<DensityMatrix> {
    match sigma.dims() {
        [a, b] if a == b && sigma.dims()[..1] == *u.dims() => {}
        _ => return Err(Error::DimMismatch(format!(
            "twirl needs two qudits matching the local unitary, got state {:?} and unitary {:?}",
            sigma.dims(),
            u.dims()
        ))),
    }
    sigma.conjugate_on(u, &[0])?.conjugate_on(&u.conj(), &[1])
}

/// Which local unitary the twirl uses after a purification step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwirlKind {
    /// Fourier transform over all D levels.
    FullDft,
    /// Fourier transform over the first D-1 levels, identity on the last.
    TruncatedDft,
    /// No twirl.
    Identity,
}

impl TwirlKind {
    fn unitary(self, dim: Dim) -> Option<UnitaryOp> {
        match self {
            TwirlKind::FullDft => Some(dft_unitary(dim)),
            TwirlKind::TruncatedDft => Some(truncated_dft_unitary(dim)),
            TwirlKind::Identity => None,
        }
    }
}

/// Default alternating twirl schedule: full DFT on even steps, truncated on odd.
pub const DEFAULT_TWIRL_SCHEDULE: [TwirlKind; 2] = [TwirlKind::FullDft, TwirlKind::TruncatedDft];

/// One purification step: entrywise squaring, then the scheduled twirl.
///
/// Even step indices twirl with the full-D Fourier transform, odd ones with
/// the truncated (D-1)-dimensional one. Returns the new state and the step's
/// success probability.
pub fn purification_step(sigma: &DensityMatrix, step_index: usize) -> Result<(DensityMatrix, f64)> {
    let kind = DEFAULT_TWIRL_SCHEDULE[step_index % 2];
    purification_step_with(sigma, kind, 1)
}

fn purification_step_with(
    sigma: &DensityMatrix,
    kind: TwirlKind,
    n_copies: usize,
) -> Result<(DensityMatrix, f64)> {
    let dim = match sigma.dims() {
        [a, b] if a == b => *a,
        other => {
            return Err(Error::DimMismatch(format!(
                "purification acts on two equal qudits, got {other:?}"
            )))
        }
    };
    let (mapped, p_c) = nonlinear_map(sigma, n_copies)?;
    let twirled = match kind.unitary(dim) {
        Some(u) => twirl(&mapped, &u)?,
        None => mapped,
    };
    Ok((twirled, p_c))
}

/// Parameters of a purification run.
#[derive(Debug, Clone)]
pub struct PurifyConfig {
    pub dim: Dim,
    /// Werner weight of the initial state.
    pub lambda: f64,
    /// Target copies consumed per step; 1 reproduces entrywise squaring.
    pub n_copies: usize,
    pub max_iters: usize,
    pub fidelity_target: f64,
    /// Cycled over the iterations.
    pub twirl_schedule: Vec<TwirlKind>,
}

impl PurifyConfig {
    pub const DEFAULT_MAX_ITERS: usize = 500;
    pub const DEFAULT_FIDELITY_TARGET: f64 = 0.999;

    pub fn new(dim: Dim, lambda: f64) -> Self {
        PurifyConfig {
            dim,
            lambda,
            n_copies: 1,
            max_iters: Self::DEFAULT_MAX_ITERS,
            fidelity_target: Self::DEFAULT_FIDELITY_TARGET,
            twirl_schedule: DEFAULT_TWIRL_SCHEDULE.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!(
                "Werner weight must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.fidelity_target > 0.0 && self.fidelity_target <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fidelity target must lie in (0, 1], got {}",
                self.fidelity_target
            )));
        }
        if self.n_copies == 0 {
            return Err(Error::InvalidArgument("n_copies must be at least 1".into()));
        }
        if self.twirl_schedule.is_empty() {
            return Err(Error::InvalidArgument(
                "twirl schedule must not be empty".into(),
            ));
        }
        Ok(())
    }
}

/// Snapshot after one purification step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifyStepRecord {
    pub iteration: usize,
    pub fidelity: f64,
    pub step_success_prob: f64,
    pub cumulative_success_prob: f64,
}

/// Full record of a purification run.
#[derive(Debug, Clone)]
pub struct PurificationTrace {
    pub steps: Vec<PurifyStepRecord>,
    pub converged: bool,
    pub iterations_used: usize,
    pub initial_fidelity: f64,
    pub final_fidelity: f64,
    /// Why the run stopped early, e.g. a vanishing success probability.
    pub failure_reason: Option<String>,
}

/// Iterates the purification step on a Werner state until the fidelity with
/// |ψ00⟩ reaches the target or the iteration budget runs out.
pub fn run_purification(config: &PurifyConfig) -> Result<PurificationTrace> {
    config.validate()?;
    let initial = werner_state(config.lambda, config.dim)?;
    run_purification_from(&initial, config)
}

/// Same as [`run_purification`] but starting from an explicit state.
pub fn run_purification_from(
    initial: &DensityMatrix,
    config: &PurifyConfig,
) -> Result<PurificationTrace> {
    config.validate()?;
    if initial.dims() != [config.dim, config.dim] {
        return Err(Error::DimMismatch(format!(
            "initial state dims {:?} do not match two qudits of dimension {}",
            initial.dims(),
            config.dim
        )));
    }
    let target_state = bell_state(BellLabel::new(0, 0, config.dim)?, config.dim)?;

    let initial_fidelity = target_state.fidelity(initial)?;
    let mut trace = PurificationTrace {
        steps: Vec::new(),
        converged: initial_fidelity >= config.fidelity_target,
        iterations_used: 0,
        initial_fidelity,
        final_fidelity: initial_fidelity,
        failure_reason: None,
    };
    if trace.converged {
        return Ok(trace);
    }

    let mut sigma = initial.clone();
    let mut cumulative = 1.0;
    for iteration in 1..=config.max_iters {
        let kind = config.twirl_schedule[(iteration - 1) % config.twirl_schedule.len()];
        let (next, p_c) = match purification_step_with(&sigma, kind, config.n_copies) {
            Ok(pair) => pair,
            Err(Error::VanishingSuccessProbability(p)) => {
                trace.failure_reason = Some(format!(
                    "vanishing success probability {p:.3e} at iteration {iteration}"
                ));
                break;
            }
            Err(e) => return Err(e),
        };
        sigma = next;
        cumulative *= p_c;
        let fidelity = target_state.fidelity(&sigma)?;
        trace.steps.push(PurifyStepRecord {
            iteration,
            fidelity,
            step_success_prob: p_c,
            cumulative_success_prob: cumulative,
        });
        trace.iterations_used = iteration;
        trace.final_fidelity = fidelity;
        if fidelity >= config.fidelity_target {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// One cell of a purification sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dim: usize,
    pub lambda: f64,
    pub threshold: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_fidelity: f64,
    pub cumulative_success_prob: f64,
}

/// Runs [`run_purification`] over the (D, λ) grid, one row per cell.
pub fn sweep(dims: &[Dim], lambdas: &[f64], template: &PurifyConfig) -> Result<Vec<SweepRow>> {
    if dims.is_empty() || lambdas.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep grids must not be empty".into(),
        ));
    }
    let mut rows = Vec::with_capacity(dims.len() * lambdas.len());
    for &dim in dims {
        for &lambda in lambdas {
            let config = PurifyConfig {
                dim,
                lambda,
                ..template.clone()
            };
            let trace = run_purification(&config)?;
            let cumulative = trace
                .steps
                .last()
                .map(|s| s.cumulative_success_prob)
                .unwrap_or(1.0);
            rows.push(SweepRow {
                dim: dim.get(),
                lambda,
                threshold: separability_threshold(dim),
                converged: trace.converged,
                iterations_used: trace.iterations_used,
                final_fidelity: trace.final_fidelity,
                cumulative_success_prob: cumulative,
            });
        }
    }
    Ok(rows)
}
