//! D-dimensional teleportation over a shared generalized Bell pair.
//!
//! The input qudit is particle 1, the shared pair |ψ_jk⟩ occupies particles
//! (2, 3), Alice Bell-measures (1, 2), and Bob holds particle 3. Conditioned
//! on Alice's outcome (l, m), Bob's particle is left in U_lm|χ⟩ up to a phase;
//! undoing U_lm recovers |χ⟩ exactly. Announcing the outcome costs
//! 2·log2(D) classical bits.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fourier::dft_unitary;
use crate::gates::{bell_state, correction_unitary, gxor_unitary, BellLabel};
use crate::linalg::{max_abs_diff_vec, CVec, PureState};
use crate::ring::{Dim, Dit};

/// Outcome of one teleportation run.
#[derive(Debug, Clone)]
pub struct TeleportRecord {
    pub outcome: BellLabel,
    pub probability: f64,
    pub bob_pre_correction: PureState,
    pub bob_post_correction: PureState,
    pub fidelity_with_input: f64,
    /// Classical communication cost of announcing the outcome, 2·log2(D).
    pub classical_bits: f64,
}

/// How Alice's Bell measurement outcome is chosen.
#[derive(Debug, Clone, Copy)]
pub enum OutcomeChoice {
    /// Post-select a specific outcome (l, m).
    Forced(BellLabel),
    /// Sample the outcome from the exact distribution with a seeded generator.
    Sampled { seed: u64 },
}

/// Classical bits needed to announce a D²-way outcome.
pub fn classical_bits(dim: Dim) -> f64 {
    2.0 * (dim.get() as f64).log2()
}

/// Haar-distributed random pure qudit state via normalized complex Gaussians.
pub fn random_pure_state<R: Rng + ?Sized>(dim: Dim, rng: &mut R) -> PureState {
    let amps = CVec::from_fn(dim.get(), |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(vec![dim], amps).expect("Gaussian vector is nonzero")
}

/// Checks the expansion of |χ⟩|ψ_jk⟩ over Bell states on particles (1, 2).
///
/// Builds both sides of
/// |χ⟩|ψ_jk⟩ = Σ_lm |ψ_lm⟩ ⊗ (e^{-i2πjm/D}/D) U_lm|χ⟩
/// and returns the largest amplitude deviation.
pub fn verify_teleport_identity(chi: &PureState, j: Dit, k: Dit, dim: Dim) -> Result<f64> {
    check_single_qudit(chi, dim)?;
    let d = dim.get();
    let lhs = chi.tensor(&bell_state(BellLabel { l: j, m: k }, dim)?);

    let mut rhs = CVec::zeros(d * d * d);
    for l in 0..d {
        for m in 0..d {
            let label = BellLabel::new(l, m, dim)?;
            let pair = bell_state(label, dim)?;
            let u = correction_unitary(label.l, label.m, j, k, dim)?;
            let scalar = C64::from_polar(
                1.0 / d as f64,
                -std::f64::consts::TAU * (j.value() * m) as f64 / d as f64,
            );
            let bob = u.mat() * chi.amps();
            for (pair_idx, pair_amp) in pair.amps().iter().enumerate() {
                if pair_amp.norm_sqr() == 0.0 {
                    continue;
                }
                for (b, bob_amp) in bob.iter().enumerate() {
                    rhs[pair_idx * d + b] += pair_amp * scalar * bob_amp;
                }
            }
        }
    }
    Ok(max_abs_diff_vec(lhs.amps(), &rhs))
}

/// Runs the full protocol for one input state and one measurement outcome.
///
/// The shared pair is prepared in |ψ_jk⟩. Every outcome occurs with
/// probability exactly 1/D² regardless of the input.
pub fn teleport(
    chi: &PureState,
    j: Dit,
    k: Dit,
    dim: Dim,
    choice: OutcomeChoice,
) -> Result<TeleportRecord> {
    check_single_qudit(chi, dim)?;
    let d = dim.get();

    // Alice's disentangling rotation on (1, 2): GXOR then inverse Fourier.
    let full = chi.tensor(&bell_state(BellLabel { l: j, m: k }, dim)?);
    let rotated = full
        .apply_on(&gxor_unitary(dim), &[0, 1])?
        .apply_on(&dft_unitary(dim).adjoint(), &[0])?;

    let outcome = match choice {
        OutcomeChoice::Forced(label) => BellLabel::new(label.l.value(), label.m.value(), dim)?,
        OutcomeChoice::Sampled { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_outcome(&rotated, dim, &mut rng)?
        }
    };

    let offset = outcome.flat(dim) * d;
    let bob_raw = CVec::from_fn(d, |b, _| rotated.amps()[offset + b]);
    let probability = bob_raw.norm_squared();
    let bob_pre_correction = PureState::normalized(vec![dim], bob_raw)
        .map_err(|_| Error::ImpossibleOutcome(probability))?;

    let correction = correction_unitary(outcome.l, outcome.m, j, k, dim)?.adjoint();
    let bob_post_correction = bob_pre_correction.apply(&correction)?;
    let fidelity_with_input = chi.overlap(&bob_post_correction)?.norm_sqr();

    Ok(TeleportRecord {
        outcome,
        probability,
        bob_pre_correction,
        bob_post_correction,
        fidelity_with_input,
        classical_bits: classical_bits(dim),
    })
}

/// Aggregate statistics over repeated randomized teleportation runs.
#[derive(Debug, Clone)]
pub struct TeleportSummary {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub classical_bits: f64,
    /// Outcome tallies indexed by flat label l·D + m.
    pub outcome_counts: Vec<u64>,
}

/// Teleports `trials` random input states with sampled outcomes.
///
/// Each trial draws its own generator from a per-trial seed derived
/// deterministically from the master seed, so trials are independently
/// reproducible and safe to parallelize.
pub fn teleport_demo(dim: Dim, trials: usize, seed: u64) -> Result<TeleportSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let d = dim.get();
    let mut counts = vec![0u64; d * d];
    let mut min_fid = f64::INFINITY;
    let mut sum_fid = 0.0;
    for trial in 0..trials {
        let trial_seed = splitmix64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let chi = random_pure_state(dim, &mut rng);
        let record = teleport(
            &chi,
            Dit::new(0, dim)?,
            Dit::new(0, dim)?,
            dim,
            OutcomeChoice::Sampled { seed: trial_seed },
        )?;
        counts[record.outcome.flat(dim)] += 1;
        min_fid = min_fid.min(record.fidelity_with_input);
        sum_fid += record.fidelity_with_input;
    }
    Ok(TeleportSummary {
        dim: d,
        trials,
        seed,
        min_fidelity: min_fid,
        mean_fidelity: sum_fid / trials as f64,
        classical_bits: classical_bits(dim),
        outcome_counts: counts,
    })
}

fn check_single_qudit(chi: &PureState, dim: Dim) -> Result<()> {
    if chi.dims() != [dim] {
        return Err(Error::DimMismatch(format!(
            "input must be a single qudit of dimension {dim}, got {:?}",
            chi.dims()
        )));
    }
    Ok(())
}

fn sample_outcome<R: Rng + ?Sized>(
    rotated: &PureState,
    dim: Dim,
    rng: &mut R,
) -> Result<BellLabel> {
    let d = dim.get();
    let mut draw: f64 = rng.random();
    for l in 0..d {
        for m in 0..d {
            let offset = (l * d + m) * d;
            let p: f64 = (0..d).map(|b| rotated.amps()[offset + b].norm_sqr()).sum();
            if draw < p {
                return BellLabel::new(l, m, dim);
            }
            draw -= p;
        }
    }
    // guard against accumulated rounding pushing the draw past the last bin
    BellLabel::new(d - 1, d - 1, dim)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
